//! The Baumslag-Solitar group BS(1,2) = ⟨x, t | t⁻¹xt = x²⟩.
//!
//! Elements are represented faithfully as affine maps z ↦ z/2^k + b with
//! b ∈ ℤ[1/2]: x acts as z ↦ z+1 and t as z ↦ z/2, so conjugation by t
//! halves translations (t^i x t^{-i} is translation by 1/2^i). The group is
//! the semidirect product ℤ[1/2] ⋊ ℤ in these coordinates, and membership in
//! finitely generated subgroups is decided exactly there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Letter, Word};

pub const GEN_X: usize = 0;
pub const GEN_T: usize = 1;

pub fn gen_names() -> Vec<String> {
    vec!["x".into(), "t".into()]
}

/// A dyadic rational num / 2^pow, normalized so num is odd or zero (and
/// pow = 0 when num = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dyadic {
    pub num: i128,
    pub pow: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, pow: 0 };

    pub fn new(num: i128, pow: u32) -> Dyadic {
        let mut d = Dyadic { num, pow };
        d.normalize();
        d
    }

    pub fn integer(n: i128) -> Dyadic {
        Dyadic::new(n, 0)
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.pow = 0;
            return;
        }
        while self.pow > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.pow -= 1;
        }
    }

    pub fn add(self, other: Dyadic) -> Result<Dyadic> {
        let pow = self.pow.max(other.pow);
        let a = shl_checked(self.num, pow - self.pow)?;
        let b = shl_checked(other.num, pow - other.pow)?;
        let num = a.checked_add(b).ok_or_else(|| Error::Overflow("dyadic add".into()))?;
        Ok(Dyadic::new(num, pow))
    }

    pub fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, pow: self.pow }
    }

    /// self / 2^k for k possibly negative (i.e. multiply by 2^-k).
    pub fn shift(self, k: i64) -> Result<Dyadic> {
        if self.num == 0 {
            return Ok(Dyadic::ZERO);
        }
        let pow = self.pow as i64 + k;
        if pow >= 0 {
            if pow > 500 {
                return Err(Error::Overflow("dyadic exponent".into()));
            }
            Ok(Dyadic::new(self.num, pow as u32))
        } else {
            Ok(Dyadic::new(shl_checked(self.num, (-pow) as u32)?, 0))
        }
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// True when self / other is an integer (other nonzero).
    pub fn divides_into_integer(self, other: Dyadic) -> bool {
        // other / self in Z: odd parts divide and the power gap is okay
        if self.num == 0 {
            return other.num == 0;
        }
        if other.num == 0 {
            return true;
        }
        if other.num % self.num != 0 {
            return false;
        }
        // other/self = (other.num/self.num) * 2^(self.pow - other.pow)
        self.pow >= other.pow || (other.num / self.num) % (1i128 << (other.pow - self.pow)) == 0
    }

    /// other / self as an exact integer, when defined.
    pub fn div_exact(self, other: Dyadic) -> Option<i128> {
        if !self.divides_into_integer(other) {
            return None;
        }
        if other.num == 0 {
            return Some(0);
        }
        let q = other.num / self.num;
        if self.pow >= other.pow {
            q.checked_mul(1i128 << (self.pow - other.pow))
        } else {
            Some(q / (1i128 << (other.pow - self.pow)))
        }
    }
}

fn shl_checked(x: i128, k: u32) -> Result<i128> {
    if x == 0 {
        return Ok(0);
    }
    if k > 100 || x.unsigned_abs().leading_zeros() <= k + 1 {
        return Err(Error::Overflow("dyadic shift".into()));
    }
    Ok(x << k)
}

/// A BS(1,2) element: the affine map z ↦ z/2^k + b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BsElem {
    pub b: Dyadic,
    pub k: i64,
}

impl BsElem {
    pub const IDENTITY: BsElem = BsElem { b: Dyadic::ZERO, k: 0 };

    pub fn x() -> BsElem {
        BsElem { b: Dyadic::integer(1), k: 0 }
    }

    pub fn t() -> BsElem {
        BsElem { b: Dyadic::ZERO, k: 1 }
    }

    /// Composition as functions: (self ∘ other)(z) = self(other(z)).
    pub fn mul(self, other: BsElem) -> Result<BsElem> {
        // self: z/2^k1 + b1, other: z/2^k2 + b2
        // composite: z/2^(k1+k2) + b2/2^k1 + b1
        let k = self
            .k
            .checked_add(other.k)
            .ok_or_else(|| Error::Overflow("t-exponent".into()))?;
        let b = other.b.shift(self.k)?.add(self.b)?;
        Ok(BsElem { b, k })
    }

    pub fn inv(self) -> Result<BsElem> {
        // inverse of z/2^k + b is 2^k z - 2^k b
        Ok(BsElem { b: self.b.neg().shift(-self.k)?, k: -self.k })
    }

    pub fn pow(self, n: i64) -> Result<BsElem> {
        let base = if n < 0 { self.inv()? } else { self };
        let mut acc = BsElem::IDENTITY;
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(base)?;
        }
        Ok(acc)
    }

    pub fn is_identity(self) -> bool {
        self == BsElem::IDENTITY
    }

    /// t^i x t^{-i}, the translation by 1/2^i (for i >= 0).
    pub fn a(i: u32) -> BsElem {
        BsElem { b: Dyadic::new(1, i), k: 0 }
    }
}

pub fn eval(w: &Word) -> Result<BsElem> {
    let mut acc = BsElem::IDENTITY;
    for &l in &w.0 {
        let g = match l.gen {
            GEN_X => BsElem::x(),
            GEN_T => BsElem::t(),
            _ => return Err(Error::InvalidWord(format!("BS(1,2) has 2 generators, got index {}", l.gen))),
        };
        let g = if l.inv { g.inv()? } else { g };
        acc = acc.mul(g)?;
    }
    Ok(acc)
}

/// Britton normal form t^p x^m t^{-q} with p, q >= 0 and m odd unless p or q
/// is zero; pure powers of t have m = 0 and p*q = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsNormalForm {
    pub p: u32,
    pub m: i128,
    pub q: u32,
}

pub fn normal_form_of(e: BsElem) -> BsNormalForm {
    // e is z ↦ z/2^k + b with b = m/2^p in lowest terms; then
    // e = t^p x^m t^{-q} with q = p - k.
    if e.b.is_zero() {
        if e.k >= 0 {
            return BsNormalForm { p: e.k as u32, m: 0, q: 0 };
        }
        return BsNormalForm { p: 0, m: 0, q: (-e.k) as u32 };
    }
    let mut p = e.b.pow as i64;
    let mut m = e.b.num;
    let mut q = p - e.k;
    // when q would be negative, un-reduce the dyadic (m even is then allowed
    // because p stays clamped at its minimum on the other side)
    while q < 0 {
        m *= 2;
        p += 1;
        q += 1;
    }
    while p < 0 {
        m *= 2;
        p += 1;
    }
    BsNormalForm { p: p as u32, m, q: q as u32 }
}

pub fn render_normal_form(nf: &BsNormalForm) -> Result<Word> {
    let total = nf.p as i128 + nf.m.unsigned_abs() as i128 + nf.q as i128;
    if total > 1_000_000 {
        return Err(Error::Resource {
            what: "normal form rendering".into(),
            reached: format!("{} letters", total),
        });
    }
    let mut letters = Vec::new();
    for _ in 0..nf.p {
        letters.push(Letter::pos(GEN_T));
    }
    for _ in 0..nf.m.unsigned_abs() {
        letters.push(if nf.m > 0 { Letter::pos(GEN_X) } else { Letter::neg(GEN_X) });
    }
    for _ in 0..nf.q {
        letters.push(Letter::neg(GEN_T));
    }
    Ok(Word(letters))
}

/// Membership data for a finitely generated subgroup of BS(1,2), in the
/// ℤ[1/2] ⋊ ℤ coordinates.
///
/// The subgroup is N ⋊ ⟨s0⟩ where N is its intersection with the translation
/// part. When the projection to ℤ is trivial (`c = 0`), N is cyclic and
/// `trans_gen` generates it; otherwise N is a ℤ[1/2]-module generated by the
/// odd number `odd_gen` (0 for the trivial module) and s0 realizes the
/// minimal positive t-exponent `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsSubgroup {
    pub c: i64,
    pub s0: BsElem,
    pub trans_gen: Dyadic,
    pub odd_gen: i128,
}

impl BsSubgroup {
    pub fn from_generators(gens: &[BsElem]) -> Result<BsSubgroup> {
        let mut elems: Vec<BsElem> = gens.to_vec();
        // Euclid on the t-exponents, keeping witnesses as group elements
        loop {
            elems.retain(|e| !e.is_identity());
            elems.sort_by_key(|e| e.k.abs());
            let mut changed = false;
            let with_k: Vec<usize> =
                (0..elems.len()).filter(|&i| elems[i].k != 0).collect();
            if with_k.len() >= 2 {
                let i = with_k[0];
                let j = with_k[1];
                let (ki, kj) = (elems[i].k, elems[j].k);
                let qout = kj.div_euclid(ki);
                let reduced = elems[j].mul(elems[i].pow(-qout)?)?;
                elems[j] = reduced;
                changed = true;
            }
            if !changed {
                break;
            }
        }
        let s0 = elems.iter().find(|e| e.k != 0).copied();
        let c = s0.map(|e| e.k.abs()).unwrap_or(0);
        let s0 = match s0 {
            Some(e) if e.k < 0 => e.inv()?,
            Some(e) => e,
            None => BsElem::IDENTITY,
        };
        if c == 0 {
            // all generators are translations; the subgroup of Z[1/2] they
            // generate is cyclic, generated by the dyadic gcd
            let mut g: Option<Dyadic> = None;
            for e in gens {
                if e.b.is_zero() {
                    continue;
                }
                g = Some(match g {
                    None => e.b,
                    Some(cur) => dyadic_gcd(cur, e.b),
                });
            }
            return Ok(BsSubgroup {
                c: 0,
                s0: BsElem::IDENTITY,
                trans_gen: g.unwrap_or(Dyadic::ZERO),
                odd_gen: 0,
            });
        }
        // kernel part: reduce every generator by s0 powers; N is closed under
        // multiplication by 2^(+-c), so only odd parts matter
        let mut odd: i128 = 0;
        for e in gens {
            if e.k % c != 0 {
                // cannot happen: c divides all exponents after Euclid
                return Err(Error::Other("internal: t-exponent not reduced".into()));
            }
            let red = e.mul(s0.pow(-(e.k / c))?)?;
            if !red.b.is_zero() {
                odd = gcd_i128(odd, red.b.num);
            }
        }
        // products of generators can also contribute commutators
        // [g, s0] = g s0 g^-1 s0^-1; with g a translation this stays in N,
        // and scaling by 2^c is already absorbed by the odd-part gcd.
        Ok(BsSubgroup { c, s0, trans_gen: Dyadic::ZERO, odd_gen: odd })
    }

    pub fn contains(&self, e: BsElem) -> Result<bool> {
        if self.c == 0 {
            if e.k != 0 {
                return Ok(false);
            }
            if e.b.is_zero() {
                return Ok(true);
            }
            if self.trans_gen.is_zero() {
                return Ok(false);
            }
            return Ok(self.trans_gen.divides_into_integer(e.b));
        }
        if e.k % self.c != 0 {
            return Ok(false);
        }
        let red = e.mul(self.s0.pow(-(e.k / self.c))?)?;
        if red.b.is_zero() {
            return Ok(true);
        }
        if self.odd_gen == 0 {
            return Ok(false);
        }
        Ok(red.b.num % self.odd_gen == 0)
    }

    /// For a cyclic translation subgroup, expresses e as a power of the
    /// generator.
    pub fn express_as_power(&self, e: BsElem) -> Option<i128> {
        if self.c != 0 || e.k != 0 {
            return None;
        }
        self.trans_gen.div_exact(e.b)
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn dyadic_gcd(a: Dyadic, b: Dyadic) -> Dyadic {
    // scale both to a common denominator and gcd the numerators
    let pow = a.pow.max(b.pow);
    let an = a.num << (pow - a.pow);
    let bn = b.num << (pow - b.pow);
    Dyadic::new(gcd_i128(an, bn), pow)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(t: &str) -> Word {
        Word::parse(t, &gen_names()).unwrap()
    }

    #[test]
    fn presentation_relation_holds() {
        // t^-1 x t = x^2, straight from the presentation
        let lhs = eval(&w("t^-1*x*t")).unwrap();
        let rhs = eval(&w("x^2")).unwrap();
        assert_eq!(lhs, rhs);
        let nf = normal_form_of(lhs);
        assert_eq!((nf.p, nf.m, nf.q), (0, 2, 0));
    }

    #[test]
    fn conjugation_halves() {
        // t^i x t^-i is translation by 1/2^i
        for i in 0..6u32 {
            let e = eval(&w(&format!("t^{}*x*t^-{}", i, i))).unwrap();
            assert_eq!(e, BsElem::a(i));
            assert_eq!(e.b, Dyadic::new(1, i));
            assert_eq!(e.k, 0);
        }
    }

    #[test]
    fn normal_forms_are_canonical() {
        // x t^3 = t^3 x^8 in the group
        let e1 = eval(&w("x*t^3")).unwrap();
        let e2 = eval(&w("t^3*x^8")).unwrap();
        assert_eq!(e1, e2);
        let nf = normal_form_of(e1);
        assert_eq!((nf.p, nf.m, nf.q), (3, 8, 0));
        // x t^-1: t^0 x t^-1 is not reducible further
        let nf = normal_form_of(eval(&w("x*t^-1")).unwrap());
        assert_eq!((nf.p, nf.m, nf.q), (0, 1, 1));
        // round trip through rendering
        for text in ["t^-1*x*t", "x*t^3", "t*x*t^-1", "t^-2*x^5*t^3", "x^-3*t^2"] {
            let e = eval(&w(text)).unwrap();
            let rendered = render_normal_form(&normal_form_of(e)).unwrap();
            assert_eq!(eval(&rendered).unwrap(), e, "round trip failed for {}", text);
        }
    }

    #[test]
    fn membership_in_a0() {
        // A0 = <x>; t x t^-1 has coordinate 1/2, not in Z
        let a0 = BsSubgroup::from_generators(&[BsElem::x()]).unwrap();
        assert!(!a0.contains(eval(&w("t*x*t^-1")).unwrap()).unwrap());
        assert!(a0.contains(eval(&w("x^5")).unwrap()).unwrap());
        assert!(!a0.contains(eval(&w("t")).unwrap()).unwrap());
    }

    #[test]
    fn chain_containments_index_two() {
        // A_i = <t^i x t^-i>, A_i < A_{i+1} with a_{i+1}^2 = a_i
        for i in 0..20u32 {
            let ai = BsSubgroup::from_generators(&[BsElem::a(i)]).unwrap();
            let a_next = BsSubgroup::from_generators(&[BsElem::a(i + 1)]).unwrap();
            assert!(a_next.contains(BsElem::a(i)).unwrap());
            assert!(!ai.contains(BsElem::a(i + 1)).unwrap());
            assert_eq!(BsElem::a(i + 1).pow(2).unwrap(), BsElem::a(i));
            assert_eq!(a_next.express_as_power(BsElem::a(i)), Some(2));
        }
    }

    #[test]
    fn whole_group_membership() {
        let h = BsSubgroup::from_generators(&[BsElem::x(), BsElem::t()]).unwrap();
        for text in ["x", "t", "t*x*t^-1", "t^-3*x^7*t", "x^-2*t^4*x"] {
            assert!(h.contains(eval(&w(text)).unwrap()).unwrap(), "{}", text);
        }
    }

    #[test]
    fn t_subgroup() {
        let tsub = BsSubgroup::from_generators(&[BsElem::t()]).unwrap();
        assert!(tsub.contains(eval(&w("t^5")).unwrap()).unwrap());
        assert!(!tsub.contains(eval(&w("x")).unwrap()).unwrap());
        assert!(!tsub.contains(eval(&w("t*x")).unwrap()).unwrap());
    }
}
