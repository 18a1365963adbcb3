//! Virtually cyclic groups as split extensions F ⋊ Q with F a finite normal
//! subgroup (the finite radical) and Q either ℤ or the infinite dihedral
//! group D∞ = ℤ₂*ℤ₂.
//!
//! Elements are pairs (f, q). For Q = ℤ the action is a single automorphism
//! α of F (the image of the stable generator t). For Q = D∞, written as
//! ℤ ⋊ ℤ₂ with translation z = s·u, the action is given by two involutive
//! automorphisms σ_s, σ_u.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::finite::FiniteGroup;
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VcExt {
    /// Quotient ℤ with stable generator t acting by alpha.
    Z { alpha: Vec<usize> },
    /// Quotient ℤ₂*ℤ₂ with involutions s, u acting by sigma_s, sigma_u.
    Dihedral { sigma_s: Vec<usize>, sigma_u: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VcGroup {
    pub name: String,
    pub radical: FiniteGroup,
    pub ext: VcExt,
}

/// Element of the quotient Q: for ℤ just n; for D∞ the pair (n, refl)
/// denoting z^n s^refl.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QElem {
    Z(i64),
    D { n: i64, refl: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VcElem {
    pub f: usize,
    pub q: QElem,
}

fn check_automorphism(g: &FiniteGroup, perm: &[usize], name: &str) -> Result<()> {
    let n = g.order();
    if perm.len() != n {
        return Err(Error::Validation {
            id: name.into(),
            reason: "action permutation has wrong length".into(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Validation { id: name.into(), reason: "action is not a bijection".into() });
        }
        seen[p] = true;
    }
    for a in 0..n {
        for b in 0..n {
            if perm[g.mul(a, b)] != g.mul(perm[a], perm[b]) {
                return Err(Error::Validation {
                    id: name.into(),
                    reason: "action is not an automorphism".into(),
                });
            }
        }
    }
    Ok(())
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&x| a[x]).collect()
}

fn perm_pow(p: &[usize], n: i64) -> Vec<usize> {
    let order = {
        let mut k = 1usize;
        let mut cur = p.to_vec();
        let id: Vec<usize> = (0..p.len()).collect();
        while cur != id {
            cur = compose(p, &cur);
            k += 1;
        }
        k
    };
    let e = (n.rem_euclid(order as i64)) as usize;
    let mut cur: Vec<usize> = (0..p.len()).collect();
    for _ in 0..e {
        cur = compose(p, &cur);
    }
    cur
}

impl VcGroup {
    pub fn new(name: &str, radical: FiniteGroup, ext: VcExt) -> Result<VcGroup> {
        match &ext {
            VcExt::Z { alpha } => check_automorphism(&radical, alpha, name)?,
            VcExt::Dihedral { sigma_s, sigma_u } => {
                check_automorphism(&radical, sigma_s, name)?;
                check_automorphism(&radical, sigma_u, name)?;
                let id: Vec<usize> = (0..radical.order()).collect();
                if compose(sigma_s, sigma_s) != id || compose(sigma_u, sigma_u) != id {
                    return Err(Error::Validation {
                        id: name.into(),
                        reason: "dihedral actions must be involutions".into(),
                    });
                }
            }
        }
        Ok(VcGroup { name: name.into(), radical, ext })
    }

    pub fn is_dihedral(&self) -> bool {
        matches!(self.ext, VcExt::Dihedral { .. })
    }

    /// Generator names: the radical's generators followed by t (Z type) or
    /// s, u (dihedral type).
    pub fn gen_names(&self) -> Vec<String> {
        let mut names = self.radical.generator_names();
        match self.ext {
            VcExt::Z { .. } => names.push("t".into()),
            VcExt::Dihedral { .. } => {
                names.push("s".into());
                names.push("u".into());
            }
        }
        names
    }

    pub fn n_gens(&self) -> usize {
        self.radical.generators.len() + if self.is_dihedral() { 2 } else { 1 }
    }

    pub fn identity(&self) -> VcElem {
        VcElem { f: self.radical.identity(), q: self.q_identity() }
    }

    fn q_identity(&self) -> QElem {
        match self.ext {
            VcExt::Z { .. } => QElem::Z(0),
            VcExt::Dihedral { .. } => QElem::D { n: 0, refl: false },
        }
    }

    /// The action of q on F as a permutation.
    fn action(&self, q: QElem) -> Vec<usize> {
        match (&self.ext, q) {
            (VcExt::Z { alpha }, QElem::Z(n)) => perm_pow(alpha, n),
            (VcExt::Dihedral { sigma_s, sigma_u }, QElem::D { n, refl }) => {
                // z = s*u acts by sigma_s ∘ sigma_u
                let z = compose(sigma_s, sigma_u);
                let mut p = perm_pow(&z, n);
                if refl {
                    p = compose(&p, sigma_s);
                }
                p
            }
            _ => unreachable!("QElem kind matches extension kind"),
        }
    }

    fn q_mul(&self, a: QElem, b: QElem) -> Result<QElem> {
        match (a, b) {
            (QElem::Z(x), QElem::Z(y)) => Ok(QElem::Z(
                x.checked_add(y).ok_or_else(|| Error::Overflow("vc exponent".into()))?,
            )),
            (QElem::D { n: n1, refl: r1 }, QElem::D { n: n2, refl: r2 }) => {
                let n2 = if r1 { -n2 } else { n2 };
                Ok(QElem::D {
                    n: n1.checked_add(n2).ok_or_else(|| Error::Overflow("vc exponent".into()))?,
                    refl: r1 ^ r2,
                })
            }
            _ => Err(Error::MixedAmbient("mixed quotient kinds".into())),
        }
    }

    fn q_inv(&self, a: QElem) -> QElem {
        match a {
            QElem::Z(n) => QElem::Z(-n),
            // (z^n s^e)^-1 = s^e z^-n = z^((-1)^e * -n) s^e
            QElem::D { n, refl } => QElem::D { n: if refl { n } else { -n }, refl },
        }
    }

    pub fn mul(&self, a: VcElem, b: VcElem) -> Result<VcElem> {
        let act = self.action(a.q);
        Ok(VcElem { f: self.radical.mul(a.f, act[b.f]), q: self.q_mul(a.q, b.q)? })
    }

    pub fn inv(&self, a: VcElem) -> Result<VcElem> {
        let qi = self.q_inv(a.q);
        let act = self.action(qi);
        Ok(VcElem { f: self.radical.inv(act[a.f]), q: qi })
    }

    pub fn pow(&self, a: VcElem, n: i64) -> Result<VcElem> {
        let base = if n < 0 { self.inv(a)? } else { a };
        let mut acc = self.identity();
        for _ in 0..n.unsigned_abs() {
            acc = self.mul(acc, base)?;
        }
        Ok(acc)
    }

    /// Generator as an element: radical generators first, then t or s, u.
    pub fn generator_elem(&self, idx: usize) -> Result<VcElem> {
        let nf = self.radical.generators.len();
        if idx < nf {
            return Ok(VcElem { f: self.radical.generators[idx], q: self.q_identity() });
        }
        match self.ext {
            VcExt::Z { .. } if idx == nf => {
                Ok(VcElem { f: self.radical.identity(), q: QElem::Z(1) })
            }
            VcExt::Dihedral { .. } if idx == nf => {
                Ok(VcElem { f: self.radical.identity(), q: QElem::D { n: 0, refl: true } })
            }
            VcExt::Dihedral { .. } if idx == nf + 1 => {
                // u = s z, i.e. (n, refl) = (-1, true)
                Ok(VcElem { f: self.radical.identity(), q: QElem::D { n: -1, refl: true } })
            }
            _ => Err(Error::InvalidWord(format!("{} has {} generators", self.name, self.n_gens()))),
        }
    }

    pub fn eval(&self, w: &Word) -> Result<VcElem> {
        let mut acc = self.identity();
        for &l in &w.0 {
            let g = self.generator_elem(l.gen)?;
            let g = if l.inv { self.inv(g)? } else { g };
            acc = self.mul(acc, g)?;
        }
        Ok(acc)
    }

    /// Canonical word for an element: a radical word followed by the quotient
    /// part (t^n, or an alternating s/u word for z^n s^refl).
    pub fn render(&self, e: VcElem) -> Word {
        let f_words = self.radical.element_words();
        let mut letters = f_words[e.f].0.clone();
        let nf = self.radical.generators.len();
        match e.q {
            QElem::Z(n) => {
                for _ in 0..n.unsigned_abs() {
                    letters.push(Letter { gen: nf, inv: n < 0 });
                }
            }
            QElem::D { n, refl } => {
                // z^n = (s u)^n, z^-1 = u s; s and u are involutions so we
                // always use positive letters
                let (first, second) = if n >= 0 { (nf, nf + 1) } else { (nf + 1, nf) };
                for _ in 0..n.unsigned_abs() {
                    letters.push(Letter::pos(first));
                    letters.push(Letter::pos(second));
                }
                if refl {
                    letters.push(Letter::pos(nf));
                }
            }
        }
        Word(letters)
    }

    /// Order of an element; `None` for infinite order.
    pub fn elem_order(&self, e: VcElem) -> Option<usize> {
        let infinite = match e.q {
            QElem::Z(n) => n != 0,
            QElem::D { n, refl } => !refl && n != 0,
        };
        if infinite {
            return None;
        }
        let mut acc = e;
        let mut k = 1usize;
        while acc != self.identity() {
            acc = self.mul(acc, e).expect("finite part cannot overflow");
            k += 1;
            debug_assert!(k <= 4 * self.radical.order() + 4);
        }
        Some(k)
    }

    pub fn has_two_torsion(&self) -> bool {
        if self.radical.has_two_torsion() {
            return true;
        }
        // the preimage of <s> in a dihedral extension has even order, so it
        // always contains an involution; the pure reflection s itself works:
        // (1, s)^2 = (1 * sigma_s(1), 1) = identity
        self.is_dihedral()
    }

    /// Presentation over [`gen_names`](Self::gen_names): the radical's
    /// relators, the quotient relators (none for ℤ; s² = u² = 1 for D∞), and
    /// one action relator per quotient generator and radical generator.
    pub fn presentation_relators(&self) -> Vec<Word> {
        let f_words = self.radical.element_words();
        let nf = self.radical.generators.len();
        let mut rels: Vec<Word> = self.radical.relators.clone();
        let action_rel = |qgen: usize, inverse_act: &dyn Fn(usize) -> usize| -> Vec<Word> {
            let mut out = Vec::new();
            for (i, &g) in self.radical.generators.iter().enumerate() {
                // q g q^-1 = act(g)  =>  relator  q * g * q^-1 * word(act(g))^-1
                let img = inverse_act(g);
                let mut w = vec![Letter::pos(qgen), Letter::pos(i), Letter::neg(qgen)];
                let img_word = &f_words[img];
                w.extend(img_word.inverse().0.iter().copied());
                out.push(Word(w));
            }
            out
        };
        match &self.ext {
            VcExt::Z { alpha } => {
                let a = alpha.clone();
                rels.extend(action_rel(nf, &move |g| a[g]));
            }
            VcExt::Dihedral { sigma_s, sigma_u } => {
                rels.push(Word(vec![Letter::pos(nf); 2]));
                rels.push(Word(vec![Letter::pos(nf + 1); 2]));
                let ss = sigma_s.clone();
                let su = sigma_u.clone();
                rels.extend(action_rel(nf, &move |g| ss[g]));
                rels.extend(action_rel(nf + 1, &move |g| su[g]));
            }
        }
        rels
    }

    /// All finite normal subgroups of the group, as subsets of the radical.
    ///
    /// Any finite normal subgroup projects to a finite normal subgroup of ℤ
    /// or ℤ₂*ℤ₂, which is trivial, so it lies in F; it must then be normal in
    /// F and invariant under the quotient action.
    pub fn finite_normal_subgroups(&self) -> Vec<BTreeSet<usize>> {
        let invariant = |s: &BTreeSet<usize>| -> bool {
            let stable = |p: &Vec<usize>| s.iter().all(|&x| s.contains(&p[x]));
            match &self.ext {
                VcExt::Z { alpha } => stable(alpha),
                VcExt::Dihedral { sigma_s, sigma_u } => stable(sigma_s) && stable(sigma_u),
            }
        };
        self.radical
            .all_subgroups()
            .into_iter()
            .filter(|s| self.radical.is_normal(s) && invariant(s))
            .collect()
    }
}

/// Membership data for a finitely generated subgroup S of a virtually cyclic
/// group H = F ⋊ Q.
///
/// S is stored as (S ∩ translations) plus an optional reflection coset
/// witness: `plus` covers the translation part as N ⋊ ⟨s0⟩ with
/// N = S ∩ F ⊆ F, and `refl` is any reflection in S (dihedral type only),
/// since S = S⁺ ∪ S⁺·refl.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcSubgroup {
    /// S ∩ F as an element set of the radical.
    pub n_set: BTreeSet<usize>,
    /// Element realizing the minimal positive translation in S, if any.
    pub s0: Option<VcElem>,
    /// Minimal positive translation amount (0 when `s0` is None).
    pub c: i64,
    /// A reflection element of S, if any.
    pub refl: Option<VcElem>,
}

fn translation_amount(q: QElem) -> Option<i64> {
    match q {
        QElem::Z(n) => Some(n),
        QElem::D { n, refl: false } => Some(n),
        QElem::D { refl: true, .. } => None,
    }
}

impl VcSubgroup {
    pub fn from_generators(group: &VcGroup, gens: &[VcElem]) -> Result<VcSubgroup> {
        let mut translations: Vec<VcElem> = Vec::new();
        let mut reflections: Vec<VcElem> = Vec::new();
        for &g in gens {
            if translation_amount(g.q).is_some() {
                translations.push(g);
            } else {
                reflections.push(g);
            }
        }
        let refl = reflections.first().copied();
        // Schreier generators of the translation subgroup S+ over {1, r0}
        let mut plus_gens = translations.clone();
        if let Some(r0) = refl {
            let r0_inv = group.inv(r0)?;
            for &g in &translations {
                plus_gens.push(group.mul(group.mul(r0, g)?, r0_inv)?);
            }
            for &r in &reflections {
                plus_gens.push(group.mul(r, r0_inv)?);
                plus_gens.push(group.mul(r0, r)?);
            }
        }
        let (n_set, s0, c) = Self::translation_part(group, &plus_gens)?;
        Ok(VcSubgroup { n_set, s0, c, refl })
    }

    /// Structure of a subgroup of F ⋊ ⟨translations⟩ from generators that are
    /// all translations: Euclid on the translation amounts produces s0, then
    /// the kernel part is the closure of the Schreier generators under
    /// conjugation by s0.
    fn translation_part(
        group: &VcGroup,
        gens: &[VcElem],
    ) -> Result<(BTreeSet<usize>, Option<VcElem>, i64)> {
        let mut elems: Vec<VcElem> = gens.to_vec();
        loop {
            elems.retain(|e| *e != group.identity());
            let mut with_n: Vec<usize> = (0..elems.len())
                .filter(|&i| translation_amount(elems[i].q).unwrap_or(0) != 0)
                .collect();
            with_n.sort_by_key(|&i| translation_amount(elems[i].q).unwrap().abs());
            if with_n.len() < 2 {
                break;
            }
            let (i, j) = (with_n[0], with_n[1]);
            let ni = translation_amount(elems[i].q).unwrap();
            let nj = translation_amount(elems[j].q).unwrap();
            let q = nj.div_euclid(ni);
            if q == 0 {
                break;
            }
            elems[j] = group.mul(elems[j], group.pow(elems[i], -q)?)?;
        }
        let s0 = elems
            .iter()
            .copied()
            .find(|e| translation_amount(e.q).unwrap_or(0) != 0);
        let s0 = match s0 {
            Some(e) if translation_amount(e.q).unwrap() < 0 => Some(group.inv(e)?),
            other => other,
        };
        let c = s0.map(|e| translation_amount(e.q).unwrap()).unwrap_or(0);
        // kernel generators: reduce every original generator by s0 powers
        let mut seed: BTreeSet<usize> = BTreeSet::new();
        seed.insert(group.radical.identity());
        for &g in gens {
            let n = translation_amount(g.q)
                .ok_or_else(|| Error::Other("internal: reflection in translation part".into()))?;
            let reduced = if c != 0 {
                group.mul(g, group.pow(s0.unwrap(), -(n / c))?)?
            } else {
                g
            };
            if translation_amount(reduced.q) != Some(0) {
                return Err(Error::Other("internal: kernel reduction failed".into()));
            }
            seed.insert(reduced.f);
        }
        // close under the radical's subgroup operations and conjugation by s0
        let mut n_set = group.radical.closure(&seed);
        if let Some(s0) = s0 {
            loop {
                let mut grew = false;
                let current: Vec<usize> = n_set.iter().copied().collect();
                for f in current {
                    let e = VcElem { f, q: group.identity().q };
                    for conj in [
                        group.mul(group.mul(s0, e)?, group.inv(s0)?)?,
                        group.mul(group.mul(group.inv(s0)?, e)?, s0)?,
                    ] {
                        if n_set.insert(conj.f) {
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
                n_set = group.radical.closure(&n_set);
            }
        }
        Ok((n_set, s0, c))
    }

    pub fn contains(&self, group: &VcGroup, e: VcElem) -> Result<bool> {
        let e = match translation_amount(e.q) {
            Some(_) => e,
            None => match self.refl {
                None => return Ok(false),
                Some(r0) => group.mul(e, group.inv(r0)?)?,
            },
        };
        let n = match translation_amount(e.q) {
            Some(n) => n,
            None => return Ok(false),
        };
        if self.c == 0 {
            return Ok(n == 0 && self.n_set.contains(&e.f));
        }
        if n % self.c != 0 {
            return Ok(false);
        }
        let reduced = group.mul(e, group.pow(self.s0.unwrap(), -(n / self.c))?)?;
        Ok(self.n_set.contains(&reduced.f))
    }

    /// True when the subgroup is infinite (contains a translation).
    pub fn is_infinite(&self) -> bool {
        self.c != 0
    }

    /// True when the subgroup is all of the group.
    pub fn is_whole(&self, group: &VcGroup) -> Result<bool> {
        let all_f = self.n_set.len() == group.radical.order();
        Ok(match group.ext {
            VcExt::Z { .. } => all_f && self.c == 1,
            VcExt::Dihedral { .. } => all_f && self.c == 1 && self.refl.is_some(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::finite;

    fn z_group() -> VcGroup {
        VcGroup::new("Z", finite::trivial(), VcExt::Z { alpha: vec![0] }).unwrap()
    }

    fn dinf() -> VcGroup {
        VcGroup::new(
            "Dinf",
            finite::trivial(),
            VcExt::Dihedral { sigma_s: vec![0], sigma_u: vec![0] },
        )
        .unwrap()
    }

    fn z_x_c3() -> VcGroup {
        VcGroup::new("ZxC3", finite::cyclic(3), VcExt::Z { alpha: vec![0, 1, 2] }).unwrap()
    }

    fn z_twist_c3() -> VcGroup {
        // t acts on C3 by inversion
        VcGroup::new("Z~C3", finite::cyclic(3), VcExt::Z { alpha: vec![0, 2, 1] }).unwrap()
    }

    #[test]
    fn z_arithmetic() {
        let g = z_group();
        let names = g.gen_names();
        let w = Word::parse("t^3*t^-5", &names).unwrap();
        assert_eq!(g.eval(&w).unwrap(), VcElem { f: 0, q: QElem::Z(-2) });
        assert_eq!(g.render(g.eval(&w).unwrap()).render(&names), "t^-2");
    }

    #[test]
    fn dihedral_relations() {
        let g = dinf();
        let names = g.gen_names();
        for t in ["s^2", "u^2"] {
            let e = g.eval(&Word::parse(t, &names).unwrap()).unwrap();
            assert_eq!(e, g.identity());
        }
        // s*u is the translation z
        let z = g.eval(&Word::parse("s*u", &names).unwrap()).unwrap();
        assert_eq!(z.q, QElem::D { n: 1, refl: false });
        // d(1, (su)^n) = 2n is witnessed by the rendering length
        for n in 1..5i64 {
            let e = g.pow(z, n).unwrap();
            assert_eq!(g.render(e).len(), 2 * n as usize);
        }
    }

    #[test]
    fn twisted_action() {
        let g = z_twist_c3();
        let names = g.gen_names();
        // t a t^-1 = a^-1
        let lhs = g.eval(&Word::parse("t*a*t^-1", &names).unwrap()).unwrap();
        let rhs = g.eval(&Word::parse("a^-1", &names).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn element_orders() {
        let g = z_x_c3();
        let a = g.generator_elem(0).unwrap();
        let t = g.generator_elem(1).unwrap();
        assert_eq!(g.elem_order(a), Some(3));
        assert_eq!(g.elem_order(t), None);
        let d = dinf();
        let s = d.generator_elem(0).unwrap();
        assert_eq!(d.elem_order(s), Some(2));
    }

    #[test]
    fn two_torsion() {
        assert!(!z_group().has_two_torsion());
        assert!(dinf().has_two_torsion());
        assert!(!z_x_c3().has_two_torsion());
        assert!(!z_twist_c3().has_two_torsion());
    }

    #[test]
    fn finite_normal_subgroups_of_catalog() {
        // Z x C3: {1} and C3
        assert_eq!(z_x_c3().finite_normal_subgroups().len(), 2);
        // Z (trivial radical): just {1}
        assert_eq!(z_group().finite_normal_subgroups().len(), 1);
        // twisted: inversion-invariant subgroups of C3 are {1} and C3
        assert_eq!(z_twist_c3().finite_normal_subgroups().len(), 2);
    }

    #[test]
    fn render_round_trip() {
        let g = z_twist_c3();
        let names = g.gen_names();
        for text in ["a*t^3", "t^-2*a", "a^2*t*a*t^-4"] {
            let e = g.eval(&Word::parse(text, &names).unwrap()).unwrap();
            let back = g.eval(&g.render(e)).unwrap();
            assert_eq!(e, back, "{}", text);
        }
        let d = dinf();
        let dn = d.gen_names();
        for text in ["s*u*s*u", "u*s*u", "s*u^-1*s"] {
            let e = d.eval(&Word::parse(text, &dn).unwrap()).unwrap();
            let back = d.eval(&d.render(e)).unwrap();
            assert_eq!(e, back, "{}", text);
        }
    }
}
