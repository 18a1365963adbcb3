//! Word-metric computations on Cayley balls: breadth-first enumeration,
//! ends estimation, translation lengths, commensurizer sampling, and the
//! two-ended structure classification.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::abelian::{abelianization, AbelianInvariants};
use crate::groups::vc::{QElem, VcGroup};
use crate::groups::{
    self, free, generated_subgroup, is_member, Elem, GroupHandle, GroupKind, Strategy, SubgroupDesc,
};
use crate::words::Word;

const BALL_VERTEX_GUARD: usize = 2_000_000;

/// A ball in the Cayley graph: normal-form vertices with distances, plus
/// generator-labeled edges (one per pair of an element and a generator, both
/// endpoints inside the ball).
#[derive(Debug, Clone)]
pub struct Ball {
    pub group: GroupHandle,
    pub radius: usize,
    /// vertex -> (distance, normal form); vertex ids are BFS discovery order,
    /// which is shortlex on normal forms within each distance shell.
    pub vertices: Vec<(usize, Word)>,
    /// edges (u, v, generator index); u, v index into `vertices`.
    pub edges: Vec<(usize, usize, usize)>,
    index: BTreeMap<Elem, usize>,
}

impl Ball {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn distance_of(&self, e: &Elem) -> Option<usize> {
        self.index.get(e).map(|&i| self.vertices[i].0)
    }

    pub fn sphere_count(&self, r: usize) -> usize {
        self.vertices.iter().filter(|(d, _)| *d == r).count()
    }

    /// True when the ball stopped growing strictly inside the radius.
    pub fn growth_stopped(&self) -> bool {
        self.sphere_count(self.radius) == 0
    }

    /// True when the ball is closed under the generators, i.e. it already
    /// contains the whole (finite) group.
    pub fn is_closed(&self) -> Result<bool> {
        let n_gens = self.group.n_gens();
        for (e, i) in &self.index {
            if self.vertices[*i].0 < self.radius {
                continue;
            }
            for gi in 0..n_gens {
                for inv in [false, true] {
                    let step = self.group.eval(&Word(vec![crate::words::Letter {
                        gen: gi,
                        inv,
                    }]))?;
                    let img = self.group.mul(e, &step)?;
                    if !self.index.contains_key(&img) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Breadth-first enumeration of normal forms to distance `r`, with
/// deterministic ordering: vertices are discovered shell by shell, and within
/// a shell in shortlex order of the parent and generator.
pub fn ball(g: &GroupHandle, r: usize) -> Result<Ball> {
    if g.is_formal() {
        return Err(Error::UnsupportedQuery { handle: g.id.clone(), query: "cayley ball".into() });
    }
    let id = g.identity_elem()?;
    let n_gens = g.n_gens();
    let gens: Vec<Elem> = (0..n_gens).map(|i| g.eval(&Word::gen(i))).collect::<Result<_>>()?;
    let mut elems: Vec<Elem> = vec![id.clone()];
    let mut dist: Vec<usize> = vec![0];
    let mut index: BTreeMap<Elem, usize> = [(id, 0usize)].into();
    let mut frontier: Vec<usize> = vec![0];
    for depth in 1..=r {
        // order frontier by shortlex of normal forms for determinism
        let mut ordered = frontier.clone();
        ordered.sort_by_key(|&i| {
            let w = g.render_elem(&elems[i]).expect("renderable");
            (w.len(), w)
        });
        let mut next = Vec::new();
        for &ui in &ordered {
            let u = elems[ui].clone();
            for (gi, ge) in gens.iter().enumerate() {
                for inv in [false, true] {
                    let step = if inv { g.inv_elem(ge)? } else { ge.clone() };
                    let v = g.mul(&u, &step)?;
                    if !index.contains_key(&v) {
                        if elems.len() >= BALL_VERTEX_GUARD {
                            return Err(Error::Resource {
                                what: "ball vertex guard".into(),
                                reached: format!("radius {}", depth),
                            });
                        }
                        index.insert(v.clone(), elems.len());
                        elems.push(v);
                        dist.push(depth);
                        next.push(elems.len() - 1);
                        let _ = gi;
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    // edges: one per (element, generator) with both ends inside
    let mut edges = Vec::new();
    for (ui, u) in elems.iter().enumerate() {
        for (gi, ge) in gens.iter().enumerate() {
            let v = g.mul(u, ge)?;
            if let Some(&vi) = index.get(&v) {
                edges.push((ui, vi, gi));
            }
        }
    }
    let vertices: Vec<(usize, Word)> = elems
        .iter()
        .zip(&dist)
        .map(|(e, &d)| Ok((d, g.render_elem(e)?)))
        .collect::<Result<_>>()?;
    Ok(Ball { group: g.clone(), radius: r, vertices, edges, index })
}

/// Word-metric distance d(1, w), by reduced length in free groups and by
/// growing BFS balls elsewhere.
pub fn distance(g: &GroupHandle, w: &Word) -> Result<usize> {
    if let GroupKind::Free(_) = g.kind {
        return Ok(free::reduce(w).len());
    }
    let target = g.eval(w)?;
    let mut r = 1usize;
    loop {
        let b = ball(g, r)?;
        if let Some(d) = b.distance_of(&target) {
            return Ok(d);
        }
        if b.growth_stopped() {
            return Err(Error::Other("element outside a finite group ball".into()));
        }
        r *= 2;
        if r > 4096 {
            return Err(Error::Resource { what: "distance search".into(), reached: format!("radius {}", r) });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndsValue {
    Zero,
    One,
    Two,
    Many,
    Indeterminate,
}

/// Ends estimate with per-radius component counts (components of the annulus
/// ball(ρ) − ball(ρ−2) touching the boundary sphere).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndsEstimate {
    pub value: EndsValue,
    pub radius: usize,
    pub counts: Vec<(usize, usize)>,
}

pub fn ends_count(g: &GroupHandle, r: usize) -> Result<EndsEstimate> {
    if r < 2 {
        return Err(Error::Precondition {
            reason: "ends estimation needs radius >= 2".into(),
            witness: format!("radius {}", r),
        });
    }
    let b = ball(g, r)?;
    if b.growth_stopped() || b.is_closed()? {
        return Ok(EndsEstimate { value: EndsValue::Zero, radius: r, counts: vec![] });
    }
    let mut counts = Vec::new();
    for rho in 2..=r {
        counts.push((rho, annulus_components(&b, rho)));
    }
    // classify from the last window of three radii
    let value = if counts.len() >= 3 {
        let tail: Vec<usize> = counts[counts.len() - 3..].iter().map(|&(_, c)| c).collect();
        if tail[0] == tail[1] && tail[1] == tail[2] {
            match tail[0] {
                0 => EndsValue::Zero,
                1 => EndsValue::One,
                2 => EndsValue::Two,
                _ => EndsValue::Many,
            }
        } else if tail.windows(2).all(|w| w[0] <= w[1]) && tail[2] > 2 {
            // strictly growing component counts witness more than two ends
            EndsValue::Many
        } else {
            EndsValue::Indeterminate
        }
    } else {
        EndsValue::Indeterminate
    };
    Ok(EndsEstimate { value, radius: r, counts })
}

/// Components of ball(rho) − ball(rho−2) that contain a vertex at distance
/// exactly rho.
fn annulus_components(b: &Ball, rho: usize) -> usize {
    let lo = rho - 2;
    let in_annulus: Vec<bool> =
        b.vertices.iter().map(|&(d, _)| d > lo && d <= rho).collect();
    let mut uf: Vec<usize> = (0..b.vertices.len()).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for &(u, v, _) in &b.edges {
        if in_annulus[u] && in_annulus[v] {
            let (ru, rv) = (find(&mut uf, u), find(&mut uf, v));
            if ru != rv {
                uf[ru.max(rv)] = ru.min(rv);
            }
        }
    }
    let mut roots = BTreeSet::new();
    for (i, &(d, _)) in b.vertices.iter().enumerate() {
        if d == rho {
            let r = find(&mut uf, i);
            roots.insert(r);
        }
    }
    roots.len()
}

/// A translation length estimate d(1, w^n)/n, with the exact value when the
/// catalog offers one (free kinds: cyclically reduced length).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub numerator: u64,
    pub denominator: u64,
    pub exact: bool,
}

impl TauEstimate {
    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

pub fn translation_length(g: &GroupHandle, w: &Word, n: u32) -> Result<TauEstimate> {
    if n == 0 {
        return Err(Error::Precondition {
            reason: "translation length estimate needs n >= 1".into(),
            witness: "n = 0".into(),
        });
    }
    if g.is_formal() {
        return Err(Error::UnsupportedQuery { handle: g.id.clone(), query: "translation length".into() });
    }
    if let GroupKind::Free(_) = g.kind {
        let (_, core) = free::cyclic_reduce(w);
        return Ok(TauEstimate { numerator: core.len() as u64, denominator: 1, exact: true });
    }
    let d = distance(g, &w.pow(n as i64))?;
    Ok(TauEstimate { numerator: d as u64, denominator: n as u64, exact: false })
}

/// Exact translation length for catalog kinds where the word metric is
/// understood: free kinds (cyclically reduced length) and virtually cyclic
/// kinds (|translation| for Z type, 2|translation| for dihedral type, since
/// the translation z = s·u costs two letters).
pub fn translation_length_exact(g: &GroupHandle, w: &Word) -> Result<u64> {
    match &g.kind {
        GroupKind::Free(_) => {
            let (_, core) = free::cyclic_reduce(w);
            Ok(core.len() as u64)
        }
        GroupKind::VirtuallyCyclic(vc) => {
            let e = vc.eval(w)?;
            Ok(match e.q {
                QElem::Z(n) => n.unsigned_abs(),
                QElem::D { n, refl: false } => 2 * n.unsigned_abs(),
                QElem::D { refl: true, .. } => 0,
            })
        }
        _ => Err(Error::UnsupportedQuery {
            handle: g.id.clone(),
            query: "exact translation length".into(),
        }),
    }
}

/// All elements γ of ball(r) whose conjugate γhγ⁻¹ is commensurable with h,
/// decided exactly per catalog strategy.
pub fn commensurizer_sample(
    g: &GroupHandle,
    h: &SubgroupDesc,
    r: usize,
) -> Result<Vec<Word>> {
    if r < 1 {
        return Err(Error::Precondition {
            reason: "commensurizer sampling needs radius >= 1".into(),
            witness: format!("radius {}", r),
        });
    }
    match (&g.kind, &h.strategy) {
        (GroupKind::Free(_), Strategy::FoldedGraph { .. }) => {
            if h.generators.len() != 1 {
                return Err(Error::UnsupportedQuery {
                    handle: g.id.clone(),
                    query: "commensurizer of a non-cyclic free subgroup".into(),
                });
            }
            let c = free::reduce(&h.generators[0]);
            if c.is_empty() {
                return Err(Error::Precondition {
                    reason: "commensurizer sampling needs an infinite subgroup".into(),
                    witness: "trivial generator".into(),
                });
            }
            // commensurable iff the maximal roots agree up to inversion
            let root = free::max_root(&c);
            let root_inv = root.inverse();
            let b = ball(g, r)?;
            let mut out = Vec::new();
            for (_, w) in &b.vertices {
                let conj = c.conjugate_by(w);
                let cr = free::max_root(&conj);
                if cr == root || cr == root_inv {
                    out.push(w.clone());
                }
            }
            Ok(out)
        }
        (GroupKind::VirtuallyCyclic(_), Strategy::VcIndex { data }) => {
            if !data.is_infinite() {
                return Err(Error::Precondition {
                    reason: "commensurizer sampling needs a two-ended subgroup".into(),
                    witness: "finite subgroup".into(),
                });
            }
            // any infinite subgroup of a two-ended group has finite index,
            // so the commensurizer is everything
            let b = ball(g, r)?;
            Ok(b.vertices.iter().map(|(_, w)| w.clone()).collect())
        }
        (GroupKind::BaumslagSolitar12, Strategy::Bs12 { data }) => {
            if data.c == 0 && !data.trans_gen.is_zero() {
                // translation subgroups of Z[1/2]: any two nontrivial ones
                // are commensurable, and conjugation preserves translations
                let b = ball(g, r)?;
                return Ok(b.vertices.iter().map(|(_, w)| w.clone()).collect());
            }
            Err(Error::UnsupportedQuery {
                handle: g.id.clone(),
                query: "commensurizer of a non-translation BS(1,2) subgroup".into(),
            })
        }
        (_, Strategy::Formal) => Err(Error::UnsupportedQuery {
            handle: g.id.clone(),
            query: "commensurizer with formal strategy".into(),
        }),
        _ => Err(Error::UnsupportedQuery {
            handle: g.id.clone(),
            query: "commensurizer sampling for this kind".into(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuotientKind {
    ZType,
    DihedralType,
}

/// The structure data of a two-ended group: its finite radical, the quotient
/// kind, and whether the abelianization is infinite.
#[derive(Debug, Clone)]
pub struct TwoEndedType {
    pub radical: SubgroupDesc,
    pub radical_order: usize,
    pub quotient: QuotientKind,
    pub h1: AbelianInvariants,
    pub radical_is_unique_maximal: bool,
}

/// Classifies a virtually cyclic catalog group: computes the finite radical
/// by enumerating finite normal subgroups, the quotient kind, and checks the
/// abelianization criterion (Z type iff H₁ infinite). Non-VC handles are
/// rejected with a witness.
pub fn classify_two_ended(g: &GroupHandle) -> Result<TwoEndedType> {
    let vc: &VcGroup = match &g.kind {
        GroupKind::VirtuallyCyclic(v) => v,
        GroupKind::Finite(f) => {
            return Err(Error::NotTwoEnded {
                handle: g.id.clone(),
                witness: format!("finite group of order {}, ends 0", f.order()),
            })
        }
        GroupKind::Free(f) if f.rank() >= 2 => {
            return Err(Error::NotTwoEnded {
                handle: g.id.clone(),
                witness: format!("free of rank {}, infinitely many ends", f.rank()),
            })
        }
        GroupKind::Free(_) => {
            return Err(Error::NotTwoEnded {
                handle: g.id.clone(),
                witness: "free kind; use the virtually cyclic handle Z".into(),
            })
        }
        GroupKind::BaumslagSolitar12 => {
            return Err(Error::NotTwoEnded {
                handle: g.id.clone(),
                witness: "BS(1,2) is one-ended".into(),
            })
        }
        GroupKind::FreeProduct { .. } => {
            return Err(Error::NotTwoEnded {
                handle: g.id.clone(),
                witness: "free product kind; use a virtually cyclic handle".into(),
            })
        }
        GroupKind::FormalVertex { .. } => {
            return Err(Error::UnsupportedQuery { handle: g.id.clone(), query: "classification".into() })
        }
    };
    // finite radical: unique maximal finite normal subgroup
    let normal_subs = vc.finite_normal_subgroups();
    let full: BTreeSet<usize> = (0..vc.radical.order()).collect();
    let radical_is_unique_maximal = normal_subs.iter().all(|s| s.is_subset(&full));
    let radical_words: Vec<Word> = vc
        .radical
        .element_words()
        .iter()
        .enumerate()
        .filter(|(e, _)| *e != vc.radical.identity())
        .map(|(_, w)| w.clone())
        .collect();
    let radical = generated_subgroup(g, &radical_words)?;
    let h1 = abelianization(&g.presentation())?;
    let quotient = if vc.is_dihedral() { QuotientKind::DihedralType } else { QuotientKind::ZType };
    // consistency of the two classifications
    let by_h1 = if h1.rank > 0 { QuotientKind::ZType } else { QuotientKind::DihedralType };
    if by_h1 != quotient {
        return Err(Error::Other(format!(
            "classification mismatch for {}: extension says {:?}, abelianization {} says {:?}",
            g.id,
            quotient,
            h1.render(),
            by_h1
        )));
    }
    Ok(TwoEndedType {
        radical,
        radical_order: vc.radical.order(),
        quotient,
        h1,
        radical_is_unique_maximal,
    })
}

/// Report of the τ-descent experiment along an ascending chain of two-ended
/// subgroups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainReport {
    pub taus: Vec<u64>,
    /// τ decreases strictly at index i (between entries i and i+1)?
    pub strict_decreases: Vec<bool>,
    /// first index where τ stops decreasing, if any
    pub stabilization_index: Option<usize>,
}

/// Computes τ_i = minimal exact translation length over infinite-order
/// generators of each chain entry, verifying containments along the way.
pub fn chain_experiment(chain: &[SubgroupDesc]) -> Result<ChainReport> {
    if chain.is_empty() {
        return Err(Error::Precondition {
            reason: "chain experiment needs at least one entry".into(),
            witness: "empty chain".into(),
        });
    }
    for pair in chain.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.ambient != b.ambient {
            return Err(Error::MixedAmbient("chain entries in different ambients".into()));
        }
        for gw in &a.generators {
            if !is_member(b, gw)? {
                return Err(Error::Precondition {
                    reason: "chain entries must be ascending".into(),
                    witness: gw.render(&a.ambient.gen_names()),
                });
            }
        }
    }
    let mut taus = Vec::new();
    for entry in chain {
        if entry.is_finite() == Some(true) {
            return Err(Error::Precondition {
                reason: "chain entries must be two-ended".into(),
                witness: "finite entry".into(),
            });
        }
        let mut best: Option<u64> = None;
        for gw in &entry.generators {
            let e = entry.ambient.eval(gw)?;
            if entry.ambient.elem_order(&e)?.is_none() {
                let tau = translation_length_exact(&entry.ambient, gw)?;
                best = Some(best.map_or(tau, |b: u64| b.min(tau)));
            }
        }
        let tau = best.ok_or_else(|| Error::Precondition {
            reason: "chain entry has no infinite-order generator".into(),
            witness: "all generators finite order".into(),
        })?;
        taus.push(tau);
    }
    let strict_decreases: Vec<bool> = taus.windows(2).map(|w| w[0] > w[1]).collect();
    let stabilization_index = if chain.len() == 1 {
        Some(0)
    } else {
        strict_decreases.iter().position(|&d| !d).map(Some).unwrap_or(None)
    };
    Ok(ChainReport { taus, strict_decreases, stabilization_index })
}

/// TSV table of per-radius annulus component counts, for the CLI.
pub fn ends_table(est: &EndsEstimate) -> String {
    let mut out = String::from("radius\tcomponents\n");
    for (r, c) in &est.counts {
        out.push_str(&format!("{}\t{}\n", r, c));
    }
    out.push_str(&format!("classification\t{:?}\n", est.value));
    out
}

pub use groups::generated_subgroup as subgroup;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::catalog::Catalog;

    fn cat() -> Catalog {
        Catalog::default_catalog()
    }

    #[test]
    fn ball_counts_z() {
        // Z = <t>, radius 3: 7 vertices t^-3 .. t^3
        let z = cat().get("Z").unwrap().clone();
        let b = ball(&z, 3).unwrap();
        assert_eq!(b.vertex_count(), 7);
    }

    #[test]
    fn ball_counts_free() {
        // F(a,b), radius 2: 1 + 4 + 12 = 17 vertices (4*3^(k-1) new at depth k)
        let f2 = cat().get("F2").unwrap().clone();
        let b = ball(&f2, 2).unwrap();
        assert_eq!(b.vertex_count(), 17);
        // and the formula at radius 3
        assert_eq!(ball(&f2, 3).unwrap().vertex_count(), 17 + 36);
    }

    #[test]
    fn ball_counts_s3() {
        // S3 with two generators: closed at 6 vertices by radius 6
        let s3 = cat().get("S3").unwrap().clone();
        let b = ball(&s3, 6).unwrap();
        assert_eq!(b.vertex_count(), 6);
        assert!(b.growth_stopped());
    }

    #[test]
    fn ends_of_catalog_groups() {
        let cat = cat();
        assert_eq!(ends_count(cat.get("Z").unwrap(), 6).unwrap().value, EndsValue::Two);
        assert_eq!(ends_count(cat.get("Dinf").unwrap(), 6).unwrap().value, EndsValue::Two);
        assert_eq!(ends_count(cat.get("S3").unwrap(), 6).unwrap().value, EndsValue::Zero);
        let f2 = ends_count(cat.get("F2").unwrap(), 5).unwrap();
        assert_eq!(f2.value, EndsValue::Many);
        // the component count at radius 5 is 4 * 3^3 (spec oracle)
        assert_eq!(f2.counts.last().unwrap().1, 108);
    }

    #[test]
    fn translation_length_free_exact() {
        let f2 = cat().get("F2").unwrap().clone();
        let names = f2.gen_names();
        let w = Word::parse("b*a*b^-1", &names).unwrap();
        let tau = translation_length(&f2, &w, 8).unwrap();
        assert!(tau.exact);
        assert_eq!((tau.numerator, tau.denominator), (1, 1));
        // identity word
        let tau0 = translation_length(&f2, &Word::identity(), 4).unwrap();
        assert_eq!(tau0.numerator, 0);
    }

    #[test]
    fn translation_homogeneity() {
        // tau(w^m) = |m| tau(w) exactly in free kinds
        let f2 = cat().get("F2").unwrap().clone();
        let names = f2.gen_names();
        for text in ["a", "a*b", "b*a^2*b^-1", "a*b*a^-1*b^-1"] {
            let w = Word::parse(text, &names).unwrap();
            let t1 = translation_length_exact(&f2, &w).unwrap();
            for m in 1..=3i64 {
                let tm = translation_length_exact(&f2, &w.pow(m)).unwrap();
                assert_eq!(tm, m as u64 * t1, "{} at power {}", text, m);
            }
            // conjugation invariance
            let conj = w.conjugate_by(&Word::parse("b*a", &names).unwrap());
            assert_eq!(translation_length_exact(&f2, &conj).unwrap(), t1);
        }
    }

    #[test]
    fn bfs_estimate_close_to_exact() {
        // d(1, w^n)/n within 1/n of exact for n >= cyclically reduced length
        let f2 = cat().get("F2").unwrap().clone();
        let names = f2.gen_names();
        for text in ["a*b", "b*a*b^-1", "a^2*b^-1"] {
            let w = Word::parse(text, &names).unwrap();
            let exact = translation_length_exact(&f2, &w).unwrap();
            let n = 16;
            let d = free::reduce(&w.pow(n)).len() as f64;
            let est = d / n as f64;
            assert!((est - exact as f64).abs() <= 0.5, "{}: {} vs {}", text, est, exact);
        }
    }

    #[test]
    fn dinf_distance_oracle() {
        // d(1, (st)^n) = 2n in the infinite dihedral group
        let d = cat().get("Dinf").unwrap().clone();
        let names = d.gen_names();
        let st = Word::parse("s*u", &names).unwrap();
        for n in 1..=4i64 {
            assert_eq!(distance(&d, &st.pow(n)).unwrap(), 2 * n as usize);
        }
        assert_eq!(translation_length_exact(&d, &st).unwrap(), 2);
    }

    #[test]
    fn commensurizer_powers_of_a() {
        // F(a,b), h = <a^2>, r = 4: exactly the powers of a in the ball
        let f2 = cat().get("F2").unwrap().clone();
        let names = f2.gen_names();
        let h = generated_subgroup(&f2, &[Word::parse("a^2", &names).unwrap()]).unwrap();
        let sample = commensurizer_sample(&f2, &h, 4).unwrap();
        let expected: BTreeSet<String> = (-4i64..=4)
            .map(|k| Word::gen(0).pow(k).render(&names))
            .collect();
        let got: BTreeSet<String> = sample.iter().map(|w| w.render(&names)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn commensurizer_of_ab() {
        let f2 = cat().get("F2").unwrap().clone();
        let names = f2.gen_names();
        let h = generated_subgroup(&f2, &[Word::parse("a*b", &names).unwrap()]).unwrap();
        let sample = commensurizer_sample(&f2, &h, 4).unwrap();
        let abw = Word::parse("a*b", &names).unwrap();
        let expected: BTreeSet<Word> =
            (-2i64..=2).map(|k| free::reduce(&abw.pow(k))).collect();
        let got: BTreeSet<Word> = sample.into_iter().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn commensurizer_finite_index_normal() {
        // Z x C3 ambient, h = the Z factor: every ball element commensurizes
        let g = cat().get("ZxC3").unwrap().clone();
        let names = g.gen_names();
        let h = generated_subgroup(&g, &[Word::parse("t", &names).unwrap()]).unwrap();
        let sample = commensurizer_sample(&g, &h, 3).unwrap();
        assert_eq!(sample.len(), ball(&g, 3).unwrap().vertex_count());
    }

    #[test]
    fn classify_catalog_two_ended() {
        let cat = cat();
        // Z: trivial radical, Z type
        let z = classify_two_ended(cat.get("Z").unwrap()).unwrap();
        assert_eq!(z.radical_order, 1);
        assert_eq!(z.quotient, QuotientKind::ZType);
        assert!(z.h1.rank > 0);
        // Dinf: trivial radical, dihedral type, H1 finite
        let d = classify_two_ended(cat.get("Dinf").unwrap()).unwrap();
        assert_eq!(d.radical_order, 1);
        assert_eq!(d.quotient, QuotientKind::DihedralType);
        assert!(d.h1.is_finite());
        // Z x C3: radical C3, Z type, H1 = Z + Z/3
        let zc3 = classify_two_ended(cat.get("ZxC3").unwrap()).unwrap();
        assert_eq!(zc3.radical_order, 3);
        assert_eq!(zc3.quotient, QuotientKind::ZType);
        assert_eq!(zc3.h1.rank, 1);
        assert_eq!(zc3.h1.torsion, vec![3]);
        // misuse is rejected with a witness
        assert!(classify_two_ended(cat.get("S3").unwrap()).is_err());
        assert!(classify_two_ended(cat.get("F2").unwrap()).is_err());
        assert!(classify_two_ended(cat.get("BS12").unwrap()).is_err());
    }

    #[test]
    fn chain_descent_in_f1() {
        // <a^8> < <a^4> < <a^2> < <a>: tau = 8, 4, 2, 1 strictly decreasing
        let f1 = GroupHandle::free("F1", &["a"]);
        let chain: Vec<SubgroupDesc> = [8i64, 4, 2, 1]
            .iter()
            .map(|&k| generated_subgroup(&f1, &[Word::gen(0).pow(k)]).unwrap())
            .collect();
        let report = chain_experiment(&chain).unwrap();
        assert_eq!(report.taus, vec![8, 4, 2, 1]);
        assert!(report.strict_decreases.iter().all(|&d| d));
        assert_eq!(report.stabilization_index, None);
    }

    #[test]
    fn chain_constant_stabilizes() {
        let f1 = GroupHandle::free("F1", &["a"]);
        let a = generated_subgroup(&f1, &[Word::gen(0)]).unwrap();
        let report = chain_experiment(&[a.clone(), a]).unwrap();
        assert_eq!(report.stabilization_index, Some(0));
    }

    #[test]
    fn chain_dinf_powers() {
        // <(su)^4> < <(su)^2> < <su> in Dinf: tau = 8, 4, 2
        let d = cat().get("Dinf").unwrap().clone();
        let names = d.gen_names();
        let st = Word::parse("s*u", &names).unwrap();
        let chain: Vec<SubgroupDesc> = [4i64, 2, 1]
            .iter()
            .map(|&k| generated_subgroup(&d, &[st.pow(k)]).unwrap())
            .collect();
        let report = chain_experiment(&chain).unwrap();
        assert_eq!(report.taus, vec![8, 4, 2]);
    }

    #[test]
    fn chain_containment_violation_reports_witness() {
        let f1 = GroupHandle::free("F1", &["a"]);
        let a2 = generated_subgroup(&f1, &[Word::gen(0).pow(2)]).unwrap();
        let a3 = generated_subgroup(&f1, &[Word::gen(0).pow(3)]).unwrap();
        let err = chain_experiment(&[a2, a3]).unwrap_err();
        match err {
            Error::Precondition { witness, .. } => assert_eq!(witness, "a^2"),
            other => panic!("unexpected error {:?}", other),
        }
    }
}
