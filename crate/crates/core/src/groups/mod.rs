//! Catalog of groups with decidable word problems.
//!
//! A [`GroupHandle`] is a named group with one of six kinds: finite
//! multiplication table, free, free product of handles, virtually cyclic,
//! BS(1,2), or a formal vertex (no word problem; every word-level query on
//! one is an error rather than a silent default).

pub mod abelian;
pub mod bs12;
pub mod catalog;
pub mod finite;
pub mod free;
pub mod vc;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Letter, Word};

use abelian::Presentation;
use bs12::{BsElem, BsSubgroup};
use finite::FiniteGroup;
use free::{FreeGroup, SubgroupGraph};
use vc::{VcElem, VcGroup, VcSubgroup};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupKind {
    Finite(FiniteGroup),
    Free(FreeGroup),
    FreeProduct { factors: Vec<GroupHandle> },
    VirtuallyCyclic(VcGroup),
    BaumslagSolitar12,
    FormalVertex { name: String, gens: Vec<String>, relators: Option<Vec<Word>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupHandle {
    pub id: String,
    pub kind: GroupKind,
}

/// A group element in the kind's canonical coordinates. Free product
/// elements are alternating syllables (factor index, factor element).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Finite(usize),
    Free(Word),
    FreeProduct(Vec<(usize, Elem)>),
    Vc(VcElem),
    Bs(BsElem),
}

impl GroupHandle {
    pub fn finite(g: FiniteGroup) -> Self {
        GroupHandle { id: g.name.clone(), kind: GroupKind::Finite(g) }
    }

    pub fn free(name: &str, gens: &[&str]) -> Self {
        GroupHandle {
            id: name.to_string(),
            kind: GroupKind::Free(FreeGroup::new(name, gens.iter().map(|s| s.to_string()).collect())),
        }
    }

    pub fn free_product(id: &str, factors: Vec<GroupHandle>) -> Self {
        GroupHandle { id: id.to_string(), kind: GroupKind::FreeProduct { factors } }
    }

    pub fn vc(g: VcGroup) -> Self {
        GroupHandle { id: g.name.clone(), kind: GroupKind::VirtuallyCyclic(g) }
    }

    pub fn bs12() -> Self {
        GroupHandle { id: "BS12".into(), kind: GroupKind::BaumslagSolitar12 }
    }

    pub fn formal(name: &str, gens: Vec<String>, relators: Option<Vec<Word>>) -> Self {
        GroupHandle {
            id: name.to_string(),
            kind: GroupKind::FormalVertex { name: name.to_string(), gens, relators },
        }
    }

    pub fn is_formal(&self) -> bool {
        matches!(self.kind, GroupKind::FormalVertex { .. })
    }

    fn unsupported(&self, query: &str) -> Error {
        Error::UnsupportedQuery { handle: self.id.clone(), query: query.to_string() }
    }

    pub fn gen_names(&self) -> Vec<String> {
        match &self.kind {
            GroupKind::Finite(g) => g.generator_names(),
            GroupKind::Free(f) => f.gen_names.clone(),
            GroupKind::FreeProduct { factors } => {
                let mut names = Vec::new();
                for (i, f) in factors.iter().enumerate() {
                    for n in f.gen_names() {
                        names.push(disambiguate(&names, &n, i));
                    }
                }
                names
            }
            GroupKind::VirtuallyCyclic(g) => g.gen_names(),
            GroupKind::BaumslagSolitar12 => bs12::gen_names(),
            GroupKind::FormalVertex { gens, .. } => gens.clone(),
        }
    }

    pub fn n_gens(&self) -> usize {
        self.gen_names().len()
    }

    /// Total order of the group, when finite.
    pub fn order(&self) -> Option<usize> {
        match &self.kind {
            GroupKind::Finite(g) => Some(g.order()),
            GroupKind::Free(f) => (f.rank() == 0).then_some(1),
            GroupKind::FreeProduct { factors } => {
                let nontrivial: Vec<_> =
                    factors.iter().filter(|f| f.order() != Some(1)).collect();
                match nontrivial.len() {
                    0 => Some(1),
                    1 => nontrivial[0].order(),
                    _ => None,
                }
            }
            GroupKind::VirtuallyCyclic(_) => None,
            GroupKind::BaumslagSolitar12 => None,
            GroupKind::FormalVertex { .. } => None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == Some(1)
    }

    /// Finite or two-ended: the elementary family the hierarchy decomposes
    /// over. Free products and BS(1,2) are neither; formal vertices are
    /// conservatively not elementary.
    pub fn is_elementary(&self) -> bool {
        match &self.kind {
            GroupKind::Finite(_) => true,
            GroupKind::Free(f) => f.rank() <= 1,
            GroupKind::FreeProduct { .. } => self.order().is_some(),
            GroupKind::VirtuallyCyclic(_) => true,
            GroupKind::BaumslagSolitar12 => false,
            GroupKind::FormalVertex { .. } => false,
        }
    }

    pub fn has_two_torsion(&self) -> Option<bool> {
        match &self.kind {
            GroupKind::Finite(g) => Some(g.has_two_torsion()),
            GroupKind::Free(_) => Some(false),
            GroupKind::FreeProduct { factors } => {
                let mut any = false;
                for f in factors {
                    match f.has_two_torsion() {
                        Some(true) => any = true,
                        Some(false) => {}
                        None => return None,
                    }
                }
                Some(any)
            }
            GroupKind::VirtuallyCyclic(g) => Some(g.has_two_torsion()),
            GroupKind::BaumslagSolitar12 => Some(false),
            GroupKind::FormalVertex { .. } => None,
        }
    }

    pub fn identity_elem(&self) -> Result<Elem> {
        Ok(match &self.kind {
            GroupKind::Finite(g) => Elem::Finite(g.identity()),
            GroupKind::Free(_) => Elem::Free(Word::identity()),
            GroupKind::FreeProduct { .. } => Elem::FreeProduct(Vec::new()),
            GroupKind::VirtuallyCyclic(g) => Elem::Vc(g.identity()),
            GroupKind::BaumslagSolitar12 => Elem::Bs(BsElem::IDENTITY),
            GroupKind::FormalVertex { .. } => return Err(self.unsupported("identity element")),
        })
    }

    /// Factor and local generator index for a free product generator.
    fn factor_of_gen(factors: &[GroupHandle], gen: usize) -> Result<(usize, usize)> {
        let mut offset = 0usize;
        for (i, f) in factors.iter().enumerate() {
            let n = f.n_gens();
            if gen < offset + n {
                return Ok((i, gen - offset));
            }
            offset += n;
        }
        Err(Error::InvalidWord(format!("generator index {} out of range", gen)))
    }

    pub fn eval(&self, w: &Word) -> Result<Elem> {
        w.check_letters(self.n_gens())?;
        match &self.kind {
            GroupKind::Finite(g) => Ok(Elem::Finite(g.eval(w)?)),
            GroupKind::Free(_) => Ok(Elem::Free(free::reduce(w))),
            GroupKind::FreeProduct { factors } => {
                let mut acc: Vec<(usize, Elem)> = Vec::new();
                for &l in &w.0 {
                    let (fi, local) = Self::factor_of_gen(factors, l.gen)?;
                    let letter = Word(vec![Letter { gen: local, inv: l.inv }]);
                    let e = factors[fi].eval(&letter)?;
                    push_syllable(factors, &mut acc, fi, e)?;
                }
                Ok(Elem::FreeProduct(acc))
            }
            GroupKind::VirtuallyCyclic(g) => Ok(Elem::Vc(g.eval(w)?)),
            GroupKind::BaumslagSolitar12 => Ok(Elem::Bs(bs12::eval(w)?)),
            GroupKind::FormalVertex { .. } => Err(self.unsupported("word evaluation")),
        }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        match (&self.kind, a, b) {
            (GroupKind::Finite(g), Elem::Finite(x), Elem::Finite(y)) => {
                Ok(Elem::Finite(g.mul(*x, *y)))
            }
            (GroupKind::Free(_), Elem::Free(x), Elem::Free(y)) => {
                Ok(Elem::Free(free::reduce(&x.concat(y))))
            }
            (GroupKind::FreeProduct { factors }, Elem::FreeProduct(x), Elem::FreeProduct(y)) => {
                let mut acc = x.clone();
                for (fi, e) in y {
                    push_syllable(factors, &mut acc, *fi, e.clone())?;
                }
                Ok(Elem::FreeProduct(acc))
            }
            (GroupKind::VirtuallyCyclic(g), Elem::Vc(x), Elem::Vc(y)) => {
                Ok(Elem::Vc(g.mul(*x, *y)?))
            }
            (GroupKind::BaumslagSolitar12, Elem::Bs(x), Elem::Bs(y)) => Ok(Elem::Bs(x.mul(*y)?)),
            _ => Err(Error::MixedAmbient(format!("element kind mismatch in {}", self.id))),
        }
    }

    pub fn inv_elem(&self, a: &Elem) -> Result<Elem> {
        match (&self.kind, a) {
            (GroupKind::Finite(g), Elem::Finite(x)) => Ok(Elem::Finite(g.inv(*x))),
            (GroupKind::Free(_), Elem::Free(x)) => Ok(Elem::Free(x.inverse())),
            (GroupKind::FreeProduct { factors }, Elem::FreeProduct(x)) => {
                let mut acc = Vec::with_capacity(x.len());
                for (fi, e) in x.iter().rev() {
                    acc.push((*fi, factors[*fi].inv_elem(e)?));
                }
                Ok(Elem::FreeProduct(acc))
            }
            (GroupKind::VirtuallyCyclic(g), Elem::Vc(x)) => Ok(Elem::Vc(g.inv(*x)?)),
            (GroupKind::BaumslagSolitar12, Elem::Bs(x)) => Ok(Elem::Bs(x.inv()?)),
            _ => Err(Error::MixedAmbient(format!("element kind mismatch in {}", self.id))),
        }
    }

    pub fn is_identity_elem(&self, a: &Elem) -> Result<bool> {
        Ok(a == &self.identity_elem()?)
    }

    /// Renders an element back to a canonical word.
    pub fn render_elem(&self, e: &Elem) -> Result<Word> {
        match (&self.kind, e) {
            (GroupKind::Finite(g), Elem::Finite(x)) => Ok(g.element_words()[*x].clone()),
            (GroupKind::Free(_), Elem::Free(w)) => Ok(w.clone()),
            (GroupKind::FreeProduct { factors }, Elem::FreeProduct(sylls)) => {
                let mut letters = Vec::new();
                for (fi, fe) in sylls {
                    let local = factors[*fi].render_elem(fe)?;
                    let offset: usize = factors[..*fi].iter().map(|f| f.n_gens()).sum();
                    letters.extend(
                        local.0.iter().map(|l| Letter { gen: l.gen + offset, inv: l.inv }),
                    );
                }
                Ok(Word(letters))
            }
            (GroupKind::VirtuallyCyclic(g), Elem::Vc(x)) => Ok(g.render(*x)),
            (GroupKind::BaumslagSolitar12, Elem::Bs(x)) => {
                bs12::render_normal_form(&bs12::normal_form_of(*x))
            }
            _ => Err(Error::MixedAmbient(format!("element kind mismatch in {}", self.id))),
        }
    }

    /// The canonical representative of a word: two words are equal in the
    /// group iff their normal forms are identical.
    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        self.render_elem(&self.eval(w)?)
    }

    pub fn is_identity(&self, w: &Word) -> Result<bool> {
        self.is_identity_elem(&self.eval(w)?)
    }

    pub fn words_equal(&self, a: &Word, b: &Word) -> Result<bool> {
        Ok(self.eval(a)? == self.eval(b)?)
    }

    /// Order of the element represented by `w`; `None` when infinite.
    pub fn elem_order(&self, e: &Elem) -> Result<Option<usize>> {
        match (&self.kind, e) {
            (GroupKind::Finite(g), Elem::Finite(x)) => Ok(Some(g.element_order(*x))),
            (GroupKind::Free(_), Elem::Free(w)) => {
                Ok(if w.is_empty() { Some(1) } else { None })
            }
            (GroupKind::FreeProduct { factors }, Elem::FreeProduct(s)) => match s.len() {
                0 => Ok(Some(1)),
                1 => factors[s[0].0].elem_order(&s[0].1),
                _ => {
                    // a cyclically reduced multi-syllable element has
                    // infinite order; otherwise defer to its conjugate core
                    let (_, core) = cyclic_reduce_syllables(factors, s.clone())?;
                    if core.len() >= 2 || core.is_empty() {
                        Ok(if core.is_empty() { Some(1) } else { None })
                    } else {
                        factors[core[0].0].elem_order(&core[0].1)
                    }
                }
            },
            (GroupKind::VirtuallyCyclic(g), Elem::Vc(x)) => Ok(g.elem_order(*x)),
            (GroupKind::BaumslagSolitar12, Elem::Bs(x)) => {
                Ok(if x.is_identity() { Some(1) } else { None })
            }
            _ => Err(Error::MixedAmbient(format!("element kind mismatch in {}", self.id))),
        }
    }

    /// A presentation over [`gen_names`](Self::gen_names). Formal vertices
    /// without declared relators present as free on their generators; the
    /// caller is responsible for tracking that they are opaque.
    pub fn presentation(&self) -> Presentation {
        let gens = self.gen_names();
        let relators = match &self.kind {
            GroupKind::Finite(g) => {
                if g.relators.is_empty() && g.order() > 1 {
                    g.table_presentation_relators()
                } else {
                    g.relators.clone()
                }
            }
            GroupKind::Free(_) => Vec::new(),
            GroupKind::FreeProduct { factors } => {
                let mut rels = Vec::new();
                let mut offset = 0usize;
                for f in factors {
                    for r in f.presentation().relators {
                        rels.push(Word(
                            r.0.iter().map(|l| Letter { gen: l.gen + offset, inv: l.inv }).collect(),
                        ));
                    }
                    offset += f.n_gens();
                }
                rels
            }
            GroupKind::VirtuallyCyclic(g) => g.presentation_relators(),
            GroupKind::BaumslagSolitar12 => {
                vec![Word::parse("t^-1*x*t*x^-2", &bs12::gen_names()).unwrap()]
            }
            GroupKind::FormalVertex { relators, .. } => relators.clone().unwrap_or_default(),
        };
        Presentation::new(gens, relators)
    }

    /// True when the presentation is trustworthy for invariants (formal
    /// vertices without declared relators are not).
    pub fn presentation_is_exact(&self) -> bool {
        !matches!(&self.kind, GroupKind::FormalVertex { relators: None, .. })
    }
}

fn disambiguate(existing: &[String], name: &str, factor: usize) -> String {
    if existing.iter().any(|n| n == name) {
        format!("{}{}", name, factor)
    } else {
        name.to_string()
    }
}

/// Appends a syllable to a reduced syllable list, merging and cancelling.
fn push_syllable(
    factors: &[GroupHandle],
    acc: &mut Vec<(usize, Elem)>,
    fi: usize,
    e: Elem,
) -> Result<()> {
    if factors[fi].is_identity_elem(&e)? {
        return Ok(());
    }
    match acc.last() {
        Some((last_fi, _)) if *last_fi == fi => {
            let (_, last) = acc.pop().unwrap();
            let merged = factors[fi].mul(&last, &e)?;
            if !factors[fi].is_identity_elem(&merged)? {
                acc.push((fi, merged));
            }
            Ok(())
        }
        _ => {
            acc.push((fi, e));
            Ok(())
        }
    }
}

/// Cyclic reduction of a syllable word: returns (conjugator syllables, core).
fn cyclic_reduce_syllables(
    factors: &[GroupHandle],
    mut s: Vec<(usize, Elem)>,
) -> Result<(Vec<(usize, Elem)>, Vec<(usize, Elem)>)> {
    let mut conj: Vec<(usize, Elem)> = Vec::new();
    loop {
        if s.len() < 2 {
            return Ok((conj, s));
        }
        let first = s.first().unwrap().clone();
        let last = s.last().unwrap().clone();
        if first.0 != last.0 {
            return Ok((conj, s));
        }
        // w = a v b with a, b in the same factor: conjugate by a^-1
        let fi = first.0;
        s.remove(0);
        s.pop();
        let merged = factors[fi].mul(&last.1, &first.1)?;
        if !factors[fi].is_identity_elem(&merged)? {
            if s.is_empty() {
                s = vec![(fi, merged)];
                conj.push(first);
                return Ok((conj, s));
            }
            s.push((fi, merged));
            // re-normalize boundary
            if s.len() >= 2 && s[0].0 == s[s.len() - 1].0 && s.len() == 2 {
                // handled by next loop pass
            }
        }
        conj.push(first);
    }
}

/// Membership strategies for finitely generated subgroups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// Closed element set in a finite ambient group.
    FiniteEnumeration { elements: BTreeSet<usize> },
    /// Folded subgroup graph in a free ambient group.
    FoldedGraph { graph: SubgroupGraph },
    /// ℤ[1/2] ⋊ ℤ coordinates in BS(1,2).
    Bs12 { data: BsSubgroup },
    /// Index data in a virtually cyclic ambient group.
    VcIndex { data: VcSubgroup },
    /// The trivial subgroup of any ambient group with a word problem.
    Trivial,
    /// No decision procedure; only identity-containment is answered.
    Formal,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::FiniteEnumeration { .. } => "finite-enumeration",
            Strategy::FoldedGraph { .. } => "folded-subgroup-graph",
            Strategy::Bs12 { .. } => "BS12-normal-form",
            Strategy::VcIndex { .. } => "virtually-cyclic-index-data",
            Strategy::Trivial => "trivial",
            Strategy::Formal => "formal",
        }
    }
}

/// A finitely generated subgroup of a catalog group, with a membership
/// strategy fitted to the ambient kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupDesc {
    pub ambient: GroupHandle,
    pub generators: Vec<Word>,
    pub strategy: Strategy,
}

/// Builds the subgroup generated by `gens` with the best available strategy.
/// For finite ambient groups the element set is recorded.
pub fn generated_subgroup(ambient: &GroupHandle, gens: &[Word]) -> Result<SubgroupDesc> {
    let n = ambient.n_gens();
    for g in gens {
        g.check_letters(n).map_err(|_| {
            Error::MixedAmbient(format!("generator word does not fit ambient {}", ambient.id))
        })?;
    }
    let strategy = match &ambient.kind {
        GroupKind::Finite(g) => {
            let seed: BTreeSet<usize> =
                gens.iter().map(|w| g.eval(w)).collect::<Result<_>>()?;
            Strategy::FiniteEnumeration { elements: g.closure(&seed) }
        }
        GroupKind::Free(f) => {
            Strategy::FoldedGraph { graph: SubgroupGraph::build(f.rank(), gens)? }
        }
        GroupKind::BaumslagSolitar12 => {
            let elems: Vec<BsElem> =
                gens.iter().map(bs12::eval).collect::<Result<_>>()?;
            Strategy::Bs12 { data: BsSubgroup::from_generators(&elems)? }
        }
        GroupKind::VirtuallyCyclic(g) => {
            let elems: Vec<VcElem> =
                gens.iter().map(|w| g.eval(w)).collect::<Result<_>>()?;
            Strategy::VcIndex { data: VcSubgroup::from_generators(g, &elems)? }
        }
        GroupKind::FreeProduct { .. } => {
            let mut all_trivial = true;
            for w in gens {
                if !ambient.is_identity(w)? {
                    all_trivial = false;
                }
            }
            if all_trivial {
                Strategy::Trivial
            } else {
                Strategy::Formal
            }
        }
        GroupKind::FormalVertex { .. } => {
            if gens.is_empty() {
                Strategy::Trivial
            } else {
                Strategy::Formal
            }
        }
    };
    Ok(SubgroupDesc { ambient: ambient.clone(), generators: gens.to_vec(), strategy })
}

/// Decides membership of `w` in the subgroup, exactly, per strategy.
pub fn is_member(s: &SubgroupDesc, w: &Word) -> Result<bool> {
    match &s.strategy {
        Strategy::FiniteEnumeration { elements } => match s.ambient.eval(w)? {
            Elem::Finite(x) => Ok(elements.contains(&x)),
            _ => Err(Error::MixedAmbient("finite strategy on non-finite element".into())),
        },
        Strategy::FoldedGraph { graph } => Ok(graph.contains(w)),
        Strategy::Bs12 { data } => data.contains(bs12::eval(w)?),
        Strategy::VcIndex { data } => match &s.ambient.kind {
            GroupKind::VirtuallyCyclic(g) => data.contains(g, g.eval(w)?),
            _ => Err(Error::MixedAmbient("vc strategy on non-vc ambient".into())),
        },
        Strategy::Trivial => {
            if s.ambient.is_formal() {
                if w.is_empty() {
                    Ok(true)
                } else {
                    Err(s.ambient.unsupported("membership of a non-empty word in a formal subgroup"))
                }
            } else {
                s.ambient.is_identity(w)
            }
        }
        Strategy::Formal => {
            if w.is_empty() {
                Ok(true)
            } else {
                Err(Error::UnsupportedQuery {
                    handle: s.ambient.id.clone(),
                    query: "membership with formal strategy".into(),
                })
            }
        }
    }
}

impl SubgroupDesc {
    /// True when this subgroup is the whole ambient group (decided where the
    /// strategy allows).
    pub fn is_whole_group(&self) -> Result<bool> {
        match (&self.strategy, &self.ambient.kind) {
            (Strategy::FiniteEnumeration { elements }, GroupKind::Finite(g)) => {
                Ok(elements.len() == g.order())
            }
            (Strategy::FoldedGraph { graph }, GroupKind::Free(f)) => {
                Ok(graph.finite_index() == Some(1) && graph.rank() == f.rank()
                    || (f.rank() == 0))
            }
            (Strategy::Bs12 { data }, _) => {
                Ok(data.c == 1 && data.odd_gen == 1)
            }
            (Strategy::VcIndex { data }, GroupKind::VirtuallyCyclic(g)) => data.is_whole(g),
            (Strategy::Trivial, _) => Ok(self.ambient.is_trivial()),
            _ => Err(Error::UnsupportedQuery {
                handle: self.ambient.id.clone(),
                query: "whole-group comparison".into(),
            }),
        }
    }

    /// True when the subgroup is finite, where decidable.
    pub fn is_finite(&self) -> Option<bool> {
        match &self.strategy {
            Strategy::FiniteEnumeration { .. } => Some(true),
            Strategy::FoldedGraph { graph } => Some(graph.rank() == 0),
            Strategy::Bs12 { data } => Some(data.c == 0 && data.trans_gen.is_zero()),
            Strategy::VcIndex { data } => Some(!data.is_infinite()),
            Strategy::Trivial => Some(true),
            Strategy::Formal => None,
        }
    }

    /// Expresses `w` (a subgroup element) as a word over `self.generators`
    /// index space, where the strategy supports rewriting. Returns `Ok(None)`
    /// if `w` is not in the subgroup, and an error when rewriting is not
    /// supported for this strategy.
    pub fn express(&self, w: &Word) -> Result<Option<Word>> {
        match &self.strategy {
            Strategy::FoldedGraph { graph } => {
                // the folded-graph basis need not equal the generator list;
                // rewrite over the basis, then translate basis elements that
                // literally match generators
                match graph.express(w) {
                    None => Ok(None),
                    Some(expr) => {
                        let basis = graph.basis();
                        let gen_elems: Vec<Word> =
                            self.generators.iter().map(free::reduce).collect();
                        let mut out: Vec<Letter> = Vec::new();
                        for l in &expr.0 {
                            match gen_elems.iter().position(|g| *g == basis[l.gen]) {
                                Some(idx) => out.push(Letter { gen: idx, inv: l.inv }),
                                None => {
                                    // fall back: basis word equals some
                                    // generator inverse
                                    let invb = basis[l.gen].inverse();
                                    match gen_elems.iter().position(|g| *g == free::reduce(&invb)) {
                                        Some(idx) => out.push(Letter { gen: idx, inv: !l.inv }),
                                        None => {
                                            return Err(Error::UnsupportedQuery {
                                                handle: self.ambient.id.clone(),
                                                query: "rewriting over a non-basis generating set"
                                                    .into(),
                                            })
                                        }
                                    }
                                }
                            }
                        }
                        Ok(Some(Word(out)))
                    }
                }
            }
            Strategy::FiniteEnumeration { elements } => {
                let GroupKind::Finite(g) = &self.ambient.kind else {
                    return Err(Error::MixedAmbient("finite strategy mismatch".into()));
                };
                let target = g.eval(w)?;
                if !elements.contains(&target) {
                    return Ok(None);
                }
                // BFS over subgroup generators
                let gens: Vec<usize> =
                    self.generators.iter().map(|w| g.eval(w)).collect::<Result<_>>()?;
                let mut words: Vec<Option<Word>> = vec![None; g.order()];
                words[g.identity()] = Some(Word::identity());
                let mut queue = std::collections::VecDeque::from([g.identity()]);
                while let Some(x) = queue.pop_front() {
                    if x == target {
                        break;
                    }
                    for (i, &ge) in gens.iter().enumerate() {
                        for inv in [false, true] {
                            let y = g.mul(x, if inv { g.inv(ge) } else { ge });
                            if words[y].is_none() {
                                let mut nw = words[x].clone().unwrap();
                                nw.0.push(Letter { gen: i, inv });
                                words[y] = Some(nw);
                                queue.push_back(y);
                            }
                        }
                    }
                }
                Ok(words[target].clone())
            }
            Strategy::Bs12 { data } => {
                let e = bs12::eval(w)?;
                if !data.contains(e)? {
                    return Ok(None);
                }
                if self.generators.len() == 1 {
                    if let Some(p) = data.express_as_power(e) {
                        let p64 = i64::try_from(p)
                            .map_err(|_| Error::Overflow("subgroup exponent".into()))?;
                        return Ok(Some(Word::gen(0).pow(p64)));
                    }
                }
                Err(Error::UnsupportedQuery {
                    handle: self.ambient.id.clone(),
                    query: "rewriting in a non-cyclic BS(1,2) subgroup".into(),
                })
            }
            Strategy::VcIndex { data } => {
                let GroupKind::VirtuallyCyclic(g) = &self.ambient.kind else {
                    return Err(Error::MixedAmbient("vc strategy mismatch".into()));
                };
                let e = g.eval(w)?;
                if !data.contains(g, e)? {
                    return Ok(None);
                }
                // finite subgroups: BFS over generators
                if !data.is_infinite() {
                    let gens: Vec<VcElem> =
                        self.generators.iter().map(|w| g.eval(w)).collect::<Result<_>>()?;
                    let mut seen: std::collections::BTreeMap<VcElem, Word> =
                        [(g.identity(), Word::identity())].into();
                    let mut queue = std::collections::VecDeque::from([g.identity()]);
                    while let Some(x) = queue.pop_front() {
                        if x == e {
                            break;
                        }
                        for (i, &ge) in gens.iter().enumerate() {
                            for inv in [false, true] {
                                let y = g.mul(x, if inv { g.inv(ge)? } else { ge })?;
                                if !seen.contains_key(&y) {
                                    let mut nw = seen[&x].clone();
                                    nw.0.push(Letter { gen: i, inv });
                                    seen.insert(y, nw);
                                    queue.push_back(y);
                                }
                            }
                        }
                    }
                    return Ok(seen.get(&e).cloned());
                }
                // cyclic infinite subgroups: power matching
                if self.generators.len() == 1 {
                    let gen = g.eval(&self.generators[0])?;
                    if let (Some(ng), Some(ne)) =
                        (vc_translation(gen.q), vc_translation(e.q))
                    {
                        if ng != 0 && ne % ng == 0 && g.pow(gen, ne / ng)? == e {
                            return Ok(Some(Word::gen(0).pow(ne / ng)));
                        }
                        return Ok(None);
                    }
                }
                Err(Error::UnsupportedQuery {
                    handle: self.ambient.id.clone(),
                    query: "rewriting in this virtually cyclic subgroup".into(),
                })
            }
            Strategy::Trivial => {
                if is_member(self, w)? {
                    Ok(Some(Word::identity()))
                } else {
                    Ok(None)
                }
            }
            Strategy::Formal => Err(Error::UnsupportedQuery {
                handle: self.ambient.id.clone(),
                query: "rewriting with formal strategy".into(),
            }),
        }
    }

    /// A standalone handle for the subgroup, where constructible: sub-tables
    /// for finite ambients, free handles on the folded-graph basis for free
    /// ambients, cyclic handles for cyclic BS(1,2)/VC subgroups.
    pub fn as_handle(&self, id: &str) -> Result<GroupHandle> {
        match (&self.strategy, &self.ambient.kind) {
            (Strategy::FiniteEnumeration { elements }, GroupKind::Finite(g)) => {
                let mut sub = g.subgroup_table(elements)?;
                sub.name = id.to_string();
                Ok(GroupHandle { id: id.to_string(), kind: GroupKind::Finite(sub) })
            }
            (Strategy::FoldedGraph { graph }, GroupKind::Free(_)) => {
                let rank = graph.rank();
                let names: Vec<String> = (0..rank).map(|i| format!("g{}", i)).collect();
                Ok(GroupHandle {
                    id: id.to_string(),
                    kind: GroupKind::Free(FreeGroup::new(
                        id,
                        names,
                    )),
                })
            }
            (Strategy::Trivial, _) => Ok(GroupHandle::finite(finite::trivial())),
            (Strategy::Bs12 { data }, _) if data.c == 0 => {
                if data.trans_gen.is_zero() {
                    Ok(GroupHandle::finite(finite::trivial()))
                } else {
                    Ok(GroupHandle::free(id, &["a"]))
                }
            }
            _ => Err(Error::UnsupportedQuery {
                handle: self.ambient.id.clone(),
                query: "building a standalone subgroup handle".into(),
            }),
        }
    }
}

pub(crate) fn vc_translation(q: vc::QElem) -> Option<i64> {
    match q {
        vc::QElem::Z(n) => Some(n),
        vc::QElem::D { n, refl: false } => Some(n),
        vc::QElem::D { refl: true, .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::catalog::Catalog;

    fn cat() -> Catalog {
        Catalog::default_catalog()
    }

    #[test]
    fn normal_form_free_reduction() {
        let f = GroupHandle::free("F2", &["a", "b"]);
        let names = f.gen_names();
        let w = Word::parse("a*b*b^-1*a", &names).unwrap();
        assert_eq!(f.normal_form(&w).unwrap().render(&names), "a^2");
    }

    #[test]
    fn normal_form_bs12_presentation() {
        let h = GroupHandle::bs12();
        let names = h.gen_names();
        let w = Word::parse("t^-1*x*t", &names).unwrap();
        assert_eq!(h.normal_form(&w).unwrap().render(&names), "x^2");
    }

    #[test]
    fn normal_form_finite_table() {
        let s3 = GroupHandle::finite(finite::sym3());
        let names = s3.gen_names();
        let w = Word::parse("r*f*r*f", &names).unwrap();
        assert!(h_is_identity(&s3, &w));
        fn h_is_identity(h: &GroupHandle, w: &Word) -> bool {
            h.is_identity(w).unwrap()
        }
    }

    #[test]
    fn normal_form_idempotent() {
        let cat = cat();
        for id in ["S3", "F2", "BS12", "Z", "Dinf", "C3*C5", "ZxC3"] {
            let h = cat.get(id).unwrap();
            let names = h.gen_names();
            let samples = ["1", "g0ish"];
            let _ = samples;
            for text in sample_words(&names) {
                let w = Word::parse(&text, &names).unwrap();
                let nf = h.normal_form(&w).unwrap();
                let nf2 = h.normal_form(&nf).unwrap();
                assert_eq!(nf, nf2, "idempotence failed on {} for {}", id, text);
            }
        }
    }

    fn sample_words(names: &[String]) -> Vec<String> {
        let mut out = vec!["1".to_string()];
        if !names.is_empty() {
            out.push(names[0].clone());
            out.push(format!("{}^-1", names[0]));
            out.push(format!("{0}*{0}", names[0]));
        }
        if names.len() >= 2 {
            out.push(format!("{}*{}^-1*{}", names[0], names[1], names[0]));
            out.push(format!("{}^2*{}^3", names[1], names[0]));
        }
        out
    }

    #[test]
    fn formal_vertex_refuses() {
        let fv = GroupHandle::formal("opaque", vec!["x".into()], None);
        let w = Word::gen(0);
        assert!(matches!(fv.normal_form(&w), Err(Error::UnsupportedQuery { .. })));
    }

    #[test]
    fn membership_examples() {
        // <a^2> <= F(a): a^4 in, a^3 out
        let f1 = GroupHandle::free("F1", &["a"]);
        let a2 = generated_subgroup(&f1, &[Word::gen(0).pow(2)]).unwrap();
        assert!(is_member(&a2, &Word::gen(0).pow(4)).unwrap());
        assert!(!is_member(&a2, &Word::gen(0).pow(3)).unwrap());

        // A0 = <x> <= BS(1,2): t x t^-1 not a member
        let h = GroupHandle::bs12();
        let names = h.gen_names();
        let a0 = generated_subgroup(&h, &[Word::parse("x", &names).unwrap()]).unwrap();
        assert!(!is_member(&a0, &Word::parse("t*x*t^-1", &names).unwrap()).unwrap());
        assert!(is_member(&a0, &Word::parse("x^3", &names).unwrap()).unwrap());

        // <ab, a^2> <= F(a,b): b not a member
        let f2 = GroupHandle::free("F2", &["a", "b"]);
        let n2 = f2.gen_names();
        let sub = generated_subgroup(
            &f2,
            &[Word::parse("a*b", &n2).unwrap(), Word::parse("a^2", &n2).unwrap()],
        )
        .unwrap();
        assert!(!is_member(&sub, &Word::parse("b", &n2).unwrap()).unwrap());
    }

    #[test]
    fn membership_closure_property() {
        let f2 = GroupHandle::free("F2", &["a", "b"]);
        let n2 = f2.gen_names();
        let sub = generated_subgroup(
            &f2,
            &[Word::parse("a*b", &n2).unwrap(), Word::parse("b*a", &n2).unwrap()],
        )
        .unwrap();
        let g = Word::parse("a*b*b*a", &n2).unwrap();
        let h = Word::parse("b*a", &n2).unwrap();
        assert!(is_member(&sub, &g).unwrap());
        assert!(is_member(&sub, &h).unwrap());
        assert!(is_member(&sub, &g.concat(&h)).unwrap());
    }

    #[test]
    fn generated_subgroup_examples() {
        // S3 from a 2-cycle and a 3-cycle has order 6
        let s3 = GroupHandle::finite(finite::sym3());
        let names = s3.gen_names();
        let sub = generated_subgroup(
            &s3,
            &[Word::parse("f", &names).unwrap(), Word::parse("r", &names).unwrap()],
        )
        .unwrap();
        match &sub.strategy {
            Strategy::FiniteEnumeration { elements } => assert_eq!(elements.len(), 6),
            _ => panic!("expected finite enumeration"),
        }

        // empty generating set is the trivial subgroup
        let t = generated_subgroup(&s3, &[]).unwrap();
        assert!(is_member(&t, &Word::identity()).unwrap());
        assert!(!is_member(&t, &Word::parse("r", &names).unwrap()).unwrap());

        // <a^2, a^3> = <a> in F(a)
        let f1 = GroupHandle::free("F1", &["a"]);
        let sub = generated_subgroup(&f1, &[Word::gen(0).pow(2), Word::gen(0).pow(3)]).unwrap();
        assert!(is_member(&sub, &Word::gen(0)).unwrap());
        assert!(sub.is_whole_group().unwrap());
    }

    #[test]
    fn free_product_normal_forms() {
        let cat = cat();
        let g = cat.get("C3*C5").unwrap();
        let names = g.gen_names();
        // both factors name their generator `a`, so the second is a1
        assert_eq!(names, vec!["a".to_string(), "a1".to_string()]);
        assert!(g.is_identity(&Word::parse("a^3", &names).unwrap()).unwrap());
        assert!(g.is_identity(&Word::parse("a1^5", &names).unwrap()).unwrap());
        let w = Word::parse("a*a1*a^-1*a*a1^4", &names).unwrap();
        // reduces to a * a1^5 = a
        let nf = g.normal_form(&w).unwrap();
        assert_eq!(nf.render(&names), "a");
        // mixed syllable words have infinite order
        let ab = Word::parse("a*a1", &names).unwrap();
        assert_eq!(g.elem_order(&g.eval(&ab).unwrap()).unwrap(), None);
        // conjugate of a factor element has the factor's order
        let c = Word::parse("a1*a*a1^-1", &names).unwrap();
        assert_eq!(g.elem_order(&g.eval(&c).unwrap()).unwrap(), Some(3));
    }

    #[test]
    fn express_in_generators() {
        let f1 = GroupHandle::free("F1", &["a"]);
        let sub = generated_subgroup(&f1, &[Word::gen(0).pow(2)]).unwrap();
        let expr = sub.express(&Word::gen(0).pow(6)).unwrap().unwrap();
        assert_eq!(expr, Word::gen(0).pow(3));
        assert!(sub.express(&Word::gen(0).pow(3)).unwrap().is_none());

        // BS12 cyclic translation subgroup: x = a1^2 for a1 = t x t^-1
        let h = GroupHandle::bs12();
        let names = h.gen_names();
        let a1 = generated_subgroup(&h, &[Word::parse("t*x*t^-1", &names).unwrap()]).unwrap();
        let expr = a1.express(&Word::parse("x", &names).unwrap()).unwrap().unwrap();
        assert_eq!(expr, Word::gen(0).pow(2));
    }
}
