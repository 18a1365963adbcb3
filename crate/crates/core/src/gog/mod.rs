//! Graphs of groups: representation, validation, fundamental-group
//! presentations, complexity, and the elementary moves (collapse, subdivide,
//! splitting extraction, refinement) with properness and compatibility
//! checks.

pub mod canon;
pub mod io;
pub mod moves;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::abelian::{abelianization, AbelianInvariants, Presentation};
use crate::groups::{generated_subgroup, GroupHandle, GroupKind};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub String);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn vid(s: &str) -> VertexId {
    VertexId(s.to_string())
}

pub fn eid(s: &str) -> EdgeId {
    EdgeId(s.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexData {
    pub group: GroupHandle,
    /// Sandbox graphs: the vertex stabilizer as an element set of the ambient
    /// finite group.
    pub ambient_elements: Option<BTreeSet<usize>>,
}

impl VertexData {
    pub fn new(group: GroupHandle) -> Self {
        VertexData { group, ambient_elements: None }
    }
}

/// An edge with two boundary monomorphisms, one per end. Loops are allowed;
/// the two boundary maps of a loop are stored separately (ends 0 and 1), so
/// no edge silently encodes an inversion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeData {
    pub ends: [VertexId; 2],
    pub group: GroupHandle,
    /// images[k][i] = image of edge-group generator i in the vertex group at
    /// ends[k].
    pub images: [Vec<Word>; 2],
    pub ambient_elements: Option<BTreeSet<usize>>,
}

impl EdgeData {
    pub fn new(ends: [VertexId; 2], group: GroupHandle, images: [Vec<Word>; 2]) -> Self {
        EdgeData { ends, group, images, ambient_elements: None }
    }

    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }

    pub fn other_end(&self, v: &VertexId) -> &VertexId {
        if &self.ends[0] == v {
            &self.ends[1]
        } else {
            &self.ends[0]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphOfGroups {
    pub vertices: BTreeMap<VertexId, VertexData>,
    pub edges: BTreeMap<EdgeId, EdgeData>,
    pub base: VertexId,
    /// Sandbox graphs carry the ambient finite group all labels live in.
    pub ambient: Option<GroupHandle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InjectivityStatus {
    Verified,
    Asserted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub injectivity: BTreeMap<String, [InjectivityStatus; 2]>,
}

impl GraphOfGroups {
    pub fn new(base: VertexId) -> Self {
        GraphOfGroups { vertices: BTreeMap::new(), edges: BTreeMap::new(), base, ambient: None }
    }

    pub fn add_vertex(&mut self, id: VertexId, group: GroupHandle) {
        self.vertices.insert(id, VertexData::new(group));
    }

    pub fn add_edge(
        &mut self,
        id: EdgeId,
        ends: [VertexId; 2],
        group: GroupHandle,
        images: [Vec<Word>; 2],
    ) {
        self.edges.insert(id, EdgeData::new(ends, group, images));
    }

    pub fn vertex(&self, v: &VertexId) -> Result<&VertexData> {
        self.vertices.get(v).ok_or_else(|| Error::Validation {
            id: v.to_string(),
            reason: "unknown vertex".into(),
        })
    }

    pub fn edge(&self, e: &EdgeId) -> Result<&EdgeData> {
        self.edges.get(e).ok_or_else(|| Error::Validation {
            id: e.to_string(),
            reason: "unknown edge".into(),
        })
    }

    /// Incident edge ends at v: (edge id, end index).
    pub fn incident(&self, v: &VertexId) -> Vec<(EdgeId, usize)> {
        let mut out = Vec::new();
        for (id, e) in &self.edges {
            for k in 0..2 {
                if &e.ends[k] == v {
                    out.push((id.clone(), k));
                }
            }
        }
        out
    }

    pub fn valence(&self, v: &VertexId) -> usize {
        self.incident(v).len()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let start = self.vertices.keys().next().unwrap().clone();
        let mut seen: BTreeSet<VertexId> = [start.clone()].into();
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for e in self.edges.values() {
                for k in 0..2 {
                    if e.ends[k] == v && !seen.contains(&e.ends[1 - k]) {
                        seen.insert(e.ends[1 - k].clone());
                        queue.push_back(e.ends[1 - k].clone());
                    }
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// First Betti number of the underlying graph (assumes connectivity).
    pub fn betti(&self) -> usize {
        (self.edges.len() + 1).saturating_sub(self.vertices.len())
    }

    /// Structural and boundary-map validation. Injectivity of each boundary
    /// monomorphism is verified where decidable and recorded as asserted
    /// otherwise; a provably non-injective map is an error naming the edge.
    pub fn validate(&self) -> Result<ValidationReport> {
        if !self.is_connected() {
            return Err(Error::Validation {
                id: self.base.to_string(),
                reason: "underlying graph is not connected".into(),
            });
        }
        if !self.vertices.contains_key(&self.base) {
            return Err(Error::Validation {
                id: self.base.to_string(),
                reason: "base vertex does not exist".into(),
            });
        }
        let mut injectivity = BTreeMap::new();
        for (id, e) in &self.edges {
            let mut status = [InjectivityStatus::Asserted; 2];
            for k in 0..2 {
                let vd = self.vertex(&e.ends[k]).map_err(|_| Error::Validation {
                    id: id.to_string(),
                    reason: format!("end {} references unknown vertex {}", k, e.ends[k]),
                })?;
                if e.images[k].len() != e.group.n_gens() {
                    return Err(Error::Validation {
                        id: id.to_string(),
                        reason: format!(
                            "end {} has {} image words for {} edge-group generators",
                            k,
                            e.images[k].len(),
                            e.group.n_gens()
                        ),
                    });
                }
                for w in &e.images[k] {
                    w.check_letters(vd.group.n_gens()).map_err(|_| Error::Validation {
                        id: id.to_string(),
                        reason: format!("boundary image does not fit vertex group {}", vd.group.id),
                    })?;
                }
                status[k] = self.check_injectivity(id, e, k, vd)?;
            }
            injectivity.insert(id.0.clone(), status);
        }
        Ok(ValidationReport { injectivity })
    }

    fn check_injectivity(
        &self,
        id: &EdgeId,
        e: &EdgeData,
        k: usize,
        vd: &VertexData,
    ) -> Result<InjectivityStatus> {
        if vd.group.is_formal() || e.group.is_formal() {
            return Ok(InjectivityStatus::Asserted);
        }
        // relators of the edge group must map to the identity
        for r in &e.group.presentation().relators {
            let mapped = substitute(r, &e.images[k]);
            if !vd.group.is_identity(&mapped)? {
                return Err(Error::Validation {
                    id: id.to_string(),
                    reason: format!("end {} boundary map does not respect edge-group relations", k),
                });
            }
        }
        match (&e.group.kind, &vd.group.kind) {
            (GroupKind::Finite(eg), _) => {
                // enumerate edge-group elements and compare images
                let words = eg.element_words();
                let mut seen = Vec::new();
                for w in &words {
                    let img = vd.group.eval(&substitute(w, &e.images[k]))?;
                    if seen.contains(&img) {
                        return Err(Error::Validation {
                            id: id.to_string(),
                            reason: format!("end {} boundary map is not injective", k),
                        });
                    }
                    seen.push(img);
                }
                Ok(InjectivityStatus::Verified)
            }
            (GroupKind::Free(ef), GroupKind::Free(_)) => {
                let sub = generated_subgroup(&vd.group, &e.images[k])?;
                match &sub.strategy {
                    crate::groups::Strategy::FoldedGraph { graph } => {
                        if graph.rank() == ef.rank() {
                            Ok(InjectivityStatus::Verified)
                        } else {
                            Err(Error::Validation {
                                id: id.to_string(),
                                reason: format!(
                                    "end {} image has rank {} < edge group rank {}",
                                    k,
                                    graph.rank(),
                                    ef.rank()
                                ),
                            })
                        }
                    }
                    _ => Ok(InjectivityStatus::Asserted),
                }
            }
            (GroupKind::Free(ef), _) if ef.rank() == 1 => {
                // Z embeds iff the image has infinite order
                let img = vd.group.eval(&e.images[k][0])?;
                if vd.group.elem_order(&img)?.is_none() {
                    Ok(InjectivityStatus::Verified)
                } else {
                    Err(Error::Validation {
                        id: id.to_string(),
                        reason: format!("end {}: infinite cyclic edge group with torsion image", k),
                    })
                }
            }
            (GroupKind::Free(ef), _) if ef.rank() >= 2 => {
                // no free subgroup of rank 2 in finite, VC, or BS(1,2) kinds
                Err(Error::Validation {
                    id: id.to_string(),
                    reason: format!("end {}: rank-{} free edge group cannot embed", k, ef.rank()),
                })
            }
            _ => Ok(InjectivityStatus::Asserted),
        }
    }

    /// Deterministic spanning tree: BFS from the base over sorted edge ids.
    /// Returns the set of tree edge ids.
    pub fn spanning_tree(&self) -> BTreeSet<EdgeId> {
        let mut tree = BTreeSet::new();
        let mut seen: BTreeSet<VertexId> = [self.base.clone()].into();
        let mut queue = VecDeque::from([self.base.clone()]);
        while let Some(v) = queue.pop_front() {
            for (id, e) in &self.edges {
                if tree.contains(id) || e.is_loop() {
                    continue;
                }
                for k in 0..2 {
                    if e.ends[k] == v && !seen.contains(&e.ends[1 - k]) {
                        seen.insert(e.ends[1 - k].clone());
                        tree.insert(id.clone());
                        queue.push_back(e.ends[1 - k].clone());
                    }
                }
            }
        }
        tree
    }

    /// Fundamental-group presentation: vertex-group generators (namespaced by
    /// vertex id) plus one stable letter per non-tree edge; relators are the
    /// vertex relators plus boundary identifications.
    pub fn presentation(&self) -> Result<Presentation> {
        if !self.is_connected() {
            return Err(Error::Validation {
                id: self.base.to_string(),
                reason: "presentation of a disconnected graph".into(),
            });
        }
        let tree = self.spanning_tree();
        let mut gens: Vec<String> = Vec::new();
        let mut offsets: BTreeMap<VertexId, usize> = BTreeMap::new();
        for (v, vd) in &self.vertices {
            offsets.insert(v.clone(), gens.len());
            for g in vd.group.gen_names() {
                gens.push(format!("{}.{}", v, g));
            }
        }
        let mut stable: BTreeMap<EdgeId, usize> = BTreeMap::new();
        for id in self.edges.keys() {
            if !tree.contains(id) {
                stable.insert(id.clone(), gens.len());
                gens.push(format!("t_{}", id));
            }
        }
        let mut relators: Vec<Word> = Vec::new();
        for (v, vd) in &self.vertices {
            let off = offsets[v];
            for r in vd.group.presentation().relators {
                relators.push(shift(&r, off));
            }
        }
        for (id, e) in &self.edges {
            let off0 = offsets[&e.ends[0]];
            let off1 = offsets[&e.ends[1]];
            for i in 0..e.group.n_gens() {
                let w0 = shift(&e.images[0][i], off0);
                let w1 = shift(&e.images[1][i], off1);
                match stable.get(id) {
                    None => {
                        // tree edge: identify the two images
                        relators.push(w0.concat(&w1.inverse()));
                    }
                    Some(&t) => {
                        // stable letter: t^-1 w0 t = w1
                        let tw = Word(vec![Letter::pos(t)]);
                        relators.push(
                            tw.inverse().concat(&w0).concat(&tw).concat(&w1.inverse()),
                        );
                    }
                }
            }
        }
        Ok(Presentation::new(gens, relators))
    }

    /// True when every vertex presentation is exact (no opaque formal
    /// vertices), so invariants of [`presentation`](Self::presentation) are
    /// trustworthy.
    pub fn presentation_is_exact(&self) -> bool {
        self.vertices.values().all(|vd| vd.group.presentation_is_exact())
    }

    pub fn abelianization(&self) -> Result<AbelianInvariants> {
        abelianization(&self.presentation()?)
    }

    /// Complexity proxy (T, b1): T counts triangulated relator faces of
    /// vertex groups outside the elementary family (finite or two-ended
    /// groups are orbihedron stabilizers and contribute no faces); b1 is the
    /// first Betti number of the underlying graph. Lexicographic order.
    pub fn complexity(&self) -> (Complexity, Vec<String>) {
        let mut t = 0u64;
        let mut flags = Vec::new();
        for (v, vd) in &self.vertices {
            if vd.group.is_elementary() {
                continue;
            }
            if !vd.group.presentation_is_exact() {
                flags.push(format!("vertex {} is formal with no declared relators; T contribution 0", v));
                continue;
            }
            for r in vd.group.presentation().relators {
                t += triangulated_faces(r.len());
            }
        }
        (Complexity { faces: t, betti: self.betti() as u64 }, flags)
    }

    /// Deterministic DOT output: vertex labels are group names, edge labels
    /// edge group names.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph gog {\n");
        for (v, vd) in &self.vertices {
            let marker = if *v == self.base { ", shape=doublecircle" } else { "" };
            out.push_str(&format!("  \"{}\" [label=\"{}: {}\"{}];\n", v, v, vd.group.id, marker));
        }
        for (id, e) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [label=\"{}: {}\"];\n",
                e.ends[0], e.ends[1], id, e.group.id
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Fresh vertex id based on a stem.
    pub fn fresh_vertex_id(&self, stem: &str) -> VertexId {
        let mut candidate = VertexId(stem.to_string());
        let mut i = 0;
        while self.vertices.contains_key(&candidate) {
            i += 1;
            candidate = VertexId(format!("{}_{}", stem, i));
        }
        candidate
    }

    pub fn fresh_edge_id(&self, stem: &str) -> EdgeId {
        let mut candidate = EdgeId(stem.to_string());
        let mut i = 0;
        while self.edges.contains_key(&candidate) {
            i += 1;
            candidate = EdgeId(format!("{}_{}", stem, i));
        }
        candidate
    }
}

/// Number of triangles in a triangulated relator disk with `len` sides.
pub fn triangulated_faces(len: usize) -> u64 {
    match len {
        0 => 0,
        1 | 2 => 1,
        n => (n - 2) as u64,
    }
}

/// Complexity pair (T, b1) with lexicographic comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Complexity {
    pub faces: u64,
    pub betti: u64,
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.faces, self.betti)
    }
}

/// Substitutes each letter of `w` (over edge-group generators) by the image
/// word of that generator.
pub fn substitute(w: &Word, images: &[Word]) -> Word {
    let mut out = Vec::new();
    for l in &w.0 {
        let img = &images[l.gen];
        let piece = if l.inv { img.inverse() } else { img.clone() };
        out.extend(piece.0);
    }
    Word(out)
}

/// Shifts a word's generator indices by an offset (namespacing into an
/// assembled presentation).
pub fn shift(w: &Word, offset: usize) -> Word {
    Word(w.0.iter().map(|l| Letter { gen: l.gen + offset, inv: l.inv }).collect())
}

/// Identity boundary images for an edge group (generator i maps to
/// generator i).
pub fn identity_images(group: &GroupHandle) -> Vec<Word> {
    (0..group.n_gens()).map(Word::gen).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::catalog::Catalog;
    use crate::groups::finite;

    fn cat() -> Catalog {
        Catalog::default_catalog()
    }

    /// Single vertex with no edges.
    pub fn single_vertex(h: &GroupHandle) -> GraphOfGroups {
        let mut g = GraphOfGroups::new(vid("v0"));
        g.add_vertex(vid("v0"), h.clone());
        g
    }

    /// Segment with trivial edge group.
    fn trivial_segment(a: &GroupHandle, b: &GroupHandle) -> GraphOfGroups {
        let mut g = GraphOfGroups::new(vid("v0"));
        g.add_vertex(vid("v0"), a.clone());
        g.add_vertex(vid("v1"), b.clone());
        let triv = GroupHandle::finite(finite::trivial());
        g.add_edge(eid("e0"), [vid("v0"), vid("v1")], triv, [vec![], vec![]]);
        g
    }

    #[test]
    fn presentation_single_c3() {
        let cat = cat();
        let g = single_vertex(cat.get("C3").unwrap());
        let p = g.presentation().unwrap();
        assert_eq!(p.gens, vec!["v0.a"]);
        assert_eq!(p.relators.len(), 1);
        assert_eq!(p.relators[0].len(), 3);
        let inv = g.abelianization().unwrap();
        assert_eq!(inv.torsion, vec![3]);
    }

    #[test]
    fn presentation_segment_c3_c5() {
        let cat = cat();
        let g = trivial_segment(cat.get("C3").unwrap(), cat.get("C5").unwrap());
        g.validate().unwrap();
        let inv = g.abelianization().unwrap();
        assert_eq!(inv.rank, 0);
        assert_eq!(inv.torsion, vec![15]);
    }

    #[test]
    fn presentation_trivial_loop_is_z() {
        let triv = GroupHandle::finite(finite::trivial());
        let mut g = GraphOfGroups::new(vid("v0"));
        g.add_vertex(vid("v0"), triv.clone());
        g.add_edge(eid("e0"), [vid("v0"), vid("v0")], triv, [vec![], vec![]]);
        let p = g.presentation().unwrap();
        assert_eq!(p.gens, vec!["t_e0"]);
        assert!(p.relators.is_empty());
        assert_eq!(g.abelianization().unwrap().rank, 1);
    }

    #[test]
    fn validation_catches_disconnection_and_bad_maps() {
        let cat = cat();
        let mut g = single_vertex(cat.get("C3").unwrap());
        g.add_vertex(vid("v9"), cat.get("C5").unwrap().clone());
        let err = g.validate().unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));

        // C2 edge group into C5: the only order-2 image candidate fails
        let mut g = trivial_segment(cat.get("C4").unwrap(), cat.get("C5").unwrap());
        let c2 = cat.get("C2").unwrap().clone();
        let im0 = vec![Word::parse("a^2", &["a".into()]).unwrap()];
        let im1 = vec![Word::parse("a", &["a".into()]).unwrap()];
        g.add_edge(eid("e1"), [vid("v0"), vid("v1")], c2, [im0, im1]);
        let err = g.validate().unwrap_err();
        match err {
            Error::Validation { id, .. } => assert_eq!(id, "e1"),
            other => panic!("unexpected: {:?}", other),
        }
    }

    #[test]
    fn injectivity_statuses() {
        let cat = cat();
        // C2 -> C4 by a -> a^2 is injective and verified
        let mut g = trivial_segment(cat.get("C4").unwrap(), cat.get("C4").unwrap());
        let c2 = cat.get("C2").unwrap().clone();
        let im = vec![Word::parse("a^2", &["a".into()]).unwrap()];
        g.add_edge(eid("e1"), [vid("v0"), vid("v1")], c2, [im.clone(), im]);
        let report = g.validate().unwrap();
        assert_eq!(report.injectivity["e1"], [InjectivityStatus::Verified; 2]);
    }

    #[test]
    fn complexity_examples() {
        let cat = cat();
        // tree of finite groups: (0, 0)
        let g = trivial_segment(cat.get("C3").unwrap(), cat.get("C5").unwrap());
        let (c, _) = g.complexity();
        assert_eq!(c, Complexity { faces: 0, betti: 0 });

        // single loop with trivial groups (pi1 = Z): (0, 1)
        let triv = GroupHandle::finite(finite::trivial());
        let mut g = GraphOfGroups::new(vid("v0"));
        g.add_vertex(vid("v0"), triv.clone());
        g.add_edge(eid("e0"), [vid("v0"), vid("v0")], triv, [vec![], vec![]]);
        let (c, _) = g.complexity();
        assert_eq!(c, Complexity { faces: 0, betti: 1 });

        // single vertex <a,b | [a,b]>: T = 2 (length-4 relator), b1 = 0
        let z2 = GroupHandle::formal(
            "Z2f",
            vec!["a".into(), "b".into()],
            Some(vec![Word::parse("a*b*a^-1*b^-1", &["a".into(), "b".into()]).unwrap()]),
        );
        let g = single_vertex(&z2);
        let (c, _) = g.complexity();
        assert_eq!(c, Complexity { faces: 2, betti: 0 });

        // lexicographic order
        assert!(Complexity { faces: 0, betti: 1 } < Complexity { faces: 1, betti: 0 });
        assert!(Complexity { faces: 1, betti: 0 } < Complexity { faces: 1, betti: 1 });
    }

    #[test]
    fn dot_output_deterministic() {
        let cat = cat();
        let g = trivial_segment(cat.get("C3").unwrap(), cat.get("C5").unwrap());
        let d1 = g.to_dot();
        let d2 = g.to_dot();
        assert_eq!(d1, d2);
        assert!(d1.contains("\"v0\" -- \"v1\""));
        assert!(d1.contains("C3"));
    }
}
