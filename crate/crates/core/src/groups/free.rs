//! Free groups: reduction, cyclic words, and folded subgroup graphs.
//!
//! Subgroup membership, rank, index and rewriting all go through the folded
//! subgroup graph (Stallings automaton) of a finitely generated subgroup.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FreeGroup {
    pub name: String,
    pub gen_names: Vec<String>,
}

impl FreeGroup {
    pub fn new(name: &str, gen_names: Vec<String>) -> Self {
        FreeGroup { name: name.to_string(), gen_names }
    }

    pub fn rank(&self) -> usize {
        self.gen_names.len()
    }
}

/// Freely reduces a word (cancels adjacent inverse pairs).
pub fn reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in &w.0 {
        if let Some(&last) = out.last() {
            if last == l.inverse() {
                out.pop();
                continue;
            }
        }
        out.push(l);
    }
    Word(out)
}

/// Cyclic reduction: returns (conjugator u, core v) with w = u v u^-1 and v
/// cyclically reduced.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let mut v = reduce(w).0;
    let mut u = Vec::new();
    while v.len() >= 2 && v[0] == v[v.len() - 1].inverse() {
        u.push(v[0]);
        v.remove(0);
        v.pop();
    }
    (Word(u), Word(v))
}

/// The maximal root of a word: the shortest r with w = r^k (k >= 1). For
/// w = u v u^-1 this is u p u^-1 where p is the primitive period of the
/// cyclic word v.
pub fn max_root(w: &Word) -> Word {
    let (u, v) = cyclic_reduce(w);
    if v.is_empty() {
        return Word::identity();
    }
    let n = v.len();
    let mut period = n;
    'outer: for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        for i in 0..n {
            if v.0[i] != v.0[i % d] {
                continue 'outer;
            }
        }
        period = d;
        break;
    }
    let p = Word(v.0[..period].to_vec());
    reduce(&u.concat(&p).concat(&u.inverse()))
}

/// True when some conjugate of `w` lies in the subgroup with the given folded
/// graph: the cyclically reduced core of `w` must trace a closed loop based at
/// some vertex of the graph.
pub fn conjugate_into(graph: &SubgroupGraph, w: &Word) -> bool {
    let (_, v) = cyclic_reduce(w);
    if v.is_empty() {
        return true;
    }
    (0..graph.states()).any(|s| graph.trace_from(s, &v) == Some(s))
}

/// Folded subgroup graph over a free group of the given rank.
///
/// States are automaton vertices; following generator g from state s lands in
/// `next[s][2g]`, its inverse in `next[s][2g+1]`. The base state is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupGraph {
    rank: usize,
    next: Vec<Vec<Option<usize>>>,
}

impl SubgroupGraph {
    pub fn build(rank: usize, gens: &[Word]) -> Result<SubgroupGraph> {
        for g in gens {
            g.check_letters(rank)?;
        }
        Ok(fold_graph(rank, gens))
    }

    fn dir(l: Letter) -> usize {
        l.gen * 2 + usize::from(l.inv)
    }

    pub fn states(&self) -> usize {
        self.next.len()
    }

    pub fn trace_from(&self, start: usize, w: &Word) -> Option<usize> {
        let mut s = start;
        for &l in &w.0 {
            s = self.next[s][Self::dir(l)]?;
        }
        Some(s)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.trace_from(0, &reduce(w)) == Some(0)
    }

    /// `Some(index)` when the automaton is complete, i.e. the subgroup has
    /// finite index equal to the state count.
    pub fn finite_index(&self) -> Option<usize> {
        self.next
            .iter()
            .all(|row| row.iter().all(|t| t.is_some()))
            .then_some(self.states())
    }

    fn degree(&self, s: usize, alive: &[bool]) -> usize {
        self.next[s]
            .iter()
            .filter(|t| matches!(t, Some(t) if alive[*t]))
            .count()
    }

    /// Rank of the subgroup: E - V + 1 of the core (hanging trees trimmed,
    /// base kept).
    pub fn rank(&self) -> usize {
        let n = self.states();
        let mut alive = vec![true; n];
        let mut changed = true;
        while changed {
            changed = false;
            for s in 1..n {
                if alive[s] && self.degree(s, &alive) <= 1 {
                    alive[s] = false;
                    changed = true;
                }
            }
        }
        let v = alive.iter().filter(|&&a| a).count();
        let slot_sum: usize = (0..n).filter(|&s| alive[s]).map(|s| self.degree(s, &alive)).sum();
        let e = slot_sum / 2;
        (e + 1).saturating_sub(v)
    }

    /// Canonical key of the geometric edge traversed by letter `l` out of `s`
    /// into `t`: `(from, to, gen)` oriented positively.
    fn canon_edge(s: usize, t: usize, l: Letter) -> (usize, usize, usize) {
        if l.inv {
            (t, s, l.gen)
        } else {
            (s, t, l.gen)
        }
    }

    /// Geometric edges, one entry per positive transition.
    fn edge_list(&self) -> Vec<(usize, usize, usize)> {
        let mut edges = Vec::new();
        for s in 0..self.states() {
            for g in 0..self.rank {
                if let Some(t) = self.next[s][2 * g] {
                    edges.push((s, t, g));
                }
            }
        }
        edges
    }

    /// BFS spanning tree (parent pointers with the letter from child to
    /// parent} plus an index of non-tree edges by canonical key.
    #[allow(clippy::type_complexity)]
    fn tree_and_basis_index(
        &self,
    ) -> (Vec<Option<(usize, Letter)>>, BTreeMap<(usize, usize, usize), usize>) {
        let n = self.states();
        let mut parent: Vec<Option<(usize, Letter)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut tree_edges: Vec<(usize, usize, usize)> = Vec::new();
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            for g in 0..self.rank {
                for inv in [false, true] {
                    let l = Letter { gen: g, inv };
                    if let Some(t) = self.next[s][Self::dir(l)] {
                        if !seen[t] {
                            seen[t] = true;
                            parent[t] = Some((s, l.inverse()));
                            tree_edges.push(Self::canon_edge(s, t, l));
                            queue.push_back(t);
                        }
                    }
                }
            }
        }
        let mut edge_index = BTreeMap::new();
        let mut idx = 0usize;
        for key in self.edge_list() {
            if !tree_edges.contains(&key) {
                edge_index.insert(key, idx);
                idx += 1;
            }
        }
        (parent, edge_index)
    }

    fn path_from_base(&self, parent: &[Option<(usize, Letter)>], mut s: usize) -> Word {
        let mut up = Vec::new();
        while let Some((p, l)) = parent[s] {
            up.push(l);
            s = p;
        }
        Word(up).inverse()
    }

    /// Word labeling the spanning-tree path from the base to state `s`
    /// (`None` when `s` is unreachable, which cannot happen for built graphs).
    pub fn path_word_to(&self, s: usize) -> Option<Word> {
        if s >= self.states() {
            return None;
        }
        let (parent, _) = self.tree_and_basis_index();
        Some(self.path_from_base(&parent, s))
    }

    /// Free basis of the subgroup: one word per non-tree edge, in index order.
    pub fn basis(&self) -> Vec<Word> {
        let (parent, edge_index) = self.tree_and_basis_index();
        let mut items: Vec<(usize, Word)> = edge_index
            .iter()
            .map(|(&(a, b, g), &idx)| {
                let w = self
                    .path_from_base(&parent, a)
                    .concat(&Word(vec![Letter::pos(g)]))
                    .concat(&self.path_from_base(&parent, b).inverse());
                (idx, reduce(&w))
            })
            .collect();
        items.sort_by_key(|(i, _)| *i);
        items.into_iter().map(|(_, w)| w).collect()
    }

    /// Expresses a subgroup element over the basis from [`basis`]; `None`
    /// when `w` is not in the subgroup.
    ///
    /// [`basis`]: SubgroupGraph::basis
    pub fn express(&self, w: &Word) -> Option<Word> {
        let (_, edge_index) = self.tree_and_basis_index();
        let w = reduce(w);
        let mut s = 0usize;
        let mut out: Vec<Letter> = Vec::new();
        for &l in &w.0 {
            let t = self.next[s][Self::dir(l)]?;
            if let Some(&idx) = edge_index.get(&Self::canon_edge(s, t, l)) {
                out.push(Letter { gen: idx, inv: l.inv });
            }
            s = t;
        }
        (s == 0).then(|| reduce(&Word(out)))
    }
}

/// Stallings folding with a union-find over states.
fn fold_graph(rank: usize, gens: &[Word]) -> SubgroupGraph {
    // multigraph adjacency: per state, list of (direction, target)
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    let mut uf: Vec<usize> = vec![0];
    let fresh = |adj: &mut Vec<Vec<(usize, usize)>>, uf: &mut Vec<usize>| -> usize {
        adj.push(Vec::new());
        uf.push(uf.len());
        uf.len() - 1
    };
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for g in gens {
        let g = reduce(g);
        if g.is_empty() {
            continue;
        }
        let mut s = 0usize;
        for (i, &l) in g.0.iter().enumerate() {
            let t = if i + 1 == g.len() { 0 } else { fresh(&mut adj, &mut uf) };
            adj[s].push((SubgroupGraph::dir(l), t));
            adj[t].push((SubgroupGraph::dir(l.inverse()), s));
            s = t;
        }
    }
    // fold: repeatedly merge targets of equal-labeled edges at a state
    let mut work: Vec<usize> = (0..adj.len()).collect();
    while let Some(s) = work.pop() {
        let s = find(&mut uf, s);
        let mut by_dir: BTreeMap<usize, usize> = BTreeMap::new();
        let edges = adj[s].clone();
        let mut merge: Option<(usize, usize)> = None;
        for (d, t) in edges {
            let t = find(&mut uf, t);
            match by_dir.get(&d) {
                None => {
                    by_dir.insert(d, t);
                }
                Some(&u) if u != t => {
                    merge = Some((u.min(t), u.max(t)));
                    break;
                }
                _ => {}
            }
        }
        if let Some((keep, drop)) = merge {
            uf[drop] = keep;
            let moved = std::mem::take(&mut adj[drop]);
            adj[keep].extend(moved);
            work.push(keep);
            work.push(s);
        }
    }
    // compact representatives into a deterministic automaton
    let mut reps: Vec<usize> = Vec::new();
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for x in 0..uf.len() {
        let r = find(&mut uf, x);
        if r == x {
            index.insert(x, reps.len());
            reps.push(x);
        }
    }
    // base must be state 0
    let base_rep = find(&mut uf, 0);
    let base_idx = index[&base_rep];
    let remap = |i: usize| -> usize {
        if i == base_idx {
            0
        } else if i == 0 {
            base_idx
        } else {
            i
        }
    };
    let mut next = vec![vec![None; 2 * rank]; reps.len()];
    for (&rep, &i) in &index {
        for &(d, t) in &adj[rep] {
            let t = find(&mut uf, t);
            next[remap(i)][d] = Some(remap(index[&t]));
        }
    }
    SubgroupGraph { rank, next }
}

/// Convenience: membership of `w` in the subgroup generated by `gens`.
pub fn member(rank: usize, gens: &[Word], w: &Word) -> Result<bool> {
    Ok(SubgroupGraph::build(rank, gens)?.contains(w))
}

pub fn validate_word(f: &FreeGroup, w: &Word) -> Result<()> {
    w.check_letters(f.rank())
        .map_err(|_| Error::InvalidWord(format!("word uses generators outside {}", f.name)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(t: &str) -> Word {
        Word::parse(t, &["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn free_reduction() {
        // spec example: a b b^-1 a -> a a
        assert_eq!(reduce(&w("a*b*b^-1*a")), w("a^2"));
        assert_eq!(reduce(&w("a*a^-1")), Word::identity());
    }

    #[test]
    fn membership_even_powers() {
        let gens = vec![w("a^2")];
        assert!(member(2, &gens, &w("a^4")).unwrap());
        assert!(!member(2, &gens, &w("a^3")).unwrap());
    }

    #[test]
    fn membership_folded_oracle() {
        // spec example oracle: <ab, a^2> <= F(a,b) does not contain b
        let gens = vec![w("a*b"), w("a^2")];
        assert!(!member(2, &gens, &w("b")).unwrap());
        assert!(member(2, &gens, &w("a*b*a^2")).unwrap());
        // rank 2 < 3 = rank of the even-length subgroup, so the index is
        // infinite even though every generator has even length
        let g = SubgroupGraph::build(2, &gens).unwrap();
        assert_eq!(g.finite_index(), None);
    }

    #[test]
    fn folding_collapses_powers() {
        // <a^2, a^3> = <a>
        let an = |t: &str| Word::parse(t, &["a".into()]).unwrap();
        let g = SubgroupGraph::build(1, &[an("a^2"), an("a^3")]).unwrap();
        assert!(g.contains(&an("a")));
        assert_eq!(g.rank(), 1);
        assert_eq!(g.finite_index(), Some(1));
    }

    #[test]
    fn rank_of_standard_subgroups() {
        assert_eq!(SubgroupGraph::build(2, &[w("a"), w("b")]).unwrap().rank(), 2);
        assert_eq!(SubgroupGraph::build(2, &[w("a*b"), w("a^2")]).unwrap().rank(), 2);
        assert_eq!(SubgroupGraph::build(2, &[w("a^2")]).unwrap().rank(), 1);
        assert_eq!(SubgroupGraph::build(2, &[]).unwrap().rank(), 0);
    }

    #[test]
    fn infinite_index_detected() {
        assert_eq!(SubgroupGraph::build(2, &[w("a")]).unwrap().finite_index(), None);
    }

    #[test]
    fn cyclic_reduction_and_roots() {
        let (u, v) = cyclic_reduce(&w("b*a*b^-1"));
        assert_eq!(u, w("b"));
        assert_eq!(v, w("a"));
        assert_eq!(max_root(&w("a^6")), w("a"));
        assert_eq!(max_root(&w("a*b*a*b")), w("a*b"));
        assert_eq!(max_root(&w("b*a^4*b^-1")), w("b*a*b^-1"));
    }

    #[test]
    fn conjugate_into_factor() {
        // <ab> is not conjugate into <a>, but <b a^2 b^-1> is
        let a_graph = SubgroupGraph::build(2, &[w("a")]).unwrap();
        assert!(!conjugate_into(&a_graph, &w("a*b")));
        assert!(conjugate_into(&a_graph, &w("b*a^2*b^-1")));
    }

    #[test]
    fn express_in_basis() {
        let g = SubgroupGraph::build(2, &[w("a^2"), w("b")]).unwrap();
        let basis = g.basis();
        assert_eq!(basis.len(), 2);
        let target = w("a^2*b*a^-2");
        let expr = g.express(&target).unwrap();
        let mut sub = Word::identity();
        for l in &expr.0 {
            let piece = if l.inv { basis[l.gen].inverse() } else { basis[l.gen].clone() };
            sub = sub.concat(&piece);
        }
        assert_eq!(reduce(&sub), reduce(&target));
        assert!(g.express(&w("a")).is_none());
    }
}
