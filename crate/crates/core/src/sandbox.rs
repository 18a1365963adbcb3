//! Exhaustive oracle: finite groups acting without inversions on finite
//! trees. Quotients, folds and the orbit-connectivity lemma are all checked
//! by pure enumeration here, and the quotient-level fold calculus is
//! compared against tree-level folds case by case.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::folds::{ambient_edge, ambient_vertex, FoldKind, FoldMove, FoldSite};
use crate::gog::{EdgeId, GraphOfGroups, VertexId};
use crate::groups::finite::FiniteGroup;
use crate::groups::GroupHandle;

/// A finite tree with a simplicial action of a finite group, without
/// inversions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGTree {
    pub group: FiniteGroup,
    /// vertices are 0..n; edges as sorted pairs
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    /// action[g][v] = g·v
    pub action: Vec<Vec<usize>>,
}

impl FiniteGTree {
    pub fn new(
        group: FiniteGroup,
        n_vertices: usize,
        edges: Vec<(usize, usize)>,
        action: Vec<Vec<usize>>,
    ) -> Result<FiniteGTree> {
        let t = FiniteGTree { group, n_vertices, edges, action };
        t.validate()?;
        Ok(t)
    }

    /// Checks the tree shape, that the action is a homomorphism by graph
    /// automorphisms, and that no element inverts an edge.
    pub fn validate(&self) -> Result<()> {
        if self.edges.len() + 1 != self.n_vertices {
            return Err(Error::Validation {
                id: "tree".into(),
                reason: "edge count is not vertex count minus one".into(),
            });
        }
        if !self.is_connected(&self.edge_set()) {
            return Err(Error::Validation { id: "tree".into(), reason: "not connected".into() });
        }
        let n = self.group.order();
        if self.action.len() != n || self.action.iter().any(|p| p.len() != self.n_vertices) {
            return Err(Error::Validation {
                id: "action".into(),
                reason: "action table shape mismatch".into(),
            });
        }
        let edge_set = self.edge_set();
        for g in 0..n {
            // permutation
            let mut seen = vec![false; self.n_vertices];
            for &v in &self.action[g] {
                if v >= self.n_vertices || seen[v] {
                    return Err(Error::Validation {
                        id: "action".into(),
                        reason: format!("element {} does not act bijectively", g),
                    });
                }
                seen[v] = true;
            }
            // simplicial
            for &(a, b) in &self.edges {
                let (ga, gb) = (self.action[g][a], self.action[g][b]);
                if !edge_set.contains(&norm_edge(ga, gb)) {
                    return Err(Error::Validation {
                        id: "action".into(),
                        reason: format!("element {} does not preserve adjacency", g),
                    });
                }
                // no inversions
                if ga == b && gb == a {
                    return Err(Error::Validation {
                        id: format!("edge ({},{})", a, b),
                        reason: format!(
                            "element {} inverts the edge",
                            self.group.element_names[g]
                        ),
                    });
                }
            }
        }
        // homomorphism
        for g in 0..n {
            for h in 0..n {
                let gh = self.group.mul(g, h);
                for v in 0..self.n_vertices {
                    if self.action[gh][v] != self.action[g][self.action[h][v]] {
                        return Err(Error::Validation {
                            id: "action".into(),
                            reason: "action is not a homomorphism".into(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(a, b)| norm_edge(a, b)).collect()
    }

    fn is_connected(&self, edges: &BTreeSet<(usize, usize)>) -> bool {
        if self.n_vertices == 0 {
            return false;
        }
        let mut seen = vec![false; self.n_vertices];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &(a, b) in edges {
                for (p, q) in [(a, b), (b, a)] {
                    if p == v && !seen[q] {
                        seen[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn vertex_stab(&self, v: usize) -> BTreeSet<usize> {
        (0..self.group.order()).filter(|&g| self.action[g][v] == v).collect()
    }

    pub fn edge_stab(&self, e: (usize, usize)) -> BTreeSet<usize> {
        (0..self.group.order())
            .filter(|&g| self.action[g][e.0] == e.0 && self.action[g][e.1] == e.1)
            .collect()
    }

    pub fn vertex_orbit(&self, v: usize) -> BTreeSet<usize> {
        (0..self.group.order()).map(|g| self.action[g][v]).collect()
    }

    pub fn edge_orbit(&self, e: (usize, usize)) -> BTreeSet<(usize, usize)> {
        (0..self.group.order())
            .map(|g| norm_edge(self.action[g][e.0], self.action[g][e.1]))
            .collect()
    }
}

fn norm_edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Orbit graph with stabilizer labels: vertex and edge labels are canonical
/// (least) conjugates of the stabilizers, boundary monomorphisms the least
/// conjugation-induced injections. Vertex ids are the least vertex id per
/// orbit.
pub fn quotient_of_action(t: &FiniteGTree) -> Result<GraphOfGroups> {
    t.validate()?;
    let amb = &t.group;
    let mut vertex_rep: BTreeMap<usize, usize> = BTreeMap::new();
    for v in 0..t.n_vertices {
        let rep = *t.vertex_orbit(v).iter().next().unwrap();
        vertex_rep.insert(v, rep);
    }
    let vname = |rep: usize| VertexId(format!("v{}", rep));
    let mut g = GraphOfGroups::new(vname(vertex_rep[&0]));
    g.ambient = Some(GroupHandle::finite(amb.clone()));
    let reps: BTreeSet<usize> = vertex_rep.values().copied().collect();
    let mut labels: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &rep in &reps {
        let label = amb.min_conjugate_set(&t.vertex_stab(rep));
        labels.insert(rep, label.clone());
        g.vertices.insert(vname(rep), ambient_vertex(amb, &label)?);
    }
    g.base = vname(*reps.iter().next().unwrap());
    let mut seen_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, b) in &t.edges {
        let orbit = t.edge_orbit((a, b));
        let rep = *orbit.iter().next().unwrap();
        if !seen_edges.insert(rep) {
            continue;
        }
        let (ra, rb) = rep;
        let va = vertex_rep[&ra];
        let vb = vertex_rep[&rb];
        let ends = if va <= vb { [vname(va), vname(vb)] } else { [vname(vb), vname(va)] };
        let w0 = labels[&if va <= vb { va } else { vb }].clone();
        let w1 = labels[&if va <= vb { vb } else { va }].clone();
        let edge = ambient_edge(amb, ends, &t.edge_stab(rep), [&w0, &w1])?;
        g.edges.insert(EdgeId(format!("e{}_{}", rep.0, rep.1)), edge);
    }
    Ok(g)
}

/// Tree-level Stallings fold: equivariantly identifies the edges e and f
/// (sharing the vertex v) and their far endpoints, for all translates. The
/// returned move carries the site stabilizers for the quotient-level
/// calculus. Errors when the site is not A-type, when the identification
/// cascades beyond the designed classes, or when the result is not a tree.
pub fn tree_fold(
    t: &FiniteGTree,
    e: (usize, usize),
    f: (usize, usize),
) -> Result<(FiniteGTree, FoldMove)> {
    let e = norm_edge(e.0, e.1);
    let f = norm_edge(f.0, f.1);
    if e == f {
        return Err(Error::Precondition {
            reason: "fold needs two distinct edges".into(),
            witness: format!("{:?}", e),
        });
    }
    let shared: Vec<usize> = [e.0, e.1]
        .into_iter()
        .filter(|&u| u == f.0 || u == f.1)
        .collect();
    if shared.len() != 1 {
        return Err(Error::Precondition {
            reason: "edges must share exactly one vertex".into(),
            witness: format!("{:?}, {:?}", e, f),
        });
    }
    let v = shared[0];
    let x = if e.0 == v { e.1 } else { e.0 };
    let y = if f.0 == v { f.1 } else { f.0 };
    // A-type: far endpoints outside the orbit of v
    let v_orbit = t.vertex_orbit(v);
    if v_orbit.contains(&x) || v_orbit.contains(&y) {
        return Err(Error::Precondition {
            reason: "far endpoint lies in the orbit of the shared vertex (not A-type)".into(),
            witness: format!("v={}, x={}, y={}", v, x, y),
        });
    }
    // classification
    let n = t.group.order();
    let maps_edge = (0..n).find(|&g| {
        norm_edge(t.action[g][e.0], t.action[g][e.1]) == f && t.action[g][x] == y
    });
    let maps_far = (0..n).find(|&g| t.action[g][x] == y);
    let kind = match (maps_edge, maps_far) {
        (Some(_), _) => FoldKind::IIA,
        (None, Some(_)) => FoldKind::IIIA,
        (None, None) => FoldKind::IA,
    };
    if kind == FoldKind::IIIA {
        // a finite group cannot translate along an axis; the equivariant
        // identification would collapse a cycle and break the tree
        return Err(Error::Precondition {
            reason: "IIIA site over a finite group is not foldable".into(),
            witness: format!("x={} and y={} share an orbit but no g folds the edges", x, y),
        });
    }
    // equivariant closure: union-find over vertices and over edges
    let mut vuf: Vec<usize> = (0..t.n_vertices).collect();
    fn find(uf: &mut Vec<usize>, mut a: usize) -> usize {
        while uf[a] != a {
            uf[a] = uf[uf[a]];
            a = uf[a];
        }
        a
    }
    for g in 0..n {
        let (gx, gy) = (t.action[g][x], t.action[g][y]);
        let (ra, rb) = (find(&mut vuf, gx), find(&mut vuf, gy));
        if ra != rb {
            let (keep, drop) = (ra.min(rb), ra.max(rb));
            vuf[drop] = keep;
        }
    }
    // expected class structure: the class of x is the <X,Y>-orbit of {x, y};
    // anything bigger means the fold cascades
    let xy_gen = {
        let mut seed = t.vertex_stab(x);
        seed.extend(t.vertex_stab(y).iter().copied());
        t.group.closure(&seed)
    };
    let expected_class: BTreeSet<usize> = xy_gen
        .iter()
        .flat_map(|&g| [t.action[g][x], t.action[g][y]])
        .collect();
    let actual_class: BTreeSet<usize> =
        (0..t.n_vertices).filter(|&u| find(&mut vuf, u) == find(&mut vuf, x)).collect();
    if actual_class != expected_class {
        return Err(Error::Precondition {
            reason: "equivariant identification cascades beyond the fold site".into(),
            witness: format!("class of x grew to {:?}", actual_class),
        });
    }
    // build the folded graph: vertices = classes (named by least member),
    // edges = images of old edges
    let mut new_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, b) in &t.edges {
        let (ra, rb) = (find(&mut vuf, a), find(&mut vuf, b));
        if ra == rb {
            return Err(Error::Precondition {
                reason: "fold collapses an edge to a vertex".into(),
                witness: format!("({},{})", a, b),
            });
        }
        new_edges.insert(norm_edge(ra, rb));
    }
    // compact vertex ids, keeping the least-member names order
    let classes: BTreeSet<usize> =
        (0..t.n_vertices).map(|u| find(&mut vuf, u)).collect();
    let rename: BTreeMap<usize, usize> =
        classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let n_new = classes.len();
    let edges_new: Vec<(usize, usize)> = new_edges
        .iter()
        .map(|&(a, b)| norm_edge(rename[&a], rename[&b]))
        .collect();
    if edges_new.len() + 1 != n_new {
        return Err(Error::Precondition {
            reason: "folded graph is not a tree".into(),
            witness: format!("{} vertices, {} edges", n_new, edges_new.len()),
        });
    }
    let mut action_new = vec![vec![0usize; n_new]; n];
    for g in 0..n {
        for u in 0..t.n_vertices {
            let src = rename[&find(&mut vuf, u)];
            let dst = rename[&find(&mut vuf, t.action[g][u])];
            action_new[g][src] = dst;
        }
    }
    let folded = FiniteGTree::new(t.group.clone(), n_new, edges_new, action_new)?;

    // quotient-level move: ids as produced by quotient_of_action on t
    let edge_qid = |edge: (usize, usize)| -> EdgeId {
        let rep = *t.edge_orbit(edge).iter().next().unwrap();
        EdgeId(format!("e{}_{}", rep.0, rep.1))
    };
    let vertex_qid = |u: usize| -> VertexId {
        let rep = *t.vertex_orbit(u).iter().next().unwrap();
        VertexId(format!("v{}", rep))
    };
    let g_elem = maps_edge;
    let site = FoldSite {
        v_stab: t.vertex_stab(v),
        e_stab: t.edge_stab(e),
        f_stab: t.edge_stab(f),
        x_stab: t.vertex_stab(x),
        y_stab: t.vertex_stab(y),
    };
    let mv = FoldMove {
        kind,
        v: vertex_qid(v),
        e: edge_qid(e),
        f: if kind == FoldKind::IIA { edge_qid(e) } else { edge_qid(f) },
        g_elem,
        g_name: g_elem.map(|g| t.group.element_names[g].clone()),
        site: Some(site),
    };
    // IIA folds identify edges in one orbit; the move is valid only if the
    // quotient sees a single edge
    if kind == FoldKind::IIA && edge_qid(e) != edge_qid(f) {
        return Err(Error::Precondition {
            reason: "IIA classification with edges in different orbits".into(),
            witness: format!("{:?} vs {:?}", e, f),
        });
    }
    Ok((folded, mv))
}

/// Verifies the orbit-connectivity lemma: the orbit of the minimal subtree
/// spanning the given vertices under the subgroup generated by their
/// stabilizers is connected. Returns a disconnection witness if it ever
/// fails (it must not).
pub fn verify_orbit_lemma(t: &FiniteGTree, subset: &[usize]) -> Result<(bool, Option<String>)> {
    if subset.is_empty() {
        return Err(Error::Precondition {
            reason: "orbit lemma needs a non-empty vertex subset".into(),
            witness: "[]".into(),
        });
    }
    // minimal spanning subtree: union of pairwise paths
    let mut sub_vertices: BTreeSet<usize> = subset.iter().copied().collect();
    let mut sub_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &a in subset {
        for &b in subset {
            if a < b {
                let path = tree_path(t, a, b);
                for w in path.windows(2) {
                    sub_vertices.insert(w[0]);
                    sub_vertices.insert(w[1]);
                    sub_edges.insert(norm_edge(w[0], w[1]));
                }
            }
        }
    }
    // subgroup generated by the stabilizers
    let mut seed = BTreeSet::new();
    for &v in subset {
        seed.extend(t.vertex_stab(v).iter().copied());
    }
    let subgroup = t.group.closure(&seed);
    // orbit of the subtree
    let mut orbit_vertices: BTreeSet<usize> = BTreeSet::new();
    let mut orbit_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &g in &subgroup {
        for &v in &sub_vertices {
            orbit_vertices.insert(t.action[g][v]);
        }
        for &(a, b) in &sub_edges {
            orbit_edges.insert(norm_edge(t.action[g][a], t.action[g][b]));
        }
    }
    // connectivity of the orbit subgraph
    let start = *orbit_vertices.iter().next().unwrap();
    let mut seen: BTreeSet<usize> = [start].into();
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &(a, b) in &orbit_edges {
            for (p, q) in [(a, b), (b, a)] {
                if p == u && orbit_vertices.contains(&q) && !seen.contains(&q) {
                    seen.insert(q);
                    queue.push_back(q);
                }
            }
        }
    }
    if seen == orbit_vertices {
        Ok((true, None))
    } else {
        let missing: Vec<usize> = orbit_vertices.difference(&seen).copied().collect();
        Ok((false, Some(format!("orbit components split off vertices {:?}", missing))))
    }
}

fn tree_path(t: &FiniteGTree, a: usize, b: usize) -> Vec<usize> {
    // BFS in the tree
    let mut parent: Vec<Option<usize>> = vec![None; t.n_vertices];
    let mut seen = vec![false; t.n_vertices];
    seen[a] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(u) = queue.pop_front() {
        if u == b {
            break;
        }
        for &(p, q) in &t.edges {
            for (s, d) in [(p, q), (q, p)] {
                if s == u && !seen[d] {
                    seen[d] = true;
                    parent[d] = Some(u);
                    queue.push_back(d);
                }
            }
        }
    }
    let mut path = vec![b];
    let mut cur = b;
    while let Some(p) = parent[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}

/// All unlabeled trees on n vertices, as edge lists on vertices 0..n, up to
/// isomorphism (canonical-form deduplication over all labeled trees from
/// Prüfer sequences).
pub fn tree_shapes(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 1 {
        return vec![vec![]];
    }
    if n == 2 {
        return vec![vec![(0, 1)]];
    }
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::new();
    let mut prufer = vec![0usize; n - 2];
    loop {
        let edges = prufer_to_tree(&prufer, n);
        let key = tree_canonical_key(n, &edges);
        if seen.insert(key) {
            out.push(edges);
        }
        // next sequence
        let mut i = 0;
        loop {
            if i == prufer.len() {
                return out;
            }
            prufer[i] += 1;
            if prufer[i] < n {
                break;
            }
            prufer[i] = 0;
            i += 1;
        }
    }
}

fn prufer_to_tree(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut seq = seq.to_vec();
    for i in 0..seq.len() {
        let leaf = (0..n).find(|&v| degree[v] == 1 && !seq[i..].contains(&v)).unwrap();
        edges.push(norm_edge(leaf, seq[i]));
        degree[leaf] -= 1;
        degree[seq[i]] -= 1;
        let _ = &mut seq;
    }
    let remaining: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push(norm_edge(remaining[0], remaining[1]));
    edges
}

/// Canonical key via the classic center-rooted canonical string.
fn tree_canonical_key(n: usize, edges: &[(usize, usize)]) -> String {
    fn subtree_key(root: usize, parent: Option<usize>, adj: &Vec<Vec<usize>>) -> String {
        let mut children: Vec<String> = adj[root]
            .iter()
            .filter(|&&c| Some(c) != parent)
            .map(|&c| subtree_key(c, Some(root), adj))
            .collect();
        children.sort();
        format!("({})", children.join(""))
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    // find centers by leaf-stripping
    let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut removed = vec![false; n];
    let mut remaining = n;
    while remaining > 2 {
        let leaves: Vec<usize> =
            (0..n).filter(|&v| !removed[v] && degree[v] <= 1).collect();
        for v in leaves {
            removed[v] = true;
            remaining -= 1;
            for &u in &adj[v] {
                if !removed[u] {
                    degree[u] -= 1;
                }
            }
        }
    }
    let centers: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    let mut keys: Vec<String> =
        centers.iter().map(|&c| subtree_key(c, None, &adj)).collect();
    keys.sort();
    keys.join("|")
}

/// Graph automorphisms of a tree, as vertex permutations.
pub fn tree_automorphisms(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let edge_set: BTreeSet<(usize, usize)> = edges.iter().map(|&(a, b)| norm_edge(a, b)).collect();
    let mut perms = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    backtrack_autos(n, &edge_set, &mut perm, 0, &mut perms);
    perms
}

fn backtrack_autos(
    n: usize,
    edges: &BTreeSet<(usize, usize)>,
    perm: &mut Vec<usize>,
    k: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if k == n {
        out.push(perm.clone());
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        // partial check: edges among 0..=k must map to edges
        let ok = (0..k).all(|j| {
            let is_edge = edges.contains(&norm_edge(j, k));
            let maps_to = edges.contains(&norm_edge(perm[j], perm[k]));
            is_edge == maps_to
        });
        if ok {
            backtrack_autos(n, edges, perm, k + 1, out);
        }
        perm.swap(k, i);
    }
}

/// All actions of the group on the tree without inversions, enumerated as
/// homomorphisms into the automorphism group and deduplicated up to
/// conjugation by tree automorphisms.
pub fn enumerate_actions(group: &FiniteGroup, n: usize, edges: &[(usize, usize)]) -> Vec<FiniteGTree> {
    let autos = tree_automorphisms(n, edges);
    // candidate images per generator, filtered by order once up front
    let candidates: Vec<Vec<usize>> = group
        .generators
        .iter()
        .map(|&g| {
            let gen_order = group.element_order(g);
            (0..autos.len()).filter(|&i| gen_order % perm_order(&autos[i]) == 0).collect()
        })
        .collect();
    let element_words = group.element_words();
    let k = group.generators.len();
    let mut results: Vec<FiniteGTree> = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut images = vec![0usize; k];
    let ctx = EnumCtx { group, autos: &autos, candidates: &candidates, element_words: &element_words, n, edges };
    enumerate_rec(&ctx, &mut images, 0, &mut seen, &mut results);
    results
}

struct EnumCtx<'a> {
    group: &'a FiniteGroup,
    autos: &'a [Vec<usize>],
    candidates: &'a [Vec<usize>],
    element_words: &'a [crate::words::Word],
    n: usize,
    edges: &'a [(usize, usize)],
}

fn perm_compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // (a ∘ b)(v) = a[b[v]]
    b.iter().map(|&v| a[v]).collect()
}

fn perm_inverse(a: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; a.len()];
    for (i, &v) in a.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

fn enumerate_rec(
    ctx: &EnumCtx,
    images: &mut Vec<usize>,
    pos: usize,
    seen: &mut BTreeSet<Vec<usize>>,
    out: &mut Vec<FiniteGTree>,
) {
    let k = ctx.group.generators.len();
    if pos == k {
        let eval = |word: &crate::words::Word| -> Vec<usize> {
            let mut acc: Vec<usize> = (0..ctx.n).collect();
            for l in &word.0 {
                let img = &ctx.autos[images[l.gen]];
                let img = if l.inv { perm_inverse(img) } else { img.clone() };
                acc = perm_compose(&img, &acc);
            }
            acc
        };
        let identity: Vec<usize> = (0..ctx.n).collect();
        for r in &ctx.group.relators {
            if eval(r) != identity {
                return;
            }
        }
        // build the full action from generator words
        let mut action: Vec<Vec<usize>> = Vec::with_capacity(ctx.group.order());
        for w in ctx.element_words {
            action.push(eval(w));
        }
        // dedupe up to tree automorphism conjugacy: a known action is
        // rejected by one lookup; a new one inserts its whole class
        let flat: Vec<usize> = action.iter().flatten().copied().collect();
        if seen.contains(&flat) {
            return;
        }
        for am in ctx.autos {
            let ai = perm_inverse(am);
            let mut conj_flat = Vec::with_capacity(flat.len());
            for p in &action {
                conj_flat.extend(perm_compose(am, &perm_compose(p, &ai)));
            }
            seen.insert(conj_flat);
        }
        // inversion filter
        if let Ok(t) = FiniteGTree::new(ctx.group.clone(), ctx.n, ctx.edges.to_vec(), action) {
            out.push(t);
        }
        return;
    }
    for &i in &ctx.candidates[pos] {
        images[pos] = i;
        enumerate_rec(ctx, images, pos + 1, seen, out);
    }
}

fn perm_order(p: &[usize]) -> usize {
    let n = p.len();
    let mut seen = vec![false; n];
    let mut order = 1usize;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0usize;
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            cur = p[cur];
            len += 1;
        }
        order = lcm(order, len);
    }
    order
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One sweep case result line.
#[derive(Debug, Clone)]
pub struct SweepCase {
    pub group: String,
    pub tree_vertices: usize,
    pub tree_key: String,
    pub action_hash: u64,
    pub folds_checked: usize,
    pub fold_mismatches: usize,
    pub orbit_checks: usize,
    pub orbit_failures: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub cases: Vec<SweepCase>,
    pub total_actions: usize,
    pub total_folds: usize,
    pub fold_mismatches: usize,
    pub orbit_checks: usize,
    pub orbit_failures: usize,
}

impl SweepReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            out.push_str(&format!(
                "{}\t{}v\t{}\t{:016x}\tfolds={}/{}\torbits={}/{}\n",
                c.group,
                c.tree_vertices,
                c.tree_key,
                c.action_hash,
                c.folds_checked - c.fold_mismatches,
                c.folds_checked,
                c.orbit_checks - c.orbit_failures,
                c.orbit_checks
            ));
        }
        out.push_str(&format!(
            "total\tactions={}\tfolds={}\tfold_mismatches={}\torbit_checks={}\torbit_failures={}\n",
            self.total_actions,
            self.total_folds,
            self.fold_mismatches,
            self.orbit_checks,
            self.orbit_failures
        ));
        out
    }
}

/// The exhaustive sweep: for every catalog finite group up to `max_order`,
/// every tree with up to `max_vertices` vertices (up to isomorphism), and
/// every inversion-free action (up to tree automorphism), check that the
/// quotient-level fold calculus matches tree-level folds exactly and that
/// the orbit lemma holds on all vertex subsets of size at most 3.
///
/// Cases are independent and run in parallel; the report is sorted into a
/// stable order before returning.
pub fn sweep(groups: &[&FiniteGroup], max_vertices: usize) -> Result<SweepReport> {
    use rayon::prelude::*;
    let mut combos: Vec<(usize, Vec<(usize, usize)>, FiniteGroup)> = Vec::new();
    for n in 1..=max_vertices {
        for shape in tree_shapes(n) {
            for group in groups {
                combos.push((n, shape.clone(), (*group).clone()));
            }
        }
    }
    let partials: Vec<Result<Vec<SweepCase>>> = combos
        .par_iter()
        .map(|(n, shape, group)| {
            let tree_key = tree_canonical_key(*n, shape);
            let mut cases = Vec::new();
            for t in enumerate_actions(group, *n, shape) {
                cases.push(check_one_action(group, *n, &tree_key, &t)?);
            }
            Ok(cases)
        })
        .collect();
    let mut report = SweepReport::default();
    for partial in partials {
        for case in partial? {
            report.total_actions += 1;
            report.total_folds += case.folds_checked;
            report.fold_mismatches += case.fold_mismatches;
            report.orbit_checks += case.orbit_checks;
            report.orbit_failures += case.orbit_failures;
            report.cases.push(case);
        }
    }
    // stable ordering for diff-based regression
    report.cases.sort_by(|a, b| {
        (a.tree_vertices, &a.tree_key, &a.group, a.action_hash).cmp(&(
            b.tree_vertices,
            &b.tree_key,
            &b.group,
            b.action_hash,
        ))
    });
    Ok(report)
}

fn check_one_action(
    group: &FiniteGroup,
    n: usize,
    tree_key: &str,
    t: &FiniteGTree,
) -> Result<SweepCase> {
    let mut case = SweepCase {
        group: group.name.clone(),
        tree_vertices: n,
        tree_key: tree_key.to_string(),
        action_hash: action_hash(t),
        folds_checked: 0,
        fold_mismatches: 0,
        orbit_checks: 0,
        orbit_failures: 0,
    };
    // fold comparisons over all foldable sites
    let q = quotient_of_action(t)?;
    for i in 0..t.edges.len() {
        for j in i + 1..t.edges.len() {
            let (e, f) = (t.edges[i], t.edges[j]);
            let Ok((folded, mv)) = tree_fold(t, e, f) else { continue };
            case.folds_checked += 1;
            let tree_side = quotient_of_action(&folded)?;
            let ok = match crate::folds::apply_fold(&q, &mv) {
                Ok(res) => crate::gog::canon::labeled_isomorphic(&res.graph, &tree_side),
                Err(_) => false,
            };
            if !ok {
                case.fold_mismatches += 1;
            }
        }
    }
    // orbit lemma over subsets of size <= 3
    for s in small_subsets(t.n_vertices, 3) {
        case.orbit_checks += 1;
        let (ok, _witness) = verify_orbit_lemma(t, &s)?;
        if !ok {
            case.orbit_failures += 1;
        }
    }
    Ok(case)
}

fn small_subsets(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..n {
        out.push(vec![a]);
        if max_size >= 2 {
            for b in a + 1..n {
                out.push(vec![a, b]);
                if max_size >= 3 {
                    for c in b + 1..n {
                        out.push(vec![a, b, c]);
                    }
                }
            }
        }
    }
    out
}

fn action_hash(t: &FiniteGTree) -> u64 {
    // FNV-1a over the action table
    let mut h: u64 = 0xcbf29ce484222325;
    for row in &t.action {
        for &v in row {
            h ^= v as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}
