//! Seeded generator of catalog-labeled graphs of groups, used to check that
//! the abelianization of the assembled presentation is invariant under the
//! elementary moves and folds.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::folds;
use crate::gog::moves::{self, SplittingSpec};
use crate::gog::{eid, vid, GraphOfGroups, VertexId};
use crate::groups::catalog::Catalog;
use crate::groups::{finite, GroupHandle, GroupKind};
use crate::sandbox;
use crate::words::Word;

#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    pub graphs: usize,
    pub checks: usize,
    pub mismatches: usize,
}

fn vertex_pool(cat: &Catalog) -> Vec<GroupHandle> {
    let mut pool = Vec::new();
    for id in
        ["C2", "C3", "C4", "C5", "C6", "C7", "C9", "C12", "S3", "D4", "Q8", "A4", "V4", "F1",
            "F2", "Z", "ZxC3", "Dinf", "C3*C5", "BS12"]
    {
        if let Ok(h) = cat.get(id) {
            pool.push(h.clone());
        }
    }
    pool
}

/// An element of infinite order in the handle, as a word, when the kind has
/// one.
fn infinite_order_word(h: &GroupHandle) -> Option<Word> {
    match &h.kind {
        GroupKind::Free(f) if f.rank() >= 1 => Some(Word::gen(0)),
        GroupKind::VirtuallyCyclic(vc) => {
            // the stable generator t (Z type) or the translation s*u
            let nf = vc.radical.generators.len();
            if vc.is_dihedral() {
                Some(Word::gen(nf).concat(&Word::gen(nf + 1)))
            } else {
                Some(Word::gen(nf))
            }
        }
        GroupKind::BaumslagSolitar12 => Some(Word::gen(0)),
        _ => None,
    }
}

/// A random element of order exactly k in a finite handle.
fn element_of_order(h: &GroupHandle, k: usize, rng: &mut ChaCha8Rng) -> Option<Word> {
    let GroupKind::Finite(f) = &h.kind else { return None };
    let words = f.element_words();
    let mut candidates: Vec<usize> =
        (0..f.order()).filter(|&e| f.element_order(e) == k).collect();
    if candidates.is_empty() {
        return None;
    }
    candidates.shuffle(rng);
    Some(words[candidates[0]].clone())
}

/// A random catalog-labeled graph of groups: a small tree with at most one
/// extra edge, boundary maps chosen to inject, and (sometimes) one
/// identity-side edge hanging off a finite vertex so the collapse move has
/// something to do.
pub fn random_graph(cat: &Catalog, rng: &mut ChaCha8Rng) -> Result<GraphOfGroups> {
    let pool = vertex_pool(cat);
    let n_v = rng.gen_range(2..=4usize);
    let mut g = GraphOfGroups::new(vid("v0"));
    let mut handles = Vec::new();
    for i in 0..n_v {
        let h = pool[rng.gen_range(0..pool.len())].clone();
        handles.push(h.clone());
        g.add_vertex(vid(&format!("v{}", i)), h);
    }
    let triv = GroupHandle::finite(finite::trivial());
    let mut edge_idx = 0usize;
    let mut add_edge = |g: &mut GraphOfGroups, a: usize, b: usize, rng: &mut ChaCha8Rng| {
        let ha = handles[a].clone();
        let hb = handles[b].clone();
        let id = eid(&format!("e{}", edge_idx));
        edge_idx += 1;
        let ends = [vid(&format!("v{}", a)), vid(&format!("v{}", b))];
        // try a nontrivial edge group half the time
        if rng.gen_bool(0.5) {
            // infinite cyclic edge between kinds with infinite-order elements
            if let (Some(wa), Some(wb)) = (infinite_order_word(&ha), infinite_order_word(&hb)) {
                if rng.gen_bool(0.7) {
                    let z = GroupHandle::free(&format!("Z{}", id), &["c"]);
                    let pa = rng.gen_range(1..=2i64);
                    let pb = rng.gen_range(1..=2i64);
                    g.add_edge(id, ends, z, [vec![wa.pow(pa)], vec![wb.pow(pb)]]);
                    return;
                }
            }
            // finite cyclic edge where both sides have an element of order k
            for k in [2usize, 3, 4, 5] {
                if let (Some(wa), Some(wb)) =
                    (element_of_order(&ha, k, rng), element_of_order(&hb, k, rng))
                {
                    let ck = GroupHandle::finite(finite::cyclic(k));
                    g.add_edge(id, ends, ck, [vec![wa], vec![wb]]);
                    return;
                }
            }
        }
        g.add_edge(id, ends, triv.clone(), [vec![], vec![]]);
    };
    // spanning tree
    for i in 1..n_v {
        let parent = rng.gen_range(0..i);
        add_edge(&mut g, parent, i, rng);
    }
    // at most one extra edge (loops excluded to keep inversion shapes away)
    if n_v >= 2 && rng.gen_bool(0.4) {
        let a = rng.gen_range(0..n_v);
        let mut b = rng.gen_range(0..n_v);
        if a == b {
            b = (b + 1) % n_v;
        }
        add_edge(&mut g, a, b, rng);
    }
    // sometimes hang a collapsible identity-side edge off a finite cyclic
    // vertex
    if rng.gen_bool(0.5) {
        if let Some((i, order)) = handles.iter().enumerate().find_map(|(i, h)| match &h.kind {
            GroupKind::Finite(f)
                if f.order() > 1 && f.generators.len() == 1 && f.order() <= 12 =>
            {
                Some((i, f.order()))
            }
            _ => None,
        }) {
            let ck = GroupHandle::finite(finite::cyclic(order));
            let dangling = g.fresh_vertex_id("d");
            g.add_vertex(dangling.clone(), ck.clone());
            let id = g.fresh_edge_id("dang");
            g.add_edge(
                id,
                [vid(&format!("v{}", i)), dangling],
                ck,
                [vec![Word::gen(0)], vec![Word::gen(0)]],
            );
        }
    }
    Ok(g)
}

/// Checks abelianization invariance of the elementary moves on one graph.
/// Returns (checks run, mismatches).
pub fn check_move_invariance(g: &GraphOfGroups) -> Result<(usize, usize)> {
    let before = g.abelianization()?;
    let mut checks = 0usize;
    let mut mismatches = 0usize;
    let mut compare = |out: &GraphOfGroups| -> Result<()> {
        checks += 1;
        if out.abelianization()? != before {
            mismatches += 1;
        }
        Ok(())
    };
    // subdivide every edge in turn
    for e in g.edges.keys() {
        compare(&moves::subdivide_edge(g, e)?)?;
    }
    // reduce to minimal
    compare(&moves::reduce_to_minimal(g)?)?;
    // collapse any edge whose precondition holds
    for e in g.edges.keys() {
        if let Ok(out) = moves::collapse_edge(g, e) {
            compare(&out)?;
        }
    }
    // refine any free-product vertex with only trivial incident edges
    for (v, vd) in &g.vertices {
        let GroupKind::FreeProduct { factors } = &vd.group.kind else { continue };
        if factors.len() != 2 {
            continue;
        }
        let all_trivial = g
            .incident(v)
            .iter()
            .all(|(e, _)| g.edges[e].group.is_trivial());
        if !all_trivial {
            continue;
        }
        let s = factor_splitting(v, &vd.group);
        if let Ok(out) = moves::refine_at_vertex(g, v, &s) {
            compare(&out)?;
        }
    }
    Ok((checks, mismatches))
}

fn factor_splitting(v: &VertexId, h: &GroupHandle) -> SplittingSpec {
    let GroupKind::FreeProduct { factors } = &h.kind else { unreachable!() };
    let triv = GroupHandle::finite(finite::trivial());
    let mut graph = GraphOfGroups::new(vid("A"));
    graph.add_vertex(vid("A"), factors[0].clone());
    graph.add_vertex(vid("B"), factors[1].clone());
    graph.add_edge(eid("c"), [vid("A"), vid("B")], triv, [vec![], vec![]]);
    let n0 = factors[0].n_gens();
    let n1 = factors[1].n_gens();
    let mut embeddings = std::collections::BTreeMap::new();
    embeddings.insert(vid("A"), (0..n0).map(Word::gen).collect());
    embeddings.insert(vid("B"), (n0..n0 + n1).map(Word::gen).collect());
    SplittingSpec { target: v.clone(), graph, embeddings, edge_embedding: vec![] }
}

/// Fold invariance sources: sandbox quotients of small actions plus the
/// formal trivial-label IA and IIIA cases. Returns (checks, mismatches).
pub fn check_fold_invariance(seed: u64, rounds: usize) -> Result<(usize, usize)> {
    let mut checks = 0usize;
    let mut mismatches = 0usize;
    // formal IIIA on the two-edge cycle
    {
        let triv = GroupHandle::finite(finite::trivial());
        let mut g = GraphOfGroups::new(vid("v"));
        g.add_vertex(vid("v"), triv.clone());
        g.add_vertex(vid("x"), triv.clone());
        g.add_edge(eid("e"), [vid("v"), vid("x")], triv.clone(), [vec![], vec![]]);
        g.add_edge(eid("f"), [vid("v"), vid("x")], triv, [vec![], vec![]]);
        let mv = folds::FoldMove {
            kind: folds::FoldKind::IIIA,
            v: vid("v"),
            e: eid("e"),
            f: eid("f"),
            g_elem: None,
            g_name: Some("g".into()),
            site: None,
        };
        let before = g.abelianization()?;
        let res = folds::apply_fold(&g, &mv)?;
        checks += 1;
        if res.graph.abelianization()? != before {
            mismatches += 1;
        }
    }
    // sandbox folds: enumerate actions of small groups on small trees and
    // fold every enumerable site on the quotient
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = [finite::cyclic(2), finite::cyclic(3), finite::sym3(), finite::klein4()];
    for _ in 0..rounds {
        let group = &pool[rng.gen_range(0..pool.len())];
        let n = rng.gen_range(3..=5usize);
        let shapes = sandbox::tree_shapes(n);
        let shape = &shapes[rng.gen_range(0..shapes.len())];
        for t in sandbox::enumerate_actions(group, n, shape) {
            let q = sandbox::quotient_of_action(&t)?;
            let before = q.abelianization()?;
            for mv in folds::enumerate_moves(&q)? {
                let Ok(res) = folds::apply_fold(&q, &mv) else { continue };
                checks += 1;
                if res.graph.abelianization()? != before {
                    mismatches += 1;
                }
            }
        }
    }
    Ok((checks, mismatches))
}

/// Runs the full corpus: `count` random graphs plus the fold-invariance
/// cases.
pub fn run_corpus(cat: &Catalog, seed: u64, count: usize) -> Result<CorpusReport> {
    let mut report = CorpusReport::default();
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let g = random_graph(cat, &mut rng)?;
        g.validate()?;
        report.graphs += 1;
        let (checks, mismatches) = check_move_invariance(&g)?;
        report.checks += checks;
        report.mismatches += mismatches;
    }
    let (fc, fm) = check_fold_invariance(seed, 4)?;
    report.checks += fc;
    report.mismatches += fm;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_small_run_clean() {
        let cat = Catalog::default_catalog();
        let report = run_corpus(&cat, 7, 40).unwrap();
        assert_eq!(report.graphs, 40);
        assert!(report.checks > 80);
        assert_eq!(report.mismatches, 0);
    }

    #[test]
    fn generated_graphs_validate() {
        let cat = Catalog::default_catalog();
        for seed in 0..30u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&cat, &mut rng).unwrap();
            g.validate().unwrap_or_else(|e| panic!("seed {}: {}", seed, e));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cat = Catalog::default_catalog();
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let g1 = random_graph(&cat, &mut r1).unwrap();
        let g2 = random_graph(&cat, &mut r2).unwrap();
        assert_eq!(g1, g2);
    }
}
