//! Canonical forms for labeled graphs of groups: exact equality up to a
//! relabeling of vertex and edge ids that preserves group labels and
//! boundary data.

use std::collections::BTreeMap;

use crate::groups::GroupHandle;

use super::{EdgeData, GraphOfGroups, VertexId};

fn handle_key(h: &GroupHandle) -> String {
    // structural serialization; the id participates so that distinctly named
    // isomorphic handles stay distinct labels
    serde_json::to_string(h).expect("handle serializes")
}

fn vertex_label(g: &GraphOfGroups, v: &VertexId) -> String {
    let vd = &g.vertices[v];
    match &vd.ambient_elements {
        Some(set) => format!("amb{:?}", set),
        None => handle_key(&vd.group),
    }
}

fn edge_label(e: &EdgeData) -> String {
    match &e.ambient_elements {
        Some(set) => format!("amb{:?}", set),
        None => handle_key(&e.group),
    }
}

struct Prepared<'a> {
    g: &'a GraphOfGroups,
    labels: BTreeMap<&'a VertexId, String>,
}

/// Encodes the graph under a given vertex ordering; edges are sorted
/// canonically with their boundary images rendered against the ordering.
/// The base vertex is presentation bookkeeping, not structure, and does not
/// participate.
fn encode(p: &Prepared, order: &[&VertexId]) -> String {
    let pos: BTreeMap<&VertexId, usize> = order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut vparts: Vec<&str> = Vec::new();
    for v in order {
        vparts.push(&p.labels[v]);
    }
    let mut eparts: Vec<String> = Vec::new();
    for ed in p.g.edges.values() {
        let (a, b) = (pos[&ed.ends[0]], pos[&ed.ends[1]]);
        let img0: Vec<String> = ed.images[0].iter().map(|w| format!("{:?}", w.0)).collect();
        let img1: Vec<String> = ed.images[1].iter().map(|w| format!("{:?}", w.0)).collect();
        let enc = if a <= b {
            format!("{}-{}|{}|{:?}|{:?}", a, b, edge_label(ed), img0, img1)
        } else {
            format!("{}-{}|{}|{:?}|{:?}", b, a, edge_label(ed), img1, img0)
        };
        eparts.push(enc);
    }
    eparts.sort();
    format!("V[{}]E[{}]", vparts.join(";"), eparts.join(";"))
}

/// Canonical key: a canonical rooted-tree encoding when the underlying graph
/// is a tree (the common case for sandbox quotients), and otherwise the
/// minimum encoding over all vertex orderings compatible with the label
/// classes (exponential in class sizes, fine for the small non-tree graphs
/// the fold search manipulates).
pub fn canonical_key(g: &GraphOfGroups) -> String {
    if !g.vertices.is_empty() && g.edges.len() + 1 == g.vertices.len() && g.is_connected() {
        return tree_key(g);
    }
    let labels: BTreeMap<&VertexId, String> =
        g.vertices.keys().map(|v| (v, vertex_label(g, v))).collect();
    let p = Prepared { g, labels };
    let mut verts: Vec<&VertexId> = g.vertices.keys().collect();
    verts.sort_by_key(|v| (p.labels[*v].clone(), v.0.clone()));
    let mut best: Option<String> = None;
    permute_classes(&p, &mut verts, 0, &mut best);
    best.unwrap_or_else(|| encode(&p, &[]))
}

/// Canonical encoding of a labeled tree: root at the centroid-by-leaf-strip
/// centers and take the least of the (at most two) rooted encodings. Children
/// encodings are sorted, so label-equal siblings never force a search.
fn tree_key(g: &GraphOfGroups) -> String {
    let verts: Vec<&VertexId> = g.vertices.keys().collect();
    let n = verts.len();
    if n == 1 {
        return format!("T({})", vertex_label(g, verts[0]));
    }
    // leaf stripping to find the centers
    let mut degree: BTreeMap<&VertexId, usize> = verts.iter().map(|v| (*v, 0)).collect();
    for ed in g.edges.values() {
        *degree.get_mut(&ed.ends[0]).unwrap() += 1;
        *degree.get_mut(&ed.ends[1]).unwrap() += 1;
    }
    let mut removed: BTreeMap<&VertexId, bool> = verts.iter().map(|v| (*v, false)).collect();
    let mut remaining = n;
    while remaining > 2 {
        let leaves: Vec<&VertexId> = verts
            .iter()
            .copied()
            .filter(|v| !removed[v] && degree[v] <= 1)
            .collect();
        for v in leaves {
            *removed.get_mut(v).unwrap() = true;
            remaining -= 1;
            for ed in g.edges.values() {
                for k in 0..2 {
                    if &ed.ends[k] == v && !removed[&ed.ends[1 - k]] {
                        *degree.get_mut(&ed.ends[1 - k]).unwrap() -= 1;
                    }
                }
            }
        }
    }
    let centers: Vec<&VertexId> = verts.iter().copied().filter(|v| !removed[v]).collect();
    let mut keys: Vec<String> = centers.iter().map(|c| rooted_key(g, c, None)).collect();
    keys.sort();
    format!("T[{}]", keys.join("|"))
}

fn rooted_key(g: &GraphOfGroups, root: &VertexId, parent_edge: Option<&super::EdgeId>) -> String {
    let mut children: Vec<String> = Vec::new();
    for (id, ed) in &g.edges {
        if parent_edge == Some(id) {
            continue;
        }
        for k in 0..2 {
            if &ed.ends[k] == root {
                let child = &ed.ends[1 - k];
                let img_root: Vec<String> =
                    ed.images[k].iter().map(|w| format!("{:?}", w.0)).collect();
                let img_child: Vec<String> =
                    ed.images[1 - k].iter().map(|w| format!("{:?}", w.0)).collect();
                children.push(format!(
                    "({}|{:?}|{:?}=>{})",
                    edge_label(ed),
                    img_root,
                    img_child,
                    rooted_key(g, child, Some(id))
                ));
            }
        }
    }
    children.sort();
    format!("{}<{}>", vertex_label(g, root), children.join(""))
}

fn permute_classes<'a>(
    p: &Prepared<'a>,
    verts: &mut Vec<&'a VertexId>,
    k: usize,
    best: &mut Option<String>,
) {
    if k == verts.len() {
        let enc = encode(p, verts);
        if best.as_ref().map_or(true, |b| enc < *b) {
            *best = Some(enc);
        }
        return;
    }
    let label_k = p.labels[verts[k]].clone();
    for i in k..verts.len() {
        if p.labels[verts[i]] == label_k {
            verts.swap(k, i);
            permute_classes(p, verts, k + 1, best);
            verts.swap(k, i);
        }
    }
}

/// Exact labeled-graph equality: same canonical key.
pub fn labeled_isomorphic(a: &GraphOfGroups, b: &GraphOfGroups) -> bool {
    if a.vertices.len() != b.vertices.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    canonical_key(a) == canonical_key(b)
}
