//! Versioned JSON interchange for graphs of groups. Words are stored as
//! readable strings over the owning group's generator names, so files can be
//! written by hand; the format round-trips losslessly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupHandle;
use crate::words::Word;

use super::{EdgeData, EdgeId, GraphOfGroups, VertexData, VertexId};

pub const GOG_SCHEMA: &str = "bsk-gog-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GogFile {
    pub schema: String,
    pub base: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambient: Option<GroupHandle>,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: String,
    pub group: GroupHandle,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambient_elements: Option<BTreeSet<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: String,
    pub ends: [String; 2],
    pub group: GroupHandle,
    /// images[k][i]: image of edge generator i in the vertex group at end k,
    /// as a word string over that vertex group's generator names.
    pub images: [Vec<String>; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambient_elements: Option<BTreeSet<usize>>,
}

pub fn to_json(g: &GraphOfGroups) -> String {
    let vertices: Vec<VertexJson> = g
        .vertices
        .iter()
        .map(|(id, vd)| VertexJson {
            id: id.0.clone(),
            group: vd.group.clone(),
            ambient_elements: vd.ambient_elements.clone(),
        })
        .collect();
    let edges: Vec<EdgeJson> = g
        .edges
        .iter()
        .map(|(id, ed)| {
            let render = |k: usize| -> Vec<String> {
                let names = g.vertices[&ed.ends[k]].group.gen_names();
                ed.images[k].iter().map(|w| w.render(&names)).collect()
            };
            EdgeJson {
                id: id.0.clone(),
                ends: [ed.ends[0].0.clone(), ed.ends[1].0.clone()],
                group: ed.group.clone(),
                images: [render(0), render(1)],
                ambient_elements: ed.ambient_elements.clone(),
            }
        })
        .collect();
    let file = GogFile {
        schema: GOG_SCHEMA.to_string(),
        base: g.base.0.clone(),
        ambient: g.ambient.clone(),
        vertices,
        edges,
    };
    serde_json::to_string_pretty(&file).expect("graph serializes")
}

pub fn from_json(text: &str) -> Result<GraphOfGroups> {
    let file: GogFile = serde_json::from_str(text)
        .map_err(|e| Error::Other(format!("graph parse error: {}", e)))?;
    if file.schema != GOG_SCHEMA {
        return Err(Error::Other(format!(
            "unsupported graph schema `{}` (expected {})",
            file.schema, GOG_SCHEMA
        )));
    }
    let mut g = GraphOfGroups::new(VertexId(file.base));
    g.ambient = file.ambient;
    for v in file.vertices {
        g.vertices.insert(
            VertexId(v.id),
            VertexData { group: v.group, ambient_elements: v.ambient_elements },
        );
    }
    for e in file.edges {
        let ends = [VertexId(e.ends[0].clone()), VertexId(e.ends[1].clone())];
        let mut images: [Vec<Word>; 2] = [Vec::new(), Vec::new()];
        for k in 0..2 {
            let vd = g.vertices.get(&ends[k]).ok_or_else(|| Error::Validation {
                id: e.id.clone(),
                reason: format!("end {} references unknown vertex {}", k, ends[k]),
            })?;
            let names = vd.group.gen_names();
            for s in &e.images[k] {
                images[k].push(Word::parse(s, &names)?);
            }
        }
        g.edges.insert(
            EdgeId(e.id),
            EdgeData { ends, group: e.group, images, ambient_elements: e.ambient_elements },
        );
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gog::{eid, vid};
    use crate::groups::{finite, GroupHandle};

    #[test]
    fn round_trip() {
        let c4 = GroupHandle::finite(finite::cyclic(4));
        let c2 = GroupHandle::finite(finite::cyclic(2));
        let mut g = GraphOfGroups::new(vid("v0"));
        g.add_vertex(vid("v0"), c4.clone());
        g.add_vertex(vid("v1"), c4);
        let im = vec![Word::parse("a^2", &["a".into()]).unwrap()];
        g.add_edge(eid("e0"), [vid("v0"), vid("v1")], c2, [im.clone(), im]);
        let json = to_json(&g);
        let back = from_json(&json).unwrap();
        assert_eq!(g, back);
        // deterministic output
        assert_eq!(json, to_json(&back));
    }

    #[test]
    fn schema_checked() {
        assert!(from_json(r#"{"schema":"x","base":"v","vertices":[],"edges":[]}"#).is_err());
    }
}
