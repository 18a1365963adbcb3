//! The default group catalog and its JSON interchange format.
//!
//! The catalog ships cyclic groups up to order 12, S3, D4, Q8, A4 and the
//! Klein four-group, free groups of rank 1 and 2, a family of virtually
//! cyclic groups, free products of finite groups, and BS(1,2). The file
//! format is a versioned JSON document that round-trips losslessly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{finite, vc, GroupHandle, GroupKind};

pub const CATALOG_SCHEMA: &str = "bsk-catalog-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogFile {
    pub schema: String,
    pub groups: Vec<GroupHandle>,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    groups: BTreeMap<String, GroupHandle>,
}

impl Catalog {
    pub fn new(groups: Vec<GroupHandle>) -> Self {
        Catalog { groups: groups.into_iter().map(|g| (g.id.clone(), g)).collect() }
    }

    pub fn get(&self, id: &str) -> Result<&GroupHandle> {
        self.groups.get(id).ok_or_else(|| Error::UnknownGroup(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.groups.keys().cloned().collect()
    }

    pub fn handles(&self) -> impl Iterator<Item = &GroupHandle> {
        self.groups.values()
    }

    /// Finite handles of order at most `max_order`.
    pub fn finite_handles(&self, max_order: usize) -> Vec<&GroupHandle> {
        self.groups
            .values()
            .filter(|h| matches!(&h.kind, GroupKind::Finite(g) if g.order() <= max_order))
            .collect()
    }

    /// Virtually cyclic handles.
    pub fn vc_handles(&self) -> Vec<&GroupHandle> {
        self.groups
            .values()
            .filter(|h| matches!(&h.kind, GroupKind::VirtuallyCyclic(_)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            schema: CATALOG_SCHEMA.to_string(),
            groups: self.groups.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("catalog serializes")
    }

    pub fn from_json(text: &str) -> Result<Catalog> {
        let file: CatalogFile = serde_json::from_str(text)
            .map_err(|e| Error::Other(format!("catalog parse error: {}", e)))?;
        if file.schema != CATALOG_SCHEMA {
            return Err(Error::Other(format!(
                "unsupported catalog schema `{}` (expected {})",
                file.schema, CATALOG_SCHEMA
            )));
        }
        Ok(Catalog::new(file.groups))
    }

    pub fn default_catalog() -> Catalog {
        let mut groups: Vec<GroupHandle> = Vec::new();
        // finite kinds
        for n in 1..=12 {
            groups.push(GroupHandle::finite(finite::cyclic(n)));
        }
        groups.push(GroupHandle::finite(finite::sym3()));
        groups.push(GroupHandle::finite(finite::dihedral(4)));
        groups.push(GroupHandle::finite(finite::quaternion8()));
        groups.push(GroupHandle::finite(finite::alt4()));
        groups.push(GroupHandle::finite(finite::klein4()));
        groups.push(GroupHandle::finite(finite::direct_product(
            &finite::cyclic(2),
            &finite::cyclic(3),
            "C2xC3",
        )));
        // free kinds
        groups.push(GroupHandle::free("F1", &["a"]));
        groups.push(GroupHandle::free("F2", &["a", "b"]));
        groups.push(GroupHandle::free("F3", &["a", "b", "c"]));
        // virtually cyclic kinds
        let trivial_alpha = |g: &finite::FiniteGroup| (0..g.order()).collect::<Vec<_>>();
        let t = finite::trivial();
        groups.push(GroupHandle::vc(
            vc::VcGroup::new("Z", t.clone(), vc::VcExt::Z { alpha: trivial_alpha(&t) }).unwrap(),
        ));
        groups.push(GroupHandle::vc(
            vc::VcGroup::new(
                "Dinf",
                t.clone(),
                vc::VcExt::Dihedral { sigma_s: trivial_alpha(&t), sigma_u: trivial_alpha(&t) },
            )
            .unwrap(),
        ));
        let c2 = finite::cyclic(2);
        groups.push(GroupHandle::vc(
            vc::VcGroup::new("ZxC2", c2.clone(), vc::VcExt::Z { alpha: trivial_alpha(&c2) })
                .unwrap(),
        ));
        let c3 = finite::cyclic(3);
        groups.push(GroupHandle::vc(
            vc::VcGroup::new("ZxC3", c3.clone(), vc::VcExt::Z { alpha: trivial_alpha(&c3) })
                .unwrap(),
        ));
        // t inverts C3
        groups.push(GroupHandle::vc(
            vc::VcGroup::new("Z~C3", c3.clone(), vc::VcExt::Z { alpha: vec![0, 2, 1] }).unwrap(),
        ));
        let c5 = finite::cyclic(5);
        groups.push(GroupHandle::vc(
            vc::VcGroup::new("ZxC5", c5.clone(), vc::VcExt::Z { alpha: trivial_alpha(&c5) })
                .unwrap(),
        ));
        groups.push(GroupHandle::vc(
            vc::VcGroup::new(
                "DinfxC3",
                c3.clone(),
                vc::VcExt::Dihedral { sigma_s: trivial_alpha(&c3), sigma_u: trivial_alpha(&c3) },
            )
            .unwrap(),
        ));
        // both reflections invert C3
        groups.push(GroupHandle::vc(
            vc::VcGroup::new(
                "Dinf~C3",
                c3.clone(),
                vc::VcExt::Dihedral { sigma_s: vec![0, 2, 1], sigma_u: vec![0, 2, 1] },
            )
            .unwrap(),
        ));
        // free products of finite groups
        groups.push(GroupHandle::free_product(
            "C3*C5",
            vec![GroupHandle::finite(finite::cyclic(3)), GroupHandle::finite(finite::cyclic(5))],
        ));
        groups.push(GroupHandle::free_product(
            "C2*C3",
            vec![GroupHandle::finite(finite::cyclic(2)), GroupHandle::finite(finite::cyclic(3))],
        ));
        groups.push(GroupHandle::free_product(
            "C5*C7",
            vec![GroupHandle::finite(finite::cyclic(5)), GroupHandle::finite(finite::cyclic(7))],
        ));
        groups.push(GroupHandle::free_product(
            "C3*C3*C3",
            vec![
                GroupHandle::finite(finite::cyclic(3)),
                GroupHandle::finite(finite::cyclic(3)),
                GroupHandle::finite(finite::cyclic(3)),
            ],
        ));
        groups.push(GroupHandle::free_product(
            "C5*C7*C9",
            vec![
                GroupHandle::finite(finite::cyclic(5)),
                GroupHandle::finite(finite::cyclic(7)),
                GroupHandle::finite(finite::cyclic(9)),
            ],
        ));
        groups.push(GroupHandle::free_product(
            "S3*C5",
            vec![GroupHandle::finite(finite::sym3()), GroupHandle::finite(finite::cyclic(5))],
        ));
        // BS(1,2)
        groups.push(GroupHandle::bs12());
        Catalog::new(groups)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_contents() {
        let cat = Catalog::default_catalog();
        for id in ["C1", "C12", "S3", "D4", "Q8", "A4", "V4", "F2", "Z", "Dinf", "BS12", "C3*C5"] {
            assert!(cat.get(id).is_ok(), "missing {}", id);
        }
        assert!(cat.finite_handles(12).len() >= 17);
        assert!(cat.vc_handles().len() >= 7);
    }

    #[test]
    fn json_round_trip_lossless() {
        let cat = Catalog::default_catalog();
        let json = cat.to_json();
        let back = Catalog::from_json(&json).unwrap();
        assert_eq!(cat.ids(), back.ids());
        for id in cat.ids() {
            assert_eq!(cat.get(&id).unwrap(), back.get(&id).unwrap(), "{} round trip", id);
        }
    }

    #[test]
    fn schema_tag_checked() {
        let bad = r#"{"schema":"nope","groups":[]}"#;
        assert!(Catalog::from_json(bad).is_err());
    }
}
