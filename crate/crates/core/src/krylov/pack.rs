use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Edge, KrylovGraph};
use crate::chain::SectorLabel;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackingScheme {
    /// No merging.
    Identity,
    /// East sectors sharing particle number and reach.
    EastNx,
    /// Sectors sharing a reduced word.
    GroupElement,
}

impl std::str::FromStr for PackingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(PackingScheme::Identity),
            "east-nx" => Ok(PackingScheme::EastNx),
            "group-element" => Ok(PackingScheme::GroupElement),
            _ => Err(Error::InvalidParams(format!("unknown packing scheme `{s}`"))),
        }
    }
}

fn packed_label(scheme: PackingScheme, label: &SectorLabel) -> Option<SectorLabel> {
    match (scheme, label) {
        (PackingScheme::Identity, l) => Some(l.clone()),
        (PackingScheme::EastNx, SectorLabel::East { regions }) => Some(SectorLabel::EastPacked {
            particles: regions.iter().map(|r| r.particles).sum(),
            reach: regions.last().map_or(0, |r| r.right),
        }),
        (PackingScheme::GroupElement, l @ SectorLabel::ReducedWord { .. }) => Some(l.clone()),
        _ => None,
    }
}

/// Merges nodes whose labels agree under `scheme`.
///
/// Merged nodes are numbered in order of their first constituent.
pub fn pack_sectors(graph: &KrylovGraph, scheme: PackingScheme) -> Result<KrylovGraph> {
    let mut ids: HashMap<SectorLabel, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut masses: Vec<u64> = Vec::new();
    let mut node_map = Vec::with_capacity(graph.node_count());
    for a in 0..graph.node_count() {
        let key = packed_label(scheme, graph.label(a)).ok_or_else(|| Error::IncompatibleScheme {
            scheme: format!("{scheme:?}"),
            model: format!("{}", graph.label(a)),
        })?;
        let id = *ids.entry(key.clone()).or_insert_with(|| {
            labels.push(key);
            masses.push(0);
            masses.len() - 1
        });
        masses[id] += graph.mass(a);
        node_map.push(id);
    }
    let mut acc: BTreeMap<(u32, u32), (u128, u64)> = BTreeMap::new();
    for e in graph.edges() {
        let key = (node_map[e.src as usize] as u32, node_map[e.dst as usize] as u32);
        let slot = acc.entry(key).or_insert((0, 0));
        slot.0 += e.flux;
        slot.1 += e.pairs;
    }
    let edges = acc
        .into_iter()
        .map(|((src, dst), (flux, pairs))| Edge { src, dst, flux, pairs })
        .collect();
    Ok(KrylovGraph::from_edges(masses, labels, graph.denominator(), edges))
}
