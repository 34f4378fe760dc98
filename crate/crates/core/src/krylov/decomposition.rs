use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::chain::{Configuration, Model, ModelKind, SectorLabel};
use crate::error::{Error, Result};

/// Largest state space that will be enumerated exactly.
pub const ENUMERATION_CAP: u64 = 5_000_000;

/// Partition of all `d^L` configurations into Krylov sectors.
#[derive(Clone, Debug)]
pub struct KrylovDecomposition {
    kind: ModelKind,
    len: usize,
    d: usize,
    sector_of: Vec<u32>,
    sizes: Vec<u64>,
    labels: Vec<SectorLabel>,
    offsets: Vec<usize>,
    members: Vec<u32>,
}

struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }
}

/// Finds the connected components of the bulk-move graph.
///
/// Sector ids are assigned in order of each sector's smallest configuration
/// index (base-`d`, site 1 least significant).
pub fn enumerate_sectors(model: &Model) -> Result<KrylovDecomposition> {
    let states = model.state_count();
    if states > ENUMERATION_CAP as u128 {
        return Err(Error::StateSpaceTooLarge {
            states,
            cap: ENUMERATION_CAP,
        });
    }
    let n = states as usize;
    let d = model.d() as u64;
    let w = model.window();
    let len = model.len();
    let gates = model.gates();
    let span = gates.span();

    let mut dsu = DisjointSet::new(n);
    for start in 0..(len + 1).saturating_sub(w) {
        let p = d.pow(start as u32);
        for i in 0..n as u64 {
            let local = (i / p) % span;
            let class = gates.class(local);
            if class.len() > 1 && class[0] as u64 != local {
                let rep = i - local * p + class[0] as u64 * p;
                dsu.union(i as u32, rep as u32);
            }
        }
    }

    let mut id_of_root = vec![u32::MAX; n];
    let mut sector_of = vec![0u32; n];
    let mut sizes: Vec<u64> = Vec::new();
    let mut labels = Vec::new();
    let mut letters = vec![0u8; len];
    for i in 0..n {
        let r = dsu.find(i as u32) as usize;
        if id_of_root[r] == u32::MAX {
            id_of_root[r] = sizes.len() as u32;
            sizes.push(0);
            crate::chain::decode_into(i as u64, d, &mut letters);
            labels.push(model.label(&letters));
        }
        let s = id_of_root[r];
        sector_of[i] = s;
        sizes[s as usize] += 1;
    }

    let mut offsets = Vec::with_capacity(sizes.len() + 1);
    offsets.push(0usize);
    for &s in &sizes {
        offsets.push(offsets.last().unwrap() + s as usize);
    }
    let mut cursor = offsets[..sizes.len()].to_vec();
    let mut members = vec![0u32; n];
    for (i, &s) in sector_of.iter().enumerate() {
        members[cursor[s as usize]] = i as u32;
        cursor[s as usize] += 1;
    }

    Ok(KrylovDecomposition {
        kind: model.kind(),
        len,
        d: model.d(),
        sector_of,
        sizes,
        labels,
        offsets,
        members,
    })
}

#[derive(Serialize)]
struct SectorRecord<'a> {
    sector_id: usize,
    size: u64,
    label: &'a SectorLabel,
}

impl KrylovDecomposition {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn num_sectors(&self) -> usize {
        self.sizes.len()
    }

    /// `d^L`.
    pub fn total(&self) -> u64 {
        self.sector_of.len() as u64
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn labels(&self) -> &[SectorLabel] {
        &self.labels
    }

    pub fn size(&self, sector: usize) -> u64 {
        self.sizes[sector]
    }

    pub fn label(&self, sector: usize) -> &SectorLabel {
        &self.labels[sector]
    }

    /// Dense indices of the configurations in a sector, ascending.
    pub fn members(&self, sector: usize) -> &[u32] {
        &self.members[self.offsets[sector]..self.offsets[sector + 1]]
    }

    /// Sector id per dense configuration index.
    pub fn sector_map(&self) -> &[u32] {
        &self.sector_of
    }

    pub fn sector_of_index(&self, index: u64) -> usize {
        self.sector_of[index as usize] as usize
    }

    pub fn sector_of(&self, config: &Configuration) -> usize {
        self.sector_of_index(config.index(self.d))
    }

    pub fn configuration(&self, index: u64) -> Configuration {
        Configuration::from_index(index, self.d, self.len)
    }

    /// Index of the largest sector; ties go to the smallest id.
    pub fn largest_sector(&self) -> usize {
        let max = *self.sizes.iter().max().unwrap_or(&0);
        self.sizes.iter().position(|&s| s == max).unwrap_or(0)
    }

    /// Checks that every configuration carries its sector's label.
    pub fn labels_consistent(&self, model: &Model) -> bool {
        let mut letters = vec![0u8; self.len];
        self.sector_of.iter().enumerate().all(|(i, &s)| {
            crate::chain::decode_into(i as u64, self.d as u64, &mut letters);
            model.label(&letters) == self.labels[s as usize]
        })
    }

    /// Writes one JSON object per sector: `{sector_id, size, label}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, (size, label)) in self.sizes.iter().zip(&self.labels).enumerate() {
            let rec = SectorRecord {
                sector_id: i,
                size: *size,
                label,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// A label shared by several dynamically disconnected sectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FragileLabel {
    pub label: SectorLabel,
    pub sectors: Vec<usize>,
}

/// Labels whose equivalence class splits into two or more sectors.
pub fn detect_fragile(decomp: &KrylovDecomposition) -> Vec<FragileLabel> {
    let mut by_label: BTreeMap<&SectorLabel, Vec<usize>> = BTreeMap::new();
    for (i, l) in decomp.labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    by_label
        .into_iter()
        .filter(|(_, s)| s.len() > 1)
        .map(|(l, sectors)| FragileLabel {
            label: l.clone(),
            sectors,
        })
        .collect()
}
