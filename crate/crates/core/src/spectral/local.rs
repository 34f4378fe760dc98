use num_rational::Ratio;
use serde::Serialize;

use super::cut::{cut_conductance, Cut};
use crate::chain::Model;
use crate::dynamics::{FullSpaceChain, Mode};
use crate::error::Result;
use crate::krylov::{EdgeConvention, KrylovDecomposition};

/// Conductance of one sector-respecting cut under the local and nonlocal chains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutComparison {
    pub cut_id: String,
    #[serde(skip)]
    pub local: Ratio<u128>,
    #[serde(skip)]
    pub nonlocal: Ratio<u128>,
    pub local_f64: f64,
    pub nonlocal_f64: f64,
}

impl CutComparison {
    pub fn equal(&self) -> bool {
        self.local == self.nonlocal
    }
}

/// Compares the one-sweep local chain with the sector-resampling chain on
/// cuts given as sets of sectors.
pub fn local_vs_nonlocal_check(
    model: &Model,
    decomp: &KrylovDecomposition,
    sector_cuts: &[(String, Vec<usize>)],
) -> Result<Vec<CutComparison>> {
    let local = FullSpaceChain::new(model, Mode::Local { sweeps: 1 }, Some(decomp))?.configuration_graph()?;
    let nonlocal = FullSpaceChain::new(model, Mode::SectorUniform, Some(decomp))?.configuration_graph()?;
    sector_cuts
        .iter()
        .map(|(id, sectors)| {
            let configs: Vec<usize> = sectors
                .iter()
                .flat_map(|&s| decomp.members(s).iter().map(|&i| i as usize))
                .collect();
            let l = cut_conductance(&local, &Cut::new(&local, &configs)?, EdgeConvention::Probabilistic);
            let n = cut_conductance(
                &nonlocal,
                &Cut::new(&nonlocal, &configs)?,
                EdgeConvention::Probabilistic,
            );
            Ok(CutComparison {
                cut_id: id.clone(),
                local_f64: super::cut::ratio_f64(&l),
                nonlocal_f64: super::cut::ratio_f64(&n),
                local: l,
                nonlocal: n,
            })
        })
        .collect()
}
