//! Conductance of cuts, Cheeger-type bounds and spectral gaps.

mod cut;
mod gap;
mod local;

pub use cut::{
    cheeger_bound, cut_conductance, cut_family, min_conductance, min_conductance_with, ratio_f64, Cut, CutFamily,
    MinCut, Strategy, EXHAUSTIVE_CAP,
};
pub use gap::{spectral_gap, GapReport, DENSE_CAP};
pub use local::{local_vs_nonlocal_check, CutComparison};
