//! Stochastic trajectories, exact distribution evolution and the quantities
//! measured on them.

mod debruijn;
mod exact;
mod observable;
mod relax;
mod sim;
mod track;

pub use debruijn::{de_bruijn_dictionary, ergodicity_state, pattern_census};
pub use exact::{
    evolve_distribution, evolve_graph, graph_first_passage, graph_l1_to_uniform, graph_observable_series, graph_step,
    l1_to_uniform, thermalization_time_full, thermalization_time_nonlocal, to_f64, FullSpaceChain, Passage, Scalar,
    EXACT_CAP, THERMAL_L1,
};
pub use observable::Observable;
pub use relax::{relaxation_time, Threshold};
pub use sim::{
    krylov_walk_step, local_sweeps, step, Mode, ObservableSeries, Schedule, SimulationConfig, Simulator, CHUNK,
};
pub use track::{subsystem_charge_track, BulkTrajectory, ChargeCheck, TrackReport, Violation};
