//! Configurations, constraint models, boundary baths and sector labels.

mod bath;
mod config;
mod label;
mod model;

pub use bath::{BathKernel, BathSemantics, BathSide, BathSpec};
pub use config::{Configuration, MAX_PACKED_LEN};
pub use label::{reduce_word, SectorLabel, Spin, ThermalRegion};
pub use model::{make_model, GateTable, LabelKind, Model, ModelKind, ModelParams, Rule};

pub(crate) use config::{decode_into, encode};
pub(crate) use label::{breakdown_charge, sz};
