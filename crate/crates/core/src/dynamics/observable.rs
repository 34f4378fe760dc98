use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::{breakdown_charge, sz, Model, ModelKind, SectorLabel};
use crate::error::{Error, Result};
use crate::krylov::KrylovDecomposition;

/// A scalar measured on configurations or distributions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observable {
    /// Breakdown: `sum 2^(i-1) n_i`. Dipole: `sum S^z_i`.
    Charge,
    /// tJz: `(#up - #down) / L`.
    Magnetization,
    /// Number of non-empty sites.
    Particles,
    /// East: reach of the rightmost thermal region.
    Reach,
    /// Charge of sites `start..start+len` (1-indexed), weighted from the
    /// left end of the block for the breakdown model.
    SubsystemCharge { start: usize, len: usize },
    /// Half the L1 distance to the uniform distribution.
    TraceDistance,
}

impl Observable {
    pub fn id(&self) -> String {
        match self {
            Observable::Charge => "Q".into(),
            Observable::Magnetization => "m".into(),
            Observable::Particles => "N".into(),
            Observable::Reach => "x".into(),
            Observable::SubsystemCharge { start, len } => format!("QA:{start}:{len}"),
            Observable::TraceDistance => "trace_dist".into(),
        }
    }

    /// True for observables of a single configuration.
    pub fn is_pointwise(&self) -> bool {
        *self != Observable::TraceDistance
    }

    pub fn check(&self, model: &Model) -> Result<()> {
        let ok = match (self, model.kind()) {
            (Observable::TraceDistance, _) => true,
            (Observable::Charge, k) => {
                matches!(k, ModelKind::Breakdown | ModelKind::Dipole3 | ModelKind::Dipole4)
            }
            (Observable::Magnetization, k) => k == ModelKind::Tjz,
            (Observable::Particles, k) => {
                matches!(
                    k,
                    ModelKind::Tjz | ModelKind::Dipole3 | ModelKind::Dipole4 | ModelKind::East
                )
            }
            (Observable::Reach, k) => k == ModelKind::East,
            (Observable::SubsystemCharge { start, len }, k) => {
                matches!(k, ModelKind::Breakdown | ModelKind::Dipole3 | ModelKind::Dipole4)
                    && *start >= 1
                    && *len >= 1
                    && start + len - 1 <= model.len()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleObservable {
                observable: self.id(),
                model: model.name().to_string(),
            })
        }
    }

    /// Value on one configuration. Panics for [`Observable::TraceDistance`].
    pub fn evaluate(&self, model: &Model, letters: &[u8]) -> f64 {
        let kind = model.kind();
        match self {
            Observable::Charge => match kind {
                ModelKind::Breakdown => breakdown_charge(letters) as f64,
                _ => letters.iter().map(|&a| sz(a)).sum::<i64>() as f64,
            },
            Observable::Magnetization => {
                let m: i64 = letters
                    .iter()
                    .map(|&a| match a {
                        1 => 1,
                        2 => -1,
                        _ => 0,
                    })
                    .sum();
                m as f64 / letters.len() as f64
            }
            Observable::Particles => match kind {
                ModelKind::Dipole3 | ModelKind::Dipole4 => letters.iter().map(|&a| a as u64).sum::<u64>() as f64,
                _ => letters.iter().filter(|&&a| a != 0).count() as f64,
            },
            Observable::Reach => match model.label(letters) {
                SectorLabel::East { regions } => regions.last().map_or(0, |r| r.right) as f64,
                _ => 0.0,
            },
            Observable::SubsystemCharge { start, len } => {
                let block = &letters[start - 1..start - 1 + len];
                match kind {
                    ModelKind::Breakdown => breakdown_charge(block) as f64,
                    _ => block.iter().map(|&a| sz(a)).sum::<i64>() as f64,
                }
            }
            Observable::TraceDistance => panic!("trace distance is not a configuration observable"),
        }
    }

    /// Mean over the uniform distribution on all configurations.
    pub fn equilibrium(&self, model: &Model) -> Result<f64> {
        self.check(model)?;
        let len = model.len() as f64;
        Ok(match (self, model.kind()) {
            (Observable::TraceDistance, _) => 0.0,
            (Observable::Charge, ModelKind::Breakdown) => (2f64.powi(model.len() as i32 + 1) - 2.0) / 2.0,
            (Observable::Charge, _) | (Observable::Magnetization, _) => 0.0,
            (Observable::Particles, ModelKind::Tjz) => 2.0 * len / 3.0,
            (Observable::Particles, ModelKind::East) => len / 2.0,
            (Observable::Particles, _) => len,
            (Observable::SubsystemCharge { len, .. }, ModelKind::Breakdown) => 2f64.powi(*len as i32) - 1.0,
            (Observable::SubsystemCharge { .. }, _) => 0.0,
            (Observable::Reach, _) => {
                let n = model.state_count();
                if n > crate::krylov::ENUMERATION_CAP as u128 {
                    return Err(Error::StateSpaceTooLarge {
                        states: n,
                        cap: crate::krylov::ENUMERATION_CAP,
                    });
                }
                let mut letters = vec![0u8; model.len()];
                let mut sum = 0.0;
                for i in 0..n as u64 {
                    crate::chain::decode_into(i, model.d() as u64, &mut letters);
                    sum += self.evaluate(model, &letters);
                }
                sum / n as f64
            }
        })
    }

    /// Mean of the observable over each sector.
    pub fn sector_means(&self, model: &Model, decomp: &KrylovDecomposition) -> Vec<f64> {
        let mut letters = vec![0u8; model.len()];
        (0..decomp.num_sectors())
            .map(|s| {
                let members = decomp.members(s);
                let sum: f64 = members
                    .iter()
                    .map(|&i| {
                        crate::chain::decode_into(i as u64, model.d() as u64, &mut letters);
                        self.evaluate(model, &letters)
                    })
                    .sum();
                sum / members.len() as f64
            })
            .collect()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("unknown observable `{s}`"));
        Ok(match s {
            "Q" => Observable::Charge,
            "m" => Observable::Magnetization,
            "N" => Observable::Particles,
            "x" => Observable::Reach,
            "trace_dist" => Observable::TraceDistance,
            _ => {
                let rest = s.strip_prefix("QA:").ok_or_else(bad)?;
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                Observable::SubsystemCharge {
                    start: a.parse().map_err(|_| bad())?,
                    len: b.parse().map_err(|_| bad())?,
                }
            }
        })
    }
}

impl TryFrom<String> for Observable {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Observable> for String {
    fn from(o: Observable) -> String {
        o.id()
    }
}
