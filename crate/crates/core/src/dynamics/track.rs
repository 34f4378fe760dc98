use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{breakdown_charge, sz, Configuration, Model, ModelKind};
use crate::error::{Error, Result};

/// Charge-transfer rule to verify along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeCheck {
    /// Breakdown block `start..start+len` (1-indexed): the change of its
    /// block-local charge must lie in `{a + b 2^len : a, b in {-1, 0, 1}}`.
    Breakdown { start: usize, len: usize },
    /// Dipole model: the net charge crossing every bond stays within `2`.
    DipoleCuts,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub step: u64,
    /// Block start, or the bond index `c` between sites `c` and `c + 1`.
    pub at: usize,
    pub change: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrackReport {
    /// Breakdown: the block charge at each recorded step. Dipole: the largest
    /// transferred charge over all bonds at each recorded step.
    pub series: Vec<i64>,
    pub violations: Vec<Violation>,
    pub steps: u64,
}

/// Bulk-only dynamics, yielding the configuration after every brickwork layer.
pub struct BulkTrajectory<'a> {
    model: &'a Model,
    letters: Vec<u8>,
    rng: ChaCha8Rng,
    layer: usize,
    remaining: u64,
}

impl<'a> BulkTrajectory<'a> {
    /// `layers` brickwork layers (a sweep is `window` layers), no bath.
    pub fn new(model: &'a Model, initial: &Configuration, layers: u64, seed: u64) -> Self {
        Self {
            model,
            letters: initial.letters().to_vec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            layer: 0,
            remaining: layers,
        }
    }
}

impl Iterator for BulkTrajectory<'_> {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let w = self.model.window();
        let mut start = self.layer;
        while start + w <= self.letters.len() {
            self.model.gates().apply(&mut self.letters, start, &mut self.rng);
            start += w;
        }
        self.layer = (self.layer + 1) % w;
        Some(self.letters.clone())
    }
}

fn allowed_breakdown(change: i64, len: usize) -> bool {
    let big = 1i64 << len;
    (-1..=1).any(|b| (-1..=1).any(|a| a + b * big == change))
}

fn bond_charges(letters: &[u8]) -> Vec<i64> {
    letters
        .iter()
        .scan(0i64, |acc, &a| {
            *acc += sz(a);
            Some(*acc)
        })
        .collect()
}

/// Checks a charge-transfer rule along `trajectory`, whose first item is the
/// reference configuration.
pub fn subsystem_charge_track<I>(model: &Model, trajectory: I, check: ChargeCheck) -> Result<TrackReport>
where
    I: IntoIterator<Item = Vec<u8>>,
{
    let mut it = trajectory.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidSimulation("empty trajectory".into()))?;
    match check {
        ChargeCheck::Breakdown { start, len } => {
            if model.kind() != ModelKind::Breakdown || start == 0 || len == 0 || start + len - 1 > model.len() {
                return Err(Error::InvalidParams("bad breakdown block".into()));
            }
            let block = |l: &[u8]| breakdown_charge(&l[start - 1..start - 1 + len]) as i64;
            let q0 = block(&first);
            let mut report = TrackReport {
                series: vec![q0],
                violations: vec![],
                steps: 0,
            };
            for (k, l) in it.enumerate() {
                let q = block(&l);
                if !allowed_breakdown(q - q0, len) {
                    report.violations.push(Violation {
                        step: k as u64 + 1,
                        at: start,
                        change: q - q0,
                    });
                }
                report.series.push(q);
                report.steps += 1;
            }
            Ok(report)
        }
        ChargeCheck::DipoleCuts => {
            if !matches!(model.kind(), ModelKind::Dipole3) {
                return Err(Error::InvalidParams("bond check applies to dipole3".into()));
            }
            let q0 = bond_charges(&first);
            let mut report = TrackReport {
                series: vec![0],
                violations: vec![],
                steps: 0,
            };
            for (k, l) in it.enumerate() {
                let q = bond_charges(&l);
                let mut worst = 0;
                for c in 0..q.len() - 1 {
                    let dq = q[c] - q0[c];
                    worst = worst.max(dq.abs());
                    if dq.abs() > 2 {
                        report.violations.push(Violation {
                            step: k as u64 + 1,
                            at: c + 1,
                            change: dq,
                        });
                    }
                }
                report.series.push(worst);
                report.steps += 1;
            }
            Ok(report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{make_model, ModelParams};

    #[test]
    fn allowed_set() {
        assert!(allowed_breakdown(0, 3));
        assert!(allowed_breakdown(-1, 3));
        assert!(allowed_breakdown(7, 3));
        assert!(allowed_breakdown(-9, 3));
        assert!(!allowed_breakdown(2, 3));
    }

    #[test]
    fn full_block_charge_is_constant() {
        let m = make_model("breakdown", 8, &ModelParams::default()).unwrap();
        let init = m.parse_config("01201210").unwrap();
        let traj = std::iter::once(init.letters().to_vec()).chain(BulkTrajectory::new(&m, &init, 2000, 5));
        let r = subsystem_charge_track(&m, traj, ChargeCheck::Breakdown { start: 1, len: 8 }).unwrap();
        assert!(r.series.iter().all(|&q| q == r.series[0]));
        assert!(r.violations.is_empty());
    }

    #[test]
    fn detects_an_injected_violation() {
        let m = make_model("dipole3", 5, &ModelParams::default()).unwrap();
        let traj = vec![vec![1, 1, 1, 1, 1], vec![2, 2, 2, 1, 1]];
        let r = subsystem_charge_track(&m, traj, ChargeCheck::DipoleCuts).unwrap();
        assert!(!r.violations.is_empty());
    }
}
