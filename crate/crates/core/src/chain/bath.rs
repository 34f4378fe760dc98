use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathSide {
    None,
    Left,
    Right,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathSemantics {
    /// The end site(s) are replaced by a uniformly random letter.
    UniformResample,
    /// With site 1 occupied, site 2 is resampled; otherwise nothing happens.
    EastSecondSite,
    /// The two end sites are replaced by a uniformly random pair.
    DipoleTwoSite,
}

/// Where and how the boundary noise acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BathSpec {
    pub side: BathSide,
    pub semantics: BathSemantics,
}

impl BathSpec {
    pub fn new(side: BathSide, semantics: BathSemantics) -> Self {
        Self { side, semantics }
    }

    pub fn none() -> Self {
        Self::new(BathSide::None, BathSemantics::UniformResample)
    }

    /// Resampled sites, 1-indexed, in increasing order.
    pub fn sites(&self, len: usize) -> Vec<usize> {
        self.sites0(len).into_iter().map(|s| s + 1).collect()
    }

    fn sites0(&self, len: usize) -> Vec<usize> {
        let width = match self.semantics {
            BathSemantics::UniformResample => 1,
            BathSemantics::EastSecondSite => return vec![1],
            BathSemantics::DipoleTwoSite => 2,
        };
        let left: Vec<usize> = (0..width).collect();
        let right: Vec<usize> = (len - width..len).collect();
        match self.side {
            BathSide::None => vec![],
            BathSide::Left => left,
            BathSide::Right => right,
            BathSide::Both => left.into_iter().chain(right).collect(),
        }
    }

    pub fn validate(&self, len: usize, d: usize) -> Result<()> {
        let bad = || Error::IncompatibleBath(self.to_string());
        match self.semantics {
            BathSemantics::EastSecondSite => {
                if d != 2 || len < 2 || !matches!(self.side, BathSide::Left | BathSide::None) {
                    return Err(bad());
                }
            }
            BathSemantics::DipoleTwoSite => {
                let need = if self.side == BathSide::Both { 4 } else { 2 };
                if len < need {
                    return Err(bad());
                }
            }
            BathSemantics::UniformResample => {
                if self.side == BathSide::Both && len < 2 {
                    return Err(bad());
                }
            }
        }
        Ok(())
    }

    /// Precomputes the exact single-step kernel on dense indices.
    pub fn kernel(&self, len: usize, d: usize) -> Result<BathKernel> {
        self.validate(len, d)?;
        let sites = if self.side == BathSide::None {
            vec![]
        } else {
            self.sites0(len)
        };
        let d = d as u64;
        let pows = sites.iter().map(|&s| d.pow(s as u32)).collect::<Vec<_>>();
        let east = self.semantics == BathSemantics::EastSecondSite && self.side != BathSide::None;
        let denom = d.pow(sites.len() as u32);
        Ok(BathKernel {
            sites,
            pows,
            d,
            east,
            denom,
        })
    }

    /// Resamples the bath sites of `letters` in place.
    pub fn apply<R: Rng + ?Sized>(&self, letters: &mut [u8], d: usize, rng: &mut R) {
        if self.side == BathSide::None {
            return;
        }
        if self.semantics == BathSemantics::EastSecondSite {
            if letters[0] != 0 {
                letters[1] = rng.gen_range(0..d as u8);
            }
            return;
        }
        for s in self.sites0(letters.len()) {
            letters[s] = rng.gen_range(0..d as u8);
        }
    }
}

impl fmt::Display for BathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = self.side;
        let sem = match self.semantics {
            BathSemantics::UniformResample => "uniform-resample",
            BathSemantics::EastSecondSite => "east-second-site",
            BathSemantics::DipoleTwoSite => "dipole-two-site",
        };
        write!(f, "{side}/{sem}")
    }
}

impl fmt::Display for BathSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BathSide::None => "none",
            BathSide::Left => "left",
            BathSide::Right => "right",
            BathSide::Both => "both",
        })
    }
}

impl FromStr for BathSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(BathSide::None),
            "left" => Ok(BathSide::Left),
            "right" => Ok(BathSide::Right),
            "both" => Ok(BathSide::Both),
            _ => Err(Error::IncompatibleBath(s.to_string())),
        }
    }
}

/// Exact bath transition kernel over dense configuration indices.
///
/// Every outcome carries an integer weight; the weights of one input sum to
/// [`BathKernel::denominator`].
#[derive(Clone, Debug)]
pub struct BathKernel {
    sites: Vec<usize>,
    pows: Vec<u64>,
    d: u64,
    east: bool,
    denom: u64,
}

impl BathKernel {
    pub fn denominator(&self) -> u64 {
        self.denom
    }

    /// Calls `f(target, weight)` for every outcome of the bath acting on `index`.
    #[inline]
    pub fn for_each_outcome<F: FnMut(u64, u64)>(&self, index: u64, mut f: F) {
        let d = self.d;
        if self.east {
            // Sites 1 and 2 have weights 1 and 2 in the base-2 index.
            if index & 1 == 0 {
                f(index, 2);
            } else {
                f(index & !2, 1);
                f(index | 2, 1);
            }
            return;
        }
        let base = self.pows.iter().fold(index, |acc, &p| acc - ((index / p) % d) * p);
        let k = self.sites.len();
        for combo in 0..self.denom {
            let mut c = combo;
            let mut target = base;
            for p in &self.pows[..k] {
                target += (c % d) * p;
                c /= d;
            }
            f(target, 1);
        }
    }
}
