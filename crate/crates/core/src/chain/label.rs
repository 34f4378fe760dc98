use std::fmt;

use serde::{Deserialize, Serialize};

/// A spin in a tJz pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    #[serde(rename = "u")]
    Up,
    #[serde(rename = "d")]
    Down,
}

/// A maximal thermal region of an East configuration, sites 1-indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ThermalRegion {
    /// Leftmost (always occupied) site.
    pub left: usize,
    /// Rightmost site the region can reach, clipped at the chain end.
    pub right: usize,
    /// Particles in the region.
    pub particles: usize,
}

/// Conserved sector identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectorLabel {
    BreakdownCharge {
        charge: u64,
    },
    SpinPattern {
        spins: Vec<Spin>,
    },
    ReducedWord {
        word: Vec<u8>,
    },
    Dipole {
        /// Spins (+1 or -1) of the defects, left to right.
        defects: Vec<i8>,
        /// Dipole moment of each inter-defect segment.
        moments: Vec<i64>,
        charge: i64,
        dipole: i64,
    },
    Multipole {
        charge: i64,
        dipole: i64,
    },
    East {
        regions: Vec<ThermalRegion>,
    },
    /// East sectors merged by particle number and reach.
    EastPacked {
        particles: usize,
        reach: usize,
    },
    /// A single configuration, used for configuration-level graphs.
    State {
        letters: Vec<u8>,
    },
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorLabel::BreakdownCharge { charge } => write!(f, "Q={charge}"),
            SectorLabel::SpinPattern { spins } => {
                if spins.is_empty() {
                    return write!(f, "()");
                }
                for s in spins {
                    f.write_str(if *s == Spin::Up { "u" } else { "d" })?;
                }
                Ok(())
            }
            SectorLabel::ReducedWord { word } => {
                if word.is_empty() {
                    return write!(f, "()");
                }
                for c in word {
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            SectorLabel::Dipole {
                defects,
                moments,
                charge,
                dipole,
            } => {
                write!(f, "defects={defects:?} P={moments:?} Q={charge} D={dipole}")
            }
            SectorLabel::Multipole { charge, dipole } => write!(f, "Q={charge} D={dipole}"),
            SectorLabel::East { regions } => {
                let parts: Vec<String> = regions
                    .iter()
                    .map(|r| format!("[{},{};{}]", r.left, r.right, r.particles))
                    .collect();
                write!(f, "{}", parts.join(""))
            }
            SectorLabel::EastPacked { particles, reach } => write!(f, "N={particles} x={reach}"),
            SectorLabel::State { letters } => {
                for a in letters {
                    write!(f, "{a}")?;
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn breakdown_charge(letters: &[u8]) -> u64 {
    letters.iter().enumerate().map(|(i, &n)| (n as u64) << i).sum()
}

pub(crate) fn spin_pattern(letters: &[u8]) -> Vec<Spin> {
    letters
        .iter()
        .filter_map(|&a| match a {
            1 => Some(Spin::Up),
            2 => Some(Spin::Down),
            _ => None,
        })
        .collect()
}

/// Cancels adjacent equal letters until none remain.
pub fn reduce_word(letters: &[u8]) -> Vec<u8> {
    let mut stack: Vec<u8> = Vec::with_capacity(letters.len());
    for &a in letters {
        if stack.last() == Some(&a) {
            stack.pop();
        } else {
            stack.push(a);
        }
    }
    stack
}

/// Spin value of a dipole-model letter.
#[inline]
pub(crate) fn sz(a: u8) -> i64 {
    a as i64 - 1
}

pub(crate) fn multipole(letters: &[u8]) -> (i64, i64) {
    letters
        .iter()
        .enumerate()
        .fold((0, 0), |(q, p), (i, &a)| (q + sz(a), p + (i as i64 + 1) * sz(a)))
}

pub(crate) fn dipole_label(letters: &[u8]) -> SectorLabel {
    let mut defects = Vec::new();
    let mut moments = vec![0i64];
    let mut prev: Option<i64> = None;
    for (i, &a) in letters.iter().enumerate() {
        let s = sz(a);
        if s == 0 {
            continue;
        }
        if prev == Some(s) {
            defects.push(s as i8);
            moments.push(0);
        }
        *moments.last_mut().unwrap() += (i as i64 + 1) * s;
        prev = Some(s);
    }
    let (charge, dipole) = multipole(letters);
    SectorLabel::Dipole {
        defects,
        moments,
        charge,
        dipole,
    }
}

pub(crate) fn east_regions(letters: &[u8]) -> Vec<ThermalRegion> {
    let len = letters.len();
    let mut regions = Vec::new();
    let mut i = 0;
    while i < len {
        if letters[i] == 0 {
            i += 1;
            continue;
        }
        let start = i;
        let mut height = 0i64;
        let mut particles = 0usize;
        let mut j = i;
        while j < len {
            if letters[j] != 0 {
                height += 1;
                particles += 1;
            } else {
                height -= 1;
            }
            if height < 0 {
                break;
            }
            j += 1;
        }
        regions.push(ThermalRegion {
            left: start + 1,
            right: (start + 2 * particles - 1).min(len),
            particles,
        });
        i = j;
    }
    regions
}
