use serde::{Deserialize, Serialize};

use super::exact::Passage;
use super::sim::ObservableSeries;
use crate::error::{Error, Result};

/// How close to equilibrium counts as relaxed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Threshold {
    /// `|obs(t) - obs(inf)| <= gamma`.
    Absolute(f64),
    /// `|obs(t) - obs(inf)| < eps * |obs(inf)|`.
    Relative(f64),
}

/// First recorded time at which the series is within the threshold of `equilibrium`.
pub fn relaxation_time(series: &ObservableSeries, equilibrium: f64, threshold: Threshold) -> Result<Passage> {
    let level = match threshold {
        Threshold::Absolute(g) | Threshold::Relative(g) if !(g > 0.0 && g < 1.0) => {
            return Err(Error::InvalidParams(format!("threshold {g} outside (0, 1)")))
        }
        Threshold::Absolute(g) => g,
        Threshold::Relative(e) => e * equilibrium.abs(),
    };
    let hit = series.t.iter().zip(&series.mean).find(|(_, &v)| {
        let dev = (v - equilibrium).abs();
        match threshold {
            Threshold::Absolute(_) => dev <= level,
            Threshold::Relative(_) => dev < level,
        }
    });
    Ok(match hit {
        Some((&t, _)) => Passage::Reached(t),
        None => Passage::Censored {
            horizon: series.t.last().copied().unwrap_or(0),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Observable;

    fn series(values: &[f64]) -> ObservableSeries {
        ObservableSeries::exact(
            Observable::Magnetization,
            (0..values.len() as u64).collect(),
            values.to_vec(),
        )
    }

    #[test]
    fn equilibrium_series_relaxes_at_zero() {
        let s = series(&[0.0, 0.0, 0.0]);
        assert_eq!(
            relaxation_time(&s, 0.0, Threshold::Absolute(0.1)).unwrap(),
            Passage::Reached(0)
        );
    }

    #[test]
    fn first_crossing_and_censoring() {
        let s = series(&[1.0, 0.5, 0.1, 0.05]);
        assert_eq!(
            relaxation_time(&s, 0.0, Threshold::Absolute(0.1)).unwrap(),
            Passage::Reached(2)
        );
        assert_eq!(
            relaxation_time(&s, 0.0, Threshold::Absolute(0.01)).unwrap(),
            Passage::Censored { horizon: 3 }
        );
        let q = series(&[0.0, 5.0, 9.5, 10.0]);
        assert_eq!(
            relaxation_time(&q, 10.0, Threshold::Relative(0.1)).unwrap(),
            Passage::Reached(2)
        );
        assert!(relaxation_time(&q, 10.0, Threshold::Relative(1.5)).is_err());
    }
}
