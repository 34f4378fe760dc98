//! Least-squares fits on transformed data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<Fit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(Fit {
        slope,
        intercept: my - slope * mx,
        r2,
        points: n,
    })
}

fn windowed(t: &[f64], y: &[f64], lo: f64, hi: f64, keep: impl Fn(f64, f64) -> bool) -> (Vec<f64>, Vec<f64>) {
    t.iter()
        .zip(y)
        .filter(|(&a, &b)| a >= lo && a <= hi && keep(a, b))
        .map(|(&a, &b)| (a, b))
        .unzip()
}

/// Fits `log y = slope log t + c` over `lo <= t <= hi`.
pub fn power_law_fit(t: &[f64], y: &[f64], lo: f64, hi: f64) -> Result<Fit> {
    let (a, b) = windowed(t, y, lo, hi, |a, b| a > 0.0 && b > 0.0);
    let lx: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = b.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).ok_or(Error::EmptyFitWindow { lo, hi })
}

/// Fits `y = slope ln t + c` over `lo <= t <= hi`.
pub fn log_linear_fit(t: &[f64], y: &[f64], lo: f64, hi: f64) -> Result<Fit> {
    let (a, b) = windowed(t, y, lo, hi, |a, _| a > 0.0);
    let lx: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &b).ok_or(Error::EmptyFitWindow { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_law() {
        let t: Vec<f64> = (1..100).map(|v| v as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| 3.0 * v.powf(0.5)).collect();
        let f = power_law_fit(&t, &y, 1.0, 100.0).unwrap();
        assert_relative_eq!(f.slope, 0.5, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 3f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(f.r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_series_has_zero_slope() {
        let t: Vec<f64> = (1..50).map(|v| v as f64).collect();
        let y = vec![2.0; t.len()];
        assert_relative_eq!(power_law_fit(&t, &y, 1.0, 50.0).unwrap().slope, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn log_growth() {
        let t: Vec<f64> = (1..1000).map(|v| v as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| 2.0 * v.ln() - 1.0).collect();
        let f = log_linear_fit(&t, &y, 10.0, 1000.0).unwrap();
        assert_relative_eq!(f.slope, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_window() {
        assert!(power_law_fit(&[1.0, 2.0], &[1.0, 2.0], 5.0, 6.0).is_err());
    }
}
