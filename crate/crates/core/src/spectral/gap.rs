use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krylov::KrylovGraph;

/// Node count above which the gap is found by power iteration.
pub const DENSE_CAP: usize = 2000;
const TOL: f64 = 1e-10;
const MAX_ITER: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub lambda2: f64,
    pub gap: f64,
    /// `1 / (1 - lambda2)`.
    pub relaxation_time: f64,
    pub method: &'static str,
    pub iterations: usize,
}

impl GapReport {
    fn new(lambda2: f64, method: &'static str, iterations: usize) -> Self {
        let gap = 1.0 - lambda2;
        Self {
            lambda2,
            gap,
            relaxation_time: 1.0 / gap,
            method,
            iterations,
        }
    }

    /// `1 / (1 - lambda2) >= 1 / (2 phi)` with slack for rounding.
    pub fn consistent_with(&self, phi: f64) -> bool {
        self.gap <= 2.0 * phi * (1.0 + 1e-9) + 1e-12
    }
}

fn weights(graph: &KrylovGraph) -> (Vec<f64>, Vec<(usize, usize, f64)>) {
    let denom = graph.denominator() as f64;
    let sq: Vec<f64> = graph.masses().iter().map(|&m| (m as f64).sqrt()).collect();
    let entries = graph
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (e.src as usize, e.dst as usize);
            (a, b, e.flux as f64 / (denom * sq[a] * sq[b]))
        })
        .collect();
    (sq, entries)
}

/// Second largest eigenvalue of a reversible sector chain.
pub fn spectral_gap(graph: &KrylovGraph) -> Result<GapReport> {
    if !graph.is_reversible() {
        return Err(Error::NotReversible);
    }
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::OutOfRange("spectral gap needs two nodes".into()));
    }
    if n <= DENSE_CAP {
        dense(graph)
    } else {
        power(graph)
    }
}

fn dense(graph: &KrylovGraph) -> Result<GapReport> {
    let n = graph.node_count();
    let (_, entries) = weights(graph);
    let mut s = DMatrix::<f64>::zeros(n, n);
    for (a, b, w) in entries {
        s[(a, b)] += w;
    }
    let s = (&s + s.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(GapReport::new(ev[1], "dense", 0))
}

fn power(graph: &KrylovGraph) -> Result<GapReport> {
    let n = graph.node_count();
    let (sq, entries) = weights(graph);
    let norm = sq.iter().map(|x| x * x).sum::<f64>().sqrt();
    let top: Vec<f64> = sq.iter().map(|x| x / norm).collect();
    let deflate = |v: &mut Vec<f64>| {
        let c: f64 = v.iter().zip(&top).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&top).for_each(|(a, b)| *a -= c * b);
    };
    let normalize = |v: &mut Vec<f64>| {
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= r);
    };
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i + 1) as f64 * 0.618_033_988_75).fract() - 0.5)
        .collect();
    deflate(&mut v);
    normalize(&mut v);
    // iterate (I + S) / 2, whose spectrum lies in [0, 1]
    let apply = |v: &[f64]| {
        let mut out: Vec<f64> = v.iter().map(|x| 0.5 * x).collect();
        for &(a, b, w) in &entries {
            out[b] += 0.5 * w * v[a];
        }
        out
    };
    let mut mu = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITER {
        let mut w = apply(&v);
        deflate(&mut w);
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - next * b).powi(2))
            .sum::<f64>()
            .sqrt();
        normalize(&mut w);
        v = w;
        if (next - mu).abs() < TOL && residual < 1e-6 {
            return Ok(GapReport::new(2.0 * next - 1.0, "power", it));
        }
        mu = next;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        residual,
    })
}
