//! Exact sector-size formulas.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type BigCount = BigUint;

/// Largest `L` accepted by the breakdown formulas (charges must fit in `u64`).
pub const BREAKDOWN_MAX_LEN: usize = 62;

fn out_of_range(what: String) -> Error {
    Error::OutOfRange(what)
}

fn check_breakdown_len(len: usize) -> Result<()> {
    if len == 0 || len > BREAKDOWN_MAX_LEN {
        return Err(out_of_range(format!("L = {len} outside 1..={BREAKDOWN_MAX_LEN}")));
    }
    Ok(())
}

/// Largest breakdown charge, `2^(L+1) - 2`.
pub fn breakdown_qmax(len: usize) -> u64 {
    (1u64 << (len + 1)) - 2
}

/// Memoized count of configurations with charge `q` on an unbounded chain.
///
/// For `q <= 2^L - 1` the count does not depend on `L`, which is what makes
/// large-`L` tables cheap.
#[derive(Default)]
pub struct BreakdownCounter {
    memo: HashMap<u64, BigCount>,
}

impl BreakdownCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unbounded(&mut self, q: u64) -> BigCount {
        if q == 0 {
            return BigCount::one();
        }
        if let Some(v) = self.memo.get(&q) {
            return v.clone();
        }
        let v = if q % 2 == 1 {
            self.unbounded((q - 1) / 2)
        } else {
            self.unbounded(q / 2) + self.unbounded(q / 2 - 1)
        };
        self.memo.insert(q, v.clone());
        v
    }

    /// `|K_Q(L)|`, folding the upper half with particle-hole symmetry.
    pub fn sector_size(&mut self, q: u64, len: usize) -> Result<BigCount> {
        check_breakdown_len(len)?;
        let qmax = breakdown_qmax(len);
        if q > qmax {
            return Err(out_of_range(format!("Q = {q} exceeds Qmax = {qmax} at L = {len}")));
        }
        Ok(self.unbounded(q.min(qmax - q)))
    }
}

pub fn breakdown_sector_size(q: u64, len: usize) -> Result<BigCount> {
    BreakdownCounter::new().sector_size(q, len)
}

/// Sizes of all charge sectors `Q = 0..=Qmax`, built site by site without the
/// recurrence or the symmetry. Limited to `L <= 24`.
pub fn breakdown_size_table(len: usize) -> Result<Vec<u32>> {
    if len == 0 || len > 24 {
        return Err(out_of_range(format!("table length L = {len} outside 1..=24")));
    }
    let qmax = breakdown_qmax(len) as usize;
    let mut counts = vec![0u32; qmax + 1];
    counts[0] = 1;
    for site in 0..len {
        let w = 1usize << site;
        let top = (1usize << (site + 1)) * 2 - 2;
        for q in (0..=top).rev() {
            let mut s = counts[q];
            if q >= w {
                s += counts[q - w];
            }
            if q >= 2 * w {
                s += counts[q - 2 * w];
            }
            counts[q] = s;
        }
    }
    Ok(counts)
}

/// The two charges of the largest sectors below `Qmax / 2`.
pub fn breakdown_qstar(len: usize) -> Result<(u64, u64)> {
    if !(3..=BREAKDOWN_MAX_LEN - 2).contains(&len) {
        return Err(out_of_range(format!("L = {len} outside 3..={}", BREAKDOWN_MAX_LEN - 2)));
    }
    let p = 1u64 << (len + 1);
    Ok(if len.is_multiple_of(2) {
        ((p - 2) / 3, (5 * p - 16) / 12)
    } else {
        ((p - 4) / 3, (5 * p - 8) / 12)
    })
}

/// `|K_max(L)|` from the Fibonacci recursion seeded with 2 and 3.
pub fn breakdown_kmax(len: usize) -> Result<BigCount> {
    if len < 2 {
        return Err(out_of_range(format!("L = {len} below 2")));
    }
    let (mut a, mut b) = (BigCount::from(2u32), BigCount::from(3u32));
    for _ in 2..len {
        let c = &a + &b;
        a = b;
        b = c;
    }
    Ok(a)
}

/// `|K_max(L)|` as the maximum over the recurrence, for cross-checking.
pub fn breakdown_kmax_checked(len: usize) -> Result<BigCount> {
    check_breakdown_len(len)?;
    let mut c = BreakdownCounter::new();
    Ok((0..=breakdown_qmax(len) / 2)
        .map(|q| c.unbounded(q))
        .max()
        .unwrap_or_else(BigCount::zero))
}

/// Size of the tJz sector with `q` spins, `C(L, q)`.
pub fn tjz_sector_size(len: usize, q: usize) -> Result<BigCount> {
    if q > len {
        return Err(out_of_range(format!("Q = {q} exceeds L = {len}")));
    }
    Ok(binomial(BigCount::from(len), BigCount::from(q)))
}

/// Configurations whose spin pattern starts with a fixed prefix of length `depth`.
pub fn tjz_cone_size(len: usize, depth: usize) -> Result<BigCount> {
    if depth > len {
        return Err(out_of_range(format!("depth {depth} exceeds L = {len}")));
    }
    let l = BigCount::from(len);
    Ok((0..=len - depth)
        .map(|k| (BigCount::one() << k) * binomial(l.clone(), BigCount::from(depth + k)))
        .sum())
}

pub fn tjz_num_sectors(len: usize) -> BigCount {
    (BigCount::one() << (len + 1)) - 1u32
}

fn binom(n: usize, k: i64) -> BigCount {
    if k < 0 || k as usize > n {
        BigCount::zero()
    } else {
        binomial(BigCount::from(n), BigCount::from(k as usize))
    }
}

/// Strings of `N` particles on `L` sites whose every prefix holds at least as
/// many particles as holes.
pub fn east_path_count(len: usize, particles: usize) -> Result<BigCount> {
    if particles > len {
        return Err(out_of_range(format!("N = {particles} exceeds L = {len}")));
    }
    let a = binom(len, particles as i64);
    let b = binom(len, particles as i64 + 1);
    Ok(if a > b { a - b } else { BigCount::zero() })
}

/// Configurations of the East region with `N0 - i` particles.
pub fn east_column_sum(n0: usize, i: usize) -> Result<BigCount> {
    if i >= n0 {
        return Err(out_of_range(format!("i = {i} outside 0..{n0}")));
    }
    let k = (n0 - i) as i64;
    Ok(binom(2 * n0, k) - binom(2 * n0, k - 1))
}

/// Configurations of the East region at `L = 2 N0`, `C(2N0, N0) - 1`.
pub fn east_region_size(n0: usize) -> Result<BigCount> {
    if n0 == 0 {
        return Err(out_of_range("N0 must be positive".to_string()));
    }
    Ok(binom(2 * n0, n0 as i64) - 1u32)
}

/// Pairs leaving the East region under the bath, `C(2N0-2, N0-1) - C(2N0-2, N0-2)`.
pub fn east_region_boundary(n0: usize) -> Result<BigCount> {
    if n0 == 0 {
        return Err(out_of_range("N0 must be positive".to_string()));
    }
    let n = 2 * n0 - 2;
    Ok(binom(n, n0 as i64 - 1) - binom(n, n0 as i64 - 2))
}

/// Asymptotic East conductance `1 / (2 (2 N0 - 1))`.
pub fn east_conductance_asymptotic(n0: usize) -> f64 {
    1.0 / (2.0 * (2.0 * n0 as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> BigCount {
        BigCount::from(v)
    }

    #[test]
    fn breakdown_examples() {
        assert_eq!(breakdown_sector_size(2, 2).unwrap(), n(2));
        assert_eq!(breakdown_sector_size(10, 4).unwrap(), n(5));
        for l in 1..20 {
            assert_eq!(breakdown_sector_size(0, l).unwrap(), n(1));
        }
        assert!(breakdown_sector_size(7, 2).is_err());
    }

    #[test]
    fn small_lists() {
        let list = |l: usize, qs: std::ops::RangeInclusive<u64>| -> Vec<BigCount> {
            qs.map(|q| breakdown_sector_size(q, l).unwrap()).collect()
        };
        assert_eq!(list(2, 0..=3), vec![n(1), n(1), n(2), n(1)]);
        assert_eq!(list(3, 4..=7), vec![n(3), n(2), n(3), n(1)]);
        assert_eq!(list(4, 8..=15), [4, 3, 5, 2, 5, 3, 4, 1].map(n).to_vec());
    }

    #[test]
    fn table_matches_recurrence_and_sums() {
        for l in 1..=12 {
            let t = breakdown_size_table(l).unwrap();
            let mut c = BreakdownCounter::new();
            for (q, &v) in t.iter().enumerate() {
                assert_eq!(c.sector_size(q as u64, l).unwrap(), n(v as u64));
            }
            assert_eq!(t.iter().map(|&v| v as u64).sum::<u64>(), 3u64.pow(l as u32));
        }
    }

    #[test]
    fn qstar_examples() {
        assert_eq!(breakdown_qstar(3).unwrap(), (4, 6));
        assert_eq!(breakdown_qstar(4).unwrap(), (10, 12));
    }

    #[test]
    fn kmax_examples() {
        assert_eq!(breakdown_kmax(4).unwrap(), n(5));
        assert_eq!(breakdown_kmax(5).unwrap(), n(8));
        for l in 2..=16 {
            assert_eq!(breakdown_kmax(l).unwrap(), breakdown_kmax_checked(l).unwrap());
        }
    }

    #[test]
    fn tjz_examples() {
        assert_eq!(tjz_cone_size(4, 1).unwrap(), n(40));
        assert_eq!(tjz_sector_size(5, 0).unwrap(), n(1));
        assert_eq!(tjz_cone_size(5, 0).unwrap(), n(243));
        assert_eq!(tjz_num_sectors(4), n(31));
    }

    #[test]
    fn east_examples() {
        assert_eq!(east_path_count(3, 2).unwrap(), n(2));
        for l in 1..10 {
            assert_eq!(east_path_count(l, l).unwrap(), n(1));
        }
        assert_eq!(east_column_sum(2, 0).unwrap(), n(2));
        assert_eq!(east_column_sum(2, 1).unwrap(), n(3));
        assert_eq!(east_region_size(2).unwrap(), n(5));
        assert_eq!(east_region_boundary(2).unwrap(), n(1));
        for n0 in 1..10 {
            let total: BigCount = (0..n0).map(|i| east_column_sum(n0, i).unwrap()).sum();
            assert_eq!(total, east_region_size(n0).unwrap());
        }
    }
}
