use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sim::local_sweeps;
use crate::chain::{BathSide, Configuration, Model, ModelKind};
use crate::error::{Error, Result};

/// Linear binary de Bruijn string of order `n` as tJz letters (1 = up, 2 = down).
///
/// Length `2^n + n - 1`; every length-`n` spin pattern occurs exactly once.
pub fn de_bruijn_dictionary(n: usize) -> Vec<u8> {
    assert!((1..=20).contains(&n), "order must be in 1..=20");
    let mut a = vec![0u8; n + 1];
    let mut seq = Vec::with_capacity(1 << n);
    fn gen(t: usize, p: usize, n: usize, a: &mut [u8], seq: &mut Vec<u8>) {
        if t > n {
            if n.is_multiple_of(p) {
                seq.extend_from_slice(&a[1..=p]);
            }
            return;
        }
        a[t] = a[t - p];
        gen(t + 1, p, n, a, seq);
        for j in (a[t - p] + 1)..2 {
            a[t] = j;
            gen(t + 1, t, n, a, seq);
        }
    }
    gen(1, 1, n, &mut a, &mut seq);
    let head: Vec<u8> = seq[..n - 1].to_vec();
    seq.extend(head);
    seq.into_iter().map(|b| b + 1).collect()
}

/// Test state `0^m  psi_A  tail` for the ergodicity census.
///
/// `m = 2^n + n - 1`; `tail` is the dictionary or, without it, `m` empty sites.
pub fn ergodicity_state(psi_a: &[u8], with_dictionary: bool) -> Vec<u8> {
    let n = psi_a.len();
    let m = (1usize << n) + n - 1;
    let mut s = vec![0u8; m];
    s.extend_from_slice(psi_a);
    if with_dictionary {
        s.extend(de_bruijn_dictionary(n));
    } else {
        s.extend(std::iter::repeat_n(0, m));
    }
    s
}

/// Distinct fully occupied spin patterns seen on the block `A` (the middle
/// `n` sites of [`ergodicity_state`]) during `sweeps` bulk sweeps.
pub fn pattern_census(psi_a: &[u8], with_dictionary: bool, sweeps: u64, seed: u64) -> Result<usize> {
    if psi_a.is_empty() || psi_a.iter().any(|&a| a == 0 || a > 2) {
        return Err(Error::InvalidConfiguration(
            "psi_A must be a nonempty spin string".into(),
        ));
    }
    let mut letters = ergodicity_state(psi_a, with_dictionary);
    let n = psi_a.len();
    let m = (1usize << n) + n - 1;
    let model = Model::new(ModelKind::Tjz, letters.len())?.with_bath_side(BathSide::None)?;
    model.validate(&Configuration::new(letters.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    for _ in 0..sweeps {
        local_sweeps(&model, &mut letters, 1, &mut rng);
        let block = &letters[m..m + n];
        if block.iter().all(|&a| a != 0) {
            seen.insert(block.to_vec());
            if seen.len() == 1 << n {
                break;
            }
        }
    }
    Ok(seen.len())
}
