//! Shared test oracles.

use std::collections::BTreeSet;

use oscidiff::resonance::{saturate_capped, WaveVector, DEFAULT_MAX_ROUNDS, DEFAULT_MAX_SIZE};
use oscidiff::Error;

/// Naive integer saturation: `2 omega = kappa^2`, every quintuple enumerated.
pub fn oracle(input: &[i64], max_rounds: usize, max_size: usize) -> Result<(Vec<i64>, usize, BTreeSet<(i64, i64, i64)>), (usize, usize)> {
    let res = |k: i64, two_w: i64| two_w == k * k;
    let mut k: Vec<i64> = input.to_vec();
    let mut rounds = 0;
    loop {
        let r = k.len();
        let mut new = BTreeSet::new();
        for i in 0..r {
            for j in 0..r {
                for l in 0..r {
                    let km = k[i] - k[j] + k[l];
                    let wm = k[i] * k[i] - k[j] * k[j] + k[l] * k[l];
                    if res(km, wm) {
                        new.insert(km);
                        continue;
                    }
                    for p in 0..r {
                        for q in 0..r {
                            let (a, wa) = (km - k[p] + k[q], wm - k[p] * k[p] + k[q] * k[q]);
                            if res(a, wa) {
                                new.insert(a);
                            }
                            let (b, wb) = (k[p] - km + k[q], k[p] * k[p] - wm + k[q] * k[q]);
                            if res(b, wb) {
                                new.insert(b);
                            }
                        }
                    }
                }
            }
        }
        let new: Vec<i64> = new.into_iter().filter(|v| !k.contains(v)).collect();
        if new.is_empty() {
            break;
        }
        if rounds == max_rounds {
            return Err((max_rounds, k.len() + new.len()));
        }
        k.extend(new);
        rounds += 1;
        if k.len() > max_size {
            return Err((rounds, k.len()));
        }
    }
    let mut n = BTreeSet::new();
    for &a in &k {
        for &b in &k {
            for &c in &k {
                let km = a - b + c;
                if !res(km, a * a - b * b + c * c) {
                    n.insert((a, b, c));
                }
            }
        }
    }
    Ok((k, rounds, n))
}

pub fn subsets(pool: &[i64], size: usize) -> Vec<Vec<i64>> {
    if size == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in pool.iter().enumerate() {
        for mut rest in subsets(&pool[i + 1..], size - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Compares `saturate` and the nonresonant triples with [`oracle`] on every
/// subset of size at most 4 of the nonzero integers in `[-5, 5]`; panics on a
/// mismatch. Returns the number of inputs and of saturation failures.
pub fn exhaustive_resonance_check() -> (usize, usize) {
    let pool: Vec<i64> = (-5..=5).filter(|&x| x != 0).collect();
    let mut checked = 0;
    let mut failures = 0;
    for size in 1..=4 {
        for input in subsets(&pool, size) {
            let vecs: Vec<WaveVector> = input.iter().map(|&x| WaveVector::scalar(x as f64)).collect();
            let got = saturate_capped(&vecs, DEFAULT_MAX_ROUNDS, DEFAULT_MAX_SIZE);
            match (got, oracle(&input, DEFAULT_MAX_ROUNDS, DEFAULT_MAX_SIZE)) {
                (Ok(rs), Ok((k, rounds, n))) => {
                    let ks: Vec<i64> = rs.k.iter().map(|v| v.components[0] as i64).collect();
                    assert_eq!(&ks[..input.len()], &input[..]);
                    assert_eq!(ks.iter().collect::<BTreeSet<_>>(), k.iter().collect::<BTreeSet<_>>(), "{input:?}");
                    assert_eq!(rs.k_star, rounds, "{input:?}");
                    let got_n: BTreeSet<(i64, i64, i64)> =
                        rs.n.iter().map(|nu| (ks[nu.indices.0], ks[nu.indices.1], ks[nu.indices.2])).collect();
                    assert_eq!(got_n, n, "{input:?}");
                }
                (Err(Error::SaturationFailure { rounds, size }), Err(expected)) => {
                    assert_eq!((rounds, size), expected, "{input:?}");
                    failures += 1;
                }
                (a, b) => panic!("{input:?}: {a:?} vs {b:?}"),
            }
            checked += 1;
        }
    }
    (checked, failures)
}
