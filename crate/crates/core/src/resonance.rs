//! Multi-index arithmetic for multiphase data: resonance tests, saturation of
//! the wave-vector set, the nonresonant triples and the nonresonance check.

use crate::error::{Error, Result};

/// Resonance tolerance on `|omega_mu - |kappa_mu|^2 / 2|`, relative to the
/// frequency scale of the multi-index (at least 1).
pub const TOL_RES: f64 = 1e-9;
/// Detunings between `TOL_RES` and this (same scaling) are rejected as near resonant.
pub const NEAR_RES: f64 = 1e-6;
pub const DEFAULT_MAX_ROUNDS: usize = 8;
/// Size cap on the saturated set; growth beyond it is reported as saturation failure.
pub const DEFAULT_MAX_SIZE: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct WaveVector {
    pub components: Vec<f64>,
}

impl WaveVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("wave vector needs finite components".into()));
        }
        Ok(Self { components })
    }

    pub fn scalar(k: f64) -> Self {
        Self { components: vec![k] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum()
    }

    pub fn omega(&self) -> f64 {
        0.5 * self.norm_sqr()
    }

    fn axpy(&mut self, s: f64, other: &WaveVector) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            *a += s * b;
        }
    }

    fn approx_eq(&self, other: &WaveVector) -> bool {
        let scale = self.norm_sqr().max(other.norm_sqr()).sqrt().max(1.0);
        self.components.iter().zip(&other.components).all(|(a, b)| (a - b).abs() <= TOL_RES * scale)
    }
}

/// `nu = (i, j, k)` with `omega_nu != |kappa_nu|^2 / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonresonantTriple {
    pub indices: (usize, usize, usize),
    pub kappa: WaveVector,
    pub omega: f64,
    pub omega_star: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceStructure {
    /// Saturated wave vectors; the first `m_input` are the input phases.
    pub k: Vec<WaveVector>,
    pub omegas: Vec<f64>,
    pub n: Vec<NonresonantTriple>,
    pub k_star: usize,
    pub m_input: usize,
}

/// `(kappa_mu, omega_mu)` for a multi-index of odd length with alternating signs.
pub fn kappa_omega_of_multiindex(mu: &[usize], k: &[WaveVector]) -> Result<(WaveVector, f64)> {
    if mu.len() % 2 == 0 {
        return Err(Error::EvenMultiIndex(mu.len()));
    }
    if let Some(&bad) = mu.iter().find(|&&m| m >= k.len()) {
        return Err(Error::IndexOutOfRange { index: bad, len: k.len() });
    }
    let mut kappa = WaveVector { components: vec![0.0; k[mu[0]].dim()] };
    let mut omega = 0.0;
    for (i, &m) in mu.iter().enumerate() {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        kappa.axpy(s, &k[m]);
        omega += s * k[m].omega();
    }
    Ok((kappa, omega))
}

fn detuning_scale(mu: &[usize], k: &[WaveVector]) -> f64 {
    mu.iter().map(|&m| k[m].omega()).sum::<f64>().max(1.0)
}

/// `omega_mu = |kappa_mu|^2 / 2` within the resonance tolerance.
pub fn is_resonant(mu: &[usize], k: &[WaveVector]) -> Result<bool> {
    let (kappa, omega) = kappa_omega_of_multiindex(mu, k)?;
    Ok((omega - kappa.omega()).abs() <= TOL_RES * detuning_scale(mu, k))
}

fn validate_input(input: &[WaveVector]) -> Result<()> {
    let Some(first) = input.first() else {
        return Err(Error::InvalidParameter("no wave vectors".into()));
    };
    for (i, v) in input.iter().enumerate() {
        if v.dim() != first.dim() {
            return Err(Error::InvalidParameter("wave vectors of mixed dimension".into()));
        }
        if v.components.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidParameter("zero wave vector".into()));
        }
        if input[..i].iter().any(|w| w.approx_eq(v)) {
            return Err(Error::InvalidParameter(format!("repeated wave vector {:?}", v.components)));
        }
    }
    Ok(())
}

/// One augmentation pass over `k`: resonant triples (rule i), then for each
/// nonresonant triple `mu` in lexicographic order and each `(p, q)`, the
/// bracketings `(mu, p, q)` and `(p, mu, q)` (rule ii). Triples with equal
/// `(kappa_mu, omega_mu)` yield the same candidates and are visited once.
fn augment(k: &[WaveVector]) -> Vec<WaveVector> {
    let r = k.len();
    let mut new: Vec<WaveVector> = Vec::new();
    let consider = |cand: WaveVector, omega: f64, scale: f64, new: &mut Vec<WaveVector>| {
        if (omega - cand.omega()).abs() <= TOL_RES * scale
            && !k.iter().any(|v| v.approx_eq(&cand))
            && !new.iter().any(|v| v.approx_eq(&cand))
        {
            new.push(cand);
        }
    };
    let mut nonres: Vec<(WaveVector, f64, f64)> = Vec::new();
    for i in 0..r {
        for j in 0..r {
            for l in 0..r {
                let mu = [i, j, l];
                let (kappa, omega) = kappa_omega_of_multiindex(&mu, k).expect("valid triple");
                let scale = detuning_scale(&mu, k);
                if (omega - kappa.omega()).abs() <= TOL_RES * scale {
                    consider(kappa, omega, scale, &mut new);
                } else if !nonres.iter().any(|(kv, w, _)| kv.approx_eq(&kappa) && (w - omega).abs() <= TOL_RES * scale) {
                    nonres.push((kappa, omega, scale));
                }
            }
        }
    }
    for (kappa_mu, omega_mu, scale_mu) in &nonres {
        for p in 0..r {
            for q in 0..r {
                let scale = scale_mu + k[p].omega() + k[q].omega();
                let mut a = kappa_mu.clone();
                a.axpy(-1.0, &k[p]);
                a.axpy(1.0, &k[q]);
                consider(a, omega_mu - k[p].omega() + k[q].omega(), scale, &mut new);
                let mut b = k[p].clone();
                b.axpy(-1.0, kappa_mu);
                b.axpy(1.0, &k[q]);
                consider(b, k[p].omega() - omega_mu + k[q].omega(), scale, &mut new);
            }
        }
    }
    new
}

/// All nonresonant triples of `k` in lexicographic order.
pub fn nonresonant_triples(k: &[WaveVector]) -> Result<Vec<NonresonantTriple>> {
    let r = k.len();
    let mut out = Vec::new();
    for i in 0..r {
        for j in 0..r {
            for l in 0..r {
                let mu = [i, j, l];
                let (kappa, omega) = kappa_omega_of_multiindex(&mu, k)?;
                let omega_star = kappa.omega();
                let delta = omega - omega_star;
                let scale = detuning_scale(&mu, k);
                if delta.abs() <= TOL_RES * scale {
                    continue;
                }
                if delta.abs() < NEAR_RES * scale {
                    return Err(Error::NearResonance { triple: (i, j, l), delta });
                }
                out.push(NonresonantTriple { indices: (i, j, l), kappa, omega, omega_star, delta });
            }
        }
    }
    Ok(out)
}

pub fn saturate(input: &[WaveVector], max_rounds: usize) -> Result<ResonanceStructure> {
    saturate_capped(input, max_rounds, DEFAULT_MAX_SIZE)
}

/// Iterates the augmentation until the set stops growing. Fails if it still
/// grows after `max_rounds` rounds or exceeds `max_size` vectors.
pub fn saturate_capped(input: &[WaveVector], max_rounds: usize, max_size: usize) -> Result<ResonanceStructure> {
    validate_input(input)?;
    let mut k = input.to_vec();
    let mut k_star = 0;
    loop {
        let new = augment(&k);
        if new.is_empty() {
            break;
        }
        if k_star == max_rounds {
            return Err(Error::SaturationFailure { rounds: max_rounds, size: k.len() + new.len() });
        }
        k.extend(new);
        k_star += 1;
        if k.len() > max_size {
            return Err(Error::SaturationFailure { rounds: k_star, size: k.len() });
        }
    }
    let n = nonresonant_triples(&k)?;
    let omegas = k.iter().map(WaveVector::omega).collect();
    Ok(ResonanceStructure { k, omegas, n, k_star, m_input: input.len() })
}

/// Which of the two nonresonance inequalities failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assumption2Violation {
    /// `omega*_nu - omega_q + omega_r = |kappa_nu - kappa_q + kappa_r|^2 / 2`.
    First { nu: usize, q: usize, r: usize },
    /// `omega_p - omega*_nu + omega_r = |kappa_p - kappa_nu + kappa_r|^2 / 2`.
    Second { nu: usize, p: usize, r: usize },
}

/// Checks both nonresonance inequalities for every `nu` in `N` and `q != r`.
pub fn check_assumption2(rs: &ResonanceStructure) -> (bool, Vec<Assumption2Violation>) {
    let k = &rs.k;
    let r_len = k.len();
    let mut out = Vec::new();
    for (idx, nu) in rs.n.iter().enumerate() {
        for q in 0..r_len {
            for r in 0..r_len {
                if q == r {
                    continue;
                }
                let mut v = nu.kappa.clone();
                v.axpy(-1.0, &k[q]);
                v.axpy(1.0, &k[r]);
                let lhs = nu.omega_star - rs.omegas[q] + rs.omegas[r];
                let scale = (nu.omega_star + rs.omegas[q] + rs.omegas[r]).max(1.0);
                if (lhs - v.omega()).abs() <= TOL_RES * scale {
                    out.push(Assumption2Violation::First { nu: idx, q, r });
                }
            }
        }
        for p in 0..r_len {
            for r in 0..r_len {
                let mut v = k[p].clone();
                v.axpy(-1.0, &nu.kappa);
                v.axpy(1.0, &k[r]);
                let lhs = rs.omegas[p] - nu.omega_star + rs.omegas[r];
                let scale = (nu.omega_star + rs.omegas[p] + rs.omegas[r]).max(1.0);
                if (lhs - v.omega()).abs() <= TOL_RES * scale {
                    out.push(Assumption2Violation::Second { nu: idx, p, r });
                }
            }
        }
    }
    (out.is_empty(), out)
}

impl ResonanceStructure {
    /// Scalar wave numbers of a one-dimensional structure.
    pub fn kappas_1d(&self) -> Result<Vec<f64>> {
        self.k
            .iter()
            .map(|v| match v.components.as_slice() {
                [x] => Ok(*x),
                _ => Err(Error::InvalidParameter("expected one-dimensional wave vectors".into())),
            })
            .collect()
    }

    /// Index of the vector equal to `v`, if any.
    pub fn find(&self, v: &WaveVector) -> Option<usize> {
        self.k.iter().position(|w| w.approx_eq(v))
    }

    /// Resonant triples `(k, l, m)` with `kappa_k - kappa_l + kappa_m = kappa_r`.
    pub fn resonant_triples_for(&self, r: usize) -> Vec<(usize, usize, usize)> {
        let len = self.k.len();
        let mut out = Vec::new();
        for i in 0..len {
            for j in 0..len {
                for l in 0..len {
                    let mu = [i, j, l];
                    let (kappa, _) = kappa_omega_of_multiindex(&mu, &self.k).expect("valid triple");
                    if kappa.approx_eq(&self.k[r]) && is_resonant(&mu, &self.k).expect("valid triple") {
                        out.push((i, j, l));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k1(v: &[f64]) -> Vec<WaveVector> {
        v.iter().map(|&x| WaveVector::scalar(x)).collect()
    }

    #[test]
    fn multiindex_arithmetic() {
        let k = k1(&[1.0, -1.0]);
        let (kap, om) = kappa_omega_of_multiindex(&[0], &k).unwrap();
        assert_eq!((kap.components[0], om), (1.0, 0.5));
        let (kap, om) = kappa_omega_of_multiindex(&[0, 1, 0], &k).unwrap();
        assert_eq!((kap.components[0], om), (3.0, 0.5));
        let (kap, om) = kappa_omega_of_multiindex(&[1, 1, 1], &k).unwrap();
        assert_eq!((kap.components[0], om), (-1.0, 0.5));
        assert!(matches!(kappa_omega_of_multiindex(&[0, 1], &k), Err(Error::EvenMultiIndex(2))));
        assert!(matches!(kappa_omega_of_multiindex(&[], &k), Err(Error::EvenMultiIndex(0))));
        assert!(matches!(kappa_omega_of_multiindex(&[0, 2, 0], &k), Err(Error::IndexOutOfRange { index: 2, .. })));
    }

    #[test]
    fn resonance_examples() {
        let k = k1(&[1.0, -1.0]);
        assert!(!is_resonant(&[0, 1, 0], &k).unwrap());
        assert!(is_resonant(&[0, 0, 1], &k).unwrap());
        assert!(is_resonant(&[1, 1, 0], &k).unwrap());
    }

    #[test]
    fn resonance_matches_product_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-6i32..=6) as f64).collect();
            let k = k1(&v);
            let prod = (v[0] - v[1]) * (v[2] - v[1]);
            assert_eq!(is_resonant(&[0, 1, 2], &k).unwrap(), prod == 0.0, "{v:?}");
            let (kap, om) = kappa_omega_of_multiindex(&[0, 1, 2], &k).unwrap();
            assert_eq!(kap.omega() - om, prod);
        }
    }

    #[test]
    fn two_phase_structure() {
        let kappa = 0.7;
        let rs = saturate(&k1(&[kappa, -kappa]), DEFAULT_MAX_ROUNDS).unwrap();
        assert_eq!(rs.k.len(), 2);
        assert_eq!(rs.k_star, 0);
        assert_eq!(rs.n.len(), 2);
        assert_eq!(rs.n[0].indices, (0, 1, 0));
        assert_eq!(rs.n[1].indices, (1, 0, 1));
        assert!((rs.n[0].kappa.components[0] - 3.0 * kappa).abs() < 1e-15);
        assert!((rs.n[1].kappa.components[0] + 3.0 * kappa).abs() < 1e-15);
        for nu in &rs.n {
            assert!((nu.delta + 4.0 * kappa * kappa).abs() < 1e-14);
        }
        let unit = saturate(&k1(&[1.0, -1.0]), 8).unwrap();
        assert_eq!(unit.n[0].delta, -4.0);
        assert!(check_assumption2(&rs).0);
    }

    #[test]
    fn single_phase_has_no_nonresonant_triples() {
        let rs = saturate(&k1(&[2.5]), 8).unwrap();
        assert_eq!(rs.k.len(), 1);
        assert!(rs.n.is_empty());
        assert!(check_assumption2(&rs).0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(saturate(&k1(&[1.0, 1.0]), 8).is_err());
        assert!(saturate(&k1(&[0.0]), 8).is_err());
        assert!(saturate(&[], 8).is_err());
    }

    #[test]
    fn generic_real_inputs_saturate_immediately() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let rs = saturate(&k1(&v), 8).unwrap();
            assert_eq!(rs.k_star, 0);
            assert_eq!(rs.k.len(), 3);
            assert!(check_assumption2(&rs).0);
            // idempotent
            let again = saturate(&rs.k, 8).unwrap();
            assert_eq!(again.k, rs.k);
            assert_eq!(again.k_star, 0);
        }
    }

    #[test]
    fn nonresonant_detunings_are_bounded_away_from_zero() {
        let rs = saturate(&k1(&[1.0, -2.0, 3.5]), 8).unwrap();
        for nu in &rs.n {
            assert!(nu.delta.abs() > TOL_RES);
            assert_eq!(nu.omega_star, nu.kappa.omega());
        }
    }

    #[test]
    fn one_dimensional_violation_when_kappa_nu_is_in_k() {
        // kappa = 2 - 1 + 2 = 3 is in K although (1, 0, 1) is nonresonant
        let rs = ResonanceStructure {
            k: k1(&[1.0, 2.0, 3.0]),
            omegas: vec![0.5, 2.0, 4.5],
            n: nonresonant_triples(&k1(&[1.0, 2.0, 3.0])).unwrap(),
            k_star: 0,
            m_input: 3,
        };
        let (ok, violations) = check_assumption2(&rs);
        assert!(!ok);
        let idx = rs.n.iter().position(|nu| nu.indices == (1, 0, 1)).unwrap();
        assert!(violations.contains(&Assumption2Violation::First { nu: idx, q: 2, r: 0 }));
    }

    #[test]
    fn two_dimensional_violation_is_detected() {
        // (kappa_nu - kappa_q) . (kappa_r - kappa_q) = 0 with kappa_nu not in K
        let k = vec![
            WaveVector::new(vec![1.0, 0.0]).unwrap(),
            WaveVector::new(vec![0.0, 1.0]).unwrap(),
            WaveVector::new(vec![1.0, 1.0]).unwrap(),
        ];
        let n = nonresonant_triples(&k).unwrap();
        let rs = ResonanceStructure { omegas: k.iter().map(WaveVector::omega).collect(), k, n, k_star: 0, m_input: 3 };
        let (ok, violations) = check_assumption2(&rs);
        assert!(!ok);
        for v in &violations {
            if let Assumption2Violation::First { nu, q, r } = *v {
                let d: f64 = (0..2)
                    .map(|c| {
                        (rs.n[nu].kappa.components[c] - rs.k[q].components[c])
                            * (rs.k[r].components[c] - rs.k[q].components[c])
                    })
                    .sum();
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resonant_triples_of_two_phase() {
        let rs = saturate(&k1(&[1.0, -1.0]), 8).unwrap();
        let t = rs.resonant_triples_for(0);
        assert_eq!(t, vec![(0, 0, 0), (0, 1, 1), (1, 1, 0)]);
    }

    proptest::proptest! {
        #[test]
        fn saturated_set_is_closed(v in proptest::collection::vec(-40i32..=40, 1..4)) {
            let k = k1(&v.iter().map(|&x| x as f64 / 8.0).collect::<Vec<_>>());
            let Ok(rs) = saturate(&k, DEFAULT_MAX_ROUNDS) else { return Ok(()) };
            let r = rs.k.len();
            for i in 0..r {
                for j in 0..r {
                    for l in 0..r {
                        if is_resonant(&[i, j, l], &rs.k).unwrap() {
                            let (kap, _) = kappa_omega_of_multiindex(&[i, j, l], &rs.k).unwrap();
                            proptest::prop_assert!(rs.find(&kap).is_some());
                        }
                    }
                }
            }
            for nu in &rs.n {
                proptest::prop_assert!(nu.delta != 0.0);
            }
        }
    }
}
