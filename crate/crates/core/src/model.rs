//! Bernstein polynomial densities: mixtures of beta(i+1, m-i+1) components.

use serde::{Deserialize, Serialize};

use crate::basis::{fill_basis, fill_basis_cdf};
use crate::error::{Error, Result};
use crate::transform::SupportMap;

/// Tolerance on `Σ w = 1` accepted by [`MixtureWeights::new`].
pub const SIMPLEX_TOL: f64 = 1e-10;

/// Mixture proportions `w_0, …, w_m` on the unit simplex. The degree is `len - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixtureWeights(Vec<f64>);

impl MixtureWeights {
    /// Validates a weight vector that already sums to one (within [`SIMPLEX_TOL`]).
    pub fn new(w: Vec<f64>) -> Result<Self> {
        let total = Self::check_masses(&w)?;
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(Self::rescaled(w, total))
    }

    /// Normalizes arbitrary non-negative masses with positive total.
    pub fn from_masses(w: Vec<f64>) -> Result<Self> {
        let total = Self::check_masses(&w)?;
        if total <= 0.0 {
            return Err(Error::domain("weights have zero total mass"));
        }
        Ok(Self::rescaled(w, total))
    }

    /// Equal weights `1/(m+1)`.
    pub fn uniform(m: usize) -> Self {
        MixtureWeights(vec![1.0 / (m + 1) as f64; m + 1])
    }

    fn check_masses(w: &[f64]) -> Result<f64> {
        if w.is_empty() {
            return Err(Error::domain("weight vector is empty"));
        }
        if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain(format!("weight {i} is {} (must be finite and >= 0)", w[i])));
        }
        Ok(w.iter().sum())
    }

    fn rescaled(mut w: Vec<f64>, total: f64) -> Self {
        if total != 1.0 {
            for v in &mut w {
                *v /= total;
            }
        }
        MixtureWeights(w)
    }

    pub(crate) fn from_vec_unchecked(w: Vec<f64>) -> Self {
        MixtureWeights(w)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for MixtureWeights {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MixtureWeights::new(v)
    }
}

impl From<MixtureWeights> for Vec<f64> {
    fn from(w: MixtureWeights) -> Vec<f64> {
        w.0
    }
}

/// Diagnostics of the EM run that produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Log-likelihood at the returned weights, on the unit-interval data.
    pub loglik: f64,
    pub n_iter: usize,
    pub converged: bool,
}

/// A Bernstein density on a finite support `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinModel {
    pub weights: MixtureWeights,
    pub support: SupportMap,
    /// `None` for models assembled by hand rather than fitted.
    pub fit: Option<FitDiagnostics>,
}

impl BernsteinModel {
    pub fn new(weights: MixtureWeights, support: SupportMap) -> Self {
        BernsteinModel { weights, support, fit: None }
    }

    pub fn degree(&self) -> usize {
        self.weights.degree()
    }

    /// Density on the raw scale; zero outside `[a, b]`.
    pub fn pdf(&self, x: f64) -> f64 {
        let (a, b) = (self.support.a(), self.support.b());
        if !(a..=b).contains(&x) {
            return 0.0;
        }
        mixture_density(&self.weights, self.support.unit(x)) / (b - a)
    }

    /// Distribution function on the raw scale.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.support.a() {
            return 0.0;
        }
        if x >= self.support.b() {
            return 1.0;
        }
        mixture_cdf(&self.weights, self.support.unit(x))
    }

    /// Mean of the fitted density, `a + (b-a)·Σ w_i (i+1)/(m+2)`.
    pub fn mean_estimate(&self) -> f64 {
        let m = self.degree() as f64;
        let unit: f64 = self
            .weights
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, w)| w * (i as f64 + 1.0) / (m + 2.0))
            .sum();
        self.support.raw(unit)
    }

    /// k-th raw moment on the raw scale, from the beta raw moments
    /// `E[T^k] = Π_{s<k} (i+1+s)/(m+2+s)` expanded binomially through the affine map.
    pub fn moment_estimate(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::domain("moment order must be >= 1"));
        }
        let unit_moments = unit_raw_moments(&self.weights, k as usize);
        let a = self.support.a();
        let width = self.support.width();
        let mut total = 0.0;
        let mut binom = 1.0;
        for (j, mu) in unit_moments.iter().enumerate() {
            if j > 0 {
                binom = binom * (k as usize + 1 - j) as f64 / j as f64;
            }
            total += binom * a.powi((k as usize - j) as i32) * width.powi(j as i32) * mu;
        }
        Ok(total)
    }
}

/// `E[T^j]` for j = 0..=k under the unit-interval mixture.
fn unit_raw_moments(w: &MixtureWeights, k: usize) -> Vec<f64> {
    let m = w.degree() as f64;
    let mut out = vec![0.0; k + 1];
    for (i, &wi) in w.as_slice().iter().enumerate() {
        let mut prod = 1.0;
        out[0] += wi;
        for (s, slot) in out.iter_mut().enumerate().skip(1) {
            let s = (s - 1) as f64;
            prod *= (i as f64 + 1.0 + s) / (m + 2.0 + s);
            *slot += wi * prod;
        }
    }
    out
}

/// `f_B(t) = Σ w_i β_{mi}(t)` for `t ∈ [0, 1]`.
pub fn mixture_density(w: &MixtureWeights, t: f64) -> f64 {
    let mut row = vec![0.0; w.degree() + 1];
    fill_basis(w.degree(), t.clamp(0.0, 1.0), &mut row);
    row.iter().zip(w.as_slice()).map(|(b, p)| b * p).sum()
}

/// `F_B(t) = Σ w_i 𝓑_{mi}(t)` for `t ∈ [0, 1]`.
pub fn mixture_cdf(w: &MixtureWeights, t: f64) -> f64 {
    let mut row = vec![0.0; w.degree() + 1];
    fill_basis_cdf(w.degree(), t.clamp(0.0, 1.0), &mut Vec::new(), &mut row);
    let v: f64 = row.iter().zip(w.as_slice()).map(|(c, p)| c * p).sum();
    v.clamp(0.0, 1.0)
}

/// Bernstein log-likelihood `Σ_j log f_B(x_j)` of unit-interval data.
///
/// Returns `f64::NEG_INFINITY` when the mixture density vanishes at some data
/// point; callers treat that as an infeasible model. Points outside [0, 1]
/// are a domain error.
pub fn loglik(w: &MixtureWeights, data: &[f64]) -> Result<f64> {
    let m = w.degree();
    let mut row = vec![0.0; m + 1];
    let mut total = 0.0;
    for (j, &x) in data.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("data point {j} = {x} is outside [0, 1]")));
        }
        fill_basis(m, x, &mut row);
        let f: f64 = row.iter().zip(w.as_slice()).map(|(b, p)| b * p).sum();
        if f <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += f.ln();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::elevate_degree;
    use crate::testutil::{integrate, random_weights};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> SupportMap {
        SupportMap::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn weights_validation() {
        assert!(MixtureWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(MixtureWeights::new(vec![0.5, 0.6]).is_err());
        assert!(MixtureWeights::new(vec![-0.1, 1.1]).is_err());
        assert!(MixtureWeights::new(vec![]).is_err());
        assert!(MixtureWeights::from_masses(vec![0.0, 0.0]).is_err());
        assert_eq!(MixtureWeights::from_masses(vec![1.0, 3.0]).unwrap().as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn pdf_examples() {
        let u = BernsteinModel::new(MixtureWeights::uniform(0), unit());
        assert_eq!(u.pdf(0.73), 1.0);
        assert_eq!(u.pdf(1.5), 0.0);
        let lin = BernsteinModel::new(MixtureWeights::new(vec![0.0, 1.0]).unwrap(), unit());
        assert!((lin.pdf(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pdf_integrates_to_one_on_shifted_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let w = random_weights(&mut rng, 10);
            let model = BernsteinModel::new(w, SupportMap::new(2.0, 5.0).unwrap());
            let area = integrate(|x| model.pdf(x), 2.0, 5.0);
            assert!((area - 1.0).abs() < 1e-8, "area {area}");
        }
    }

    #[test]
    fn cdf_examples_and_quadrature() {
        let u = BernsteinModel::new(MixtureWeights::uniform(0), unit());
        assert!((u.cdf(0.42) - 0.42).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [1usize, 6, 15] {
            let w = random_weights(&mut rng, m);
            let model = BernsteinModel::new(w, SupportMap::new(-1.0, 3.0).unwrap());
            assert_eq!(model.cdf(-1.0), 0.0);
            assert_eq!(model.cdf(3.0), 1.0);
            for k in 0..=100 {
                let x = -1.0 + 4.0 * k as f64 / 100.0;
                let q = integrate(|s| model.pdf(s), -1.0, x);
                assert!((model.cdf(x) - q).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn loglik_examples() {
        let data = [0.1, 0.5, 0.93];
        assert_eq!(loglik(&MixtureWeights::uniform(0), &data).unwrap(), 0.0);
        let w = MixtureWeights::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(loglik(&w, &[0.5]).unwrap(), 0.0);
        // density 2t vanishes at t = 0
        assert_eq!(loglik(&w, &[0.0, 0.5]).unwrap(), f64::NEG_INFINITY);
        assert!(loglik(&w, &[1.2]).is_err());
    }

    #[test]
    fn loglik_matches_direct_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in [1usize, 4, 9] {
            let w = random_weights(&mut rng, m);
            let data: Vec<f64> = (0..40).map(|_| rng.random::<f64>()).collect();
            let mut oracle = 0.0;
            for &x in &data {
                let mut f = 0.0;
                for i in 0..=m {
                    let c = (0..i).fold(1.0, |acc, s| acc * (m - s) as f64 / (s + 1) as f64);
                    f += w.as_slice()[i]
                        * (m + 1) as f64
                        * c
                        * x.powi(i as i32)
                        * (1.0 - x).powi((m - i) as i32);
                }
                oracle += f.ln();
            }
            assert!((loglik(&w, &data).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn mean_examples() {
        let u = BernsteinModel::new(MixtureWeights::uniform(0), unit());
        assert_eq!(u.mean_estimate(), 0.5);
        let mut one_hot = vec![0.0; 11];
        one_hot[4] = 1.0;
        let b57 = BernsteinModel::new(MixtureWeights::new(one_hot).unwrap(), unit());
        assert!((b57.mean_estimate() - 5.0 / 12.0).abs() < 1e-15);
        assert!((b57.moment_estimate(1).unwrap() - b57.mean_estimate()).abs() < 1e-15);
        assert!((u.moment_estimate(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(u.moment_estimate(0).is_err());
    }

    #[test]
    fn moments_match_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for m in [0usize, 3, 12] {
            let w = random_weights(&mut rng, m);
            let model = BernsteinModel::new(w, SupportMap::new(-2.0, 4.5).unwrap());
            let mean_q = integrate(|x| x * model.pdf(x), -2.0, 4.5);
            assert!((model.mean_estimate() - mean_q).abs() < 1e-8);
            for k in 1..=4u32 {
                let q = integrate(|x| x.powi(k as i32) * model.pdf(x), -2.0, 4.5);
                let got = model.moment_estimate(k).unwrap();
                assert!((got - q).abs() < 1e-8 * q.abs().max(1.0), "k={k}: {got} vs {q}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn loglik_invariant_under_elevation(seed in 0u64..1_000_000, m in 0usize..12, r in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_weights(&mut rng, m);
            let data: Vec<f64> = (0..25).map(|_| rng.random::<f64>()).collect();
            let up = elevate_degree(&w, r).unwrap();
            let l0 = loglik(&w, &data).unwrap();
            let l1 = loglik(&up, &data).unwrap();
            prop_assert!((l0 - l1).abs() < 1e-8);
            let s = unit();
            let m0 = BernsteinModel::new(w, s);
            let m1 = BernsteinModel::new(up, s);
            prop_assert!((m0.mean_estimate() - m1.mean_estimate()).abs() < 1e-10);
        }

        #[test]
        fn cdf_monotone(seed in 0u64..1_000_000, m in 0usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = BernsteinModel::new(random_weights(&mut rng, m), unit());
            let mut prev = 0.0;
            for k in 0..=200 {
                let c = model.cdf(k as f64 / 200.0);
                prop_assert!(c >= prev - 1e-15);
                prev = c;
            }
            prop_assert_eq!(model.cdf(1.0), 1.0);
        }
    }
}
