//! Nonparametric density estimation by maximum likelihood over Bernstein
//! polynomial (beta-mixture) models.
//!
//! A sample on a finite interval `[a, b]` is mapped to [0, 1] and modelled as
//! `f_B(t; p) = Σ_i p_i β_{mi}(t)`, where `β_{mi}` is the Beta(i+1, m-i+1)
//! density. Weights are fitted by EM ([`fit`]) and the degree `m` is chosen
//! from the profile log-likelihood by a change-point rule ([`degree`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod basis;
pub mod degree;
pub mod error;
pub mod fit;
pub mod model;
pub mod simulate;
pub mod special;
pub mod transform;

pub use baselines::{ecdf, kde, vitale_cdf, BandwidthRule, Ecdf, Kde, KernelConfig};
pub use basis::{elevate_degree, eval_basis, eval_basis_cdf, BasisRow};
pub use degree::{
    changepoint_select, lower_bound_mb, profile_loglik, select_degree, ChangePoint, DegreeGrid,
    DegreeSelection, ProfileMode,
};
pub use error::{Error, Result};
pub use fit::{apply_symmetry, em_fit, em_fit_from, init_weights, FitConfig, FitResult, InitScheme};
pub use model::{loglik, mixture_cdf, mixture_density, BernsteinModel, FitDiagnostics, MixtureWeights};
pub use transform::{choose_support, SupportMap, SupportSpec};

#[cfg(test)]
pub(crate) mod testutil {
    use rand::Rng;

    use crate::model::MixtureWeights;

    // 10-point Gauss-Legendre nodes and weights on [-1, 1]
    const NODES: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const WEIGHTS: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];

    /// Composite Gauss-Legendre rule over 400 panels.
    pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let panels = 400;
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * h;
            let half = 0.5 * h;
            for (x, w) in NODES.iter().zip(WEIGHTS) {
                total += w * half * (f(mid - half * x) + f(mid + half * x));
            }
        }
        total
    }

    pub fn random_weights(rng: &mut impl Rng, m: usize) -> MixtureWeights {
        let raw: Vec<f64> = (0..=m).map(|_| rng.random::<f64>() + 1e-3).collect();
        MixtureWeights::from_masses(raw).unwrap()
    }
}
