//! Degree selection: a moment-based lower bound for `m`, the profile
//! log-likelihood over a grid of consecutive degrees, and a change-point rule
//! on its increments.
//!
//! The increments `y_i = ℓ(m_i) - ℓ(m_{i-1})` are treated as two runs of
//! exponentials with a larger mean before the change point `τ` and a smaller
//! one after it; `τ̂` maximizes the likelihood ratio
//! `R(τ) = k log(S_k/k) - τ log(S_τ/τ) - (k-τ) log((S_k - S_τ)/(k-τ))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::elevate_degree;
use crate::error::{Error, Result};
use crate::fit::{em_fit, em_fit_from, FitConfig, FitResult};
use crate::special::mean_var;

/// Floor applied to profile increments before taking logarithms.
pub const INCREMENT_FLOOR: f64 = 1e-12;

/// Largest mean increment after the change point for which an automatic grid
/// is accepted. Past the optimal degree, twice an increment behaves roughly
/// like a one-degree-of-freedom chi-square, whose half has mean 1/2.
pub const TAIL_MEAN_LIMIT: f64 = 1.0;

/// Automatic grids are never extended beyond this degree.
pub const MAX_AUTO_DEGREE: usize = 400;

/// Consecutive degrees `m0, m0+1, …, m0+k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct DegreeGrid {
    m0: usize,
    k: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    m0: usize,
    k: usize,
}

impl TryFrom<RawGrid> for DegreeGrid {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        DegreeGrid::new(r.m0, r.k)
    }
}

impl DegreeGrid {
    pub fn new(m0: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain(format!("degree grid needs k >= 2, got {k}")));
        }
        Ok(DegreeGrid { m0, k })
    }

    /// Grid built from a lower bound `m_b`: it starts at `max(1, ⌊m_b/2⌋)` so the
    /// change point usually has room on both sides, and spans
    /// `k = min(max(20, 2 m_b), 100)` steps.
    pub fn from_lower_bound(mb: usize) -> Self {
        let m0 = (mb / 2).max(1);
        let k = (2 * mb).clamp(20, 100);
        DegreeGrid { m0, k }
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn max_degree(&self) -> usize {
        self.m0 + self.k
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> {
        self.m0..=self.m0 + self.k
    }
}

/// `max{⌈ρ - 3⌉, 1}` where `ρ = μ(1-μ)/σ²`.
///
/// Values of `ρ - 3` within a relative 1e-9 of an integer are snapped to it
/// first, so that rounding noise in `ρ` does not push the ceiling up by one.
pub fn mb_from_rho(rho: f64) -> usize {
    let x = rho - 3.0;
    let nearest = x.round();
    let x = if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) { nearest } else { x };
    let c = x.ceil();
    if c < 1.0 {
        1
    } else {
        c as usize
    }
}

/// Lower bound from population moments of a distribution on [0, 1].
pub fn mb_from_moments(mean: f64, variance: f64) -> Result<usize> {
    if !(variance > 0.0) || !(0.0..=1.0).contains(&mean) {
        return Err(Error::domain(format!("invalid moments: mean {mean}, variance {variance}")));
    }
    Ok(mb_from_rho(mean * (1.0 - mean) / variance))
}

/// Sample lower bound `m̂_b` for data on [0, 1].
///
/// With `jackknife`, `ρ̂` is replaced by `n ρ̂ - ((n-1)/n) Σ_i ρ̂_{-i}`, where the
/// leave-one-out ratios come from downdated mean and sum of squares.
pub fn lower_bound_mb(data: &[f64], jackknife: bool) -> Result<usize> {
    let n = data.len();
    if n < 2 {
        return Err(Error::domain("lower bound needs at least two points"));
    }
    let (mean, var) = mean_var(data);
    if !(var > 0.0) {
        return Err(Error::domain("lower bound undefined for zero sample variance"));
    }
    let rho = mean * (1.0 - mean) / var;
    if !jackknife {
        return Ok(mb_from_rho(rho));
    }
    if n < 3 {
        return Err(Error::domain("jackknife lower bound needs at least three points"));
    }
    let nf = n as f64;
    let ss = var * (nf - 1.0);
    let mut loo_sum = 0.0;
    for &x in data {
        let d = x - mean;
        let m_i = mean - d / (nf - 1.0);
        let ss_i = ss - d * d * nf / (nf - 1.0);
        if !(ss_i > 0.0) {
            return Err(Error::domain("leave-one-out sample has zero variance"));
        }
        loo_sum += m_i * (1.0 - m_i) / (ss_i / (nf - 2.0));
    }
    let rho_j = nf * rho - (nf - 1.0) / nf * loo_sum;
    Ok(mb_from_rho(rho_j))
}

/// How successive degrees of a profile are initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    /// Degree `m_i` starts from the elevated optimum at `m_{i-1}`. Sequential.
    #[default]
    Warm,
    /// Every degree starts from `cfg.init`. Degrees are fitted in parallel.
    Cold,
}

/// Fits every degree of the grid.
pub fn profile_fits(
    data: &[f64],
    grid: &DegreeGrid,
    cfg: &FitConfig,
    mode: ProfileMode,
) -> Result<Vec<FitResult>> {
    let mut fits = Vec::with_capacity(grid.k + 1);
    extend_profile(data, &mut fits, grid.m0, grid.max_degree(), cfg, mode)?;
    Ok(fits)
}

/// Appends fits for degrees `first + fits.len() ..= last`.
fn extend_profile(
    data: &[f64],
    fits: &mut Vec<FitResult>,
    first: usize,
    last: usize,
    cfg: &FitConfig,
    mode: ProfileMode,
) -> Result<()> {
    let next = first + fits.len();
    match mode {
        ProfileMode::Cold => {
            let degrees: Vec<usize> = (next..=last).collect();
            let more: Vec<FitResult> =
                degrees.par_iter().map(|&m| em_fit(data, m, cfg)).collect::<Result<_>>()?;
            fits.extend(more);
        }
        ProfileMode::Warm => {
            for m in next..=last {
                let fit = match fits.last() {
                    None => em_fit(data, m, cfg)?,
                    Some(prev) => {
                        let start = elevate_degree(&prev.weights, 1)?;
                        match em_fit_from(data, m, cfg, &start) {
                            Err(Error::Infeasible(_)) => em_fit(data, m, cfg)?,
                            other => other?,
                        }
                    }
                };
                fits.push(fit);
            }
        }
    }
    Ok(())
}

/// Profile log-likelihood `ℓ(m)` over the grid.
pub fn profile_loglik(
    data: &[f64],
    grid: &DegreeGrid,
    cfg: &FitConfig,
    mode: ProfileMode,
) -> Result<Vec<f64>> {
    Ok(profile_fits(data, grid, cfg, mode)?.into_iter().map(|f| f.loglik).collect())
}

/// Result of the change-point scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    /// Index into the grid, in `1..k`.
    pub tau_hat: usize,
    /// `R(τ)` for `τ = 1..k-1`.
    pub r: Vec<f64>,
    /// Set when `ℓ_k = ℓ_0`, in which case `tau_hat` is 1.
    pub flat: bool,
}

/// Profile increments `ℓ_i - ℓ_{i-1}`.
pub fn increments(profile: &[f64]) -> Vec<f64> {
    profile.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Change-point scan over a profile of length `k+1`, returning the smallest
/// maximizer of `R(τ)` for `τ = 1..k-1`.
pub fn changepoint_select(profile: &[f64]) -> Result<ChangePoint> {
    changepoint_with_floor(profile, INCREMENT_FLOOR)
}

fn changepoint_with_floor(profile: &[f64], floor: f64) -> Result<ChangePoint> {
    if profile.len() < 3 {
        return Err(Error::domain(format!(
            "change-point scan needs a profile of at least 3 values, got {}",
            profile.len()
        )));
    }
    if let Some(i) = profile.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("profile value {i} is not finite")));
    }
    let k = profile.len() - 1;
    let flat = !(profile[k] > profile[0]);

    let mut s = Vec::with_capacity(k + 1);
    s.push(0.0);
    for y in increments(profile) {
        s.push(s[s.len() - 1] + y.max(floor));
    }
    let s_k = s[k];
    let kf = k as f64;
    let whole = kf * (s_k / kf).ln();

    let mut r = Vec::with_capacity(k - 1);
    let mut tau_hat = 1;
    let mut best = f64::NEG_INFINITY;
    for tau in 1..k {
        let t = tau as f64;
        let left = t * (s[tau] / t).ln();
        let right = (kf - t) * ((s_k - s[tau]) / (kf - t)).ln();
        let value = whole - (left + right);
        if value > best {
            best = value;
            tau_hat = tau;
        }
        r.push(value);
    }
    if flat {
        tau_hat = 1;
    }
    Ok(ChangePoint { tau_hat, r, flat })
}

/// Full record of one degree selection.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSelection {
    pub grid: DegreeGrid,
    pub profile: Vec<f64>,
    pub increments: Vec<f64>,
    pub r: Vec<f64>,
    pub tau_hat: usize,
    pub m_hat: usize,
    /// Sample lower bound used to build the grid, when the grid was not given.
    pub m_b: Option<usize>,
    pub flat: bool,
    /// The fit at `m_hat`.
    pub fit: FitResult,
}

/// Selects the degree with a warm-started profile.
pub fn select_degree(
    data: &[f64],
    cfg: &FitConfig,
    grid: Option<DegreeGrid>,
) -> Result<DegreeSelection> {
    select_degree_with(data, cfg, grid, ProfileMode::Warm)
}

/// Like [`select_degree`] with an explicit profile mode.
///
/// Without a grid, one is built from the jackknife lower bound by
/// [`DegreeGrid::from_lower_bound`]. That bound can be far too small for
/// multimodal data, so the automatic grid is doubled in length while the
/// increments after the change point still average more than
/// [`TAIL_MEAN_LIMIT`], up to degree [`MAX_AUTO_DEGREE`]. A given grid is used as is.
pub fn select_degree_with(
    data: &[f64],
    cfg: &FitConfig,
    grid: Option<DegreeGrid>,
    mode: ProfileMode,
) -> Result<DegreeSelection> {
    if data.len() < 2 {
        return Err(Error::domain("degree selection needs at least two points"));
    }
    let (mut grid, m_b) = match grid {
        Some(g) => (g, None),
        None => {
            let mb = lower_bound_mb(data, true)?;
            (DegreeGrid::from_lower_bound(mb), Some(mb))
        }
    };
    let mut fits = profile_fits(data, &grid, cfg, mode)?;
    let mut profile: Vec<f64> = fits.iter().map(|f| f.loglik).collect();
    let mut cp = changepoint_select(&profile)?;
    if m_b.is_some() {
        while tail_mean(&profile, cp.tau_hat) > TAIL_MEAN_LIMIT && grid.max_degree() < MAX_AUTO_DEGREE {
            let k = (2 * grid.k).min(MAX_AUTO_DEGREE - grid.m0);
            grid = DegreeGrid::new(grid.m0, k)?;
            extend_profile(data, &mut fits, grid.m0, grid.max_degree(), cfg, mode)?;
            profile = fits.iter().map(|f| f.loglik).collect();
            cp = changepoint_select(&profile)?;
        }
    }
    let fit = fits.swap_remove(cp.tau_hat);
    Ok(DegreeSelection {
        grid,
        increments: increments(&profile),
        profile,
        r: cp.r,
        tau_hat: cp.tau_hat,
        m_hat: grid.m0 + cp.tau_hat,
        m_b,
        flat: cp.flat,
        fit,
    })
}

/// Mean profile increment after the change point `tau`.
fn tail_mean(profile: &[f64], tau: usize) -> f64 {
    let k = profile.len() - 1;
    (profile[k] - profile[tau]) / (k - tau) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Beta, Distribution};

    fn profile_from(y: &[f64]) -> Vec<f64> {
        let mut p = vec![-100.0];
        for v in y {
            p.push(p[p.len() - 1] + v);
        }
        p
    }

    /// Two-segment exponential likelihood ratio, summed observation by observation.
    fn exponential_scan(y: &[f64], tau: usize) -> f64 {
        let ll = |seg: &[f64]| {
            let mean = seg.iter().sum::<f64>() / seg.len() as f64;
            seg.iter().map(|v| -mean.ln() - v / mean).sum::<f64>()
        };
        ll(&y[..tau]) + ll(&y[tau..]) - ll(y)
    }

    #[test]
    fn exponential_change() {
        let y = [5.0, 5.0, 5.0, 0.1, 0.1, 0.1, 0.1, 0.1];
        let cp = changepoint_select(&profile_from(&y)).unwrap();
        assert_eq!(cp.tau_hat, 3);
        assert_eq!(cp.r.len(), 7);
        assert!(!cp.flat);
    }

    #[test]
    fn two_increments() {
        let cp = changepoint_select(&profile_from(&[10.0, 0.01])).unwrap();
        assert_eq!(cp.tau_hat, 1);
        assert_eq!(cp.r.len(), 1);
    }

    #[test]
    fn ties_pick_the_smallest() {
        let y = [4.0, 4.0, 1.0, 1.0, 1.0, 4.0, 4.0];
        let cp = changepoint_select(&profile_from(&y)).unwrap();
        let max = cp.r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(cp.r[1], max);
        assert_eq!(cp.r[4], max);
        assert_eq!(cp.tau_hat, 2);
        // constant increments: R is zero everywhere
        let cp = changepoint_select(&profile_from(&[2.0; 6])).unwrap();
        assert!(cp.r.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(cp.tau_hat, 1);
    }

    #[test]
    fn flat_profile_is_flagged() {
        let cp = changepoint_select(&[-3.0, -3.0, -3.0, -3.0]).unwrap();
        assert!(cp.flat);
        assert_eq!(cp.tau_hat, 1);
        assert!(changepoint_select(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn floor_does_not_move_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let k = rng.random_range(3..30);
            let mut y: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
            // exact zeros and slightly negative EM slack past the first half,
            // where overfitted degrees produce them
            for v in y.iter_mut().skip(k / 2) {
                if rng.random::<f64>() < 0.2 {
                    *v = if rng.random::<bool>() { 0.0 } else { -1e-9 };
                }
            }
            let p = profile_from(&y);
            let a = changepoint_with_floor(&p, 1e-12).unwrap().tau_hat;
            let b = changepoint_with_floor(&p, 1e-13).unwrap().tau_hat;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn shift_invariance() {
        let y = [3.0, 2.5, 2.0, 0.3, 0.2, 0.4];
        let p = profile_from(&y);
        let shifted: Vec<f64> = p.iter().map(|v| v + 1e3).collect();
        let a = changepoint_select(&p).unwrap();
        let b = changepoint_select(&shifted).unwrap();
        assert_eq!(a.tau_hat, b.tau_hat);
        for (x, y) in a.r.iter().zip(&b.r) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_exponential_mle_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let k = rng.random_range(2..40);
            let y: Vec<f64> = (0..k).map(|_| 0.01 + 5.0 * rng.random::<f64>()).collect();
            let cp = changepoint_select(&profile_from(&y)).unwrap();
            for (tau, r) in (1..k).zip(&cp.r) {
                let oracle = exponential_scan(&y, tau);
                assert!((r - oracle).abs() < 1e-10 * (1.0 + oracle.abs()), "{r} vs {oracle}");
            }
        }
    }

    #[test]
    fn population_lower_bounds() {
        // beta(a, b): ρ = a + b + 1
        assert_eq!(mb_from_moments(5.0 / 12.0, (5.0 / 12.0) * (7.0 / 12.0) / 13.0).unwrap(), 10);
        assert_eq!(mb_from_rho(3.0), 1);
        assert_eq!(mb_from_rho(14.0 + 1e-13), 11);
        assert_eq!(mb_from_rho(14.001), 12);
        assert!(mb_from_moments(0.5, 0.0).is_err());
    }

    #[test]
    fn sample_lower_bound_large_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let beta = Beta::new(5.0, 7.0).unwrap();
        let data: Vec<f64> = (0..100_000).map(|_| beta.sample(&mut rng)).collect();
        for jk in [false, true] {
            let mb = lower_bound_mb(&data, jk).unwrap();
            assert!((9..=11).contains(&mb), "jackknife={jk}: {mb}");
        }
    }

    #[test]
    fn jackknife_matches_naive_leave_one_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data: Vec<f64> = (0..25).map(|_| rng.random::<f64>().powi(2)).collect();
        let rho = |d: &[f64]| {
            let (m, v) = mean_var(d);
            m * (1.0 - m) / v
        };
        let n = data.len() as f64;
        let loo: f64 = (0..data.len())
            .map(|i| {
                let mut d = data.clone();
                d.remove(i);
                rho(&d)
            })
            .sum();
        let rho_j = n * rho(&data) - (n - 1.0) / n * loo;
        assert_eq!(lower_bound_mb(&data, true).unwrap(), mb_from_rho(rho_j));
    }

    #[test]
    fn lower_bound_errors() {
        assert!(lower_bound_mb(&[0.5], false).is_err());
        assert!(lower_bound_mb(&[0.5, 0.5, 0.5], true).is_err());
        assert!(lower_bound_mb(&[0.2, 0.6], true).is_err());
        assert!(lower_bound_mb(&[0.2, 0.6], false).is_ok());
    }

    #[test]
    fn grid_rules() {
        assert!(DegreeGrid::new(0, 1).is_err());
        let g = DegreeGrid::new(3, 4).unwrap();
        assert_eq!(g.degrees().collect::<Vec<_>>(), vec![3, 4, 5, 6, 7]);
        let g = DegreeGrid::from_lower_bound(10);
        assert_eq!((g.m0(), g.k()), (5, 20));
        let g = DegreeGrid::from_lower_bound(80);
        assert_eq!((g.m0(), g.k()), (40, 100));
        assert_eq!(DegreeGrid::from_lower_bound(1).m0(), 1);
    }

    #[test]
    fn automatic_grid_grows_for_bimodal_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (l, r) = (Beta::new(30.0, 120.0).unwrap(), Beta::new(120.0, 30.0).unwrap());
        let data: Vec<f64> =
            (0..400).map(|i| if i % 2 == 0 { l.sample(&mut rng) } else { r.sample(&mut rng) }).collect();
        let mb = lower_bound_mb(&data, true).unwrap();
        let start = DegreeGrid::from_lower_bound(mb);
        let sel = select_degree(&data, &FitConfig::default(), None).unwrap();
        assert_eq!(sel.m_b, Some(mb));
        assert_eq!(sel.grid.m0(), start.m0());
        assert!(sel.grid.k() > start.k(), "grid {:?} never grew from {:?}", sel.grid, start);
        assert_eq!(sel.profile.len(), sel.grid.k() + 1);
        assert!(
            tail_mean(&sel.profile, sel.tau_hat) <= TAIL_MEAN_LIMIT
                || sel.grid.max_degree() == MAX_AUTO_DEGREE
        );
        // a fixed grid is never extended
        let fixed = select_degree(&data, &FitConfig::default(), Some(start)).unwrap();
        assert_eq!(fixed.grid, start);
    }

    fn bernstein_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let beta = Beta::new(5.0, 7.0).unwrap();
        (0..n).map(|_| beta.sample(rng)).collect()
    }

    #[test]
    fn selection_is_deterministic_and_in_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let data = bernstein_sample(&mut rng, 200);
        let a = select_degree(&data, &FitConfig::default(), None).unwrap();
        let b = select_degree(&data, &FitConfig::default(), None).unwrap();
        assert_eq!(a, b);
        assert!(a.grid.degrees().any(|m| m == a.m_hat));
        assert!(a.m_hat >= a.grid.m0());
        assert_eq!(a.profile.len(), a.grid.k() + 1);
        assert_eq!(a.increments.len(), a.grid.k());
        assert_eq!(a.r.len(), a.grid.k() - 1);
        assert_eq!(a.fit.weights.degree(), a.m_hat);
        assert!(a.m_b.is_some());
        assert!(a.increments.iter().all(|&y| y >= -1e-6));
    }

    #[test]
    fn warm_and_cold_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let cfg = FitConfig { tol: 1e-12, max_iter: 50_000, ..FitConfig::default() };
        for _ in 0..5 {
            let data = bernstein_sample(&mut rng, 40);
            let grid = DegreeGrid::new(1, 6).unwrap();
            let warm = profile_loglik(&data, &grid, &cfg, ProfileMode::Warm).unwrap();
            let cold = profile_loglik(&data, &grid, &cfg, ProfileMode::Cold).unwrap();
            for (w, c) in warm.iter().zip(&cold) {
                assert!((w - c).abs() < 1e-4, "{w} vs {c}");
            }
        }
    }

    #[test]
    fn degree_zero_profile_entry() {
        let data = [0.1, 0.4, 0.8];
        let grid = DegreeGrid::new(0, 2).unwrap();
        let p = profile_loglik(&data, &grid, &FitConfig::default(), ProfileMode::Warm).unwrap();
        assert_eq!(p[0], 0.0);
    }

    #[test]
    fn true_bernstein_model_is_found_roughly() {
        // Sample from a degree-6 Bernstein density with well separated weights
        let w = [0.0, 0.05, 0.4, 0.05, 0.05, 0.4, 0.05];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..2000)
            .map(|_| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut i = 0;
                while i < 6 {
                    acc += w[i];
                    if u < acc {
                        break;
                    }
                    i += 1;
                }
                Beta::new(i as f64 + 1.0, (6 - i) as f64 + 1.0).unwrap().sample(&mut rng)
            })
            .collect();
        let sel = select_degree(&data, &FitConfig::default(), Some(DegreeGrid::new(1, 20).unwrap()))
            .unwrap();
        assert!((5..=9).contains(&sel.m_hat), "m_hat = {}", sel.m_hat);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn r_matches_direct_formula(y in prop::collection::vec(1e-3f64..10.0, 2..30), shift in -1e3f64..1e3) {
            let p: Vec<f64> = profile_from(&y).into_iter().map(|v| v + shift).collect();
            let cp = changepoint_select(&p).unwrap();
            let k = y.len();
            let l0 = p[0];
            let lk = p[k];
            for tau in 1..k {
                let lt = p[tau];
                let (kf, t) = (k as f64, tau as f64);
                let direct = kf * ((lk - l0) / kf).ln()
                    - t * ((lt - l0) / t).ln()
                    - (kf - t) * ((lk - lt) / (kf - t)).ln();
                prop_assert!((cp.r[tau - 1] - direct).abs() < 1e-8 * (1.0 + direct.abs()));
            }
            let max = cp.r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(cp.r[cp.tau_hat - 1], max);
            prop_assert!(cp.r[..cp.tau_hat - 1].iter().all(|&v| v < max));
        }

        #[test]
        fn profile_is_nondecreasing(data in prop::collection::vec(0.0f64..=1.0, 2..40), m0 in 0usize..4) {
            let grid = DegreeGrid::new(m0, 5).unwrap();
            let p = profile_loglik(&data, &grid, &FitConfig::default(), ProfileMode::Warm).unwrap();
            for w in p.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-6);
            }
        }
    }
}
