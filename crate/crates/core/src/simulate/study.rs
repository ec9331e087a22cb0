//! Monte Carlo comparison of the Bernstein estimator with kernel, empirical,
//! and parametric competitors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{Ecdf, Kde, KernelConfig};
use crate::degree::{select_degree, DegreeGrid};
use crate::error::{Error, Result};
use crate::fit::FitConfig;
use crate::model::{BernsteinModel, FitDiagnostics};
use crate::transform::SupportMap;

use super::distributions::{Family, TestDistribution};
use super::parametric::parametric_fit;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// Midpoint cells over the support for pointwise and integrated errors.
    pub grid_points: usize,
    pub fit: FitConfig,
    pub kernel: KernelConfig,
    /// Fixed degree grid; `None` builds one per sample from its lower bound.
    pub degree_grid: Option<DegreeGrid>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            grid_points: 200,
            fit: FitConfig::default(),
            kernel: KernelConfig::default(),
            degree_grid: None,
        }
    }
}

/// Per-point mean squared errors over the evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseMse {
    pub x: Vec<f64>,
    pub pdf_bernstein: Vec<f64>,
    pub pdf_parametric: Vec<f64>,
    pub pdf_kernel: Vec<f64>,
    pub cdf_bernstein: Vec<f64>,
    pub cdf_parametric: Vec<f64>,
    pub cdf_empirical: Vec<f64>,
}

/// Aggregated results. MISE and MSE fields are multiplied by 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub distribution: String,
    pub n: usize,
    pub runs: usize,
    pub seed: u64,
    pub failed_runs: usize,
    pub m_hat: Vec<usize>,
    pub mean_mhat: f64,
    pub var_mhat: f64,
    pub mise_fb: f64,
    pub mise_fp: f64,
    pub mise_fk: f64,
    pub mise_cdf_b: f64,
    pub mise_cdf_p: f64,
    pub mise_cdf_e: f64,
    pub mse_mu_b: f64,
    pub mse_mu_p: f64,
    pub mse_xbar: f64,
    pub pointwise_mse: PointwiseMse,
}

struct RunOutcome {
    m_hat: usize,
    sq: [Vec<f64>; 6],
    mu_err: [f64; 3],
}

fn cell_midpoints(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let h = (hi - lo) / cells as f64;
    (0..cells).map(|c| lo + (c as f64 + 0.5) * h).collect()
}

/// Generator for run `run`: the seed picks the key, the run picks the stream.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Fits the Bernstein model to a raw sample on a known support, selecting the degree.
pub fn fit_bernstein(
    data: &[f64],
    support: SupportMap,
    cfg: &FitConfig,
    grid: Option<DegreeGrid>,
) -> Result<(BernsteinModel, usize)> {
    let unit = support.to_unit(data)?;
    let sel = select_degree(&unit, cfg, grid)?;
    let mut model = BernsteinModel::new(sel.fit.weights.clone(), support);
    model.fit = Some(FitDiagnostics {
        loglik: sel.fit.loglik,
        n_iter: sel.fit.n_iter,
        converged: sel.fit.converged,
    });
    Ok((model, sel.m_hat))
}

fn one_run(
    dist: &TestDistribution,
    n: usize,
    seed: u64,
    run: usize,
    cfg: &StudyConfig,
    x: &[f64],
) -> Result<RunOutcome> {
    let (lo, hi) = dist.support();
    let support = SupportMap::new(lo, hi)?;
    let data = dist.sample(n, &mut run_rng(seed, run))?;

    let (model, m_hat) = fit_bernstein(&data, support, &cfg.fit, cfg.degree_grid)?;
    let kde = Kde::new(&data, cfg.kernel)?;
    let ecdf = Ecdf::new(&data)?;
    let param = parametric_fit(dist.family(), &data, lo, hi)?;

    let mut sq: [Vec<f64>; 6] = Default::default();
    for v in sq.iter_mut() {
        v.reserve(x.len());
    }
    for &xi in x {
        let (f, cdf) = (dist.pdf(xi), dist.cdf(xi));
        sq[0].push((model.pdf(xi) - f).powi(2));
        sq[1].push((param.pdf(xi) - f).powi(2));
        sq[2].push((kde.pdf(xi) - f).powi(2));
        sq[3].push((model.cdf(xi) - cdf).powi(2));
        sq[4].push((param.cdf(xi) - cdf).powi(2));
        sq[5].push((ecdf.eval(xi) - cdf).powi(2));
    }

    let mu = dist.mean();
    let xbar = data.iter().sum::<f64>() / n as f64;
    let mu_p = match (dist.family(), param) {
        (Family::Beta, TestDistribution::Beta { a, b }) => lo + (hi - lo) * a / (a + b),
        _ => xbar,
    };
    let mu_err = [
        (model.mean_estimate() - mu).powi(2),
        (mu_p - mu).powi(2),
        (xbar - mu).powi(2),
    ];
    Ok(RunOutcome { m_hat, sq, mu_err })
}

/// Runs the study with the default configuration.
pub fn run_study(dist: &TestDistribution, n: usize, runs: usize, seed: u64) -> Result<SimReport> {
    run_study_with(dist, n, runs, seed, &StudyConfig::default())
}

/// Runs `runs` independent replications in parallel. Run `r` draws from
/// [`run_rng`]`(seed, r)`, and results are reduced in run order, so the report
/// depends only on the arguments. Failed runs are counted and left out.
pub fn run_study_with(
    dist: &TestDistribution,
    n: usize,
    runs: usize,
    seed: u64,
    cfg: &StudyConfig,
) -> Result<SimReport> {
    dist.validate()?;
    if runs == 0 {
        return Err(Error::domain("runs must be >= 1"));
    }
    if n < 4 {
        return Err(Error::domain("study sample size must be >= 4"));
    }
    if cfg.grid_points == 0 {
        return Err(Error::domain("grid_points must be >= 1"));
    }
    let (lo, hi) = dist.support();
    let x = cell_midpoints(lo, hi, cfg.grid_points);
    let h = (hi - lo) / cfg.grid_points as f64;

    let outcomes: Vec<Result<RunOutcome>> =
        (0..runs).into_par_iter().map(|r| one_run(dist, n, seed, r, cfg, &x)).collect();
    let ok: Vec<RunOutcome> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
    let failed_runs = runs - ok.len();
    if ok.is_empty() {
        return Err(Error::NonConvergence(format!("all {runs} runs failed")));
    }

    let good = ok.len() as f64;
    let mut pointwise: [Vec<f64>; 6] = Default::default();
    for (j, acc) in pointwise.iter_mut().enumerate() {
        *acc = vec![0.0; x.len()];
        for o in &ok {
            for (a, v) in acc.iter_mut().zip(&o.sq[j]) {
                *a += v;
            }
        }
        for a in acc.iter_mut() {
            *a /= good;
        }
    }
    let mise = |j: usize| 100.0 * pointwise[j].iter().sum::<f64>() * h;
    let mse_mu = |j: usize| 100.0 * ok.iter().map(|o| o.mu_err[j]).sum::<f64>() / good;

    let m_hat: Vec<usize> = ok.iter().map(|o| o.m_hat).collect();
    let mean_mhat = m_hat.iter().sum::<usize>() as f64 / good;
    let var_mhat = if m_hat.len() > 1 {
        m_hat.iter().map(|&m| (m as f64 - mean_mhat).powi(2)).sum::<f64>() / (good - 1.0)
    } else {
        0.0
    };

    let report = SimReport {
        distribution: dist.to_string(),
        n,
        runs,
        seed,
        failed_runs,
        mean_mhat,
        var_mhat,
        mise_fb: mise(0),
        mise_fp: mise(1),
        mise_fk: mise(2),
        mise_cdf_b: mise(3),
        mise_cdf_p: mise(4),
        mise_cdf_e: mise(5),
        mse_mu_b: mse_mu(0),
        mse_mu_p: mse_mu(1),
        mse_xbar: mse_mu(2),
        m_hat,
        pointwise_mse: {
            let [pdf_bernstein, pdf_parametric, pdf_kernel, cdf_bernstein, cdf_parametric, cdf_empirical] =
                pointwise;
            PointwiseMse {
                x,
                pdf_bernstein,
                pdf_parametric,
                pdf_kernel,
                cdf_bernstein,
                cdf_parametric,
                cdf_empirical,
            }
        },
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::integrate;

    #[test]
    fn single_run_is_deterministic() {
        let d: TestDistribution = "beta-5-7".parse().unwrap();
        let a = run_study(&d, 60, 1, 42).unwrap();
        let b = run_study(&d, 60, 1, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.failed_runs, 0);
        assert_eq!(a.var_mhat, 0.0);
        assert_eq!(a.pointwise_mse.x.len(), 200);
    }

    #[test]
    fn streams_differ_by_run() {
        use rand::Rng;
        let a: f64 = run_rng(1, 0).random();
        let b: f64 = run_rng(1, 1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn metrics_are_nonnegative() {
        let d: TestDistribution = "nn4".parse().unwrap();
        let r = run_study(&d, 50, 4, 3).unwrap();
        for v in [r.mise_fb, r.mise_fp, r.mise_fk, r.mise_cdf_b, r.mise_cdf_p, r.mise_cdf_e] {
            assert!(v >= 0.0);
        }
        for v in [r.mse_mu_b, r.mse_mu_p, r.mse_xbar] {
            assert!(v >= 0.0);
        }
        assert!(r.m_hat.iter().all(|&m| m >= 1));
    }

    #[test]
    fn midpoint_rule_matches_quadrature() {
        // ISE of a fixed misspecified density against B(5,7)
        let d = TestDistribution::Beta { a: 5.0, b: 7.0 };
        let g = TestDistribution::Beta { a: 4.0, b: 6.0 };
        let x = cell_midpoints(0.0, 1.0, 200);
        let grid: f64 = x.iter().map(|&t| (g.pdf(t) - d.pdf(t)).powi(2)).sum::<f64>() / 200.0;
        let quad = integrate(|t| (g.pdf(t) - d.pdf(t)).powi(2), 0.0, 1.0);
        assert!((grid / quad - 1.0).abs() < 0.02);
    }

    #[test]
    fn invalid_arguments() {
        let d: TestDistribution = "uniform".parse().unwrap();
        assert!(run_study(&d, 50, 0, 1).is_err());
        assert!(run_study(&d, 2, 1, 1).is_err());
    }
}
