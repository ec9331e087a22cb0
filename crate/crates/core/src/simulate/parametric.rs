//! Maximum-likelihood fits of the parametric competitor models. Each fit is
//! returned as a [`TestDistribution`] truncated to the benchmark interval.

use crate::error::{Error, Result};
use crate::special::{digamma, mean_var, norm_pdf, trigamma};

use super::distributions::{Family, TestDistribution};

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_TOL: f64 = 1e-12;
const MIXTURE_MAX_ITER: usize = 10_000;
const MIXTURE_TOL: f64 = 1e-10;

/// Fits `family` to `data` and truncates the fitted law to `[lo, hi]`.
pub fn parametric_fit(family: Family, data: &[f64], lo: f64, hi: f64) -> Result<TestDistribution> {
    if data.len() < 2 {
        return Err(Error::domain("parametric fit needs at least two points"));
    }
    let fitted = match family {
        Family::Beta => {
            let (a, b) = fit_beta(data)?;
            TestDistribution::Beta { a, b }
        }
        Family::Gamma => {
            let (shape, scale) = fit_gamma(data)?;
            TestDistribution::TruncatedGamma { shape, scale, hi }
        }
        Family::Normal => {
            let (mu, sigma) = fit_normal(data)?;
            TestDistribution::TruncatedNormal { mu, sigma, lo, hi }
        }
        Family::NormalMixture => {
            let m = fit_normal_mixture(data)?;
            TestDistribution::NormalMixture {
                w: m.w,
                mu1: m.mu1,
                s1: m.s1,
                mu2: m.mu2,
                s2: m.s2,
                lo,
                hi,
            }
        }
    };
    fitted.validate()?;
    Ok(fitted)
}

/// `μ̂ = x̄` and `σ̂² = (1/n) Σ (x - x̄)²`.
pub fn fit_normal(data: &[f64]) -> Result<(f64, f64)> {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::domain("normal fit needs positive spread"));
    }
    Ok((mean, var.sqrt()))
}

/// Beta MLE by Newton's method on the score equations, started from the
/// method-of-moments estimate, with step halving.
pub fn fit_beta(data: &[f64]) -> Result<(f64, f64)> {
    if data.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::domain("beta fit needs data strictly inside (0, 1)"));
    }
    let n = data.len() as f64;
    let g1 = data.iter().map(|x| x.ln()).sum::<f64>() / n;
    let g2 = data.iter().map(|x| (1.0 - x).ln()).sum::<f64>() / n;
    let (mean, var) = mean_var(data);
    let common = (mean * (1.0 - mean) / var - 1.0).max(0.1);
    let (mut a, mut b) = (mean * common, (1.0 - mean) * common);

    let score = |a: f64, b: f64| {
        let d = digamma(a + b);
        (digamma(a) - d - g1, digamma(b) - d - g2)
    };
    let mut s = score(a, b);
    for _ in 0..NEWTON_MAX_ITER {
        let t = trigamma(a + b);
        let (h11, h22, h12) = (trigamma(a) - t, trigamma(b) - t, -t);
        let det = h11 * h22 - h12 * h12;
        let da = (h22 * s.0 - h12 * s.1) / det;
        let db = (h11 * s.1 - h12 * s.0) / det;
        let norm = s.0.hypot(s.1);
        let mut step = 1.0;
        loop {
            let (na, nb) = (a - step * da, b - step * db);
            if na > 0.0 && nb > 0.0 {
                let ns = score(na, nb);
                if ns.0.hypot(ns.1) < norm || step < 1e-10 {
                    a = na;
                    b = nb;
                    s = ns;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::NonConvergence("beta Newton step failed".into()));
            }
        }
        if s.0.hypot(s.1) < NEWTON_TOL || (da.abs() + db.abs()) * step < NEWTON_TOL * (a + b) {
            return Ok((a, b));
        }
    }
    Err(Error::NonConvergence("beta fit did not converge".into()))
}

/// Gamma MLE `(shape, scale)`: Newton on `log α - ψ(α) = log x̄ - mean(log x)`,
/// then `scale = x̄/α`.
pub fn fit_gamma(data: &[f64]) -> Result<(f64, f64)> {
    if data.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::domain("gamma fit needs positive data"));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let s = mean.ln() - data.iter().map(|x| x.ln()).sum::<f64>() / n;
    if !(s > 0.0) {
        return Err(Error::domain("gamma fit needs positive spread"));
    }
    let mut alpha = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..NEWTON_MAX_ITER {
        let f = alpha.ln() - digamma(alpha) - s;
        let df = 1.0 / alpha - trigamma(alpha);
        let mut next = alpha - f / df;
        if next <= 0.0 {
            next = 0.5 * alpha;
        }
        let done = (next - alpha).abs() <= NEWTON_TOL * alpha;
        alpha = next;
        if done {
            return Ok((alpha, mean / alpha));
        }
    }
    Err(Error::NonConvergence("gamma fit did not converge".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMixtureFit {
    pub w: f64,
    pub mu1: f64,
    pub s1: f64,
    pub mu2: f64,
    pub s2: f64,
    pub loglik: f64,
}

/// Two-component normal mixture by EM, started from the lower and upper halves
/// of the sorted sample.
pub fn fit_normal_mixture(data: &[f64]) -> Result<NormalMixtureFit> {
    let n = data.len();
    if n < 4 {
        return Err(Error::domain("normal mixture fit needs at least four points"));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo_half, hi_half) = sorted.split_at(n / 2);
    let (_, overall) = fit_normal(data)?;
    let floor = 1e-6 * overall;
    let start = |half: &[f64]| -> (f64, f64) {
        let (m, v) = mean_var(half);
        (m, v.sqrt().max(0.1 * overall))
    };
    let (mut mu1, mut s1) = start(lo_half);
    let (mut mu2, mut s2) = start(hi_half);
    let mut w = 0.5;

    let dens = |x: f64, mu: f64, s: f64| norm_pdf((x - mu) / s) / s;
    let mut resp = vec![0.0; n];
    let mut ll_prev = f64::NEG_INFINITY;
    for _ in 0..MIXTURE_MAX_ITER {
        let mut ll = 0.0;
        for (r, &x) in resp.iter_mut().zip(&sorted) {
            let p1 = w * dens(x, mu1, s1);
            let p2 = (1.0 - w) * dens(x, mu2, s2);
            let total = p1 + p2;
            if !(total > 0.0) {
                return Err(Error::NonConvergence("normal mixture lost support".into()));
            }
            ll += total.ln();
            *r = p1 / total;
        }
        if (ll - ll_prev).abs() <= MIXTURE_TOL * (ll.abs() + 1.0) {
            return Ok(NormalMixtureFit { w, mu1, s1, mu2, s2, loglik: ll });
        }
        ll_prev = ll;

        let n1: f64 = resp.iter().sum();
        let n2 = n as f64 - n1;
        if n1 < 1e-8 || n2 < 1e-8 {
            return Err(Error::NonConvergence("normal mixture component collapsed".into()));
        }
        mu1 = resp.iter().zip(&sorted).map(|(r, x)| r * x).sum::<f64>() / n1;
        mu2 = resp.iter().zip(&sorted).map(|(r, x)| (1.0 - r) * x).sum::<f64>() / n2;
        s1 = (resp.iter().zip(&sorted).map(|(r, x)| r * (x - mu1).powi(2)).sum::<f64>() / n1).sqrt();
        s2 = (resp.iter().zip(&sorted).map(|(r, x)| (1.0 - r) * (x - mu2).powi(2)).sum::<f64>() / n2)
            .sqrt();
        if s1 < floor || s2 < floor {
            return Err(Error::NonConvergence("normal mixture variance collapsed".into()));
        }
        w = n1 / n as f64;
    }
    Err(Error::NonConvergence("normal mixture EM did not converge".into()))
}
