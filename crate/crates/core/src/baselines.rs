//! Comparison estimators: empirical CDF, Bernstein-smoothed empirical CDF,
//! and a Gaussian kernel density estimate.

use serde::{Deserialize, Serialize};

use crate::basis::fill_basis;
use crate::error::{Error, Result};
use crate::special::{iqr_sorted, mean_var, norm_pdf, sorted_copy};

/// `n^{-1} Σ I(x_i ≤ x)`.
pub fn ecdf(data: &[f64], x: f64) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    data.iter().filter(|&&v| v <= x).count() as f64 / data.len() as f64
}

/// Empirical CDF over a sorted copy of the sample, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::domain("empirical CDF of an empty sample"));
        }
        Ok(Ecdf { sorted: sorted_copy(data) })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }
}

/// Vitale's estimator `Σ_{i=0}^{m+1} F̂_E(i/(m+1)) b_{m+1,i}(t)` for unit-interval data.
pub fn vitale_cdf(data: &[f64], m: usize, t: f64) -> Result<f64> {
    let e = Ecdf::new(data)?;
    vitale_from_ecdf(&e, m, t)
}

pub(crate) fn vitale_from_ecdf(e: &Ecdf, m: usize, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("point {t} is outside [0, 1]")));
    }
    let deg = m + 1;
    let mut row = vec![0.0; deg + 1];
    fill_basis(deg, t, &mut row);
    let norm = (deg + 1) as f64;
    let v: f64 = row
        .iter()
        .enumerate()
        .map(|(i, b)| e.eval(i as f64 / deg as f64) * b / norm)
        .sum();
    Ok(v.clamp(0.0, 1.0))
}

/// Bandwidth selector for the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    /// `0.9·min(s, IQR/1.34)·n^{-1/5}`.
    Silverman,
    /// Solve-the-equation plug-in selector of Sheather and Jones.
    SheatherJones,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub bandwidth_rule: BandwidthRule,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { bandwidth_rule: BandwidthRule::Silverman }
    }
}

/// Gaussian kernel density estimate with a fixed bandwidth.
#[derive(Debug, Clone)]
pub struct Kde {
    data: Vec<f64>,
    bandwidth: f64,
}

impl Kde {
    pub fn new(data: &[f64], cfg: KernelConfig) -> Result<Self> {
        let bandwidth = match cfg.bandwidth_rule {
            BandwidthRule::Fixed(h) => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::domain(format!("bandwidth {h} must be positive")));
                }
                if data.is_empty() {
                    return Err(Error::domain("kernel density of an empty sample"));
                }
                h
            }
            BandwidthRule::Silverman => silverman_bandwidth(data)?,
            BandwidthRule::SheatherJones => sheather_jones_bandwidth(data)?,
        };
        Ok(Kde { data: data.to_vec(), bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let s: f64 = self.data.iter().map(|&xj| norm_pdf((x - xj) / h)).sum();
        s / (self.data.len() as f64 * h)
    }
}

/// `(1/nh) Σ φ((x - x_j)/h)` with the bandwidth chosen by `cfg`.
pub fn kde(data: &[f64], cfg: KernelConfig, x: f64) -> Result<f64> {
    Ok(Kde::new(data, cfg)?.pdf(x))
}

/// Scale estimate `min(s, IQR/1.34)`, falling back to `s` when the IQR is zero.
fn robust_scale(data: &[f64], iqr_divisor: f64) -> Result<f64> {
    if data.len() < 2 {
        return Err(Error::domain("bandwidth selection needs at least two points"));
    }
    let (_, var) = mean_var(data);
    let s = var.sqrt();
    if !(s > 0.0) {
        return Err(Error::domain("zero-spread sample has no bandwidth"));
    }
    let iqr = iqr_sorted(&sorted_copy(data)) / iqr_divisor;
    Ok(if iqr > 0.0 { s.min(iqr) } else { s })
}

pub fn silverman_bandwidth(data: &[f64]) -> Result<f64> {
    let scale = robust_scale(data, 1.34)?;
    Ok(0.9 * scale * (data.len() as f64).powf(-0.2))
}

/// Pairwise Gaussian-derivative functional used by the plug-in selector.
///
/// With `deriv = 4` this is `Ŝ_D(h) = Σ_{i,j} φ⁽⁴⁾((x_i-x_j)/h) / (n(n-1)h⁵)`;
/// with `deriv = 6` the sixth-derivative analogue over `h⁷`.
fn pair_functional(data: &[f64], h: f64, deriv: u32) -> f64 {
    let n = data.len() as f64;
    let poly = |z2: f64| match deriv {
        4 => z2 * z2 - 6.0 * z2 + 3.0,
        _ => z2 * z2 * z2 - 15.0 * z2 * z2 + 45.0 * z2 - 15.0,
    };
    let mut sum = 0.0;
    for i in 0..data.len() {
        for j in (i + 1)..data.len() {
            let z = (data[i] - data[j]) / h;
            let z2 = z * z;
            sum += norm_pdf(z) * poly(z2);
        }
    }
    let diag = n * norm_pdf(0.0) * poly(0.0);
    (2.0 * sum + diag) / (n * (n - 1.0) * h.powi(deriv as i32 + 1))
}

/// Sheather–Jones "solve-the-equation" bandwidth with exact pairwise sums.
pub fn sheather_jones_bandwidth(data: &[f64]) -> Result<f64> {
    let scale = robust_scale(data, 1.349)?;
    let n = data.len() as f64;
    let a = 1.24 * scale * n.powf(-1.0 / 7.0);
    let b = 1.23 * scale * n.powf(-1.0 / 9.0);
    let c1 = 1.0 / (2.0 * std::f64::consts::PI.sqrt() * n);

    let td = -pair_functional(data, b, 6);
    if !(td.is_finite() && td > 0.0) {
        return Err(Error::domain("sample too sparse for the plug-in bandwidth"));
    }
    let alpha2 = 1.357 * (pair_functional(data, a, 4) / td).powf(1.0 / 7.0);
    if !alpha2.is_finite() {
        return Err(Error::domain("sample too sparse for the plug-in bandwidth"));
    }
    let f = |h: f64| (c1 / pair_functional(data, alpha2 * h.powf(5.0 / 7.0), 4)).powf(0.2) - h;

    let hmax = 1.144 * scale * n.powf(-0.2);
    let (mut lo, mut hi) = (0.1 * hmax, hmax);
    let tol = 0.1 * lo;
    let mut tries = 0;
    while f(lo) * f(hi) > 0.0 {
        tries += 1;
        if tries > 99 {
            return Err(Error::NonConvergence("no plug-in bandwidth root found".into()));
        }
        if tries % 2 == 1 {
            hi *= 1.2;
        } else {
            lo /= 1.2;
        }
    }
    let mut flo = f(lo);
    while hi - lo > tol * 1e-3 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
