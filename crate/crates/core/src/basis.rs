//! Beta-density basis of the Bernstein polynomial model.
//!
//! `β_{mi}(t) = (m+1)·C(m,i)·t^i·(1-t)^{m-i}` is the density of
//! beta(i+1, m-i+1). The basis is evaluated by the ratio recurrence
//! `β_{m,i+1} = β_{mi}·(m-i)t / ((i+1)(1-t))`, started at the binomial mode
//! and run outward in both directions, then rescaled so that
//! `Σ_i β_{mi}(t) = m+1`. Every ratio applied moves away from the mode, so
//! intermediate values stay bounded by a small constant and far tails underflow
//! gracefully to zero; degrees in the tens of thousands are fine.

use crate::error::{Error, Result};
use crate::model::MixtureWeights;
use crate::special::ln_binomial;

/// The values `β_{m0}(t), …, β_{mm}(t)` at a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRow {
    pub m: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::domain(format!("basis point {t} is outside [0, 1]")))
    }
}

/// Writes `β_{m0}(t), …, β_{mm}(t)` into `out` (length `m+1`). `t` must be in [0, 1].
pub(crate) fn fill_basis(m: usize, t: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), m + 1);
    let scale = (m + 1) as f64;
    if m == 0 {
        out[0] = 1.0;
        return;
    }
    if t <= 0.0 || t >= 1.0 {
        out.fill(0.0);
        if t <= 0.0 {
            out[0] = scale;
        } else {
            out[m] = scale;
        }
        return;
    }

    let s = 1.0 - t;
    let mode = (((m + 1) as f64 * t).floor() as usize).min(m);
    out[mode] = 1.0;
    for i in mode..m {
        out[i + 1] = out[i] * (((m - i) as f64 * t) / ((i + 1) as f64 * s));
    }
    for i in (1..=mode).rev() {
        out[i - 1] = out[i] * ((i as f64 * s) / ((m - i + 1) as f64 * t));
    }

    let total: f64 = out.iter().sum();
    let k = scale / total;
    for v in out.iter_mut() {
        *v *= k;
    }
}

/// Evaluates the beta-density basis of degree `m` at `t ∈ [0, 1]`.
pub fn eval_basis(m: usize, t: f64) -> Result<BasisRow> {
    check_unit(t)?;
    let mut values = vec![0.0; m + 1];
    fill_basis(m, t, &mut values);
    Ok(BasisRow { m, t, values })
}

/// Writes the basis distribution functions `𝓑_{mi}(t) = I_t(i+1, m-i+1)`.
///
/// Uses the binomial-tail identity `I_t(i+1, m-i+1) = Σ_{j>i} b_{m+1,j}(t)`,
/// accumulated from the top so each entry is a sum of non-negative terms.
pub(crate) fn fill_basis_cdf(m: usize, t: f64, scratch: &mut Vec<f64>, out: &mut [f64]) {
    debug_assert_eq!(out.len(), m + 1);
    scratch.resize(m + 2, 0.0);
    fill_basis(m + 1, t, scratch);
    let norm = (m + 2) as f64;
    let mut tail = 0.0;
    for i in (0..=m).rev() {
        tail += scratch[i + 1] / norm;
        out[i] = tail.min(1.0);
    }
}

/// Distribution functions of the beta(i+1, m-i+1) components at `t ∈ [0, 1]`.
///
/// Entries lie in [0, 1] and are non-increasing in `i`.
pub fn eval_basis_cdf(m: usize, t: f64) -> Result<Vec<f64>> {
    check_unit(t)?;
    let mut out = vec![0.0; m + 1];
    fill_basis_cdf(m, t, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Rewrites a degree-`m` mixture exactly as a degree-`m+r` mixture.
///
/// `p_{m+r,j} = (m+1)/(m+r+1) · Σ_i p_{mi} C(m,i) C(r,j-i) / C(m+r,j)`; the
/// represented density is unchanged pointwise.
pub fn elevate_degree(p: &MixtureWeights, r: usize) -> Result<MixtureWeights> {
    if r == 0 {
        return Err(Error::domain("degree elevation requires r >= 1"));
    }
    let m = p.degree();
    let top = m + r;
    let lead = (m + 1) as f64 / (top + 1) as f64;
    let w = p.as_slice();

    let mut out = vec![0.0; top + 1];
    for (j, slot) in out.iter_mut().enumerate() {
        let ln_cj = ln_binomial(top as u64, j as u64);
        let lo = j.saturating_sub(r);
        let hi = j.min(m);
        let mut acc = 0.0;
        for (i, &wi) in w.iter().enumerate().take(hi + 1).skip(lo) {
            if wi == 0.0 {
                continue;
            }
            let ln_ratio =
                ln_binomial(m as u64, i as u64) + ln_binomial(r as u64, (j - i) as u64) - ln_cj;
            acc += wi * ln_ratio.exp();
        }
        *slot = lead * acc;
    }
    MixtureWeights::from_masses(out)
}
