//! Maximum Bernstein-likelihood fitting at a fixed degree by EM.
//!
//! The EM update for a mixture of known beta components is
//! `p_i ← (1/n) Σ_j p_i β_{mi}(x_j) / f_B(x_j)`. Known zero proportions stay at
//! zero, boundary values `f(0)`, `f(1)` pin the end weights, and symmetry about
//! 1/2 is imposed by averaging mirrored weights after each step. All three are
//! exact M-steps on the constrained simplex, so the likelihood never decreases.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::baselines::{vitale_from_ecdf, Ecdf};
use crate::basis::fill_basis;
use crate::error::{Error, Result};
use crate::model::MixtureWeights;

/// Initial entries below this are raised to it before renormalizing, so no
/// unconstrained component starts at an absorbing zero.
const INIT_FLOOR: f64 = 1e-12;

/// Weights and basis values below this are set to zero inside EM. Their
/// products would otherwise drift into subnormal range, which is very slow,
/// while their contribution to any density value is far below rounding.
const FLUSH: f64 = 1e-150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// `1/(m+1)` everywhere.
    #[default]
    Uniform,
    /// binomial(m, x̄) probabilities.
    Binomial,
    /// Increments of the Bernstein-smoothed empirical CDF over the grid i/(m+1).
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Stop once `(ℓ_{s+1} - ℓ_s)/(|ℓ_s| + 1)` falls below this.
    pub tol: f64,
    pub init: InitScheme,
    /// Component indices forced to zero weight.
    pub zero_mask: BTreeSet<usize>,
    /// Known density value at the left end of [0, 1].
    pub boundary_f0: Option<f64>,
    /// Known density value at the right end of [0, 1].
    pub boundary_f1: Option<f64>,
    pub symmetric: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 500,
            tol: 1e-7,
            init: InitScheme::Uniform,
            zero_mask: BTreeSet::new(),
            boundary_f0: None,
            boundary_f1: None,
            symmetric: false,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::domain("max_iter must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("tol must be positive"));
        }
        for (name, v) in [("f(0)", self.boundary_f0), ("f(1)", self.boundary_f1)] {
            if let Some(c) = v {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(Error::domain(format!("boundary value {name} = {c} must be >= 0")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub weights: MixtureWeights,
    /// Log-likelihood at `weights`.
    pub loglik: f64,
    pub n_iter: usize,
    pub converged: bool,
}

/// Initial weights together with a flag set when the requested scheme was
/// not applicable and uniform weights were used instead.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialWeights {
    pub weights: MixtureWeights,
    pub fell_back: bool,
}

/// Starting values for EM.
pub fn init_weights(data: &[f64], m: usize, scheme: InitScheme) -> Result<InitialWeights> {
    let uniform = InitialWeights { weights: MixtureWeights::uniform(m), fell_back: false };
    let raw = match scheme {
        InitScheme::Uniform => return Ok(uniform),
        InitScheme::Binomial => {
            if data.is_empty() {
                return Err(Error::domain("binomial initializer needs data"));
            }
            let mean = data.iter().sum::<f64>() / data.len() as f64;
            if !(mean > 0.0 && mean < 1.0) {
                return Ok(InitialWeights { fell_back: true, ..uniform });
            }
            let mut row = vec![0.0; m + 1];
            fill_basis(m, mean, &mut row);
            row
        }
        InitScheme::Empirical => {
            let e = Ecdf::new(data)?;
            let grid: Vec<f64> = (0..=m + 1)
                .map(|i| vitale_from_ecdf(&e, m, i as f64 / (m + 1) as f64))
                .collect::<Result<_>>()?;
            grid.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect()
        }
    };
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Ok(InitialWeights { fell_back: true, ..uniform });
    }
    let floored: Vec<f64> = raw.iter().map(|v| (v / total).max(INIT_FLOOR)).collect();
    Ok(InitialWeights { weights: MixtureWeights::from_masses(floored)?, fell_back: false })
}

/// Averages mirrored weights: `(w_i + w_{m-i})/2`.
pub fn apply_symmetry(w: &MixtureWeights) -> MixtureWeights {
    let mut v = w.as_slice().to_vec();
    symmetrize(&mut v);
    MixtureWeights::from_vec_unchecked(v)
}

fn symmetrize(v: &mut [f64]) {
    let m = v.len() - 1;
    for i in 0..v.len() / 2 {
        let avg = 0.5 * (v[i] + v[m - i]);
        v[i] = avg;
        v[m - i] = avg;
    }
}

/// Per-component constraints resolved for one degree.
#[derive(Debug, Clone)]
struct Constraints {
    /// `Some(v)` pins component i at v.
    pinned: Vec<Option<f64>>,
    free_mass: f64,
    symmetric: bool,
}

impl Constraints {
    fn resolve(m: usize, cfg: &FitConfig) -> Result<Self> {
        let mut pinned: Vec<Option<f64>> = vec![None; m + 1];
        let mut pin = |i: usize, v: f64, what: &str| -> Result<()> {
            match pinned[i] {
                Some(old) if (old - v).abs() > 1e-15 => Err(Error::domain(format!(
                    "conflicting constraints on component {i} ({what})"
                ))),
                _ => {
                    pinned[i] = Some(v);
                    Ok(())
                }
            }
        };

        for &i in &cfg.zero_mask {
            if i > m {
                return Err(Error::domain(format!("zero_mask index {i} exceeds degree {m}")));
            }
            pin(i, 0.0, "zero mask")?;
            if cfg.symmetric {
                pin(m - i, 0.0, "zero mask mirrored by symmetry")?;
            }
        }

        let scale = (m + 1) as f64;
        let (mut f0, mut f1) = (cfg.boundary_f0, cfg.boundary_f1);
        if cfg.symmetric {
            match (f0, f1) {
                (Some(a), Some(b)) if (a - b).abs() > 1e-12 => {
                    return Err(Error::domain("symmetric fit requires f(0) = f(1)"));
                }
                (Some(a), None) => f1 = Some(a),
                (None, Some(b)) => f0 = Some(b),
                _ => {}
            }
        }
        if let Some(c) = f0 {
            pin(0, c / scale, "f(0)")?;
        }
        if let Some(c) = f1 {
            pin(m, c / scale, "f(1)")?;
        }

        let pinned_mass: f64 = pinned.iter().flatten().sum();
        let free_mass = 1.0 - pinned_mass;
        let n_free = pinned.iter().filter(|p| p.is_none()).count();
        if free_mass < -1e-12 {
            return Err(Error::Infeasible(format!(
                "constrained weights already sum to {pinned_mass} > 1"
            )));
        }
        if n_free == 0 && free_mass.abs() > 1e-12 {
            return Err(Error::Infeasible(format!(
                "all components are constrained but their weights sum to {pinned_mass}"
            )));
        }
        if n_free > 0 && free_mass <= 0.0 {
            // nothing left for the free components; they are effectively zero
            for p in pinned.iter_mut().filter(|p| p.is_none()) {
                *p = Some(0.0);
            }
        }
        Ok(Constraints { pinned, free_mass: free_mass.max(0.0), symmetric: cfg.symmetric })
    }

    /// Projects a starting vector onto the constrained simplex.
    fn project(&self, start: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = start
            .iter()
            .zip(&self.pinned)
            .map(|(&s, p)| p.unwrap_or(s.max(0.0)))
            .collect();
        self.rescale_free(&mut v);
        if self.symmetric {
            symmetrize(&mut v);
        }
        v
    }

    fn rescale_free(&self, v: &mut [f64]) {
        let free_total: f64 =
            v.iter().zip(&self.pinned).filter(|(_, p)| p.is_none()).map(|(x, _)| x).sum();
        let n_free = self.pinned.iter().filter(|p| p.is_none()).count();
        for (x, p) in v.iter_mut().zip(&self.pinned) {
            if p.is_none() {
                *x = if free_total > 0.0 {
                    *x * self.free_mass / free_total
                } else {
                    self.free_mass / n_free as f64
                };
            }
        }
    }
}

/// Dense `n × (m+1)` basis matrix, row j holding `β_{m·}(x_j)`.
struct BasisMatrix {
    cols: usize,
    values: Vec<f64>,
}

impl BasisMatrix {
    fn new(data: &[f64], m: usize) -> Self {
        let cols = m + 1;
        let mut values = vec![0.0; data.len() * cols];
        for (row, &x) in values.chunks_exact_mut(cols).zip(data) {
            fill_basis(m, x, row);
            for v in row.iter_mut().filter(|v| **v < FLUSH) {
                *v = 0.0;
            }
        }
        BasisMatrix { cols, values }
    }

    fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.cols)
    }
}

/// One E-step: returns `ℓ(p)` and `r_i = Σ_j β_{mi}(x_j)/f_B(x_j)`.
fn expectation(basis: &BasisMatrix, p: &[f64], resp: &mut [f64]) -> f64 {
    resp.fill(0.0);
    let mut ll = 0.0;
    for row in basis.rows() {
        let d = dot(row, p);
        if d <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += d.ln();
        let inv = 1.0 / d;
        for (r, b) in resp.iter_mut().zip(row) {
            *r += b * inv;
        }
    }
    ll
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, ra) = (a.chunks_exact(4), a.chunks_exact(4).remainder());
    let (cb, rb) = (b.chunks_exact(4), b.chunks_exact(4).remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn check_data(data: &[f64]) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::domain("cannot fit an empty sample"));
    }
    if let Some(j) = data.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::domain(format!("data point {j} = {} is outside [0, 1]", data[j])));
    }
    // A fixed summation order makes the fit invariant to permutations of the input.
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Fits degree-`m` weights by EM from the initializer named in `cfg`.
pub fn em_fit(data: &[f64], m: usize, cfg: &FitConfig) -> Result<FitResult> {
    let init = init_weights(data, m, cfg.init)?;
    em_fit_from(data, m, cfg, &init.weights)
}

/// Fits degree-`m` weights by EM from an explicit starting point, which is first
/// projected onto the constraints in `cfg`.
pub fn em_fit_from(
    data: &[f64],
    m: usize,
    cfg: &FitConfig,
    start: &MixtureWeights,
) -> Result<FitResult> {
    cfg.validate()?;
    let data = check_data(data)?;
    if start.degree() != m {
        return Err(Error::domain(format!(
            "starting weights have degree {}, expected {m}",
            start.degree()
        )));
    }
    let cons = Constraints::resolve(m, cfg)?;
    let basis = BasisMatrix::new(&data, m);
    let n = data.len() as f64;

    let mut p = cons.project(start.as_slice());
    let mut resp = vec![0.0; m + 1];
    let mut ll = expectation(&basis, &p, &mut resp);
    if ll == f64::NEG_INFINITY {
        return Err(Error::Infeasible(format!(
            "degree-{m} mixture has zero density at some data point under the constraints"
        )));
    }

    let mut next = vec![0.0; m + 1];
    let mut n_iter = 0;
    let mut converged = false;
    while n_iter < cfg.max_iter {
        n_iter += 1;
        for i in 0..=m {
            next[i] = match cons.pinned[i] {
                Some(v) => v,
                None => {
                    let v = p[i] * resp[i] / n;
                    if v < FLUSH {
                        0.0
                    } else {
                        v
                    }
                }
            };
        }
        if cons.free_mass < 1.0 {
            cons.rescale_free(&mut next);
        }
        if cons.symmetric {
            symmetrize(&mut next);
        }

        let ll_next = expectation(&basis, &next, &mut resp);
        if ll_next == f64::NEG_INFINITY {
            return Err(Error::Infeasible(format!("EM iterate at degree {m} lost support")));
        }
        debug_assert!(
            ll_next >= ll - 1e-9 - 1e-12 * ll.abs(),
            "EM decreased the log-likelihood: {ll} -> {ll_next}"
        );
        let rel = (ll_next - ll) / (ll.abs() + 1.0);
        std::mem::swap(&mut p, &mut next);
        ll = ll_next;
        if rel < cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        weights: MixtureWeights::from_vec_unchecked(p),
        loglik: ll,
        n_iter,
        converged,
    })
}

/// EM trace for tests: log-likelihood after each iteration, starting with ℓ(p⁽⁰⁾).
#[cfg(test)]
pub(crate) fn em_trace(
    data: &[f64],
    m: usize,
    cfg: &FitConfig,
) -> Result<(Vec<f64>, Vec<MixtureWeights>)> {
    let mut lls = Vec::new();
    let mut ws = Vec::new();
    let init = init_weights(data, m, cfg.init)?.weights;
    let mut current = init;
    let step_cfg = FitConfig { max_iter: 1, tol: f64::MIN_POSITIVE, ..cfg.clone() };
    let start = em_fit_from(data, m, &FitConfig { max_iter: 1, ..step_cfg.clone() }, &current)?;
    // ℓ(p⁽⁰⁾) after projection
    let cons = Constraints::resolve(m, cfg)?;
    let p0 = MixtureWeights::from_vec_unchecked(cons.project(current.as_slice()));
    lls.push(crate::model::loglik(&p0, data)?);
    ws.push(p0);
    current = start.weights;
    lls.push(start.loglik);
    ws.push(current.clone());
    for _ in 1..cfg.max_iter {
        let r = em_fit_from(data, m, &step_cfg, &current)?;
        current = r.weights;
        lls.push(r.loglik);
        ws.push(current.clone());
    }
    Ok((lls, ws))
}
