//! Test distributions with closed-form densities, distribution functions,
//! moments, and deterministic samplers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::degree::mb_from_moments;
use crate::error::{Error, Result};
use crate::special::{gamma_lr, ln_binomial, ln_gamma, norm_cdf, norm_pdf, norm_quantile};

/// Number of standard deviations above the mean used to truncate gamma laws
/// when no upper bound is given.
pub const GAMMA_TRUNCATION_SDS: f64 = 5.0;

/// Bisection tolerance, relative to the interval, for the truncated-gamma quantile.
const GAMMA_QUANTILE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestDistribution {
    Beta { a: f64, b: f64 },
    /// Gamma with the given shape and scale, truncated to `[0, hi]`.
    TruncatedGamma { shape: f64, scale: f64, hi: f64 },
    TruncatedNormal { mu: f64, sigma: f64, lo: f64, hi: f64 },
    /// `w N(mu1, s1²) + (1-w) N(mu2, s2²)` truncated to `[lo, hi]`.
    NormalMixture { w: f64, mu1: f64, s1: f64, mu2: f64, s2: f64, lo: f64, hi: f64 },
    /// Mean of `k` independent uniforms on [0, 1].
    NearlyNormal { k: u32 },
    /// Density `0.5 ψ_k(x/1.5)/1.5 + 0.5 ψ_k((x-1)/2)/2` on [0, 3].
    NearlyNormalMixture { k: u32 },
}

/// Parametric family used as the competitor model for a test distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Beta,
    Gamma,
    Normal,
    NormalMixture,
}

impl TestDistribution {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        let ok = match *self {
            TestDistribution::Beta { a, b } => pos(a) && pos(b),
            TestDistribution::TruncatedGamma { shape, scale, hi } => pos(shape) && pos(scale) && pos(hi),
            TestDistribution::TruncatedNormal { mu, sigma, lo, hi } => {
                mu.is_finite() && pos(sigma) && lo.is_finite() && hi.is_finite() && hi > lo
            }
            TestDistribution::NormalMixture { w, mu1, s1, mu2, s2, lo, hi } => {
                (0.0..=1.0).contains(&w)
                    && mu1.is_finite()
                    && mu2.is_finite()
                    && pos(s1)
                    && pos(s2)
                    && lo.is_finite()
                    && hi.is_finite()
                    && hi > lo
            }
            TestDistribution::NearlyNormal { k } | TestDistribution::NearlyNormalMixture { k } => {
                (1..=60).contains(&k)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid distribution parameters: {self}")))
        }
    }

    /// Gamma truncated at `mean + 5 sd`.
    pub fn gamma(shape: f64, scale: f64) -> Self {
        let hi = shape * scale + GAMMA_TRUNCATION_SDS * shape.sqrt() * scale;
        TestDistribution::TruncatedGamma { shape, scale, hi }
    }

    /// The (truncated) support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TestDistribution::Beta { .. } | TestDistribution::NearlyNormal { .. } => (0.0, 1.0),
            TestDistribution::TruncatedGamma { hi, .. } => (0.0, hi),
            TestDistribution::TruncatedNormal { lo, hi, .. }
            | TestDistribution::NormalMixture { lo, hi, .. } => (lo, hi),
            TestDistribution::NearlyNormalMixture { .. } => (0.0, 3.0),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            TestDistribution::Beta { .. } => Family::Beta,
            TestDistribution::TruncatedGamma { .. } => Family::Gamma,
            TestDistribution::TruncatedNormal { .. } | TestDistribution::NearlyNormal { .. } => {
                Family::Normal
            }
            TestDistribution::NormalMixture { .. } | TestDistribution::NearlyNormalMixture { .. } => {
                Family::NormalMixture
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(lo..=hi).contains(&x) {
            return 0.0;
        }
        match *self {
            TestDistribution::Beta { a, b } => beta_pdf(a, b, x),
            TestDistribution::TruncatedGamma { shape, scale, hi } => {
                gamma_pdf(shape, scale, x) / gamma_lr(shape, hi / scale)
            }
            TestDistribution::TruncatedNormal { mu, sigma, lo, hi } => {
                norm_pdf((x - mu) / sigma) / (sigma * normal_mass(mu, sigma, lo, hi))
            }
            TestDistribution::NormalMixture { .. } => {
                let parts = self.mixture_parts();
                parts.iter().map(|c| c.weight * c.pdf(x)).sum()
            }
            TestDistribution::NearlyNormal { k } => irwin_hall_unit_pdf(k, x),
            TestDistribution::NearlyNormalMixture { k } => {
                0.5 * irwin_hall_unit_pdf(k, x / 1.5) / 1.5
                    + 0.5 * irwin_hall_unit_pdf(k, (x - 1.0) / 2.0) / 2.0
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let v = match *self {
            TestDistribution::Beta { a, b } => beta_reg(a, b, x),
            TestDistribution::TruncatedGamma { shape, scale, hi } => {
                gamma_lr(shape, x / scale) / gamma_lr(shape, hi / scale)
            }
            TestDistribution::TruncatedNormal { mu, sigma, lo, hi } => {
                (norm_cdf((x - mu) / sigma) - norm_cdf((lo - mu) / sigma))
                    / normal_mass(mu, sigma, lo, hi)
            }
            TestDistribution::NormalMixture { .. } => {
                self.mixture_parts().iter().map(|c| c.weight * c.cdf(x)).sum()
            }
            TestDistribution::NearlyNormal { k } => irwin_hall_unit_cdf(k, x),
            TestDistribution::NearlyNormalMixture { k } => {
                0.5 * irwin_hall_unit_cdf(k, x / 1.5) + 0.5 * irwin_hall_unit_cdf(k, (x - 1.0) / 2.0)
            }
        };
        v.clamp(0.0, 1.0)
    }

    /// Mean of the truncated law.
    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    /// Variance of the truncated law.
    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    fn moments(&self) -> (f64, f64) {
        match *self {
            TestDistribution::Beta { a, b } => {
                let s = a + b;
                (a / s, a * b / (s * s * (s + 1.0)))
            }
            TestDistribution::TruncatedGamma { shape, scale, hi } => {
                let z = gamma_lr(shape, hi / scale);
                let m1 = scale * shape * gamma_lr(shape + 1.0, hi / scale) / z;
                let m2 = scale * scale * shape * (shape + 1.0) * gamma_lr(shape + 2.0, hi / scale) / z;
                (m1, m2 - m1 * m1)
            }
            TestDistribution::TruncatedNormal { mu, sigma, lo, hi } => {
                let c = TruncNormal { weight: 1.0, mu, sigma, lo, hi };
                (c.mean(), c.variance())
            }
            TestDistribution::NormalMixture { .. } => {
                let parts = self.mixture_parts();
                let mean: f64 = parts.iter().map(|c| c.weight * c.mean()).sum();
                let second: f64 =
                    parts.iter().map(|c| c.weight * (c.variance() + c.mean().powi(2))).sum();
                (mean, second - mean * mean)
            }
            TestDistribution::NearlyNormal { k } => (0.5, 1.0 / (12.0 * k as f64)),
            TestDistribution::NearlyNormalMixture { k } => {
                let v = 1.0 / (12.0 * k as f64);
                // components 1.5 U and 1 + 2 U with U ~ NN(k)
                let (m1, v1) = (0.75, 2.25 * v);
                let (m2, v2) = (2.0, 4.0 * v);
                let mean = 0.5 * (m1 + m2);
                let second = 0.5 * (v1 + m1 * m1) + 0.5 * (v2 + m2 * m2);
                (mean, second - mean * mean)
            }
        }
    }

    /// Lower bound `m_b` from the population moments of the law mapped onto [0, 1].
    pub fn population_mb(&self) -> Result<usize> {
        let (lo, hi) = self.support();
        let w = hi - lo;
        let (mean, var) = self.moments();
        mb_from_moments((mean - lo) / w, var / (w * w))
    }

    /// Mixture components with weights adjusted by their truncated masses.
    fn mixture_parts(&self) -> [TruncNormal; 2] {
        match *self {
            TestDistribution::NormalMixture { w, mu1, s1, mu2, s2, lo, hi } => {
                let z1 = w * normal_mass(mu1, s1, lo, hi);
                let z2 = (1.0 - w) * normal_mass(mu2, s2, lo, hi);
                let total = z1 + z2;
                [
                    TruncNormal { weight: z1 / total, mu: mu1, sigma: s1, lo, hi },
                    TruncNormal { weight: z2 / total, mu: mu2, sigma: s2, lo, hi },
                ]
            }
            _ => unreachable!("not a normal mixture"),
        }
    }

    /// One draw. Truncated laws are sampled by inversion.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            TestDistribution::Beta { a, b } => Beta::new(a, b).expect("validated").sample(rng),
            TestDistribution::TruncatedGamma { shape, scale, hi } => {
                truncated_gamma_quantile(shape, scale, hi, rng.random())
            }
            TestDistribution::TruncatedNormal { mu, sigma, lo, hi } => {
                TruncNormal { weight: 1.0, mu, sigma, lo, hi }.quantile(rng.random())
            }
            TestDistribution::NormalMixture { .. } => {
                let [c1, c2] = self.mixture_parts();
                let pick: f64 = rng.random();
                let u: f64 = rng.random();
                if pick < c1.weight {
                    c1.quantile(u)
                } else {
                    c2.quantile(u)
                }
            }
            TestDistribution::NearlyNormal { k } => uniform_mean(rng, k),
            TestDistribution::NearlyNormalMixture { k } => {
                if rng.random::<f64>() < 0.5 {
                    1.5 * uniform_mean(rng, k)
                } else {
                    1.0 + 2.0 * uniform_mean(rng, k)
                }
            }
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        if n == 0 {
            return Err(Error::domain("sample size must be >= 1"));
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }
}

fn uniform_mean<R: Rng + ?Sized>(rng: &mut R, k: u32) -> f64 {
    (0..k).map(|_| rng.random::<f64>()).sum::<f64>() / k as f64
}

fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    let log_kernel = |e: f64, v: f64| if e == 0.0 { 0.0 } else { e * v.ln() };
    (log_kernel(a - 1.0, x) + log_kernel(b - 1.0, 1.0 - x) - ln_beta(a, b)).exp()
}

fn gamma_pdf(shape: f64, scale: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if shape == 1.0 { 1.0 / scale } else if shape < 1.0 { f64::INFINITY } else { 0.0 };
    }
    ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
}

fn normal_mass(mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    norm_cdf((hi - mu) / sigma) - norm_cdf((lo - mu) / sigma)
}

fn truncated_gamma_quantile(shape: f64, scale: f64, hi: f64, u: f64) -> f64 {
    let target = u * gamma_lr(shape, hi / scale);
    let (mut a, mut b) = (0.0, hi);
    while b - a > GAMMA_QUANTILE_TOL * hi {
        let mid = 0.5 * (a + b);
        if gamma_lr(shape, mid / scale) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy)]
struct TruncNormal {
    weight: f64,
    mu: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
}

impl TruncNormal {
    fn bounds(&self) -> (f64, f64) {
        ((self.lo - self.mu) / self.sigma, (self.hi - self.mu) / self.sigma)
    }

    fn mass(&self) -> f64 {
        normal_mass(self.mu, self.sigma, self.lo, self.hi)
    }

    fn pdf(&self, x: f64) -> f64 {
        if !(self.lo..=self.hi).contains(&x) {
            return 0.0;
        }
        norm_pdf((x - self.mu) / self.sigma) / (self.sigma * self.mass())
    }

    fn cdf(&self, x: f64) -> f64 {
        let (al, _) = self.bounds();
        let x = x.clamp(self.lo, self.hi);
        ((norm_cdf((x - self.mu) / self.sigma) - norm_cdf(al)) / self.mass()).clamp(0.0, 1.0)
    }

    fn mean(&self) -> f64 {
        let (al, be) = self.bounds();
        self.mu + self.sigma * (norm_pdf(al) - norm_pdf(be)) / self.mass()
    }

    fn variance(&self) -> f64 {
        let (al, be) = self.bounds();
        let z = self.mass();
        let d = (norm_pdf(al) - norm_pdf(be)) / z;
        self.sigma * self.sigma * (1.0 + (al * norm_pdf(al) - be * norm_pdf(be)) / z - d * d)
    }

    fn quantile(&self, u: f64) -> f64 {
        let (al, _) = self.bounds();
        let p = norm_cdf(al) + u * self.mass();
        (self.mu + self.sigma * norm_quantile(p)).clamp(self.lo, self.hi)
    }
}

/// Irwin-Hall density of the sum of `k` uniforms.
fn irwin_hall_pdf(k: u32, x: f64) -> f64 {
    let kf = k as f64;
    if !(0.0..=kf).contains(&x) {
        return 0.0;
    }
    if k == 1 {
        return 1.0;
    }
    let top = (x.floor() as u32).min(k - 1);
    let norm = ln_gamma(kf);
    let mut total = 0.0;
    for j in 0..=top {
        let term = (ln_binomial(k as u64, j as u64) + (kf - 1.0) * (x - j as f64).ln() - norm).exp();
        total += if j % 2 == 0 { term } else { -term };
    }
    total.max(0.0)
}

fn irwin_hall_cdf(k: u32, x: f64) -> f64 {
    let kf = k as f64;
    if x <= 0.0 {
        return 0.0;
    }
    if x >= kf {
        return 1.0;
    }
    let top = x.floor() as u32;
    let norm = ln_gamma(kf + 1.0);
    let mut total = 0.0;
    for j in 0..=top {
        let term = (ln_binomial(k as u64, j as u64) + kf * (x - j as f64).ln() - norm).exp();
        total += if j % 2 == 0 { term } else { -term };
    }
    total.clamp(0.0, 1.0)
}

/// `ψ_k(t) = k f_IH(k t)`, the density of the mean of `k` uniforms.
fn irwin_hall_unit_pdf(k: u32, t: f64) -> f64 {
    k as f64 * irwin_hall_pdf(k, k as f64 * t)
}

fn irwin_hall_unit_cdf(k: u32, t: f64) -> f64 {
    irwin_hall_cdf(k, k as f64 * t)
}

impl fmt::Display for TestDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TestDistribution::Beta { a, b } => write!(f, "beta:{a},{b}"),
            TestDistribution::TruncatedGamma { shape, scale, hi } => {
                write!(f, "gamma:{shape},{scale},{hi}")
            }
            TestDistribution::TruncatedNormal { mu, sigma, lo, hi } => {
                write!(f, "normal:{mu},{sigma},{lo},{hi}")
            }
            TestDistribution::NormalMixture { w, mu1, s1, mu2, s2, lo, hi } => {
                write!(f, "nm:{w},{mu1},{s1},{mu2},{s2},{lo},{hi}")
            }
            TestDistribution::NearlyNormal { k } => write!(f, "nn:{k}"),
            TestDistribution::NearlyNormalMixture { k } => write!(f, "nnm:{k}"),
        }
    }
}

/// A named benchmark distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub label: &'static str,
    pub dist: TestDistribution,
}

/// The eight benchmark distributions.
pub fn presets() -> Vec<Preset> {
    vec![
        Preset { name: "uniform", label: "B(1,1)", dist: TestDistribution::Beta { a: 1.0, b: 1.0 } },
        Preset { name: "beta-5-7", label: "B(5,7)", dist: TestDistribution::Beta { a: 5.0, b: 7.0 } },
        Preset {
            name: "beta-2.5-10",
            label: "B(2.5,10)",
            dist: TestDistribution::Beta { a: 2.5, b: 10.0 },
        },
        Preset { name: "gamma-2-2", label: "G(2,2)", dist: TestDistribution::gamma(2.0, 2.0) },
        Preset {
            name: "normal",
            label: "N(0,1)",
            dist: TestDistribution::TruncatedNormal { mu: 0.0, sigma: 1.0, lo: -5.0, hi: 5.0 },
        },
        Preset {
            name: "normal-mixture",
            label: "NM",
            dist: TestDistribution::NormalMixture {
                w: 0.5,
                mu1: -1.0,
                s1: 0.5,
                mu2: 1.0,
                s2: 0.3,
                lo: -3.5,
                hi: 3.5,
            },
        },
        Preset { name: "nn4", label: "NN(4)", dist: TestDistribution::NearlyNormal { k: 4 } },
        Preset { name: "nnm4", label: "NNM", dist: TestDistribution::NearlyNormalMixture { k: 4 } },
    ]
}

impl FromStr for TestDistribution {
    type Err = Error;

    /// Accepts a preset name or `family:params`, e.g. `beta:5,7`, `gamma:2,2`,
    /// `gamma:2,2,18`, `normal:0,1,-5,5`, `nm:0.5,-1,0.5,1,0.3,-3.5,3.5`,
    /// `nn:4`, `nnm:4`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(p) = presets().into_iter().find(|p| p.name == s || p.label == s) {
            return Ok(p.dist);
        }
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::domain(format!("unknown distribution '{s}'")))?;
        let nums = |want: &[usize]| -> Result<Vec<f64>> {
            let v: Vec<f64> = rest
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::domain(format!("bad parameter in '{s}': {e}")))?;
            if want.contains(&v.len()) {
                Ok(v)
            } else {
                Err(Error::domain(format!("'{s}': expected {want:?} parameters, got {}", v.len())))
            }
        };
        let count = |v: f64| -> Result<u32> {
            if v.fract() == 0.0 && v >= 1.0 {
                Ok(v as u32)
            } else {
                Err(Error::domain(format!("'{s}': k must be a positive integer")))
            }
        };
        let d = match family {
            "beta" => {
                let v = nums(&[2])?;
                TestDistribution::Beta { a: v[0], b: v[1] }
            }
            "gamma" => {
                let v = nums(&[2, 3])?;
                match v.len() {
                    2 => TestDistribution::gamma(v[0], v[1]),
                    _ => TestDistribution::TruncatedGamma { shape: v[0], scale: v[1], hi: v[2] },
                }
            }
            "normal" => {
                let v = nums(&[4])?;
                TestDistribution::TruncatedNormal { mu: v[0], sigma: v[1], lo: v[2], hi: v[3] }
            }
            "nm" => {
                let v = nums(&[7])?;
                TestDistribution::NormalMixture {
                    w: v[0],
                    mu1: v[1],
                    s1: v[2],
                    mu2: v[3],
                    s2: v[4],
                    lo: v[5],
                    hi: v[6],
                }
            }
            "nn" => TestDistribution::NearlyNormal { k: count(nums(&[1])?[0])? },
            "nnm" => TestDistribution::NearlyNormalMixture { k: count(nums(&[1])?[0])? },
            other => return Err(Error::domain(format!("unknown family '{other}'"))),
        };
        d.validate()?;
        Ok(d)
    }
}
