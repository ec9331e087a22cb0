//! Affine maps between raw data supports and the unit interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{iqr_sorted, sorted_copy};

/// IQR multiple used to extend unbounded ends of the support.
pub const IQR_MARGIN: f64 = 1.5;
/// Relative widening applied to the sample range so no point lands on 0 or 1.
pub const RANGE_WIDENING: f64 = 1e-9;

/// The interval `[a, b]` mapped affinely onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSupport")]
pub struct SupportMap {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawSupport {
    a: f64,
    b: f64,
}

impl TryFrom<RawSupport> for SupportMap {
    type Error = Error;
    fn try_from(r: RawSupport) -> Result<Self> {
        SupportMap::new(r.a, r.b)
    }
}

impl SupportMap {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::domain(format!("support [{a}, {b}] must be finite")));
        }
        if b <= a {
            return Err(Error::domain(format!("support [{a}, {b}] requires b > a")));
        }
        Ok(SupportMap { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.a..=self.b).contains(&x)
    }

    /// `(x - a)/(b - a)` without range checking.
    pub fn unit(&self, x: f64) -> f64 {
        (x - self.a) / (self.b - self.a)
    }

    /// `a + (b - a)·t`.
    pub fn raw(&self, t: f64) -> f64 {
        self.a + (self.b - self.a) * t
    }

    /// Maps data into [0, 1]; every point must lie in `[a, b]`.
    pub fn to_unit(&self, data: &[f64]) -> Result<Vec<f64>> {
        let outside: Vec<usize> = data
            .iter()
            .enumerate()
            .filter(|(_, x)| !self.contains(**x))
            .map(|(i, _)| i)
            .collect();
        if !outside.is_empty() {
            return Err(Error::OutsideSupport { a: self.a, b: self.b, indices: outside });
        }
        Ok(data.iter().map(|&x| self.unit(x).clamp(0.0, 1.0)).collect())
    }

    pub fn from_unit(&self, t: f64) -> f64 {
        self.raw(t)
    }
}

/// How to choose the support interval for a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportSpec {
    Known(f64, f64),
    LeftBounded(f64),
    RightBounded(f64),
    Unbounded,
    /// The sample range, widened by `RANGE_WIDENING` of its width at each end.
    DataRange,
}

/// Picks `[a, b] ⊇ [x_(1), x_(n)]` according to `spec`.
///
/// Open ends are placed `IQR_MARGIN`·IQR beyond the extreme order statistic
/// (and always strictly beyond it).
pub fn choose_support(data: &[f64], spec: SupportSpec) -> Result<SupportMap> {
    if data.is_empty() {
        return Err(Error::domain("cannot choose a support for an empty sample"));
    }
    if let Some(i) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::domain(format!("data point {i} is not finite")));
    }
    if let SupportSpec::Known(a, b) = spec {
        let map = SupportMap::new(a, b)?;
        map.to_unit(data)?;
        return Ok(map);
    }

    let sorted = sorted_copy(data);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if hi <= lo {
        return Err(Error::domain("degenerate sample: all points are equal"));
    }
    let eps = RANGE_WIDENING * (hi - lo);
    let margin = (IQR_MARGIN * iqr_sorted(&sorted)).max(eps);

    let (a, b) = match spec {
        SupportSpec::Known(..) => unreachable!(),
        SupportSpec::LeftBounded(a) => {
            if a > lo {
                return Err(Error::domain(format!("lower bound {a} exceeds sample minimum {lo}")));
            }
            (a, hi + margin)
        }
        SupportSpec::RightBounded(b) => {
            if b < hi {
                return Err(Error::domain(format!("upper bound {b} is below sample maximum {hi}")));
            }
            (lo - margin, b)
        }
        SupportSpec::Unbounded => (lo - margin, hi + margin),
        SupportSpec::DataRange => (lo - eps, hi + eps),
    };
    SupportMap::new(a, b)
}
