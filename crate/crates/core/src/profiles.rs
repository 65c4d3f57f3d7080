//! Initial data: the Gaussian angular-momentum-one profile, the meridian map
//! family, tabulated profiles, and randomized smooth corpora.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexRadialField, RadialGrid, RealRadialField};
use crate::hasimoto;
use crate::smap::{meridian_map, SphereMapField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `q = a r e^{−r²}`.
    GaussM1,
    /// `u = (sin g, 0, cos g)` with `g = a e^{−r²}`.
    Meridian,
    /// Tabulated `r, re[, im]` columns, scaled by `a`.
    Custom,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::GaussM1 => "gauss-m1",
            ProfileKind::Meridian => "meridian",
            ProfileKind::Custom => "custom",
        }
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-m1" => Ok(ProfileKind::GaussM1),
            "meridian" => Ok(ProfileKind::Meridian),
            "custom" => Ok(ProfileKind::Custom),
            other => Err(Error::Config(format!(
                "unknown profile '{other}' (expected gauss-m1, meridian or custom)"
            ))),
        }
    }
}

/// Piecewise-linear profile through tabulated samples; zero beyond the last
/// radius and constant before the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    r: Vec<f64>,
    values: Vec<Complex64>,
}

impl Table {
    /// Whitespace- or comma-separated rows `r re [im]`; `#` starts a comment
    /// and a non-numeric first row is taken as a header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let nums: std::result::Result<Vec<f64>, _> =
                cols.iter().map(|s| s.parse::<f64>()).collect();
            let nums = match nums {
                Ok(v) => v,
                Err(_) if r.is_empty() && values.is_empty() => continue,
                Err(_) => {
                    return Err(Error::Config(format!(
                        "profile table line {}: not numeric",
                        lineno + 1
                    )));
                }
            };
            if !(2..=3).contains(&nums.len()) || nums.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!(
                    "profile table line {}: expected 2 or 3 finite columns",
                    lineno + 1
                )));
            }
            if let Some(&last) = r.last() {
                if nums[0] <= last {
                    return Err(Error::Config(format!(
                        "profile table line {}: radii must increase",
                        lineno + 1
                    )));
                }
            }
            r.push(nums[0]);
            values.push(Complex64::new(nums[1], nums.get(2).copied().unwrap_or(0.0)));
        }
        if r.len() < 2 {
            return Err(Error::Config(
                "profile table needs at least two rows".into(),
            ));
        }
        Ok(Self { r, values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        let last = self.r.len() - 1;
        if r > self.r[last] {
            return Complex64::new(0.0, 0.0);
        }
        if r <= self.r[0] {
            return self.values[0];
        }
        let j = self.r.partition_point(|&x| x < r);
        let (r0, r1) = (self.r[j - 1], self.r[j]);
        let s = (r - r0) / (r1 - r0);
        self.values[j - 1] * (1.0 - s) + self.values[j] * s
    }
}

/// `a r e^{−r²}`.
pub fn gauss_m1(grid: Arc<RadialGrid>, amp: f64) -> Result<ComplexRadialField> {
    ComplexRadialField::from_fn(grid, |r| Complex64::new(amp * r * (-r * r).exp(), 0.0))
}

/// `(sin g, 0, cos g)`, `g = a e^{−r²}`.
pub fn meridian_gauss(grid: Arc<RadialGrid>, amp: f64) -> Result<SphereMapField> {
    meridian_map(grid, |r| amp * (-r * r).exp())
}

/// NLS data for a profile. Map profiles go through the frame transform.
pub fn nls_initial(
    kind: ProfileKind,
    grid: Arc<RadialGrid>,
    amp: f64,
    table: Option<&Table>,
) -> Result<ComplexRadialField> {
    match kind {
        ProfileKind::GaussM1 => gauss_m1(grid, amp),
        ProfileKind::Meridian => Ok(hasimoto::transform(&meridian_gauss(grid, amp)?)?.q),
        ProfileKind::Custom => {
            let t =
                table.ok_or_else(|| Error::Config("custom profile needs profile-file".into()))?;
            ComplexRadialField::from_fn(grid, |r| t.eval(r) * amp)
        }
    }
}

/// Map data for a profile. `q` profiles are turned into maps by the inverse
/// transform; a custom table supplies the meridian angle `g` (real column).
pub fn map_initial(
    kind: ProfileKind,
    grid: Arc<RadialGrid>,
    amp: f64,
    table: Option<&Table>,
) -> Result<SphereMapField> {
    match kind {
        ProfileKind::Meridian => meridian_gauss(grid, amp),
        ProfileKind::GaussM1 => Ok(hasimoto::reconstruct(&gauss_m1(grid, amp)?)?.u),
        ProfileKind::Custom => {
            let t =
                table.ok_or_else(|| Error::Config("custom profile needs profile-file".into()))?;
            meridian_map(grid, |r| amp * t.eval(r).re)
        }
    }
}

/// Random smooth bump `Σ c_k e^{−(r − m_k)²/s_k²}` with two or three terms,
/// centers in `[0.5, 4]` and widths in `[0.3, 1.5]`. Coefficients are
/// positive when `nonnegative` is set and of either sign otherwise.
pub fn random_bump(rng: &mut impl Rng, nonnegative: bool) -> impl Fn(f64) -> f64 {
    let terms = rng.gen_range(2..=3);
    let params: Vec<(f64, f64, f64)> = (0..terms)
        .map(|_| {
            let c = if nonnegative {
                rng.gen_range(0.1..1.0)
            } else {
                rng.gen_range(-1.0..1.0)
            };
            (c, rng.gen_range(0.5..4.0), rng.gen_range(0.3..1.5))
        })
        .collect();
    move |r| {
        params
            .iter()
            .map(|&(c, m, s)| c * (-((r - m) / s).powi(2)).exp())
            .sum()
    }
}

/// Samples a random bump on a grid.
pub fn random_real_profile(
    rng: &mut impl Rng,
    grid: Arc<RadialGrid>,
    nonnegative: bool,
) -> Result<RealRadialField> {
    let f = random_bump(rng, nonnegative);
    RealRadialField::from_fn(grid, f)
}
