//! Cell-centered radial mesh on `[0, r_max]` and the operators that act on
//! radial profiles over the plane.
//!
//! Node `i` (0-based) sits at `r_i = (i + 1/2) h` with `h = r_max / n`, so no
//! node touches the origin. Cell `i` spans the faces `[i h, (i + 1) h]`.
//! Quadrature weights are `w_i = 2π r_i h`, which makes every integral here an
//! integral over the plane of a radial function. Fields are extended by zero
//! beyond `r_max`.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: usize,
    r_max: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: usize, r_max: f64) -> Result<Self> {
        if n < MIN_CELLS || !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::DegenerateGrid { n, r_max });
        }
        let h = r_max / n as f64;
        let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let weights = nodes
            .iter()
            .map(|&r| 2.0 * std::f64::consts::PI * r * h)
            .collect();
        Ok(Self {
            n,
            r_max,
            h,
            nodes,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Radius of the outer face of cell `i`, `(i + 1) h`.
    pub fn outer_face(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    /// Index of the node nearest to `r`, clamped to the grid.
    pub fn nearest_node(&self, r: f64) -> usize {
        let i = (r / self.h - 0.5).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }

    /// Same node layout (`n` and `r_max` agree).
    pub fn is_compatible(&self, other: &RadialGrid) -> bool {
        self.n == other.n && self.r_max == other.r_max
    }
}

/// Builds a shared grid; fields hold it by `Arc`.
pub fn make_grid(n: usize, r_max: f64) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(n, r_max).map(Arc::new)
}

/// Sample types that can be checked for finiteness.
pub trait Sample: Copy {
    fn is_finite_sample(&self) -> bool;
}

impl Sample for f64 {
    fn is_finite_sample(&self) -> bool {
        self.is_finite()
    }
}

impl Sample for Complex64 {
    fn is_finite_sample(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Sample for Vec3 {
    fn is_finite_sample(&self) -> bool {
        self.iter().all(|c| c.is_finite())
    }
}

/// Samples of a radial profile at the grid nodes.
#[derive(Debug, Clone)]
pub struct RadialField<T> {
    grid: Arc<RadialGrid>,
    values: Vec<T>,
}

pub type RealRadialField = RadialField<f64>;
/// Profile `q(r)` of the angular-momentum-one function `e^{iθ} q(r)`.
pub type ComplexRadialField = RadialField<Complex64>;
pub type VectorRadialField = RadialField<Vec3>;

impl<T: Sample> RadialField<T> {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite_sample()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> T) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self
    where
        T: Default,
    {
        let values = vec![T::default(); grid.n()];
        Self { grid, values }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite_sample())
    }
}

impl<T> RadialField<T> {
    /// Skips validation; for operator outputs whose inputs were already checked.
    pub(crate) fn from_parts(grid: Arc<RadialGrid>, values: Vec<T>) -> Self {
        debug_assert_eq!(grid.n(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> RadialField<U> {
        RadialField::from_parts(self.grid.clone(), self.values.iter().map(f).collect())
    }

    pub fn ensure_same_grid<U>(&self, other: &RadialField<U>) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.is_compatible(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl ComplexRadialField {
    pub fn abs_sq(&self) -> RealRadialField {
        self.map(|z| z.norm_sqr())
    }

    pub fn conj(&self) -> ComplexRadialField {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, c: Complex64) -> ComplexRadialField {
        self.map(|z| z * c)
    }
}

impl RealRadialField {
    pub fn to_complex(&self) -> ComplexRadialField {
        self.map(|&x| Complex64::new(x, 0.0))
    }
}

/// `Σ w_i f_i`: the integral over the plane of the piecewise-constant extension.
pub fn integrate(f: &RealRadialField) -> f64 {
    f.values
        .iter()
        .zip(f.grid.weights())
        .map(|(v, w)| v * w)
        .sum()
}

/// Weighted inner product `Σ w_i conj(p_i) q_i`.
pub fn inner(p: &ComplexRadialField, q: &ComplexRadialField) -> Result<Complex64> {
    p.ensure_same_grid(q)?;
    Ok(p.values
        .iter()
        .zip(&q.values)
        .zip(p.grid.weights())
        .map(|((a, b), w)| a.conj() * b * *w)
        .sum())
}

pub fn l2_norm(q: &ComplexRadialField) -> f64 {
    q.values
        .iter()
        .zip(q.grid.weights())
        .map(|(z, w)| z.norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

pub fn lp_norm(f: &RealRadialField, p: f64) -> f64 {
    f.values
        .iter()
        .zip(f.grid.weights())
        .map(|(v, w)| v.abs().powf(p) * w)
        .sum::<f64>()
        .powf(1.0 / p)
}

/// `I(f)(r) = ∫_r^{r_max} f(ρ) dρ/ρ`, integrated exactly for the
/// piecewise-constant extension of `f`.
pub fn nonlocal_i(f: &RealRadialField) -> RealRadialField {
    let n = f.grid.n();
    let v = &f.values;
    let mut out = vec![0.0; n];
    // Contribution of all cells strictly outside the current one.
    let mut tail = 0.0;
    for i in (0..n).rev() {
        let fi = i as f64;
        // ∫_{r_i}^{(i+1)h} dρ/ρ = ln((i+1)/(i+1/2))
        out[i] = tail + v[i] * (0.5 / (fi + 0.5)).ln_1p();
        if i > 0 {
            // ∫_{ih}^{(i+1)h} dρ/ρ = ln((i+1)/i)
            tail += v[i] * (1.0 / fi).ln_1p();
        }
    }
    RadialField::from_parts(f.grid.clone(), out)
}

/// Conservative second-order stencil for `(1/r)(r f_r)_r`.
///
/// The inner face sits at `r = 0` and carries zero weight, which is the same
/// as reflecting through the origin with either parity. `outer` is the ghost
/// value one cell beyond `r_max`.
pub(crate) fn radial_divergence_stencil<T>(grid: &RadialGrid, v: &[T], outer: T) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = grid.n();
    let h = grid.h();
    let h2 = h * h;
    let nodes = grid.nodes();
    (0..n)
        .map(|i| {
            let right = if i + 1 < n { v[i + 1] } else { outer };
            let left = if i == 0 { v[0] } else { v[i - 1] };
            let face_out = (i + 1) as f64 * h;
            let face_in = i as f64 * h;
            let flux_out = (right - v[i]) * face_out;
            let flux_in = (v[i] - left) * face_in;
            (flux_out - flux_in) * (1.0 / (h2 * nodes[i]))
        })
        .collect()
}

/// `q_rr + q_r/r − q/r²`: the plane Laplacian acting on `e^{iθ} q(r)`.
///
/// Zero ghost beyond `r_max`. The discrete operator is symmetric and negative
/// definite in the weighted inner product.
pub fn laplacian_m1(q: &ComplexRadialField) -> ComplexRadialField {
    let grid = &q.grid;
    let mut out = radial_divergence_stencil(grid, &q.values, Complex64::new(0.0, 0.0));
    for ((o, z), r) in out.iter_mut().zip(&q.values).zip(grid.nodes()) {
        *o -= z / (r * r);
    }
    RadialField::from_parts(grid.clone(), out)
}

/// `f_rr + f_r/r`, componentwise for vector fields.
///
/// Zero-flux ghost at `r_max` (the ghost repeats the last sample), so a field
/// whose last cell holds its far-field value sees that value beyond the edge.
pub fn laplacian_m0<T>(f: &RadialField<T>) -> RadialField<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let outer = f.values[f.values.len() - 1];
    let out = radial_divergence_stencil(&f.grid, &f.values, outer);
    RadialField::from_parts(f.grid.clone(), out)
}

/// Differences across cell faces: `(radius of face, (v[i+1] − v[i]) / h)` for
/// every outer face `i = 0..n`, using `outer` as the ghost beyond `r_max`.
pub(crate) fn face_gradients<T>(grid: &RadialGrid, v: &[T], outer: T) -> Vec<(f64, T)>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = grid.n();
    let inv_h = 1.0 / grid.h();
    (0..n)
        .map(|i| {
            let right = if i + 1 < n { v[i + 1] } else { outer };
            (grid.outer_face(i), (right - v[i]) * inv_h)
        })
        .collect()
}

/// Quadrature weight `2π ρ h` attached to a face at radius `ρ`.
pub(crate) fn face_weight(grid: &RadialGrid, face: f64) -> f64 {
    2.0 * std::f64::consts::PI * face * grid.h()
}
