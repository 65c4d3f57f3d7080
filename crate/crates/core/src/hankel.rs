//! Quadrature Hankel transforms on the radial grid.
//!
//! Forward: `ĥ(k) = ∫ q(r) J_ν(k r) r dr`, evaluated as `Σ_i (w_i / 2π) q_i J_ν(k r_i)`.
//! Inverse: `q(r) = ∫ ĥ(k) J_ν(k r) k dk`, midpoint rule on a cell-centered
//! frequency grid `k_j = (j + 1/2) dk`.
//!
//! Order 1 diagonalizes the angular-momentum-one Laplacian
//! (`q_rr + q_r/r − q/r² ↦ −k² ĥ`); order 0 is the plane Fourier transform of a
//! radial function. The frequency band is finite, so the pair is an identity
//! only on fields whose spectrum is negligible beyond `k_max`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexRadialField, RadialField, RadialGrid};

/// Default upper end of the frequency band when the grid resolves it.
pub const DEFAULT_K_MAX: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            BesselOrder::Zero => libm::j0(x),
            BesselOrder::One => libm::j1(x),
        }
    }
}

/// Samples of a transform on the frequency grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub k: Vec<f64>,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct HankelPair {
    grid: Arc<RadialGrid>,
    order: BesselOrder,
    k: Vec<f64>,
    dk: f64,
    // kernel[j * n + i] = J_ν(k_j r_i)
    kernel: Vec<f64>,
}

impl HankelPair {
    /// Band `[0, min(π/h, 32)]` with spacing `dk = π / (4 r_max)`.
    pub fn new(grid: Arc<RadialGrid>, order: BesselOrder) -> Self {
        let k_max = (PI / grid.h()).min(DEFAULT_K_MAX);
        let dk = PI / (4.0 * grid.r_max());
        let m = (k_max / dk).ceil().max(1.0) as usize;
        Self::build(grid, order, k_max, m)
    }

    pub fn with_band(
        grid: Arc<RadialGrid>,
        order: BesselOrder,
        k_max: f64,
        m: usize,
    ) -> Result<Self> {
        if !(k_max > 0.0) || !k_max.is_finite() || m == 0 {
            return Err(Error::InvalidArgument(format!(
                "frequency band needs k_max > 0 and m > 0 (got {k_max}, {m})"
            )));
        }
        Ok(Self::build(grid, order, k_max, m))
    }

    fn build(grid: Arc<RadialGrid>, order: BesselOrder, k_max: f64, m: usize) -> Self {
        let dk = k_max / m as f64;
        let k: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) * dk).collect();
        let mut kernel = Vec::with_capacity(m * grid.n());
        for &kj in &k {
            kernel.extend(grid.nodes().iter().map(|&r| order.eval(kj * r)));
        }
        Self {
            grid,
            order,
            k,
            dk,
            kernel,
        }
    }

    pub fn order(&self) -> BesselOrder {
        self.order
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.k
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn forward(&self, q: &ComplexRadialField) -> Result<Spectrum> {
        if !q.grid().is_compatible(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.n();
        let scaled: Vec<Complex64> = q
            .values()
            .iter()
            .zip(self.grid.weights())
            .map(|(z, w)| z * (w / (2.0 * PI)))
            .collect();
        let values = self
            .kernel
            .chunks_exact(n)
            .map(|row| row.iter().zip(&scaled).map(|(j, z)| z * *j).sum())
            .collect();
        Ok(Spectrum {
            k: self.k.clone(),
            values,
        })
    }

    pub fn inverse(&self, s: &Spectrum) -> Result<ComplexRadialField> {
        if s.values.len() != self.k.len() {
            return Err(Error::LengthMismatch {
                expected: self.k.len(),
                got: s.values.len(),
            });
        }
        let n = self.grid.n();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for ((row, &kj), z) in self.kernel.chunks_exact(n).zip(&self.k).zip(&s.values) {
            let c = z * (kj * self.dk);
            for (o, j) in out.iter_mut().zip(row) {
                *o += c * *j;
            }
        }
        Ok(RadialField::from_parts(self.grid.clone(), out))
    }

    /// Multiplies the spectrum by `m(k)` between the two transforms.
    pub fn apply_multiplier(
        &self,
        q: &ComplexRadialField,
        multiplier: impl Fn(f64) -> Complex64,
    ) -> Result<ComplexRadialField> {
        let mut s = self.forward(q)?;
        for (v, &k) in s.values.iter_mut().zip(&s.k) {
            *v *= multiplier(k);
        }
        self.inverse(&s)
    }
}

/// The order-one pair used by the linear-evolution oracle.
pub fn hankel1_pair(grid: Arc<RadialGrid>) -> HankelPair {
    HankelPair::new(grid, BesselOrder::One)
}
