//! Conserved, monotone and comparative functionals of `q` and `u`.
//!
//! Gradients are taken across cell faces (zero ghost beyond `r_max` for `q`,
//! `k̂` for `u`) and weighted with the face quadrature `2π ρ h`; everything
//! else uses the node weights. With this choice the discrete energy and the
//! discrete mass are exact invariants of the semi-discrete schemes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    face_gradients, face_weight, ComplexRadialField, RadialGrid, RealRadialField, Vec3,
};
use crate::nls::{NlsParams, NlsState};
use crate::smap::SphereMapField;

/// `‖q‖²_{L²}`.
pub fn mass(q: &ComplexRadialField) -> f64 {
    q.values()
        .iter()
        .zip(q.grid().weights())
        .map(|(z, w)| z.norm_sqr() * w)
        .sum()
}

/// `‖q‖⁴_{L⁴}`.
pub fn l4_norm4(q: &ComplexRadialField) -> f64 {
    q.values()
        .iter()
        .zip(q.grid().weights())
        .map(|(z, w)| z.norm_sqr().powi(2) * w)
        .sum()
}

/// `E(u) = ½ ‖u_r‖²_{L²}`.
pub fn energy(u: &SphereMapField) -> f64 {
    let grid = u.grid();
    0.5 * face_gradients(grid, u.values(), Vec3::z())
        .into_iter()
        .map(|(rho, d)| face_weight(grid, rho) * d.norm_squared())
        .sum::<f64>()
}

/// `‖u − k̂‖²_{L²}`.
pub fn mass_dev(u: &SphereMapField) -> f64 {
    let k = Vec3::z();
    u.values()
        .iter()
        .zip(u.grid().weights())
        .map(|(v, w)| (v - k).norm_squared() * w)
        .sum()
}

/// `Σ_faces 2πρh · c(ρ) |q_r|²`.
fn kinetic(q: &ComplexRadialField, c: impl Fn(f64) -> f64) -> f64 {
    let grid = q.grid();
    face_gradients(grid, q.values(), Complex64::new(0.0, 0.0))
        .into_iter()
        .map(|(rho, d)| face_weight(grid, rho) * c(rho) * d.norm_sqr())
        .sum()
}

/// `Σ_faces 2πρh · c(ρ) Im(q̄ q_r)` with the face momentum `Im(q̄_i q_{i+1})/h`.
fn momentum(q: &ComplexRadialField, c: impl Fn(f64) -> f64) -> f64 {
    let grid = q.grid();
    let v = q.values();
    let n = grid.n();
    let inv_h = 1.0 / grid.h();
    (0..n - 1)
        .map(|i| {
            let rho = grid.outer_face(i);
            let j = (v[i].conj() * v[i + 1]).im * inv_h;
            face_weight(grid, rho) * c(rho) * j
        })
        .sum()
}

/// `Σ_nodes w (a(r) |q|²/r² + b(r) |q|⁴)`.
fn potential_terms(q: &ComplexRadialField, a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> f64 {
    let grid = q.grid();
    q.values()
        .iter()
        .zip(grid.nodes())
        .zip(grid.weights())
        .map(|((z, &r), w)| {
            let d = z.norm_sqr();
            w * (a(r) * d / (r * r) + b(r) * d * d)
        })
        .sum()
}

/// `V = ½∫ r²|q|²` and its second time derivative
/// `∫ 4|q_r|² + 4|q|²/r² + (2K − λ)|q|⁴`.
pub fn virial_pair(q: &ComplexRadialField, p: &NlsParams) -> (f64, f64) {
    let grid = q.grid();
    let v = 0.5
        * q.values()
            .iter()
            .zip(grid.nodes())
            .zip(grid.weights())
            .map(|((z, r), w)| w * r * r * z.norm_sqr())
            .sum::<f64>();
    let c4 = 2.0 * p.coupling - p.lambda_f64();
    let rhs = kinetic(q, |_| 4.0) + potential_terms(q, |_| 4.0, |_| c4);
    (v, rhs)
}

/// `M = ∫ r|q|²` and its second time derivative
/// `∫ 3|q|²/r³ + (2K − λ/2)|q|⁴/r`.
pub fn morawetz_pair(q: &ComplexRadialField, p: &NlsParams) -> (f64, f64) {
    let grid = q.grid();
    let m = q
        .values()
        .iter()
        .zip(grid.nodes())
        .zip(grid.weights())
        .map(|((z, r), w)| w * r * z.norm_sqr())
        .sum::<f64>();
    let c4 = 2.0 * p.coupling - 0.5 * p.lambda_f64();
    let rhs = potential_terms(q, |r| 3.0 / r, |r| c4 / r);
    (m, rhs)
}

/// `χ` and its first three derivatives at `s`: one on `[0, 1]`, zero from
/// `2` on, and the degree-seven smoothstep between, which matches both ends
/// to third order.
pub fn cutoff(s: f64) -> [f64; 4] {
    if s <= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    if s >= 2.0 {
        return [0.0; 4];
    }
    let x = s - 1.0;
    let x2 = x * x;
    let x3 = x2 * x;
    let x4 = x3 * x;
    [
        1.0 - 35.0 * x4 + 84.0 * x4 * x - 70.0 * x4 * x2 + 20.0 * x4 * x3,
        -140.0 * x3 * (1.0 - x).powi(3),
        -420.0 * x2 + 1680.0 * x3 - 2100.0 * x4 + 840.0 * x4 * x,
        -840.0 * x + 5040.0 * x2 - 8400.0 * x3 + 4200.0 * x4,
    ]
}

/// `φ_R(r) = χ(r/R)` with derivatives in `r`.
pub fn cutoff_radial(r: f64, radius: f64) -> [f64; 4] {
    let [c0, c1, c2, c3] = cutoff(r / radius);
    [c0, c1 / radius, c2 / (radius * radius), c3 / radius.powi(3)]
}

/// `I_R = ∫ r Im(q̄ q_r) φ_R` and its time derivative
///
/// ```text
/// ∫ 2(φ + rφ')|q_r|² + (2φ − (3/2)rφ' − (5/2)r²φ'' − ½r³φ''')|q|²/r²
///   + ((K − λ/2)φ − (λ/4) rφ')|q|⁴
/// ```
///
/// obtained by differentiating along the flow. Requires `R ≥ 4h`.
pub fn local_virial_pair(q: &ComplexRadialField, p: &NlsParams, radius: f64) -> Result<(f64, f64)> {
    let grid = q.grid();
    if !(radius >= 4.0 * grid.h()) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "virial radius {radius} below 4h = {}",
            4.0 * grid.h()
        )));
    }
    let phi = |r: f64| cutoff_radial(r, radius);
    let i_r = momentum(q, |r| r * phi(r)[0]);
    let lambda = p.lambda_f64();
    let rhs = kinetic(q, |r| {
        let [f0, f1, ..] = phi(r);
        2.0 * (f0 + r * f1)
    }) + potential_terms(
        q,
        |r| {
            let [f0, f1, f2, f3] = phi(r);
            2.0 * f0 - 1.5 * r * f1 - 2.5 * r * r * f2 - 0.5 * r * r * r * f3
        },
        |r| {
            let [f0, f1, ..] = phi(r);
            (p.coupling - 0.5 * lambda) * f0 - 0.25 * lambda * r * f1
        },
    );
    Ok((i_r, rhs))
}

/// Values of the Morawetz weight and its companions at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzWeight {
    pub psi: f64,
    pub psi_r: f64,
    pub psi_rr: f64,
    pub psi_rrr: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl MorawetzWeight {
    fn from_derivatives(r: f64, [psi, psi_r, psi_rr, psi_rrr]: [f64; 4]) -> Self {
        Self {
            psi,
            psi_r,
            psi_rr,
            psi_rrr,
            alpha: 0.5 * psi_r + 1.5 * psi / r - r * psi_rr - 0.5 * r * r * psi_rrr,
            beta: psi / r - psi_r,
        }
    }
}

/// `ψ = 4r − r²` and derivatives (used on `(0, 1]`).
pub fn inner_branch(r: f64) -> MorawetzWeight {
    MorawetzWeight::from_derivatives(r, [4.0 * r - r * r, 4.0 - 2.0 * r, -2.0, 0.0])
}

/// `ψ = 6 − 4/r + 1/r²` and derivatives (used on `(1, ∞)`).
pub fn outer_branch(r: f64) -> MorawetzWeight {
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r3 * r;
    let r5 = r4 * r;
    MorawetzWeight::from_derivatives(
        r,
        [
            6.0 - 4.0 / r + 1.0 / r2,
            4.0 / r2 - 2.0 / r3,
            -8.0 / r3 + 6.0 / r4,
            24.0 / r4 - 24.0 / r5,
        ],
    )
}

pub fn weight_functions(r: f64) -> Result<MorawetzWeight> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "weight radius must be positive (got {r})"
        )));
    }
    Ok(if r <= 1.0 {
        inner_branch(r)
    } else {
        outer_branch(r)
    })
}

/// `P = ∫ Im(q̄ q_r) ψ` and its time derivative
/// `∫ 2ψ_r|q_r|² + α|q|²/r² + ((K/2)β + μ(ψ/r + ψ_r))|q|⁴`.
pub fn morawetz_p_pair(q: &ComplexRadialField, p: &NlsParams) -> (f64, f64) {
    let w = |r: f64| weight_functions(r).expect("faces and nodes are positive");
    let mu = p.mu();
    let k = p.coupling;
    let pv = momentum(q, |r| w(r).psi);
    let rhs = kinetic(q, |r| 2.0 * w(r).psi_r)
        + potential_terms(
            q,
            |r| w(r).alpha,
            |r| {
                let m = w(r);
                0.5 * k * m.beta + mu * (m.psi / r + m.psi_r)
            },
        );
    (pv, rhs)
}

/// `∫ ‖q(t)‖⁴_{L⁴} dt` over a trajectory by the trapezoid rule on its samples.
pub fn l4_spacetime_accumulate(trajectory: &[NlsState]) -> f64 {
    trajectory
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (l4_norm4(&w[0].q) + l4_norm4(&w[1].q)))
        .sum()
}

/// `‖f‖_{L^p} / ‖r f_r‖_{L^p}` with `f_r` on the faces (zero beyond `r_max`).
/// `None` when the denominator vanishes.
pub fn hardy_ratio(f: &RealRadialField, p: f64) -> Option<f64> {
    let grid: &RadialGrid = f.grid();
    let num: f64 = f
        .values()
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| w * v.abs().powf(p))
        .sum();
    let den: f64 = face_gradients(grid, f.values(), 0.0)
        .into_iter()
        .map(|(rho, d)| face_weight(grid, rho) * (rho * d).abs().powf(p))
        .sum();
    (den > 0.0).then(|| (num / den).powf(1.0 / p))
}

/// One time-series record. Map quantities are `None` for pure NLS runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass_q: f64,
    pub energy_u: Option<f64>,
    pub mass_u: Option<f64>,
    pub virial_v: f64,
    pub virial_rhs: f64,
    pub morawetz_m: f64,
    pub morawetz_rhs: f64,
    pub p: f64,
    pub p_rhs: f64,
    pub i_r: f64,
    pub i_r_rhs: f64,
    pub l4_accum: f64,
}

impl DiagnosticsRow {
    pub const COLUMNS: [&'static str; 13] = [
        "t",
        "mass_q",
        "energy_u",
        "mass_u",
        "virial_V",
        "virial_rhs",
        "morawetz_M",
        "morawetz_rhs",
        "P",
        "P_rhs",
        "I_R",
        "I_R_rhs",
        "l4_accum",
    ];

    /// Values in column order; absent map quantities are `None`.
    pub fn cells(&self) -> [Option<f64>; 13] {
        [
            Some(self.t),
            Some(self.mass_q),
            self.energy_u,
            self.mass_u,
            Some(self.virial_v),
            Some(self.virial_rhs),
            Some(self.morawetz_m),
            Some(self.morawetz_rhs),
            Some(self.p),
            Some(self.p_rhs),
            Some(self.i_r),
            Some(self.i_r_rhs),
            Some(self.l4_accum),
        ]
    }
}

/// All `q` functionals at one time.
pub fn nls_row(
    q: &ComplexRadialField,
    p: &NlsParams,
    radius: f64,
    t: f64,
    l4_accum: f64,
) -> Result<DiagnosticsRow> {
    let (virial_v, virial_rhs) = virial_pair(q, p);
    let (morawetz_m, morawetz_rhs) = morawetz_pair(q, p);
    let (pv, p_rhs) = morawetz_p_pair(q, p);
    let (i_r, i_r_rhs) = local_virial_pair(q, p, radius)?;
    Ok(DiagnosticsRow {
        t,
        mass_q: mass(q),
        energy_u: None,
        mass_u: None,
        virial_v,
        virial_rhs,
        morawetz_m,
        morawetz_rhs,
        p: pv,
        p_rhs,
        i_r,
        i_r_rhs,
        l4_accum,
    })
}

/// `q` functionals of the frame coordinates together with the map invariants.
pub fn map_row(
    u: &SphereMapField,
    q: &ComplexRadialField,
    radius: f64,
    t: f64,
    l4_accum: f64,
) -> Result<DiagnosticsRow> {
    let mut row = nls_row(q, &NlsParams::schrodinger_map(), radius, t, l4_accum)?;
    row.energy_u = Some(energy(u));
    row.mass_u = Some(mass_dev(u));
    Ok(row)
}
