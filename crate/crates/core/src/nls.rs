//! Time integration of the nonlocal cubic NLS
//!
//! ```text
//! i q_t = −q_rr − q_r/r + q/r² + (K ∫_r^∞ |q|² dρ/ρ − (λ/2)|q|²) q
//! ```
//!
//! by Strang splitting: an exact phase rotation for the potential (it only
//! depends on `|q|`, which the rotation leaves alone), around a Crank–Nicolson
//! step for the linear part. Both pieces are isometries of the weighted `L²`
//! norm.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::grid::{
    laplacian_m1, nonlocal_i, ComplexRadialField, RadialField, RadialGrid, RealRadialField,
};
use crate::hankel::hankel1_pair;

/// Relative mass drift beyond which `evolve` gives up.
pub const INSTABILITY_DRIFT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsParams {
    /// Coupling `K` of the nonlocal term.
    pub coupling: f64,
    /// Local cubic coefficient `λ ∈ {−1, 0, 1}`.
    pub lambda: i32,
}

impl NlsParams {
    pub fn new(coupling: f64, lambda: i32) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling K = {coupling}")));
        }
        if !(-1..=1).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be -1, 0 or 1 (got {lambda})"
            )));
        }
        Ok(Self { coupling, lambda })
    }

    /// `K = λ = 1`: the equation satisfied by the frame coordinates of a map.
    pub fn schrodinger_map() -> Self {
        Self {
            coupling: 1.0,
            lambda: 1,
        }
    }

    pub fn free() -> Self {
        Self {
            coupling: 0.0,
            lambda: 0,
        }
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda as f64
    }

    /// `2K ≥ max(λ, λ/2)`.
    pub fn is_defocusing(&self) -> bool {
        let l = self.lambda_f64();
        2.0 * self.coupling >= l.max(0.5 * l)
    }

    /// `μ = (2K − λ)/4`.
    pub fn mu(&self) -> f64 {
        0.25 * (2.0 * self.coupling - self.lambda_f64())
    }
}

#[derive(Debug, Clone)]
pub struct NlsState {
    pub t: f64,
    pub q: ComplexRadialField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub output_every: usize,
    pub linear_solve_tol: f64,
    /// Radius `R` of the localized virial functional; `r_max / 2` when unset.
    pub virial_radius: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            output_every: 10,
            linear_solve_tol: 1e-12,
            virial_radius: None,
        }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64, output_every: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            t_final,
            output_every,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive (got {})",
                self.dt
            )));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "t_final must be non-negative (got {})",
                self.t_final
            )));
        }
        if self.t_final > 0.0 && self.dt > self.t_final {
            return Err(Error::InvalidArgument(format!(
                "dt = {} exceeds t_final = {}",
                self.dt, self.t_final
            )));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidArgument(
                "output_every must be positive".into(),
            ));
        }
        if !(self.linear_solve_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "linear_solve_tol must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Whole number of steps reaching `t_final`; the step is shrunk slightly
    /// when `t_final / dt` is not an integer.
    pub fn step_plan(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let steps = (self.t_final / self.dt).round().max(1.0) as usize;
        (steps, self.t_final / steps as f64)
    }

    pub fn virial_radius_for(&self, grid: &RadialGrid) -> f64 {
        self.virial_radius.unwrap_or(0.5 * grid.r_max())
    }
}

/// `V[q] = K I(|q|²) − (λ/2)|q|²`.
pub fn potential(q: &ComplexRadialField, p: &NlsParams) -> RealRadialField {
    let density = q.abs_sq();
    let half_lambda = 0.5 * p.lambda_f64();
    if p.coupling == 0.0 {
        return density.map(|d| -half_lambda * d);
    }
    let nonlocal = nonlocal_i(&density);
    let values = nonlocal
        .values()
        .iter()
        .zip(density.values())
        .map(|(i, d)| p.coupling * i - half_lambda * d)
        .collect();
    RadialField::from_parts(q.grid().clone(), values)
}

/// `dq/dt = −i [ −(Δ − 1/r²) q + V[q] q ]`.
pub fn nls_rhs(q: &ComplexRadialField, p: &NlsParams) -> ComplexRadialField {
    let lap = laplacian_m1(q);
    let v = potential(q, p);
    let minus_i = Complex64::new(0.0, -1.0);
    let values = q
        .values()
        .iter()
        .zip(lap.values())
        .zip(v.values())
        .map(|((z, l), pot)| minus_i * (-l + z * pot))
        .collect();
    RadialField::from_parts(q.grid().clone(), values)
}

/// Crank–Nicolson propagator `(I + i a H)⁻¹ (I − i a H)` with `a = dt/2` and
/// `H = −(Δ − 1/r²)`, factored once for a fixed grid and step.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    // H in tridiagonal form: h_sub[i] = H[i][i-1], h_diag[i] = H[i][i], h_sup[i] = H[i][i+1]
    h_sub: Vec<f64>,
    h_diag: Vec<f64>,
    h_sup: Vec<f64>,
    half_dt: f64,
    // Thomas factorization of I + i a H
    elim: Vec<Complex64>,
    pivots: Vec<Complex64>,
    tol: f64,
}

impl CrankNicolson {
    pub fn new(grid: &RadialGrid, dt: f64, tol: f64) -> Result<Self> {
        let n = grid.n();
        let h = grid.h();
        let h2 = h * h;
        let mut h_sub = vec![0.0; n];
        let mut h_diag = vec![0.0; n];
        let mut h_sup = vec![0.0; n];
        for (i, &r) in grid.nodes().iter().enumerate() {
            let face_in = i as f64 * h;
            let face_out = (i + 1) as f64 * h;
            let s = 1.0 / (h2 * r);
            h_diag[i] = (face_in + face_out) * s + 1.0 / (r * r);
            if i > 0 {
                h_sub[i] = -face_in * s;
            }
            if i + 1 < n {
                h_sup[i] = -face_out * s;
            }
        }
        let half_dt = 0.5 * dt;
        let ia = Complex64::new(0.0, half_dt);
        let mut elim = vec![Complex64::new(0.0, 0.0); n];
        let mut pivots = vec![Complex64::new(0.0, 0.0); n];
        pivots[0] = 1.0 + ia * h_diag[0];
        for i in 1..n {
            let prev = pivots[i - 1];
            if !(prev.norm() > f64::MIN_POSITIVE) {
                return Err(Error::LinearSolve {
                    row: i - 1,
                    reason: "zero pivot".into(),
                });
            }
            let m = ia * h_sub[i] / prev;
            elim[i] = m;
            pivots[i] = 1.0 + ia * h_diag[i] - m * ia * h_sup[i - 1];
        }
        if let Some(row) = pivots
            .iter()
            .position(|p| !(p.norm() > f64::MIN_POSITIVE) || !p.re.is_finite())
        {
            return Err(Error::LinearSolve {
                row,
                reason: "singular Crank-Nicolson matrix".into(),
            });
        }
        Ok(Self {
            h_sub,
            h_diag,
            h_sup,
            half_dt,
            elim,
            pivots,
            tol,
        })
    }

    fn apply(&self, sign: f64, x: &[Complex64], out: &mut [Complex64]) {
        // out = (I + sign i a H) x
        let ia = Complex64::new(0.0, sign * self.half_dt);
        let n = x.len();
        for i in 0..n {
            let mut hx = self.h_diag[i] * x[i];
            if i > 0 {
                hx += self.h_sub[i] * x[i - 1];
            }
            if i + 1 < n {
                hx += self.h_sup[i] * x[i + 1];
            }
            out[i] = x[i] + ia * hx;
        }
    }

    /// Advances `q` in place by one linear step.
    pub fn step(&self, q: &mut [Complex64]) -> Result<()> {
        let n = q.len();
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        self.apply(-1.0, q, &mut rhs);
        let mut y = rhs.clone();
        for i in 1..n {
            let prev = y[i - 1];
            y[i] -= self.elim[i] * prev;
        }
        let ia = Complex64::new(0.0, self.half_dt);
        q[n - 1] = y[n - 1] / self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            q[i] = (y[i] - ia * self.h_sup[i] * q[i + 1]) / self.pivots[i];
        }

        let mut check = vec![Complex64::new(0.0, 0.0); n];
        self.apply(1.0, q, &mut check);
        let res: f64 = check
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = rhs.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
        if !res.is_finite() || res > self.tol * scale.max(f64::MIN_POSITIVE) {
            let row = check
                .iter()
                .zip(&rhs)
                .enumerate()
                .max_by(|a, b| {
                    (a.1 .0 - a.1 .1)
                        .norm()
                        .total_cmp(&(b.1 .0 - b.1 .1).norm())
                })
                .map(|(i, _)| i)
                .unwrap_or(0);
            return Err(Error::LinearSolve {
                row,
                reason: format!(
                    "relative residual {:e} above tolerance {:e}",
                    res / scale,
                    self.tol
                ),
            });
        }
        Ok(())
    }
}

/// Reusable Strang stepper for a fixed grid, parameter pair and step.
#[derive(Debug, Clone)]
pub struct StrangStepper {
    params: NlsParams,
    dt: f64,
    linear: CrankNicolson,
}

impl StrangStepper {
    /// `dt` may be negative, which steps backwards in time.
    pub fn new(
        grid: &RadialGrid,
        params: NlsParams,
        dt: f64,
        linear_solve_tol: f64,
    ) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidArgument(format!("time step {dt}")));
        }
        Ok(Self {
            params,
            dt,
            linear: CrankNicolson::new(grid, dt, linear_solve_tol)?,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn phase(&self, q: &mut ComplexRadialField, tau: f64) {
        let v = potential(q, &self.params);
        for (z, pot) in q.values_mut().iter_mut().zip(v.values()) {
            *z *= Complex64::from_polar(1.0, -tau * pot);
        }
    }

    pub fn step(&self, state: &mut NlsState) -> Result<()> {
        let half = 0.5 * self.dt;
        self.phase(&mut state.q, half);
        self.linear.step(state.q.values_mut())?;
        self.phase(&mut state.q, half);
        state.t += self.dt;
        Ok(())
    }
}

/// One Strang step of size `dt` (negative `dt` runs backwards).
pub fn step_strang(s: &NlsState, p: &NlsParams, dt: f64) -> Result<NlsState> {
    let stepper = StrangStepper::new(s.q.grid(), *p, dt, SolverConfig::default().linear_solve_tol)?;
    let mut next = s.clone();
    stepper.step(&mut next)?;
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct NlsTrajectory {
    pub params: NlsParams,
    pub states: Vec<NlsState>,
    pub rows: Vec<DiagnosticsRow>,
}

impl NlsTrajectory {
    pub fn final_state(&self) -> &NlsState {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }
}

/// Repeated Strang steps with states and diagnostics every `output_every` steps
/// (and always at the final time). The space-time `L⁴` accumulation is updated
/// every step by the trapezoid rule.
pub fn evolve(q0: &ComplexRadialField, p: &NlsParams, cfg: &SolverConfig) -> Result<NlsTrajectory> {
    cfg.validate()?;
    if !q0.all_finite() {
        return Err(Error::NonFiniteState { step: 0, t: 0.0 });
    }
    let grid = q0.grid().clone();
    let radius = cfg.virial_radius_for(&grid);
    let (steps, dt) = cfg.step_plan();

    let mut state = NlsState {
        t: 0.0,
        q: q0.clone(),
    };
    let mass0 = diagnostics::mass(&state.q);
    let mut l4 = 0.0;
    let mut l4_prev = diagnostics::l4_norm4(&state.q);
    let mut states = vec![state.clone()];
    let mut rows = vec![diagnostics::nls_row(&state.q, p, radius, state.t, l4)?];
    if steps == 0 {
        return Ok(NlsTrajectory {
            params: *p,
            states,
            rows,
        });
    }

    let stepper = StrangStepper::new(&grid, *p, dt, cfg.linear_solve_tol)?;
    for step in 1..=steps {
        stepper.step(&mut state)?;
        // step count times dt, so output times do not collect rounding; the
        // last one is exactly t_final
        state.t = if step == steps {
            cfg.t_final
        } else {
            step as f64 * dt
        };
        if !state.q.all_finite() {
            return Err(Error::NonFiniteState { step, t: state.t });
        }
        let m = diagnostics::mass(&state.q);
        let drift = if mass0 > 0.0 {
            (m - mass0).abs() / mass0
        } else {
            m
        };
        if drift > INSTABILITY_DRIFT {
            return Err(Error::Instability {
                step,
                t: state.t,
                drift,
            });
        }
        let l4_now = diagnostics::l4_norm4(&state.q);
        l4 += 0.5 * dt * (l4_prev + l4_now);
        l4_prev = l4_now;
        if step % cfg.output_every == 0 || step == steps {
            rows.push(diagnostics::nls_row(&state.q, p, radius, state.t, l4)?);
            states.push(state.clone());
        }
    }
    Ok(NlsTrajectory {
        params: *p,
        states,
        rows,
    })
}

/// Linear flow `i q_t = −(Δ − 1/r²) q` through the order-one Hankel transform:
/// each frequency picks up `e^{−i k² t}`.
pub fn free_evolution_exact(q0: &ComplexRadialField, t: f64) -> Result<ComplexRadialField> {
    let pair = hankel1_pair(q0.grid().clone());
    pair.apply_multiplier(q0, |k| Complex64::from_polar(1.0, -k * k * t))
}
