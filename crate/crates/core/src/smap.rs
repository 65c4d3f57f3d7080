//! Radial Schrödinger map flow `u_t = u × Δu`, `|u| = 1`, `u → k̂` at the
//! outer edge.
//!
//! Classical RK4 on the semi-discrete system followed by pointwise
//! renormalization. The last node is pinned at `k̂`. The scheme is explicit,
//! so `dt ≤ h²/4` is enforced.

use crate::diagnostics::{self, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::grid::{laplacian_m0, RadialField, RadialGrid, Vec3, VectorRadialField};
use crate::hasimoto;
use crate::nls::SolverConfig;

/// Tolerance on `| |u_i| − 1 |`.
pub const SPHERE_TOL: f64 = 1e-9;

/// Samples of a map into the unit sphere.
#[derive(Debug, Clone)]
pub struct SphereMapField(VectorRadialField);

impl SphereMapField {
    /// Checks finiteness and the sphere constraint at every node.
    pub fn new(field: VectorRadialField) -> Result<Self> {
        for (index, v) in field.values().iter().enumerate() {
            let norm = v.norm();
            if !norm.is_finite() {
                return Err(Error::NonFiniteSample { index });
            }
            if (norm - 1.0).abs() > SPHERE_TOL {
                return Err(Error::OffSphere { index, norm });
            }
        }
        Ok(Self(field))
    }

    pub fn from_fn(grid: std::sync::Arc<RadialGrid>, f: impl Fn(f64) -> Vec3) -> Result<Self> {
        Self::new(VectorRadialField::from_fn(grid, f)?)
    }

    /// The constant map `k̂`.
    pub fn north(grid: std::sync::Arc<RadialGrid>) -> Self {
        let n = grid.n();
        Self(RadialField::from_parts(grid, vec![Vec3::z(); n]))
    }

    /// Normalizes every sample; fails on a zero or non-finite vector.
    pub fn normalized(field: VectorRadialField) -> Result<Self> {
        let mut field = field;
        for (index, v) in field.values_mut().iter_mut().enumerate() {
            let norm = v.norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::NonFiniteSample { index });
            }
            *v /= norm;
        }
        Ok(Self(field))
    }

    pub fn field(&self) -> &VectorRadialField {
        &self.0
    }

    pub fn grid(&self) -> &std::sync::Arc<RadialGrid> {
        self.0.grid()
    }

    pub fn values(&self) -> &[Vec3] {
        self.0.values()
    }

    /// `|u_n − k̂|` at the outermost node.
    pub fn boundary_offset(&self) -> f64 {
        (self.values()[self.values().len() - 1] - Vec3::z()).norm()
    }

    /// Rotation by `angle` about the `k̂` axis.
    pub fn rotated_about_k(&self, angle: f64) -> Self {
        Self(self.0.map(|v| rotate_about_k(v, angle)))
    }
}

pub fn rotate_about_k(v: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

/// Meridian map `(sin g, 0, cos g)`.
pub fn meridian_map(
    grid: std::sync::Arc<RadialGrid>,
    g: impl Fn(f64) -> f64,
) -> Result<SphereMapField> {
    SphereMapField::from_fn(grid, |r| {
        let (s, c) = g(r).sin_cos();
        Vec3::new(s, 0.0, c)
    })
}

#[derive(Debug, Clone)]
pub struct SmapState {
    pub t: f64,
    pub u: SphereMapField,
}

/// `u × Δu` pointwise.
pub fn smap_rhs(u: &SphereMapField) -> VectorRadialField {
    rhs_values(u.field())
}

fn rhs_values(u: &VectorRadialField) -> VectorRadialField {
    let lap = laplacian_m0(u);
    let values = u
        .values()
        .iter()
        .zip(lap.values())
        .map(|(a, b)| a.cross(b))
        .collect();
    RadialField::from_parts(u.grid().clone(), values)
}

/// `h²/4`.
pub fn stability_limit(grid: &RadialGrid) -> f64 {
    0.25 * grid.h() * grid.h()
}

fn check_step(grid: &RadialGrid, dt: f64) -> Result<()> {
    let limit = stability_limit(grid);
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step {dt}")));
    }
    // a relative slack keeps dt computed as t_final / steps from tripping the bound
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StabilityBound { dt, limit });
    }
    Ok(())
}

fn rk4_project(u: &VectorRadialField, dt: f64) -> VectorRadialField {
    let grid = u.grid().clone();
    let n = u.len();
    let stage = |base: &VectorRadialField, k: &VectorRadialField, c: f64| {
        let mut vals: Vec<Vec3> = base
            .values()
            .iter()
            .zip(k.values())
            .map(|(a, b)| a + b * c)
            .collect();
        vals[n - 1] = Vec3::z();
        RadialField::from_parts(grid.clone(), vals)
    };
    let k1 = rhs_values(u);
    let k2 = rhs_values(&stage(u, &k1, 0.5 * dt));
    let k3 = rhs_values(&stage(u, &k2, 0.5 * dt));
    let k4 = rhs_values(&stage(u, &k3, dt));
    let mut vals: Vec<Vec3> = (0..n)
        .map(|i| {
            let inc =
                (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i])
                    * (dt / 6.0);
            let v = u.values()[i] + inc;
            v / v.norm()
        })
        .collect();
    vals[n - 1] = Vec3::z();
    RadialField::from_parts(grid, vals)
}

/// One RK4 step followed by projection back to the sphere.
pub fn step_rk4_project(s: &SmapState, dt: f64) -> Result<SmapState> {
    check_step(s.u.grid(), dt)?;
    let next = rk4_project(s.u.field(), dt);
    if !next.all_finite() {
        return Err(Error::NonFiniteState {
            step: 1,
            t: s.t + dt,
        });
    }
    Ok(SmapState {
        t: s.t + dt,
        u: SphereMapField(next),
    })
}

#[derive(Debug, Clone)]
pub struct SmapTrajectory {
    pub states: Vec<SmapState>,
    pub rows: Vec<DiagnosticsRow>,
}

impl SmapTrajectory {
    pub fn final_state(&self) -> &SmapState {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }
}

/// Repeated steps; states and diagnostics every `output_every` steps and at
/// the final time. The `q` columns of each row are the frame coordinates of
/// `u` at that time.
pub fn evolve_map(u0: &SphereMapField, cfg: &SolverConfig) -> Result<SmapTrajectory> {
    cfg.validate()?;
    let grid = u0.grid().clone();
    let (steps, dt) = cfg.step_plan();
    if steps > 0 {
        check_step(&grid, dt)?;
    }
    let radius = cfg.virial_radius_for(&grid);

    let row_at = |u: &SphereMapField, t: f64, l4: f64| -> Result<DiagnosticsRow> {
        let q = hasimoto::transform(u)?.q;
        diagnostics::map_row(u, &q, radius, t, l4)
    };

    let mut state = SmapState {
        t: 0.0,
        u: u0.clone(),
    };
    let mut l4 = 0.0;
    let mut l4_prev = l4_of(&state.u)?;
    let mut states = vec![state.clone()];
    let mut rows = vec![row_at(&state.u, 0.0, 0.0)?];
    let want_l4 = cfg.output_every;
    for step in 1..=steps {
        let next = rk4_project(state.u.field(), dt);
        let t = if step == steps {
            cfg.t_final
        } else {
            step as f64 * dt
        };
        if !next.all_finite() {
            return Err(Error::NonFiniteState { step, t });
        }
        state = SmapState {
            t,
            u: SphereMapField(next),
        };
        if step % want_l4 == 0 || step == steps {
            // L⁴ of the frame coordinates only needs |u_r|, sampled on the output cadence
            let l4_now = l4_of(&state.u)?;
            let span = rows.last().map_or(0.0, |r| t - r.t);
            l4 += 0.5 * span * (l4_prev + l4_now);
            l4_prev = l4_now;
            rows.push(row_at(&state.u, t, l4)?);
            states.push(state.clone());
        }
    }
    Ok(SmapTrajectory { states, rows })
}

fn l4_of(u: &SphereMapField) -> Result<f64> {
    Ok(diagnostics::l4_norm4(&hasimoto::transform(u)?.q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn constraint_is_checked() {
        let g = make_grid(16, 2.0).unwrap();
        let bad = VectorRadialField::from_fn(g.clone(), |_| Vec3::new(0.0, 0.0, 1.1)).unwrap();
        assert!(matches!(
            SphereMapField::new(bad),
            Err(Error::OffSphere { index: 0, .. })
        ));
        let ok = VectorRadialField::from_fn(g, |_| Vec3::new(0.0, 0.6, 0.8)).unwrap();
        assert!(SphereMapField::new(ok).is_ok());
    }

    #[test]
    fn north_pole_is_static() {
        let g = make_grid(32, 4.0).unwrap();
        let u = SphereMapField::north(g.clone());
        assert!(smap_rhs(&u).values().iter().all(|v| v.norm() == 0.0));
        let dt = stability_limit(&g);
        let s = step_rk4_project(&SmapState { t: 0.0, u }, dt).unwrap();
        assert!(s.u.values().iter().all(|v| *v == Vec3::z()));
    }

    #[test]
    fn step_above_bound_is_rejected() {
        let g = make_grid(32, 4.0).unwrap();
        let u = SphereMapField::north(g.clone());
        let dt = 2.0 * stability_limit(&g);
        assert!(matches!(
            step_rk4_project(&SmapState { t: 0.0, u }, dt),
            Err(Error::StabilityBound { .. })
        ));
    }

    #[test]
    fn projection_keeps_unit_length() {
        let g = make_grid(128, 8.0).unwrap();
        let u = meridian_map(g.clone(), |r| 0.8 * (-r * r).exp()).unwrap();
        let mut s = SmapState { t: 0.0, u };
        for _ in 0..20 {
            s = step_rk4_project(&s, stability_limit(&g)).unwrap();
        }
        for v in s.u.values() {
            assert!((v.norm() - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn rotation_about_k() {
        let v = rotate_about_k(&Vec3::x(), std::f64::consts::FRAC_PI_2);
        assert!((v - Vec3::y()).norm() < 1e-15);
    }
}
