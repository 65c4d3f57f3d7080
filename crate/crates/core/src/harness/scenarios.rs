use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use super::config::RunConfig;
use super::output::{self, fmt};
use super::{Criterion, Outcome};
use crate::diagnostics::{self, DiagnosticsRow};
use crate::error::Result;
use crate::grid::{inner, make_grid, ComplexRadialField, RadialGrid};
use crate::hasimoto;
use crate::nls::{self, NlsParams, NlsTrajectory, SolverConfig};
use crate::profiles::{self, ProfileKind, Table};
use crate::smap::{self, SmapTrajectory, SphereMapField};

fn relative_drift(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else { return 0.0 };
    let worst = it.map(|v| (v - first).abs()).fold(0.0, f64::max);
    if first != 0.0 {
        worst / first.abs()
    } else {
        worst
    }
}

fn load_table(cfg: &RunConfig) -> Result<Option<Table>> {
    match (&cfg.profile, &cfg.profile_file) {
        (ProfileKind::Custom, Some(p)) => Table::load(p).map(Some),
        _ => Ok(None),
    }
}

fn solver_config(cfg: &RunConfig, dt: f64, output_every: usize) -> Result<SolverConfig> {
    let mut s = SolverConfig::new(dt, cfg.t_final, output_every)?;
    s.virial_radius = cfg.radius;
    Ok(s)
}

/// Number of explicit map steps per configured step, so that each stays
/// within the stability bound.
pub fn map_substeps(grid: &RadialGrid, dt: f64) -> usize {
    (dt / smap::stability_limit(grid)).ceil().max(1.0) as usize
}

fn write_nls_output(dir: &Path, tr: &NlsTrajectory, series: &str, snap_prefix: &str) -> Result<()> {
    output::write_timeseries(&dir.join(series), &tr.rows)?;
    let snaps = dir.join("snapshots");
    output::create_dir(&snaps)?;
    for (i, s) in tr.states.iter().enumerate() {
        output::write_snapshot(&snaps.join(format!("{snap_prefix}_{i:05}.csv")), &s.q, None)?;
    }
    Ok(())
}

fn write_map_output(dir: &Path, tr: &SmapTrajectory) -> Result<()> {
    output::write_timeseries(&dir.join("timeseries.csv"), &tr.rows)?;
    let snaps = dir.join("snapshots");
    output::create_dir(&snaps)?;
    for (i, s) in tr.states.iter().enumerate() {
        let q = hasimoto::transform(&s.u)?.q;
        output::write_snapshot(
            &snaps.join(format!("map_{i:05}.csv")),
            &q,
            Some(s.u.values()),
        )?;
    }
    Ok(())
}

/// Morawetz functional increments and the `L⁴` indicator along NLS rows.
fn monotonicity_criteria(rows: &[DiagnosticsRow], p: &NlsParams) -> Vec<Criterion> {
    let mut out = Vec::new();
    let nontrivial = rows.first().is_some_and(|r| r.mass_q > 0.0);
    if p.is_defocusing() && nontrivial && rows.len() > 1 {
        let min_inc = rows
            .windows(2)
            .map(|w| w[1].p - w[0].p)
            .fold(f64::INFINITY, f64::min);
        out.push(Criterion::above("morawetz_P_min_increment", min_inc, 0.0));
    }
    let increments = unit_window_increments(rows);
    if increments.len() >= 2 {
        let decreasing = increments.windows(2).all(|w| w[1] < w[0]);
        out.push(
            Criterion::at_least(
                "l4_increments_decreasing",
                if decreasing { 1.0 } else { 0.0 },
                1.0,
            )
            .report_only()
            .with_note(format!(
                "unit-window increments: {}",
                increments
                    .iter()
                    .map(|x| fmt(*x))
                    .collect::<Vec<_>>()
                    .join(" ")
            )),
        );
    }
    out
}

/// `l4_accum` gained over `[k, k+1]` for every unit window the rows cover.
fn unit_window_increments(rows: &[DiagnosticsRow]) -> Vec<f64> {
    let Some(last) = rows.last() else {
        return Vec::new();
    };
    let at = |t: f64| {
        rows.iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .map(|r| r.l4_accum)
            .unwrap_or(0.0)
    };
    let windows = (last.t + 1e-9).floor() as usize;
    (0..windows)
        .map(|k| at((k + 1) as f64) - at(k as f64))
        .collect()
}

pub fn run_nls(cfg: &RunConfig) -> Result<Outcome> {
    let grid = make_grid(cfg.n, cfg.rmax)?;
    let table = load_table(cfg)?;
    let q0 = profiles::nls_initial(cfg.profile, grid, cfg.amp, table.as_ref())?;
    let scfg = solver_config(cfg, cfg.dt, cfg.output_every)?;
    let tr = nls::evolve(&q0, &cfg.params, &scfg)?;
    write_nls_output(&cfg.out, &tr, "timeseries.csv", "nls")?;

    let (steps, dt) = scfg.step_plan();
    let mut criteria = vec![Criterion::at_most(
        "mass_drift",
        relative_drift(tr.rows.iter().map(|r| r.mass_q)),
        1e-6,
    )];
    criteria.extend(monotonicity_criteria(&tr.rows, &cfg.params));
    Ok(Outcome {
        criteria,
        steps,
        dt_effective: dt,
        map_substeps: None,
    })
}

fn map_solver_config(cfg: &RunConfig, grid: &RadialGrid) -> Result<(SolverConfig, usize)> {
    let m = map_substeps(grid, cfg.dt);
    Ok((
        solver_config(cfg, cfg.dt / m as f64, cfg.output_every * m)?,
        m,
    ))
}

pub fn run_smap(cfg: &RunConfig) -> Result<Outcome> {
    let grid = make_grid(cfg.n, cfg.rmax)?;
    let table = load_table(cfg)?;
    let u0 = profiles::map_initial(cfg.profile, grid.clone(), cfg.amp, table.as_ref())?;
    let (scfg, m) = map_solver_config(cfg, &grid)?;
    let tr = smap::evolve_map(&u0, &scfg)?;
    write_map_output(&cfg.out, &tr)?;

    let sphere = tr
        .states
        .iter()
        .flat_map(|s| s.u.values().iter().map(|v| (v.norm() - 1.0).abs()))
        .fold(0.0, f64::max);
    let (steps, dt) = scfg.step_plan();
    Ok(Outcome {
        criteria: vec![
            Criterion::at_most(
                "energy_drift",
                relative_drift(tr.rows.iter().filter_map(|r| r.energy_u)),
                1e-4,
            ),
            Criterion::at_most(
                "mass_u_drift",
                relative_drift(tr.rows.iter().filter_map(|r| r.mass_u)),
                1e-4,
            ),
            Criterion::at_most("sphere_defect", sphere, 1e-12),
        ],
        steps,
        dt_effective: dt,
        map_substeps: Some(m),
    })
}

/// Relative `L²` distance after the best constant phase, and the same for the
/// moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub aligned: f64,
    pub modulus: f64,
    /// Phase `γ` applied to the first field.
    pub gamma: f64,
}

/// `min_γ ‖e^{iγ} a − b‖ / ‖b‖`, attained at `γ = arg⟨a, b⟩` with the inner
/// product conjugate-linear in its first slot.
pub fn phase_aligned_discrepancy(
    a: &ComplexRadialField,
    b: &ComplexRadialField,
) -> Result<Discrepancy> {
    let ip = inner(a, b)?;
    let gamma = if ip.norm() > 0.0 { ip.arg() } else { 0.0 };
    let rot = Complex64::from_polar(1.0, gamma);
    let w = a.grid().weights();
    let (mut num, mut num_abs, mut den) = (0.0, 0.0, 0.0);
    for ((x, y), w) in a.values().iter().zip(b.values()).zip(w) {
        num += w * (x * rot - y).norm_sqr();
        num_abs += w * (x.norm() - y.norm()).powi(2);
        den += w * y.norm_sqr();
    }
    let scale = |v: f64| {
        if den > 0.0 {
            (v / den).sqrt()
        } else {
            v.sqrt()
        }
    };
    Ok(Discrepancy {
        aligned: scale(num),
        modulus: scale(num_abs),
        gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub t: f64,
    pub discrepancy: Discrepancy,
    pub mass_map: f64,
    pub mass_nls: f64,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub map: SmapTrajectory,
    pub nls: NlsTrajectory,
    pub map_substeps: usize,
}

impl CompareReport {
    pub fn final_row(&self) -> &CompareRow {
        self.rows
            .last()
            .expect("compare always has the initial slice")
    }

    /// Largest relative change of `‖q[u(t)]‖²` along the map run.
    pub fn map_mass_drift(&self) -> f64 {
        relative_drift(self.rows.iter().map(|r| r.mass_map))
    }
}

/// Evolves `u0` as a map and `q[u0]` by the NLS with `K = λ = 1`, and compares
/// `q[u(t)]` with `q(t)` at the shared output times.
pub fn compare_trajectories(u0: &SphereMapField, scfg: &SolverConfig) -> Result<CompareReport> {
    let grid = u0.grid().clone();
    let q0 = hasimoto::transform(u0)?.q;
    let nls_tr = nls::evolve(&q0, &NlsParams::schrodinger_map(), scfg)?;
    let m = map_substeps(&grid, scfg.dt);
    let (steps, dt) = scfg.step_plan();
    let map_cfg = SolverConfig {
        dt: dt / m as f64,
        output_every: scfg.output_every.saturating_mul(m),
        ..*scfg
    };
    let map_tr = smap::evolve_map(u0, &map_cfg)?;
    debug_assert_eq!(map_cfg.step_plan().0, steps * m);
    let rows = map_tr
        .states
        .iter()
        .zip(&nls_tr.states)
        .map(|(ms, ns)| {
            let qa = hasimoto::transform(&ms.u)?.q;
            Ok(CompareRow {
                t: ns.t,
                discrepancy: phase_aligned_discrepancy(&qa, &ns.q)?,
                mass_map: diagnostics::mass(&qa),
                mass_nls: diagnostics::mass(&ns.q),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport {
        rows,
        map: map_tr,
        nls: nls_tr,
        map_substeps: m,
    })
}

pub fn run_compare(cfg: &RunConfig) -> Result<Outcome> {
    let grid = make_grid(cfg.n, cfg.rmax)?;
    let table = load_table(cfg)?;
    let u0 = profiles::map_initial(cfg.profile, grid, cfg.amp, table.as_ref())?;
    let scfg = solver_config(cfg, cfg.dt, cfg.output_every)?;
    let report = compare_trajectories(&u0, &scfg)?;

    write_map_output(&cfg.out, &report.map)?;
    write_nls_output(&cfg.out, &report.nls, "timeseries_nls.csv", "nls")?;
    output::write_csv(
        &cfg.out.join("compare.csv"),
        &[
            "t",
            "discrepancy_q",
            "discrepancy_abs_q",
            "phase",
            "mass_q_map",
            "mass_q_nls",
        ],
        report.rows.iter().map(|r| {
            vec![
                fmt(r.t),
                fmt(r.discrepancy.aligned),
                fmt(r.discrepancy.modulus),
                fmt(r.discrepancy.gamma),
                fmt(r.mass_map),
                fmt(r.mass_nls),
            ]
        }),
    )?;

    let last = report.final_row();
    let (steps, dt) = scfg.step_plan();
    Ok(Outcome {
        criteria: vec![
            Criterion::at_most("abs_q_discrepancy", last.discrepancy.modulus, 1e-2),
            Criterion::at_most(
                "q_discrepancy_phase_aligned",
                last.discrepancy.aligned,
                1e-2,
            )
            .report_only(),
            Criterion::at_most("map_q_mass_drift", report.map_mass_drift(), 1e-4),
        ],
        steps,
        dt_effective: dt,
        map_substeps: Some(report.map_substeps),
    })
}

/// `log₂(coarse / fine)`; `None` when either error is zero.
pub fn observed_order(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > 0.0 && fine > 0.0).then(|| (coarse / fine).log2())
}

/// Relative `L²` error of the split-step solver against the Hankel oracle.
pub fn free_evolution_error(q0: &ComplexRadialField, dt: f64, t: f64) -> Result<f64> {
    let exact = nls::free_evolution_exact(q0, t)?;
    let tr = nls::evolve(
        q0,
        &NlsParams::free(),
        &SolverConfig::new(dt, t, usize::MAX)?,
    )?;
    Ok(phase_free_error(&tr.final_state().q, &exact))
}

fn phase_free_error(a: &ComplexRadialField, b: &ComplexRadialField) -> f64 {
    let w = a.grid().weights();
    let (mut num, mut den) = (0.0, 0.0);
    for ((x, y), w) in a.values().iter().zip(b.values()).zip(w) {
        num += w * (x - y).norm_sqr();
        den += w * y.norm_sqr();
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Relative residuals of the four identities at row `i` of a trajectory
/// recorded every step `dt`: centered second differences for `V` and `M`,
/// centered first differences for `I_R` and `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub virial: f64,
    pub morawetz: f64,
    pub local_virial: f64,
    pub p: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.virial, self.morawetz, self.local_virial, self.p]
    }
}

pub fn identity_residuals(rows: &[DiagnosticsRow], i: usize, dt: f64) -> IdentityResiduals {
    let (a, b, c) = (&rows[i - 1], &rows[i], &rows[i + 1]);
    let rel = |lhs: f64, rhs: f64| {
        if rhs != 0.0 {
            ((lhs - rhs) / rhs).abs()
        } else {
            lhs.abs()
        }
    };
    IdentityResiduals {
        virial: rel(
            (a.virial_v - 2.0 * b.virial_v + c.virial_v) / (dt * dt),
            b.virial_rhs,
        ),
        morawetz: rel(
            (a.morawetz_m - 2.0 * b.morawetz_m + c.morawetz_m) / (dt * dt),
            b.morawetz_rhs,
        ),
        local_virial: rel((c.i_r - a.i_r) / (2.0 * dt), b.i_r_rhs),
        p: rel((c.p - a.p) / (2.0 * dt), b.p_rhs),
    }
}

fn order_criteria(name: &str, errors: &[f64], threshold: f64) -> Criterion {
    let orders: Vec<Option<f64>> = errors
        .windows(2)
        .map(|w| observed_order(w[0], w[1]))
        .collect();
    if errors.iter().all(|e| *e == 0.0) {
        return Criterion::degenerate(name, threshold);
    }
    let worst = orders
        .iter()
        .map(|o| o.unwrap_or(f64::NEG_INFINITY))
        .fold(f64::INFINITY, f64::min);
    Criterion::at_least(name, worst, threshold)
}

pub fn run_convergence(cfg: &RunConfig) -> Result<Outcome> {
    let levels: Vec<(usize, f64)> = (0..3)
        .map(|j| (cfg.n << j, cfg.dt / (1 << j) as f64))
        .collect();
    let table = load_table(cfg)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut criteria = Vec::new();
    let mut push_rows = |name: &str, errors: &[f64]| {
        for (j, ((n, dt), e)) in levels.iter().zip(errors).enumerate() {
            let order = if j == 0 {
                None
            } else {
                observed_order(errors[j - 1], *e)
            };
            rows.push(vec![
                name.to_string(),
                j.to_string(),
                n.to_string(),
                fmt(*dt),
                fmt(*e),
                order.map(fmt).unwrap_or_default(),
            ]);
        }
    };

    if cfg.profile == ProfileKind::Meridian {
        let mut residuals = Vec::new();
        let mut gram = Vec::new();
        for &(n, _) in &levels {
            let grid = make_grid(n, cfg.rmax)?;
            let u = profiles::map_initial(cfg.profile, grid, cfg.amp, table.as_ref())?;
            residuals.push(hasimoto::roundtrip_residual(&u)?);
            gram.push(hasimoto::reconstruct(&hasimoto::transform(&u)?.q)?.gram_drift);
        }
        push_rows("roundtrip_residual", &residuals);
        push_rows("gram_drift", &gram);
        criteria.push(order_criteria("roundtrip_order", &residuals, 1.9));
        criteria.push(Criterion::at_most(
            "gram_drift",
            gram.iter().copied().fold(0.0, f64::max),
            1e-8,
        ));
    } else {
        let mut free = Vec::new();
        let mut identities: Vec<IdentityResiduals> = Vec::new();
        for &(n, dt) in &levels {
            let grid: Arc<RadialGrid> = make_grid(n, cfg.rmax)?;
            let q0 = profiles::nls_initial(cfg.profile, grid, cfg.amp, table.as_ref())?;
            free.push(free_evolution_error(&q0, dt, cfg.t_final)?);
            let scfg = solver_config(cfg, dt, 1)?;
            let tr = nls::evolve(&q0, &cfg.params, &scfg)?;
            let (steps, dt_eff) = scfg.step_plan();
            identities.push(if steps >= 2 {
                identity_residuals(&tr.rows, steps / 2, dt_eff)
            } else {
                IdentityResiduals {
                    virial: 0.0,
                    morawetz: 0.0,
                    local_virial: 0.0,
                    p: 0.0,
                }
            });
        }
        push_rows("free_evolution_error", &free);
        criteria.push(order_criteria("free_evolution_order", &free, 1.9));
        let names = [
            "virial_residual",
            "morawetz_residual",
            "local_virial_residual",
            "P_residual",
        ];
        for (k, name) in names.iter().enumerate() {
            let errs: Vec<f64> = identities.iter().map(|r| r.as_array()[k]).collect();
            push_rows(name, &errs);
            criteria.push(order_criteria(&format!("{name}_order"), &errs, 1.5));
        }
    }
    output::write_csv(
        &cfg.out.join("orders.csv"),
        &["quantity", "level", "n", "dt", "error", "order"],
        rows,
    )?;
    Ok(Outcome {
        criteria,
        steps: 0,
        dt_effective: cfg.dt,
        map_substeps: None,
    })
}

const AUDIT_POINTS: usize = 1000;

pub fn run_weights_audit(cfg: &RunConfig) -> Result<Outcome> {
    use crate::diagnostics::{inner_branch, outer_branch, weight_functions, MorawetzWeight};
    use crate::error::Error;

    let flip = cfg.inject_beta_flip;
    let sample = |r: f64| -> Result<MorawetzWeight> {
        let mut w = weight_functions(r)?;
        if flip {
            w.beta = -w.beta;
        }
        Ok(w)
    };
    let radii: Vec<f64> = (0..AUDIT_POINTS)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (AUDIT_POINTS - 1) as f64))
        .collect();
    let samples = radii
        .iter()
        .map(|&r| sample(r))
        .collect::<Result<Vec<_>>>()?;
    let seam = [
        ("seam-inner", inner_branch(1.0)),
        ("seam-outer", outer_branch(1.0)),
    ];

    let row = |r: f64, branch: &str, w: &MorawetzWeight| {
        vec![
            fmt(r),
            branch.to_string(),
            fmt(w.psi),
            fmt(w.psi_r),
            fmt(w.psi_rr),
            fmt(w.psi_rrr),
            fmt(w.alpha),
            fmt(w.beta),
        ]
    };
    let table = radii
        .iter()
        .zip(&samples)
        .map(|(&r, w)| row(r, if r <= 1.0 { "inner" } else { "outer" }, w))
        .chain(seam.iter().map(|(b, w)| row(1.0, b, w)));
    output::write_csv(
        &cfg.out.join("weights.csv"),
        &[
            "r", "branch", "psi", "psi_r", "psi_rr", "psi_rrr", "alpha", "beta",
        ],
        table,
    )?;

    for (&r, w) in radii.iter().zip(&samples) {
        let violation = if !(w.psi > 0.0 && w.psi < 6.0) {
            Some(format!("psi = {} outside (0, 6)", w.psi))
        } else if !(w.psi_r > 0.0) {
            Some(format!("psi_r = {} not positive", w.psi_r))
        } else if !(w.alpha > 0.0) {
            Some(format!("alpha = {} not positive", w.alpha))
        } else if !(w.beta > 0.0) {
            Some(format!("beta = {} not positive", w.beta))
        } else {
            None
        };
        if let Some(what) = violation {
            return Err(Error::WeightAudit { r, what });
        }
    }

    let (a, b) = (seam[0].1, seam[1].1);
    let seam_gap = [
        (a.psi - b.psi).abs(),
        (a.psi_r - b.psi_r).abs(),
        (a.psi_rr - b.psi_rr).abs(),
        (a.psi_rrr - b.psi_rrr).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(Outcome {
        criteria: vec![
            Criterion::at_least("positive_samples", AUDIT_POINTS as f64, AUDIT_POINTS as f64),
            Criterion::at_most("seam_c3_gap", seam_gap, 1e-12),
            Criterion::at_most("alpha_at_1_error", (a.alpha - 7.5).abs(), 1e-12),
            Criterion::at_most("beta_at_1_error", (a.beta - 1.0).abs(), 1e-12),
        ],
        steps: 0,
        dt_effective: 0.0,
        map_substeps: None,
    })
}
