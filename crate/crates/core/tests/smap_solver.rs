mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smaplab::diagnostics::{energy, mass_dev};
use smaplab::grid::{make_grid, Vec3};
use smaplab::nls::SolverConfig;
use smaplab::profiles::meridian_gauss;
use smaplab::smap::{
    self, meridian_map, smap_rhs, stability_limit, step_rk4_project, SmapState, SphereMapField,
};
use smaplab::Error;

/// `u = (sin g, 0, cos g)` gives `u × Δu = (0, g'' + g'/r, 0)`; for
/// `g = e^{−r²}` that is `(4r² − 4) e^{−r²}`.
#[test]
fn meridian_rhs_matches_closed_form() {
    let errs: Vec<f64> = [256, 512]
        .iter()
        .map(|&n| {
            let grid = make_grid(n, 8.0).unwrap();
            let u = meridian_map(grid.clone(), |r| (-r * r).exp()).unwrap();
            let rhs = smap_rhs(&u);
            grid.nodes()
                .iter()
                .zip(rhs.values())
                .filter(|(r, _)| **r < 7.0)
                .map(|(r, v)| {
                    (v - Vec3::new(0.0, (4.0 * r * r - 4.0) * (-r * r).exp(), 0.0)).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[1] < 1e-3 && errs[0] / errs[1] > 3.5, "{errs:?}");
}

#[test]
fn north_pole_is_static() {
    let grid = make_grid(64, 4.0).unwrap();
    let u = SphereMapField::north(grid.clone());
    assert!(smap_rhs(&u).values().iter().all(|v| v.norm() == 0.0));
    let next = step_rk4_project(
        &SmapState {
            t: 0.0,
            u: u.clone(),
        },
        stability_limit(&grid),
    )
    .unwrap();
    assert_eq!(next.u.values(), u.values());
}

/// `½ ∫ g'² 2πr dr` with `g' = −2r e^{−r²}` is `π/2`.
#[test]
fn meridian_energy_closed_form() {
    let grid = make_grid(1024, 16.0).unwrap();
    let u = meridian_map(grid, |r| (-r * r).exp()).unwrap();
    let e = energy(&u);
    assert!((e / std::f64::consts::FRAC_PI_2 - 1.0).abs() < 1e-4, "{e}");
}

#[test]
fn energy_is_scale_invariant() {
    let g = |r: f64| 0.7 * (-r * r).exp();
    let base = meridian_map(make_grid(1024, 16.0).unwrap(), g).unwrap();
    let squeezed = meridian_map(make_grid(1024, 16.0).unwrap(), |r| g(2.0 * r)).unwrap();
    assert!((energy(&squeezed) / energy(&base) - 1.0).abs() < 1e-3);
    // on the compatible (half-length) grid the two sums agree term by term
    let compatible = meridian_map(make_grid(1024, 8.0).unwrap(), |r| g(2.0 * r)).unwrap();
    assert!((energy(&compatible) / energy(&base) - 1.0).abs() < 1e-12);
}

#[test]
fn step_above_the_bound_is_rejected() {
    let grid = make_grid(64, 4.0).unwrap();
    let u = meridian_gauss(grid.clone(), 0.3).unwrap();
    let err = step_rk4_project(&SmapState { t: 0.0, u }, 2.0 * stability_limit(&grid)).unwrap_err();
    assert!(matches!(err, Error::StabilityBound { .. }));
}

#[test]
fn hundred_steps_keep_energy() {
    let grid = make_grid(512, 16.0).unwrap();
    let u0 = meridian_gauss(grid.clone(), 0.3).unwrap();
    let e0 = energy(&u0);
    for dt in [stability_limit(&grid), 0.5 * stability_limit(&grid)] {
        let mut s = SmapState {
            t: 0.0,
            u: u0.clone(),
        };
        for _ in 0..100 {
            s = step_rk4_project(&s, dt).unwrap();
            assert!(s
                .u
                .values()
                .iter()
                .all(|v| (v.norm() - 1.0).abs() <= 4.0 * f64::EPSILON));
        }
        assert!((energy(&s.u) / e0 - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn distance_to_north_is_conserved() {
    let grid = make_grid(512, 16.0).unwrap();
    let u0 = meridian_gauss(grid.clone(), 0.3).unwrap();
    let cfg = SolverConfig::new(stability_limit(&grid), 0.5, 400).unwrap();
    let tr = smap::evolve_map(&u0, &cfg).unwrap();
    let m0 = mass_dev(&u0);
    for s in &tr.states {
        assert!((mass_dev(&s.u) / m0 - 1.0).abs() <= 1e-5);
    }
    assert!((tr.final_state().t - 0.5).abs() < 1e-12);
}

/// The conserved quantities sit at roundoff, so the temporal order is read off
/// the solution: differences of runs at successive halvings of the step. The
/// profile must vanish to rounding at `r_max`, or pinning the edge node on the
/// first step injects a jump whose stiff transient hides the RK4 rate.
#[test]
fn solution_error_shrinks_with_the_step() {
    let grid = make_grid(128, 8.0).unwrap();
    let u0 = meridian_map(grid.clone(), |r| 2.0 * (-r * r).exp()).unwrap();
    let limit = stability_limit(&grid);
    let run = |dt: f64| {
        let cfg = SolverConfig::new(dt, 3200.0 * limit, usize::MAX).unwrap();
        smap::evolve_map(&u0, &cfg).unwrap().final_state().u.clone()
    };
    let u: Vec<_> = (0..4).map(|j| run(limit / f64::from(1 << j))).collect();
    let d: Vec<f64> = u
        .windows(2)
        .map(|w| common::sup_dist(w[0].values(), w[1].values()))
        .collect();
    for w in d.windows(2) {
        assert!(w[0] / w[1] >= 8.0, "{d:?}");
    }
}

#[test]
fn zero_final_time_is_the_initial_map() {
    let grid = make_grid(64, 4.0).unwrap();
    let u0 = meridian_gauss(grid, 0.3).unwrap();
    let tr = smap::evolve_map(&u0, &SolverConfig::new(1e-3, 0.0, 1).unwrap()).unwrap();
    assert_eq!(tr.states.len(), 1);
    assert_eq!(tr.states[0].u.values(), u0.values());
}

proptest! {
    #[test]
    fn rhs_is_tangent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = common::random_map(&mut rng, make_grid(256, 8.0).unwrap());
        let rhs = smap_rhs(&u);
        let scale = rhs.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in u.values().iter().zip(rhs.values()) {
            prop_assert!(a.dot(b).abs() <= 1e-12 * scale);
        }
    }
}
