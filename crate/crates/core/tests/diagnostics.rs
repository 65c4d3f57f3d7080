mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smaplab::diagnostics::{
    cutoff, hardy_ratio, inner_branch, l4_norm4, l4_spacetime_accumulate, local_virial_pair, mass,
    morawetz_p_pair, morawetz_pair, outer_branch, virial_pair, weight_functions, DiagnosticsRow,
};
use smaplab::grid::{make_grid, ComplexRadialField};
use smaplab::harness::identity_residuals;
use smaplab::nls::{self, NlsParams, NlsState, SolverConfig};
use smaplab::profiles::gauss_m1;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

/// For `q = r e^{−r²}`: `‖q‖² = π/4`, `‖q‖⁴_{L⁴} = π/32`, `V = π/8`,
/// `∫ 4|q_r|² + 4|q|²/r² = 4π`, `∫ 3|q|²/r³ = 3π √(π/2)`.
#[test]
fn gaussian_functionals_in_closed_form() {
    let q = gauss_m1(make_grid(2048, 16.0).unwrap(), 1.0).unwrap();
    let free = NlsParams::free();
    assert!(close(mass(&q), PI / 4.0, 1e-5));
    assert!(close(l4_norm4(&q), PI / 32.0, 1e-5));
    let (v, v_rhs) = virial_pair(&q, &free);
    assert!(close(v, PI / 8.0, 1e-5));
    assert!(close(v_rhs, 4.0 * PI, 1e-4), "{v_rhs}");
    let (_, m_rhs) = morawetz_pair(&q, &free);
    assert!(close(m_rhs, 3.0 * PI * (PI / 2.0).sqrt(), 1e-4), "{m_rhs}");
}

#[test]
fn zero_field_gives_zero_pairs() {
    let q = ComplexRadialField::zeros(make_grid(64, 4.0).unwrap());
    let p = NlsParams::schrodinger_map();
    assert_eq!(virial_pair(&q, &p), (0.0, 0.0));
    assert_eq!(morawetz_pair(&q, &p), (0.0, 0.0));
    assert_eq!(morawetz_p_pair(&q, &p), (0.0, 0.0));
    assert_eq!(local_virial_pair(&q, &p, 2.0).unwrap(), (0.0, 0.0));
    assert_eq!(hardy_ratio(&q.abs_sq(), 2.0), None);
}

#[test]
fn balanced_coupling_drops_the_quartic_term() {
    let q = gauss_m1(make_grid(256, 8.0).unwrap(), 1.3).unwrap();
    let (_, balanced) = virial_pair(&q, &NlsParams::new(0.5, 1).unwrap());
    let (_, free) = virial_pair(&q, &NlsParams::free());
    assert_eq!(balanced, free);
}

#[test]
fn real_fields_carry_no_momentum() {
    let q = gauss_m1(make_grid(256, 8.0).unwrap(), 0.7).unwrap();
    let p = NlsParams::schrodinger_map();
    assert_eq!(local_virial_pair(&q, &p, 2.0).unwrap().0, 0.0);
    assert_eq!(morawetz_p_pair(&q, &p).0, 0.0);
}

#[test]
fn virial_radius_below_four_cells_is_rejected() {
    let q = gauss_m1(make_grid(64, 4.0).unwrap(), 0.7).unwrap();
    assert!(local_virial_pair(&q, &NlsParams::free(), 0.2).is_err());
    assert!(local_virial_pair(&q, &NlsParams::free(), 0.25).is_ok());
}

#[test]
fn cutoff_is_the_septic_smoothstep() {
    for i in 0..=400 {
        let s = 0.5 + 2.0 * i as f64 / 400.0;
        let c = cutoff(s);
        let x = (s - 1.0).clamp(0.0, 1.0);
        let poly = 1.0 - 35.0 * x.powi(4) + 84.0 * x.powi(5) - 70.0 * x.powi(6) + 20.0 * x.powi(7);
        assert!((c[0] - poly).abs() < 1e-13);
        // derivatives against centered differences of the value
        if (1.01..1.99).contains(&s) {
            let d = 1e-5;
            let fd = |k: usize| (cutoff(s + d)[k] - cutoff(s - d)[k]) / (2.0 * d);
            for k in 0..3 {
                assert!((c[k + 1] - fd(k)).abs() < 1e-6 * (1.0 + c[k + 1].abs()));
            }
        }
    }
    for s in [1.0, 2.0] {
        let inside = cutoff(s - 1e-12);
        let outside = cutoff(s + 1e-12);
        for k in 0..4 {
            assert!((inside[k] - outside[k]).abs() < 1e-6);
        }
    }
}

#[test]
fn weights_are_positive_on_a_log_grid() {
    for i in 0..1000 {
        let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 999.0);
        let w = weight_functions(r).unwrap();
        assert!(w.psi > 0.0 && w.psi < 6.0, "r={r}");
        assert!(w.psi_r > 0.0 && w.alpha > 0.0 && w.beta > 0.0, "r={r}");
    }
    assert!(weight_functions(0.0).is_err());
    assert!(weight_functions(-1.0).is_err());
}

#[test]
fn branches_meet_to_third_order() {
    let (a, b) = (inner_branch(1.0), outer_branch(1.0));
    let pairs = [
        (a.psi, b.psi, 3.0),
        (a.psi_r, b.psi_r, 2.0),
        (a.psi_rr, b.psi_rr, -2.0),
        (a.psi_rrr, b.psi_rrr, 0.0),
    ];
    for (x, y, exact) in pairs {
        assert!((x - y).abs() <= 1e-12 && (x - exact).abs() <= 1e-12);
    }
    // α = 8 − r/2 on the inner branch
    for r in [0.1, 0.5, 1.0] {
        assert!((inner_branch(r).alpha - (8.0 - 0.5 * r)).abs() < 1e-12);
    }
    assert_eq!(weight_functions(1.0).unwrap().beta, 1.0);
}

fn grad_norm(q: &ComplexRadialField) -> f64 {
    let grid = q.grid();
    let v = q.values();
    let h = grid.h();
    (0..v.len())
        .map(|i| {
            let next = v.get(i + 1).copied().unwrap_or_default();
            let rho = (i + 1) as f64 * h;
            2.0 * PI * rho * h * ((next - v[i]) / h).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn momentum_is_bounded_by_mass_and_gradient(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = common::random_chirp(&mut rng, make_grid(256, 16.0).unwrap());
        let (p, _) = morawetz_p_pair(&q, &NlsParams::free());
        prop_assert!(p.abs() <= 6.0 * mass(&q).sqrt() * grad_norm(&q));
    }

    #[test]
    fn defocusing_rates_are_positive(seed in any::<u64>(), k in 0.0..2.0f64, lambda in -1i32..=1) {
        let p = NlsParams::new(k, lambda).unwrap();
        prop_assume!(2.0 * k >= (p.lambda_f64()).max(0.5 * p.lambda_f64()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = common::random_chirp(&mut rng, make_grid(256, 16.0).unwrap());
        prop_assert!(morawetz_p_pair(&q, &p).1 > 0.0);
        prop_assert!(morawetz_pair(&q, &p).1 > 0.0);
        prop_assert!(virial_pair(&q, &p).1 > 0.0);
    }
}

/// Under the free flow the virial is exactly quadratic in time, so the centered
/// difference adds nothing and the residual is dominated by the O(h²) spatial
/// part; it only falls fourfold when cell width and step are refined together.
#[test]
fn free_virial_residual_falls_with_the_step() {
    let res: Vec<f64> = [(1024, 1e-3), (2048, 5e-4)]
        .iter()
        .map(|&(n, dt)| {
            let q0 = gauss_m1(make_grid(n, 16.0).unwrap(), 0.2).unwrap();
            let tr = nls::evolve(
                &q0,
                &NlsParams::free(),
                &SolverConfig::new(dt, 0.2, 1).unwrap(),
            )
            .unwrap();
            identity_residuals(&tr.rows, (tr.rows.len() - 1) / 2, dt).virial
        })
        .collect();
    assert!(res[0] <= 1e-2 && res[0] / res[1] >= 3.0, "{res:?}");
}

#[test]
fn l4_accumulation_by_trapezoid() {
    let grid = make_grid(128, 8.0).unwrap();
    let q = gauss_m1(grid.clone(), 0.5).unwrap();
    let constant: Vec<NlsState> = (0..=10)
        .map(|i| NlsState {
            t: 0.1 * i as f64,
            q: q.clone(),
        })
        .collect();
    assert!((l4_spacetime_accumulate(&constant) - l4_norm4(&q)).abs() < 1e-14);
    let zero: Vec<NlsState> = (0..=3)
        .map(|i| NlsState {
            t: i as f64,
            q: ComplexRadialField::zeros(grid.clone()),
        })
        .collect();
    assert_eq!(l4_spacetime_accumulate(&zero), 0.0);
}

#[test]
fn row_columns_are_in_the_fixed_order() {
    let q = gauss_m1(make_grid(64, 8.0).unwrap(), 0.3).unwrap();
    let row =
        smaplab::diagnostics::nls_row(&q, &NlsParams::schrodinger_map(), 4.0, 0.5, 0.25).unwrap();
    let cells = row.cells();
    assert_eq!(DiagnosticsRow::COLUMNS[0], "t");
    assert_eq!(DiagnosticsRow::COLUMNS[12], "l4_accum");
    assert_eq!(cells[0], Some(0.5));
    assert_eq!(cells[1], Some(mass(&q)));
    assert_eq!((cells[2], cells[3]), (None, None));
    assert_eq!(cells[12], Some(0.25));
}
