mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smaplab::diagnostics::mass;
use smaplab::grid::{make_grid, ComplexRadialField};
use smaplab::harness::free_evolution_error;
use smaplab::nls::{
    self, free_evolution_exact, nls_rhs, NlsParams, NlsState, SolverConfig, StrangStepper,
};
use smaplab::profiles::gauss_m1;

use common::{rel_l2, simpson};

fn sup(q: &ComplexRadialField) -> f64 {
    q.values().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn free_rhs_on_bessel_mode() {
    let k = 2.0;
    let grid = make_grid(1024, 16.0).unwrap();
    let q = ComplexRadialField::from_fn(grid.clone(), |r| Complex64::new(libm::j1(k * r), 0.0))
        .unwrap();
    let rhs = nls_rhs(&q, &NlsParams::free());
    for ((r, a), b) in grid.nodes().iter().zip(rhs.values()).zip(q.values()) {
        if (1.0..15.0).contains(r) {
            let expected = Complex64::new(0.0, -k * k) * b;
            assert!((a - expected).norm() < 1e-3, "r={r}: {a} vs {expected}");
        }
    }
}

/// For `q = r e^{−r²}` at `r = 1`: `Δq − q/r² = −4/e`, `|q|² = e^{−2}`, and the
/// nonlocal integral comes from dense quadrature.
#[test]
fn nonlinear_rhs_at_unit_radius() {
    let grid = make_grid(1000, 16.0).unwrap();
    let i = grid.nearest_node(1.0);
    let q = gauss_m1(grid, 1.0).unwrap();
    let rhs = nls_rhs(&q, &NlsParams::schrodinger_map()).values()[i];

    let e = std::f64::consts::E;
    let nonlocal = simpson(|s| s * (-2.0 * s * s).exp(), 1.0, 16.0, 100_000);
    let density = e.powi(-2);
    let potential = nonlocal - 0.5 * density;
    let expected = Complex64::new(0.0, 1.0) * (-4.0 / e - potential / e);
    assert!((nonlocal - density / 4.0).abs() < 1e-12);
    assert!((rhs - expected).norm() < 1e-3, "{rhs} vs {expected}");
}

#[test]
fn gauge_rotation_commutes_with_the_flow() {
    let grid = make_grid(256, 8.0).unwrap();
    let q0 = gauss_m1(grid, 0.8).unwrap();
    let rot = Complex64::from_polar(1.0, 0.7);
    let cfg = SolverConfig::new(1e-2, 0.5, usize::MAX).unwrap();
    let p = NlsParams::new(0.7, -1).unwrap();
    let a = nls::evolve(&q0.scale(rot), &p, &cfg).unwrap();
    let b = nls::evolve(&q0, &p, &cfg).unwrap();
    let err = rel_l2(&a.final_state().q, &b.final_state().q.scale(rot));
    assert!(err < 1e-13, "{err}");
}

#[test]
fn conjugation_reverses_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = make_grid(256, 8.0).unwrap();
    let q0 = common::random_chirp(&mut rng, grid.clone());
    let p = NlsParams::schrodinger_map();
    let fwd = StrangStepper::new(&grid, p, 1e-2, 1e-12).unwrap();
    let back = StrangStepper::new(&grid, p, -1e-2, 1e-12).unwrap();
    let mut a = NlsState {
        t: 0.0,
        q: q0.conj(),
    };
    let mut b = NlsState { t: 0.0, q: q0 };
    for _ in 0..50 {
        fwd.step(&mut a).unwrap();
        back.step(&mut b).unwrap();
    }
    let err = rel_l2(&a.q, &b.q.conj());
    assert!(err < 1e-8, "{err}");
}

#[test]
fn mass_holds_against_a_halved_step() {
    let grid = make_grid(1024, 16.0).unwrap();
    let q0 = gauss_m1(grid, 0.1).unwrap();
    let p = NlsParams::schrodinger_map();
    for dt in [1e-3, 5e-4] {
        let tr = nls::evolve(&q0, &p, &SolverConfig::new(dt, 1.0, 100).unwrap()).unwrap();
        let m0 = tr.rows[0].mass_q;
        for r in &tr.rows {
            assert!(((r.mass_q - m0) / m0).abs() <= 1e-6);
        }
    }
}

#[test]
fn zero_final_time_keeps_only_the_initial_state() {
    let grid = make_grid(64, 4.0).unwrap();
    let q0 = gauss_m1(grid, 0.2).unwrap();
    let tr = nls::evolve(
        &q0,
        &NlsParams::schrodinger_map(),
        &SolverConfig::new(1e-3, 0.0, 1).unwrap(),
    )
    .unwrap();
    assert_eq!(tr.states.len(), 1);
    assert_eq!(tr.states[0].q.values(), q0.values());
}

#[test]
fn free_oracle_is_unitary_and_disperses() {
    for n in [512, 1024] {
        let grid = make_grid(n, 16.0).unwrap();
        let q0 = gauss_m1(grid, 1.0).unwrap();
        let same = free_evolution_exact(&q0, 0.0).unwrap();
        assert!(rel_l2(&same, &q0) < 1e-4);
        let later = free_evolution_exact(&q0, 0.5).unwrap();
        assert!((mass(&later) / mass(&q0) - 1.0).abs() < 1e-6);
        let far = free_evolution_exact(&q0, 4.0).unwrap();
        assert!(sup(&far) < 0.5 * sup(&q0), "{} vs {}", sup(&far), sup(&q0));
    }
}

#[test]
fn split_step_is_second_order_in_time() {
    let q0 = gauss_m1(make_grid(2048, 8.0).unwrap(), 0.2).unwrap();
    let coarse = free_evolution_error(&q0, 1e-2, 0.5).unwrap();
    let fine = free_evolution_error(&q0, 5e-3, 0.5).unwrap();
    assert!(coarse / fine >= 3.5, "{coarse} / {fine}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_step_conserves_mass(
        amp in 0.05..1.5f64,
        k in -1.0..1.0f64,
        lambda in -1i32..=1,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = make_grid(128, 8.0).unwrap();
        let q0 = common::random_chirp(&mut rng, grid.clone()).scale(Complex64::new(amp, 0.0));
        let p = NlsParams::new(k, lambda).unwrap();
        let stepper = StrangStepper::new(&grid, p, 1e-2, 1e-12).unwrap();
        let mut s = NlsState { t: 0.0, q: q0 };
        let m0 = mass(&s.q);
        let mut prev = m0;
        for _ in 0..20 {
            stepper.step(&mut s).unwrap();
            let m = mass(&s.q);
            prop_assert!(((m - prev) / m0).abs() <= 1e-11);
            prev = m;
        }
    }
}
