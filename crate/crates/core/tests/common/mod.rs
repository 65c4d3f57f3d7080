//! Oracles and data shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use smaplab::grid::{ComplexRadialField, RadialGrid, RealRadialField, Vec3};
use smaplab::smap::SphereMapField;

/// Composite Simpson rule with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let m = m + m % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Weighted relative L² distance `‖a − b‖ / ‖b‖`.
pub fn rel_l2(a: &ComplexRadialField, b: &ComplexRadialField) -> f64 {
    let w = a.grid().weights();
    let (mut num, mut den) = (0.0, 0.0);
    for ((x, y), w) in a.values().iter().zip(b.values()).zip(w) {
        num += w * (x - y).norm_sqr();
        den += w * y.norm_sqr();
    }
    (num / den).sqrt()
}

pub fn sup_dist(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Smoothstep that is one on `[0, 1]` and zero beyond `2`.
pub fn window(s: f64) -> f64 {
    smaplab::diagnostics::cutoff(s)[0]
}

/// Random Gaussian bumps, then windowed to `[0, 2 support]`.
pub fn random_compact(rng: &mut impl Rng, support: f64, nonnegative: bool) -> impl Fn(f64) -> f64 {
    let b = smaplab::profiles::random_bump(rng, nonnegative);
    move |r| b(r) * window(r / support)
}

/// Gaussian colatitude with a longitude twisting like `r²`: smooth, even in
/// `r` (so `u_r` vanishes at the origin), and off every great circle.
pub fn random_map(rng: &mut impl Rng, grid: Arc<RadialGrid>) -> SphereMapField {
    let amp = rng.gen_range(0.2..1.2);
    let width = rng.gen_range(0.7..2.0);
    let twist = rng.gen_range(-2.0..2.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    SphereMapField::from_fn(grid, move |r| {
        let a = amp * (-(r / width).powi(2)).exp();
        let b = phase + twist * r * r;
        Vec3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos())
    })
    .unwrap()
}

/// `bump(r) r e^{i c r²}`: outgoing chirp when `c > 0`.
pub fn random_chirp(rng: &mut impl Rng, grid: Arc<RadialGrid>) -> ComplexRadialField {
    let bump = smaplab::profiles::random_bump(rng, true);
    let c = rng.gen_range(0.0..0.5);
    let amp = rng.gen_range(0.2..1.0);
    ComplexRadialField::from_fn(grid, move |r| {
        Complex64::from_polar(amp * r * bump(r), c * r * r)
    })
    .unwrap()
}

pub fn real_field(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> RealRadialField {
    RealRadialField::from_fn(grid, f).unwrap()
}
