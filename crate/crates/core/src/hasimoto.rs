//! Parallel frames along a radial map and the complex coordinates of `u_r`
//! in them.
//!
//! A frame `(e, f = u × e)` with `D_r e = 0` is seeded at `r_max` from the
//! projection of `î` onto the tangent plane and transported inward. Writing
//! `u_r = q₁ e + q₂ f` gives `q = q₁ + i q₂`. The inverse integrates
//! `(u, e, f)_r = A(q)(u, e, f)` with the skew generator
//! `A = [[0, q₁, q₂], [−q₁, 0, 0], [−q₂, 0, 0]]` from the boundary triple.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    laplacian_m0, laplacian_m1, ComplexRadialField, RadialField, RadialGrid, RealRadialField, Vec3,
};
use crate::smap::SphereMapField;
use std::sync::Arc;

/// Seeds whose tangent projection is shorter than this are rejected.
const SEED_FLOOR: f64 = 1e-8;

/// Orthonormal tangent frame along a map.
#[derive(Debug, Clone)]
pub struct FrameField {
    grid: Arc<RadialGrid>,
    e: Vec<Vec3>,
    f: Vec<Vec3>,
}

impl FrameField {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn e(&self) -> &[Vec3] {
        &self.e
    }

    pub fn f(&self) -> &[Vec3] {
        &self.f
    }

    /// Largest of `| |e| − 1 |`, `|e·u|` and `|f − u×e|` over the nodes.
    pub fn defect(&self, u: &SphereMapField) -> f64 {
        u.values()
            .iter()
            .zip(&self.e)
            .zip(&self.f)
            .map(|((u, e), f)| {
                let a = (e.norm() - 1.0).abs();
                let b = e.dot(u).abs();
                let c = (f - u.cross(e)).norm();
                a.max(b).max(c)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct HasimotoResult {
    pub q: ComplexRadialField,
    pub frame: FrameField,
}

fn tangent_unit(seed: &Vec3, u: &Vec3) -> Result<Vec3> {
    let t = seed - u * seed.dot(u);
    let norm = t.norm();
    if norm < SEED_FLOOR {
        return Err(Error::DegenerateSeed(format!(
            "seed ({:.3}, {:.3}, {:.3}) is normal to the sphere at the boundary value",
            seed.x, seed.y, seed.z
        )));
    }
    Ok(t / norm)
}

/// Great-circle path from `a` to `b` and its velocity at `s ∈ [0, 1]`.
fn slerp(a: &Vec3, b: &Vec3, s: f64) -> (Vec3, Vec3) {
    let cos = a.dot(b).clamp(-1.0, 1.0);
    let theta = cos.acos();
    if theta < 1e-7 {
        let d = b - a;
        return (a + d * s, d);
    }
    let sin = theta.sin();
    let pos = (a * ((1.0 - s) * theta).sin() + b * (s * theta).sin()) / sin;
    let vel = (b * (s * theta).cos() - a * ((1.0 - s) * theta).cos()) * (theta / sin);
    (pos, vel)
}

/// RK4 for `de/ds = −(u_s · e) u` along the arc from `a` to `b`.
fn transport(e: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let rhs = |s: f64, e: &Vec3| {
        let (u, us) = slerp(a, b, s);
        -u * us.dot(e)
    };
    let k1 = rhs(0.0, e);
    let k2 = rhs(0.5, &(e + k1 * 0.5));
    let k3 = rhs(0.5, &(e + k2 * 0.5));
    let k4 = rhs(1.0, &(e + k3));
    e + (k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0
}

/// Parallel frame seeded from `î`.
pub fn build_frame(u: &SphereMapField) -> Result<FrameField> {
    build_frame_with_seed(u, &Vec3::x())
}

/// Parallel frame whose boundary vector is the tangent projection of `seed`.
pub fn build_frame_with_seed(u: &SphereMapField, seed: &Vec3) -> Result<FrameField> {
    let uv = u.values();
    let n = uv.len();
    let mut e = vec![Vec3::zeros(); n];
    e[n - 1] = tangent_unit(seed, &uv[n - 1])?;
    for i in (0..n - 1).rev() {
        let moved = transport(&e[i + 1], &uv[i + 1], &uv[i]);
        e[i] = tangent_unit(&moved, &uv[i])?;
    }
    let f = uv.iter().zip(&e).map(|(u, e)| u.cross(e)).collect();
    Ok(FrameField {
        grid: u.grid().clone(),
        e,
        f,
    })
}

/// `u_r` at the nodes: centered differences, even reflection through the
/// origin, second-order one-sided at `r_max`.
pub fn radial_derivative(u: &SphereMapField) -> Vec<Vec3> {
    let v = u.values();
    let n = v.len();
    let inv2h = 0.5 / u.grid().h();
    (0..n)
        .map(|i| {
            if i == 0 {
                (v[1] - v[0]) * inv2h
            } else if i == n - 1 {
                (v[i] * 3.0 - v[i - 1] * 4.0 + v[i - 2]) * inv2h
            } else {
                (v[i + 1] - v[i - 1]) * inv2h
            }
        })
        .collect()
}

/// `q = u_r·e + i u_r·f`, with `u_r` projected onto the tangent plane first
/// so that `|q| = |u_r|` holds to rounding.
pub fn compute_q(u: &SphereMapField, frame: &FrameField) -> Result<ComplexRadialField> {
    if !u.grid().is_compatible(&frame.grid) {
        return Err(Error::GridMismatch);
    }
    let ur = tangent_derivative(u);
    let values = ur
        .iter()
        .zip(&frame.e)
        .zip(&frame.f)
        .map(|((d, e), f)| Complex64::new(d.dot(e), d.dot(f)))
        .collect();
    Ok(RadialField::from_parts(u.grid().clone(), values))
}

/// `u_r` with its normal component removed.
pub fn tangent_derivative(u: &SphereMapField) -> Vec<Vec3> {
    radial_derivative(u)
        .into_iter()
        .zip(u.values())
        .map(|(d, u)| d - u * d.dot(u))
        .collect()
}

/// Frame and `q` in one call.
pub fn transform(u: &SphereMapField) -> Result<HasimotoResult> {
    let frame = build_frame(u)?;
    let q = compute_q(u, &frame)?;
    Ok(HasimotoResult { q, frame })
}

/// Output of the inverse transform.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub u: SphereMapField,
    pub frame: FrameField,
    /// Largest entry of `G − I` over the nodes, where `G` is the Gram matrix
    /// of the integrated triple before any renormalization.
    pub gram_drift: f64,
}

/// Boundary triple `(u, e, f)` at the outermost node.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryFrame {
    pub u: Vec3,
    pub e: Vec3,
    pub f: Vec3,
}

impl Default for BoundaryFrame {
    fn default() -> Self {
        Self {
            u: Vec3::z(),
            e: Vec3::x(),
            f: Vec3::y(),
        }
    }
}

/// Inverse transform from `(k̂, î, ĵ)` at `r_max`.
pub fn reconstruct(q: &ComplexRadialField) -> Result<Reconstruction> {
    reconstruct_from(q, &BoundaryFrame::default())
}

type Triple = [Vec3; 3];

fn generator(q: Complex64, w: &Triple) -> Triple {
    let [u, e, f] = w;
    [e * q.re + f * q.im, -u * q.re, -u * q.im]
}

fn axpy(w: &Triple, k: &Triple, c: f64) -> Triple {
    [w[0] + k[0] * c, w[1] + k[1] * c, w[2] + k[2] * c]
}

/// Inverse transform from an arbitrary boundary triple.
pub fn reconstruct_from(
    q: &ComplexRadialField,
    boundary: &BoundaryFrame,
) -> Result<Reconstruction> {
    if !q.all_finite() {
        return Err(Error::InvalidArgument("q has non-finite samples".into()));
    }
    let grid = q.grid().clone();
    let n = grid.n();
    let h = grid.h();
    let qv = q.values();
    // odd reflection through the origin, zero beyond r_max
    let at = |j: isize| -> Complex64 {
        if j < 0 {
            -qv[(-j - 1) as usize]
        } else if j as usize >= n {
            Complex64::new(0.0, 0.0)
        } else {
            qv[j as usize]
        }
    };
    let mut raw: Vec<Triple> = vec![[Vec3::zeros(); 3]; n];
    raw[n - 1] = [boundary.u, boundary.e, boundary.f];
    for i in (0..n - 1).rev() {
        let j = i as isize;
        let q_hi = qv[i + 1];
        let q_lo = qv[i];
        let q_mid = (-at(j + 2) + (at(j + 1) + at(j)) * 9.0 - at(j - 1)) / 16.0;
        let w = raw[i + 1];
        let dr = -h;
        let k1 = generator(q_hi, &w);
        let k2 = generator(q_mid, &axpy(&w, &k1, 0.5 * dr));
        let k3 = generator(q_mid, &axpy(&w, &k2, 0.5 * dr));
        let k4 = generator(q_lo, &axpy(&w, &k3, dr));
        raw[i] = [0, 1, 2].map(|c| w[c] + (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (dr / 6.0));
    }

    let mut gram_drift: f64 = 0.0;
    for w in &raw {
        for a in 0..3 {
            for b in 0..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                gram_drift = gram_drift.max((w[a].dot(&w[b]) - target).abs());
            }
        }
    }

    let mut us = Vec::with_capacity(n);
    let mut es = Vec::with_capacity(n);
    let mut fs = Vec::with_capacity(n);
    for [u, e, _] in &raw {
        let u = u / u.norm();
        let e = tangent_unit(e, &u)?;
        fs.push(u.cross(&e));
        us.push(u);
        es.push(e);
    }
    let u = SphereMapField::new(RadialField::new(grid.clone(), us)?)?;
    Ok(Reconstruction {
        u,
        frame: FrameField { grid, e: es, f: fs },
        gram_drift,
    })
}

/// `sup |u − reconstruct(q[u])|`, reconstructing from the boundary triple of
/// the frame that produced `q`.
pub fn roundtrip_residual(u: &SphereMapField) -> Result<f64> {
    roundtrip_residual_with_seed(u, &Vec3::x())
}

pub fn roundtrip_residual_with_seed(u: &SphereMapField, seed: &Vec3) -> Result<f64> {
    let frame = build_frame_with_seed(u, seed)?;
    let q = compute_q(u, &frame)?;
    let n = u.values().len();
    let boundary = BoundaryFrame {
        u: u.values()[n - 1],
        e: frame.e[n - 1],
        f: frame.f[n - 1],
    };
    let back = reconstruct_from(&q, &boundary)?;
    Ok(u.values()
        .iter()
        .zip(back.u.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Both sides of the norm equivalences between `w = e^{iθ} q` and `∇u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    /// `‖w‖_{H¹}`.
    pub w_h1: f64,
    /// `‖w‖_{H²}`.
    pub w_h2: f64,
    /// `‖∇u‖_{H¹}`.
    pub du_h1: f64,
    /// `‖∇u‖_{H²}`.
    pub du_h2: f64,
    /// `‖w‖_{H¹} / (‖∇u‖_{H¹} + ‖∇u‖²_{H¹})`.
    pub w_by_du_h1: Option<f64>,
    /// `‖∇u‖_{H¹} / (‖w‖_{H¹} + ‖w‖²_{H¹})`.
    pub du_by_w_h1: Option<f64>,
    /// `‖w‖_{H²} / (‖∇u‖_{H²} + ‖∇u‖³_{H¹})`.
    pub w_by_du_h2: Option<f64>,
    /// `‖∇u‖_{H²} / (‖w‖_{H²} + ‖w‖³_{H¹})`.
    pub du_by_w_h2: Option<f64>,
}

impl NormEquivalence {
    pub fn ratios(&self) -> [Option<f64>; 4] {
        [
            self.w_by_du_h1,
            self.du_by_w_h1,
            self.w_by_du_h2,
            self.du_by_w_h2,
        ]
    }
}

fn weighted_sq(grid: &RadialGrid, v: impl Iterator<Item = f64>) -> f64 {
    v.zip(grid.weights()).map(|(x, w)| x * w).sum()
}

/// Centered differences of node values: even ghost at the origin,
/// second-order one-sided at `r_max`.
fn centered<T>(v: &[T], h: f64) -> Vec<T>
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Add<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    let n = v.len();
    let inv2h = 0.5 / h;
    (0..n)
        .map(|i| {
            if i == 0 {
                (v[1] - v[0]) * inv2h
            } else if i == n - 1 {
                (v[i] * 3.0 - v[i - 1] * 4.0 + v[i - 2]) * inv2h
            } else {
                (v[i + 1] - v[i - 1]) * inv2h
            }
        })
        .collect()
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| a / b)
}

pub fn norm_equivalence_report(u: &SphereMapField) -> Result<NormEquivalence> {
    let grid = u.grid().clone();
    let h = grid.h();
    let nodes = grid.nodes();
    let q = transform(u)?.q;

    // frame side, odd sector: q_r at faces with zero ghost beyond r_max
    let qv = q.values();
    let q_sq = weighted_sq(&grid, qv.iter().map(|z| z.norm_sqr()));
    let q_over_r = weighted_sq(
        &grid,
        qv.iter().zip(nodes).map(|(z, r)| z.norm_sqr() / (r * r)),
    );
    let q_r: f64 = crate::grid::face_gradients(&grid, qv, Complex64::new(0.0, 0.0))
        .into_iter()
        .map(|(rho, d)| crate::grid::face_weight(&grid, rho) * d.norm_sqr())
        .sum();
    let lap_q = weighted_sq(
        &grid,
        laplacian_m1(&q).values().iter().map(|z| z.norm_sqr()),
    );
    let w_h1 = (q_sq + q_r + q_over_r).sqrt();
    let w_h2 = (w_h1 * w_h1 + lap_q).sqrt();

    // map side
    let ur = radial_derivative(u);
    let urr = centered(&ur, h);
    let lap_u = laplacian_m0(u.field());
    let lap_u_r = centered(lap_u.values(), h);
    let ur_sq = weighted_sq(&grid, ur.iter().map(|d| d.norm_squared()));
    let urr_sq = weighted_sq(&grid, urr.iter().map(|d| d.norm_squared()));
    let ur_over_r = weighted_sq(
        &grid,
        ur.iter()
            .zip(nodes)
            .map(|(d, r)| d.norm_squared() / (r * r)),
    );
    let lap_r_sq = weighted_sq(&grid, lap_u_r.iter().map(|d| d.norm_squared()));
    let du_h1 = (ur_sq + urr_sq + ur_over_r).sqrt();
    let du_h2 = (du_h1 * du_h1 + lap_r_sq).sqrt();

    Ok(NormEquivalence {
        w_h1,
        w_h2,
        du_h1,
        du_h2,
        w_by_du_h1: ratio(w_h1, du_h1 + du_h1 * du_h1),
        du_by_w_h1: ratio(du_h1, w_h1 + w_h1 * w_h1),
        w_by_du_h2: ratio(w_h2, du_h2 + du_h1.powi(3)),
        du_by_w_h2: ratio(du_h2, w_h2 + w_h1.powi(3)),
    })
}

/// `(‖F‖_{L²([R, r_max], r dr)}, ‖f‖_{L¹([R, r_max], r dr)})` with
/// `F(r) = ∫_r^{r_max} f`, over the cells whose centers lie at or beyond `R`.
/// `F` is integrated exactly for the piecewise-constant extension of `f`.
pub fn lemma_x_check(f: &RealRadialField, radius: f64) -> Result<(f64, f64)> {
    let grid = f.grid();
    if !(radius >= 0.0) || radius >= grid.r_max() {
        return Err(Error::InvalidArgument(format!(
            "radius {radius} outside [0, r_max = {})",
            grid.r_max()
        )));
    }
    let h = grid.h();
    let v = f.values();
    let mut tail = 0.0;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in (0..grid.n()).rev() {
        let r = grid.nodes()[i];
        if r < radius {
            break;
        }
        let big_f = tail + v[i] * (grid.outer_face(i) - r);
        lhs += big_f * big_f * r * h;
        rhs += v[i].abs() * r * h;
        tail += v[i] * h;
    }
    Ok((lhs.sqrt(), rhs))
}
