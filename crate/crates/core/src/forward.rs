//! Forward models: circular-detector data P(θ̂, t), the spherical Radon
//! transform R_S f(α̂, t) = ∫_{S²} f(r_det α̂ + tβ̂) dS(β̂), and the composed
//! transform R_P f = F(R_S f).

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::geometry::{great_circle_points, Vec3};
use crate::grid::{DataKind, DetectorData, SphereTimeGrid};
use crate::phantom::{BallComponent, BallKind, PhantomSpec};
use crate::quad::GaussLegendre;
use crate::recon::dt_t_filter;
use crate::{Error, Result};

/// P(θ̂, t) = (1/2π)∮ p(r_det γ̂, t) over the great circle orthogonal to θ̂,
/// by the uniform `n_circle`-point rule.
pub fn detector_signal(
    spec: &PhantomSpec,
    grid: SphereTimeGrid,
    n_circle: usize,
) -> Result<DetectorData> {
    if n_circle < 8 {
        return Err(Error::Domain(format!(
            "n_circle must be >= 8, got {n_circle}"
        )));
    }
    spec.validate()?;
    let balls = spec.effective_components();
    let dirs = grid.sphere.dirs();
    let times = grid.times();
    let n_t = grid.n_t;
    let mut out = DetectorData::zeros(grid, DataKind::P);
    out.values
        .par_chunks_mut(n_t)
        .zip(dirs.par_iter())
        .try_for_each(|(series, &theta)| -> Result<()> {
            let mut dist = vec![0.0; balls.len()];
            for gamma in great_circle_points(theta, n_circle) {
                let x = gamma * grid.r_det;
                for (b, d) in balls.iter().zip(dist.iter_mut()) {
                    *d = (x - b.center).norm();
                    if !(*d > b.outer_radius) {
                        return Err(Error::InsideBall {
                            distance: *d,
                            radius: b.outer_radius,
                        });
                    }
                }
                for (v, &t) in series.iter_mut().zip(&times) {
                    for (b, &d) in balls.iter().zip(&dist) {
                        *v += b.pressure_at_distance(d, t);
                    }
                }
            }
            let scale = 1.0 / n_circle as f64;
            series.iter_mut().for_each(|v| *v *= scale);
            Ok(())
        })?;
    Ok(out)
}

/// Boundary pressure p(r_det α̂, t) at every node of `grid`.
pub fn boundary_pressure_data(spec: &PhantomSpec, grid: SphereTimeGrid) -> Result<DetectorData> {
    spec.validate()?;
    let dirs = grid.sphere.dirs();
    let times = grid.times();
    let mut out = DetectorData::zeros(grid, DataKind::BoundaryPressure);
    out.values
        .par_chunks_mut(grid.n_t)
        .zip(dirs.par_iter())
        .try_for_each(|(series, &alpha)| -> Result<()> {
            for (v, &t) in series.iter_mut().zip(&times) {
                *v = spec.boundary_pressure(alpha, t, grid.r_det)?;
            }
            Ok(())
        })?;
    Ok(out)
}

/// R_S of a single ball about the sphere center `y0`.
///
/// The integrand is rotationally symmetric about the axis from `y0` to the
/// ball center, so in that frame it depends only on u = cos(polar) and the
/// azimuthal rule is exact. In u, |y − c|² = d² + t² − 2dtu is linear; the
/// u-range is split into Gauss-Legendre panels (`order` nodes each) at the
/// crossings of the inner and outer radius, where the profile has kinks or
/// jumps.
pub fn spherical_radon_ball(ball: &BallComponent, y0: Vec3, t: f64, order: usize) -> f64 {
    spherical_radon_ball_with(ball, y0, t, &GaussLegendre::new(order))
}

fn spherical_radon_ball_with(ball: &BallComponent, y0: Vec3, t: f64, gl: &GaussLegendre) -> f64 {
    let d = (ball.center - y0).norm();
    if t == 0.0 || d * t == 0.0 {
        // the sphere is centered on the ball center, or collapsed to y0
        return 4.0 * PI * ball.profile(if t == 0.0 { d } else { t });
    }
    let big_r = ball.outer_radius;
    if t + d <= big_r && ball.kind == BallKind::Sharp {
        return 4.0 * PI * ball.amplitude;
    }
    if (d - t).abs() >= big_r {
        return 0.0;
    }
    let u_of = |rad: f64| (d * d + t * t - rad * rad) / (2.0 * d * t);
    // support is u > u_of(R)
    let lo = u_of(big_r).max(-1.0);
    let mut breaks = vec![lo];
    if ball.kind == BallKind::Smooth {
        let ur = u_of(ball.inner_radius);
        if ur > lo && ur < 1.0 {
            breaks.push(ur);
        }
    }
    breaks.push(1.0);
    let s_of = |u: f64| (d * d + t * t - 2.0 * d * t * u).max(0.0).sqrt();
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        acc += gl.integrate(w[0], w[1], |u| ball.profile(s_of(u)));
    }
    TAU * acc
}

/// ∫_{S²} f(r_det α̂ + tβ̂) dS(β̂) for a ball phantom; `order` is the number
/// of Gauss-Legendre nodes per panel in cos(polar).
pub fn spherical_radon_numeric(
    spec: &PhantomSpec,
    alpha: Vec3,
    t: f64,
    order: usize,
    r_det: f64,
) -> f64 {
    let gl = GaussLegendre::new(order);
    spherical_radon_with(&spec.effective_components(), alpha * r_det, t, &gl)
}

fn spherical_radon_with(balls: &[BallComponent], y0: Vec3, t: f64, gl: &GaussLegendre) -> f64 {
    balls
        .iter()
        .map(|b| spherical_radon_ball_with(b, y0, t, gl))
        .sum()
}

/// Product rule for an arbitrary integrand: Gauss-Legendre in cos(polar)
/// with `order` nodes × `2·order` uniform azimuths, in the fixed frame.
pub fn spherical_radon_product<F: Fn(Vec3) -> f64>(f: F, y0: Vec3, t: f64, order: usize) -> f64 {
    let gl = GaussLegendre::new(order);
    let n_az = 2 * order;
    let daz = TAU / n_az as f64;
    gl.integrate(-1.0, 1.0, |u| {
        let sin = (1.0 - u * u).max(0.0).sqrt();
        let mut row = 0.0;
        for j in 0..n_az {
            let (s, c) = (j as f64 * daz).sin_cos();
            row += f(y0 + Vec3::new(sin * c, sin * s, u) * t);
        }
        row * daz
    })
}

/// R_S f at every node of `grid`.
pub fn spherical_radon_data(
    spec: &PhantomSpec,
    grid: SphereTimeGrid,
    order: usize,
) -> DetectorData {
    let balls = spec.effective_components();
    let gl = GaussLegendre::new(order);
    let dirs = grid.sphere.dirs();
    let times = grid.times();
    let mut out = DetectorData::zeros(grid, DataKind::SphericalRadon);
    out.values
        .par_chunks_mut(grid.n_t)
        .zip(dirs.par_iter())
        .for_each(|(series, &alpha)| {
            let y0 = alpha * grid.r_det;
            for (v, &t) in series.iter_mut().zip(&times) {
                *v = spherical_radon_with(&balls, y0, t, &gl);
            }
        });
    out
}

/// Settings for [`rp_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpOptions {
    /// Points on each great circle.
    pub n_circle: usize,
    /// Gauss-Legendre nodes per panel for R_S.
    pub quad_order: usize,
    /// R_S is tabulated on a sphere grid refined by this factor in both
    /// angles and read by interpolation along the great circles; 0 evaluates
    /// R_S directly at every circle point.
    pub oversample: usize,
}

impl Default for RpOptions {
    fn default() -> Self {
        RpOptions {
            n_circle: 100,
            quad_order: 16,
            oversample: 2,
        }
    }
}

/// R_P f = F(R_S f) at every node of `grid`.
pub fn rp_numeric(
    spec: &PhantomSpec,
    grid: SphereTimeGrid,
    opts: RpOptions,
) -> Result<DetectorData> {
    if opts.n_circle < 8 || opts.quad_order < 2 {
        return Err(Error::Domain(format!("invalid R_P options {opts:?}")));
    }
    spec.validate()?;
    let times = grid.times();
    let n_t = grid.n_t;
    let mut out = DetectorData::zeros(grid, DataKind::Rp);
    let dirs = grid.sphere.dirs();
    if opts.oversample == 0 {
        let balls = spec.effective_components();
        let gl = GaussLegendre::new(opts.quad_order);
        out.values
            .par_chunks_mut(n_t)
            .zip(dirs.par_iter())
            .for_each(|(series, &theta)| {
                let pts = great_circle_points(theta, opts.n_circle);
                for (v, &t) in series.iter_mut().zip(&times) {
                    let sum: f64 = pts
                        .iter()
                        .map(|&a| spherical_radon_with(&balls, a * grid.r_det, t, &gl))
                        .sum();
                    *v = sum * TAU / opts.n_circle as f64;
                }
            });
        return Ok(out);
    }
    let m = opts.oversample;
    let s = grid.sphere;
    let fine_sphere = crate::grid::SphereGrid::new(
        (s.n_polar - 1) * m + 1,
        s.n_az * m,
        s.polar_min,
        s.polar_max,
    )?;
    let fine = SphereTimeGrid::new(fine_sphere, n_t, grid.t_max, grid.r_det)?;
    let rs = spherical_radon_data(spec, fine, opts.quad_order);
    for k in 0..n_t {
        let slice = rs.slice(k);
        let f = crate::funkmink::funk_forward_sphere(&slice, s, opts.n_circle);
        out.set_slice(k, &f);
    }
    Ok(out)
}

/// (8π²)⁻¹ ∂ₜ(t·g) of R_P data g, which for range data is the detector
/// signal P.
pub fn signal_from_rp(rp: &DetectorData) -> Result<DetectorData> {
    let dt = rp.grid.dt();
    let n_t = rp.grid.n_t;
    let mut out = DetectorData::zeros(rp.grid, DataKind::P);
    let scale = 1.0 / (8.0 * PI * PI);
    for (dst, src) in out.values.chunks_mut(n_t).zip(rp.values.chunks(n_t)) {
        let f = dt_t_filter(src, dt)?;
        for (d, v) in dst.iter_mut().zip(f) {
            *d = v * scale;
        }
    }
    Ok(out)
}
