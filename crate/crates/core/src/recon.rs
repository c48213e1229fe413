//! Time-axis filters, the spherical-Radon backprojection and the two-stage
//! reconstruction: per-slice Funk inversion of P, then backprojection of
//! the recovered boundary pressure.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::funkmink::{funk_forward_sphere, FunkInversionParams, FunkInverter};
use crate::geometry::Vec3;
use crate::grid::{DataKind, DetectorData, SphereTimeGrid, VolumeGrid, VolumeSpec};
use crate::quad::cumulative_trapezoid;
use crate::{Error, Result};

/// ∂ₜ(t·u(t)) on a uniform grid starting at t = 0: central differences
/// inside, second-order one-sided differences at both ends.
pub fn dt_t_filter(u: &[f64], dt: f64) -> Result<Vec<f64>> {
    if u.len() < 5 {
        return Err(Error::Domain(format!(
            "time filter needs at least 5 samples, got {}",
            u.len()
        )));
    }
    let w: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(k, v)| k as f64 * dt * v)
        .collect();
    let mut out = vec![0.0; u.len()];
    crate::radon2d::derivative_into(&w, dt, &mut out);
    Ok(out)
}

/// g(θ̂, t) = t⁻¹∫₀ᵗ P(θ̂, τ) dτ by the cumulative trapezoid rule, g(·, 0) = 0.
pub fn time_average(data: &DetectorData) -> Result<DetectorData> {
    let n_t = data.grid.n_t;
    let initial = initial_max(data);
    if initial > 1e-9 * data.max_abs() {
        return Err(Error::NonzeroInitial { max_abs: initial });
    }
    let dt = data.grid.dt();
    let mut out = DetectorData::zeros(data.grid, DataKind::TimeAverage);
    for (dst, src) in out.values.chunks_mut(n_t).zip(data.values.chunks(n_t)) {
        let c = cumulative_trapezoid(src, dt);
        for k in 1..n_t {
            dst[k] = c[k] / data.grid.time(k);
        }
    }
    Ok(out)
}

/// max over nodes of |data(·, t = 0)|.
pub fn initial_max(data: &DetectorData) -> f64 {
    data.values
        .chunks(data.grid.n_t)
        .fold(0.0f64, |m, s| m.max(s[0].abs()))
}

/// Weights of the one-sided `n`-point finite-difference formulas at t = 0
/// for derivatives 0..=m on the grid 0, h, 2h, … (Fornberg's recursion).
pub fn one_sided_weights(n: usize, m: usize, h: f64) -> Vec<Vec<f64>> {
    let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            for k in (0..=m.min(i)).rev() {
                let prev = if k > 0 { c[k - 1][i - 1] } else { 0.0 };
                c[k][i] = c1 * (k as f64 * prev - x[i - 1] * c[k][i - 1]) / c2;
            }
            for k in (0..=m.min(i)).rev() {
                let prev = if k > 0 { c[k - 1][j] } else { 0.0 };
                c[k][j] = (x[i] * c[k][j] - k as f64 * prev) / c3;
            }
        }
        c1 = c2;
    }
    c
}

/// Derivatives of order 0..=m at t = 0 of uniformly spaced samples, from the
/// first `n` samples.
pub fn derivatives_at_zero(samples: &[f64], dt: f64, m: usize, n: usize) -> Result<Vec<f64>> {
    if n > samples.len() || n <= m {
        return Err(Error::Domain(format!(
            "need {n} > {m} samples for the stencil, have {}",
            samples.len()
        )));
    }
    let w = one_sided_weights(n, m, dt);
    Ok(w.iter()
        .map(|row| row.iter().zip(samples).map(|(a, b)| a * b).sum())
        .collect())
}

/// Counters returned with a backprojection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BackprojectionStats {
    /// Integrand lookups beyond t_max, read as zero.
    pub out_of_range: u64,
    /// Voxels with |x| ≥ r_det, set to zero.
    pub outside: u64,
}

struct SphereNodes {
    pos: Vec<Vec3>,
    weight: Vec<f64>,
    series: Vec<usize>,
    numer: Vec<f64>,
    n_t: usize,
    dt: f64,
    r_det: f64,
    scale: f64,
}

impl SphereNodes {
    /// `numer` holds one filtered series per grid node. Hemisphere grids
    /// contribute each node twice, at r α̂ and −r α̂.
    fn new(grid: SphereTimeGrid, numer: Vec<f64>, scale: f64) -> Self {
        let s = grid.sphere;
        let rw = s.row_weights();
        let mut pos = Vec::new();
        let mut weight = Vec::new();
        let mut series = Vec::new();
        for (i, &w) in rw.iter().enumerate() {
            for j in 0..s.n_az {
                let a = s.dir(i, j) * grid.r_det;
                let node = i * s.n_az + j;
                pos.push(a);
                weight.push(w);
                series.push(node);
                if s.is_hemisphere() {
                    pos.push(-a);
                    weight.push(w);
                    series.push(node);
                }
            }
        }
        SphereNodes {
            pos,
            weight,
            series,
            numer,
            n_t: grid.n_t,
            dt: grid.dt(),
            r_det: grid.r_det,
            scale,
        }
    }

    /// scale · Σ w N(|y − x|)/|y − x|; returns the value and the number of
    /// lookups beyond the time grid.
    fn eval(&self, x: Vec3) -> (f64, u64) {
        let inv_dt = 1.0 / self.dt;
        let last = (self.n_t - 1) as f64;
        let mut acc = 0.0;
        let mut miss = 0;
        for ((p, w), &node) in self.pos.iter().zip(&self.weight).zip(&self.series) {
            let dist = (*p - x).norm();
            let tau = dist * inv_dt;
            if tau > last {
                miss += 1;
                continue;
            }
            let k0 = (tau as usize).min(self.n_t - 2);
            let f = tau - k0 as f64;
            let row = &self.numer[node * self.n_t..(node + 1) * self.n_t];
            acc += w * (row[k0] + f * (row[k0 + 1] - row[k0])) / dist;
        }
        (acc * self.scale, miss)
    }

    fn volume(&self, spec: VolumeSpec, even: bool) -> (VolumeGrid, BackprojectionStats) {
        let n = spec.n;
        let mut out = VolumeGrid::zeros(spec);
        // with even data only the x₃ ≥ 0 half is computed and mirrored
        let k_start = if even { n / 2 } else { 0 };
        let per_plane: Vec<(Vec<f64>, u64, u64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut vals = vec![0.0; n * n];
                let (mut miss, mut outside) = (0, 0);
                for j in 0..n {
                    for k in k_start..n {
                        let x = spec.point(i, j, k);
                        if x.norm() >= self.r_det {
                            outside += 1;
                            continue;
                        }
                        let (v, m) = self.eval(x);
                        vals[j * n + k] = v;
                        miss += m;
                    }
                }
                (vals, miss, outside)
            })
            .collect();
        let mut stats = BackprojectionStats::default();
        for (i, (vals, miss, outside)) in per_plane.iter().enumerate() {
            stats.out_of_range += miss;
            stats.outside += outside;
            for j in 0..n {
                for k in k_start..n {
                    out.values[spec.index(i, j, k)] = vals[j * n + k];
                }
            }
        }
        if even {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..k_start {
                        let v = out.values[spec.index(n - 1 - i, n - 1 - j, n - 1 - k)];
                        out.values[spec.index(i, j, k)] = v;
                    }
                }
            }
        }
        (out, stats)
    }

    fn points(&self, pts: &[Vec3]) -> (Vec<f64>, BackprojectionStats) {
        let res: Vec<(f64, u64, bool)> = pts
            .par_iter()
            .map(|&x| {
                if x.norm() >= self.r_det {
                    (0.0, 0, true)
                } else {
                    let (v, m) = self.eval(x);
                    (v, m, false)
                }
            })
            .collect();
        let mut stats = BackprojectionStats::default();
        let vals = res
            .into_iter()
            .map(|(v, m, o)| {
                stats.out_of_range += m;
                stats.outside += o as u64;
                v
            })
            .collect();
        (vals, stats)
    }
}

fn filtered(data: &DetectorData, twice: bool) -> Result<Vec<f64>> {
    let n_t = data.grid.n_t;
    let dt = data.grid.dt();
    let mut out = Vec::with_capacity(data.values.len());
    for s in data.values.chunks(n_t) {
        let mut f = dt_t_filter(s, dt)?;
        if twice {
            f = dt_t_filter(&f, dt)?;
        }
        out.extend(f);
    }
    Ok(out)
}

fn check_kind(data: &DetectorData, want: DataKind) -> Result<()> {
    if data.kind != want {
        return Err(Error::GridMismatch(format!(
            "expected {want:?} data, got {:?}",
            data.kind
        )));
    }
    Ok(())
}

fn fpr_nodes(q: &DetectorData) -> Result<SphereNodes> {
    check_kind(q, DataKind::SphericalRadon)?;
    let r = q.grid.r_det;
    Ok(SphereNodes::new(
        q.grid,
        filtered(q, true)?,
        -r / (8.0 * PI * PI),
    ))
}

fn pressure_nodes(p: &DetectorData) -> Result<SphereNodes> {
    check_kind(p, DataKind::BoundaryPressure)?;
    let r = p.grid.r_det;
    Ok(SphereNodes::new(
        p.grid,
        filtered(p, false)?,
        -r / (2.0 * PI),
    ))
}

/// f(x) = −(r/8π²) ∫_{S²} [∂ₜt∂ₜt q / t](α̂, |rα̂ − x|) dS(α̂) from spherical
/// Radon data q.
pub fn fpr_backprojection(
    q: &DetectorData,
    vol: VolumeSpec,
) -> Result<(VolumeGrid, BackprojectionStats)> {
    Ok(fpr_nodes(q)?.volume(vol, q.grid.sphere.is_hemisphere()))
}

pub fn fpr_backprojection_points(
    q: &DetectorData,
    pts: &[Vec3],
) -> Result<(Vec<f64>, BackprojectionStats)> {
    Ok(fpr_nodes(q)?.points(pts))
}

/// f(x) = −(r/2π) ∫_{S²} [∂ₜ(t p) / t](α̂, |rα̂ − x|) dS(α̂) from the boundary
/// pressure p. Samples at t = 0 are multiplied by t and never contribute.
pub fn pressure_backprojection(
    p: &DetectorData,
    vol: VolumeSpec,
) -> Result<(VolumeGrid, BackprojectionStats)> {
    Ok(pressure_nodes(p)?.volume(vol, p.grid.sphere.is_hemisphere()))
}

pub fn pressure_backprojection_points(
    p: &DetectorData,
    pts: &[Vec3],
) -> Result<(Vec<f64>, BackprojectionStats)> {
    Ok(pressure_nodes(p)?.points(pts))
}

/// Settings of the two-stage reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconParams {
    pub funk: FunkInversionParams,
    pub volume: VolumeSpec,
    /// Recompute F of the recovered pressure and compare with the input.
    pub diagnostics: bool,
    /// Circle points for the diagnostic forward transform.
    pub n_circle: usize,
}

impl Default for ReconParams {
    fn default() -> Self {
        ReconParams {
            funk: FunkInversionParams::default(),
            volume: VolumeSpec {
                n: 80,
                half_width: 1.0,
            },
            diagnostics: true,
            n_circle: 100,
        }
    }
}

/// Per-stage residuals and counters of a reconstruction run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// max |P(·, 0)| / max |P|.
    pub initial_ratio: f64,
    /// Relative L² mismatch between (2π)⁻¹F[p] and P, when computed.
    pub funk_residual: Option<f64>,
    pub backprojection: BackprojectionStats,
    pub stage1_seconds: f64,
    pub stage2_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub volume: VolumeGrid,
    /// Boundary pressure recovered in stage one.
    pub pressure: DetectorData,
    pub diagnostics: Diagnostics,
}

/// Stage one: p(·, t) = 2π F⁻¹P(·, t) for every time slice.
pub fn recover_pressure(data: &DetectorData, params: FunkInversionParams) -> Result<DetectorData> {
    check_kind(data, DataKind::P)?;
    let inv = FunkInverter::new(data.grid.sphere, params)?;
    let slices: Vec<_> = (0..data.grid.n_t)
        .into_par_iter()
        .map(|k| {
            let mut s = inv.invert(&data.slice(k));
            s.values.iter_mut().for_each(|v| *v *= 2.0 * PI);
            s
        })
        .collect();
    let mut p = DetectorData::zeros(data.grid, DataKind::BoundaryPressure);
    for (k, s) in slices.iter().enumerate() {
        p.set_slice(k, s);
    }
    Ok(p)
}

fn funk_residual(data: &DetectorData, p: &DetectorData, n_circle: usize) -> f64 {
    let (num, den) = (0..data.grid.n_t)
        .into_par_iter()
        .map(|k| {
            let fp = funk_forward_sphere(&p.slice(k), data.grid.sphere, n_circle);
            let d = data.slice(k);
            let w = data.grid.sphere.row_weights();
            let n_az = data.grid.sphere.n_az;
            let mut num = 0.0;
            let mut den = 0.0;
            for (idx, (a, b)) in fp.values.iter().zip(&d.values).enumerate() {
                let e = a / (2.0 * PI) - b;
                num += w[idx / n_az] * e * e;
                den += w[idx / n_az] * b * b;
            }
            (num, den)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Full reconstruction from circular-detector data.
pub fn reconstruct_pipeline(data: &DetectorData, params: &ReconParams) -> Result<Reconstruction> {
    let max = data.max_abs();
    let initial_ratio = if max > 0.0 {
        initial_max(data) / max
    } else {
        0.0
    };
    let t0 = Instant::now();
    let pressure = recover_pressure(data, params.funk)?;
    let stage1 = t0.elapsed().as_secs_f64();
    let funk_res = params
        .diagnostics
        .then(|| funk_residual(data, &pressure, params.n_circle));
    let t1 = Instant::now();
    let (volume, stats) = pressure_backprojection(&pressure, params.volume)?;
    Ok(Reconstruction {
        volume,
        pressure,
        diagnostics: Diagnostics {
            initial_ratio,
            funk_residual: funk_res,
            backprojection: stats,
            stage1_seconds: stage1,
            stage2_seconds: t1.elapsed().as_secs_f64(),
        },
    })
}
