//! Range conditions for detector data in three dimensions: evenness in θ̂,
//! vanishing time integral, and vanishing of the spherical-harmonic moments
//! (𝐇g)_{l,m}(λ) at the positive zeros of J_{l+1/2}.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{DataKind, DetectorData, SphereFunction};
use crate::quad::{cumulative_trapezoid, trapezoid};
use crate::specfun::{bessel_zeros, real_sph_harm_unchecked, BesselOrder, HarmonicIndex};
use crate::{Error, Result};

/// Number of λ samples in the normalizing scan.
pub const SCAN_POINTS: usize = 50;

/// Scan maxima below this fraction of the largest scan maximum over all
/// (l, m) are raised to it, so harmonics that vanish identically (by a
/// symmetry of the phantom) report 0 instead of a ratio of roundoff.
pub const SCAN_FLOOR: f64 = 1e-6;

/// max over antipodal pairs of |g(θ̂, t) − g(−θ̂, t)| / max|g|, with
/// `None` when the grid stores one hemisphere (even by construction).
pub fn check_even(data: &DetectorData) -> Option<f64> {
    let s = data.grid.sphere;
    if s.is_hemisphere() {
        return None;
    }
    let max = data.max_abs();
    if max == 0.0 {
        return Some(0.0);
    }
    let n_t = data.grid.n_t;
    let mut worst = 0.0f64;
    for i in 0..s.n_polar {
        for j in 0..s.n_az {
            let (ia, ja) = s.antipode(i, j)?;
            let a = &data.values[(i * s.n_az + j) * n_t..][..n_t];
            let b = &data.values[(ia * s.n_az + ja) * n_t..][..n_t];
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Some(worst / max)
}

/// max over θ̂ of |∫₀^{t_max} P dt| / max|P| (trapezoid rule).
pub fn check_zero_integral(p: &DetectorData) -> f64 {
    let max = p.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let dt = p.grid.dt();
    p.values
        .chunks(p.grid.n_t)
        .map(|s| trapezoid(s, dt).abs())
        .fold(0.0, f64::max)
        / max
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// 𝐇g(θ̂, λ) = ∫ g(θ̂, t) j(λt) t² dt with j(x) = sin x / x.
pub fn moment_transform(g: &DetectorData, lambda: f64) -> Result<SphereFunction> {
    check_lambda(lambda)?;
    let times = g.grid.times();
    let kernel: Vec<f64> = times.iter().map(|&t| sinc(lambda * t) * t * t).collect();
    Ok(apply_kernel(g, &kernel, |s| s.to_vec()))
}

/// 𝐇P(θ̂, λ) = ∫ (∫₀ᵗ P dτ) j(λt) t dt.
pub fn moment_transform_p(p: &DetectorData, lambda: f64) -> Result<SphereFunction> {
    check_lambda(lambda)?;
    let times = p.grid.times();
    let kernel: Vec<f64> = times.iter().map(|&t| sinc(lambda * t) * t).collect();
    let dt = p.grid.dt();
    Ok(apply_kernel(p, &kernel, |s| cumulative_trapezoid(s, dt)))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

fn apply_kernel<F: Fn(&[f64]) -> Vec<f64>>(
    data: &DetectorData,
    kernel: &[f64],
    pre: F,
) -> SphereFunction {
    let dt = data.grid.dt();
    let values = data
        .values
        .chunks(data.grid.n_t)
        .map(|s| {
            let u = pre(s);
            let prod: Vec<f64> = u.iter().zip(kernel).map(|(a, b)| a * b).collect();
            trapezoid(&prod, dt)
        })
        .collect();
    SphereFunction {
        grid: data.grid.sphere,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub l: u32,
    pub m: i32,
    /// 1-based index of the Bessel zero.
    pub zero_index: usize,
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    /// `None` for hemisphere-stored data, which is even by construction.
    pub evenness_residual: Option<f64>,
    /// Only defined for detector data P.
    pub zero_integral_residual: Option<f64>,
    pub moments: Vec<MomentEntry>,
    pub l_max: u32,
    pub n_zeros: usize,
}

impl RangeReport {
    pub fn max_moment_residual(&self) -> f64 {
        self.moments.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    /// Largest of all residuals.
    pub fn worst(&self) -> f64 {
        self.max_moment_residual()
            .max(self.evenness_residual.unwrap_or(0.0))
            .max(self.zero_integral_residual.unwrap_or(0.0))
    }

    pub fn passes(&self, threshold: f64) -> bool {
        self.worst() <= threshold
    }

    /// Header `l,m,zero_index,lambda,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,m,zero_index,lambda,residual\n");
        for e in &self.moments {
            let _ = writeln!(
                out,
                "{},{},{},{:.17e},{:.17e}",
                e.l, e.m, e.zero_index, e.lambda, e.residual
            );
        }
        out
    }

    pub fn summary(&self, threshold: f64) -> String {
        let mut s = String::new();
        match self.evenness_residual {
            Some(v) => {
                let _ = writeln!(s, "evenness residual      {v:.3e}");
            }
            None => {
                let _ = writeln!(
                    s,
                    "evenness residual      n/a (hemisphere storage, even by construction)"
                );
            }
        }
        if let Some(v) = self.zero_integral_residual {
            let _ = writeln!(s, "zero-integral residual {v:.3e}");
        }
        let _ = writeln!(
            s,
            "moment residuals       max {:.3e} over {} entries (l <= {}, {} zeros)",
            self.max_moment_residual(),
            self.moments.len(),
            self.l_max,
            self.n_zeros
        );
        let _ = writeln!(
            s,
            "verdict                {} (threshold {threshold})",
            if self.passes(threshold) {
                "PASS"
            } else {
                "FAIL"
            }
        );
        s
    }
}

/// Harmonic coefficients ∫ h Y_l^m dS of one moment function for every
/// index in `table`.
fn project(h: &SphereFunction, table: &[(HarmonicIndex, Vec<f64>)]) -> Vec<f64> {
    table
        .iter()
        .map(|(_, w)| h.values.iter().zip(w).map(|(a, b)| a * b).sum())
        .collect()
}

/// Evaluate the range conditions. P data use [`moment_transform_p`], all
/// other kinds [`moment_transform`].
pub fn range_report(data: &DetectorData, l_max: u32, n_zeros: usize) -> Result<RangeReport> {
    if n_zeros == 0 {
        return Err(Error::Domain("n_zeros must be at least 1".into()));
    }
    let sphere = data.grid.sphere;
    let rw = sphere.row_weights();
    let hemi = sphere.is_hemisphere();
    let dirs = sphere.dirs();
    let indices = HarmonicIndex::all_up_to(l_max);
    let table: Vec<(HarmonicIndex, Vec<f64>)> = indices
        .iter()
        .map(|&idx| {
            let w = dirs
                .iter()
                .enumerate()
                .map(|(n, &d)| {
                    let y = real_sph_harm_unchecked(idx, d);
                    let y = if hemi {
                        y + real_sph_harm_unchecked(idx, -d)
                    } else {
                        y
                    };
                    rw[n / sphere.n_az] * y
                })
                .collect();
            (idx, w)
        })
        .collect();
    let is_p = data.kind == DataKind::P;
    let transform = |lambda: f64| {
        if is_p {
            moment_transform_p(data, lambda)
        } else {
            moment_transform(data, lambda)
        }
    };

    // per l: zeros and a scan up to the last zero + π
    struct PerL {
        zeros: Vec<f64>,
        zero_coef: Vec<Vec<f64>>,
        scan_max: Vec<f64>,
    }
    let per_l: Vec<PerL> = (0..=l_max)
        .into_par_iter()
        .map(|l| -> Result<PerL> {
            let zeros = bessel_zeros(BesselOrder(l), n_zeros);
            let lam_max = zeros[n_zeros - 1] + std::f64::consts::PI;
            let sel: Vec<(HarmonicIndex, Vec<f64>)> =
                table.iter().filter(|(i, _)| i.l() == l).cloned().collect();
            let mut scan_max = vec![0.0f64; sel.len()];
            for i in 1..=SCAN_POINTS {
                let lam = lam_max * i as f64 / SCAN_POINTS as f64;
                let c = project(&transform(lam)?, &sel);
                for (m, v) in scan_max.iter_mut().zip(c) {
                    *m = m.max(v.abs());
                }
            }
            let zero_coef = zeros
                .iter()
                .map(|&z| Ok(project(&transform(z)?, &sel)))
                .collect::<Result<Vec<_>>>()?;
            Ok(PerL {
                zeros,
                zero_coef,
                scan_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let global = per_l
        .iter()
        .flat_map(|p| p.scan_max.iter().copied())
        .fold(0.0, f64::max);
    let floor = SCAN_FLOOR * global;
    let mut moments = Vec::new();
    for (l, p) in per_l.iter().enumerate() {
        let l = l as u32;
        for (mi, m) in (-(l as i32)..=l as i32).enumerate() {
            let denom = p.scan_max[mi].max(floor);
            for (zi, &z) in p.zeros.iter().enumerate() {
                let c = p.zero_coef[zi][mi].abs();
                let residual = if denom == 0.0 { 0.0 } else { c / denom };
                moments.push(MomentEntry {
                    l,
                    m,
                    zero_index: zi + 1,
                    lambda: z,
                    residual,
                });
            }
        }
    }
    Ok(RangeReport {
        evenness_residual: check_even(data),
        zero_integral_residual: is_p.then(|| check_zero_integral(data)),
        moments,
        l_max,
        n_zeros,
    })
}
