//! Special functions for the range description and the test oracles:
//! Legendre polynomials, real spherical harmonics, half-integer-order
//! Bessel functions and their zeros, Funk-Hecke coefficients.
//!
//! Only the three-dimensional case is covered, so every Bessel order that
//! appears is a half integer `m + 1/2`.

use std::f64::consts::{PI, SQRT_2};

use crate::geometry::{check_unit, Vec3};
use crate::quad;
use crate::{Error, Result};

/// Half-integer Bessel order `m + 1/2`, stored as the integer `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrder(pub u32);

impl BesselOrder {
    pub fn value(self) -> f64 {
        self.0 as f64 + 0.5
    }
}

/// Degree/order pair of a spherical harmonic, `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    l: u32,
    m: i32,
}

impl HarmonicIndex {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > l {
            return Err(Error::Domain(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(HarmonicIndex { l, m })
    }

    pub fn l(self) -> u32 {
        self.l
    }

    pub fn m(self) -> i32 {
        self.m
    }

    /// All indices with degree `l <= l_max`, ordered by (l, m).
    pub fn all_up_to(l_max: u32) -> Vec<HarmonicIndex> {
        (0..=l_max)
            .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| HarmonicIndex { l, m }))
            .collect()
    }
}

/// Legendre polynomial of degree `m` at `x`, by the three-term recurrence.
pub fn legendre_p(m: u32, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("legendre_p: |x| = {} > 1", x.abs())));
    }
    Ok(legendre_unchecked(m, x))
}

pub(crate) fn legendre_unchecked(m: u32, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..m {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// P_l(0): zero for odd l, (−1)^{l/2} (l−1)!!/l!! for even l.
pub fn legendre_at_zero(l: u32) -> f64 {
    legendre_unchecked(l, 0.0)
}

// Orthonormal associated Legendre function N_l^m P_l^m(x), m >= 0,
// without the Condon-Shortley phase.
fn normalized_assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    let sin_t = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * sin_t;
    }
    if l == m {
        return pmm;
    }
    let mf = m as f64;
    let mut p_prev = pmm;
    let mut p = x * (2.0 * mf + 3.0).sqrt() * pmm;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * p - b * p_prev);
        p_prev = p;
        p = next;
    }
    p
}

/// Real orthonormal spherical harmonic Y_l^m at the unit vector `dir`.
///
/// m > 0 uses √2·cos(mφ), m < 0 uses √2·sin(|m|φ).
pub fn real_sph_harm(idx: HarmonicIndex, dir: Vec3) -> Result<f64> {
    check_unit(dir, 1e-12)?;
    Ok(real_sph_harm_unchecked(idx, dir))
}

pub(crate) fn real_sph_harm_unchecked(idx: HarmonicIndex, dir: Vec3) -> f64 {
    let am = idx.m.unsigned_abs();
    let p = normalized_assoc_legendre(idx.l, am, dir.z.clamp(-1.0, 1.0));
    if idx.m == 0 {
        return p;
    }
    let phi = dir.y.atan2(dir.x);
    let trig = if idx.m > 0 {
        (am as f64 * phi).cos()
    } else {
        (am as f64 * phi).sin()
    };
    SQRT_2 * p * trig
}

// Standard spherical Bessel function j_m(t) = sqrt(π/(2t)) J_{m+1/2}(t).
fn spherical_bessel_std(m: u32, t: f64) -> f64 {
    if t < 0.5 {
        return spherical_bessel_series(m, t) * t.powi(m as i32) / double_factorial(2 * m + 1);
    }
    let (s, c) = t.sin_cos();
    let j0 = s / t;
    if m == 0 {
        return j0;
    }
    let j1 = s / (t * t) - c / t;
    if (m as f64) < t {
        let (mut a, mut b) = (j0, j1);
        for k in 1..m {
            let next = (2.0 * k as f64 + 1.0) / t * b - a;
            a = b;
            b = next;
        }
        return b;
    }
    // Miller backward recurrence, normalized against j0 or j1.
    let start = m + 20 + (t as u32) + (10.0 * (m as f64).sqrt()) as u32;
    let mut above = 0.0;
    let mut cur = 1e-300;
    let mut val_m = 0.0;
    let (mut r0, mut r1) = (0.0, 0.0);
    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 + 1.0) / t * cur - above;
        above = cur;
        cur = below;
        // `cur` is now index k−1
        if k - 1 == m {
            val_m = cur;
        }
        if k - 1 == 1 {
            r1 = cur;
        }
        if k - 1 == 0 {
            r0 = cur;
        }
        if cur.abs() > 1e250 {
            above *= 1e-250;
            cur *= 1e-250;
            val_m *= 1e-250;
            r1 *= 1e-250;
        }
    }
    if j0.abs() >= j1.abs() {
        val_m * (j0 / r0)
    } else {
        val_m * (j1 / r1)
    }
}

// Σ_k (−t²/2)^k / (k! (2m+3)(2m+5)…(2m+2k+1)), i.e. j_m(t)·(2m+1)!!/t^m.
fn spherical_bessel_series(m: u32, t: f64) -> f64 {
    let x = -0.5 * t * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= x / (kf * (2.0 * m as f64 + 2.0 * kf + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn double_factorial(n: u32) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

/// Bessel function of the first kind J_{m+1/2}(t), t > 0.
pub fn bessel_j_half(order: BesselOrder, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("bessel_j_half: t = {t} must be > 0")));
    }
    Ok((2.0 * t / PI).sqrt() * spherical_bessel_std(order.0, t))
}

/// Normalized spherical Bessel function j_ν(t) = 2^ν Γ(ν+1) J_ν(t)/t^ν with
/// ν = n/2 − 1, so j_ν(0) = 1. Only odd `n >= 3` (half-integer ν) is
/// supported; for n = 3 this is sin(t)/t.
pub fn spherical_bessel_j(n: u32, t: f64) -> Result<f64> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "spherical_bessel_j: dimension n = {n} (only odd n >= 3)"
        )));
    }
    if t < 0.0 {
        return Err(Error::Domain(format!("spherical_bessel_j: t = {t} < 0")));
    }
    let m = (n - 3) / 2;
    Ok(normalized_j(m, t))
}

/// (2m+1)!!·j_m(t)/t^m, equal to 1 at t = 0.
pub(crate) fn normalized_j(m: u32, t: f64) -> f64 {
    if t < 0.5 || (m > 0 && t < 1e-3 * m as f64) {
        return spherical_bessel_series(m, t);
    }
    if m == 0 {
        return t.sin() / t;
    }
    double_factorial(2 * m + 1) * spherical_bessel_std(m, t) / t.powi(m as i32)
}

/// The first `count` positive zeros of J_{m+1/2}, increasing.
pub fn bessel_zeros(order: BesselOrder, count: usize) -> Vec<f64> {
    let m = order.0;
    let f = |t: f64| spherical_bessel_std(m, t);
    let mut zeros = Vec::with_capacity(count);
    if m == 0 {
        // Exact: J_{1/2} ∝ sin t.
        return (1..=count).map(|k| k as f64 * PI).collect();
    }
    // Zeros of J_ν lie above ν and are spaced more than π apart, so a scan
    // at π/4 cannot skip a sign change.
    let step = PI / 4.0;
    let mut a = order.value();
    let mut fa = f(a);
    while zeros.len() < count {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa.signum() != fb.signum() {
            zeros.push(refine_zero(&f, a, b));
        }
        a = b;
        fa = fb;
    }
    zeros
}

fn refine_zero<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// Funk-Hecke coefficient in three dimensions,
/// c(3, m) = 2π ∫_{−1}^{1} h(t) P_m(t) dt, by adaptive quadrature.
///
/// With it, ∫_{S²} h(θ̂·ω̂) Y(ω̂) dS(ω̂) = c(3, l) Y(θ̂) for any degree-l
/// harmonic Y.
pub fn funk_hecke_coeff<F: Fn(f64) -> f64>(m: u32, kernel: F) -> Result<f64> {
    let v = quad::adaptive(
        |t| kernel(t) * legendre_unchecked(m, t),
        -1.0,
        1.0,
        1e-12,
        4000,
    )?;
    Ok(2.0 * PI * v)
}

/// Eigenvalue of the great-circle (Funk) transform on degree-l harmonics,
/// 2π·P_l(0).
pub fn funk_eigenvalue(l: u32) -> f64 {
    2.0 * PI * legendre_at_zero(l)
}
