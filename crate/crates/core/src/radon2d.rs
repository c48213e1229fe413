//! Planar Radon transform R Φ(ω̂, s) = ∫ Φ(sω̂ + νω̂⊥) dν and its inversion
//! by filtered backprojection, Φ = (1/4π) R# H ∂ₛ RΦ.
//!
//! Sinograms sample ω̂ = (cos ψ, sin ψ) for ψ uniform on [0, π) and s
//! uniform on [−s_max, s_max]; the other half of S¹ follows from the even
//! symmetry RΦ(−ω̂, −s) = RΦ(ω̂, s).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Uniform node grid on [−x_max, x_max]², nodes at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSpec {
    pub n_x: usize,
    pub n_y: usize,
    pub x_max: f64,
}

impl PlaneSpec {
    pub fn new(n_x: usize, n_y: usize, x_max: f64) -> Result<Self> {
        if n_x < 2 || n_y < 2 || !(x_max > 0.0) {
            return Err(Error::Domain(format!(
                "invalid plane grid {n_x}x{n_y} on half-width {x_max}"
            )));
        }
        Ok(PlaneSpec { n_x, n_y, x_max })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / (self.n_x - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.x_max / (self.n_y - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.x_max + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.x_max + j as f64 * self.dy()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.x_max && y.abs() <= self.x_max
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.n_x * self.n_y);
        for i in 0..self.n_x {
            for j in 0..self.n_y {
                out.push((self.x(i), self.y(j)));
            }
        }
        out
    }
}

/// Samples of Φ on a [`PlaneSpec`], index `i·n_y + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneGrid {
    pub spec: PlaneSpec,
    pub values: Vec<f64>,
}

impl PlaneGrid {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(spec: PlaneSpec, f: F) -> Self {
        let values = spec.points().into_iter().map(|(x, y)| f(x, y)).collect();
        PlaneGrid { spec, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.n_y + j]
    }

    /// Bilinear interpolation, zero outside the grid.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let s = &self.spec;
        let u = (x + s.x_max) / s.dx();
        let v = (y + s.x_max) / s.dy();
        if !(u >= 0.0 && v >= 0.0 && u <= (s.n_x - 1) as f64 && v <= (s.n_y - 1) as f64) {
            return 0.0;
        }
        let i0 = (u.floor() as usize).min(s.n_x - 2);
        let j0 = (v.floor() as usize).min(s.n_y - 2);
        let fu = u - i0 as f64;
        let fv = v - j0 as f64;
        (1.0 - fu) * ((1.0 - fv) * self.get(i0, j0) + fv * self.get(i0, j0 + 1))
            + fu * ((1.0 - fv) * self.get(i0 + 1, j0) + fv * self.get(i0 + 1, j0 + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramSpec {
    pub n_angles: usize,
    pub n_s: usize,
    pub s_max: f64,
}

impl SinogramSpec {
    pub fn new(n_angles: usize, n_s: usize, s_max: f64) -> Result<Self> {
        if n_angles < 2 || n_s < 5 || !(s_max > 0.0) {
            return Err(Error::Domain(format!(
                "invalid sinogram {n_angles}x{n_s}, s_max={s_max}"
            )));
        }
        Ok(SinogramSpec {
            n_angles,
            n_s,
            s_max,
        })
    }

    pub fn angle(&self, a: usize) -> f64 {
        PI * a as f64 / self.n_angles as f64
    }

    pub fn ds(&self) -> f64 {
        2.0 * self.s_max / (self.n_s - 1) as f64
    }

    pub fn s(&self, j: usize) -> f64 {
        -self.s_max + j as f64 * self.ds()
    }
}

/// Samples of a function of (ω̂, s), angle-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram2D {
    pub spec: SinogramSpec,
    pub values: Vec<f64>,
}

impl Sinogram2D {
    pub fn zeros(spec: SinogramSpec) -> Self {
        Sinogram2D {
            spec,
            values: vec![0.0; spec.n_angles * spec.n_s],
        }
    }

    /// Sinogram whose value at angle ψ and offset s is `f(ψ, s)`.
    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync>(spec: SinogramSpec, f: F) -> Self {
        let mut values = vec![0.0; spec.n_angles * spec.n_s];
        values
            .par_chunks_mut(spec.n_s)
            .enumerate()
            .for_each(|(a, row)| {
                let psi = spec.angle(a);
                for (j, v) in row.iter_mut().enumerate() {
                    *v = f(psi, spec.s(j));
                }
            });
        Sinogram2D { spec, values }
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.spec.n_s..(a + 1) * self.spec.n_s]
    }

    pub fn get(&self, a: usize, j: usize) -> f64 {
        self.values[a * self.spec.n_s + j]
    }

    /// The same data indexed through the (ω̂, s) → (−ω̂, −s) symmetry:
    /// row a, offset index j is replaced by the value at offset −s.
    pub fn reflected(&self) -> Sinogram2D {
        let n = self.spec.n_s;
        let mut values = self.values.clone();
        for a in 0..self.spec.n_angles {
            for j in 0..n {
                values[a * n + j] = self.values[a * n + (n - 1 - j)];
            }
        }
        Sinogram2D {
            spec: self.spec,
            values,
        }
    }

    /// Debug dump with header `angle,s,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle,s,value\n");
        for a in 0..self.spec.n_angles {
            for j in 0..self.spec.n_s {
                let _ = writeln!(
                    out,
                    "{:.17e},{:.17e},{:.17e}",
                    self.spec.angle(a),
                    self.spec.s(j),
                    self.get(a, j)
                );
            }
        }
        out
    }
}

/// Line integral of the gridded Φ along {sω̂ + νω̂⊥}, sampled with a step
/// of half the grid spacing over the grid diagonal.
pub fn radon2d_forward(plane: &PlaneGrid, omega: (f64, f64), s: f64) -> f64 {
    let spec = &plane.spec;
    let nu_max = spec.x_max * std::f64::consts::SQRT_2;
    let step = 0.5 * spec.dx().min(spec.dy());
    let n = (2.0 * nu_max / step).ceil() as usize;
    let h = 2.0 * nu_max / n as f64;
    let (c, sn) = omega;
    let mut acc = 0.0;
    for k in 0..=n {
        let nu = -nu_max + k as f64 * h;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += w * plane.sample(s * c - nu * sn, s * sn + nu * c);
    }
    acc * h
}

/// Full sinogram of a gridded Φ.
pub fn radon2d_sinogram(plane: &PlaneGrid, spec: SinogramSpec) -> Sinogram2D {
    Sinogram2D::from_fn(spec, |psi, s| {
        radon2d_forward(plane, (psi.cos(), psi.sin()), s)
    })
}

/// ∂ₛ of every sinogram row, fourth order (see [`derivative4_into`]).
pub fn d_ds(sino: &Sinogram2D) -> Sinogram2D {
    let spec = sino.spec;
    let mut out = Sinogram2D::zeros(spec);
    out.values
        .par_chunks_mut(spec.n_s)
        .zip(sino.values.par_chunks(spec.n_s))
        .for_each(|(dst, src)| derivative4_into(src, spec.ds(), dst));
    out
}

/// Five-point derivative: centered inside, shifted stencils on the two
/// nodes nearest each end. Needs at least 5 samples.
pub(crate) fn derivative4_into(u: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len();
    assert!(n >= 5, "need at least 5 samples");
    let inv = 1.0 / (12.0 * h);
    out[0] = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) * inv;
    out[1] = (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]) * inv;
    for i in 2..n - 2 {
        out[i] = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) * inv;
    }
    out[n - 2] =
        (3.0 * u[n - 1] + 10.0 * u[n - 2] - 18.0 * u[n - 3] + 6.0 * u[n - 4] - u[n - 5]) * inv;
    out[n - 1] = (25.0 * u[n - 1] - 48.0 * u[n - 2] + 36.0 * u[n - 3] - 16.0 * u[n - 4]
        + 3.0 * u[n - 5])
        * inv;
}

pub(crate) fn derivative_into(u: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len();
    let inv = 1.0 / (2.0 * h);
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv;
    out[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv;
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - u[i - 1]) * inv;
    }
}

/// Discretization of the Hilbert kernel on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HilbertKernel {
    /// u piecewise constant on cells: w_k = ln|(k + ½)/(k − ½)|, w₀ = 0.
    /// Carries a first-order bias of (ln 2/π)·Δs·u′.
    CellConstant,
    /// u piecewise linear between nodes: w_k = F(k+1) − 2F(k) + F(k−1)
    /// with F(x) = x ln|x|. Second order.
    #[default]
    Linear,
}

impl HilbertKernel {
    pub fn weight(self, k: i64) -> f64 {
        match self {
            HilbertKernel::CellConstant => {
                if k == 0 {
                    return 0.0;
                }
                let k = k as f64;
                ((k + 0.5) / (k - 0.5)).abs().ln()
            }
            HilbertKernel::Linear => {
                let f = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().ln() };
                let k = k as f64;
                f(k + 1.0) - 2.0 * f(k) + f(k - 1.0)
            }
        }
    }
}

/// Discrete Hilbert transform Hu(s) = p.v. (1/π)∫ u(s′)/(s − s′) ds′ on a
/// uniform grid of length `n`: H[u]_i = (1/π) Σ_j u_j w_{i−j}, where w_k is
/// the exact integral of the kernel against the interpolant of u. The
/// kernel is scale free, so the spacing does not enter. The convolution is
/// evaluated with zero-padded FFTs.
pub struct HilbertFilter {
    n: usize,
    padded: usize,
    kernel_hat: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl HilbertFilter {
    pub fn new(n: usize) -> Self {
        Self::with_kernel(n, HilbertKernel::default())
    }

    pub fn with_kernel(n: usize, kind: HilbertKernel) -> Self {
        let len = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut kernel = vec![Complex::new(0.0, 0.0); len];
        for k in 1..n {
            let w = kind.weight(k as i64) / PI;
            kernel[k] = Complex::new(w, 0.0);
            kernel[len - k] = Complex::new(-w, 0.0);
        }
        forward.process(&mut kernel);
        HilbertFilter {
            n,
            padded: len,
            kernel_hat: kernel,
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Filter `u` into `out`; `buf` is scratch space reused between calls.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        assert_eq!(u.len(), self.n);
        buf.clear();
        buf.extend(u.iter().map(|&v| Complex::new(v, 0.0)));
        buf.resize(self.padded, Complex::new(0.0, 0.0));
        self.forward.process(buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse.process(buf);
        let scale = 1.0 / self.padded as f64;
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b.re * scale;
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_into(u, &mut out, &mut Vec::new());
        out
    }
}

/// Hilbert transform of uniformly spaced samples.
pub fn hilbert(samples: &[f64], _ds: f64) -> Vec<f64> {
    HilbertFilter::new(samples.len()).apply(samples)
}

/// Direct O(n²) evaluation of the same discrete Hilbert transform.
pub fn hilbert_direct(samples: &[f64], kind: HilbertKernel) -> Vec<f64> {
    let n = samples.len() as i64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| samples[j as usize] * kind.weight(i - j))
                .sum::<f64>()
                / PI
        })
        .collect()
}

/// H ∂ₛ applied to every row.
pub fn filter_sinogram(sino: &Sinogram2D, filter: &HilbertFilter) -> Sinogram2D {
    let spec = sino.spec;
    let mut out = Sinogram2D::zeros(spec);
    out.values
        .par_chunks_mut(spec.n_s)
        .zip(sino.values.par_chunks(spec.n_s))
        .for_each_init(
            || (vec![0.0; spec.n_s], Vec::new()),
            |(deriv, buf), (dst, src)| {
                derivative4_into(src, spec.ds(), deriv);
                filter.apply_into(deriv, dst, buf);
            },
        );
    out
}

/// Per-angle tables for backprojection.
pub(crate) struct AngleTable {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl AngleTable {
    pub(crate) fn new(spec: &SinogramSpec) -> Self {
        let (sin, cos) = (0..spec.n_angles).map(|a| spec.angle(a).sin_cos()).unzip();
        AngleTable { cos, sin }
    }
}

/// R#u at one point: ∫_{S¹} u(ω̂, x·ω̂) dS(ω̂), computed as twice the
/// uniform sum over [0, π) with linear interpolation in s. Returns the value
/// and whether any projection fell outside [−s_max, s_max].
pub(crate) fn backproject_point(
    sino: &Sinogram2D,
    table: &AngleTable,
    x: f64,
    y: f64,
) -> (f64, bool) {
    let spec = &sino.spec;
    let inv_ds = 1.0 / spec.ds();
    let last = (spec.n_s - 1) as f64;
    let mut acc = 0.0;
    let mut clipped = false;
    for a in 0..spec.n_angles {
        let s = x * table.cos[a] + y * table.sin[a];
        let u = (s + spec.s_max) * inv_ds;
        if !(0.0..=last).contains(&u) {
            clipped = true;
            continue;
        }
        let j0 = (u as usize).min(spec.n_s - 2);
        let f = u - j0 as f64;
        let row = sino.row(a);
        acc += row[j0] + f * (row[j0 + 1] - row[j0]);
    }
    (acc * 2.0 * PI / spec.n_angles as f64, clipped)
}

/// Backprojection evaluated at arbitrary points.
pub fn backproject_points(sino: &Sinogram2D, points: &[(f64, f64)]) -> Vec<f64> {
    let table = AngleTable::new(&sino.spec);
    points
        .par_iter()
        .map(|&(x, y)| backproject_point(sino, &table, x, y).0)
        .collect()
}

/// Backprojection R#u onto a plane grid.
pub fn backprojection(sino: &Sinogram2D, plane: PlaneSpec) -> PlaneGrid {
    let values = backproject_points(sino, &plane.points());
    PlaneGrid {
        spec: plane,
        values,
    }
}

/// Filtered backprojection Φ = (1/4π) R# H ∂ₛ (sinogram).
pub fn fbp_invert(sino: &Sinogram2D, plane: PlaneSpec) -> PlaneGrid {
    let filter = HilbertFilter::new(sino.spec.n_s);
    let filtered = filter_sinogram(sino, &filter);
    let mut out = backprojection(&filtered, plane);
    for v in &mut out.values {
        *v /= 4.0 * PI;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(spec: PlaneSpec) -> PlaneGrid {
        PlaneGrid::from_fn(spec, |x, y| if x * x + y * y < 1.0 { 1.0 } else { 0.0 })
    }

    #[test]
    fn forward_disk_examples() {
        let spec = PlaneSpec::new(401, 401, 1.5).unwrap();
        let d = disk(spec);
        let h = spec.dx();
        for &psi in &[0.0, 0.4, 1.3] {
            let om = (f64::cos(psi), f64::sin(psi));
            assert!((radon2d_forward(&d, om, 0.0) - 2.0).abs() < 2.0 * h);
            assert_eq!(radon2d_forward(&d, om, 1.0 + 2.0 * h), 0.0);
            assert_eq!(radon2d_forward(&d, om, -1.2), 0.0);
        }
    }

    #[test]
    fn forward_shift_covariance() {
        let spec = PlaneSpec::new(201, 201, 2.0).unwrap();
        let bump = |cx: f64, cy: f64| {
            PlaneGrid::from_fn(spec, move |x, y| {
                let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                (-r2 / 0.08).exp()
            })
        };
        let a = bump(0.0, 0.0);
        let (dx, dy) = (0.3, -0.2);
        let b = bump(dx, dy);
        for &psi in &[0.2, 1.0, 2.5] {
            let om = (f64::cos(psi), f64::sin(psi));
            for &s in &[-0.5, 0.0, 0.3] {
                let shifted = radon2d_forward(&a, om, s - (dx * om.0 + dy * om.1));
                let direct = radon2d_forward(&b, om, s);
                assert!((shifted - direct).abs() < 1e-3, "psi={psi} s={s}");
            }
        }
    }

    #[test]
    fn derivative_examples() {
        let spec = SinogramSpec::new(3, 41, 2.0).unwrap();
        let c = Sinogram2D::from_fn(spec, |_, _| 3.0);
        assert!(d_ds(&c).values.iter().all(|v| v.abs() < 1e-12));
        let lin = Sinogram2D::from_fn(spec, |_, s| s);
        assert!(d_ds(&lin).values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let sn = Sinogram2D::from_fn(spec, |_, s| s.sin());
        let d = d_ds(&sn);
        let ds = spec.ds();
        for j in 0..spec.n_s {
            assert!((d.get(1, j) - spec.s(j).cos()).abs() < ds.powi(4));
        }
    }

    #[test]
    fn hilbert_fft_matches_direct() {
        let u: Vec<f64> = (0..257)
            .map(|i| ((i as f64) * 0.37).sin() * (-(i as f64 - 128.0).powi(2) / 900.0).exp())
            .collect();
        for kind in [HilbertKernel::CellConstant, HilbertKernel::Linear] {
            let a = HilbertFilter::with_kernel(u.len(), kind).apply(&u);
            let b = hilbert_direct(&u, kind);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_weights_integrate_the_hat() {
        let gl = crate::quad::GaussLegendre::new(64);
        for k in [2i64, 3, 7, -4] {
            let w = gl.integrate(-1.0, 0.0, |t| (1.0 + t) / (k as f64 - t))
                + gl.integrate(0.0, 1.0, |t| (1.0 - t) / (k as f64 - t));
            assert!((w - HilbertKernel::Linear.weight(k)).abs() < 1e-12, "k={k}");
        }
        assert_eq!(HilbertKernel::Linear.weight(0), 0.0);
        assert!((HilbertKernel::Linear.weight(1) - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn cell_constant_kernel_has_first_order_bias() {
        // u = 1/(1+s²), Hu = s/(1+s²); at s = 0.5 the bias is (ln2/π)h u′
        for h in [0.02, 0.01] {
            let n = (40.0 / h) as usize + 1;
            let u: Vec<f64> = (0..n)
                .map(|i| {
                    let s = -20.0 + h * i as f64;
                    1.0 / (1.0 + s * s)
                })
                .collect();
            let i = ((20.5) / h).round() as usize;
            let hc = HilbertFilter::with_kernel(n, HilbertKernel::CellConstant).apply(&u)[i];
            let hl = HilbertFilter::with_kernel(n, HilbertKernel::Linear).apply(&u)[i];
            let du = -2.0 * 0.5 / (1.25f64).powi(2);
            let bias = (2f64.ln() / PI) * h * du;
            assert!(
                (hc - hl - bias).abs() < 0.1 * bias.abs(),
                "h={h} diff {} bias {bias}",
                hc - hl
            );
        }
    }

    #[test]
    fn hilbert_parity() {
        let n = 801;
        let u: Vec<f64> = (0..n)
            .map(|i| {
                let s = -20.0 + 0.05 * i as f64;
                1.0 / (1.0 + s * s)
            })
            .collect();
        let h = hilbert(&u, 0.05);
        for i in 0..n {
            assert!((h[i] + h[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn backprojection_examples() {
        let spec = SinogramSpec::new(90, 101, 2.0).unwrap();
        let plane = PlaneSpec::new(11, 11, 1.0).unwrap();
        let z = backprojection(&Sinogram2D::zeros(spec), plane);
        assert!(z.values.iter().all(|&v| v == 0.0));
        let one = backprojection(&Sinogram2D::from_fn(spec, |_, _| 1.0), plane);
        assert!(one.values.iter().all(|&v| (v - 2.0 * PI).abs() < 1e-12));
    }

    #[test]
    fn backprojection_ridge_matches_direct_sum() {
        let spec = SinogramSpec::new(64, 201, 2.0).unwrap();
        let a0 = 10;
        let psi0 = spec.angle(a0);
        let s0 = 0.4;
        let mut sino = Sinogram2D::zeros(spec);
        for j in 0..spec.n_s {
            let s = spec.s(j);
            sino.values[a0 * spec.n_s + j] = (-(s - s0).powi(2) / 0.002).exp();
        }
        let (c, sn) = (psi0.cos(), psi0.sin());
        let probes = [
            (s0 * c, s0 * sn),
            (s0 * c - 0.5 * sn, s0 * sn + 0.5 * c),
            (0.0, 0.0),
        ];
        let got = backproject_points(&sino, &probes);
        for (k, &(x, y)) in probes.iter().enumerate() {
            let s = x * c + y * sn;
            let u = (s + spec.s_max) / spec.ds();
            let j0 = u.floor() as usize;
            let f = u - j0 as f64;
            let lerp = sino.get(a0, j0) * (1.0 - f) + sino.get(a0, j0 + 1) * f;
            let expected = 2.0 * PI / spec.n_angles as f64 * lerp;
            assert!((got[k] - expected).abs() < 1e-12, "probe {k}");
        }
        assert!(got[0] > 0.09 && got[1] > 0.09 && got[2] < 1e-10);
    }

    #[test]
    fn fbp_zero_and_linearity() {
        let spec = SinogramSpec::new(36, 65, 1.5).unwrap();
        let plane = PlaneSpec::new(9, 9, 1.0).unwrap();
        let z = fbp_invert(&Sinogram2D::zeros(spec), plane);
        assert!(z.values.iter().all(|&v| v == 0.0));
        let s1 = Sinogram2D::from_fn(spec, |_, s| (1.0 - s * s).max(0.0));
        let s2 = Sinogram2D::from_fn(spec, |p, s| (-(s - 0.2 * p.cos()).powi(2) * 4.0).exp());
        let combo = Sinogram2D {
            spec,
            values: s1
                .values
                .iter()
                .zip(&s2.values)
                .map(|(a, b)| 2.0 * a - 0.5 * b)
                .collect(),
        };
        let r1 = fbp_invert(&s1, plane);
        let r2 = fbp_invert(&s2, plane);
        let rc = fbp_invert(&combo, plane);
        for i in 0..rc.values.len() {
            let lin = 2.0 * r1.values[i] - 0.5 * r2.values[i];
            assert!((rc.values[i] - lin).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_sampling_is_exact_on_bilinear_functions() {
        let spec = PlaneSpec::new(11, 21, 1.0).unwrap();
        let g = PlaneGrid::from_fn(spec, |x, y| 1.0 + 2.0 * x - y + 0.5 * x * y);
        let v = g.sample(0.13, -0.47);
        assert!((v - (1.0 + 0.26 + 0.47 - 0.5 * 0.13 * 0.47)).abs() < 1e-12);
        assert_eq!(g.sample(1.1, 0.0), 0.0);
    }
}
