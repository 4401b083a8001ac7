//! Spectral calculus on the unit circle and disk test functions.
//!
//! Boundary functions are real trigonometric polynomials stored in the
//! orthonormal basis `e_0 = 1/sqrt(2 pi)`, `e_{2m-1} = cos(m t)/sqrt(pi)`,
//! `e_{2m} = sin(m t)/sqrt(pi)`. Mode `k` has degree `lambda_k = ceil(k/2)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::bump;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre_on;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Degree of basis index `k`.
pub fn lambda(k: usize) -> f64 {
    k.div_ceil(2) as f64
}

fn check_disk(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk(z.into()))
    }
}

/// Real trigonometric polynomial of degree `N` in the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    coeffs: Vec<f64>,
}

impl BoundaryField {
    pub fn zeros(n: usize) -> Self {
        BoundaryField { coeffs: vec![0.0; 2 * n + 1] }
    }

    /// Panics unless `coeffs.len()` is odd.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficient vector must have length 2N+1");
        BoundaryField { coeffs }
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut p = Self::zeros(n);
        p.coeffs[k] = 1.0;
        p
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zeros(n);
        p.coeffs[0] = c * SQRT_2PI;
        p
    }

    /// `amp * cos(m t)`.
    pub fn cos_mode(n: usize, m: usize, amp: f64) -> Self {
        if m == 0 {
            return Self::constant(n, amp);
        }
        let mut p = Self::zeros(n);
        p.coeffs[2 * m - 1] = amp * SQRT_PI;
        p
    }

    /// `amp * sin(m t)`.
    pub fn sin_mode(n: usize, m: usize, amp: f64) -> Self {
        let mut p = Self::zeros(n);
        if m > 0 {
            p.coeffs[2 * m] = amp * SQRT_PI;
        }
        p
    }

    pub fn degree(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Highest degree carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        (0..self.coeffs.len())
            .rev()
            .find(|&k| self.coeffs[k] != 0.0)
            .map_or(0, |k| k.div_ceil(2))
    }

    /// Truncate or zero-pad to degree `n`.
    pub fn with_degree(&self, n: usize) -> Self {
        let mut c = vec![0.0; 2 * n + 1];
        let k = c.len().min(self.coeffs.len());
        c[..k].copy_from_slice(&self.coeffs[..k]);
        BoundaryField { coeffs: c }
    }

    /// Cosine and sine amplitudes of degree `m`.
    pub fn cos_sin(&self, m: usize) -> (f64, f64) {
        if m == 0 {
            return (self.coeffs[0] / SQRT_2PI, 0.0);
        }
        if m > self.degree() {
            return (0.0, 0.0);
        }
        (self.coeffs[2 * m - 1] / SQRT_PI, self.coeffs[2 * m] / SQRT_PI)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut s = self.coeffs[0] / SQRT_2PI;
        for m in 1..=self.degree() {
            let (sn, cs) = (m as f64 * theta).sin_cos();
            s += (self.coeffs[2 * m - 1] * cs + self.coeffs[2 * m] * sn) / SQRT_PI;
        }
        s
    }

    /// Evaluation at a complex angle (entire in `theta`).
    pub fn eval_complex(&self, theta: Complex64) -> Complex64 {
        let mut s = Complex64::new(self.coeffs[0] / SQRT_2PI, 0.0);
        for m in 1..=self.degree() {
            let a = theta * m as f64;
            s += (a.cos() * self.coeffs[2 * m - 1] + a.sin() * self.coeffs[2 * m]) / SQRT_PI;
        }
        s
    }

    /// Average over the circle.
    pub fn mean(&self) -> f64 {
        self.coeffs[0] / SQRT_2PI
    }

    /// Integral against arclength.
    pub fn integral(&self) -> f64 {
        self.coeffs[0] * SQRT_2PI
    }

    /// `L^2(U)` inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    fn map_modes(&self, f: impl Fn(usize, f64, f64) -> (f64, f64)) -> Self {
        let mut out = Self::zeros(self.degree());
        for m in 1..=self.degree() {
            let (a, b) = f(m, self.coeffs[2 * m - 1], self.coeffs[2 * m]);
            out.coeffs[2 * m - 1] = a;
            out.coeffs[2 * m] = b;
        }
        out
    }

    /// Harmonic conjugate vanishing at the origin: `cos -> sin`, `sin -> -cos`, `1 -> 0`.
    pub fn conjugate(&self) -> Self {
        self.map_modes(|_, a, b| (-b, a))
    }

    /// Dirichlet-to-Neumann map: `e_k -> -lambda_k e_k`.
    pub fn dirichlet_to_neumann(&self) -> Self {
        self.map_modes(|m, a, b| (-(m as f64) * a, -(m as f64) * b))
    }

    /// Derivative in the angle.
    pub fn tangential_derivative(&self) -> Self {
        self.map_modes(|m, a, b| (m as f64 * b, -(m as f64) * a))
    }

    /// Inverse of the Dirichlet-to-Neumann map on mean-zero fields; the mean is dropped.
    pub fn inverse_dirichlet_to_neumann(&self) -> Self {
        self.map_modes(|m, a, b| (-a / m as f64, -b / m as f64))
    }

    /// `(sum_k lambda_k^{2s} a_k^2)^{1/2}`; the zero mode has weight 0.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        (1..self.coeffs.len())
            .map(|k| lambda(k).powf(2.0 * s) * self.coeffs[k] * self.coeffs[k])
            .sum::<f64>()
            .sqrt()
    }

    /// Harmonic extension `(Hp)(z)`.
    pub fn harmonic_extend(&self, z: Complex64) -> Result<f64> {
        Ok(self.analytic_extend(z)?.re)
    }

    /// `Hp + i H(p~)`, the analytic function with real boundary values `p`.
    pub fn analytic_extend(&self, z: Complex64) -> Result<Complex64> {
        check_disk(z)?;
        let mut s = Complex64::new(self.coeffs[0] / SQRT_2PI, 0.0);
        let mut zm = Complex64::new(1.0, 0.0);
        for m in 1..=self.degree() {
            zm *= z;
            s += zm * Complex64::new(self.coeffs[2 * m - 1], -self.coeffs[2 * m]) / SQRT_PI;
        }
        Ok(s)
    }

    /// `t -> p(t - alpha)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        self.map_modes(|m, a, b| {
            let (s, c) = (m as f64 * alpha).sin_cos();
            (a * c - b * s, a * s + b * c)
        })
        .with_mean_of(self)
    }

    fn with_mean_of(mut self, other: &Self) -> Self {
        self.coeffs[0] = other.coeffs[0];
        self
    }

    pub fn scaled(&self, c: f64) -> Self {
        BoundaryField { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = self.degree().max(other.degree());
        let a = self.with_degree(n);
        let b = other.with_degree(n);
        BoundaryField { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(*x, *y)).collect() }
    }

    /// Exact pointwise product, of degree `deg p + deg q`.
    pub fn product(&self, other: &Self) -> Self {
        let n = self.degree() + other.degree();
        let circle = Circle::new(2 * n + 2);
        let a = circle.values(self);
        let b = circle.values(other);
        let v: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        circle.to_coeffs(&v, n).expect("grid sized for the product")
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

impl Add for &BoundaryField {
    type Output = BoundaryField;
    fn add(self, rhs: Self) -> BoundaryField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &BoundaryField {
    type Output = BoundaryField;
    fn sub(self, rhs: Self) -> BoundaryField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &BoundaryField {
    type Output = BoundaryField;
    fn neg(self) -> BoundaryField {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &BoundaryField {
    type Output = BoundaryField;
    fn mul(self, c: f64) -> BoundaryField {
        self.scaled(c)
    }
}

/// Equispaced angular grid `t_j = 2 pi j / M` with FFT plans.
#[derive(Clone)]
pub struct Circle {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Circle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Circle").field("m", &self.m).finish()
    }
}

impl Circle {
    pub fn new(m: usize) -> Circle {
        assert!(m >= 1);
        let mut planner = FftPlanner::new();
        Circle { m, fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.dtheta() * j as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.theta(j)).collect()
    }

    /// Grid points on the circle.
    pub fn points(&self) -> Vec<Complex64> {
        self.thetas().into_iter().map(|t| Complex64::from_polar(1.0, t)).collect()
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if self.m > 2 * n {
            Ok(())
        } else {
            Err(Error::GridTooSmall { m: self.m, n })
        }
    }

    /// Forward DFT `X_k = sum_j v_j exp(-2 pi i j k / M)`.
    pub fn spectrum(&self, v: &[f64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.m);
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn synthesize(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Grid values of `p`; requires `M > 2 deg p`.
    pub fn values(&self, p: &BoundaryField) -> Vec<f64> {
        let n = p.effective_degree();
        self.check_degree(n).expect("grid too small for field");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        buf[0] = Complex64::new(p.mean(), 0.0);
        for k in 1..=n {
            let (a, b) = p.cos_sin(k);
            buf[k] += Complex64::new(0.5 * a, -0.5 * b);
            buf[self.m - k] += Complex64::new(0.5 * a, 0.5 * b);
        }
        self.synthesize(buf)
    }

    /// Degree-`n` projection of grid values; exact for trigonometric
    /// polynomials of degree at most `n`.
    pub fn to_coeffs(&self, v: &[f64], n: usize) -> Result<BoundaryField> {
        self.check_degree(n)?;
        let x = self.spectrum(v);
        let dt = self.dtheta();
        let mut p = BoundaryField::zeros(n);
        p.coeffs[0] = x[0].re * dt / SQRT_2PI;
        for k in 1..=n {
            p.coeffs[2 * k - 1] = x[k].re * dt / SQRT_PI;
            p.coeffs[2 * k] = -x[k].im * dt / SQRT_PI;
        }
        Ok(p)
    }

    fn multiply_spectrum(&self, v: &[f64], f: impl Fn(i64) -> Complex64) -> Vec<f64> {
        let mut x = self.spectrum(v);
        let m = self.m as i64;
        for (k, c) in x.iter_mut().enumerate() {
            let k = k as i64;
            let freq = if 2 * k < m { k } else if 2 * k > m { k - m } else { 0 };
            *c *= f(freq) / m as f64;
        }
        self.synthesize(x)
    }

    /// Discrete harmonic conjugate of grid values.
    pub fn conjugate_values(&self, v: &[f64]) -> Vec<f64> {
        self.multiply_spectrum(v, |k| Complex64::new(0.0, -(k.signum() as f64)))
    }

    /// Discrete Dirichlet-to-Neumann map of grid values.
    pub fn dtn_values(&self, v: &[f64]) -> Vec<f64> {
        self.multiply_spectrum(v, |k| Complex64::new(-(k.abs() as f64), 0.0))
    }

    /// Trapezoid rule against arclength.
    pub fn integrate(&self, v: &[f64]) -> f64 {
        v.iter().sum::<f64>() * self.dtheta()
    }

    pub fn mean(&self, v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / self.m as f64
    }

    /// Principal-value conjugation by quadrature of the cotangent kernel on
    /// the nodes at odd offsets from the evaluation point.
    pub fn pv_conjugate(&self, v: &[f64]) -> Vec<f64> {
        let dt = self.dtheta();
        (0..self.m)
            .map(|i| {
                let mut s = 0.0;
                for off in (1..self.m).step_by(2) {
                    let j = (i + off) % self.m;
                    let d = -(off as f64) * dt;
                    s += v[j] / (0.5 * d).tan();
                }
                s * 2.0 * dt / (2.0 * PI)
            })
            .collect()
    }
}

/// Smooth radial bump supported on `[r_min, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBump {
    pub r_min: f64,
    pub r_max: f64,
    pub amp: f64,
}

impl RadialBump {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "annulus [{r_min}, {r_max}] must lie inside (0, 1)"
            )));
        }
        Ok(RadialBump { r_min, r_max, amp: 1.0 })
    }

    /// Value and first two radial derivatives.
    pub fn eval(&self, r: f64) -> [f64; 3] {
        let half = 0.5 * (self.r_max - self.r_min);
        let u = (r - 0.5 * (self.r_max + self.r_min)) / half;
        let [b, b1, b2] = bump::unit(u);
        [self.amp * b, self.amp * b1 / half, self.amp * b2 / (half * half)]
    }
}

/// Finite sum of `b_t(r) T_t(theta)` with radial bumps `b_t` and
/// trigonometric polynomials `T_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskTestFunction {
    terms: Vec<(RadialBump, BoundaryField)>,
}

impl DiskTestFunction {
    pub fn new(radial: RadialBump, angular: BoundaryField) -> Self {
        DiskTestFunction { terms: vec![(radial, angular)] }
    }

    /// Rotationally symmetric bump of the given amplitude.
    pub fn radial(r_min: f64, r_max: f64, amp: f64) -> Result<Self> {
        let mut b = RadialBump::new(r_min, r_max)?;
        b.amp = amp;
        Ok(Self::new(b, BoundaryField::constant(0, 1.0)))
    }

    pub fn terms(&self) -> &[(RadialBump, BoundaryField)] {
        &self.terms
    }

    pub fn plus(mut self, other: &DiskTestFunction) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scaled(&self, c: f64) -> Self {
        DiskTestFunction {
            terms: self.terms.iter().map(|(b, t)| (*b, t.scaled(c))).collect(),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.terms.iter().fold((1.0, 0.0), |(lo, hi), (b, _)| (lo.min(b.r_min), hi.max(b.r_max)))
    }

    pub fn angular_degree(&self) -> usize {
        self.terms.iter().map(|(_, t)| t.effective_degree()).max().unwrap_or(0)
    }

    /// `(f, df/dr, df/dtheta)` at polar coordinates.
    pub fn eval_polar(&self, r: f64, theta: f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for (b, t) in &self.terms {
            let [v, v1, _] = b.eval(r);
            if v == 0.0 && v1 == 0.0 {
                continue;
            }
            let tv = t.eval(theta);
            out.0 += v * tv;
            out.1 += v1 * tv;
            out.2 += v * t.tangential_derivative().eval(theta);
        }
        out
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.eval_polar(z.norm(), z.arg()).0
    }

    /// Wirtinger derivative `d/dz = e^{-i theta}(d_r - (i/r) d_theta)/2`.
    pub fn d_z(&self, r: f64, theta: f64) -> Complex64 {
        let (_, fr, ft) = self.eval_polar(r, theta);
        0.5 * Complex64::from_polar(1.0, -theta) * Complex64::new(fr, -ft / r)
    }

    /// Values and Wirtinger derivatives on a polar grid (row-major in radius).
    pub fn sample(&self, grid: &PolarGrid) -> (Vec<f64>, Vec<Complex64>) {
        let n = grid.len();
        let mut f = vec![0.0; n];
        let mut dz = vec![Complex64::new(0.0, 0.0); n];
        let circle = &grid.circle;
        let tv: Vec<(Vec<f64>, Vec<f64>)> = self
            .terms
            .iter()
            .map(|(_, t)| (circle.values(t), circle.values(&t.tangential_derivative())))
            .collect();
        for (i, &r) in grid.r.iter().enumerate() {
            for ((b, _), (t, dt)) in self.terms.iter().zip(&tv) {
                let [v, v1, _] = b.eval(r);
                if v == 0.0 && v1 == 0.0 {
                    continue;
                }
                for j in 0..grid.m {
                    let idx = i * grid.m + j;
                    f[idx] += v * t[j];
                    let fr = v1 * t[j];
                    let ft = v * dt[j];
                    dz[idx] += 0.5 * grid.phase_conj[j] * Complex64::new(fr, -ft / r);
                }
            }
        }
        (f, dz)
    }
}

/// Tensor grid: Gauss-Legendre in the radius, trapezoid in the angle.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub r: Vec<f64>,
    /// Gauss-Legendre weight times the Jacobian `r`.
    pub wr: Vec<f64>,
    pub m: usize,
    pub circle: Circle,
    pub r_lo: f64,
    pub r_hi: f64,
    phase_conj: Vec<Complex64>,
}

impl PolarGrid {
    pub fn new(r_min: f64, r_max: f64, n_r: usize, m: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "polar grid [{r_min}, {r_max}] must lie inside (0, 1)"
            )));
        }
        let (r, w) = gauss_legendre_on(n_r, r_min, r_max);
        let wr = r.iter().zip(&w).map(|(r, w)| r * w).collect();
        let circle = Circle::new(m);
        let phase_conj = circle.thetas().iter().map(|&t| Complex64::from_polar(1.0, -t)).collect();
        Ok(PolarGrid { r, wr, m, circle, r_lo: r_min, r_hi: r_max, phase_conj })
    }

    /// Grid covering the union of the supports, with one Gauss-Legendre
    /// panel between consecutive bump endpoints so that no bump has a
    /// non-analytic point inside a panel. About `n_r` nodes in total, split
    /// by panel length, with at least `n_r / 4` per panel.
    pub fn covering(fs: &[&DiskTestFunction], n_r: usize, m: usize) -> Result<Self> {
        let bumps: Vec<&RadialBump> = fs.iter().flat_map(|f| f.terms().iter().map(|(b, _)| b)).collect();
        let mut breaks: Vec<f64> = bumps.iter().flat_map(|b| [b.r_min, b.r_max]).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let panels: Vec<(f64, f64)> = breaks
            .windows(2)
            .map(|w| (w[0], w[1]))
            .filter(|(a, b)| bumps.iter().any(|bp| bp.r_min < *b && bp.r_max > *a))
            .collect();
        let (Some(first), Some(last)) = (panels.first(), panels.last()) else {
            return Err(Error::InvalidParameter("no test functions to cover".into()));
        };
        let (lo, hi) = (first.0, last.1);
        let covered: f64 = panels.iter().map(|(a, b)| b - a).sum();
        let (mut r, mut wr) = (Vec::new(), Vec::new());
        for &(a, b) in &panels {
            let k = ((n_r as f64 * (b - a) / covered).round() as usize).max(n_r / 4).max(1);
            let (x, w) = gauss_legendre_on(k, a, b);
            wr.extend(x.iter().zip(&w).map(|(x, w)| x * w));
            r.extend(x);
        }
        let mut grid = Self::new(lo, hi, 1, m)?;
        grid.r = r;
        grid.wr = wr;
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.r[i], self.circle.theta(j))
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.len());
        for i in 0..self.r.len() {
            for j in 0..self.m {
                v.push(self.point(i, j));
            }
        }
        v
    }

    /// Weight of node `idx` in `int_D g dlambda`.
    pub fn weight(&self, idx: usize) -> f64 {
        self.wr[idx / self.m] * self.circle.dtheta()
    }

    pub fn integrate(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.len());
        let dt = self.circle.dtheta();
        v.chunks(self.m).zip(&self.wr).map(|(row, w)| w * row.iter().sum::<f64>()).sum::<f64>() * dt
    }

    /// `int_D g h dlambda` for two sampled functions.
    pub fn pair(&self, a: &[f64], b: &[f64]) -> f64 {
        let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        self.integrate(&prod)
    }

    /// Coefficients `int_D g (H e_k) dlambda`, `k <= 2n`.
    pub fn project_harmonic(&self, v: &[f64], n: usize) -> BoundaryField {
        let mut p = BoundaryField::zeros(n);
        let dt = self.circle.dtheta();
        for (i, row) in v.chunks(self.m).enumerate() {
            let x = self.circle.spectrum(row);
            let w = self.wr[i] * dt;
            let r = self.r[i];
            p.coeffs[0] += w * x[0].re / SQRT_2PI;
            let mut rm = 1.0;
            for k in 1..=n {
                rm *= r;
                p.coeffs[2 * k - 1] += w * rm * x[k].re / SQRT_PI;
                p.coeffs[2 * k] -= w * rm * x[k].im / SQRT_PI;
            }
        }
        p
    }

    /// Samples of the harmonic extension `Hp`.
    pub fn harmonic_values(&self, p: &BoundaryField) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.r {
            let mut q = p.clone();
            let mut rm = 1.0;
            for k in 1..=p.degree() {
                rm *= r;
                q.coeffs[2 * k - 1] *= rm;
                q.coeffs[2 * k] *= rm;
            }
            out.extend(self.circle.values(&q));
        }
        out
    }
}

/// `H^* f`: the boundary symbol `p(w) = int_D H(z, w) f(z) dlambda(z)`, of degree `n`.
pub fn poisson_adjoint(f: &DiskTestFunction, grid: &PolarGrid, n: usize) -> Result<BoundaryField> {
    let (lo, hi) = f.support();
    if lo <= 0.0 || hi >= 1.0 {
        return Err(Error::InvalidParameter("support must avoid 0 and the circle".into()));
    }
    if lo < grid.r_lo || hi > grid.r_hi {
        return Err(Error::InvalidParameter("polar grid does not cover the support".into()));
    }
    grid.circle.check_degree(n)?;
    let (v, _) = f.sample(grid);
    Ok(grid.project_harmonic(&v, n))
}

/// Largest residual of each operator identity for a pair of fields,
/// evaluated on a grid of `4n + 4` points with the grid operators computed
/// by FFT and the field operators by the coefficient rules.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpectralIdentities {
    /// FFT conjugation of the values against the values of `p~`.
    pub conjugation: f64,
    /// `d_nH e_k = -lambda_k e_k` for every basis element, and the FFT map on `p`.
    pub eigenrelation: f64,
    /// `d_nH p = -d_t p~`.
    pub normal_tangential: f64,
    /// `p~~ = -(p - mean p)`.
    pub double_conjugate: f64,
    /// `int p~ q = -int p q~`.
    pub antisymmetry: f64,
}

impl SpectralIdentities {
    pub fn max(&self) -> f64 {
        [self.conjugation, self.eigenrelation, self.normal_tangential, self.double_conjugate, self.antisymmetry]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn spectral_identities(p: &BoundaryField, q: &BoundaryField) -> SpectralIdentities {
    let n = p.degree().max(q.degree()).max(1);
    let circle = Circle::new(4 * n + 4);
    let pv = circle.values(p);
    let pt = p.conjugate();
    let conjugation = sup_distance(&circle.conjugate_values(&pv), &circle.values(&pt));

    let mut eigenrelation = sup_distance(&circle.dtn_values(&pv), &circle.values(&p.dirichlet_to_neumann()));
    for k in 0..=2 * n {
        let e = BoundaryField::basis(n, k);
        let r = (&e.dirichlet_to_neumann() + &e.scaled(lambda(k))).max_abs_coeff();
        eigenrelation = eigenrelation.max(r);
    }

    let normal_tangential = sup_distance(
        &circle.values(&p.dirichlet_to_neumann()),
        &circle.values(&pt.tangential_derivative().scaled(-1.0)),
    );
    let centred: Vec<f64> = pv.iter().map(|v| p.mean() - v).collect();
    let double_conjugate = sup_distance(&circle.conjugate_values(&circle.conjugate_values(&pv)), &centred);
    let qv = circle.values(q);
    let pair = |a: &[f64], b: &[f64]| circle.integrate(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>());
    let antisymmetry = (pair(&circle.values(&pt), &qv) + pair(&pv, &circle.values(&q.conjugate()))).abs();
    SpectralIdentities { conjugation, eigenrelation, normal_tangential, double_conjugate, antisymmetry }
}
