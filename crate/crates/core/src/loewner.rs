//! Radial Loewner-Kufarev evolution, a Theodorsen mapper for nearly circular
//! star domains, and the first-order boundary-variation checks built on it.
//!
//! The flow is `d/dt g = -g int (g + w)/(g - w) nu_t(dw)` with `nu_t`
//! piecewise constant in time. Each [`CircleMeasure`] acts as its atomic
//! measure on the grid points.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gmc::CircleMeasure;
use crate::spectral::{BoundaryField, Circle, SQRT_2PI, SQRT_PI};

/// `|g|` at which a trajectory is considered to have reached the hull.
pub const LIFETIME_RADIUS: f64 = 1.0 - 1e-6;

/// Piecewise-constant family of driving measures on `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct DrivingPath {
    times: Vec<f64>,
    measures: Vec<CircleMeasure>,
    horizon: f64,
}

impl DrivingPath {
    /// `measures[k]` is active on `[times[k], times[k+1])`, the last one up to `horizon`.
    pub fn new(times: Vec<f64>, measures: Vec<CircleMeasure>, horizon: f64) -> Result<Self> {
        if times.is_empty() || times.len() != measures.len() {
            return Err(Error::InvalidParameter("need one start time per measure".into()));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) || horizon <= *times.last().unwrap() {
            return Err(Error::InvalidParameter("times must start at 0 and increase strictly below the horizon".into()));
        }
        Ok(DrivingPath { times, measures, horizon })
    }

    /// One measure held on `[0, horizon]`.
    pub fn constant(mu: CircleMeasure, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![mu], horizon)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Measure active at time `t`.
    pub fn at(&self, t: f64) -> &CircleMeasure {
        let k = self.times.partition_point(|s| *s <= t).max(1) - 1;
        &self.measures[k]
    }

    fn segment(&self, k: usize) -> (f64, f64) {
        let end = self.times.get(k + 1).copied().unwrap_or(self.horizon);
        (self.times[k], end)
    }

    /// `int_0^T |nu_s| ds`.
    pub fn total_mass_integral(&self) -> f64 {
        (0..self.len()).map(|k| {
            let (a, b) = self.segment(k);
            self.measures[k].total_mass() * (b - a)
        })
        .sum()
    }

    /// Multiplies every measure by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        DrivingPath {
            times: self.times.clone(),
            measures: self.measures.iter().map(|m| m.scaled(c)).collect(),
            horizon: self.horizon,
        }
    }
}

/// Atoms `(w_j, mass_j)` of a grid measure.
#[derive(Debug, Clone)]
struct Atoms(Vec<(Complex64, f64)>);

impl Atoms {
    fn of(mu: &CircleMeasure) -> Self {
        let circle = Circle::new(mu.m());
        Atoms(
            circle
                .points()
                .into_iter()
                .enumerate()
                .map(|(j, w)| (w, mu.cell_mass(j)))
                .filter(|(_, m)| *m != 0.0)
                .collect(),
        )
    }

    /// `Phi(g) = int (g + w)/(g - w) nu(dw)` and its derivative in `g`.
    fn herglotz(&self, g: Complex64) -> (Complex64, Complex64) {
        let mut phi = Complex64::new(0.0, 0.0);
        let mut dphi = Complex64::new(0.0, 0.0);
        for &(w, m) in &self.0 {
            let inv = (g - w).inv();
            phi += (g + w) * inv * m;
            dphi += -2.0 * w * inv * inv * m;
        }
        (phi, dphi)
    }

    /// Time derivative of `(g, log g')`.
    fn rhs(&self, y: [Complex64; 2]) -> [Complex64; 2] {
        let (phi, dphi) = self.herglotz(y[0]);
        [-y[0] * phi, -phi - y[0] * dphi]
    }
}

fn rk4(atoms: &Atoms, y: [Complex64; 2], h: f64) -> [Complex64; 2] {
    let add = |a: [Complex64; 2], b: [Complex64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let k1 = atoms.rhs(y);
    let k2 = atoms.rhs(add(y, k1, 0.5 * h));
    let k3 = atoms.rhs(add(y, k2, 0.5 * h));
    let k4 = atoms.rhs(add(y, k3, h));
    [
        y[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
        y[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
    ]
}

/// One classical RK4 step of the flow from `z` with a fixed measure.
pub fn rk4_step(mu: &CircleMeasure, z: Complex64, h: f64) -> Complex64 {
    rk4(&Atoms::of(mu), [z, Complex64::new(0.0, 0.0)], h)[0]
}

/// Integrated trajectory of a single point.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Accepted `(t, g_t(z0))` pairs, starting with `(0, z0)`.
    pub points: Vec<(f64, Complex64)>,
    /// `log g_t'(z0)` at the final time.
    pub log_derivative: Complex64,
    /// Bracket for the time at which `|g_t(z0)|` reaches [`LIFETIME_RADIUS`],
    /// or `None` if the point survives to the horizon.
    pub lifetime: Option<(f64, f64)>,
}

impl Trajectory {
    pub fn end(&self) -> (f64, Complex64) {
        *self.points.last().unwrap()
    }
}

/// Step-doubling RK4 tolerance per unit step.
const FLOW_TOL: f64 = 1e-13;
const MIN_STEP: f64 = 1e-13;

/// Integrates the flow from `z0` up to the horizon or the lifetime.
pub fn flow(driving: &DrivingPath, z0: Complex64) -> Result<Trajectory> {
    if z0.norm() >= 1.0 {
        return Err(Error::OutsideDisk(z0.into()));
    }
    let mut y = [z0, Complex64::new(0.0, 0.0)];
    let mut points = vec![(0.0, z0)];
    let mut h: f64 = 1e-3;
    for k in 0..driving.len() {
        let atoms = Atoms::of(&driving.measures[k]);
        let (mut t, end) = driving.segment(k);
        while t < end {
            let step = h.min(end - t);
            let full = rk4(&atoms, y, step);
            let half = rk4(&atoms, rk4(&atoms, y, 0.5 * step), 0.5 * step);
            let err = ((full[0] - half[0]).norm() + (full[1] - half[1]).norm()) / 15.0;
            let scale = FLOW_TOL * (1.0 + half[0].norm() + half[1].norm());
            let finite = half[0].is_finite() && half[1].is_finite();
            if finite && err <= scale && half[0].norm() < LIFETIME_RADIUS {
                y = half;
                t += step;
                points.push((t, y[0]));
                let grow = if err == 0.0 { 4.0 } else { (0.9 * (scale / err).powf(0.2)).clamp(0.2, 4.0) };
                h = step * grow;
                continue;
            }
            if finite && err <= scale {
                // the step crosses the lifetime radius: bisect on the step length
                let two_halves = |s: f64| rk4(&atoms, rk4(&atoms, y, 0.5 * s), 0.5 * s);
                let (mut lo, mut hi) = (0.0, step);
                while hi - lo > MIN_STEP * t.max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    if two_halves(mid)[0].norm() < LIFETIME_RADIUS {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if lo > 0.0 {
                    y = two_halves(lo);
                    points.push((t + lo, y[0]));
                }
                return Ok(Trajectory { points, log_derivative: y[1], lifetime: Some((t + lo, t + hi)) });
            }
            if step <= MIN_STEP {
                return Err(Error::NonConvergence { what: "Loewner flow step size", residual: err });
            }
            h = if finite && err > 0.0 {
                step * (0.9 * (scale / err).powf(0.2)).clamp(0.1, 0.5)
            } else {
                0.1 * step
            };
        }
    }
    Ok(Trajectory { points, log_derivative: y[1], lifetime: None })
}

/// `g_T'(0)` two ways.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConformalRadius {
    /// From the integrated log-derivative at the origin.
    pub ode: f64,
    /// `exp(int_0^T |nu_s| ds)`.
    pub mass: f64,
    /// Largest `|d/dt log g_t'(0) - |nu_t||` over the segments.
    pub max_rate_error: f64,
}

pub fn conformal_radius(driving: &DrivingPath) -> Result<ConformalRadius> {
    let tr = flow(driving, Complex64::new(0.0, 0.0))?;
    let mut max_rate_error = 0.0f64;
    for mu in &driving.measures {
        let rate = Atoms::of(mu).rhs([Complex64::new(0.0, 0.0); 2])[1];
        max_rate_error = max_rate_error.max((rate - mu.total_mass()).norm());
    }
    Ok(ConformalRadius { ode: tr.log_derivative.re.exp(), mass: driving.total_mass_integral().exp(), max_rate_error })
}

/// Star domain `{ r e^{it} : r < R(t) }` given by `log R` as a trigonometric polynomial.
#[derive(Debug, Clone)]
pub struct StarDomain {
    log_radius: BoundaryField,
}

impl StarDomain {
    /// Samples `radius` on `m` points and interpolates `log R`.
    pub fn from_radius<F: Fn(f64) -> f64>(radius: F, m: usize) -> Result<Self> {
        let circle = Circle::new(m);
        let mut v = Vec::with_capacity(m);
        for t in circle.thetas() {
            let r = radius(t);
            if !((1.0 - r).abs() <= 0.2) {
                return Err(Error::InvalidParameter(format!("radius {r} at angle {t} is too far from 1 for the mapper")));
            }
            v.push(r.ln());
        }
        Ok(StarDomain { log_radius: circle.to_coeffs(&v, m / 2 - 1)? })
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.log_radius.eval(theta).exp()
    }

    pub fn resolution(&self) -> usize {
        2 * self.log_radius.degree() + 2
    }
}

/// Conformal map `f(z) = z exp(A(z))` from the disk onto a star domain,
/// `A(z) = sum_n c_n z^n` with `c_0` real. Its inverse `g` is the
/// normalized map of the domain onto the disk.
#[derive(Debug, Clone)]
pub struct ConformalMap {
    c: Vec<Complex64>,
    re_a: BoundaryField,
    /// Sup-norm of the last Theodorsen update.
    pub residual: f64,
    pub iterations: usize,
}

const THEODORSEN_TOL: f64 = 1e-15;
const THEODORSEN_MAX_ITER: usize = 500;

/// Theodorsen iteration `beta <- conj(log R(s + beta))`.
pub fn nearly_circular_map(domain: &StarDomain) -> Result<ConformalMap> {
    let m = domain.resolution();
    let circle = Circle::new(m);
    let s = circle.thetas();
    let n = m / 2 - 1;
    let mut beta = vec![0.0; m];
    let mut residual = f64::INFINITY;
    for it in 1..=THEODORSEN_MAX_ITER {
        let u: Vec<f64> = s.iter().zip(&beta).map(|(s, b)| domain.log_radius.eval(s + b)).collect();
        let next = circle.conjugate_values(&u);
        residual = next.iter().zip(&beta).fold(0.0f64, |r, (a, b)| r.max((a - b).abs()));
        beta = next;
        if residual < THEODORSEN_TOL {
            let u: Vec<f64> = s.iter().zip(&beta).map(|(s, b)| domain.log_radius.eval(s + b)).collect();
            return Ok(ConformalMap::from_boundary_log(circle.to_coeffs(&u, n)?, residual, it));
        }
    }
    Err(Error::NonConvergence { what: "Theodorsen iteration", residual })
}

impl ConformalMap {
    fn from_boundary_log(re_a: BoundaryField, residual: f64, iterations: usize) -> Self {
        let a = re_a.coeffs();
        let mut c = vec![Complex64::new(a[0] / SQRT_2PI, 0.0)];
        for k in 1..=re_a.degree() {
            c.push(Complex64::new(a[2 * k - 1], -a[2 * k]) / SQRT_PI);
        }
        ConformalMap { c, re_a, residual, iterations }
    }

    /// `Re A` on the unit circle as a function of the disk angle.
    pub fn boundary_log_modulus(&self) -> &BoundaryField {
        &self.re_a
    }

    fn a_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut a = Complex64::new(0.0, 0.0);
        let mut da = Complex64::new(0.0, 0.0);
        for c in self.c.iter().rev() {
            da = da * z + a;
            a = a * z + c;
        }
        (a, da)
    }

    /// `f(z)`, the map from the disk onto the domain.
    pub fn forward(&self, z: Complex64) -> Complex64 {
        z * self.a_and_derivative(z).0.exp()
    }

    /// `g(z) = f^{-1}(z)` by Newton iteration.
    pub fn inverse(&self, z: Complex64) -> Result<Complex64> {
        let mut x = z * (-self.c[0].re).exp();
        for _ in 0..100 {
            let (a, da) = self.a_and_derivative(x);
            let e = a.exp();
            let f = x * e - z;
            let df = e * (1.0 + x * da);
            let dx = f / df;
            x -= dx;
            if dx.norm() <= 1e-16 * (1.0 + x.norm()) {
                if x.norm() >= 1.0 {
                    return Err(Error::OutsideDisk(z.into()));
                }
                return Ok(x);
            }
        }
        Err(Error::NonConvergence { what: "inverse conformal map", residual: (self.forward(x) - z).norm() })
    }

    /// `g'(0) = exp(-c_0)`.
    pub fn inverse_derivative_at_zero(&self) -> f64 {
        (-self.c[0].re).exp()
    }

    /// `sup | |f(e^{is})| - R(arg f(e^{is})) |` over `samples` off-grid angles.
    pub fn boundary_mismatch(&self, domain: &StarDomain, samples: usize) -> f64 {
        let conj = self.re_a.conjugate();
        (0..samples)
            .map(|j| {
                let s = 2.0 * PI * (j as f64 + 0.37) / samples as f64;
                let modulus = self.re_a.eval(s).exp();
                (modulus - domain.radius(s + conj.eval(s))).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `G(z1, z2) = (1/2 pi) log |(g1 - g2)/(1 - g1 conj(g2))|`.
    pub fn green(&self, z1: Complex64, z2: Complex64) -> Result<f64> {
        let g1 = self.inverse(z1)?;
        let g2 = self.inverse(z2)?;
        let num = (g1 - g2).norm();
        if num == 0.0 {
            return Err(Error::Singular);
        }
        Ok((num / (1.0 - g1 * g2.conj()).norm()).ln() / (2.0 * PI))
    }
}

/// Poisson kernel normalized to unit mean: `(1 - |z|^2)/|w - z|^2`.
pub fn poisson(z: Complex64, w: Complex64) -> f64 {
    (1.0 - z.norm_sqr()) / (w - z).norm_sqr()
}

/// `(1/4 pi^2) int H(z1, w) H(z2, w) s(w) dlambda(w)`, the first variation
/// of the Green function when the circle moves inward at speed `s`.
pub fn hadamard_formula(speed: &BoundaryField, z1: Complex64, z2: Complex64) -> f64 {
    let circle = Circle::new(4096);
    let sv = circle.values(speed);
    let v: Vec<f64> = circle.points().iter().zip(&sv).map(|(w, s)| poisson(z1, *w) * poisson(z2, *w) * s).collect();
    circle.integrate(&v) / (4.0 * PI * PI)
}

/// One row of the Hadamard sweep.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct HadamardRow {
    pub dt: f64,
    pub finite_difference: f64,
    pub formula: f64,
    pub relative_error: f64,
}

/// Hadamard sweep result; `rate` is the observed convergence order between
/// the last two step sizes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HadamardCheck {
    pub rows: Vec<HadamardRow>,
    pub rate: f64,
}

/// Green-function resolution used by the boundary-variation checks.
pub const MAPPER_RESOLUTION: usize = 512;

pub fn hadamard_check(speed: &BoundaryField, z1: Complex64, z2: Complex64, steps: &[f64]) -> Result<HadamardCheck> {
    if z1 == z2 || z1.norm() >= 1.0 || z2.norm() >= 1.0 {
        return Err(Error::InvalidParameter("need distinct points inside the disk".into()));
    }
    let formula = hadamard_formula(speed, z1, z2);
    let base = crate::fields::green(z1, z2)?;
    let mut rows = Vec::new();
    for &dt in steps {
        let domain = StarDomain::from_radius(|t| 1.0 - dt * speed.eval(t), MAPPER_RESOLUTION)?;
        let map = nearly_circular_map(&domain)?;
        let fd = (map.green(z1, z2)? - base) / dt;
        let relative_error = if formula == 0.0 { fd.abs() } else { ((fd - formula) / formula).abs() };
        rows.push(HadamardRow { dt, finite_difference: fd, formula, relative_error });
    }
    let rate = match rows.as_slice() {
        [.., a, b] if b.relative_error > 0.0 => (a.relative_error / b.relative_error).ln() / (a.dt / b.dt).ln(),
        _ => f64::NAN,
    };
    Ok(HadamardCheck { rows, rate })
}

/// Driving density fitted from one small step of boundary motion.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SmoothMetricFit {
    pub dt: f64,
    /// Fitted density against arclength on the grid.
    pub fitted: Vec<f64>,
    /// `exp(-xi phi)/(2 pi)` on the grid.
    pub target: Vec<f64>,
    /// `sup |fitted - target| / sup |target|`.
    pub relative_error: f64,
}

/// Moves the circle inward by `dt exp(-xi phi)` and reads off the driving
/// density from `g = f^{-1} ~ z (1 - A(z))`: over a step `dt`, the Loewner
/// equation gives `Re A = -2 pi dt rho` on the circle.
pub fn smooth_metric_driving(phi: &BoundaryField, xi: f64, dt: f64, m: usize) -> Result<SmoothMetricFit> {
    let speed = |t: f64| (-xi * phi.eval(t)).exp();
    let domain = StarDomain::from_radius(|t| 1.0 - dt * speed(t), MAPPER_RESOLUTION)?;
    let map = nearly_circular_map(&domain)?;
    let circle = Circle::new(m);
    let fitted: Vec<f64> = circle.thetas().iter().map(|&s| -map.re_a.eval(s) / (2.0 * PI * dt)).collect();
    let target: Vec<f64> = circle.thetas().iter().map(|&s| speed(s) / (2.0 * PI)).collect();
    let num = fitted.iter().zip(&target).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let den = target.iter().fold(0.0f64, |a, y| a.max(y.abs()));
    Ok(SmoothMetricFit { dt, fitted, target, relative_error: num / den })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn uniform_measure_scales_exactly() {
        let path = DrivingPath::constant(CircleMeasure::uniform(256, 1.0), 1.0).unwrap();
        let z0 = c(0.2, -0.15);
        let tr = flow(&path, z0).unwrap();
        assert!(tr.lifetime.is_none());
        for &(t, g) in &tr.points {
            assert!((g - z0 * t.exp()).norm() < 1e-8, "{t} {g}");
        }
        let (t, _) = tr.end();
        assert_eq!(t, 1.0);
        assert!((tr.log_derivative - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn zero_measure_is_identity() {
        let path = DrivingPath::constant(CircleMeasure::zero(64), 2.0).unwrap();
        let tr = flow(&path, c(0.5, 0.3)).unwrap();
        assert_eq!(tr.end().1, c(0.5, 0.3));
        let cr = conformal_radius(&path).unwrap();
        assert_eq!(cr.ode, 1.0);
        assert_eq!(cr.mass, 1.0);
    }

    #[test]
    fn uniform_grid_lifetime_matches_radial_ode() {
        // on the ray through an atom (sign +1) or midway between atoms (sign -1),
        // d rho/dt = rho (1 +- rho^M)/(1 -+ rho^M)
        let m = 256;
        let path = DrivingPath::constant(CircleMeasure::uniform(m, 1.0), 3.0).unwrap();
        for (angle, sign) in [(0.0, 1.0), (PI / m as f64, -1.0)] {
            let (lo, hi) = flow(&path, Complex64::from_polar(0.5, angle)).unwrap().lifetime.unwrap();
            assert!(hi - lo < 1e-10);
            // integrate in u = -log(1 - rho)
            let rate = |u: f64| {
                let d = (-u).exp();
                let r = 1.0 - d;
                let p = sign * r.powi(m as i32);
                d * (1.0 - p) / (r * (1.0 + p))
            };
            let exact = crate::quad::adaptive_simpson(rate, 2f64.ln(), 1e6f64.ln(), 1e-12);
            // the exit time is ill-conditioned: d(1 - rho)/dt is about M (1 - rho)/2 there
            assert!((lo - exact).abs() < 1e-6, "{lo} {exact}");
            assert!((lo - 2f64.ln()).abs() < 0.07);
        }
    }

    #[test]
    fn lifetimes_monotone_in_density() {
        let base = CircleMeasure::uniform(128, 1.0);
        let more = base.combine(1.0, &CircleMeasure::narrow_bump(128, 0.3, 0.5), 1.0);
        let z0 = Complex64::from_polar(0.6, 0.3);
        let t1 = flow(&DrivingPath::constant(base, 5.0).unwrap(), z0).unwrap().lifetime.unwrap().0;
        let t2 = flow(&DrivingPath::constant(more, 5.0).unwrap(), z0).unwrap().lifetime.unwrap().0;
        assert!(t2 <= t1, "{t2} {t1}");
    }

    #[test]
    fn conformal_radius_two_ways() {
        let path = DrivingPath::constant(CircleMeasure::uniform(256, 1.0), 1.0).unwrap();
        let cr = conformal_radius(&path).unwrap();
        assert!((cr.ode - std::f64::consts::E).abs() < 1e-8);
        assert!((cr.mass - std::f64::consts::E).abs() < 1e-12);
        let two = DrivingPath::new(
            vec![0.0, 0.5],
            vec![CircleMeasure::uniform(256, 2.0), CircleMeasure::zero(256)],
            1.0,
        )
        .unwrap();
        let cr = conformal_radius(&two).unwrap();
        assert!((cr.ode - std::f64::consts::E).abs() < 1e-8);
        assert!(cr.max_rate_error < 1e-8);
        let bumpy = CircleMeasure::narrow_bump(256, 2.0, 0.7);
        let cr = conformal_radius(&DrivingPath::constant(bumpy, 1.3).unwrap()).unwrap();
        assert!((cr.ode - cr.mass).abs() < 1e-8 * cr.mass);
    }

    #[test]
    fn single_step_matches_dirac_euler() {
        let mu = CircleMeasure::narrow_bump(256, 0.0, 1.0);
        let z = c(0.3, 0.2);
        let dirac = |t: f64| z - t * z * (z + 1.0) / (z - 1.0);
        let atoms = Atoms::of(&mu);
        let euler = |t: f64| z + atoms.rhs([z, c(0.0, 0.0)])[0] * t;
        let e1 = (rk4_step(&mu, z, 1e-2) - euler(1e-2)).norm();
        let e2 = (rk4_step(&mu, z, 5e-3) - euler(5e-3)).norm();
        let ratio = e1 / e2;
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
        assert!((euler(1e-2) - dirac(1e-2)).norm() / 1e-2 < 1e-2);
    }

    #[test]
    fn mapper_trivial_domains() {
        let map = nearly_circular_map(&StarDomain::from_radius(|_| 1.0, 128).unwrap()).unwrap();
        let z = c(0.3, 0.4);
        assert!((map.inverse(z).unwrap() - z).norm() < 1e-15);
        let d: f64 = 0.1;
        let map = nearly_circular_map(&StarDomain::from_radius(|_| (-d).exp(), 128).unwrap()).unwrap();
        assert!((map.inverse(z).unwrap() - z * d.exp()).norm() < 1e-14);
        assert!((map.inverse_derivative_at_zero() - d.exp()).abs() < 1e-14);
        assert!(StarDomain::from_radius(|_| 0.7, 64).is_err());
    }

    #[test]
    fn mapper_capacity_resolution_independent() {
        let d = 0.05;
        let r = |t: f64| 1.0 - d * (1.0 + t.cos()) / 2.0;
        let dom = StarDomain::from_radius(r, 256).unwrap();
        let a = nearly_circular_map(&dom).unwrap();
        let b = nearly_circular_map(&StarDomain::from_radius(r, 512).unwrap()).unwrap();
        assert!((a.inverse_derivative_at_zero() - b.inverse_derivative_at_zero()).abs() < 1e-6);
        assert!(a.boundary_mismatch(&dom, 97) < 1e-8);
        let z = c(-0.2, 0.5);
        assert!((a.forward(a.inverse(z).unwrap()) - z).norm() < 1e-14);
    }

    #[test]
    fn hadamard_first_variation() {
        let one = BoundaryField::constant(4, 1.0);
        let z1 = c(0.3, 0.1);
        let z2 = c(-0.2, 0.35);
        let h = hadamard_check(&one, z1, z2, &[4e-3, 2e-3, 1e-3]).unwrap();
        assert!(h.rows[2].relative_error < 0.01, "{h:?}");
        assert!((h.rate - 1.0).abs() < 0.2, "{h:?}");
        let h0 = hadamard_check(&one, z1, c(0.0, 0.0), &[1e-3]).unwrap();
        assert!((h0.rows[0].formula - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!(h0.rows[0].relative_error < 0.01);
        let s = &one + &BoundaryField::cos_mode(4, 1, 0.5);
        let h = hadamard_check(&s, z1, z2, &[2e-3, 1e-3]).unwrap();
        assert!(h.rows[1].relative_error < 0.01, "{h:?}");
        let h = hadamard_check(&BoundaryField::zeros(4), z1, z2, &[1e-3]).unwrap();
        assert!(h.rows[0].finite_difference.abs() < 1e-10);
    }

    #[test]
    fn smooth_metric_driving_fit() {
        let xi = 1.0 / 6f64.sqrt();
        let flat = smooth_metric_driving(&BoundaryField::zeros(2), xi, 1e-3, 64).unwrap();
        assert!(flat.relative_error < 1e-4 * 2.0 * PI, "{}", flat.relative_error);
        let phi = BoundaryField::cos_mode(2, 1, 0.1);
        let a = smooth_metric_driving(&phi, xi, 2e-3, 64).unwrap();
        let b = smooth_metric_driving(&phi, xi, 1e-3, 64).unwrap();
        assert!(b.relative_error < 0.01);
        assert!(b.relative_error < 0.6 * a.relative_error, "{} {}", a.relative_error, b.relative_error);
        let shift = smooth_metric_driving(&BoundaryField::constant(2, 0.4), xi, 1e-3, 64).unwrap();
        let mass: f64 = shift.fitted.iter().sum::<f64>() * 2.0 * PI / 64.0;
        assert!((mass - (-xi * 0.4f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn time_rescaling_scales_fitted_measure() {
        // the same domain reached in half the time needs twice the measure
        let xi: f64 = 0.4;
        let phi = BoundaryField::sin_mode(2, 2, 0.2);
        let slow = smooth_metric_driving(&phi, xi, 1e-3, 32).unwrap();
        let dom = StarDomain::from_radius(|t| 1.0 - 1e-3 * (-xi * phi.eval(t)).exp(), MAPPER_RESOLUTION).unwrap();
        let map = nearly_circular_map(&dom).unwrap();
        let circle = Circle::new(32);
        for (j, s) in circle.thetas().into_iter().enumerate() {
            let fast = -map.boundary_log_modulus().eval(s) / (2.0 * PI * 0.5e-3);
            assert!((fast - 2.0 * slow.fitted[j]).abs() < 1e-12);
        }
    }
}
