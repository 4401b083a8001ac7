//! Gaussian multiplicative chaos on the circle at fixed truncation.
//!
//! A [`CircleMeasure`] is a nonnegative density on the `M`-point grid,
//! integrated by the trapezoid rule. Equivalently it is the atomic measure
//! with mass `density_j * dtheta` at `exp(i theta_j)`; every identity in the
//! crate is applied to that atomic measure.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{sample_trace, trace_variance};
use crate::mc::{map_samples, Estimate};
use crate::quad::adaptive_simpson;
use crate::spectral::{BoundaryField, Circle};

/// Density on the equispaced grid of the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMeasure {
    density: Vec<f64>,
}

impl CircleMeasure {
    pub fn from_density(density: Vec<f64>) -> Result<Self> {
        if let Some(j) = density.iter().position(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter(format!("density at index {j} is not a finite nonnegative number")));
        }
        Ok(CircleMeasure { density })
    }

    /// Uniform measure of the given total mass.
    pub fn uniform(m: usize, mass: f64) -> Self {
        CircleMeasure { density: vec![mass / (2.0 * PI); m] }
    }

    pub fn zero(m: usize) -> Self {
        CircleMeasure { density: vec![0.0; m] }
    }

    /// Narrow bump of total mass `mass` centred at `theta0`, two cells wide
    /// on each side; stands in for a Dirac mass.
    pub fn narrow_bump(m: usize, theta0: f64, mass: f64) -> Self {
        let dt = 2.0 * PI / m as f64;
        let width = 2.0 * dt;
        let mut d: Vec<f64> = (0..m)
            .map(|j| {
                let mut x = (j as f64 * dt - theta0).rem_euclid(2.0 * PI);
                if x > PI {
                    x -= 2.0 * PI;
                }
                crate::bump::unit(x / width)[0]
            })
            .collect();
        let s: f64 = d.iter().sum::<f64>() * dt;
        d.iter_mut().for_each(|v| *v *= mass / s);
        CircleMeasure { density: d }
    }

    pub fn m(&self) -> usize {
        self.density.len()
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.m() as f64
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.dtheta()
    }

    /// Mass of cell `j`.
    pub fn cell_mass(&self, j: usize) -> f64 {
        self.density[j] * self.dtheta()
    }

    /// `int q dmu` for grid values `q`.
    pub fn integrate(&self, q: &[f64]) -> f64 {
        assert_eq!(q.len(), self.m());
        self.density.iter().zip(q).map(|(d, q)| d * q).sum::<f64>() * self.dtheta()
    }

    /// Rotation by `shift` grid cells.
    pub fn rotated(&self, shift: usize) -> Self {
        let m = self.m();
        CircleMeasure { density: (0..m).map(|j| self.density[(j + m - shift % m) % m]).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        CircleMeasure { density: self.density.iter().map(|d| d * c).collect() }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        CircleMeasure { density: self.density.iter().zip(&other.density).map(|(x, y)| a * x + b * y).collect() }
    }

    /// Masses of the arcs `(theta_j - eps, theta_j + eps)`, with cell
    /// `k` spread uniformly over `[theta_k - dtheta/2, theta_k + dtheta/2]`.
    pub fn ball_masses(&self, eps: f64) -> Vec<f64> {
        let m = self.m();
        let dt = self.dtheta();
        let reach = (eps / dt).ceil() as i64 + 1;
        (0..m as i64)
            .map(|j| {
                let mut s = 0.0;
                for off in -reach..=reach {
                    let c = off as f64 * dt;
                    let lo = (c - 0.5 * dt).max(-eps);
                    let hi = (c + 0.5 * dt).min(eps);
                    if hi > lo {
                        let k = (j + off).rem_euclid(m as i64) as usize;
                        s += self.density[k] * (hi - lo);
                    }
                }
                s
            })
            .collect()
    }
}

/// Sign of the exponent in the chaos measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChaosSign {
    Plus,
    Minus,
}

impl ChaosSign {
    fn value(self) -> f64 {
        match self {
            ChaosSign::Plus => 1.0,
            ChaosSign::Minus => -1.0,
        }
    }
}

/// Density `exp(+-xi h - xi^2 Var(h0)/2)` on the grid, with the exact
/// variance of the degree-`N` trace. The mean of `h` enters unrenormalized.
pub fn chaos_measure(h: &BoundaryField, sign: ChaosSign, xi: f64, circle: &Circle) -> Result<CircleMeasure> {
    if !(xi > 0.0 && xi < 1.0) && xi != 0.0 {
        return Err(Error::InvalidParameter(format!("xi = {xi} outside (0, 1)")));
    }
    let var = trace_variance(h.degree());
    let s = sign.value();
    let v = circle.values(h);
    Ok(CircleMeasure { density: v.iter().map(|x| (s * xi * x - 0.5 * xi * xi * var).exp()).collect() })
}

/// `E|mu|^2` for the grid measure at truncation `n`:
/// `2 pi dtheta sum_j exp(xi^2 C_N(theta_j))`.
pub fn second_moment_target(xi: f64, n: usize, m: usize) -> f64 {
    let dt = 2.0 * PI / m as f64;
    let s: f64 = (0..m).map(|j| (xi * xi * crate::fields::trace_covariance(n, j as f64 * dt, 0.0)).exp()).sum();
    2.0 * PI * dt * s
}

/// Untruncated limit `2 pi int_0^{2 pi} (2 sin(u/2))^{-2 xi^2} du`.
pub fn second_moment_limit(xi: f64) -> f64 {
    // u = pi s^3 on each half removes the endpoint singularity
    let a = 2.0 * xi * xi;
    let f = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let u = PI * s * s * s;
        (2.0 * (0.5 * u).sin()).powf(-a) * 3.0 * PI * s * s
    };
    2.0 * PI * 2.0 * adaptive_simpson(f, 0.0, 1.0, 1e-13)
}

/// Moments of `|mu_xi|` over sampled traces.
pub fn mass_moments(xi: f64, n: usize, m: usize, n_samples: usize, seed: u64) -> (Estimate, Estimate) {
    let circle = Circle::new(m);
    let rows = map_samples(seed, "gmc-mass", n_samples, |rng, _| {
        let h = sample_trace(n, rng).h0;
        let mass = chaos_measure(&h, ChaosSign::Plus, xi, &circle).unwrap().total_mass();
        (mass, mass * mass)
    });
    let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    (Estimate::from_samples(&a), Estimate::from_samples(&b))
}

/// Cylindrical functional `F(h) = psi(<h, q_1>, ..., <h, q_k>)`.
pub struct Cylindrical<'a> {
    pub symbols: Vec<BoundaryField>,
    pub profile: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

/// Result of [`weighted_field_check`].
#[derive(Debug, Clone, Copy)]
pub struct WeightedFieldCheck {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub difference: Estimate,
}

/// Compares `E[int f dM_alpha(h) F(h)]` with
/// `int f(w) E[F(h + alpha E[h(.) h(w)])] dlambda(w)` under common samples.
pub fn weighted_field_check(
    f: &BoundaryField,
    func: &Cylindrical<'_>,
    alpha: f64,
    n: usize,
    m: usize,
    n_samples: usize,
    seed: u64,
) -> WeightedFieldCheck {
    let circle = Circle::new(m);
    let fv = circle.values(f);
    let var = trace_variance(n);
    // shift of <h, q> when h moves by alpha E[h(.) h(w)], as a function of w
    let shifts: Vec<Vec<f64>> = func
        .symbols
        .iter()
        .map(|q| {
            let mut c = BoundaryField::zeros(n);
            for k in 1..=2 * n.min(q.degree()) {
                c.coeffs_mut()[k] = 2.0 * PI * q.coeffs()[k] / crate::spectral::lambda(k);
            }
            circle.values(&c)
        })
        .collect();
    let rows = map_samples(seed, "weighted-field", n_samples, |rng, _| {
        let h = sample_trace(n, rng).h0;
        let x: Vec<f64> = func.symbols.iter().map(|q| q.inner(&h)).collect();
        let hv = circle.values(&h);
        let weight: f64 = fv.iter().zip(&hv).map(|(f, h)| f * (alpha * h - 0.5 * alpha * alpha * var).exp()).sum::<f64>()
            * circle.dtheta();
        let lhs = weight * (func.profile)(&x);
        let mut y = x.clone();
        let mut rhs = 0.0;
        for j in 0..m {
            for (i, s) in shifts.iter().enumerate() {
                y[i] = x[i] + alpha * s[j];
            }
            rhs += fv[j] * (func.profile)(&y);
        }
        (lhs, rhs * circle.dtheta())
    });
    let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    WeightedFieldCheck {
        lhs: Estimate::from_samples(&a),
        rhs: Estimate::from_samples(&b),
        difference: crate::mc::paired(&a, &b),
    }
}

/// `D_p int f dM_alpha(h) = alpha int f p dM_alpha(h)`, returned together
/// with a central finite difference of step `step` in the direction `p`.
pub fn chaos_derivative(
    p: &BoundaryField,
    f: &BoundaryField,
    h: &BoundaryField,
    alpha: f64,
    circle: &Circle,
    step: f64,
) -> (f64, f64) {
    let var = trace_variance(h.degree());
    let fv = circle.values(f);
    let pv = circle.values(p);
    let mass = |hh: &BoundaryField, weight: &[f64]| {
        let hv = circle.values(hh);
        hv.iter().zip(weight).map(|(x, w)| w * (alpha * x - 0.5 * alpha * alpha * var).exp()).sum::<f64>()
            * circle.dtheta()
    };
    let fp: Vec<f64> = fv.iter().zip(&pv).map(|(a, b)| a * b).collect();
    let analytic = alpha * mass(h, &fp);
    let plus = mass(&(h + &p.scaled(step)), &fv);
    let minus = mass(&(h - &p.scaled(step)), &fv);
    (analytic, (plus - minus) / (2.0 * step))
}

/// Field recovered from its chaos measure: `xi^{-1} log mu(B_eps(x))` on the
/// grid, minus `centre`, projected to degree `n`.
pub fn inverse_map(mu: &CircleMeasure, eps: f64, xi: f64, n: usize, centre: f64) -> Result<BoundaryField> {
    let balls = mu.ball_masses(eps);
    if let Some(j) = balls.iter().position(|b| *b <= 0.0) {
        return Err(Error::ZeroBallMass(j));
    }
    let v: Vec<f64> = balls.iter().map(|b| b.ln() / xi - centre).collect();
    Circle::new(mu.m()).to_coeffs(&v, n)
}

/// Arc averages of `h` over `(theta_j - eps, theta_j + eps)`.
pub fn arc_average(h: &BoundaryField, eps: f64, circle: &Circle) -> Vec<f64> {
    // averaging multiplies degree k by sin(k eps) / (k eps)
    let mut a = h.clone();
    for k in 1..=h.degree() {
        let s = (k as f64 * eps).sin() / (k as f64 * eps);
        a.coeffs_mut()[2 * k - 1] *= s;
        a.coeffs_mut()[2 * k] *= s;
    }
    circle.values(&a)
}

/// One row of the inverse-map sweep.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct InverseMapRow {
    pub eps: f64,
    /// `E[(int (h^eps - E h^eps) p - int h p)^2]^{1/2}`.
    pub l2_error: f64,
    /// Pointwise `Var(h^eps(x) - h_eps(x))` divided by `log(1/eps)`.
    pub variance_ratio: f64,
}

/// Inverse-map convergence over an `eps` sweep with `mu = exp(xi h)`.
pub fn inverse_map_sweep(
    p: &BoundaryField,
    xi: f64,
    eps: &[f64],
    n: usize,
    m: usize,
    n_samples: usize,
    seed: u64,
) -> Vec<InverseMapRow> {
    let circle = Circle::new(m);
    let rows = map_samples(seed, "inverse-map", n_samples, |rng, _| {
        let h = sample_trace(n, rng).h0;
        let mu = chaos_measure(&h, ChaosSign::Plus, xi, &circle).unwrap();
        let target = p.inner(&h);
        eps.iter()
            .map(|&e| {
                let he = inverse_map(&mu, e, xi, n, 0.0).unwrap();
                let pairing = p.inner(&he) - p.integral() * he.mean();
                let point = mu.ball_masses(e)[0].ln() / xi - arc_average(&h, e, &circle)[0];
                (pairing - target + p.integral() * h.mean(), point)
            })
            .collect::<Vec<_>>()
    });
    eps.iter()
        .enumerate()
        .map(|(i, &e)| {
            let err: Vec<f64> = rows.iter().map(|r| r[i].0 * r[i].0).collect();
            let pt: Vec<f64> = rows.iter().map(|r| r[i].1).collect();
            let pe = Estimate::from_samples(&pt);
            let var = pe.stderr * pe.stderr * pe.n as f64;
            InverseMapRow {
                eps: e,
                l2_error: Estimate::from_samples(&err).mean.sqrt(),
                variance_ratio: var / (1.0 / e).ln(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn mean_mass_and_second_moment() {
        let xi = 1.0 / 6f64.sqrt();
        let (m1, m2) = mass_moments(xi, 32, 128, 10000, 3);
        assert!(m1.consistent_with(2.0 * PI, 3.0), "{m1:?}");
        let target = second_moment_target(xi, 32, 128);
        assert!(m2.consistent_with(target, 3.0), "{m2:?} {target}");
    }

    #[test]
    fn second_moment_limit_value() {
        let v = second_moment_limit(1.0 / 6f64.sqrt());
        assert!((v - 41.955_819_388).abs() < 1e-6, "{v}");
        let t = second_moment_target(1.0 / 6f64.sqrt(), 64, 256);
        assert!(t < v && (v - t) / v < 0.01);
    }

    #[test]
    fn zero_coupling_gives_lebesgue() {
        let circle = Circle::new(64);
        let h = sample_trace(8, &mut rng(1)).h0;
        let mu = chaos_measure(&h, ChaosSign::Minus, 0.0, &circle).unwrap();
        assert!(mu.density().iter().all(|d| *d == 1.0));
        assert!(chaos_measure(&h, ChaosSign::Minus, 1.5, &circle).is_err());
    }

    #[test]
    fn shift_scales_measure_exactly() {
        let circle = Circle::new(64);
        let xi = 0.4;
        let h = sample_trace(8, &mut rng(2)).h0;
        let shifted = &h + &BoundaryField::constant(8, 0.7);
        let a = chaos_measure(&h, ChaosSign::Minus, xi, &circle).unwrap();
        let b = chaos_measure(&shifted, ChaosSign::Minus, xi, &circle).unwrap();
        for (x, y) in a.density().iter().zip(b.density()) {
            assert!((y - x * (-xi * 0.7f64).exp()).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn trapezoid_mass_and_rotation() {
        let mu = CircleMeasure::narrow_bump(64, 1.0, 2.5);
        assert!((mu.total_mass() - 2.5).abs() < 1e-12);
        let r = mu.rotated(5);
        assert_eq!(r.density()[10], mu.density()[5]);
        assert!((r.total_mass() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn weighted_field_identity() {
        let profile = |x: &[f64]| (0.3 * x[0]).tanh() + 0.5;
        let func = Cylindrical { symbols: vec![BoundaryField::basis(16, 1)], profile: &profile };
        let one = BoundaryField::constant(16, 1.0);
        let r = weighted_field_check(&one, &func, 0.5, 16, 64, 4000, 5);
        assert!(r.difference.consistent_with(0.0, 3.0), "{r:?}");
        let trivial = |_: &[f64]| 1.0;
        let func1 = Cylindrical { symbols: vec![BoundaryField::basis(16, 1)], profile: &trivial };
        let f = &one + &BoundaryField::cos_mode(16, 2, 0.3);
        let r1 = weighted_field_check(&f, &func1, 0.5, 16, 64, 200, 5);
        assert!((r1.rhs.mean - f.integral()).abs() < 1e-12);
        let r0 = weighted_field_check(&f, &func, 0.0, 16, 64, 200, 5);
        assert!((r0.lhs.mean - r0.rhs.mean).abs() < 1e-12);
    }

    #[test]
    fn chaos_derivative_against_finite_difference() {
        let circle = Circle::new(128);
        let h = sample_trace(16, &mut rng(4)).h0;
        let p = &BoundaryField::cos_mode(16, 2, 0.4) + &BoundaryField::sin_mode(16, 5, -0.2);
        let f = &BoundaryField::constant(16, 1.0) + &BoundaryField::cos_mode(16, 1, 0.5);
        let (a, fd) = chaos_derivative(&p, &f, &h, 0.6, &circle, 1e-4);
        assert!(((a - fd) / a).abs() < 1e-6, "{a} {fd}");
        let (z, _) = chaos_derivative(&BoundaryField::zeros(16), &f, &h, 0.6, &circle, 1e-4);
        assert_eq!(z, 0.0);
        let one = BoundaryField::constant(16, 1.0);
        let (a1, _) = chaos_derivative(&one, &one, &h, 0.6, &circle, 1e-4);
        let var = trace_variance(16);
        let mass: f64 = circle.values(&h).iter().map(|x| (0.6 * x - 0.18 * var).exp()).sum::<f64>() * circle.dtheta();
        assert!((a1 - 0.6 * mass).abs() < 1e-12);
    }

    #[test]
    fn inverse_map_of_smooth_and_constant_fields() {
        let circle = Circle::new(256);
        let xi = 0.5;
        let mu = CircleMeasure::uniform(256, 3.0);
        let h = inverse_map(&mu, 0.1, xi, 16, 0.0).unwrap();
        assert!(h.coeffs()[1..].iter().all(|a| a.abs() < 1e-12));
        let smooth = &BoundaryField::cos_mode(8, 1, 0.3) + &BoundaryField::sin_mode(8, 2, 0.2);
        let dens: Vec<f64> = circle.values(&smooth).iter().map(|x| (xi * x).exp()).collect();
        let mu = CircleMeasure::from_density(dens).unwrap();
        let mut errs = vec![];
        for eps in [0.1, 0.05, 0.025] {
            let he = inverse_map(&mu, eps, xi, 8, 0.0).unwrap();
            let c = (2.0 * eps).ln() / xi;
            let d = &(&he - &BoundaryField::constant(8, c)) - &smooth;
            errs.push(circle.values(&d).iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        assert!(errs[2] < 0.01);
    }

    #[test]
    fn inverse_map_sweep_decreases() {
        let p = BoundaryField::basis(32, 1);
        let rows = inverse_map_sweep(&p, 1.0 / 6f64.sqrt(), &[0.2, 0.1, 0.05], 32, 128, 400, 8);
        assert!(rows[1].l2_error < rows[0].l2_error && rows[2].l2_error < rows[1].l2_error, "{rows:?}");
    }
}
