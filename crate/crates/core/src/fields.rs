//! Boundary trace fields, Green's functions, bulk covariances, Gaussian
//! identities and integration against the zero mode.
//!
//! The boundary trace at truncation `N` is
//! `h0 = sqrt(2 pi) sum_{1 <= k <= 2N} e_k X_k / sqrt(lambda_k)`, whose
//! covariance is the degree-`N` partial sum of `-2 log|w - z|`. The full
//! field is `h = h0 + m` with the zero mode `m` carrying Lebesgue weight.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mc::{map_samples, Estimate};
use crate::quad::{adaptive_simpson, gauss_hermite_normal, gauss_legendre_on};
use crate::spectral::{lambda, BoundaryField, DiskTestFunction, PolarGrid, RadialBump};

/// One draw of the mean-zero boundary trace together with a zero mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub h0: BoundaryField,
    pub m: f64,
}

impl TraceSample {
    /// The full field `h0 + m`.
    pub fn field(&self) -> BoundaryField {
        let mut h = self.h0.clone();
        h.coeffs_mut()[0] += self.m * crate::spectral::SQRT_2PI;
        h
    }

    /// `int p h dlambda` for the full field.
    pub fn pairing(&self, p: &BoundaryField) -> f64 {
        p.inner(&self.h0) + self.m * p.integral()
    }
}

/// Draw `h0` at degree `n`; the zero mode is set to 0.
pub fn sample_trace<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TraceSample {
    assert!(n >= 1);
    let mut h0 = BoundaryField::zeros(n);
    let s = (2.0 * PI).sqrt();
    for k in 1..=2 * n {
        let x: f64 = rng.sample(StandardNormal);
        h0.coeffs_mut()[k] = s * x / lambda(k).sqrt();
    }
    TraceSample { h0, m: 0.0 }
}

/// Pointwise variance of the truncated trace, `2 sum_{m <= N} 1/m`.
pub fn trace_variance(n: usize) -> f64 {
    2.0 * (1..=n).map(|m| 1.0 / m as f64).sum::<f64>()
}

/// Truncated covariance `E h0(t1) h0(t2) = 2 sum_{m <= N} cos(m (t1 - t2)) / m`.
pub fn trace_covariance(n: usize, t1: f64, t2: f64) -> f64 {
    let d = t1 - t2;
    2.0 * (1..=n).map(|m| (m as f64 * d).cos() / m as f64).sum::<f64>()
}

/// Boundary kernel `-2 log|w - z|`.
pub fn boundary_covariance(w: Complex64, z: Complex64) -> Result<f64> {
    let d = (w - z).norm();
    if d == 0.0 {
        return Err(Error::Singular);
    }
    Ok(-2.0 * d.ln())
}

fn check_disk(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk(z.into()))
    }
}

/// Dirichlet Green's function `-log|(z1 - z2) / (1 - conj(z1) z2)|`.
pub fn green_dirichlet(z1: Complex64, z2: Complex64) -> Result<f64> {
    check_disk(z1)?;
    if (z1 - z2).norm() == 0.0 {
        return Err(Error::Singular);
    }
    Ok(-((z1 - z2) / (1.0 - z1.conj() * z2)).norm().ln())
}

/// Neumann Green's function `-log|(z1 - z2)(1 - conj(z1) z2)|`.
pub fn green_neumann(z1: Complex64, z2: Complex64) -> Result<f64> {
    check_disk(z1)?;
    if (z1 - z2).norm() == 0.0 {
        return Err(Error::Singular);
    }
    Ok(-((z1 - z2) * (1.0 - z1.conj() * z2)).norm().ln())
}

/// Normalized Green's function `G = -G_D / (2 pi)`.
pub fn green(z1: Complex64, z2: Complex64) -> Result<f64> {
    Ok(-green_dirichlet(z1, z2)? / (2.0 * PI))
}

/// Radial kernel of angular mode `k`: `log max(r, s)` for `k = 0`,
/// `(rs)^k - (min/max)^k` otherwise.
fn mode_kernel(k: usize, r: f64, s: f64) -> f64 {
    if k == 0 {
        r.max(s).ln()
    } else {
        let (lo, hi) = if r < s { (r, s) } else { (s, r) };
        (r * s).powi(k as i32) - (lo / hi).powi(k as i32)
    }
}

/// Gauss-Legendre nodes per radial piece in [`green_potential`].
const POTENTIAL_NODES: usize = 64;

/// `int b(s) s K_k(r, s) ds`, split at the kink `s = r`.
fn mode_potential(b: &RadialBump, k: usize, r: f64, n_r: usize) -> f64 {
    let mut total = 0.0;
    let pieces = [(b.r_min, r.clamp(b.r_min, b.r_max)), (r.clamp(b.r_min, b.r_max), b.r_max)];
    for (lo, hi) in pieces {
        if hi - lo <= 0.0 {
            continue;
        }
        let (x, w) = gauss_legendre_on(n_r, lo, hi);
        total += x.iter().zip(&w).map(|(s, w)| w * b.eval(*s)[0] * s * mode_kernel(k, r, *s)).sum::<f64>();
    }
    total
}

/// Samples of the potential `u = G f` on `grid`, by angular mode reduction
/// with radial quadrature split at the kernel kink.
pub fn green_potential(f: &DiskTestFunction, grid: &PolarGrid) -> Vec<f64> {
    let n_r = POTENTIAL_NODES;
    let mut out = vec![0.0; grid.len()];
    for (b, t) in f.terms() {
        let deg = t.effective_degree();
        for (i, &r) in grid.r.iter().enumerate() {
            let mut q = BoundaryField::zeros(deg);
            q.coeffs_mut()[0] = t.coeffs()[0] * mode_potential(b, 0, r, n_r);
            for k in 1..=deg {
                let u = mode_potential(b, k, r, n_r) / (2.0 * k as f64);
                q.coeffs_mut()[2 * k - 1] = t.coeffs()[2 * k - 1] * u;
                q.coeffs_mut()[2 * k] = t.coeffs()[2 * k] * u;
            }
            let row = grid.circle.values(&q);
            for (j, v) in row.into_iter().enumerate() {
                out[i * grid.m + j] += v;
            }
        }
    }
    out
}

/// `Sigma_ij = -2 pi int f_i G f_j`, integrating `f_i` on its own support
/// grid (`n_r` radial nodes, `m` angles) against the potential `G f_j`.
pub fn bulk_covariance_matrix(fs: &[DiskTestFunction], n_r: usize, m: usize) -> Result<DMatrix<f64>> {
    let n = fs.len();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        let grid = PolarGrid::covering(&[&fs[i]], n_r, m)?;
        let fi = fs[i].sample(&grid).0;
        for j in 0..n {
            s[(i, j)] = -2.0 * PI * grid.pair(&fi, &green_potential(&fs[j], &grid));
        }
    }
    let sym = (&s + &s.transpose()) * 0.5;
    for i in 0..n {
        if sym[(i, i)] < -1e-10 {
            return Err(Error::NotPsd(sym[(i, i)]));
        }
    }
    Ok(sym)
}

/// `int int f1(z) G(z, z') f2(z') dlambda dlambda` by direct tensor quadrature.
/// Only accurate when the supports are disjoint.
pub fn bulk_pairing_direct(f1: &DiskTestFunction, f2: &DiskTestFunction, g1: &PolarGrid, g2: &PolarGrid) -> f64 {
    let (v1, _) = f1.sample(g1);
    let (v2, _) = f2.sample(g2);
    let p1 = g1.points();
    let p2 = g2.points();
    let mut total = 0.0;
    for (a, (za, fa)) in p1.iter().zip(&v1).enumerate() {
        if *fa == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (b, (zb, fb)) in p2.iter().zip(&v2).enumerate() {
            if *fb == 0.0 {
                continue;
            }
            inner += g2.weight(b) * fb * green(*za, *zb).unwrap_or(0.0);
        }
        total += g1.weight(a) * fa * inner;
    }
    total
}

/// Nested one-dimensional oracle for `Sigma` between two radial bumps
/// `amp_i * b_i(r)`: `-(2 pi)^2 int int b1 b2 log max(r, s) r s dr ds`.
pub fn radial_covariance_oracle(b1: &RadialBump, b2: &RadialBump) -> f64 {
    let outer = |r: f64| {
        let v1 = b1.eval(r)[0];
        if v1 == 0.0 {
            return 0.0;
        }
        let inner = |s: f64| b2.eval(s)[0] * s * r.max(s).ln();
        let mid = r.clamp(b2.r_min, b2.r_max);
        let a = adaptive_simpson(inner, b2.r_min, mid, 1e-15);
        let b = adaptive_simpson(inner, mid, b2.r_max, 1e-15);
        v1 * r * (a + b)
    };
    -(2.0 * PI).powi(2) * adaptive_simpson(outer, b1.r_min, b1.r_max, 1e-14)
}

/// Coupling constants of the growth model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CouplingParams {
    pub xi: f64,
    pub gamma: f64,
    pub q: f64,
    pub alpha: f64,
    pub chi: f64,
    pub beta: f64,
    pub c: f64,
    pub omega: f64,
}

impl CouplingParams {
    /// Parameters from `gamma`, the dimension `d_gamma`, and `(alpha, chi, beta, c)`.
    /// `Q = gamma/2 + 2/gamma`, `xi = gamma/d_gamma`, `omega = -2Q - alpha`.
    pub fn new(gamma: f64, d_gamma: f64, alpha: f64, chi: f64, beta: f64, c: f64) -> Result<Self> {
        if !(gamma > 0.0 && d_gamma > 0.0) {
            return Err(Error::InvalidParameter("gamma and d_gamma must be positive".into()));
        }
        let xi = gamma / d_gamma;
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::InvalidParameter(format!("xi = {xi} outside (0, 1)")));
        }
        let q = gamma / 2.0 + 2.0 / gamma;
        Ok(CouplingParams { xi, gamma, q, alpha, chi, beta, c, omega: -2.0 * q - alpha })
    }

    /// `gamma^2 = 8/3`, `d_gamma = 4`, `(alpha, chi, beta, 2 pi c) = (-2Q + gamma, -Q, 0, -xi)`.
    pub fn pure_gravity() -> Self {
        let gamma = (8.0f64 / 3.0).sqrt();
        let xi = gamma / 4.0;
        let q = gamma / 2.0 + 2.0 / gamma;
        Self::new(gamma, 4.0, -2.0 * q + gamma, -q, 0.0, -xi / (2.0 * PI)).expect("valid constants")
    }

    pub fn two_pi_c(&self) -> f64 {
        2.0 * PI * self.c
    }

    /// Coefficients that must vanish for invariance:
    /// `[chi - alpha + 2 pi c, chi + 2 xi + 1/(2 xi), beta, (2 pi c)^2 - xi^2]`.
    pub fn residual_coefficients(&self) -> [f64; 4] {
        let tc = self.two_pi_c();
        [
            self.chi - self.alpha + tc,
            self.chi + 2.0 * self.xi + 0.5 / self.xi,
            self.beta,
            tc * tc - self.xi * self.xi,
        ]
    }

    pub fn satisfies_sufficient_condition(&self, tol: f64) -> bool {
        self.residual_coefficients().iter().all(|r| r.abs() <= tol)
    }
}

/// The five finite-dimensional Gaussian identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GaussianIdentity {
    /// `E[X psi(X)] = Var X E[psi'(X)]`.
    Ibp1,
    /// `E[psi(X) Y] = sum_i E[d_i psi(X)] Cov(X_i, Y)`.
    Ibp2,
    /// `E[W e^{Y - E Y^2/2}] = E[W Y]`.
    Cm1,
    /// `E[W Z e^X e^Y] = (E WZ + (E WX + E WY)(E ZX + E ZY)) e^{E XY}`.
    Cm2,
    /// `E[(W - E W e^X)(Z - E Z e^Y) e^X e^Y] = (E WY E ZX + E WZ) e^{E XY}`.
    Cm3,
}

impl GaussianIdentity {
    pub const ALL: [GaussianIdentity; 5] = [Self::Ibp1, Self::Ibp2, Self::Cm1, Self::Cm2, Self::Cm3];

    /// Dimension of the Gaussian vector the identity acts on.
    pub fn dimension(&self) -> usize {
        match self {
            Self::Ibp1 => 1,
            Self::Ibp2 => 3,
            Self::Cm1 => 2,
            Self::Cm2 | Self::Cm3 => 4,
        }
    }
}

/// Monte Carlo left side against the closed-form right side.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IdentityCheck {
    pub lhs: Estimate,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn z_score(&self) -> f64 {
        self.lhs.z_score(self.rhs)
    }
}

fn psd_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = cov.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-12 * cov.amax().max(1.0) {
        return Err(Error::NotPsd(min));
    }
    let sq = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sq))
}

fn ibp2_psi(x: &[f64]) -> (f64, [f64; 2]) {
    let (t, c, s) = (x[0].tanh(), x[1].cos(), x[1].sin());
    (t * c, [(1.0 - t * t) * c, -t * s])
}

/// Monte Carlo check of a Gaussian identity for the covariance `cov`.
///
/// Coordinates: `Ibp1` uses `X`; `Ibp2` uses `(X_1, X_2, Y)`; `Cm1` uses
/// `(W, Y)`; `Cm2` and `Cm3` use `(W, X, Y, Z)`. `e^X` denotes the
/// normalized exponential `e^{X - E X^2/2}`.
pub fn gaussian_identity_check(
    which: GaussianIdentity,
    cov: &DMatrix<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<IdentityCheck> {
    let d = which.dimension();
    if cov.nrows() != d || cov.ncols() != d {
        return Err(Error::InvalidParameter(format!("{which:?} needs a {d}x{d} covariance")));
    }
    let l = psd_factor(cov)?;
    let label = format!("gaussian-{which:?}");
    let c = |i: usize, j: usize| cov[(i, j)];
    let vals = map_samples(seed, &label, n_samples, |rng, _| {
        let n = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &l * n;
        match which {
            GaussianIdentity::Ibp1 => x[0] * x[0].tanh(),
            GaussianIdentity::Ibp2 => ibp2_psi(&[x[0], x[1]]).0 * x[2],
            GaussianIdentity::Cm1 => x[0] * (x[1] - 0.5 * c(1, 1)).exp(),
            GaussianIdentity::Cm2 => {
                x[0] * x[3] * (x[1] - 0.5 * c(1, 1)).exp() * (x[2] - 0.5 * c(2, 2)).exp()
            }
            GaussianIdentity::Cm3 => {
                (x[0] - c(0, 1)) * (x[3] - c(3, 2)) * (x[1] - 0.5 * c(1, 1)).exp() * (x[2] - 0.5 * c(2, 2)).exp()
            }
        }
    });
    let (gx, gw) = gauss_hermite_normal(32);
    let rhs = match which {
        GaussianIdentity::Ibp1 => {
            let s = c(0, 0).sqrt();
            c(0, 0) * gx.iter().zip(&gw).map(|(t, w)| w * (1.0 - (s * t).tanh().powi(2))).sum::<f64>()
        }
        GaussianIdentity::Ibp2 => {
            let sub = cov.view((0, 0), (2, 2)).into_owned();
            let l2 = psd_factor(&sub)?;
            let mut e = [0.0; 2];
            for (a, wa) in gx.iter().zip(&gw) {
                for (b, wb) in gx.iter().zip(&gw) {
                    let x = &l2 * DVector::from_vec(vec![*a, *b]);
                    let (_, g) = ibp2_psi(&[x[0], x[1]]);
                    e[0] += wa * wb * g[0];
                    e[1] += wa * wb * g[1];
                }
            }
            e[0] * c(0, 2) + e[1] * c(1, 2)
        }
        GaussianIdentity::Cm1 => c(0, 1),
        GaussianIdentity::Cm2 => (c(0, 3) + (c(0, 1) + c(0, 2)) * (c(3, 1) + c(3, 2))) * c(1, 2).exp(),
        GaussianIdentity::Cm3 => (c(0, 2) * c(3, 1) + c(0, 3)) * c(1, 2).exp(),
    };
    Ok(IdentityCheck { lhs: Estimate::from_samples(&vals), rhs })
}

/// `<h, p>_{H^{1/2}} = -(1/2 pi) int p d_n H h`.
pub fn h_half_pairing(h: &BoundaryField, p: &BoundaryField) -> f64 {
    -p.inner(&h.dirichlet_to_neumann()) / (2.0 * PI)
}

/// Cameron-Martin shift: returns estimates of `E F(h + t p)` and
/// `E F(h) exp(t <h,p> - t^2 |p|^2 / 2)` and of their paired difference.
pub fn cameron_martin_check<F>(
    p: &BoundaryField,
    t: f64,
    f: F,
    n: usize,
    n_samples: usize,
    seed: u64,
) -> (Estimate, Estimate, Estimate)
where
    F: Fn(&BoundaryField) -> f64 + Sync,
{
    let norm2 = h_half_pairing(p, p);
    let rows = map_samples(seed, "cameron-martin", n_samples, |rng, _| {
        let h = sample_trace(n, rng).h0;
        let shifted = &h + &p.scaled(t);
        let a = f(&shifted);
        let b = f(&h) * (t * h_half_pairing(&h, p) - 0.5 * t * t * norm2).exp();
        (a, b)
    });
    let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    (Estimate::from_samples(&a), Estimate::from_samples(&b), crate::mc::paired(&a, &b))
}

/// Symbols with a compact support box; the guard for integration over the zero mode.
#[derive(Debug, Clone)]
pub struct ZeroModeGuard {
    pub symbols: Vec<BoundaryField>,
    pub support: Vec<(f64, f64)>,
}

impl ZeroModeGuard {
    /// Rejects symbol lists whose means all vanish.
    pub fn new(symbols: Vec<BoundaryField>, support: Vec<(f64, f64)>) -> Result<Self> {
        assert_eq!(symbols.len(), support.len());
        if symbols.iter().all(|p| p.integral().abs() < 1e-14) {
            return Err(Error::GuardViolated(
                "at least one symbol must have nonzero mean for the zero-mode integral to localize".into(),
            ));
        }
        Ok(ZeroModeGuard { symbols, support })
    }

    /// Interval of zero modes `m` for which every argument `int p_i (h0 + m)`
    /// lies in its support interval; `None` when empty.
    pub fn window(&self, h0: &BoundaryField) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (p, &(a, b)) in self.symbols.iter().zip(&self.support) {
            let x = p.inner(h0);
            let big_p = p.integral();
            if big_p.abs() < 1e-14 {
                if x < a || x > b {
                    return None;
                }
                continue;
            }
            let (m1, m2) = ((a - x) / big_p, (b - x) / big_p);
            lo = lo.max(m1.min(m2));
            hi = hi.min(m1.max(m2));
        }
        (lo < hi).then_some((lo, hi))
    }
}

/// `int e^{rate m} g(m) dm` over `window` by adaptive Simpson to relative `1e-8`.
pub fn integrate_zero_mode<G: FnMut(f64) -> f64>(mut g: G, rate: f64, window: (f64, f64)) -> f64 {
    let (a, b) = window;
    let mut f = |m: f64| (rate * m).exp() * g(m);
    let coarse: f64 = (0..=32).map(|i| f(a + (b - a) * i as f64 / 32.0).abs()).fold(0.0, f64::max);
    if coarse == 0.0 {
        return 0.0;
    }
    let tol = 1e-8 * coarse * (b - a);
    adaptive_simpson(f, a, b, tol)
}

/// `E_rho[Phi] = E_{h0}[ int e^{rate m} Phi(h0, m) dm ]` with `rate = -2 pi c`.
///
/// `phi` must vanish whenever some argument `int p_i h` leaves the
/// guard's support box.
pub fn rho_expectation<F>(
    guard: &ZeroModeGuard,
    rate: f64,
    n: usize,
    n_samples: usize,
    seed: u64,
    label: &str,
    phi: F,
) -> Estimate
where
    F: Fn(&BoundaryField, f64) -> f64 + Sync,
{
    let vals = map_samples(seed, label, n_samples, |rng, _| {
        let h0 = sample_trace(n, rng).h0;
        match guard.window(&h0) {
            Some(w) => integrate_zero_mode(|m| phi(&h0, m), rate, w),
            None => 0.0,
        }
    });
    Estimate::from_samples(&vals)
}
