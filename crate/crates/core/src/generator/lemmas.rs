//! Integration-by-parts lemmas behind the invariance computation, the
//! projected symmetric form, the comparison with the quantum Loewner
//! evolution drift, and the derivative-martingale identities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{sample_trace, trace_covariance, CouplingParams};
use crate::gmc::{chaos_measure, ChaosSign, CircleMeasure};
use crate::kernels::{dmu, symbol, v_mu_pairing, values_on_grid};
use crate::mc::{map_samples, paired, stream, Estimate};
use crate::quad::gauss_legendre_on;
use crate::spectral::{lambda, BoundaryField, Circle, DiskTestFunction, PolarGrid};

use super::bulk::BulkResponse;
use super::profile::Profile;
use super::{drift, poisson_kernel, trim_symbol, zero_mode_rule, CylindricalFunctional, BULK_RADIAL_NODES};
use rand_distr::{Distribution, StandardNormal};

/// The measure `rho_c = e^{-2 pi c m} rho_0(dh0) dm` with driving measure `e^{-xi h}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rho {
    pub xi: f64,
    pub c: f64,
}

impl Rho {
    /// `2 pi c = -xi`.
    pub fn pure_gravity() -> Rho {
        let p = CouplingParams::pure_gravity();
        Rho { xi: p.xi, c: p.c }
    }

    fn rate(&self) -> f64 {
        -2.0 * PI * self.c
    }
}

/// Field degree, measure grid, sample count and seed of a Monte Carlo check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sampling {
    pub degree: usize,
    pub m: usize,
    pub n_samples: usize,
    pub seed: u64,
}

/// `int w(m) e^{-2 pi c m} g(m, e^{-xi m}) dm` over a window.
fn zero_mode_sum(window: (f64, f64), rho: &Rho, mut g: impl FnMut(f64, f64) -> f64) -> f64 {
    zero_mode_rule(window, rho.rate()).into_iter().map(|(zm, w)| w * g(zm, (-rho.xi * zm).exp())).sum()
}

fn window_of(fs: &[&CylindricalFunctional], h0: &BoundaryField) -> Result<Option<(f64, f64)>> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for f in fs {
        match f.guard()?.window(h0) {
            Some((a, b)) => {
                lo = lo.max(a);
                hi = hi.min(b);
            }
            None => return Ok(None),
        }
    }
    Ok((lo < hi).then_some((lo, hi)))
}

fn args_at(f: &CylindricalFunctional, x0: &[f64], zm: f64) -> Vec<f64> {
    x0.iter().zip(f.symbols()).map(|(x, p)| x + zm * p.integral()).collect()
}

fn integrate_product(mu: &CircleMeasure, a: &[f64], b: &[f64]) -> f64 {
    let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    mu.integrate(&v)
}

/// Per-sample values of `g(h0, mu0, window)` over the zero-mode windows of `fs`;
/// samples with an empty window contribute 0.
fn rho_samples<T, G>(fs: &[&CylindricalFunctional], rho: &Rho, s: &Sampling, label: &str, zero: T, g: G) -> Result<Vec<T>>
where
    T: Send + Clone + Sync,
    G: Fn(&BoundaryField, &CircleMeasure, (f64, f64)) -> T + Sync,
{
    for f in fs {
        f.guard()?;
    }
    let circle = Circle::new(s.m);
    Ok(map_samples(s.seed, label, s.n_samples, |rng, _| {
        let h0 = sample_trace(s.degree, rng).h0;
        match window_of(fs, &h0).expect("guards checked above") {
            Some(w) => {
                let mu0 = chaos_measure(&h0, ChaosSign::Minus, rho.xi, &circle).expect("xi checked by caller");
                g(&h0, &mu0, w)
            }
            None => zero.clone(),
        }
    }))
}

fn check_xi(xi: f64) -> Result<()> {
    if (0.0..1.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("xi = {xi} outside [0, 1)")))
    }
}

/// `E_rho[(int d_t l dmu) F + 2 pi xi int l DF~ dmu]`.
pub fn rotational_invariance_check(
    ell: &BoundaryField,
    functional: &CylindricalFunctional,
    rho: &Rho,
    s: &Sampling,
) -> Result<Estimate> {
    check_xi(rho.xi)?;
    let dt_ell = values_on_grid(&ell.tangential_derivative(), s.m);
    let ell_v = values_on_grid(ell, s.m);
    let conj: Vec<Vec<f64>> = functional.symbols().iter().map(|p| values_on_grid(&p.conjugate(), s.m)).collect();
    let v = rho_samples(&[functional], rho, s, "rotation", 0.0, |h0, mu0, window| {
        let a = mu0.integrate(&dt_ell);
        let c: Vec<f64> = conj.iter().map(|pt| integrate_product(mu0, &ell_v, pt)).collect();
        let x0 = functional.arguments(h0);
        zero_mode_sum(window, rho, |zm, e| {
            let jet = functional.profile().jet(&args_at(functional, &x0, zm));
            let tilde: f64 = c.iter().enumerate().map(|(i, ci)| ci * jet.grad[i]).sum();
            e * (a * jet.value + 2.0 * PI * rho.xi * tilde)
        })
    })?;
    Ok(Estimate::from_samples(&v))
}

/// `E_rho[(int (Hh) D_mu f + 2 pi xi int (p - mean p) dmu + 4 pi xi int d_nH p dmu) F G
///  + 2 pi (sum_i F_i G V_mu(p, p_i) + sum_j F G_j V_mu(p, q_j))]` with `p = H^* f`,
/// the first pairing by bulk quadrature.
pub fn ibp_hdmuf_check(
    f: &DiskTestFunction,
    ff: &CylindricalFunctional,
    gg: &CylindricalFunctional,
    rho: &Rho,
    s: &Sampling,
) -> Result<Estimate> {
    check_xi(rho.xi)?;
    let p = trim_symbol(&symbol(f, BULK_RADIAL_NODES, s.m)?, 1e-16);
    let bulk = BulkResponse::new(std::slice::from_ref(f), s.degree, s.m, BULK_RADIAL_NODES)?;
    let centred: Vec<f64> = values_on_grid(&p, s.m).into_iter().map(|x| x - p.mean()).collect();
    let dn_p = values_on_grid(&p.dirichlet_to_neumann(), s.m);
    let xi = rho.xi;
    let v = rho_samples(&[ff, gg], rho, s, "ibp-muh", 0.0, |h0, mu0, window| {
        let transport = bulk.evaluate(h0, mu0).transport[0];
        let scalar = transport + 2.0 * PI * xi * mu0.integrate(&centred) + 4.0 * PI * xi * mu0.integrate(&dn_p);
        let vf: Vec<f64> = ff.symbols().iter().map(|pi| v_mu_pairing(&p, pi, mu0)).collect();
        let vg: Vec<f64> = gg.symbols().iter().map(|qj| v_mu_pairing(&p, qj, mu0)).collect();
        let (x0, y0) = (ff.arguments(h0), gg.arguments(h0));
        zero_mode_sum(window, rho, |zm, e| {
            let jf = ff.profile().jet(&args_at(ff, &x0, zm));
            let jg = gg.profile().jet(&args_at(gg, &y0, zm));
            let cross: f64 = vf.iter().enumerate().map(|(i, v)| jf.grad[i] * jg.value * v).sum::<f64>()
                + vg.iter().enumerate().map(|(j, v)| jf.value * jg.grad[j] * v).sum::<f64>();
            e * (scalar * jf.value * jg.value + 2.0 * PI * cross)
        })
    })?;
    Ok(Estimate::from_samples(&v))
}

/// Residual of the potential integration by parts, the coefficient of a
/// mismatch in `c`, and the paired deviation from the predicted linear law.
#[derive(Debug, Clone, Serialize)]
pub struct IbpPotentialCheck {
    /// Residual with `DV = -(d_nH h)/(2 pi) + c + c_shift`.
    pub residual: Estimate,
    /// `-int k dlambda E[(int l dmu) F]`.
    pub slope: Estimate,
    /// `residual - c_shift * slope`, paired.
    pub deviation: Estimate,
}

/// `E_rho[((-<k, DV>) int l dmu - xi int l k dmu) F + sum_i <p_i, k> (int l dmu) F_i]`
/// with the potential evaluated at `c + c_shift` while `rho` uses `c`.
pub fn ibp_potential_check(
    ell: &BoundaryField,
    k: &BoundaryField,
    functional: &CylindricalFunctional,
    rho: &Rho,
    c_shift: f64,
    s: &Sampling,
) -> Result<IbpPotentialCheck> {
    check_xi(rho.xi)?;
    let ell_v = values_on_grid(ell, s.m);
    let k_v = values_on_grid(k, s.m);
    let k_mass = k.integral();
    let pk: Vec<f64> = functional.symbols().iter().map(|p| p.inner(k)).collect();
    let dn_k = k.dirichlet_to_neumann();
    let rows = rho_samples(&[functional], rho, s, "ibp-potential", (0.0, 0.0), |h0, mu0, window| {
        let a = mu0.integrate(&ell_v);
        let ak = integrate_product(mu0, &ell_v, &k_v);
        // <k, d_nH h> = <d_nH k, h>
        let dv = -dn_k.inner(h0) / (2.0 * PI) + (rho.c + c_shift) * k_mass;
        let x0 = functional.arguments(h0);
        let (mut res, mut slope) = (0.0, 0.0);
        for (zm, w) in zero_mode_rule(window, rho.rate()) {
            let e = (-rho.xi * zm).exp();
            let jet = functional.profile().jet(&args_at(functional, &x0, zm));
            let grad: f64 = pk.iter().enumerate().map(|(i, c)| c * jet.grad[i]).sum();
            res += w * e * ((-dv * a - rho.xi * ak) * jet.value + a * grad);
            slope += w * e * (-k_mass * a * jet.value);
        }
        (res, slope)
    })?;
    let res: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let slope: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let predicted: Vec<f64> = slope.iter().map(|x| c_shift * x).collect();
    Ok(IbpPotentialCheck {
        residual: Estimate::from_samples(&res),
        slope: Estimate::from_samples(&slope),
        deviation: paired(&res, &predicted),
    })
}

/// Boundary drift of the module against the quantum Loewner evolution drift.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QleComparison {
    /// `b(p)` at pure gravity with `mu = nu`.
    pub module: f64,
    /// `int (Hh) D_nu f + 2 pi Q int d_nH f^* dnu + 2 pi xi int (f^* - mean f^*) dnu`, by bulk quadrature.
    pub ms: f64,
    /// `2 pi xi mean(f^*) |nu|`, the exact difference `module - ms`.
    pub offset: f64,
}

impl QleComparison {
    pub fn relative(&self) -> f64 {
        (self.module - self.ms - self.offset).abs() / self.module.abs().max(self.ms.abs()).max(1e-300)
    }
}

/// Compare both drifts for a probability measure `nu` on its grid.
pub fn qle_drift_compare(f: &DiskTestFunction, h: &BoundaryField, nu: &CircleMeasure) -> Result<QleComparison> {
    if (nu.total_mass() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("|nu| = {} is not 1", nu.total_mass())));
    }
    let params = CouplingParams::pure_gravity();
    let m = nu.m();
    let p = symbol(f, BULK_RADIAL_NODES, m)?;
    let module = drift(&p, h, nu, &params);

    let grid = PolarGrid::covering(&[f], BULK_RADIAL_NODES, m.max(4 * h.degree() + 4))?;
    let transport = grid.pair(&dmu(f, nu, &grid)?, &grid.harmonic_values(h));
    let (v, _) = f.sample(&grid);
    let pts = grid.points();
    let mean_star = grid.integrate(&v) / (2.0 * PI);
    let (mut normal, mut centred) = (0.0, 0.0);
    for (j, w) in Circle::new(m).points().into_iter().enumerate() {
        let mass = nu.cell_mass(j);
        if mass == 0.0 {
            continue;
        }
        let hw: Vec<f64> = pts.iter().map(|z| poisson_kernel(*z, w)).collect();
        let kw: Vec<f64> = pts.iter().map(|z| -(z * w / ((w - z) * (w - z))).re / PI).collect();
        normal += mass * grid.pair(&v, &kw);
        centred += mass * (grid.pair(&v, &hw) - mean_star);
    }
    let ms = transport + 2.0 * PI * params.q * normal + 2.0 * PI * params.xi * centred;
    Ok(QleComparison { module, ms, offset: 2.0 * PI * params.xi * mean_star * nu.total_mass() })
}

fn check_orthonormal(ps: &[BoundaryField]) -> Result<()> {
    for (i, a) in ps.iter().enumerate() {
        for (j, b) in ps.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            if (a.inner(b) - target).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!("symbols {i}, {j} are not orthonormal")));
            }
        }
    }
    Ok(())
}

fn projection(ps: &[BoundaryField], g: &BoundaryField) -> BoundaryField {
    let c: Vec<f64> = ps.iter().map(|p| p.inner(g)).collect();
    super::combine(ps, &c)
}

/// `max_w |E[Pi_P(d_nH h)(w) h(w)] + 2 pi (S_2 - S_2^1)(w)|` for the degree-`n`
/// trace, with `S_2 = sum p^2` and `S_2^1 = sum p mean(p)`. The expectation is
/// assembled from the trace covariance `2 pi / lambda_k` on modes `1..=2n`.
pub fn gaussian_projection_identity(ps: &[BoundaryField], n: usize) -> Result<f64> {
    check_orthonormal(ps)?;
    let deg = ps.iter().map(|p| p.degree()).max().unwrap_or(0);
    if deg > n {
        return Err(Error::InvalidParameter(format!("symbols of degree {deg} exceed the field degree {n}")));
    }
    let circle = Circle::new(4 * n + 4);
    let mut lhs = vec![0.0; circle.m()];
    let mut s2 = vec![0.0; circle.m()];
    for p in ps {
        let mut cov = p.with_degree(n).dirichlet_to_neumann();
        for (k, c) in cov.coeffs_mut().iter_mut().enumerate() {
            *c *= if k == 0 { 0.0 } else { 2.0 * PI / lambda(k) };
        }
        let pv = circle.values(p);
        let cv = circle.values(&cov);
        for j in 0..circle.m() {
            lhs[j] += pv[j] * cv[j];
            s2[j] += pv[j] * (pv[j] - p.mean());
        }
    }
    Ok(lhs.iter().zip(&s2).map(|(a, b)| (a + 2.0 * PI * b).abs()).fold(0.0, f64::max))
}

/// Monte Carlo residual and spectral residual of the projected symmetric identity.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectedIbp {
    /// `E[<DF, DG>_{L^2(mu)}] - E[F (...)]`, paired.
    pub residual: Estimate,
    pub lhs: Estimate,
    pub spectral_residual: f64,
}

/// For `F = phi(<h, p_i>)` with orthonormal `p_i` and any `G`, at pure gravity:
/// `E[sum F_i G_j int p_i q_j dmu] = E[F (-sum G_jj' int Pi_P(q_j') q_j dmu
///  + xi int (S_2 - S_2^1) DG dmu - (1/2pi) int Pi_P(d_nH h) DG dmu)]`.
pub fn projected_symmetric_ibp_check(
    ps: &[BoundaryField],
    phi: Profile,
    gg: &CylindricalFunctional,
    s: &Sampling,
) -> Result<ProjectedIbp> {
    check_orthonormal(ps)?;
    let spectral_residual = gaussian_projection_identity(ps, s.degree)?;
    let ff = CylindricalFunctional::new(ps.to_vec(), phi)?;
    let rho = Rho::pure_gravity();
    let qs = gg.symbols();
    let m = s.m;
    let p_v: Vec<Vec<f64>> = ps.iter().map(|p| values_on_grid(p, m)).collect();
    let q_v: Vec<Vec<f64>> = qs.iter().map(|q| values_on_grid(q, m)).collect();
    let proj_q: Vec<Vec<f64>> = qs.iter().map(|q| values_on_grid(&projection(ps, q), m)).collect();
    let mut s_v = vec![0.0; m];
    for (p, v) in ps.iter().zip(&p_v) {
        for (acc, x) in s_v.iter_mut().zip(v) {
            *acc += x * (x - p.mean());
        }
    }
    let rows = rho_samples(&[&ff, gg], &rho, s, "ibp-sym-bon", (0.0, 0.0), |h0, mu0, window| {
        let prod: Vec<Vec<f64>> = p_v.iter().map(|a| q_v.iter().map(|b| integrate_product(mu0, a, b)).collect()).collect();
        let pq: Vec<Vec<f64>> =
            q_v.iter().map(|qj| proj_q.iter().map(|pj| integrate_product(mu0, pj, qj)).collect()).collect();
        let sq: Vec<f64> = q_v.iter().map(|qj| integrate_product(mu0, &s_v, qj)).collect();
        let dn = values_on_grid(&projection(ps, &h0.dirichlet_to_neumann()), m);
        let tq: Vec<f64> = q_v.iter().map(|qj| integrate_product(mu0, &dn, qj)).collect();
        let (x0, y0) = (ff.arguments(h0), gg.arguments(h0));
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for (zm, w) in zero_mode_rule(window, rho.rate()) {
            let e = (-rho.xi * zm).exp();
            let jf = ff.profile().jet(&args_at(&ff, &x0, zm));
            let jg = gg.profile().jet(&args_at(gg, &y0, zm));
            let mut l = 0.0;
            for i in 0..ps.len() {
                for j in 0..qs.len() {
                    l += jf.grad[i] * jg.grad[j] * prod[i][j];
                }
            }
            let mut r = 0.0;
            for j in 0..qs.len() {
                r += jg.grad[j] * (rho.xi * sq[j] - tq[j] / (2.0 * PI));
                for jp in 0..qs.len() {
                    r -= jg.hess[j][jp] * pq[j][jp];
                }
            }
            lhs += w * e * l;
            rhs += w * e * jf.value * r;
        }
        (lhs, rhs)
    })?;
    let lhs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(ProjectedIbp { residual: paired(&lhs, &rhs), lhs: Estimate::from_samples(&lhs), spectral_residual })
}

/// Pointwise check of the derivative-martingale representation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeMartingale {
    pub max_abs_residual: f64,
    /// Largest `|rhs|` on the grid.
    pub scale: f64,
}

/// With `h_N = sum_{i <= 2N} X_i e_i / sqrt(lambda_i)` and
/// `M_N(xi_bar) = prod_i exp(-xi_i X_i e_i / sqrt(lambda_i) - xi_i^2 e_i^2 / (2 lambda_i))`,
/// compare `sum_i lambda_i d/dxi_i M_N` (complex step on each factor) with
/// `(d_nH h_N + xi E[h_N d_nH h_N]) M_N` on a grid of `4N + 4` points.
pub fn derivative_martingale_identity(n: usize, xi: f64, seed: u64) -> DerivativeMartingale {
    let mut rng = stream(seed, "derivative-martingale", 0);
    let x: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut coeffs = vec![0.0; 2 * n + 1];
    for i in 1..=2 * n {
        coeffs[i] = x[i - 1] / lambda(i).sqrt();
    }
    let h = BoundaryField::from_coeffs(coeffs);
    let dn_h = h.dirichlet_to_neumann();
    let basis: Vec<BoundaryField> = (1..=2 * n).map(|i| BoundaryField::basis(n, i)).collect();
    let dn_basis: Vec<BoundaryField> = basis.iter().map(|b| b.dirichlet_to_neumann()).collect();
    let circle = Circle::new(4 * n + 4);
    let eps = 1e-30;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for t in circle.thetas() {
        let mut log_m = 0.0;
        let mut lhs_factor = 0.0;
        let mut cov = 0.0;
        for i in 1..=2 * n {
            let e = basis[i - 1].eval(t);
            let l = lambda(i);
            let term = |s: Complex64| -s * x[i - 1] * e / l.sqrt() - s * s * e * e / (2.0 * l);
            log_m += term(Complex64::new(xi, 0.0)).re;
            lhs_factor += l * term(Complex64::new(xi, eps)).im / eps;
            cov += e * dn_basis[i - 1].eval(t) / l;
        }
        let mm = log_m.exp();
        let lhs = lhs_factor * mm;
        let rhs = (dn_h.eval(t) + xi * cov) * mm;
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    DerivativeMartingale { max_abs_residual: worst, scale }
}

/// `I(K) = 2 pi int_0^{2 pi} [4 xi^2 (sum_{k <= K} cos k t)^2 + 2 sum_{k <= K} k cos k t]
/// |2 sin(t/2)|^{-2 xi^2} dt`, the second moment of the projected
/// renormalized pairing against `q = 1`, for each `K`.
pub fn second_moment_growth(xi: f64, ks: &[usize]) -> Vec<f64> {
    ks.iter()
        .map(|&kk| {
            // symmetric about pi; t = pi s^3 removes the endpoint singularity
            let panels = 8 * kk + 8;
            let mut total = 0.0;
            for k in 0..panels {
                let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
                let (s, w) = gauss_legendre_on(16, a, b);
                for (s, w) in s.into_iter().zip(w) {
                    let t = PI * s * s * s;
                    let jac = 3.0 * PI * s * s;
                    let d: f64 = (1..=kk).map(|k| (k as f64 * t).cos()).sum();
                    let dd: f64 = (1..=kk).map(|k| k as f64 * (k as f64 * t).cos()).sum();
                    let weight = (2.0 * (t / 2.0).sin()).powf(-2.0 * xi * xi);
                    total += w * jac * (4.0 * xi * xi * d * d + 2.0 * dd) * weight;
                }
            }
            2.0 * PI * 2.0 * total
        })
        .collect()
}

/// `max_t |DF~(h - xi G(., t), t) - (1/(2 pi xi)) d/dt F(h - xi G(., t))|` with
/// `G(w, t) = -2 log|w - t|`, the shifted arguments assembled by trapezoidal
/// quadrature against the covariance and the derivative by complex step.
pub fn tilde_df_shift_check(functional: &CylindricalFunctional, h: &BoundaryField, xi: f64) -> Result<f64> {
    if xi <= 0.0 {
        return Err(Error::InvalidParameter("xi must be positive".into()));
    }
    let ps = functional.symbols();
    let deg = ps.iter().map(|p| p.degree()).max().unwrap_or(1);
    let quad = Circle::new(4 * deg + 8);
    let pv: Vec<Vec<f64>> = ps.iter().map(|p| quad.values(p)).collect();
    let conj: Vec<BoundaryField> = ps.iter().map(|p| p.conjugate()).collect();
    let potentials: Vec<BoundaryField> = ps.iter().map(|p| p.inverse_dirichlet_to_neumann()).collect();
    let x0 = functional.arguments(h);
    let eps = 1e-30;
    let mut worst = 0.0f64;
    for t in Circle::new(64).thetas() {
        let kernel: Vec<f64> = quad.thetas().iter().map(|&s| trace_covariance(deg, s, t)).collect();
        let x: Vec<f64> =
            (0..ps.len()).map(|i| x0[i] - xi * quad.dtheta() * kernel.iter().zip(&pv[i]).map(|(a, b)| a * b).sum::<f64>()).collect();
        let jet = functional.profile().jet(&x);
        let lhs: f64 = (0..ps.len()).map(|i| jet.grad[i] * conj[i].eval(t)).sum();
        let tc = Complex64::new(t, eps);
        let xc: Vec<Complex64> = (0..ps.len()).map(|i| x0[i] + 2.0 * PI * xi * potentials[i].eval_complex(tc)).collect();
        let rhs = functional.profile().value_complex(&xc).im / eps / (2.0 * PI * xi);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
