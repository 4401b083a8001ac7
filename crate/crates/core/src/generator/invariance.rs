//! Monte Carlo form of the invariance condition: the bulk expression on the
//! left against the boundary residual on the right, both under `rho_c`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bump::Bump;
use crate::error::{Error, Result};
use crate::fields::{bulk_covariance_matrix, sample_trace, CouplingParams};
use crate::gmc::{chaos_measure, ChaosSign};
use crate::kernels::values_on_grid;
use crate::mc::{map_samples, paired, Estimate};
use crate::spectral::{BoundaryField, Circle, DiskTestFunction, PolarGrid, RadialBump};

use super::bulk::BulkResponse;
use super::profile::{Profile, SmoothedProfile};
use super::{CylindricalFunctional, BULK_RADIAL_NODES};

/// Gauss-Hermite nodes per dimension for `P_Sigma psi`.
const SMOOTHING_NODES: usize = 16;

/// Everything about the test functional that does not depend on the sample.
#[derive(Debug, Clone)]
pub struct InvarianceSetup {
    functional: CylindricalFunctional,
    sigma: DMatrix<f64>,
    log_moments: Vec<f64>,
    bulk: BulkResponse,
    degree: usize,
    m: usize,
}

impl InvarianceSetup {
    /// Precompute `Sigma`, `int f_i log|z|` and the bulk responses for a field
    /// of degree `degree` and a measure on `m` points. The functional must
    /// carry its disk functions.
    pub fn new(functional: CylindricalFunctional, degree: usize, m: usize) -> Result<Self> {
        let fs = functional.sources()?;
        functional.guard()?;
        let sigma = bulk_covariance_matrix(&fs, BULK_RADIAL_NODES, 256)?;
        let log_moments = fs
            .iter()
            .map(|f| {
                let grid = PolarGrid::covering(&[f], BULK_RADIAL_NODES, 64)?;
                let log_r: Vec<f64> = grid.points().iter().map(|z| z.norm().ln()).collect();
                Ok(grid.pair(&f.sample(&grid).0, &log_r))
            })
            .collect::<Result<Vec<_>>>()?;
        let bulk = BulkResponse::new(&fs, degree, m, BULK_RADIAL_NODES)?;
        Ok(InvarianceSetup { functional, sigma, log_moments, bulk, degree, m })
    }

    /// Two-function default: a radial bump (constant symbol) and an angular
    /// one with a nonzero mean, profile bumps sized to the symbols.
    pub fn default_functional(m: usize) -> Result<CylindricalFunctional> {
        let f1 = DiskTestFunction::radial(0.3, 0.6, 1.0)?;
        let angular = &(&BoundaryField::constant(2, 0.5) + &BoundaryField::cos_mode(2, 1, 0.8))
            + &BoundaryField::sin_mode(2, 2, 0.6);
        let f2 = DiskTestFunction::new(RadialBump::new(0.25, 0.55)?, angular);
        let profile = Profile::new(vec![Bump::new(0.0, 1.2), Bump::new(0.1, 1.5)])?;
        CylindricalFunctional::from_functions(vec![f1, f2], profile, m)
    }

    pub fn functional(&self) -> &CylindricalFunctional {
        &self.functional
    }

    /// `Sigma_ij = -2 pi int f_i G f_j`.
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// `int f_i log|z| dlambda`.
    pub fn log_moments(&self) -> &[f64] {
        &self.log_moments
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `psi~(x) = P_Sigma psi(x + alpha int f log|.|)`.
    pub fn smoothed_profile(&self, alpha: f64) -> Result<SmoothedProfile> {
        let shift = self.log_moments.iter().map(|l| alpha * l).collect();
        SmoothedProfile::new(self.functional.profile().clone(), &self.sigma, shift, SMOOTHING_NODES)
    }
}

/// One parameter tuple of the invariance check.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceRow {
    pub params: CouplingParams,
    /// `[chi - alpha + 2 pi c, chi + 2 xi + 1/(2 xi), beta, (2 pi c)^2 - xi^2]`.
    pub coefficients: [f64; 4],
    /// Bulk expression, divided by `2 pi`.
    pub lhs: Estimate,
    /// Boundary residual.
    pub rhs: Estimate,
    /// Paired `lhs - rhs`.
    pub difference: Estimate,
}

/// Per-sample quantities at the zero mode `m = 0`.
struct SampleTerms {
    x0: Vec<f64>,
    transport: Vec<f64>,
    poisson: Vec<f64>,
    mu_term: Vec<f64>,
    green: Vec<Vec<f64>>,
    bulk_integral: Vec<f64>,
    boundary_mass: Vec<f64>,
    boundary_normal: Vec<f64>,
    total_mass: f64,
}

/// `E_rho[lhs]` and `E_rho[rhs]` for every tuple, with common random numbers.
///
/// All tuples must share `xi`; they may differ in `(alpha, chi, beta, c)`.
/// The zero mode is integrated translate by translate, see
/// [`SmoothedProfile::line_rule`].
pub fn invariance_check(
    setup: &InvarianceSetup,
    tuples: &[CouplingParams],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<InvarianceRow>> {
    let Some(first) = tuples.first() else {
        return Ok(Vec::new());
    };
    let xi = first.xi;
    if tuples.iter().any(|t| (t.xi - xi).abs() > 1e-15) {
        return Err(Error::InvalidParameter("all tuples must share xi".into()));
    }
    // One smoothed profile per distinct alpha.
    let mut alphas: Vec<f64> = Vec::new();
    let family: Vec<usize> = tuples
        .iter()
        .map(|t| match alphas.iter().position(|a| *a == t.alpha) {
            Some(k) => k,
            None => {
                alphas.push(t.alpha);
                alphas.len() - 1
            }
        })
        .collect();
    let symbols = setup.functional.symbols().to_vec();
    let profiles = alphas.iter().map(|a| setup.smoothed_profile(*a)).collect::<Result<Vec<_>>>()?;

    let m = setup.m;
    let circle = Circle::new(m);
    let p_values: Vec<Vec<f64>> = symbols.iter().map(|p| values_on_grid(p, m)).collect();
    let dn_values: Vec<Vec<f64>> = symbols.iter().map(|p| values_on_grid(&p.dirichlet_to_neumann(), m)).collect();
    let big_p: Vec<f64> = symbols.iter().map(|p| p.integral()).collect();
    let n = symbols.len();

    let samples: Vec<Vec<(f64, f64)>> = map_samples(seed, "invariance", n_samples, |rng, _| {
        let h0 = sample_trace(setup.degree, rng).h0;
        let mu0 = chaos_measure(&h0, ChaosSign::Minus, xi, &circle).expect("xi validated by CouplingParams");
        let bulk = setup.bulk.evaluate(&h0, &mu0);
        let s = SampleTerms {
            x0: symbols.iter().map(|p| p.inner(&h0)).collect(),
            transport: bulk.transport,
            poisson: bulk.poisson,
            mu_term: bulk.mu_term,
            green: bulk.green,
            bulk_integral: bulk.integral,
            boundary_mass: p_values.iter().map(|v| mu0.integrate(v)).collect(),
            boundary_normal: dn_values.iter().map(|v| mu0.integrate(v)).collect(),
            total_mass: mu0.total_mass(),
        };
        let mut out = vec![(0.0, 0.0); tuples.len()];
        for (k, sp) in profiles.iter().enumerate() {
            let nodes = sp.line_rule(&s.x0, &big_p);
            for (t, params) in tuples.iter().enumerate().filter(|(t, _)| family[*t] == k) {
                let rate = -params.two_pi_c();
                let (mut lhs, mut rhs) = (0.0, 0.0);
                for (zm, w, jet) in &nodes {
                    let weight = w * (rate * zm).exp();
                    let e = (-xi * zm).exp();
                    lhs += weight * lhs_integrand(&s, jet, e, params, n);
                    rhs += weight * rhs_integrand(&s, jet, e, params, &big_p, n);
                }
                out[t] = (lhs, rhs);
            }
        }
        out
    });

    Ok(tuples
        .iter()
        .enumerate()
        .map(|(t, params)| {
            let lhs: Vec<f64> = samples.iter().map(|r| r[t].0).collect();
            let rhs: Vec<f64> = samples.iter().map(|r| r[t].1).collect();
            InvarianceRow {
                params: *params,
                coefficients: params.residual_coefficients(),
                lhs: Estimate::from_samples(&lhs),
                rhs: Estimate::from_samples(&rhs),
                difference: paired(&lhs, &rhs),
            }
        })
        .collect())
}

/// `(1/2pi) [sum_i (int (Hh) D_mu f_i - 2 pi alpha int f_i^* dmu
/// + chi int f_i Re L' - beta int f_i) psi~_i - 2 pi sum_ij int f_i G D_mu f_j psi~_ij]`,
/// with `mu = e mu_0`.
fn lhs_integrand(s: &SampleTerms, jet: &super::Jet, e: f64, params: &CouplingParams, n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        let drift = e * (s.transport[i] - 2.0 * PI * params.alpha * s.poisson[i] + params.chi * s.mu_term[i])
            - params.beta * s.bulk_integral[i];
        acc += drift * jet.grad[i];
        for j in 0..n {
            acc += e * s.green[i][j] * jet.hess[i][j];
        }
    }
    acc / (2.0 * PI)
}

/// `sum_i [(chi - alpha + 2 pi c) int p_i dmu - (chi + 2 xi + 1/(2 xi)) int d_nH p_i dmu
/// - beta mean(p_i)] psi~_i - ((2 pi c)^2 - xi^2) |mu| psi~ / (4 pi)`.
///
/// The last coefficient is the one produced by integrating the bulk
/// expression by parts in the zero mode; it is checked exactly by the
/// one-function reductions in the tests.
fn rhs_integrand(s: &SampleTerms, jet: &super::Jet, e: f64, params: &CouplingParams, big_p: &[f64], n: usize) -> f64 {
    let [c1, c2, beta, c4] = params.residual_coefficients();
    let mut acc = -c4 * e * s.total_mass * jet.value / (4.0 * PI);
    for i in 0..n {
        let coef = e * (c1 * s.boundary_mass[i] - c2 * s.boundary_normal[i]) - beta * big_p[i] / (2.0 * PI);
        acc += coef * jet.grad[i];
    }
    acc
}

/// Pure gravity followed by one perturbation of each of `beta`, `c`, `chi`, `alpha`.
pub fn default_tuples(delta: f64) -> Vec<CouplingParams> {
    let pg = CouplingParams::pure_gravity();
    let mut out = vec![pg];
    let mut beta = pg;
    beta.beta += delta;
    out.push(beta);
    let mut c = pg;
    c.c += delta / (2.0 * PI);
    out.push(c);
    let mut chi = pg;
    chi.chi += delta;
    out.push(chi);
    let mut alpha = pg;
    alpha.alpha += delta;
    alpha.omega -= delta;
    out.push(alpha);
    out
}
