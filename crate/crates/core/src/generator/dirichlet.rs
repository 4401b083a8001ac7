//! The bilinear form `E(F, G) = int F (-L G) drho` at pure gravity, its
//! closed symmetric and antisymmetric parts, and the divergence-form
//! re-assembly of the singular pairing.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{sample_trace, CouplingParams};
use crate::gmc::{chaos_measure, ChaosSign, CircleMeasure};
use crate::kernels::{operator_a, symmetric_contraction, v_mu_pairing, values_on_grid};
use crate::mc::{map_samples, paired, Estimate};
use crate::spectral::{BoundaryField, Circle};

use super::profile::Jet;
use super::lemmas::Sampling;
use super::{drift, zero_mode_rule, CylindricalFunctional};

/// Estimates of `E(F, G)`, `E(G, F)` and the closed forms, with paired residuals.
#[derive(Debug, Clone, Serialize)]
pub struct DirichletReport {
    pub forward: Estimate,
    pub backward: Estimate,
    pub symmetric: Estimate,
    pub antisymmetric: Estimate,
    /// `E(F, G) - sym - antisym`.
    pub forward_residual: Estimate,
    /// `E(G, F) - sym + antisym`.
    pub backward_residual: Estimate,
    /// `E(F, G) + E(G, F) - 2 sym`.
    pub exchange_residual: Estimate,
}

/// Intersection of the zero-mode windows of two functionals.
fn joint_window(f: &CylindricalFunctional, g: &CylindricalFunctional, h0: &BoundaryField) -> Result<Option<(f64, f64)>> {
    let (wf, wg) = (f.guard()?.window(h0), g.guard()?.window(h0));
    Ok(match (wf, wg) {
        (Some(a), Some(b)) => {
            let (lo, hi) = (a.0.max(b.0), a.1.min(b.1));
            (lo < hi).then_some((lo, hi))
        }
        _ => None,
    })
}

fn shifted_args(functional: &CylindricalFunctional, x0: &[f64], zm: f64) -> Vec<f64> {
    x0.iter().zip(functional.symbols()).map(|(x, p)| x + zm * p.integral()).collect()
}

/// Boundary drift at `h0` and `mu0` with the `beta` term removed, so that
/// `b(m) = e^{-xi m} b0 - beta int p`.
fn drift_without_beta(p: &BoundaryField, h0: &BoundaryField, mu0: &CircleMeasure, params: &CouplingParams) -> f64 {
    drift(p, h0, mu0, params) + params.beta * p.integral()
}

/// Pieces of `-L G` at `m = 0` that scale with `e^{-xi m}`.
struct GeneratorPieces {
    drift: Vec<f64>,
    sigma: Vec<Vec<f64>>,
    integrals: Vec<f64>,
}

impl GeneratorPieces {
    fn new(g: &CylindricalFunctional, h0: &BoundaryField, mu0: &CircleMeasure, params: &CouplingParams) -> Self {
        let qs = g.symbols();
        GeneratorPieces {
            drift: qs.iter().map(|q| drift_without_beta(q, h0, mu0, params)).collect(),
            sigma: qs.iter().map(|a| qs.iter().map(|b| super::diffusion(a, b, mu0)).collect()).collect(),
            integrals: qs.iter().map(|q| q.integral()).collect(),
        }
    }

    fn apply(&self, jet: &Jet, e: f64, beta: f64) -> f64 {
        let n = self.drift.len();
        let mut out = 0.0;
        for j in 0..n {
            out += (e * self.drift[j] - beta * self.integrals[j]) * jet.grad[j];
            for l in 0..n {
                out += 0.5 * e * self.sigma[j][l] * jet.hess[j][l];
            }
        }
        out
    }
}

fn pairing_matrix(
    ps: &[BoundaryField],
    qs: &[BoundaryField],
    mu: &CircleMeasure,
    op: impl Fn(&BoundaryField, &BoundaryField) -> BoundaryField,
) -> Vec<Vec<f64>> {
    ps.iter().map(|p| qs.iter().map(|q| mu.integrate(&values_on_grid(&op(p, q), mu.m()))).collect()).collect()
}

/// `E(F, G)`, `E(G, F)`, `2 pi^2 int <DF, DG>_{L^2(mu)} drho` and
/// `2 pi^2 int int (conj(DF~ DG) - conj(DF DG~)) dmu drho
///  + pi xi int (mean(DF) G - mean(DG) F) |mu| drho`
/// under pure-gravity `rho`.
pub fn dirichlet_form(
    f: &CylindricalFunctional,
    g: &CylindricalFunctional,
    s: &Sampling,
) -> Result<DirichletReport> {
    let (n, m) = (s.degree, s.m);
    let params = CouplingParams::pure_gravity();
    let xi = params.xi;
    let rate = -params.two_pi_c();
    f.guard()?;
    g.guard()?;
    let circle = Circle::new(m);
    let (ps, qs) = (f.symbols(), g.symbols());
    let mean_p: Vec<f64> = ps.iter().map(|p| p.mean()).collect();
    let mean_q: Vec<f64> = qs.iter().map(|q| q.mean()).collect();

    let rows: Vec<[f64; 4]> = map_samples(s.seed, "dirichlet", s.n_samples, |rng, _| -> [f64; 4] {
        let h0 = sample_trace(n, rng).h0;
        let Some(window) = joint_window(f, g, &h0).expect("guards checked above") else {
            return [0.0; 4];
        };
        let mu0 = chaos_measure(&h0, ChaosSign::Minus, xi, &circle).expect("pure-gravity xi");
        let lg = GeneratorPieces::new(g, &h0, &mu0, &params);
        let lf = GeneratorPieces::new(f, &h0, &mu0, &params);
        let prod = pairing_matrix(ps, qs, &mu0, |p, q| p.product(q));
        let anti = pairing_matrix(ps, qs, &mu0, operator_a);
        let mass = mu0.total_mass();
        let (x0, y0) = (f.arguments(&h0), g.arguments(&h0));
        let mut acc = [0.0; 4];
        for (zm, w) in zero_mode_rule(window, rate) {
            let e = (-xi * zm).exp();
            let jf = f.profile().jet(&shifted_args(f, &x0, zm));
            let jg = g.profile().jet(&shifted_args(g, &y0, zm));
            let mut sym = 0.0;
            let mut asym = 0.0;
            for i in 0..ps.len() {
                for j in 0..qs.len() {
                    let c = jf.grad[i] * jg.grad[j];
                    sym += c * prod[i][j];
                    asym += c * anti[i][j];
                }
            }
            let mean_df: f64 = (0..ps.len()).map(|i| jf.grad[i] * mean_p[i]).sum();
            let mean_dg: f64 = (0..qs.len()).map(|j| jg.grad[j] * mean_q[j]).sum();
            acc[0] += w * jf.value * -lg.apply(&jg, e, params.beta);
            acc[1] += w * jg.value * -lf.apply(&jf, e, params.beta);
            acc[2] += w * 2.0 * PI * PI * e * sym;
            acc[3] += w * (2.0 * PI * PI * e * asym + PI * xi * e * mass * (mean_df * jg.value - mean_dg * jf.value));
        }
        acc
    });
    let col = |k: usize| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };
    let (fwd, bwd, sym, asym) = (col(0), col(1), col(2), col(3));
    let plus: Vec<f64> = sym.iter().zip(&asym).map(|(s, a)| s + a).collect();
    let minus: Vec<f64> = sym.iter().zip(&asym).map(|(s, a)| s - a).collect();
    let both: Vec<f64> = fwd.iter().zip(&bwd).map(|(a, b)| a + b).collect();
    let twice: Vec<f64> = sym.iter().map(|s| 2.0 * s).collect();
    Ok(DirichletReport {
        forward: Estimate::from_samples(&fwd),
        backward: Estimate::from_samples(&bwd),
        symmetric: Estimate::from_samples(&sym),
        antisymmetric: Estimate::from_samples(&asym),
        forward_residual: paired(&fwd, &plus),
        backward_residual: paired(&bwd, &minus),
        exchange_residual: paired(&both, &twice),
    })
}

/// Direct and divergence-form assemblies of `int <DF V_{DG}, mu> drho`.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceCrossCheck {
    pub direct: Estimate,
    pub alternative: Estimate,
    pub difference: Estimate,
}

/// `E[sum_i F_i int int V_{DG} p_i dmu dlambda]` against
/// `-E[F (pi sum_jl G_jl int (q_j q_l + q~_j q~_l - mean q_j mean q_l) dmu
///  + 2 xi int d_nH DG dmu - int int DV V_{DG} dmu dlambda)]`,
/// `DV = -(d_nH h + xi)/(2 pi)`, at pure gravity.
pub fn divergence_cross_check(
    f: &CylindricalFunctional,
    g: &CylindricalFunctional,
    s: &Sampling,
) -> Result<DivergenceCrossCheck> {
    let (n, m) = (s.degree, s.m);
    let params = CouplingParams::pure_gravity();
    let xi = params.xi;
    let rate = -params.two_pi_c();
    f.guard()?;
    g.guard()?;
    if n >= m / 4 {
        return Err(Error::GridTooSmall { m, n: 2 * n });
    }
    let circle = Circle::new(m);
    let (ps, qs) = (f.symbols(), g.symbols());

    let rows: Vec<(f64, f64)> = map_samples(s.seed, "divergence", s.n_samples, |rng, _| {
        let h0 = sample_trace(n, rng).h0;
        let Some(window) = joint_window(f, g, &h0).expect("guards checked above") else {
            return (0.0, 0.0);
        };
        let mu0 = chaos_measure(&h0, ChaosSign::Minus, xi, &circle).expect("pure-gravity xi");
        let dn_h = h0.dirichlet_to_neumann();
        // v[i][j] = int int V_{q_j} p_i
        let v: Vec<Vec<f64>> = ps.iter().map(|p| qs.iter().map(|q| v_mu_pairing(q, p, &mu0)).collect()).collect();
        let contraction = pairing_matrix(qs, qs, &mu0, symmetric_contraction);
        let normal: Vec<f64> = qs.iter().map(|q| mu0.integrate(&values_on_grid(&q.dirichlet_to_neumann(), m))).collect();
        let potential: Vec<f64> = qs
            .iter()
            .map(|q| {
                let centred: Vec<f64> = values_on_grid(q, m).into_iter().map(|x| x - q.mean()).collect();
                -v_mu_pairing(q, &dn_h, &mu0) / (2.0 * PI) - xi * mu0.integrate(&centred)
            })
            .collect();
        let (x0, y0) = (f.arguments(&h0), g.arguments(&h0));
        let (mut direct, mut alt) = (0.0, 0.0);
        for (zm, w) in zero_mode_rule(window, rate) {
            let e = (-xi * zm).exp();
            let jf = f.profile().jet(&shifted_args(f, &x0, zm));
            let jg = g.profile().jet(&shifted_args(g, &y0, zm));
            let mut d = 0.0;
            for i in 0..ps.len() {
                for j in 0..qs.len() {
                    d += jf.grad[i] * jg.grad[j] * v[i][j];
                }
            }
            let mut a = 0.0;
            for j in 0..qs.len() {
                a += jg.grad[j] * (2.0 * xi * normal[j] - potential[j]);
                for l in 0..qs.len() {
                    a += PI * jg.hess[j][l] * contraction[j][l];
                }
            }
            direct += w * e * d;
            alt -= w * e * jf.value * a;
        }
        (direct, alt)
    });
    let direct: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let alt: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(DivergenceCrossCheck {
        direct: Estimate::from_samples(&direct),
        alternative: Estimate::from_samples(&alt),
        difference: paired(&direct, &alt),
    })
}
