//! The check suites. Each suite reads its sizes from the config and returns
//! gated checks, CSV series and ungated diagnostics.

use std::f64::consts::{E, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::bump::Bump;
use crate::dynamics::{
    bracket_check, driving_from_state, mass_ensemble, ou_checks, simulate_symmetric, total_mass_stats, SymmetricDynamics,
};
use crate::error::Result;
use crate::fields::{cameron_martin_check, gaussian_identity_check, sample_trace, CouplingParams, GaussianIdentity};
use crate::generator::{
    combine, default_tuples, derivative_martingale_identity, dirichlet_form, divergence_cross_check, ibp_hdmuf_check,
    ibp_potential_check, invariance_check, projected_symmetric_ibp_check, pure_gravity_solve, qle_drift_compare,
    rotational_invariance_check, second_moment_growth, tilde_df_shift_check, CylindricalFunctional, InvarianceSetup,
    Profile, Rho, Sampling,
};
use crate::gmc::{chaos_measure, inverse_map_sweep, mass_moments, second_moment_limit, second_moment_target, ChaosSign, CircleMeasure};
use crate::kernels::{boundary_localization_suite, contraction_suite, kernel_u_check};
use crate::loewner::{conformal_radius, flow, hadamard_check, smooth_metric_driving, DrivingPath};
use crate::mc::stream;
use crate::spectral::{spectral_identities, BoundaryField, Circle, DiskTestFunction, RadialBump};
use crate::tolerances as tol;

use super::config::ExperimentConfig;
use super::report::{Check, Series, SuiteOutput};

const K: f64 = tol::MC_SIGMAS;

/// Check inventory of each suite: `(id, description)`. Ids ending in `.*`
/// stand for a family indexed at run time.
pub fn inventory(suite: &str) -> Option<&'static [(&'static str, &'static str)]> {
    Some(match suite {
        "identities" => &[
            ("pure_gravity.gamma_squared", "gamma^2 = 8/3 on the accepted branch"),
            ("pure_gravity.d_gamma", "d_gamma = 4 on the accepted branch"),
            ("pure_gravity.q", "Q = 2 xi + 1/(2 xi) = 5/sqrt(6)"),
            ("pure_gravity.residuals", "largest residual of the four sufficient conditions"),
            ("spectral.conjugation", "FFT conjugation against the coefficient rule"),
            ("spectral.eigenrelation", "d_nH e_k = -lambda_k e_k"),
            ("spectral.normal_tangential", "d_nH p = -d_t p~"),
            ("spectral.double_conjugate", "p~~ = -(p - mean p)"),
            ("spectral.antisymmetry", "int p~ q = -int p q~"),
            ("kernel_v.row_integral", "int V_p(., w) dlambda against its closed form"),
            ("kernel_v.diagonal", "diagonal of V_p against its closed form"),
            ("kernel_v.symmetric", "symmetric contraction of V_p, V_q"),
            ("kernel_v.antisymmetric", "antisymmetric contraction A(p, q)"),
            ("kernel_v.mean_split", "A(p, q) with the means split off"),
            ("kernel_v.sign_formula", "A(p, q) = -sgn(p, q)(pq + p~q~) for pure degrees"),
            ("localization.singular", "int (Hh) D_mu f dlambda localized on the circle"),
            ("localization.mu_term", "int f Re L' dlambda localized on the circle"),
            ("localization.green", "int f_1 G D_mu f_2 dlambda localized on the circle"),
            ("kernel_u", "bulk pairing of D_mu f with Hh against int V_p d_nH h dmu"),
        ],
        "gmc" => &[
            ("gmc.mean_mass", "E|mu_xi| = 2 pi"),
            ("gmc.second_moment", "E|mu_xi|^2 against the truncated quadrature target"),
            ("gmc.inverse_map_decreasing", "inverse-map L2 error decreases over eps = 0.2, 0.1, 0.05"),
        ],
        "loewner" => &[
            ("loewner.uniform_flow", "uniform driving scales g_t(z) = e^t z"),
            ("loewner.conformal_radius", "g_T'(0) from the flow against exp(int |nu_t| dt)"),
            ("loewner.hadamard", "finite-difference Green variation against the Hadamard formula"),
            ("loewner.hadamard_order", "observed convergence order of the Hadamard finite difference"),
            ("loewner.smooth_metric", "driving measure of a smooth metric against exp(-xi phi)/(2 pi)"),
        ],
        "invariance" => &[
            ("invariance.pure_gravity", "bulk expression at pure gravity vanishes"),
            ("invariance.pure_gravity_boundary", "boundary residual at pure gravity vanishes identically"),
            ("invariance.beta", "bulk expression equals the boundary residual, beta perturbed"),
            ("invariance.c", "bulk expression equals the boundary residual, c perturbed"),
            ("invariance.chi", "bulk expression equals the boundary residual, chi perturbed"),
            ("invariance.alpha", "bulk expression equals the boundary residual, alpha perturbed"),
            ("invariance.custom", "bulk expression equals the boundary residual at the configured couplings"),
        ],
        "dirichlet" => &[
            ("dirichlet.decomposition", "E(F, G) = symmetric + antisymmetric closed forms"),
            ("dirichlet.swap", "E(G, F) = symmetric - antisymmetric closed forms"),
            ("dirichlet.exchange", "E(F, G) + E(G, F) = twice the symmetric form"),
            ("dirichlet.self_antisymmetric", "antisymmetric part vanishes for F = G"),
            ("dirichlet.divergence", "direct and divergence-form assemblies of int <DF V_DG, mu> drho"),
        ],
        "dynamics" => &[
            ("dynamics.mass_slope", "regression slope of E|mu_t| against 2 pi^2 xi^2"),
            ("dynamics.final_variance", "Var |mu_T| against the square-root diffusion formula"),
            ("dynamics.bracket", "empirical bracket of int p dmu_t against (2 pi xi)^2 int p^2 dmu_t dt"),
            ("dynamics.martingale.*", "compensated increments of int p dmu_t have mean 0"),
            ("dynamics.ou_variance.*", "long-run variance of mode k of the xi = 0 baseline equals 2 pi/lambda_k"),
            ("dynamics.ou_decay.*", "mean of mode 1 decays as e^{-pi t}"),
        ],
        "appendix" => &[
            ("appendix.gaussian.*", "finite-dimensional Gaussian integration-by-parts and shift identities"),
            ("appendix.cameron_martin", "Cameron-Martin shift of the boundary trace"),
            ("appendix.tilde_df_shift", "DF~ at the shifted field against the angular derivative"),
            ("appendix.derivative_martingale", "derivative-martingale representation"),
            ("appendix.qle", "generator drift against the quantum Loewner evolution drift"),
            ("appendix.projected_ibp", "projected symmetric integration by parts"),
            ("appendix.projection_identity", "E[Pi_P(d_nH h) h] = -2 pi (S_2 - S_2^1)"),
            ("appendix.rotation", "rotational integration by parts under rho"),
            ("appendix.hdmuf", "integration by parts of int (Hh) D_mu f under rho"),
            ("appendix.potential", "integration by parts against the potential DV"),
            ("appendix.second_moment_growth", "second moment of the projected pairing grows with the cutoff"),
        ],
        _ => return None,
    })
}

/// Whether `id` is listed in the inventory of `suite`.
pub fn is_listed(suite: &str, id: &str) -> bool {
    inventory(suite).is_some_and(|inv| {
        inv.iter().any(|(pat, _)| match pat.strip_suffix(".*") {
            Some(prefix) => id.strip_prefix(prefix).is_some_and(|rest| rest.starts_with('.') && rest.len() > 1),
            None => *pat == id,
        })
    })
}

pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    match cfg.suite.as_str() {
        "identities" => identities(cfg),
        "gmc" => gmc(cfg),
        "loewner" => loewner(cfg),
        "invariance" => invariance(cfg),
        "dirichlet" => dirichlet(cfg),
        "dynamics" => dynamics(cfg),
        "appendix" => appendix(cfg),
        other => Err(crate::Error::UnknownSuite(other.to_string())),
    }
}

fn random_field<R: Rng>(n: usize, rng: &mut R) -> BoundaryField {
    BoundaryField::from_coeffs((0..2 * n + 1).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn basis_combination(terms: &[(usize, f64)]) -> BoundaryField {
    let n = terms.iter().map(|(k, _)| k.div_ceil(2)).max().unwrap_or(1).max(1);
    let ps: Vec<BoundaryField> = terms.iter().map(|(k, _)| BoundaryField::basis(n, *k)).collect();
    let c: Vec<f64> = terms.iter().map(|t| t.1).collect();
    combine(&ps, &c)
}

/// Two-symbol functionals with bump profiles; `G` shares the mean-carrying symbol.
fn functional_pair() -> Result<(CylindricalFunctional, CylindricalFunctional)> {
    let pf = Profile::new(vec![Bump::new(0.3, 2.0), Bump::new(-0.2, 2.5)])?;
    let f = CylindricalFunctional::new(
        vec![basis_combination(&[(0, 1.0), (1, 0.5)]), basis_combination(&[(3, 1.0), (2, 0.4)])],
        pf,
    )?;
    let pg = Profile::new(vec![Bump::new(0.0, 2.2), Bump::new(0.1, 2.0)])?;
    let g = CylindricalFunctional::new(
        vec![basis_combination(&[(0, 1.0), (1, 0.5)]), basis_combination(&[(2, 1.0), (4, 0.3)])],
        pg,
    )?;
    Ok((f, g))
}

fn angular_disk_function() -> Result<DiskTestFunction> {
    let t = &(&BoundaryField::constant(3, 1.0) + &BoundaryField::cos_mode(3, 1, 0.6)) + &BoundaryField::sin_mode(3, 3, -0.4);
    Ok(DiskTestFunction::new(RadialBump::new(0.3, 0.65)?, t))
}

fn identities(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let pg = pure_gravity_solve();
    out.push(Check::abs("pure_gravity.gamma_squared", "gamma^2", pg.gamma * pg.gamma, 8.0 / 3.0, tol::ALGEBRAIC));
    out.push(Check::abs("pure_gravity.d_gamma", "d_gamma", pg.d_gamma, 4.0, tol::ALGEBRAIC));
    out.push(Check::abs("pure_gravity.q", "Q against 5/sqrt(6)", pg.q, 5.0 / 6f64.sqrt(), tol::ALGEBRAIC));
    let worst = pg.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    out.push(Check::abs("pure_gravity.residuals", "max |residual|", worst, 0.0, tol::ALGEBRAIC));
    out.note("pure_gravity.q_minus_two_xi_plus_inverse", pg.q - 2.0 * pg.xi - 0.5 / pg.xi);

    // degree-<=16 polynomials
    let deg = cfg.degree.min(16);
    let mut rng = stream(cfg.seed, "spectral-identities", 0);
    let mut worst = [0.0f64; 5];
    for d in 1..=deg {
        let r = spectral_identities(&random_field(d, &mut rng), &random_field(deg, &mut rng));
        for (w, v) in worst.iter_mut().zip([r.conjugation, r.eigenrelation, r.normal_tangential, r.double_conjugate, r.antisymmetry]) {
            *w = w.max(v);
        }
    }
    for (id, v) in ["conjugation", "eigenrelation", "normal_tangential", "double_conjugate", "antisymmetry"].iter().zip(worst) {
        out.push(Check::abs(&format!("spectral.{id}"), "largest residual over random polynomials", v, 0.0, tol::SPECTRAL));
    }

    let mut rng = stream(cfg.seed, "contraction", 0);
    let p = random_field(8, &mut rng);
    let q = random_field(6, &mut rng);
    let mut reports = vec![contraction_suite(&p, &q, 64)?, contraction_suite(&p, &p, 64)?];
    let pure = contraction_suite(&BoundaryField::cos_mode(5, 2, 1.0), &BoundaryField::cos_mode(5, 5, 1.0), 64)?;
    reports.push(pure);
    let max_of = |f: &dyn Fn(&crate::kernels::ContractionReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
    out.push(Check::abs("kernel_v.row_integral", "largest residual", max_of(&|r| r.row_integral), 0.0, tol::CONTRACTION));
    out.push(Check::abs("kernel_v.diagonal", "largest residual", max_of(&|r| r.diagonal), 0.0, tol::CONTRACTION));
    out.push(Check::abs("kernel_v.symmetric", "largest residual", max_of(&|r| r.symmetric), 0.0, tol::CONTRACTION));
    out.push(Check::abs("kernel_v.antisymmetric", "largest residual", max_of(&|r| r.antisymmetric), 0.0, tol::CONTRACTION));
    out.push(Check::abs("kernel_v.mean_split", "largest residual", max_of(&|r| r.mean_split), 0.0, tol::CONTRACTION));
    out.push(Check::abs("kernel_v.sign_formula", "residual for cos 2t, cos 5t", pure.sign_formula.unwrap_or(f64::NAN), 0.0, tol::CONTRACTION));

    let mut rng = stream(cfg.seed, "localization", 0);
    let h = sample_trace(cfg.degree, &mut rng).h0;
    let mu = chaos_measure(&h, ChaosSign::Minus, CouplingParams::pure_gravity().xi, &Circle::new(cfg.m))?;
    let f1 = angular_disk_function()?;
    let f2 = DiskTestFunction::new(
        RadialBump::new(0.2, 0.5)?,
        &BoundaryField::constant(2, 0.5) + &BoundaryField::sin_mode(2, 2, 0.7),
    );
    let loc = boundary_localization_suite(&f1, &f2, &mu, 64)?;
    out.push(Check::rel("localization.singular", "bulk against boundary", loc.singular.lhs, loc.singular.rhs, tol::QUADRATURE_REL));
    out.push(Check::rel("localization.mu_term", "bulk against boundary", loc.mu_term.lhs, loc.mu_term.rhs, tol::QUADRATURE_REL));
    out.push(Check::rel("localization.green", "bulk against boundary", loc.green.lhs, loc.green.rhs, tol::QUADRATURE_REL));
    let hu = sample_trace(cfg.degree, &mut rng).h0;
    let u = kernel_u_check(&f1, &hu, &mu, 64)?;
    out.push(Check::rel("kernel_u", "bulk against boundary", u.lhs, u.rhs, tol::QUADRATURE_REL));
    Ok(out)
}

fn gmc(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let (m1, m2) = mass_moments(cfg.xi, cfg.degree, cfg.m, cfg.n_samples, cfg.seed);
    out.push(Check::mc("gmc.mean_mass", "E|mu| against 2 pi", &m1, 2.0 * PI, K));
    let target = second_moment_target(cfg.xi, cfg.degree, cfg.m);
    out.push(Check::mc("gmc.second_moment", "E|mu|^2 against the quadrature target", &m2, target, K));
    out.note("gmc.second_moment_limit", second_moment_limit(cfg.xi));

    let eps = [0.2, 0.1, 0.05];
    let p = BoundaryField::basis(cfg.degree, 1);
    let rows = inverse_map_sweep(&p, cfg.xi, &eps, cfg.degree, cfg.m, cfg.sweep_samples, cfg.seed);
    let worst_ratio = rows.windows(2).map(|w| w[1].l2_error / w[0].l2_error).fold(0.0, f64::max);
    out.push(Check::below("gmc.inverse_map_decreasing", "largest ratio of successive L2 errors", worst_ratio, 1.0));
    out.series.push(Series::new(
        "inverse_map",
        &["eps", "l2_error", "variance_ratio"],
        rows.iter().map(|r| vec![r.eps, r.l2_error, r.variance_ratio]).collect(),
    ));
    Ok(out)
}

fn loewner(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let path = DrivingPath::constant(CircleMeasure::uniform(cfg.m, 1.0), 1.0)?;
    let z0 = Complex64::new(0.2, -0.15);
    let tr = flow(&path, z0)?;
    let mut worst = (tr.log_derivative - 1.0).norm();
    let mut rows = Vec::new();
    for &(t, g) in &tr.points {
        let exact = z0 * t.exp();
        worst = worst.max((g - exact).norm());
        rows.push(vec![t, g.re, g.im, exact.re, exact.im]);
    }
    out.push(Check::abs("loewner.uniform_flow", "largest |g_t(z) - e^t z|", worst, 0.0, tol::LOEWNER_FLOW));
    out.series.push(Series::new("uniform_flow", &["t", "re", "im", "exact_re", "exact_im"], rows));

    let bumpy = CircleMeasure::narrow_bump(cfg.m, 2.0, 0.7).combine(1.0, &CircleMeasure::uniform(cfg.m, 0.3), 1.0);
    let cr = conformal_radius(&DrivingPath::constant(bumpy, 1.3)?)?;
    let cr_uniform = conformal_radius(&path)?;
    out.push(Check::rel("loewner.conformal_radius", "flow against exp(int |nu|)", cr.ode, cr.mass, tol::LOEWNER_FLOW));
    out.note("loewner.conformal_radius_uniform_error", (cr_uniform.ode - E).abs());

    let z1 = Complex64::new(0.3, 0.1);
    let z2 = Complex64::new(-0.2, 0.35);
    let speed = &BoundaryField::constant(4, 1.0) + &BoundaryField::cos_mode(4, 1, 0.5);
    let had = hadamard_check(&speed, z1, z2, &[4.0 * cfg.dt, 2.0 * cfg.dt, cfg.dt])?;
    let last = had.rows.last().expect("three steps");
    out.push(Check::rel("loewner.hadamard", "finite difference against formula", last.finite_difference, last.formula, tol::LOEWNER_FIRST_ORDER));
    out.push(Check::abs("loewner.hadamard_order", "observed order", had.rate, 1.0, tol::CONVERGENCE_ORDER));
    out.series.push(Series::new(
        "hadamard",
        &["dt", "finite_difference", "formula", "relative_error"],
        had.rows.iter().map(|r| vec![r.dt, r.finite_difference, r.formula, r.relative_error]).collect(),
    ));

    let phi = BoundaryField::cos_mode(2, 1, 0.1);
    let fit = smooth_metric_driving(&phi, cfg.xi, cfg.dt, 64)?;
    out.push(Check::below("loewner.smooth_metric", "sup relative error of the fitted density", fit.relative_error, tol::LOEWNER_FIRST_ORDER));
    let circle = Circle::new(64);
    out.series.push(Series::new(
        "smooth_metric",
        &["theta", "fitted", "target"],
        circle.thetas().into_iter().zip(fit.fitted.iter().zip(&fit.target)).map(|(t, (a, b))| vec![t, *a, *b]).collect(),
    ));
    Ok(out)
}

fn invariance(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let setup = InvarianceSetup::new(InvarianceSetup::default_functional(cfg.m)?, cfg.degree, cfg.m)?;
    let mut tuples = default_tuples(cfg.delta);
    let mut names = vec!["pure_gravity", "beta", "c", "chi", "alpha"];
    if !cfg.coupling.is_empty() {
        let mut t = CouplingParams::pure_gravity();
        for (k, v) in &cfg.coupling {
            match k.as_str() {
                "alpha" => {
                    // omega = -2Q - alpha
                    t.omega -= v - t.alpha;
                    t.alpha = *v;
                }
                "chi" => t.chi = *v,
                "beta" => t.beta = *v,
                _ => t.c = *v,
            }
        }
        tuples.push(t);
        names.push("custom");
    }
    let rows = invariance_check(&setup, &tuples, cfg.n_samples, cfg.seed)?;
    let pg = &rows[0];
    out.push(Check::mc("invariance.pure_gravity", "bulk expression", &pg.lhs, 0.0, K));
    out.push(Check::abs("invariance.pure_gravity_boundary", "boundary residual", pg.rhs.mean, 0.0, 1e-12));
    for (name, row) in names.iter().zip(&rows).skip(1) {
        out.push(Check::paired(&format!("invariance.{name}"), "bulk against boundary residual", row.lhs.mean, row.rhs.mean, &row.difference, K));
        out.note(&format!("invariance.{name}.rhs_z"), row.rhs.z_score(0.0));
    }
    out.series.push(Series::new(
        "invariance",
        &["alpha", "chi", "beta", "c", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "difference", "difference_stderr"],
        rows.iter()
            .map(|r| {
                let p = &r.params;
                vec![p.alpha, p.chi, p.beta, p.c, r.lhs.mean, r.lhs.stderr, r.rhs.mean, r.rhs.stderr, r.difference.mean, r.difference.stderr]
            })
            .collect(),
    ));
    Ok(out)
}

fn sampling(cfg: &ExperimentConfig) -> Sampling {
    Sampling { degree: cfg.degree, m: cfg.m, n_samples: cfg.n_samples, seed: cfg.seed }
}

fn dirichlet(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let (f, g) = functional_pair()?;
    let s = sampling(cfg);
    let r = dirichlet_form(&f, &g, &s)?;
    let (sym, asym) = (r.symmetric.mean, r.antisymmetric.mean);
    out.push(Check::paired("dirichlet.decomposition", "E(F, G) against sym + antisym", r.forward.mean, sym + asym, &r.forward_residual, K));
    out.push(Check::paired("dirichlet.swap", "E(G, F) against sym - antisym", r.backward.mean, sym - asym, &r.backward_residual, K));
    out.push(Check::paired("dirichlet.exchange", "E(F, G) + E(G, F) against 2 sym", r.forward.mean + r.backward.mean, 2.0 * sym, &r.exchange_residual, K));
    let same = dirichlet_form(&f, &f, &s)?;
    out.push(Check::mc("dirichlet.self_antisymmetric", "antisymmetric part for F = G", &same.antisymmetric, 0.0, K));
    let d = divergence_cross_check(&f, &g, &s)?;
    out.push(Check::paired("dirichlet.divergence", "direct against divergence form", d.direct.mean, d.alternative.mean, &d.difference, K));
    out.note("dirichlet.antisymmetric_z", r.antisymmetric.z_score(0.0));
    let est = [r.forward, r.backward, r.symmetric, r.antisymmetric];
    out.series.push(Series::new(
        "dirichlet",
        &["forward", "forward_stderr", "backward", "backward_stderr", "symmetric", "symmetric_stderr", "antisymmetric", "antisymmetric_stderr"],
        vec![est.iter().flat_map(|e| [e.mean, e.stderr]).collect()],
    ));
    Ok(out)
}

/// Degree of the Ornstein-Uhlenbeck baseline: eight modes.
const OU_DEGREE: usize = 4;

fn dynamics(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let d = SymmetricDynamics::new(cfg.xi, cfg.dt, cfg.degree)?;
    let steps = ((cfg.horizon / cfg.dt).round() as usize).max(1);
    let record_every = (steps / 50).max(1);
    let (times, masses, absorbed) = mass_ensemble(&d, cfg.m, steps, record_every, cfg.n_samples, cfg.seed)?;
    let stats = total_mass_stats(&times, &masses, cfg.xi)?;
    out.push(Check::rel_to("dynamics.mass_slope", "slope of E|mu_t|", stats.slope.mean, stats.expected_slope, tol::MASS_SLOPE_REL));
    out.push(Check::mc("dynamics.final_variance", "Var |mu_T|", &stats.final_variance, stats.expected_final_variance, K));
    out.note("dynamics.slope_stderr", stats.slope.stderr);
    out.note("dynamics.scaled_slope", stats.scaled_slope);
    out.note("dynamics.absorbed_fraction", absorbed as f64 / (cfg.n_samples * steps * cfg.m) as f64);
    out.series.push(Series::new(
        "mass",
        &["t", "mean", "stderr", "expected"],
        stats.times.iter().zip(&stats.mean).map(|(t, e)| vec![*t, e.mean, e.stderr, 2.0 * PI + stats.expected_slope * t]).collect(),
    ));

    let p = &BoundaryField::constant(2, 1.0) + &BoundaryField::cos_mode(2, 1, 1.0);
    let br = bracket_check(&d, &p, cfg.m, steps, 3, cfg.bracket_paths, cfg.seed)?;
    out.push(Check::rel_to("dynamics.bracket", "empirical against predicted bracket", br.empirical.mean, br.predicted.mean, tol::BRACKET_REL));
    for (k, inc) in br.martingale_increments.iter().enumerate() {
        out.push(Check::mc(&format!("dynamics.martingale.{}", k + 1), "compensated increment", inc, 0.0, K));
    }

    // one recorded path, and the growth it drives
    let mut rng = stream(cfg.seed, "path-dump", 0);
    let path = simulate_symmetric(&d, &CircleMeasure::uniform(cfg.m, 2.0 * PI), steps, record_every, &mut rng)?;
    let (header, rows) = path.csv_rows();
    out.series.push(Series {
        name: "path".into(),
        header,
        rows: rows.into_iter().map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()).collect(),
    });
    match driving_from_state(&path, cfg.xi) {
        Ok((driving, dropped)) => {
            out.note("dynamics.driving_dropped_steps", dropped as f64);
            out.note("dynamics.driving_capacity", driving.total_mass_integral());
        }
        Err(_) => out.note("dynamics.driving_dropped_steps", path.times.len() as f64),
    }

    let ou = ou_checks(OU_DEGREE, cfg.dt, 5.0 / PI, 5.0, &[0.1, 0.3], cfg.n_samples, cfg.seed);
    for (k, (v, e)) in ou.mode_variances.iter().zip(&ou.expected_variances).enumerate() {
        out.push(Check::mc(&format!("dynamics.ou_variance.{}", k + 1), "stationary mode variance", v, *e, K));
    }
    for (i, (m, e)) in ou.decay_means.iter().zip(&ou.expected_decay).enumerate() {
        out.push(Check::rel_to(&format!("dynamics.ou_decay.{}", i + 1), "mean of mode 1", m.mean, *e, tol::OU_DECAY_REL));
        out.note(&format!("dynamics.ou_decay.{}.stderr", i + 1), m.stderr);
    }
    out.series.push(Series::new(
        "ou_variance",
        &["k", "variance", "stderr", "expected"],
        ou.mode_variances.iter().zip(&ou.expected_variances).enumerate().map(|(k, (v, e))| vec![(k + 1) as f64, v.mean, v.stderr, *e]).collect(),
    ));
    Ok(out)
}

fn appendix(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let c4 = DMatrix::from_row_slice(4, 4, &[1.0, 0.3, 0.2, 0.4, 0.3, 0.8, 0.25, 0.1, 0.2, 0.25, 0.6, 0.3, 0.4, 0.1, 0.3, 1.2]);
    let c3 = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.5, 0.2, 0.7, -0.3, 0.5, -0.3, 1.1]);
    let c2 = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.5]);
    let c1 = DMatrix::from_element(1, 1, 1.0);
    for (name, which, cov) in [
        ("ibp1", GaussianIdentity::Ibp1, &c1),
        ("ibp2", GaussianIdentity::Ibp2, &c3),
        ("cm1", GaussianIdentity::Cm1, &c2),
        ("cm2", GaussianIdentity::Cm2, &c4),
        ("cm3", GaussianIdentity::Cm3, &c4),
    ] {
        let r = gaussian_identity_check(which, cov, cfg.n_samples, cfg.seed)?;
        out.push(Check::mc(&format!("appendix.gaussian.{name}"), "Monte Carlo against closed form", &r.lhs, r.rhs, K));
    }
    let p = &BoundaryField::cos_mode(4, 1, 0.3) + &BoundaryField::sin_mode(4, 3, 0.2);
    let e2 = BoundaryField::basis(4, 2);
    let fcm = |h: &BoundaryField| (h.inner(&p) * 0.2).tanh() + (0.1 * h.inner(&e2)).cos();
    let (a, b, d) = cameron_martin_check(&p, 0.7, fcm, 4, cfg.n_samples, cfg.seed);
    out.push(Check::paired("appendix.cameron_martin", "shifted against reweighted", a.mean, b.mean, &d, K));

    let (f, g) = functional_pair()?;
    let xi = CouplingParams::pure_gravity().xi;
    let h = sample_trace(cfg.degree, &mut stream(cfg.seed, "appendix-field", 0)).h0;
    let shift = tilde_df_shift_check(&f, &h, xi)?;
    out.push(Check::abs("appendix.tilde_df_shift", "largest residual over the angle", shift, 0.0, tol::DETERMINISTIC));
    let dm = derivative_martingale_identity(cfg.degree, xi, cfg.seed);
    out.push(Check::abs(
        "appendix.derivative_martingale",
        "largest residual relative to max(1, |rhs|)",
        dm.max_abs_residual / dm.scale.max(1.0),
        0.0,
        tol::DETERMINISTIC,
    ));

    let mu = chaos_measure(&h, ChaosSign::Minus, xi, &Circle::new(cfg.m))?;
    let nu = mu.scaled(1.0 / mu.total_mass());
    let angular = DiskTestFunction::new(
        RadialBump::new(0.3, 0.65)?,
        &(&BoundaryField::constant(3, 0.7) + &BoundaryField::cos_mode(3, 1, 0.6)) + &BoundaryField::sin_mode(3, 3, -0.4),
    );
    let qle = qle_drift_compare(&angular, &h, &nu)?;
    out.push(Check::rel("appendix.qle", "generator drift against QLE drift plus offset", qle.module, qle.ms + qle.offset, tol::QUADRATURE_REL));

    let s = sampling(cfg);
    let ps = vec![BoundaryField::basis(2, 0), BoundaryField::basis(2, 1)];
    let phi = Profile::new(vec![Bump::new(0.2, 2.5), Bump::new(0.0, 2.0)])?;
    let ibp = projected_symmetric_ibp_check(&ps, phi, &g, &s)?;
    out.push(Check::mc("appendix.projected_ibp", "paired residual", &ibp.residual, 0.0, K));
    out.push(Check::abs("appendix.projection_identity", "largest pointwise residual", ibp.spectral_residual, 0.0, tol::SPECTRAL));

    let rho = Rho::pure_gravity();
    let ell = basis_combination(&[(1, 0.7), (4, -0.5)]);
    let rot = rotational_invariance_check(&ell, &f, &rho, &s)?;
    out.push(Check::mc("appendix.rotation", "expectation", &rot, 0.0, K));
    let hd = ibp_hdmuf_check(&angular, &f, &g, &rho, &s)?;
    out.push(Check::mc("appendix.hdmuf", "expectation", &hd, 0.0, K));
    let pot = ibp_potential_check(
        &basis_combination(&[(0, 1.0), (2, 0.4)]),
        &basis_combination(&[(0, 0.5), (1, 1.0)]),
        &f,
        &Rho { xi: 0.4, c: -0.05 },
        0.0,
        &s,
    )?;
    out.push(Check::mc("appendix.potential", "expectation", &pot.residual, 0.0, K));

    let ks = [1, 2, 4, 8, 16, 32];
    let growth = second_moment_growth(xi, &ks);
    let min_step = growth.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    out.push(Check::below("appendix.second_moment_growth", "minus the smallest increment", -min_step, 0.0));
    out.series.push(Series::new(
        "second_moment_growth",
        &["cutoff", "second_moment"],
        ks.iter().zip(&growth).map(|(k, v)| vec![*k as f64, *v]).collect(),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;

    use super::*;

    fn small(suite: &str, extra: &[(&str, &str)]) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(suite, 5, PathBuf::new()).unwrap();
        let base = [("n", "4"), ("m", "64"), ("n_samples", "100"), ("sweep_samples", "100"), ("bracket_paths", "100"), ("t", "0.02")];
        c.apply(base.iter().chain(extra).copied()).unwrap();
        c
    }

    #[test]
    fn emitted_ids_are_in_the_inventory() {
        for suite in super::super::SUITES {
            let extra: &[(&str, &str)] = if suite == "invariance" { &[("beta", "0.05")] } else { &[] };
            let out = run_suite(&small(suite, extra)).unwrap_or_else(|e| panic!("{suite}: {e}"));
            assert!(!out.checks.is_empty());
            for c in &out.checks {
                assert!(is_listed(suite, &c.id), "{suite}: {} not listed", c.id);
            }
            if suite == "invariance" {
                assert_eq!(out.checks.last().unwrap().id, "invariance.custom");
            }
        }
    }

    #[test]
    fn family_patterns() {
        assert!(is_listed("dynamics", "dynamics.ou_variance.3"));
        assert!(!is_listed("dynamics", "dynamics.ou_variance."));
        assert!(!is_listed("dynamics", "dynamics.ou_variance"));
        assert!(!is_listed("gmc", "dynamics.bracket"));
        assert!(inventory("nope").is_none());
    }
}
