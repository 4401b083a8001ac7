use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bump::Bump;
use crate::fields::sample_trace;
use crate::spectral::{RadialBump, SQRT_2PI};

fn field(seed: u64, n: usize) -> BoundaryField {
    sample_trace(n, &mut ChaCha8Rng::seed_from_u64(seed)).h0
}

fn angular_f() -> DiskTestFunction {
    let t = &(&BoundaryField::constant(3, 0.7) + &BoundaryField::cos_mode(3, 1, 0.6)) + &BoundaryField::sin_mode(3, 3, -0.4);
    DiskTestFunction::new(RadialBump::new(0.3, 0.65).unwrap(), t)
}

fn e(n: usize, k: usize) -> BoundaryField {
    BoundaryField::basis(n, k)
}

fn lin(terms: &[(usize, f64)]) -> BoundaryField {
    let n = terms.iter().map(|(k, _)| k.div_ceil(2)).max().unwrap_or(1).max(1);
    let c: Vec<f64> = terms.iter().map(|t| t.1).collect();
    let ps: Vec<BoundaryField> = terms.iter().map(|(k, _)| e(n, *k)).collect();
    combine(&ps, &c)
}

fn functional_f() -> CylindricalFunctional {
    let profile = Profile::new(vec![Bump::new(0.3, 2.0), Bump::new(-0.2, 2.5)]).unwrap();
    CylindricalFunctional::new(vec![lin(&[(0, 1.0), (1, 0.5)]), lin(&[(3, 1.0), (2, 0.4)])], profile).unwrap()
}

fn functional_g() -> CylindricalFunctional {
    let profile = Profile::new(vec![Bump::new(0.0, 2.2), Bump::new(0.1, 2.0)]).unwrap();
    CylindricalFunctional::new(vec![lin(&[(0, 1.0), (1, 0.5)]), lin(&[(2, 1.0), (4, 0.3)])], profile).unwrap()
}

fn sampling(n_samples: usize, seed: u64) -> Sampling {
    Sampling { degree: 16, m: 256, n_samples, seed }
}

#[test]
fn boundary_and_bulk_drift_agree() {
    let params = CouplingParams::new(1.5, 3.7, -1.2, -2.1, 0.3, -0.05).unwrap();
    let f = angular_f();
    let profile = Profile::new(vec![Bump::new(0.0, 1.0)]).unwrap();
    let functional = CylindricalFunctional::from_functions(vec![f], profile, 256).unwrap();
    for seed in 0..3 {
        let h = field(seed, 16);
        let mu = chaos_measure(&h, ChaosSign::Minus, params.xi, &Circle::new(256)).unwrap();
        let cmp = drift_pair(&functional, 0, &h, &mu, &params).unwrap();
        assert!(cmp.relative() < 1e-4, "{cmp:?}");
    }
}

#[test]
fn drift_with_zero_measure_is_the_beta_term() {
    let params = CouplingParams::new(1.5, 3.7, -1.2, -2.1, 0.3, 0.0).unwrap();
    let p = lin(&[(0, 0.8), (3, 0.2)]);
    let b = drift(&p, &field(1, 8), &CircleMeasure::zero(64), &params);
    assert!((b + 0.3 * p.integral()).abs() < 1e-14);
}

#[test]
fn drift_at_flat_field_and_uniform_measure() {
    let params = CouplingParams::new(1.5, 3.7, -1.2, -2.1, 0.3, 0.0).unwrap();
    // p = e_0 + e_1 with h = 0, mu = lambda / 2 pi
    let p = lin(&[(0, 1.0), (1, 1.0)]);
    let mu = CircleMeasure::uniform(128, 1.0);
    let b = drift(&p, &BoundaryField::zeros(4), &mu, &params);
    let hand = 2.0 * PI * (params.chi - params.alpha) / SQRT_2PI - params.beta * SQRT_2PI;
    assert!((b - hand).abs() < 1e-12, "{b} vs {hand}");
}

#[test]
fn pure_gravity_drift_matches_reduced_form() {
    let params = CouplingParams::pure_gravity();
    let xi = params.xi;
    let h = field(4, 16);
    let mu = chaos_measure(&h, ChaosSign::Minus, xi, &Circle::new(256)).unwrap();
    let p = lin(&[(0, 0.4), (1, 0.5), (4, -0.3)]);
    let dn = mu.integrate(&values_on_grid(&p.dirichlet_to_neumann(), 256));
    let pm = mu.integrate(&values_on_grid(&p, 256));
    let reduced = v_mu_pairing(&p, &h.dirichlet_to_neumann(), &mu) + 2.0 * PI * (2.0 * xi + 0.5 / xi) * dn + 2.0 * PI * xi * pm;
    assert!((drift(&p, &h, &mu, &params) - reduced).abs() < 1e-10 * reduced.abs().max(1.0));
}

#[test]
fn diffusion_examples() {
    let one = BoundaryField::constant(1, 1.0);
    let unit = CircleMeasure::uniform(64, 1.0);
    assert!((diffusion(&one, &one, &unit) - 4.0 * PI * PI).abs() < 1e-12);
    assert!((diffusion(&e(2, 1), &e(2, 1), &unit) - 2.0 * PI).abs() < 1e-12);
    assert!(diffusion(&e(2, 1), &e(2, 2), &unit).abs() < 1e-12);
    assert_eq!(diffusion(&one, &one, &CircleMeasure::zero(64)), 0.0);
}

#[test]
fn generator_on_a_quadratic_profile_matches_components() {
    let params = CouplingParams::pure_gravity();
    let p = lin(&[(0, 1.0), (1, 0.3)]);
    let bump = Bump::new(0.2, 3.0);
    let functional = CylindricalFunctional::new(vec![p.clone()], Profile::new(vec![bump]).unwrap()).unwrap();
    let h = field(5, 16);
    let mu = chaos_measure(&h, ChaosSign::Minus, params.xi, &Circle::new(256)).unwrap();
    let x = p.inner(&h);
    let [_, d1, d2] = bump.eval(x);
    let hand = drift(&p, &h, &mu, &params) * d1 + 0.5 * diffusion(&p, &p, &mu) * d2;
    let got = apply_generator_with(&functional, &h, &mu, &params).unwrap();
    assert!((got - hand).abs() < 1e-12 * hand.abs().max(1.0));
    assert!(apply_generator(&functional, &h, &params, 256).is_ok());
}

#[test]
fn guard_rejects_mean_zero_symbols() {
    let functional =
        CylindricalFunctional::new(vec![e(2, 1)], Profile::new(vec![Bump::new(0.0, 1.0)]).unwrap()).unwrap();
    let params = CouplingParams::pure_gravity();
    let r = apply_generator(&functional, &field(0, 4), &params, 64);
    assert!(matches!(r, Err(Error::GuardViolated(_))));
}

#[test]
fn missing_realization_is_reported() {
    let functional = functional_f();
    let h = field(0, 4);
    let mu = CircleMeasure::uniform(64, 1.0);
    let r = drift_pair(&functional, 0, &h, &mu, &CouplingParams::pure_gravity());
    assert!(matches!(r, Err(Error::MissingRealization)));
}

#[test]
fn pure_gravity_solution() {
    let pg = pure_gravity_solve();
    assert!((pg.gamma * pg.gamma - 8.0 / 3.0).abs() < 1e-14);
    assert_eq!(pg.d_gamma, 4.0);
    assert!((pg.xi - 1.0 / 6f64.sqrt()).abs() < 1e-15);
    assert!((pg.q - 5.0 / 6f64.sqrt()).abs() < 1e-14);
    assert!((pg.q - 1.25 * pg.gamma).abs() < 1e-14);
    assert!((pg.q - 2.0 * pg.xi - 0.5 / pg.xi).abs() < 1e-14);
    assert!((pg.two_pi_c + pg.xi).abs() < 1e-15);
    assert!(pg.residuals.iter().all(|r| r.abs() < 1e-14), "{:?}", pg.residuals);
    assert!(pg.rejected.iter().all(|b| b.gamma_squared >= 4.0));
    assert_eq!(pg.rejected.len(), 2);
}

#[test]
fn bulk_response_matches_direct_quadrature() {
    let params = CouplingParams::new(1.5, 3.7, -1.2, -2.1, 0.3, 0.0).unwrap();
    let f = angular_f();
    let bulk = BulkResponse::new(std::slice::from_ref(&f), 8, 128, 64).unwrap();
    let h = field(7, 8);
    let mu = chaos_measure(&h, ChaosSign::Minus, params.xi, &Circle::new(128)).unwrap();
    let terms = bulk.evaluate(&h, &mu);
    let direct = drift_bulk(&f, &h, &mu, &params, 64).unwrap();
    let got = terms.drift(0, &params);
    assert!((got - direct).abs() < 1e-6 * direct.abs(), "{got} vs {direct}");
}

#[test]
fn symbol_trimming_keeps_significant_modes() {
    let p = lin(&[(0, 1.0), (3, 1e-3), (8, 1e-20)]);
    let t = trim_symbol(&p, 1e-16);
    assert_eq!(t.degree(), 2);
    assert_eq!(t.coeffs()[3], 1e-3);
}

#[test]
fn invariance_rows_agree_on_a_small_run() {
    let functional = InvarianceSetup::default_functional(256).unwrap();
    let setup = InvarianceSetup::new(functional, 16, 256).unwrap();
    assert!(setup.sigma()[(0, 0)] > 0.0);
    let rows = invariance_check(&setup, &default_tuples(0.1), 3000, 11).unwrap();
    assert_eq!(rows.len(), 5);
    // at pure gravity the boundary residual vanishes identically
    assert!(rows[0].rhs.mean.abs() < 1e-12);
    for row in &rows {
        assert!(row.difference.z_score(0.0) < 3.0, "{row:?}");
    }
    // the beta perturbation reduces to one term
    assert!(rows[1].coefficients[2] == 0.1 && rows[1].rhs.mean != 0.0);
}

/// For one radial function every term is a multiple of `|mu|` and the
/// zero-mode integration by parts closes sample by sample, including the
/// `c` tuple that fixes the `|mu| psi~` coefficient.
#[test]
fn invariance_is_exact_per_sample_for_a_radial_function() {
    let f = DiskTestFunction::radial(0.3, 0.6, 1.0).unwrap();
    let profile = Profile::new(vec![Bump::new(0.0, 1.2)]).unwrap();
    let functional = CylindricalFunctional::from_functions(vec![f], profile, 256).unwrap();
    let setup = InvarianceSetup::new(functional, 16, 256).unwrap();
    let rows = invariance_check(&setup, &default_tuples(0.1), 200, 4).unwrap();
    assert!(rows[2].rhs.mean.abs() > 1e-3);
    for row in &rows {
        assert!(row.difference.mean.abs() < 1e-9 && row.difference.stderr < 1e-9, "{row:?}");
    }
}

#[test]
fn invariance_rejects_mixed_xi() {
    let functional = InvarianceSetup::default_functional(128).unwrap();
    let setup = InvarianceSetup::new(functional, 8, 128).unwrap();
    let other = CouplingParams::new(1.0, 3.0, 0.0, 0.0, 0.0, 0.0).unwrap();
    assert!(invariance_check(&setup, &[CouplingParams::pure_gravity(), other], 10, 0).is_err());
}

#[test]
fn dirichlet_decomposition_on_a_small_run() {
    let (f, g) = (functional_f(), functional_g());
    let r = dirichlet_form(&f, &g, &sampling(3000, 3)).unwrap();
    assert!(r.forward_residual.z_score(0.0) < 3.0, "{r:?}");
    assert!(r.backward_residual.z_score(0.0) < 3.0, "{r:?}");
    assert!(r.exchange_residual.z_score(0.0) < 3.0, "{r:?}");
    let same = dirichlet_form(&f, &f, &sampling(500, 3)).unwrap();
    assert!(same.antisymmetric.mean.abs() < 1e-12);
}

#[test]
fn divergence_assembly_agrees() {
    let r = divergence_cross_check(&functional_f(), &functional_g(), &sampling(2000, 5)).unwrap();
    assert!(r.difference.z_score(0.0) < 3.0, "{r:?}");
}

#[test]
fn rotation_lemma() {
    let ell = lin(&[(1, 0.7), (4, -0.5)]);
    let r = rotational_invariance_check(&ell, &functional_f(), &Rho::pure_gravity(), &sampling(3000, 2)).unwrap();
    assert!(r.z_score(0.0) < 3.0, "{r:?}");
    let flat = rotational_invariance_check(&BoundaryField::constant(2, 1.0), &functional_f(), &Rho::pure_gravity(), &sampling(200, 2))
        .unwrap();
    assert!(flat.z_score(0.0) < 3.0, "{flat:?}");
}

#[test]
fn rotation_lemma_without_chaos() {
    // xi = 0: mu = lambda, the second term drops and the first integrates a derivative
    let ell = lin(&[(1, 0.7), (4, -0.5)]);
    let r = rotational_invariance_check(&ell, &functional_f(), &Rho { xi: 0.0, c: -0.1 }, &sampling(200, 8)).unwrap();
    assert!(r.mean.abs() < 1e-12, "{r:?}");
}

#[test]
fn hdmuf_lemma() {
    let r = ibp_hdmuf_check(&angular_f(), &functional_f(), &functional_g(), &Rho::pure_gravity(), &sampling(2000, 4)).unwrap();
    assert!(r.z_score(0.0) < 3.0, "{r:?}");
    // radial f with vanishing integral has p = 0 and every term drops
    let inner = DiskTestFunction::radial(0.2, 0.4, 1.0).unwrap();
    let outer = DiskTestFunction::radial(0.5, 0.7, 1.0).unwrap();
    let ratio = {
        let g = PolarGrid::covering(&[&inner, &outer], BULK_RADIAL_NODES, 64).unwrap();
        g.integrate(&inner.sample(&g).0) / g.integrate(&outer.sample(&g).0)
    };
    let balanced = inner.plus(&outer.scaled(-ratio));
    let r = ibp_hdmuf_check(&balanced, &functional_f(), &functional_g(), &Rho::pure_gravity(), &sampling(50, 4)).unwrap();
    assert!(r.mean.abs() < 1e-8, "{r:?}");
    assert!(r.stderr < 1e-8);
}

#[test]
fn potential_lemma_and_its_c_slope() {
    let ell = lin(&[(0, 1.0), (2, 0.4)]);
    let k = lin(&[(0, 0.5), (1, 1.0)]);
    let rho = Rho { xi: 0.4, c: -0.05 };
    let r = ibp_potential_check(&ell, &k, &functional_f(), &rho, 0.0, &sampling(3000, 6)).unwrap();
    assert!(r.residual.z_score(0.0) < 3.0, "{r:?}");
    let shifted = ibp_potential_check(&ell, &k, &functional_f(), &rho, 0.3, &sampling(3000, 6)).unwrap();
    assert!(shifted.deviation.z_score(0.0) < 3.0, "{shifted:?}");
    assert!(shifted.slope.z_score(0.0) > 3.0);
}

#[test]
fn qle_comparison() {
    let f = angular_f();
    let h = field(9, 12);
    let xi = CouplingParams::pure_gravity().xi;
    let mu = chaos_measure(&h, ChaosSign::Minus, xi, &Circle::new(256)).unwrap();
    let nu = mu.scaled(1.0 / mu.total_mass());
    let c = qle_drift_compare(&f, &h, &nu).unwrap();
    assert!(c.relative() < 1e-4, "{c:?}");
    // nu uniform, h = 0: only the Q and xi terms
    let flat = qle_drift_compare(&f, &BoundaryField::zeros(4), &CircleMeasure::uniform(256, 1.0)).unwrap();
    assert!(flat.relative() < 1e-4, "{flat:?}");
    assert!(qle_drift_compare(&f, &h, &mu.scaled(2.0 / mu.total_mass())).is_err());
}

#[test]
fn projection_identity_examples() {
    // P = {e_1, e_2}: S_2 = 1/pi
    let ps = vec![e(2, 1), e(2, 2)];
    assert!(gaussian_projection_identity(&ps, 4).unwrap() < 1e-10);
    let ps = vec![e(3, 0), e(3, 3), e(3, 6)];
    assert!(gaussian_projection_identity(&ps, 3).unwrap() < 1e-10);
    assert!(gaussian_projection_identity(&[lin(&[(1, 2.0)])], 3).is_err());
}

#[test]
fn projected_symmetric_ibp() {
    let ps = vec![e(2, 0), e(2, 1)];
    let phi = Profile::new(vec![Bump::new(0.2, 2.5), Bump::new(0.0, 2.0)]).unwrap();
    let r = projected_symmetric_ibp_check(&ps, phi, &functional_g(), &sampling(3000, 10)).unwrap();
    assert!(r.residual.z_score(0.0) < 3.0, "{r:?}");
    assert!(r.spectral_residual < 1e-10);
}

#[test]
fn derivative_martingale() {
    for (n, xi) in [(1, 0.4), (8, 1.0 / 6f64.sqrt()), (8, 0.0)] {
        let d = derivative_martingale_identity(n, xi, 3);
        assert!(d.max_abs_residual < 1e-10 * d.scale.max(1.0), "{n} {xi}: {d:?}");
    }
}

#[test]
fn second_moment_grows() {
    let ks = [1, 2, 4, 8, 16, 32];
    let v = second_moment_growth(1.0 / 6f64.sqrt(), &ks);
    assert!(v.windows(2).all(|w| w[1] > w[0]), "{v:?}");
    // K = 1 by direct Simpson on the singular integrand
    let xi2 = 1.0 / 6.0;
    let g = |t: f64| (4.0 * xi2 * t.cos().powi(2) + 2.0 * t.cos()) * (2.0 * (t / 2.0).sin()).powf(-2.0 * xi2);
    let direct = 2.0 * PI * 2.0 * crate::quad::adaptive_simpson(|s: f64| 3.0 * PI * s * s * g(PI * s * s * s), 1e-12, 1.0, 1e-13);
    assert!((v[0] - direct).abs() < 1e-8 * direct.abs(), "{} vs {direct}", v[0]);
}

#[test]
fn tilde_df_shift() {
    let h = field(12, 16);
    let r = tilde_df_shift_check(&functional_f(), &h, 1.0 / 6f64.sqrt()).unwrap();
    assert!(r < 1e-10, "{r}");
}

#[test]
fn zero_mode_rule_integrates_weighted_bump_derivatives() {
    let b = crate::bump::Bump::new(0.5, 1.5);
    let rule = zero_mode_rule((-1.0, 2.0), 0.7);
    for d in 0..3 {
        let s: f64 = rule.iter().map(|(m, w)| w * b.deriv(*m, d)).sum();
        let exact = crate::quad::adaptive_simpson(|m: f64| (0.7 * m).exp() * b.deriv(m, d), -1.0, 2.0, 1e-14);
        assert!((s - exact).abs() < 1e-10, "{d}: {s} vs {exact}");
    }
}
