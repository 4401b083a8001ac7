//! The Loewner vector field `L_mu`, the transport operator `D_mu`, the
//! boundary kernel `V_p` and its contractions, and the identities that move
//! bulk pairings onto the circle.
//!
//! Driving measures act through their atoms on the grid, so every identity
//! here is checked exactly for a finite combination of Dirac masses.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fields::green_potential;
use crate::gmc::CircleMeasure;
use crate::spectral::{poisson_adjoint, BoundaryField, Circle, DiskTestFunction, PolarGrid};

fn atoms(mu: &CircleMeasure) -> impl Iterator<Item = (Complex64, f64)> + '_ {
    let dt = mu.dtheta();
    (0..mu.m()).filter(|j| mu.density()[*j] != 0.0).map(move |j| (Complex64::from_polar(1.0, dt * j as f64), mu.cell_mass(j)))
}

fn check_inside(mu: &CircleMeasure, z: Complex64) -> Result<()> {
    if z.norm() < 1.0 - mu.dtheta() {
        Ok(())
    } else {
        Err(Error::OutsideDisk(z.into()))
    }
}

/// `L_mu(z) = -int z (z + w)/(z - w) mu(dw)`.
pub fn loewner_field(mu: &CircleMeasure, z: Complex64) -> Result<Complex64> {
    check_inside(mu, z)?;
    Ok(atoms(mu).map(|(w, m)| -z * (z + w) / (z - w) * m).sum())
}

/// `L_mu'(z) = -int (z^2 - 2zw - w^2)/(z - w)^2 mu(dw)`.
pub fn loewner_field_derivative(mu: &CircleMeasure, z: Complex64) -> Result<Complex64> {
    check_inside(mu, z)?;
    Ok(atoms(mu).map(|(w, m)| -(z * z - 2.0 * z * w - w * w) / ((z - w) * (z - w)) * m).sum())
}

/// `D_mu f = 2 f Re(L_mu') + 2 Re(L_mu d_z f)` on the nodes of `grid`.
pub fn dmu(f: &DiskTestFunction, mu: &CircleMeasure, grid: &PolarGrid) -> Result<Vec<f64>> {
    let (v, dz) = f.sample(grid);
    let pts = grid.points();
    let mut out = vec![0.0; grid.len()];
    for (i, z) in pts.iter().enumerate() {
        if v[i] == 0.0 && dz[i] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let l = loewner_field(mu, *z)?;
        let dl = loewner_field_derivative(mu, *z)?;
        out[i] = 2.0 * v[i] * dl.re + 2.0 * (l * dz[i]).re;
    }
    Ok(out)
}

/// `D_{delta_w} f` on the grid for a unit mass at `w`.
pub fn dmu_dirac(f: &DiskTestFunction, w: Complex64, grid: &PolarGrid) -> Vec<f64> {
    let (v, dz) = f.sample(grid);
    grid.points()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            if v[i] == 0.0 && dz[i] == Complex64::new(0.0, 0.0) {
                return 0.0;
            }
            let l = -z * (z + w) / (z - w);
            let dl = -(z * z - 2.0 * z * w - w * w) / ((z - w) * (z - w));
            2.0 * v[i] * dl.re + 2.0 * (l * dz[i]).re
        })
        .collect()
}

/// `D_mu f(z) = 2 Re d_z(L_mu f)(z)`, with the Wirtinger derivative taken by
/// sixth-order central differences of step `h` in `x` and `y`.
pub fn dmu_divergence_form(f: &DiskTestFunction, mu: &CircleMeasure, z: Complex64, h: f64) -> Result<f64> {
    check_inside(mu, z + Complex64::new(3.0 * h, 3.0 * h))?;
    let g = |p: Complex64| -> Result<Complex64> { Ok(loewner_field(mu, p)? * f.eval(p)) };
    const C: [f64; 3] = [45.0, -9.0, 1.0];
    let mut dx = Complex64::new(0.0, 0.0);
    let mut dy = Complex64::new(0.0, 0.0);
    for (k, c) in C.iter().enumerate() {
        let s = (k + 1) as f64 * h;
        dx += (g(z + Complex64::new(s, 0.0))? - g(z - Complex64::new(s, 0.0))?) * *c;
        dy += (g(z + Complex64::new(0.0, s))? - g(z - Complex64::new(0.0, s))?) * *c;
    }
    dx /= 60.0 * h;
    dy /= 60.0 * h;
    let d_z = 0.5 * (dx - Complex64::i() * dy);
    Ok(2.0 * d_z.re)
}

/// Grid values of a field of any degree on `m` equispaced points.
pub fn values_on_grid(p: &BoundaryField, m: usize) -> Vec<f64> {
    let deg = p.effective_degree();
    let factor = (2 * deg + 1).div_ceil(m).max(1);
    let v = Circle::new(m * factor).values(p);
    v.into_iter().step_by(factor).collect()
}

/// `A(p, q) = conj(p~ q - p q~)`.
pub fn operator_a(p: &BoundaryField, q: &BoundaryField) -> BoundaryField {
    let pt = p.conjugate();
    let qt = q.conjugate();
    (&pt.product(q) - &p.product(&qt)).conjugate()
}

/// `pq + p~ q~ - mean(p) mean(q)`.
pub fn symmetric_contraction(p: &BoundaryField, q: &BoundaryField) -> BoundaryField {
    let s = &p.product(q) + &p.conjugate().product(&q.conjugate());
    let n = s.degree();
    &s - &BoundaryField::constant(n, p.mean() * q.mean())
}

/// `(q V_p)(w') = int q(w) V_p(w, w') dlambda(w)`, from the contraction identities.
pub fn v_contraction(p: &BoundaryField, q: &BoundaryField) -> BoundaryField {
    (&symmetric_contraction(p, q) - &operator_a(p, q)).scaled(PI)
}

/// `int int V_p(w, w') g(w') mu(dw) dlambda(w')`.
pub fn v_mu_pairing(p: &BoundaryField, g: &BoundaryField, mu: &CircleMeasure) -> f64 {
    mu.integrate(&values_on_grid(&v_contraction(p, g), mu.m()))
}

/// Kernel `V_p(w, w') = cot((t' - t)/2) (p~(t') - p~(t))` on the grid,
/// with the diagonal set to `-2 (d_n H p)`.
#[derive(Debug, Clone)]
pub struct KernelV {
    m: usize,
    values: Vec<f64>,
}

impl KernelV {
    pub fn new(p: &BoundaryField, m: usize) -> Self {
        let circle = Circle::new(m);
        let pt = values_on_grid(&p.conjugate(), m);
        let diag = values_on_grid(&p.dirichlet_to_neumann(), m);
        let th = circle.thetas();
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                values[i * m + j] = if i == j {
                    -2.0 * diag[i]
                } else {
                    (pt[j] - pt[i]) / (0.5 * (th[j] - th[i])).tan()
                };
            }
        }
        KernelV { m, values }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    /// `int q(w) V(w, w'_j) dlambda(w)` by the trapezoid rule.
    pub fn contract(&self, q: &[f64]) -> Vec<f64> {
        let dt = 2.0 * PI / self.m as f64;
        (0..self.m).map(|j| (0..self.m).map(|i| q[i] * self.get(i, j)).sum::<f64>() * dt).collect()
    }

    /// Frobenius norm of the part of the kernel outside `|m|, |n| <= k` in
    /// the expansion `sum b_{mn} w^m w'^n`, normalized per grid node.
    pub fn truncation_residual(&self, k: usize) -> f64 {
        let m = self.m;
        let fft = FftPlanner::new().plan_fft_forward(m);
        let mut buf: Vec<Complex64> = self.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        for row in buf.chunks_mut(m) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        let freq = |i: usize| if i <= m / 2 { i } else { m - i };
        let mut removed = 0.0;
        for j in 0..m {
            for i in 0..m {
                col[i] = buf[i * m + j];
            }
            fft.process(&mut col);
            for (i, c) in col.iter().enumerate() {
                if freq(i) > k || freq(j) > k {
                    removed += c.norm_sqr();
                }
            }
        }
        removed.sqrt() / (m * m) as f64
    }
}

fn pure_degree(p: &BoundaryField) -> Option<usize> {
    let mut deg = None;
    for (k, a) in p.coeffs().iter().enumerate() {
        if *a != 0.0 {
            let d = crate::spectral::lambda(k) as usize;
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => return None,
                _ => {}
            }
        }
    }
    deg
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Largest residual of each contraction identity on the grid.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ContractionReport {
    pub row_integral: f64,
    pub diagonal: f64,
    pub symmetric: f64,
    pub antisymmetric: f64,
    /// `A(p, q) = -sgn(p, q)(pq + p~ q~)`, when both are of pure degree.
    pub sign_formula: Option<f64>,
    /// `A(p, q) = A(p - mean p, q - mean q) + mean(p) q - mean(q) p`.
    pub mean_split: f64,
}

impl ContractionReport {
    pub fn max(&self) -> f64 {
        [self.row_integral, self.diagonal, self.symmetric, self.antisymmetric, self.mean_split, self.sign_formula.unwrap_or(0.0)]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Checks the contraction identities for `V_p`, `V_q` assembled on an
/// `m`-point grid against their spectral closed forms.
pub fn contraction_suite(p: &BoundaryField, q: &BoundaryField, m: usize) -> Result<ContractionReport> {
    let deg = p.effective_degree().max(q.effective_degree());
    if m <= 4 * deg {
        return Err(Error::GridTooSmall { m, n: 2 * deg });
    }
    let circle = Circle::new(m);
    let vp = KernelV::new(p, m);
    let vq = KernelV::new(q, m);
    let pv = values_on_grid(p, m);
    let qv = values_on_grid(q, m);
    let one = vec![1.0; m];

    let row = vp.contract(&one);
    let target: Vec<f64> = pv.iter().map(|x| 2.0 * PI * (x - p.mean())).collect();
    let row_integral = sup_diff(&row, &target);

    // V_p(w, .) is a trigonometric polynomial of degree deg p, so its value
    // on the diagonal follows from the off-diagonal values on a shifted grid
    let shift = 0.5 * circle.dtheta();
    let pt = p.conjugate();
    let diagonal = circle
        .thetas()
        .iter()
        .map(|&t| {
            let off: Vec<f64> = circle
                .thetas()
                .iter()
                .map(|&s| {
                    let s = s + shift;
                    (pt.eval(s) - pt.eval(t)) / (0.5 * (s - t)).tan()
                })
                .collect();
            let row = circle.to_coeffs(&off, m / 2 - 1).expect("grid checked above");
            let direct = row.eval(t - shift);
            (direct + 2.0 * p.dirichlet_to_neumann().eval(t)).abs()
        })
        .fold(0.0, f64::max);

    let pvq = vq.contract(&pv);
    let qvp = vp.contract(&qv);
    let sym: Vec<f64> = pvq.iter().zip(&qvp).map(|(a, b)| (a + b) / (2.0 * PI)).collect();
    let symmetric = sup_diff(&sym, &values_on_grid(&symmetric_contraction(p, q), m));
    let anti: Vec<f64> = pvq.iter().zip(&qvp).map(|(a, b)| (a - b) / (2.0 * PI)).collect();
    let a = operator_a(p, q);
    let av = values_on_grid(&a, m);
    let antisymmetric = sup_diff(&anti, &av);

    let sign_formula = match (pure_degree(p), pure_degree(q)) {
        (Some(dp), Some(dq)) => {
            let sgn = (dp > dq) as i32 as f64 - ((dp < dq) as i32 as f64);
            let s = &p.product(q) + &p.conjugate().product(&q.conjugate());
            let rhs: Vec<f64> = values_on_grid(&s, m).iter().map(|x| -sgn * x).collect();
            Some(sup_diff(&av, &rhs))
        }
        _ => None,
    };

    let pc = p - &BoundaryField::constant(p.degree(), p.mean());
    let qc = q - &BoundaryField::constant(q.degree(), q.mean());
    let split = &(&operator_a(&pc, &qc) + &q.scaled(p.mean())) - &p.scaled(q.mean());
    let mean_split = sup_diff(&av, &values_on_grid(&split, m));

    Ok(ContractionReport { row_integral, diagonal, symmetric, antisymmetric, sign_formula, mean_split })
}

/// Two evaluations of one identity.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Pair {
    pub lhs: f64,
    pub rhs: f64,
}

impl Pair {
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`, or 0 when both vanish.
    pub fn relative(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / scale
        }
    }
}

/// Bulk sides by polar quadrature, boundary sides spectrally.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BoundaryLocalization {
    /// `int (D_mu f1) log|z|` vs `-2 pi int p1 dmu`.
    pub singular: Pair,
    /// `int f1 Re L_mu'` vs `2 pi int (p1 - d_n H p1) dmu`.
    pub mu_term: Pair,
    /// `-int f1 G D_mu f2 - int (D_mu f1) G f2` vs `2 pi int p1 p2 dmu`.
    pub green: Pair,
}

impl BoundaryLocalization {
    pub fn max_relative(&self) -> f64 {
        self.singular.relative().max(self.mu_term.relative()).max(self.green.relative())
    }
}

/// Boundary symbol `H^* f` resolved to the grid's Nyquist degree.
pub fn symbol(f: &DiskTestFunction, n_r: usize, m: usize) -> Result<BoundaryField> {
    let grid = PolarGrid::covering(&[f], n_r, m)?;
    poisson_adjoint(f, &grid, m / 2 - 1)
}

pub fn boundary_localization_suite(
    f1: &DiskTestFunction,
    f2: &DiskTestFunction,
    mu: &CircleMeasure,
    n_r: usize,
) -> Result<BoundaryLocalization> {
    let m = mu.m();
    let g1 = PolarGrid::covering(&[f1], n_r, m)?;
    let g2 = PolarGrid::covering(&[f2], n_r, m)?;
    let p1 = poisson_adjoint(f1, &g1, m / 2 - 1)?;
    let p2 = poisson_adjoint(f2, &g2, m / 2 - 1)?;
    let p1v = values_on_grid(&p1, m);
    let p2v = values_on_grid(&p2, m);
    let d1 = dmu(f1, mu, &g1)?;
    let d2 = dmu(f2, mu, &g2)?;

    let log_r: Vec<f64> = g1.points().iter().map(|z| z.norm().ln()).collect();
    let singular = Pair { lhs: g1.pair(&d1, &log_r), rhs: -2.0 * PI * mu.integrate(&p1v) };

    let (v1, _) = f1.sample(&g1);
    let re_dl: Vec<f64> =
        g1.points().iter().map(|z| loewner_field_derivative(mu, *z).map(|d| d.re)).collect::<Result<_>>()?;
    let dn = values_on_grid(&p1.dirichlet_to_neumann(), m);
    let diff: Vec<f64> = p1v.iter().zip(&dn).map(|(a, b)| a - b).collect();
    let mu_term = Pair { lhs: g1.pair(&v1, &re_dl), rhs: 2.0 * PI * mu.integrate(&diff) };

    let u1_on_2 = green_potential(f1, &g2);
    let u2_on_1 = green_potential(f2, &g1);
    let prod: Vec<f64> = p1v.iter().zip(&p2v).map(|(a, b)| a * b).collect();
    let green = Pair { lhs: -g2.pair(&d2, &u1_on_2) - g1.pair(&d1, &u2_on_1), rhs: 2.0 * PI * mu.integrate(&prod) };

    Ok(BoundaryLocalization { singular, mu_term, green })
}

/// `int_D (D_mu f)(H h) dlambda` against `int int V_{H^* f}(w, w') d_n H h(w') mu(dw) dlambda(w')`.
pub fn kernel_u_check(f: &DiskTestFunction, h: &BoundaryField, mu: &CircleMeasure, n_r: usize) -> Result<Pair> {
    let m = mu.m();
    let grid = PolarGrid::covering(&[f], n_r, m)?;
    let p = poisson_adjoint(f, &grid, m / 2 - 1)?;
    let d = dmu(f, mu, &grid)?;
    let lhs = grid.pair(&d, &grid.harmonic_values(h));
    let rhs = v_mu_pairing(&p, &h.dirichlet_to_neumann(), mu);
    Ok(Pair { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sample_trace;
    use crate::gmc::{chaos_measure, ChaosSign};
    use crate::spectral::{RadialBump, SQRT_PI};
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn angular_f() -> DiskTestFunction {
        let t = &(&BoundaryField::constant(3, 1.0) + &BoundaryField::cos_mode(3, 1, 0.6)) + &BoundaryField::sin_mode(3, 3, -0.4);
        DiskTestFunction::new(RadialBump::new(0.3, 0.65).unwrap(), t)
    }

    fn second_f() -> DiskTestFunction {
        let t = &BoundaryField::constant(2, 0.5) + &BoundaryField::sin_mode(2, 2, 0.7);
        DiskTestFunction::new(RadialBump::new(0.2, 0.5).unwrap(), t)
    }

    fn gmc_sample(m: usize, seed: u64) -> CircleMeasure {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = sample_trace(32, &mut rng).h0;
        chaos_measure(&h, ChaosSign::Minus, 1.0 / 6f64.sqrt(), &Circle::new(m)).unwrap()
    }

    #[test]
    fn loewner_field_basics() {
        let uni = CircleMeasure::uniform(256, 1.0);
        assert!((loewner_field(&uni, c(0.5, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-12);
        assert_eq!(loewner_field(&CircleMeasure::zero(64), c(0.1, 0.2)).unwrap(), c(0.0, 0.0));
        let mu = gmc_sample(128, 1);
        let z = c(0.3, -0.2);
        let shift = 5;
        let alpha = 2.0 * PI * shift as f64 / 128.0;
        let rot = Complex64::from_polar(1.0, alpha);
        let a = loewner_field(&mu.rotated(shift), rot * z).unwrap();
        let b = rot * loewner_field(&mu, z).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert!(loewner_field(&uni, c(0.999, 0.0)).is_err());
    }

    #[test]
    fn loewner_derivative_by_difference() {
        let mu = gmc_sample(128, 2);
        let z = c(0.2, 0.4);
        let h = 1e-5;
        let fd = (loewner_field(&mu, z + h).unwrap() - loewner_field(&mu, z - h).unwrap()) / (2.0 * h);
        assert!((fd - loewner_field_derivative(&mu, z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn dmu_two_forms_agree() {
        let f = angular_f();
        let mu = gmc_sample(128, 3);
        let grid = PolarGrid::covering(&[&f], 16, 128).unwrap();
        let d = dmu(&f, &mu, &grid).unwrap();
        let mut worst = 0.0f64;
        for idx in (0..grid.len()).step_by(37) {
            let z = grid.points()[idx];
            let e = dmu_divergence_form(&f, &mu, z, 2e-4).unwrap();
            worst = worst.max((e - d[idx]).abs());
        }
        assert!(worst < 1e-8, "{worst}");
        assert!(dmu(&f, &CircleMeasure::zero(128), &grid).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dmu_has_zero_integral_and_matches_flow() {
        let f = angular_f();
        let mu = gmc_sample(256, 4);
        // the bump derivatives need more radial nodes than the bump itself
        let grid = PolarGrid::covering(&[&f], 128, 256).unwrap();
        let d = dmu(&f, &mu, &grid).unwrap();
        let scale = grid.integrate(&d.iter().map(|x| x.abs()).collect::<Vec<_>>());
        assert!(grid.integrate(&d).abs() < 1e-10 * scale);

        // uniform driving flows by g_t(z) = e^t z, so f_t(z) = f(e^{-t} z) e^{-2t}
        let fr = DiskTestFunction::radial(0.3, 0.6, 1.0).unwrap();
        let uni = CircleMeasure::uniform(256, 1.0);
        let grid = PolarGrid::covering(&[&fr], 16, 256).unwrap();
        let d = dmu(&fr, &uni, &grid).unwrap();
        let t = 1e-5;
        for (idx, z) in grid.points().iter().enumerate().step_by(61) {
            let ft = |s: f64| fr.eval(z * (-s).exp()) * (-2.0 * s).exp();
            let deriv = (ft(t) - ft(-t)) / (2.0 * t);
            assert!((deriv + d[idx]).abs() < 1e-6 * (1.0 + d[idx].abs()), "{deriv} {}", d[idx]);
        }
    }

    #[test]
    fn kernel_v_of_cosine() {
        let p = BoundaryField::basis(4, 1);
        let v = KernelV::new(&p, 32);
        let th = Circle::new(32).thetas();
        for i in 0..32 {
            for j in 0..32 {
                let e = (th[i].cos() + th[j].cos()) / SQRT_PI;
                assert!((v.get(i, j) - e).abs() < 1e-12);
                assert!((v.get(i, j) - v.get(j, i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contraction_identities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        use rand::Rng;
        let p = BoundaryField::from_coeffs((0..17).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let q = BoundaryField::from_coeffs((0..13).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let r = contraction_suite(&p, &q, 64).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
        assert!(r.sign_formula.is_none());
        let r = contraction_suite(&p, &p, 64).unwrap();
        assert!(r.antisymmetric < 1e-8);
        assert!(operator_a(&p, &p).max_abs_coeff() < 1e-12);
        let p2 = BoundaryField::cos_mode(5, 2, 1.0);
        let q5 = BoundaryField::cos_mode(5, 5, 1.0);
        let r = contraction_suite(&p2, &q5, 64).unwrap();
        assert!(r.sign_formula.unwrap() < 1e-8, "{r:?}");
        let s = &p2.product(&q5) + &p2.conjugate().product(&q5.conjugate());
        assert!((&operator_a(&p2, &q5) - &s).max_abs_coeff() < 1e-12);
        let k = BoundaryField::constant(3, 0.8);
        let r = contraction_suite(&k, &q, 64).unwrap();
        assert!(r.max() < 1e-8);
        let expect = &q.scaled(0.8) - &BoundaryField::constant(6, 0.8 * q.mean());
        assert!((&operator_a(&k, &q) - &expect).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn contraction_matches_kernel_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        use rand::Rng;
        let p = BoundaryField::from_coeffs((0..11).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let q = BoundaryField::from_coeffs((0..9).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let v = KernelV::new(&p, 64);
        let direct = v.contract(&values_on_grid(&q, 64));
        let spectral = values_on_grid(&v_contraction(&p, &q), 64);
        assert!(sup_diff(&direct, &spectral) < 1e-10);
    }

    #[test]
    fn finite_rank_truncation_decays() {
        let f = angular_f().plus(&DiskTestFunction::new(
            RadialBump::new(0.55, 0.8).unwrap(),
            BoundaryField::cos_mode(1, 1, 1.0),
        ));
        let p = symbol(&f, 64, 128).unwrap();
        let v = KernelV::new(&p, 128);
        let r: Vec<f64> = [4, 8, 16].iter().map(|k| v.truncation_residual(*k)).collect();
        assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
    }

    #[test]
    fn boundary_localization_on_gmc() {
        let mu = gmc_sample(256, 5);
        let r = boundary_localization_suite(&angular_f(), &second_f(), &mu, 64).unwrap();
        assert!(r.max_relative() < 1e-4, "{r:?}");
        let zero = boundary_localization_suite(&angular_f(), &second_f(), &CircleMeasure::zero(256), 64).unwrap();
        for p in [zero.singular, zero.mu_term, zero.green] {
            assert_eq!(p.lhs, 0.0);
            assert!(p.rhs.abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_localization_is_linear() {
        let a = gmc_sample(128, 6);
        let b = CircleMeasure::narrow_bump(128, 1.0, 0.3);
        let mix = a.combine(0.7, &b, -1.3);
        let f1 = angular_f();
        let f2 = second_f();
        let ra = boundary_localization_suite(&f1, &f2, &a, 32).unwrap();
        let rb = boundary_localization_suite(&f1, &f2, &b, 32).unwrap();
        let rm = boundary_localization_suite(&f1, &f2, &mix, 32).unwrap();
        for (x, y, z) in [(ra.singular, rb.singular, rm.singular), (ra.mu_term, rb.mu_term, rm.mu_term), (ra.green, rb.green, rm.green)] {
            assert!((0.7 * x.lhs - 1.3 * y.lhs - z.lhs).abs() < 1e-10 * (1.0 + z.lhs.abs()));
            assert!((0.7 * x.rhs - 1.3 * y.rhs - z.rhs).abs() < 1e-10 * (1.0 + z.rhs.abs()));
        }
    }

    #[test]
    fn boundary_localization_dirac_limit() {
        // a narrow bump at w = 1 against the closed forms for a unit Dirac mass
        let m = 256;
        let mu = CircleMeasure::narrow_bump(m, 0.0, 1.0);
        let f1 = angular_f();
        let f2 = second_f();
        let r = boundary_localization_suite(&f1, &f2, &mu, 64).unwrap();
        let p1 = symbol(&f1, 64, m).unwrap();
        let p2 = symbol(&f2, 64, m).unwrap();
        let width = 2.0 * 2.0 * PI / m as f64;
        let curv = |p: &BoundaryField| p.tangential_derivative().tangential_derivative().max_abs_coeff() * 32.0;
        let bound = width * width * (curv(&p1) + curv(&p2)) * 10.0;
        assert!((r.singular.lhs + 2.0 * PI * p1.eval(0.0)).abs() < bound);
        assert!((r.mu_term.lhs - 2.0 * PI * (p1.eval(0.0) - p1.dirichlet_to_neumann().eval(0.0))).abs() < 10.0 * bound);
        assert!((r.green.lhs - 2.0 * PI * p1.eval(0.0) * p2.eval(0.0)).abs() < bound);
    }

    #[test]
    fn radial_uniform_reduction() {
        let f = DiskTestFunction::radial(0.3, 0.6, 2.0).unwrap();
        let uni = CircleMeasure::uniform(128, 1.0);
        let r = boundary_localization_suite(&f, &f, &uni, 64).unwrap();
        let p = symbol(&f, 64, 128).unwrap();
        assert!((r.mu_term.rhs - 2.0 * PI * p.mean()).abs() < 1e-12);
        assert!(r.mu_term.relative() < 1e-4);
    }

    #[test]
    fn kernel_u_identity() {
        let mu = gmc_sample(256, 7);
        let h = BoundaryField::cos_mode(32, 1, 1.0);
        let f = DiskTestFunction::new(RadialBump::new(0.3, 0.6).unwrap(), BoundaryField::cos_mode(1, 1, 1.0));
        let r = kernel_u_check(&f, &h, &mu, 64).unwrap();
        assert!(r.relative() < 1e-4, "{r:?}");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let h = sample_trace(32, &mut rng).h0;
        let r = kernel_u_check(&angular_f(), &h, &mu, 64).unwrap();
        assert!(r.relative() < 1e-4, "{r:?}");
        let r = kernel_u_check(&angular_f(), &BoundaryField::constant(32, 2.0), &mu, 128).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12, "{r:?}");
        let fr = DiskTestFunction::radial(0.3, 0.6, 1.0).unwrap();
        let r = kernel_u_check(&fr, &BoundaryField::cos_mode(4, 1, 1.0), &CircleMeasure::uniform(256, 1.0), 64).unwrap();
        assert!(r.lhs.abs() < 1e-10 && r.rhs.abs() < 1e-10, "{r:?}");
    }
}
