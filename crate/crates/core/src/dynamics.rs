//! Symmetric-part dynamics of the chaos measure and the `xi = 0`
//! Ornstein-Uhlenbeck baseline.
//!
//! Each grid cell carries a mass `X_j` following
//! `dX_j = a_j dt + 2 pi xi sqrt(X_j) dB_j`, with
//! `a_j = pi xi (d_nH h_t(theta_j) + xi) dtheta` and `h_t` recovered from the
//! current measure. Over one step the drift is frozen and the square-root
//! diffusion is sampled exactly, so masses never become negative.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gmc::{inverse_map, CircleMeasure};
use crate::loewner::DrivingPath;
use crate::mc::{map_samples, Estimate};
use crate::spectral::{BoundaryField, Circle};

/// Step parameters of the symmetric dynamics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymmetricDynamics {
    pub xi: f64,
    pub dt: f64,
    /// Degree of the recovered field.
    pub degree: usize,
    /// With `false` only the frozen drift is applied.
    pub noise: bool,
}

impl SymmetricDynamics {
    pub fn new(xi: f64, dt: f64, degree: usize) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::InvalidParameter(format!("xi = {xi} outside (0, 1)")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
        }
        Ok(SymmetricDynamics { xi, dt, degree, noise: true })
    }

    /// Per-cell diffusion coefficient `2 pi xi`.
    pub fn sigma(&self) -> f64 {
        2.0 * PI * self.xi
    }

    /// Drift of the total mass, `2 pi^2 xi^2`.
    pub fn mass_drift(&self) -> f64 {
        2.0 * PI * PI * self.xi * self.xi
    }

    fn check_grid(&self, m: usize) -> Result<()> {
        if 4 * self.degree > m {
            return Err(Error::InvalidParameter(format!("degree {} needs at least {} cells, got {m}", self.degree, 4 * self.degree)));
        }
        Ok(())
    }
}

/// Field recovered from a measure `e^{xi h}` at the resolution of one cell,
/// centred so that a smooth density `e^{xi phi}` gives back `phi`.
pub fn recover_field(mu: &CircleMeasure, xi: f64, degree: usize) -> Result<BoundaryField> {
    let eps = mu.dtheta();
    inverse_map(mu, eps, xi, degree, (2.0 * eps).ln() / xi)
}

/// Cell drifts `a_j` for the field `h`.
pub fn cell_drifts(h: &BoundaryField, xi: f64, circle: &Circle) -> Vec<f64> {
    let dt = circle.dtheta();
    circle
        .values(&h.dirichlet_to_neumann())
        .into_iter()
        .map(|d| PI * xi * (d + xi) * dt)
        .collect()
}

/// Exact transition of `dX = a dt + sigma sqrt(X) dB` over `dt`, through the
/// Poisson mixture of Gamma laws. A negative `a` can drive the mass to zero;
/// the second component reports that absorption.
pub fn cir_step<R: Rng + ?Sized>(x: f64, a: f64, sigma: f64, dt: f64, rng: &mut R) -> (f64, bool) {
    let c = 0.25 * sigma * sigma * dt;
    let shape_drift = 2.0 * a / (sigma * sigma);
    let half_lambda = x / (2.0 * c);
    let n = if half_lambda > 0.0 { Poisson::new(half_lambda).expect("positive mean").sample(rng) } else { 0.0 };
    let shape = shape_drift + n;
    if shape <= 0.0 {
        return (0.0, x > 0.0 || a < 0.0);
    }
    let g: f64 = Gamma::new(shape, 2.0).expect("positive shape").sample(rng);
    (c * g, false)
}

/// Outcome of one step.
#[derive(Debug, Clone)]
pub struct StepInfo {
    /// Cell drifts used over the step.
    pub drift: Vec<f64>,
    /// Recovered field, `None` when recovery failed and the previous field was reused.
    pub field: Option<BoundaryField>,
    pub absorbed: usize,
}

/// One step from `mu`; `fallback` is used when the field cannot be recovered.
pub fn step<R: Rng + ?Sized>(
    dynamics: &SymmetricDynamics,
    mu: &CircleMeasure,
    fallback: &BoundaryField,
    rng: &mut R,
) -> Result<(CircleMeasure, StepInfo)> {
    let m = mu.m();
    dynamics.check_grid(m)?;
    let circle = Circle::new(m);
    let field = match recover_field(mu, dynamics.xi, dynamics.degree) {
        Ok(h) => Some(h),
        Err(Error::ZeroBallMass(_)) => None,
        Err(e) => return Err(e),
    };
    let drift = cell_drifts(field.as_ref().unwrap_or(fallback), dynamics.xi, &circle);
    let dtheta = mu.dtheta();
    let mut absorbed = 0;
    let mut density = Vec::with_capacity(m);
    for (j, a) in drift.iter().enumerate() {
        let x = mu.cell_mass(j);
        let next = if dynamics.noise {
            let (v, hit) = cir_step(x, *a, dynamics.sigma(), dynamics.dt, rng);
            absorbed += usize::from(hit);
            v
        } else {
            let v = x + a * dynamics.dt;
            if v < 0.0 {
                absorbed += 1;
            }
            v.max(0.0)
        };
        density.push(next / dtheta);
    }
    Ok((CircleMeasure::from_density(density)?, StepInfo { drift, field, absorbed }))
}

/// Recorded states of one path.
#[derive(Debug, Clone)]
pub struct MeasurePath {
    pub times: Vec<f64>,
    pub states: Vec<CircleMeasure>,
    /// Field recovered from each recorded state, when recovery succeeded.
    pub fields: Vec<Option<BoundaryField>>,
    pub absorbed: usize,
    pub recovery_failures: usize,
}

impl MeasurePath {
    pub fn total_masses(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.total_mass()).collect()
    }

    /// CSV rows: time, cell masses, then recovered Fourier coefficients
    /// (empty when recovery failed).
    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
        let m = self.states.first().map_or(0, |s| s.m());
        let k = self.fields.iter().flatten().map(|f| f.coeffs().len()).max().unwrap_or(0);
        let mut header = vec!["t".to_string()];
        header.extend((0..m).map(|j| format!("mass_{j}")));
        header.extend((0..k).map(|j| format!("mode_{j}")));
        let rows = self
            .times
            .iter()
            .zip(&self.states)
            .zip(&self.fields)
            .map(|((t, s), f)| {
                let mut row = vec![Some(*t)];
                row.extend((0..m).map(|j| Some(s.cell_mass(j))));
                row.extend((0..k).map(|j| f.as_ref().and_then(|f| f.coeffs().get(j).copied())));
                row
            })
            .collect();
        (header, rows)
    }
}

/// Run `steps` steps from `mu0`, recording every `record_every`-th state.
pub fn simulate_symmetric<R: Rng + ?Sized>(
    dynamics: &SymmetricDynamics,
    mu0: &CircleMeasure,
    steps: usize,
    record_every: usize,
    rng: &mut R,
) -> Result<MeasurePath> {
    if mu0.density().iter().any(|d| *d <= 0.0) {
        return Err(Error::InvalidParameter("initial measure must be strictly positive".into()));
    }
    let record_every = record_every.max(1);
    let mut path = MeasurePath { times: Vec::new(), states: Vec::new(), fields: Vec::new(), absorbed: 0, recovery_failures: 0 };
    let mut mu = mu0.clone();
    let mut last = recover_field(&mu, dynamics.xi, dynamics.degree)?;
    for k in 0..=steps {
        let (next, info) = if k < steps { Some(step(dynamics, &mu, &last, rng)?) } else { None }.unzip();
        if k % record_every == 0 {
            path.times.push(k as f64 * dynamics.dt);
            path.states.push(mu.clone());
            path.fields.push(match &info {
                Some(i) => i.field.clone(),
                None => recover_field(&mu, dynamics.xi, dynamics.degree).ok(),
            });
        }
        let (Some(next), Some(info)) = (next, info) else { break };
        path.absorbed += info.absorbed;
        match info.field {
            Some(h) => last = h,
            None => path.recovery_failures += 1,
        }
        mu = next;
    }
    Ok(path)
}

/// Total-mass statistics over an ensemble started from one measure.
#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub times: Vec<f64>,
    pub mean: Vec<Estimate>,
    /// Least-squares slope of the mean mass against time (mean of per-path slopes).
    pub slope: Estimate,
    pub expected_slope: f64,
    pub relative_slope_error: f64,
    /// Slope of `Y = X / (4 pi^2 xi^2)`, expected `1/2`.
    pub scaled_slope: f64,
    /// Sample variance at the last time, with its standard error.
    pub final_variance: Estimate,
    /// `sigma^2 (X_0 t + a t^2 / 2)` for a deterministic start.
    pub expected_final_variance: f64,
}

/// Mass statistics from per-path mass series sampled at `times`
/// (all paths share the same deterministic start).
pub fn total_mass_stats(times: &[f64], masses: &[Vec<f64>], xi: f64) -> Result<MassReport> {
    if masses.len() < 100 {
        return Err(Error::InvalidParameter(format!("{} paths; at least 100 are needed", masses.len())));
    }
    if masses.iter().any(|m| m.len() != times.len()) || times.len() < 2 {
        return Err(Error::InvalidParameter("every path needs one mass per time, at least two times".into()));
    }
    let tm = times.iter().sum::<f64>() / times.len() as f64;
    let stt: f64 = times.iter().map(|t| (t - tm) * (t - tm)).sum();
    let slopes: Vec<f64> = masses
        .iter()
        .map(|m| {
            let xm = m.iter().sum::<f64>() / m.len() as f64;
            times.iter().zip(m).map(|(t, x)| (t - tm) * (x - xm)).sum::<f64>() / stt
        })
        .collect();
    let slope = Estimate::from_samples(&slopes);
    let a = 2.0 * PI * PI * xi * xi;
    let sigma2 = 4.0 * PI * PI * xi * xi;
    let mean = (0..times.len())
        .map(|k| Estimate::from_samples(&masses.iter().map(|m| m[k]).collect::<Vec<_>>()))
        .collect::<Vec<_>>();
    let last: Vec<f64> = masses.iter().map(|m| *m.last().unwrap()).collect();
    let final_variance = variance_estimate(&last);
    let x0 = masses[0][0];
    let t = *times.last().unwrap() - times[0];
    Ok(MassReport {
        times: times.to_vec(),
        mean,
        slope,
        expected_slope: a,
        relative_slope_error: (slope.mean - a).abs() / a,
        scaled_slope: slope.mean / sigma2,
        final_variance,
        expected_final_variance: sigma2 * (x0 * t + 0.5 * a * t * t),
    })
}

/// Unbiased sample variance with the standard error `sqrt((m4 - s^4) / n)`.
fn variance_estimate(v: &[f64]) -> Estimate {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    Estimate { mean: var, stderr: ((m4 - var * var).max(0.0) / n).sqrt(), n: v.len() }
}

/// Ensemble run from the uniform measure of mass `2 pi`, recording masses
/// every `record_every` steps.
pub fn mass_ensemble(
    dynamics: &SymmetricDynamics,
    m: usize,
    steps: usize,
    record_every: usize,
    n_paths: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, usize)> {
    let mu0 = CircleMeasure::uniform(m, 2.0 * PI);
    let runs: Vec<Result<MeasurePath>> =
        map_samples(seed, "mass-ensemble", n_paths, |rng, _| simulate_symmetric(dynamics, &mu0, steps, record_every, rng));
    let mut masses = Vec::with_capacity(n_paths);
    let mut times = Vec::new();
    let mut absorbed = 0;
    for r in runs {
        let p = r?;
        absorbed += p.absorbed;
        masses.push(p.total_masses());
        times = p.times;
    }
    Ok((times, masses, absorbed))
}

/// Empirical bracket of `int p dmu_t` against `(2 pi xi)^2 int p^2 dmu_t dt`,
/// with the martingale increments at checkpoints.
#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    /// `sum (increment - drift)^2`, averaged over paths.
    pub empirical: Estimate,
    /// `sum (2 pi xi)^2 int p^2 dmu dt`, averaged over paths.
    pub predicted: Estimate,
    pub ratio: f64,
    /// Compensated increments `int p dmu_t - int p dmu_s - accumulated drift`
    /// over consecutive checkpoint intervals.
    pub martingale_increments: Vec<Estimate>,
}

/// Bracket and martingale checks for the symbol `p`, paths started from
/// chaos samples.
pub fn bracket_check(
    dynamics: &SymmetricDynamics,
    p: &BoundaryField,
    m: usize,
    steps: usize,
    checkpoints: usize,
    n_paths: usize,
    seed: u64,
) -> Result<BracketReport> {
    dynamics.check_grid(m)?;
    let circle = Circle::new(m);
    let pv = circle.values(p);
    let p2: Vec<f64> = pv.iter().map(|x| x * x).collect();
    let sigma2 = dynamics.sigma() * dynamics.sigma();
    let every = (steps / checkpoints.max(1)).max(1);
    let rows: Vec<Result<Vec<f64>>> = map_samples(seed, "bracket", n_paths, |rng, _| {
        let h0 = crate::fields::sample_trace(dynamics.degree, rng).h0;
        let mut mu = crate::gmc::chaos_measure(&h0, crate::gmc::ChaosSign::Plus, dynamics.xi, &circle)?;
        let mut last = h0;
        let (mut emp, mut pred) = (0.0, 0.0);
        let mut comp = 0.0;
        let mut out = Vec::new();
        for k in 0..steps {
            let before = mu.integrate(&pv);
            let (next, info) = step(dynamics, &mu, &last, rng)?;
            let drift: f64 = info.drift.iter().zip(&pv).map(|(a, p)| a * p).sum::<f64>() * dynamics.dt;
            let incr = next.integrate(&pv) - before;
            emp += (incr - drift).powi(2);
            pred += sigma2 * mu.integrate(&p2) * dynamics.dt;
            comp += incr - drift;
            if (k + 1) % every == 0 && out.len() < checkpoints {
                out.push(comp);
                comp = 0.0;
            }
            if let Some(h) = info.field {
                last = h;
            }
            mu = next;
        }
        out.insert(0, pred);
        out.insert(0, emp);
        Ok(out)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let cols = crate::mc::column_estimates(&rows);
    Ok(BracketReport {
        empirical: cols[0],
        predicted: cols[1],
        ratio: cols[0].mean / cols[1].mean,
        martingale_increments: cols[2..].to_vec(),
    })
}

/// Driving path `e^{-xi h_t}` from the recovered fields of a measure path.
/// Steps without a recovered field are dropped; the count is returned.
pub fn driving_from_state(path: &MeasurePath, xi: f64) -> Result<(DrivingPath, usize)> {
    let m = path.states.first().map_or(0, |s| s.m());
    let circle = Circle::new(m);
    let (mut times, mut measures) = (Vec::new(), Vec::new());
    let mut dropped = 0;
    for (t, f) in path.times.iter().zip(&path.fields) {
        match f {
            Some(h) => {
                let d: Vec<f64> = circle.values(h).into_iter().map(|v| (-xi * v).exp()).collect();
                times.push(*t);
                measures.push(CircleMeasure::from_density(d)?);
            }
            None => dropped += 1,
        }
    }
    if times.is_empty() {
        return Err(Error::MissingRealization);
    }
    // the first kept state drives from time zero
    times[0] = 0.0;
    let spacing = match path.times.as_slice() {
        [a, b, ..] => b - a,
        _ => 1.0,
    };
    let horizon = path.times.last().copied().unwrap_or(0.0) + spacing;
    Ok((DrivingPath::new(times, measures, horizon)?, dropped))
}

/// Exact per-mode transition of `dh = -pi (-Delta)^{1/2} h dt + 2 pi dW`:
/// rate `pi lambda_k`, stationary variance `2 pi / lambda_k`.
pub fn ou_step<R: Rng + ?Sized>(h: &BoundaryField, dt: f64, noise: bool, rng: &mut R) -> BoundaryField {
    let mut out = h.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate().skip(1) {
        let lambda = idx.div_ceil(2) as f64;
        let decay = (-PI * lambda * dt).exp();
        *c *= decay;
        if noise {
            let z: f64 = rng.sample(StandardNormal);
            *c += (2.0 * PI / lambda * (1.0 - decay * decay)).sqrt() * z;
        }
    }
    out
}

/// OU path recorded at `t_k = k dt`, `k = 0..=steps`.
pub fn ou_baseline<R: Rng + ?Sized>(h0: &BoundaryField, dt: f64, steps: usize, rng: &mut R) -> Vec<BoundaryField> {
    let mut path = Vec::with_capacity(steps + 1);
    path.push(h0.clone());
    for _ in 0..steps {
        let next = ou_step(path.last().unwrap(), dt, true, rng);
        path.push(next);
    }
    path
}

/// Ensemble checks for the OU baseline.
#[derive(Debug, Clone, Serialize)]
pub struct OuReport {
    /// Per-coefficient variance at the final time, index `k >= 1`.
    pub mode_variances: Vec<Estimate>,
    /// `2 pi / lambda_k`.
    pub expected_variances: Vec<f64>,
    /// `E <h_t, e_1>` at the checkpoint times, started from `<h_0, e_1> = amplitude`.
    pub decay_times: Vec<f64>,
    pub decay_means: Vec<Estimate>,
    pub expected_decay: Vec<f64>,
}

/// Stationarity from a zero start after time `horizon`, and the decay of
/// the first cosine mode started at `amplitude`.
pub fn ou_checks(
    degree: usize,
    dt: f64,
    horizon: f64,
    amplitude: f64,
    decay_times: &[f64],
    n_paths: usize,
    seed: u64,
) -> OuReport {
    let steps = ((horizon / dt).round() as usize).max(1);
    let checkpoints: Vec<usize> = decay_times.iter().map(|t| (t / dt).round() as usize).collect();
    let last = checkpoints.iter().copied().max().unwrap_or(0).max(steps);
    let rows: Vec<Vec<f64>> = map_samples(seed, "ou", n_paths, |rng, _| {
        let mut h = BoundaryField::zeros(degree);
        h.coeffs_mut()[1] = amplitude;
        let mut out = vec![0.0; checkpoints.len()];
        let mut at_horizon = Vec::new();
        for k in 1..=last {
            h = ou_step(&h, dt, true, rng);
            for (slot, c) in checkpoints.iter().enumerate() {
                if *c == k {
                    out[slot] = h.coeffs()[1];
                }
            }
            if k == steps {
                at_horizon = h.coeffs()[1..].to_vec();
            }
        }
        out.extend(at_horizon);
        out
    });
    let n = checkpoints.len();
    let mode_variances: Vec<Estimate> = (0..2 * degree)
        .map(|i| {
            let v: Vec<f64> = rows.iter().map(|r| r[n + i]).collect();
            variance_estimate(&v)
        })
        .collect();
    let expected_variances = (1..=2 * degree).map(|k| 2.0 * PI / k.div_ceil(2) as f64).collect();
    let decay_means = (0..n).map(|s| Estimate::from_samples(&rows.iter().map(|r| r[s]).collect::<Vec<_>>())).collect();
    OuReport {
        mode_variances,
        expected_variances,
        decay_times: decay_times.to_vec(),
        decay_means,
        expected_decay: decay_times.iter().map(|t| amplitude * (-PI * t).exp()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn xi() -> f64 {
        1.0 / 6f64.sqrt()
    }

    #[test]
    fn deterministic_drift_from_uniform_measure() {
        let mut d = SymmetricDynamics::new(xi(), 1e-3, 8).unwrap();
        d.noise = false;
        let mu0 = CircleMeasure::uniform(64, 2.0 * PI);
        let path = simulate_symmetric(&d, &mu0, 100, 10, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let masses = path.total_masses();
        for (t, x) in path.times.iter().zip(&masses) {
            let expected = 2.0 * PI + d.mass_drift() * t;
            assert!((x - expected).abs() < 1e-9 * expected, "{t}: {x} vs {expected}");
        }
        assert_eq!(path.absorbed, 0);
    }

    #[test]
    fn slope_coefficient_at_pure_gravity() {
        let d = SymmetricDynamics::new(xi(), 1e-3, 8).unwrap();
        assert!((d.mass_drift() - PI * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn single_cell_is_a_scaled_square_root_diffusion() {
        // one cell: the drift is the full 2 pi^2 xi^2 and the recovered field is constant
        let d = SymmetricDynamics::new(xi(), 1e-3, 0).unwrap();
        let mu0 = CircleMeasure::uniform(1, 1.0);
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let path = simulate_symmetric(&d, &mu0, 50, 1, &mut r1).unwrap();
        let mut x = 1.0;
        for (k, got) in path.total_masses().iter().enumerate() {
            assert!((got - x).abs() < 1e-12 * x.max(1.0), "step {k}");
            x = cir_step(x, d.mass_drift(), d.sigma(), d.dt, &mut r2).0;
        }
    }

    #[test]
    fn cir_step_moments() {
        let (x, a, s, dt) = (0.3, 0.2, 2.5, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..40000).map(|_| cir_step(x, a, s, dt, &mut rng).0).collect();
        let e = Estimate::from_samples(&v);
        assert!(e.consistent_with(x + a * dt, 4.0), "{e:?}");
        let var = variance_estimate(&v);
        let exact = s * s * (x * dt + 0.5 * a * dt * dt);
        assert!(var.consistent_with(exact, 4.0), "{var:?} vs {exact}");
    }

    #[test]
    fn cir_step_absorbs_under_negative_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hits = (0..2000).filter(|_| cir_step(1e-8, -1.0, 1.0, 0.1, &mut rng).1).count();
        assert!(hits > 1900);
        assert!((0..100).all(|_| cir_step(1e-8, -1.0, 1.0, 0.1, &mut rng).0 >= 0.0));
    }

    #[test]
    fn constant_field_drives_uniformly() {
        let mut d = SymmetricDynamics::new(xi(), 1e-2, 4).unwrap();
        d.noise = false;
        let path = simulate_symmetric(&d, &CircleMeasure::uniform(32, 2.0 * PI), 5, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let (driving, dropped) = driving_from_state(&path, d.xi).unwrap();
        assert_eq!(dropped, 0);
        let mu = driving.at(0.0);
        let dens = mu.density();
        assert!(dens.iter().all(|v| (v - dens[0]).abs() < 1e-12 * dens[0]));
        assert_eq!(driving.len(), path.times.len());
    }

    #[test]
    fn csv_rows_have_one_column_per_header() {
        let d = SymmetricDynamics::new(xi(), 1e-3, 4).unwrap();
        let path = simulate_symmetric(&d, &CircleMeasure::uniform(32, 2.0 * PI), 20, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let (header, rows) = path.csv_rows();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.len() == header.len()));
        assert_eq!(header.len(), 1 + 32 + 9);
    }

    #[test]
    fn ou_zero_noise_is_pure_decay() {
        let mut h = BoundaryField::zeros(3);
        h.coeffs_mut()[1] = 1.0;
        h.coeffs_mut()[6] = 2.0;
        let out = ou_step(&h, 0.1, false, &mut ChaCha8Rng::seed_from_u64(0));
        assert!((out.coeffs()[1] - (-PI * 0.1).exp()).abs() < 1e-15);
        assert!((out.coeffs()[6] - 2.0 * (-3.0 * PI * 0.1).exp()).abs() < 1e-15);
    }

    #[test]
    fn ou_small_ensemble() {
        let r = ou_checks(3, 0.05, 5.0 / PI, 5.0, &[0.1, 0.3], 4000, 2);
        assert!((r.expected_variances[0] - 2.0 * PI).abs() < 1e-15);
        for (v, e) in r.mode_variances.iter().zip(&r.expected_variances) {
            assert!(v.consistent_with(*e, 4.0), "{v:?} vs {e}");
        }
        for (m, e) in r.decay_means.iter().zip(&r.expected_decay) {
            assert!(m.consistent_with(*e, 4.0), "{m:?} vs {e}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SymmetricDynamics::new(1.2, 1e-3, 4).is_err());
        assert!(SymmetricDynamics::new(0.3, 0.0, 4).is_err());
        let d = SymmetricDynamics::new(0.3, 1e-3, 16).unwrap();
        assert!(simulate_symmetric(&d, &CircleMeasure::uniform(32, 1.0), 2, 1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(simulate_symmetric(&d, &CircleMeasure::zero(128), 2, 1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
