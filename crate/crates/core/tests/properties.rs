use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lqg_growth::cli::report::format_number;
use lqg_growth::dynamics::cir_step;
use lqg_growth::gmc::{chaos_measure, ChaosSign, CircleMeasure};
use lqg_growth::kernels::loewner_field;
use lqg_growth::loewner::{conformal_radius, flow, DrivingPath};
use lqg_growth::{BoundaryField, Circle};

fn field(n: usize, seed: u64) -> BoundaryField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BoundaryField::from_coeffs((0..2 * n + 1).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn positive_measure(m: usize, seed: u64) -> CircleMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CircleMeasure::from_density((0..m).map(|_| rng.gen_range(0.05..1.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chaos_shift_multiplies_by_exponential(seed in 0u64..10_000, x in -3.0f64..3.0, xi in 0.05f64..0.95) {
        let h = field(8, seed);
        let circle = Circle::new(64);
        let base = chaos_measure(&h, ChaosSign::Minus, xi, &circle).unwrap();
        let shifted = chaos_measure(&(&h + &BoundaryField::constant(8, x)), ChaosSign::Minus, xi, &circle).unwrap();
        let factor = (-xi * x).exp();
        for (a, b) in base.density().iter().zip(shifted.density()) {
            prop_assert!((b - factor * a).abs() <= 1e-12 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn loewner_field_is_linear_in_the_measure(seed in 0u64..10_000, a in -2.0f64..2.0, b in -2.0f64..2.0, r in 0.0f64..0.75, t in 0.0f64..6.3) {
        let (mu1, mu2) = (positive_measure(32, seed), positive_measure(32, seed + 1));
        let z = Complex64::from_polar(r, t);
        let lhs = loewner_field(&mu1.combine(a, &mu2, b), z).unwrap();
        let rhs = loewner_field(&mu1, z).unwrap() * a + loewner_field(&mu2, z).unwrap() * b;
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn cir_steps_stay_nonnegative(seed in 0u64..10_000, x in 0.0f64..2.0, a in -0.5f64..1.0, sigma in 0.1f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = x;
        for _ in 0..50 {
            y = cir_step(y, a, sigma, 1e-3, &mut rng).0;
            prop_assert!(y >= 0.0 && y.is_finite());
        }
    }

    #[test]
    fn log_derivative_rate_is_total_mass(seed in 0u64..10_000, mass in 0.1f64..3.0) {
        let mu = positive_measure(32, seed);
        let mu = mu.scaled(mass / mu.total_mass());
        let cr = conformal_radius(&DrivingPath::constant(mu, 0.5).unwrap()).unwrap();
        prop_assert!(cr.max_rate_error < 1e-8);
        prop_assert!((cr.ode - cr.mass).abs() < 1e-8 * cr.mass);
    }

    #[test]
    fn time_change_rescales_the_driving_measure(seed in 0u64..10_000, c in 0.25f64..4.0) {
        let mu = positive_measure(32, seed);
        let z0 = Complex64::new(0.1, 0.2);
        let slow = flow(&DrivingPath::constant(mu.clone(), 0.4).unwrap(), z0).unwrap().end();
        let fast = flow(&DrivingPath::constant(mu.scaled(c), 0.4 / c).unwrap(), z0).unwrap().end();
        prop_assert!((slow.1 - fast.1).norm() < 1e-8);
    }

    #[test]
    fn csv_numbers_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
