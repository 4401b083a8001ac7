//! Numerical gates shared by the check suites and the acceptance tests.

/// Spectral identities on band-limited data.
pub const SPECTRAL: f64 = 1e-10;

/// Kernel-V contraction identities evaluated on the grid.
pub const CONTRACTION: f64 = 1e-8;

/// Identities that mix 2-D polar quadrature with spectral evaluation (relative).
pub const QUADRATURE_REL: f64 = 1e-4;

/// Deterministic appendix identities (tilde-DF shift, derivative martingale).
pub const DETERMINISTIC: f64 = 1e-10;

/// Algebraic pure-gravity residuals.
pub const ALGEBRAIC: f64 = 1e-14;

/// Loewner flow against the exact scaling solution and the conformal radius.
pub const LOEWNER_FLOW: f64 = 1e-8;

/// Hadamard and smooth-metric checks (relative).
pub const LOEWNER_FIRST_ORDER: f64 = 0.01;

/// Monte Carlo gate in standard errors.
pub const MC_SIGMAS: f64 = 3.0;

/// Relative gate on the total-mass drift slope.
pub const MASS_SLOPE_REL: f64 = 0.02;

/// Relative gate on the empirical bracket.
pub const BRACKET_REL: f64 = 0.05;

/// Observed convergence order of a first-order finite difference, `|rate - 1|`.
pub const CONVERGENCE_ORDER: f64 = 0.2;

/// Relative gate on the decay of the first mode of the xi = 0 baseline.
pub const OU_DECAY_REL: f64 = 0.02;
