//! Smooth compactly supported bumps `b(u) = exp(1 - 1/(1 - u^2))` on `(-1, 1)`.

use num_complex::Complex64;

/// Value and first two derivatives of the unit bump at `u`.
pub fn unit(u: f64) -> [f64; 3] {
    if u.abs() >= 1.0 {
        return [0.0; 3];
    }
    let s = 1.0 - u * u;
    let b = (1.0 - 1.0 / s).exp();
    let g1 = -2.0 * u / (s * s);
    let g2 = -2.0 / (s * s) - 8.0 * u * u / (s * s * s);
    [b, g1 * b, (g2 + g1 * g1) * b]
}

/// Unit bump at a complex argument, for complex-step differentiation.
pub fn unit_complex(u: Complex64) -> Complex64 {
    if u.re.abs() >= 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = 1.0 - u * u;
    (1.0 - 1.0 / s).exp()
}

/// A bump centred at `center` with half-width `width`, scaled by `amp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amp: f64,
}

impl Bump {
    pub fn new(center: f64, width: f64) -> Bump {
        assert!(width > 0.0);
        Bump { center, width, amp: 1.0 }
    }

    pub fn scaled(self, amp: f64) -> Bump {
        Bump { amp: self.amp * amp, ..self }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let [b, b1, b2] = unit((x - self.center) / self.width);
        let iw = 1.0 / self.width;
        [self.amp * b, self.amp * b1 * iw, self.amp * b2 * iw * iw]
    }

    /// Derivative of order `d <= 2` at `x`.
    pub fn deriv(&self, x: f64, d: usize) -> f64 {
        self.eval(x)[d]
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        unit_complex((x - self.center) / self.width) * self.amp
    }
}
