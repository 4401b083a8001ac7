//! Profiles `psi` of cylindrical functionals: products of one-dimensional
//! bumps, and their Gaussian smoothings `P_Sigma psi`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bump::Bump;
use crate::error::{Error, Result};
use crate::quad::{gauss_hermite_normal, tanh_rule_on};

/// Largest number of arguments a profile may take.
pub const MAX_DIM: usize = 4;

/// Value, gradient and Hessian of a profile at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet {
    pub const ZERO: Jet = Jet { value: 0.0, grad: [0.0; MAX_DIM], hess: [[0.0; MAX_DIM]; MAX_DIM] };

    fn add_scaled(&mut self, other: &Jet, c: f64) {
        self.value += c * other.value;
        for i in 0..MAX_DIM {
            self.grad[i] += c * other.grad[i];
            for j in 0..MAX_DIM {
                self.hess[i][j] += c * other.hess[i][j];
            }
        }
    }
}

/// `psi(x) = prod_i b_i(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    bumps: Vec<Bump>,
}

impl Profile {
    pub fn new(bumps: Vec<Bump>) -> Result<Self> {
        if bumps.is_empty() || bumps.len() > MAX_DIM {
            return Err(Error::InvalidParameter(format!("profile dimension must be in 1..={MAX_DIM}")));
        }
        Ok(Profile { bumps })
    }

    pub fn dim(&self) -> usize {
        self.bumps.len()
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    /// Support box, one interval per argument.
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.bumps.iter().map(|b| b.support()).collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.bumps.iter().zip(x).map(|(b, x)| b.eval(*x)[0]).product()
    }

    /// Evaluation at complex arguments, for complex-step derivatives.
    pub fn value_complex(&self, x: &[Complex64]) -> Complex64 {
        self.bumps.iter().zip(x).map(|(b, x)| b.eval_complex(*x)).product()
    }

    pub fn jet(&self, x: &[f64]) -> Jet {
        let n = self.dim();
        let mut d = [[0.0; 3]; MAX_DIM];
        for i in 0..n {
            d[i] = self.bumps[i].eval(x[i]);
            if d[i] == [0.0; 3] {
                return Jet::ZERO;
            }
        }
        let mut jet = Jet::ZERO;
        // products excluding one or two factors, without division
        let prod_except = |skip: &[usize]| -> f64 {
            (0..n).filter(|k| !skip.contains(k)).map(|k| d[k][0]).product()
        };
        jet.value = prod_except(&[]);
        for i in 0..n {
            let rest = prod_except(&[i]);
            jet.grad[i] = d[i][1] * rest;
            jet.hess[i][i] = d[i][2] * rest;
            for j in 0..i {
                let v = d[i][1] * d[j][1] * prod_except(&[i, j]);
                jet.hess[i][j] = v;
                jet.hess[j][i] = v;
            }
        }
        jet
    }
}

/// Nodes per translate in [`SmoothedProfile::line_rule`].
pub const LINE_NODES: usize = 48;

/// `P_Sigma psi(x + s) = E psi(x + s + Sigma^{1/2} N)` by a tensor Gauss-Hermite
/// rule, with a fixed argument shift `s`.
///
/// The rule is a finite sum of translates of `psi`, so the smoothed profile
/// is again compactly supported and its derivatives are exact.
#[derive(Debug, Clone)]
pub struct SmoothedProfile {
    profile: Profile,
    shift: Vec<f64>,
    offsets: Vec<[f64; MAX_DIM]>,
    weights: Vec<f64>,
}

impl SmoothedProfile {
    /// `nodes` Gauss-Hermite points per dimension; `sigma` must be positive semidefinite.
    pub fn new(profile: Profile, sigma: &DMatrix<f64>, shift: Vec<f64>, nodes: usize) -> Result<Self> {
        let n = profile.dim();
        if sigma.nrows() != n || sigma.ncols() != n || shift.len() != n {
            return Err(Error::InvalidParameter("covariance and shift must match the profile dimension".into()));
        }
        let l = cholesky_psd(sigma)?;
        let (z, w) = gauss_hermite_normal(nodes);
        let total = nodes.pow(n as u32);
        let mut offsets = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut zz = [0.0; MAX_DIM];
            let mut weight = 1.0;
            for k in 0..n {
                let a = rem % nodes;
                rem /= nodes;
                zz[k] = z[a];
                weight *= w[a];
            }
            let mut off = [0.0; MAX_DIM];
            for i in 0..n {
                off[i] = (0..=i).map(|k| l[(i, k)] * zz[k]).sum();
            }
            offsets.push(off);
            weights.push(weight);
        }
        Ok(SmoothedProfile { profile, shift, offsets, weights })
    }

    /// No smoothing and no shift.
    pub fn identity(profile: Profile) -> Self {
        let n = profile.dim();
        SmoothedProfile { profile, shift: vec![0.0; n], offsets: vec![[0.0; MAX_DIM]], weights: vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    /// Support box of the smoothed profile.
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.profile
            .support()
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let lo = self.offsets.iter().map(|o| o[i]).fold(f64::INFINITY, f64::min);
                let hi = self.offsets.iter().map(|o| o[i]).fold(f64::NEG_INFINITY, f64::max);
                (a - self.shift[i] - hi, b - self.shift[i] - lo)
            })
            .collect()
    }

    pub fn jet(&self, x: &[f64]) -> Jet {
        let n = self.dim();
        let mut out = Jet::ZERO;
        let mut y = [0.0; MAX_DIM];
        for (off, w) in self.offsets.iter().zip(&self.weights) {
            for i in 0..n {
                y[i] = x[i] + self.shift[i] + off[i];
            }
            let j = self.profile.jet(&y[..n]);
            if j.value != 0.0 || j.grad.iter().any(|g| *g != 0.0) {
                out.add_scaled(&j, *w);
            }
        }
        out
    }
}

impl SmoothedProfile {
    /// Quadrature nodes `(m, weight, jet)` for `int g(m, psi~(x0 + m dir)) dm`
    /// with `g` linear in the jet. Each translate of `psi` is integrated on its
    /// own support along the line, where it is analytic, so the rule stays
    /// accurate even though `psi~` has many interior non-analytic points.
    /// Translates whose Gauss-Hermite weight is below `1e-16` of the largest
    /// are dropped.
    pub fn line_rule(&self, x0: &[f64], dir: &[f64]) -> Vec<(f64, f64, Jet)> {
        let n = self.dim();
        let support = self.profile.support();
        let w_max = self.weights.iter().copied().fold(0.0, f64::max);
        let mut out = Vec::new();
        let mut y = [0.0; MAX_DIM];
        'offsets: for (off, &w) in self.offsets.iter().zip(&self.weights) {
            if w < 1e-16 * w_max {
                continue;
            }
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..n {
                let base = x0[i] + self.shift[i] + off[i];
                let (a, b) = support[i];
                if dir[i].abs() < 1e-14 {
                    if base <= a || base >= b {
                        continue 'offsets;
                    }
                    continue;
                }
                let (m1, m2) = ((a - base) / dir[i], (b - base) / dir[i]);
                lo = lo.max(m1.min(m2));
                hi = hi.min(m1.max(m2));
            }
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                continue;
            }
            let (ms, ws) = tanh_rule_on(LINE_NODES, lo, hi);
            for (m, wq) in ms.into_iter().zip(ws) {
                for i in 0..n {
                    y[i] = x0[i] + self.shift[i] + off[i] + m * dir[i];
                }
                out.push((m, w * wq, self.profile.jet(&y[..n])));
            }
        }
        out
    }
}

/// Lower Cholesky factor of a positive semidefinite matrix; zero pivots
/// (within round-off) give zero columns.
fn cholesky_psd(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    let scale = (0..n).map(|i| s[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let d = s[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d < -1e-12 * scale {
            return Err(Error::NotPsd(d));
        }
        let d = d.max(0.0).sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let v = s[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = if d > 1e-14 * scale.sqrt() { v / d } else { 0.0 };
        }
    }
    Ok(l)
}
