//! Per-atom bulk responses of disk test functions.
//!
//! Every bulk pairing in the generator is linear in the driving measure, so
//! for an atomic measure it is a mass-weighted sum of single-atom responses.
//! These are computed once by polar quadrature and reused for every sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::fields::green_potential;
use crate::gmc::CircleMeasure;
use crate::spectral::{BoundaryField, Circle, DiskTestFunction, PolarGrid};

use super::poisson_kernel;

/// Single-atom bulk responses of `f_1, ..., f_n` at the `m` grid atoms.
#[derive(Debug, Clone)]
pub struct BulkResponse {
    degree: usize,
    atoms: usize,
    /// `[i][c]`: coefficients of `k -> int (D_{delta_c} f_i) H e_k`.
    transport: Vec<Vec<Vec<f64>>>,
    /// `[i][c]`: `int f_i Re L_{delta_c}'`.
    mu_term: Vec<Vec<f64>>,
    /// `[i][c]`: `f_i^*(w_c) = int f_i H(., w_c)`.
    poisson: Vec<Vec<f64>>,
    /// `[i][j][c]`: `-2 pi int f_i G (D_{delta_c} f_j)`.
    green: Vec<Vec<Vec<f64>>>,
    integral: Vec<f64>,
}

/// Bulk pairings for one field and one measure.
#[derive(Debug, Clone)]
pub struct BulkTerms {
    /// `int (Hh) D_mu f_i`.
    pub transport: Vec<f64>,
    /// `int f_i Re L_mu'`.
    pub mu_term: Vec<f64>,
    /// `int f_i^* dmu`.
    pub poisson: Vec<f64>,
    /// `-2 pi int f_i G D_mu f_j`.
    pub green: Vec<Vec<f64>>,
    /// `int f_i dlambda`.
    pub integral: Vec<f64>,
}

impl BulkResponse {
    /// Responses at the atoms of an `m`-point grid measure, for fields of
    /// degree `degree`, with `n_r` radial nodes.
    pub fn new(fs: &[DiskTestFunction], degree: usize, m: usize, n_r: usize) -> Result<Self> {
        let refs: Vec<&DiskTestFunction> = fs.iter().collect();
        let grid = PolarGrid::covering(&refs, n_r, 256.max(4 * degree + 4))?;
        let pts = grid.points();
        let samples: Vec<(Vec<f64>, Vec<Complex64>)> = fs.iter().map(|f| f.sample(&grid)).collect();
        let potentials: Vec<Vec<f64>> = fs.iter().map(|f| green_potential(f, &grid)).collect();
        let integral = samples.iter().map(|(v, _)| grid.integrate(v)).collect();
        let atoms = Circle::new(m).points();
        let n = fs.len();

        struct AtomRow {
            transport: Vec<Vec<f64>>,
            mu_term: Vec<f64>,
            poisson: Vec<f64>,
            green: Vec<Vec<f64>>,
        }
        let rows: Vec<AtomRow> = atoms
            .par_iter()
            .map(|&w| {
                let ls: Vec<(Complex64, Complex64)> = pts
                    .iter()
                    .map(|&z| (-z * (z + w) / (z - w), -(z * z - 2.0 * z * w - w * w) / ((z - w) * (z - w))))
                    .collect();
                let hw: Vec<f64> = pts.iter().map(|&z| poisson_kernel(z, w)).collect();
                let re_dl: Vec<f64> = ls.iter().map(|(_, dl)| dl.re).collect();
                let mut row = AtomRow {
                    transport: Vec::with_capacity(n),
                    mu_term: Vec::with_capacity(n),
                    poisson: Vec::with_capacity(n),
                    green: vec![vec![0.0; n]; n],
                };
                for (j, (v, dz)) in samples.iter().enumerate() {
                    let d: Vec<f64> = (0..pts.len())
                        .map(|k| 2.0 * v[k] * ls[k].1.re + 2.0 * (ls[k].0 * dz[k]).re)
                        .collect();
                    row.transport.push(grid.project_harmonic(&d, degree).coeffs().to_vec());
                    row.mu_term.push(grid.pair(v, &re_dl));
                    row.poisson.push(grid.pair(v, &hw));
                    for (i, u) in potentials.iter().enumerate() {
                        row.green[i][j] = -2.0 * PI * grid.pair(u, &d);
                    }
                }
                row
            })
            .collect();

        let mut out = BulkResponse {
            degree,
            atoms: m,
            transport: vec![Vec::with_capacity(m); n],
            mu_term: vec![Vec::with_capacity(m); n],
            poisson: vec![Vec::with_capacity(m); n],
            green: vec![vec![Vec::with_capacity(m); n]; n],
            integral,
        };
        for row in rows {
            for i in 0..n {
                out.transport[i].push(row.transport[i].clone());
                out.mu_term[i].push(row.mu_term[i]);
                out.poisson[i].push(row.poisson[i]);
                for j in 0..n {
                    out.green[i][j].push(row.green[i][j]);
                }
            }
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    /// Bulk pairings for the field `h` (degree at most `degree`) and `mu` on the atom grid.
    pub fn evaluate(&self, h: &BoundaryField, mu: &CircleMeasure) -> BulkTerms {
        assert_eq!(mu.m(), self.atoms, "measure grid does not match the atom grid");
        let n = self.integral.len();
        let masses: Vec<f64> = (0..self.atoms).map(|c| mu.cell_mass(c)).collect();
        let weighted = |v: &[f64]| -> f64 { v.iter().zip(&masses).map(|(a, b)| a * b).sum() };
        let hc = h.with_degree(self.degree);
        let transport = (0..n)
            .map(|i| {
                let mut acc = vec![0.0; 2 * self.degree + 1];
                for (row, mass) in self.transport[i].iter().zip(&masses) {
                    for (a, r) in acc.iter_mut().zip(row) {
                        *a += mass * r;
                    }
                }
                acc.iter().zip(hc.coeffs()).map(|(a, b)| a * b).sum()
            })
            .collect();
        BulkTerms {
            transport,
            mu_term: self.mu_term.iter().map(|v| weighted(v)).collect(),
            poisson: self.poisson.iter().map(|v| weighted(v)).collect(),
            green: self.green.iter().map(|r| r.iter().map(|v| weighted(v)).collect()).collect(),
            integral: self.integral.clone(),
        }
    }
}

impl BulkTerms {
    /// Bulk drift of symbol `i`:
    /// `int (Hh) D_mu f - 2 pi alpha int f^* dmu + chi int f Re L' - beta int f`.
    pub fn drift(&self, i: usize, params: &crate::fields::CouplingParams) -> f64 {
        self.transport[i] - 2.0 * PI * params.alpha * self.poisson[i] + params.chi * self.mu_term[i]
            - params.beta * self.integral[i]
    }
}
