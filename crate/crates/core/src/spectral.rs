//! Spectra of discretized integral operators and the dual-space norm.
//!
//! For the Green kernel the eigensystem is known in closed form,
//! `s_j = (j pi)^{-2}` with `phi_j(t) = sqrt(2) sin(j pi t)`, and the
//! dual-space norm is `||u||_{W*} = (sum_j s_j (u, phi_j)^2)^{1/2}`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fem::{FemFunction, FemSpace};
use crate::kernel::Kernel;
use crate::quadrature::{split_at, QuadratureRule};
use crate::regression::fit_loglog;

/// Mid-point rule matrix `A_ij = h k(t_i, t_j)`, `t_j = a + (j - 1/2) h`.
pub fn quadrature_operator_matrix(kernel: &Kernel, n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::parameter("N", format!("need at least 2 nodes, got {n}")));
    }
    let (a, b) = kernel.domain();
    let h = (b - a) / n as f64;
    let t: Vec<f64> = (0..n).map(|j| a + (j as f64 + 0.5) * h).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| h * kernel.eval_unchecked(t[i], t[j])))
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Shape {
            context: "spectrum input",
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-13 * scale {
                return Err(Error::Config(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn sorted_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_symmetric(a)?;
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].abs().total_cmp(&eig.eigenvalues[i].abs()));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.nrows(), a.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues of a symmetric matrix ordered by descending magnitude.
pub fn spectrum(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    sorted_eigen(a).map(|(v, _)| v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// First and last (1-based, inclusive) indices used.
    pub j0: usize,
    pub j1: usize,
    pub residual_rms: f64,
}

/// Least-squares fit of `log s_j = a + b log j` over `j0 <= j <= j1`
/// (1-based).
pub fn fit_decay(values: &[f64], j0: usize, j1: usize) -> Result<DecayFit> {
    if j0 < 1 || j0 >= j1 || j1 > values.len() {
        return Err(Error::Config(format!(
            "invalid decay window [{j0}, {j1}] for {} values",
            values.len()
        )));
    }
    let js: Vec<f64> = (j0..=j1).map(|j| j as f64).collect();
    let vs = &values[j0 - 1..j1];
    if let Some(&v) = vs.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Domain {
            value: v,
            a: 0.0,
            b: f64::INFINITY,
        });
    }
    let fit = fit_loglog(&js, vs)?;
    Ok(DecayFit {
        slope: fit.slope,
        intercept: fit.intercept,
        j0,
        j1,
        residual_rms: fit.residual_rms,
    })
}

/// Fitting window `[6, min(400, N/2)]` that skips the leading values and the
/// discretization-dominated tail.
pub fn default_decay_window(n: usize) -> (usize, usize) {
    (6, 400.min(n / 2))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralBasis {
    /// `sqrt(2) sin(j pi t)` on `[0, 1]`.
    Sine,
    /// Columns are eigenvectors of a mid-point quadrature matrix.
    Discrete(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSystem {
    singular_values: Vec<f64>,
    basis: SpectralBasis,
}

impl SpectralSystem {
    pub const DEFAULT_TRUNCATION: usize = 64;

    /// Analytic eigensystem of the Green kernel, truncated to `j <= truncation`.
    pub fn green_sine(truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::parameter("truncation", "must be at least 1"));
        }
        Ok(Self {
            singular_values: (1..=truncation).map(|j| (j as f64 * PI).powi(-2)).collect(),
            basis: SpectralBasis::Sine,
        })
    }

    /// Discrete eigensystem of a symmetric quadrature matrix.
    pub fn from_matrix(a: &DMatrix<f64>) -> Result<Self> {
        let (values, vectors) = sorted_eigen(a)?;
        Ok(Self {
            singular_values: values,
            basis: SpectralBasis::Discrete(vectors),
        })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn truncation(&self) -> usize {
        self.singular_values.len()
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    fn require_sine(&self) -> Result<()> {
        match self.basis {
            SpectralBasis::Sine => Ok(()),
            SpectralBasis::Discrete(_) => Err(Error::Unsupported(
                "dual-space norms need the analytic sine eigensystem".into(),
            )),
        }
    }

    fn subdivisions(&self, h: f64) -> usize {
        let worst = self.truncation() as f64 * PI * h;
        (worst.ceil() as usize).max(1)
    }

    /// `J x M` matrix of `(phi_i^{hat}, sqrt(2) sin(j pi t))`.
    pub fn hat_projection_matrix(&self, space: &FemSpace) -> Result<DMatrix<f64>> {
        self.require_sine()?;
        if space.domain() != (0.0, 1.0) {
            return Err(Error::Config("sine eigensystem lives on [0, 1]".into()));
        }
        let rule = QuadratureRule::default();
        let h = space.h();
        let subs = self.subdivisions(h);
        let jmax = self.truncation();
        let mut p = DMatrix::zeros(jmax, space.num_nodes());
        for e in 0..space.num_elements() {
            let (lo, hi) = space.element(e);
            let width = (hi - lo) / subs as f64;
            for s in 0..subs {
                let u = lo + s as f64 * width;
                let v = if s + 1 == subs { hi } else { u + width };
                rule.for_each_node(u, v, |t, w| {
                    let (left, right) = (w * (hi - t) / h, w * (t - lo) / h);
                    for j in 0..jmax {
                        let phi = SQRT_2 * ((j + 1) as f64 * PI * t).sin();
                        p[(j, e)] += phi * left;
                        p[(j, e + 1)] += phi * right;
                    }
                });
            }
        }
        Ok(p)
    }

    /// `u_j = (u, phi_j)` for a FEM function.
    pub fn project_fem(&self, u: &FemFunction) -> Result<Vec<f64>> {
        let p = self.hat_projection_matrix(u.space())?;
        Ok((p * nalgebra::DVector::from_column_slice(u.coeffs())).data.into())
    }

    /// `f_j = (f, phi_j)` for an arbitrary function on `[0, 1]`, integrated on
    /// `panels` panels (each further split at `breakpoints`).
    pub fn project_function<F: Fn(f64) -> f64>(
        &self,
        f: F,
        breakpoints: &[f64],
        panels: usize,
    ) -> Result<Vec<f64>> {
        self.require_sine()?;
        let rule = QuadratureRule::default();
        let panels = panels.max(1) * self.subdivisions(1.0 / panels.max(1) as f64);
        let width = 1.0 / panels as f64;
        let mut out = vec![0.0; self.truncation()];
        for p in 0..panels {
            let lo = p as f64 * width;
            let hi = if p + 1 == panels { 1.0 } else { lo + width };
            for (u, v) in split_at(lo, hi, breakpoints) {
                rule.for_each_node(u, v, |t, w| {
                    let fw = f(t) * w;
                    for (j, o) in out.iter_mut().enumerate() {
                        *o += fw * SQRT_2 * ((j + 1) as f64 * PI * t).sin();
                    }
                });
            }
        }
        Ok(out)
    }

    /// `(sum_j s_j u_j^2)^{1/2}` for given projections.
    pub fn weighted_norm(&self, projections: &[f64]) -> Result<f64> {
        if projections.len() != self.truncation() {
            return Err(Error::Shape {
                context: "spectral projections",
                expected: self.truncation(),
                got: projections.len(),
            });
        }
        Ok(self
            .singular_values
            .iter()
            .zip(projections)
            .map(|(s, u)| s * u * u)
            .sum::<f64>()
            .sqrt())
    }
}

/// Truncated dual-space norm of a FEM function.
pub fn wstar_norm(u: &FemFunction, sys: &SpectralSystem) -> Result<f64> {
    sys.weighted_norm(&sys.project_fem(u)?)
}
