//! Sampled Tikhonov regularization on a P1 finite element space.
//!
//! Minimizes `|K x - w|_n^2 + alpha ||x||^2` over the FEM space, where
//! `|v|_n` is the root-mean-square over the `n` sample points. The normal
//! equations are
//!
//! ```text
//! (G^T G / n + alpha M) c = G^T w / n
//! ```
//!
//! with `G` the sampled operator matrix and `M` the mass matrix.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::design::{Observation, SampleDesign};
use crate::error::{Error, Result};
use crate::fem::{FemFunction, FemSpace, MassMatrix};
use crate::kernel::Kernel;
use crate::operator::operator_matrix;
use crate::quadrature::QuadratureRule;

/// `(1/n sum v_i^2)^{1/2}`.
pub fn empirical_seminorm(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Config("empirical semi-norm of an empty vector".into()));
    }
    Ok((values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::parameter("alpha", format!("must be positive and finite, got {alpha}")))
    }
}

/// Assembles `A = G^T G / n + alpha M` and `b = G^T w / n`.
pub fn assemble(
    g: &DMatrix<f64>,
    mass: &MassMatrix,
    w: &[f64],
    alpha: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_alpha(alpha)?;
    if w.len() != g.nrows() {
        return Err(Error::Shape {
            context: "observation vector",
            expected: g.nrows(),
            got: w.len(),
        });
    }
    if mass.dim() != g.ncols() {
        return Err(Error::Shape {
            context: "mass matrix",
            expected: g.ncols(),
            got: mass.dim(),
        });
    }
    let n = g.nrows() as f64;
    let gram = gram_matrix(g);
    let a = system_matrix(&gram, mass, alpha);
    let b = g.tr_mul(&DVector::from_column_slice(w)) / n;
    Ok((a, b))
}

fn gram_matrix(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows() as f64;
    let mut gram = g.tr_mul(g) / n;
    symmetrize(&mut gram);
    gram
}

fn system_matrix(gram: &DMatrix<f64>, mass: &MassMatrix, alpha: f64) -> DMatrix<f64> {
    let mut a = gram.clone();
    let (d, o) = (mass.diagonal(), mass.off_diagonal());
    for i in 0..d.len() {
        a[(i, i)] += alpha * d[i];
    }
    for (i, &v) in o.iter().enumerate() {
        a[(i, i + 1)] += alpha * v;
        a[(i + 1, i)] += alpha * v;
    }
    a
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Cholesky factorization of an SPD system, with one step of iterative
/// refinement on every solve.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape {
                context: "system matrix",
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let chol = Cholesky::new(a.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { matrix: a, chol })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.matrix.nrows() {
            return Err(Error::Shape {
                context: "right-hand side",
                expected: self.matrix.nrows(),
                got: b.len(),
            });
        }
        let mut c = self.chol.solve(b);
        let r = b - &self.matrix * &c;
        c += self.chol.solve(&r);
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("solution of the regularized system".into()));
        }
        Ok(c)
    }
}

/// Solves `A c = b` for symmetric positive definite `A`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    SpdFactor::new(a.clone())?.solve(b)
}

/// A regularized reconstruction and its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSolution {
    pub x: FemFunction,
    pub alpha: f64,
    /// `|K x - w|_n`.
    pub discrepancy: f64,
    /// `||x||_{L^2}`.
    pub solution_norm: f64,
    /// `discrepancy^2 + alpha * solution_norm^2`.
    pub objective: f64,
}

/// Everything about a problem that does not depend on the data or on
/// `alpha`: the sampled operator, its Gram matrix and the mass matrix.
/// Building this once lets parameter searches and Monte Carlo loops reuse it.
#[derive(Debug, Clone)]
pub struct Discretization {
    kernel: Kernel,
    space: FemSpace,
    design: SampleDesign,
    g: DMatrix<f64>,
    gram: DMatrix<f64>,
    mass: MassMatrix,
}

impl Discretization {
    pub fn new(
        kernel: &Kernel,
        space: &FemSpace,
        design: &SampleDesign,
        quad: &QuadratureRule,
    ) -> Result<Self> {
        let g = operator_matrix(kernel, space, design, quad)?;
        let gram = gram_matrix(&g);
        Ok(Self {
            kernel: kernel.clone(),
            space: *space,
            design: design.clone(),
            g,
            gram,
            mass: space.mass_matrix(),
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn space(&self) -> &FemSpace {
        &self.space
    }

    pub fn design(&self) -> &SampleDesign {
        &self.design
    }

    pub fn operator(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `G^T G / n`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn mass(&self) -> &MassMatrix {
        &self.mass
    }

    pub fn n(&self) -> usize {
        self.design.len()
    }

    /// `G^T w / n`.
    pub fn rhs(&self, w: &[f64]) -> Result<DVector<f64>> {
        if w.len() != self.n() {
            return Err(Error::Shape {
                context: "observation vector",
                expected: self.n(),
                got: w.len(),
            });
        }
        Ok(self.g.tr_mul(&DVector::from_column_slice(w)) / self.n() as f64)
    }

    pub fn factor(&self, alpha: f64) -> Result<SpdFactor> {
        check_alpha(alpha)?;
        SpdFactor::new(system_matrix(&self.gram, &self.mass, alpha))
    }

    /// `(K v)(s_i)` for a FEM function on this mesh.
    pub fn apply(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        crate::operator::apply_operator(&self.g, coeffs)
    }

    pub fn solve(&self, w: &[f64], alpha: f64) -> Result<RegularizedSolution> {
        let factor = self.factor(alpha)?;
        self.solve_factored(&factor, alpha, w)
    }

    pub fn solve_factored(
        &self,
        factor: &SpdFactor,
        alpha: f64,
        w: &[f64],
    ) -> Result<RegularizedSolution> {
        let c = factor.solve(&self.rhs(w)?)?;
        self.summarize(c.data.into(), alpha, w)
    }

    fn summarize(&self, coeffs: Vec<f64>, alpha: f64, w: &[f64]) -> Result<RegularizedSolution> {
        let x = FemFunction::new(self.space, coeffs)?;
        let discrepancy = self.discrepancy(x.coeffs(), w)?;
        let solution_norm = x.l2_norm();
        Ok(RegularizedSolution {
            x,
            alpha,
            discrepancy,
            solution_norm,
            objective: discrepancy * discrepancy + alpha * solution_norm * solution_norm,
        })
    }

    /// `|K v - w|_n`.
    pub fn discrepancy(&self, coeffs: &[f64], w: &[f64]) -> Result<f64> {
        let kv = self.apply(coeffs)?;
        if w.len() != kv.len() {
            return Err(Error::Shape {
                context: "observation vector",
                expected: kv.len(),
                got: w.len(),
            });
        }
        let r: Vec<f64> = kv.iter().zip(w).map(|(a, b)| a - b).collect();
        empirical_seminorm(&r)
    }

    /// The Tikhonov functional `|K v - w|_n^2 + alpha ||v||^2`.
    pub fn objective(&self, coeffs: &[f64], w: &[f64], alpha: f64) -> Result<f64> {
        let d = self.discrepancy(coeffs, w)?;
        Ok(d * d + alpha * self.mass.quad_form(coeffs))
    }

    /// `(alpha ||v||^2 + |K v|_n^2)^{1/2}`.
    pub fn energy_norm(&self, v: &FemFunction, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::parameter("alpha", format!("must be non-negative, got {alpha}")));
        }
        let kv = empirical_seminorm(&self.apply(v.coeffs())?)?;
        Ok((alpha * self.mass.quad_form(v.coeffs()) + kv * kv).sqrt())
    }

    /// Residual of the discrete variational identity
    /// `(Kx, K phi_i)_n + alpha (x, phi_i) - (w, K phi_i)_n` for every `i`.
    pub fn variational_residual(&self, coeffs: &[f64], w: &[f64], alpha: f64) -> Result<Vec<f64>> {
        let c = DVector::from_column_slice(coeffs);
        let lhs = &self.gram * &c + DVector::from_vec(self.mass.mul_vec(coeffs)) * alpha;
        Ok((lhs - self.rhs(w)?).data.into())
    }
}

/// Solves the sampled Tikhonov problem for one `alpha` with the default
/// quadrature.
pub fn solve_regularized(
    kernel: &Kernel,
    space: &FemSpace,
    obs: &Observation<'_>,
    alpha: f64,
) -> Result<RegularizedSolution> {
    check_alpha(alpha)?;
    Discretization::new(kernel, space, obs.design(), &QuadratureRule::default())?
        .solve(obs.values(), alpha)
}

/// `(alpha ||v||^2 + |K v|_n^2)^{1/2}`; `alpha = 0` is allowed.
pub fn energy_norm(
    kernel: &Kernel,
    space: &FemSpace,
    design: &SampleDesign,
    v: &FemFunction,
    alpha: f64,
) -> Result<f64> {
    Discretization::new(kernel, space, design, &QuadratureRule::default())?.energy_norm(v, alpha)
}
