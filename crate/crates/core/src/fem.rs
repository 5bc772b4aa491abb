//! Continuous piecewise-linear finite elements on a uniform 1-D mesh.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::{split_at, QuadratureRule};

/// Uniform mesh of `nodes` points on `[a, b]` carrying the P1 hat basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemSpace {
    a: f64,
    b: f64,
    nodes: usize,
}

impl FemSpace {
    pub fn new(a: f64, b: f64, nodes: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Config(format!("invalid interval [{a}, {b}]")));
        }
        if nodes < 2 {
            return Err(Error::Config(format!("mesh needs at least 2 nodes, got {nodes}")));
        }
        Ok(Self { a, b, nodes })
    }

    /// Mesh on `[a, b]` whose spacing is as close as possible to `h`
    /// (exact when `(b - a) / h` is an integer).
    pub fn with_mesh_size(a: f64, b: f64, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::parameter("h", format!("mesh size must be positive, got {h}")));
        }
        let cells = ((b - a) / h).round().max(1.0) as usize;
        Self::new(a, b, cells + 1)
    }

    /// The default mesh used throughout the experiments: `h = 0.02` on `[0, 1]`.
    pub fn unit_default() -> Self {
        Self::new(0.0, 1.0, 51).expect("valid")
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes
    }

    pub fn num_elements(&self) -> usize {
        self.nodes - 1
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.nodes - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.nodes {
            self.b
        } else {
            self.a + j as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.node(j)).collect()
    }

    /// Endpoints of element `e`, spanning nodes `e` and `e + 1`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.node(e), self.node(e + 1))
    }

    /// Element containing `t`, clamped to the mesh.
    pub fn element_of(&self, t: f64) -> usize {
        let e = ((t - self.a) / self.h()).floor();
        (e.max(0.0) as usize).min(self.nodes - 2)
    }

    /// Value of hat function `j` at `t`.
    pub fn basis(&self, j: usize, t: f64) -> f64 {
        let h = self.h();
        let r = 1.0 - ((t - self.node(j)) / h).abs();
        if t < self.a || t > self.b {
            0.0
        } else {
            r.max(0.0)
        }
    }

    pub fn mass_matrix(&self) -> MassMatrix {
        let h = self.h();
        let mut diag = vec![2.0 * h / 3.0; self.nodes];
        diag[0] = h / 3.0;
        diag[self.nodes - 1] = h / 3.0;
        MassMatrix {
            diag,
            off: vec![h / 6.0; self.nodes - 1],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate<F: Fn(f64) -> f64>(&self, f: F) -> Result<FemFunction> {
        let coeffs = self
            .nodes()
            .into_iter()
            .map(|t| {
                let v = f(t);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite(format!("f({t}) = {v}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FemFunction {
            space: *self,
            coeffs,
        })
    }

    pub fn zero(&self) -> FemFunction {
        FemFunction {
            space: *self,
            coeffs: vec![0.0; self.nodes],
        }
    }

    pub fn function(&self, coeffs: Vec<f64>) -> Result<FemFunction> {
        FemFunction::new(*self, coeffs)
    }

    /// Load vector `(f, phi_i)` by elementwise Gauss quadrature, splitting
    /// elements at the given breakpoints of `f`.
    pub fn load_vector<F: Fn(f64) -> f64>(
        &self,
        f: F,
        breakpoints: &[f64],
        rule: &QuadratureRule,
    ) -> DVector<f64> {
        let mut out = DVector::zeros(self.nodes);
        let h = self.h();
        for e in 0..self.num_elements() {
            let (lo, hi) = self.element(e);
            for (u, v) in split_at(lo, hi, breakpoints) {
                rule.for_each_node(u, v, |t, w| {
                    let ft = f(t) * w;
                    out[e] += ft * (hi - t) / h;
                    out[e + 1] += ft * (t - lo) / h;
                });
            }
        }
        out
    }
}

/// Free-function form of [`FemSpace::mass_matrix`].
pub fn mass_matrix(space: &FemSpace) -> MassMatrix {
    space.mass_matrix()
}

/// Free-function form of [`FemSpace::interpolate`].
pub fn interpolate<F: Fn(f64) -> f64>(space: &FemSpace, f: F) -> Result<FemFunction> {
    space.interpolate(f)
}

/// Free-function form of [`FemFunction::l2_norm`].
pub fn l2_norm(u: &FemFunction) -> f64 {
    u.l2_norm()
}

/// The P1 mass matrix `(phi_j, phi_i)`, stored as its tridiagonal bands.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl MassMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &o) in self.off.iter().enumerate() {
            m[(i, i + 1)] = o;
            m[(i + 1, i)] = o;
        }
        m
    }

    pub fn mul_vec(&self, c: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * c[i];
                if i > 0 {
                    v += self.off[i - 1] * c[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * c[i + 1];
                }
                v
            })
            .collect()
    }

    /// `u^T M v`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn quad_form(&self, c: &[f64]) -> f64 {
        self.inner(c, c)
    }
}

/// A P1 function: nodal coefficients on a [`FemSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FemFunction {
    space: FemSpace,
    coeffs: Vec<f64>,
}

impl FemFunction {
    pub fn new(space: FemSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.num_nodes() {
            return Err(Error::Shape {
                context: "FEM coefficients",
                expected: space.num_nodes(),
                got: coeffs.len(),
            });
        }
        Ok(Self { space, coeffs })
    }

    pub fn space(&self) -> &FemSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        let e = self.space.element_of(t);
        let (lo, hi) = self.space.element(e);
        let r = (t - lo) / (hi - lo);
        (1.0 - r) * self.coeffs[e] + r * self.coeffs[e + 1]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            space: self.space,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `sqrt(c^T M c)`.
    pub fn l2_norm(&self) -> f64 {
        self.space.mass_matrix().quad_form(&self.coeffs).max(0.0).sqrt()
    }

    /// `||u - f||_{L^2}` for an arbitrary function `f`, integrated elementwise
    /// with `rule`, splitting elements at `breakpoints` and into `subdivisions`
    /// equal panels.
    pub fn l2_distance<F: Fn(f64) -> f64>(
        &self,
        f: F,
        breakpoints: &[f64],
        subdivisions: usize,
        rule: &QuadratureRule,
    ) -> f64 {
        let mut acc = 0.0;
        for e in 0..self.space.num_elements() {
            let (lo, hi) = self.space.element(e);
            let (c0, c1) = (self.coeffs[e], self.coeffs[e + 1]);
            acc += rule.integrate_composite(lo, hi, subdivisions, breakpoints, |t| {
                let r = (t - lo) / (hi - lo);
                let d = (1.0 - r) * c0 + r * c1 - f(t);
                d * d
            });
        }
        acc.sqrt()
    }
}
