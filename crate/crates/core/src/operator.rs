//! Discretized forward operator: `G[i][j] = (K phi_j)(s_i)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::design::SampleDesign;
use crate::error::{Error, Result};
use crate::fem::FemSpace;
use crate::kernel::Kernel;
use crate::quadrature::{split_at, QuadratureRule};

/// Dense `n x M` matrix of the operator applied to each hat function and
/// sampled at the design points, using composite Gauss–Legendre over the
/// mesh elements. Elements are split at `t = s_i` for kernels with a
/// diagonal kink.
pub fn operator_matrix(
    kernel: &Kernel,
    space: &FemSpace,
    design: &SampleDesign,
    quad: &QuadratureRule,
) -> Result<DMatrix<f64>> {
    operator_matrix_with(kernel, space, design, quad, true)
}

/// As [`operator_matrix`], with control over splitting at the kernel kink.
/// Only useful for demonstrating the loss of accuracy without the split.
pub fn operator_matrix_with(
    kernel: &Kernel,
    space: &FemSpace,
    design: &SampleDesign,
    quad: &QuadratureRule,
    split_kink: bool,
) -> Result<DMatrix<f64>> {
    if design.is_empty() {
        return Err(Error::Config("empty sample design".into()));
    }
    let (a, b) = kernel.domain();
    if space.domain() != (a, b) {
        return Err(Error::Config(format!(
            "mesh domain {:?} differs from kernel domain {:?}",
            space.domain(),
            (a, b)
        )));
    }
    design.check_within(a, b)?;

    let m = space.num_nodes();
    // Rows are independent, so the parallel result is bit-identical to the
    // sequential one.
    let rows: Vec<Vec<f64>> = design
        .points()
        .par_iter()
        .map(|&s| operator_row(kernel, space, quad, s, split_kink))
        .collect();
    Ok(DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]))
}

fn operator_row(
    kernel: &Kernel,
    space: &FemSpace,
    quad: &QuadratureRule,
    s: f64,
    split_kink: bool,
) -> Vec<f64> {
    let m = space.num_nodes();
    let h = space.h();
    let mut row = vec![0.0; m];
    let tab_breaks = kernel.t_breakpoints();
    let mut cuts: Vec<f64> = Vec::with_capacity(4);
    for e in 0..space.num_elements() {
        let (lo, hi) = space.element(e);
        cuts.clear();
        if split_kink && kernel.has_diagonal_kink() {
            cuts.push(s);
        }
        if !tab_breaks.is_empty() {
            let start = tab_breaks.partition_point(|&g| g <= lo);
            cuts.extend(tab_breaks[start..].iter().take_while(|&&g| g < hi));
        }
        let (mut left, mut right) = (0.0, 0.0);
        for (u, v) in split_at(lo, hi, &cuts) {
            quad.for_each_node(u, v, |t, w| {
                let kw = kernel.eval_unchecked(s, t) * w;
                left += kw * (hi - t);
                right += kw * (t - lo);
            });
        }
        row[e] += left / h;
        row[e + 1] += right / h;
    }
    row
}

/// `G c`: the operator applied to a FEM coefficient vector, at the samples.
pub fn apply_operator(g: &DMatrix<f64>, coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.len() != g.ncols() {
        return Err(Error::Shape {
            context: "operator coefficients",
            expected: g.ncols(),
            got: coeffs.len(),
        });
    }
    let c = DVector::from_column_slice(coeffs);
    Ok((g * c).data.into())
}

/// `(K f)(s)` at each point for an arbitrary function `f` with known
/// discontinuities, by composite quadrature with `panels` panels split at
/// `s`, the breakpoints, and any tabulated grid lines.
pub fn apply_to_function<F>(
    kernel: &Kernel,
    f: F,
    breakpoints: &[f64],
    points: &[f64],
    quad: &QuadratureRule,
    panels: usize,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + Sync,
{
    let (a, b) = kernel.domain();
    for &s in points {
        kernel.check_point(s)?;
    }
    Ok(points
        .par_iter()
        .map(|&s| {
            let mut cuts: Vec<f64> = breakpoints.to_vec();
            cuts.extend_from_slice(kernel.t_breakpoints());
            if kernel.has_diagonal_kink() {
                cuts.push(s);
            }
            quad.integrate_composite(a, b, panels, &cuts, |t| kernel.eval_unchecked(s, t) * f(t))
        })
        .collect())
}
