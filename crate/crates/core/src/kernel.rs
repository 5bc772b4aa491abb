//! Integral kernels `k(s, t)` on a square domain `[a, b]^2`.

use crate::error::{Error, Result};

/// A kernel given by values on a tensor grid, evaluated by bilinear
/// interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    s_grid: Vec<f64>,
    t_grid: Vec<f64>,
    /// Row-major: `values[i * t_grid.len() + j] = k(s_grid[i], t_grid[j])`.
    values: Vec<f64>,
}

impl TabulatedKernel {
    fn eval(&self, s: f64, t: f64) -> f64 {
        let (i, fs) = locate(&self.s_grid, s);
        let (j, ft) = locate(&self.t_grid, t);
        let nt = self.t_grid.len();
        let v00 = self.values[i * nt + j];
        let v01 = self.values[i * nt + j + 1];
        let v10 = self.values[(i + 1) * nt + j];
        let v11 = self.values[(i + 1) * nt + j + 1];
        (1.0 - fs) * ((1.0 - ft) * v00 + ft * v01) + fs * ((1.0 - ft) * v10 + ft * v11)
    }
}

/// Index of the cell containing `x` and the local coordinate in `[0, 1]`.
fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let cells = grid.len() - 1;
    let idx = grid.partition_point(|&g| g <= x).saturating_sub(1).min(cells - 1);
    let (lo, hi) = (grid[idx], grid[idx + 1]);
    (idx, ((x - lo) / (hi - lo)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// Green's function of `-u'' = f` with homogeneous Dirichlet conditions on `[0, 1]`.
    Green,
    /// `exp(-|s - t|)`.
    Exponential,
    Tabulated(TabulatedKernel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    a: f64,
    b: f64,
    smoothness: u32,
}

impl Kernel {
    pub fn green() -> Self {
        Self {
            kind: KernelKind::Green,
            a: 0.0,
            b: 1.0,
            smoothness: 2,
        }
    }

    pub fn exponential() -> Self {
        Self::exponential_on(0.0, 1.0).expect("unit interval is valid")
    }

    pub fn exponential_on(a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        Ok(Self {
            kind: KernelKind::Exponential,
            a,
            b,
            smoothness: 2,
        })
    }

    /// Builds a tabulated kernel. Both grids must be strictly increasing and
    /// span the same interval, which becomes the kernel's domain.
    pub fn tabulated(
        s_grid: Vec<f64>,
        t_grid: Vec<f64>,
        values: Vec<f64>,
        smoothness: u32,
    ) -> Result<Self> {
        if s_grid.len() < 2 || t_grid.len() < 2 {
            return Err(Error::Config("tabulated kernel grids need at least two points".into()));
        }
        for grid in [&s_grid, &t_grid] {
            if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("tabulated kernel grid must be strictly increasing".into()));
            }
        }
        let (a, b) = (s_grid[0], *s_grid.last().unwrap());
        if t_grid[0] != a || *t_grid.last().unwrap() != b {
            return Err(Error::Config("tabulated kernel grids must span the same interval".into()));
        }
        if values.len() != s_grid.len() * t_grid.len() {
            return Err(Error::Shape {
                context: "tabulated kernel values",
                expected: s_grid.len() * t_grid.len(),
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tabulated kernel value {v}")));
        }
        if smoothness == 0 {
            return Err(Error::parameter("smoothness", "must be a positive integer"));
        }
        Ok(Self {
            kind: KernelKind::Tabulated(TabulatedKernel {
                s_grid,
                t_grid,
                values,
            }),
            a,
            b,
            smoothness,
        })
    }

    /// Tabulates `f` on a uniform `points x points` grid over `[a, b]^2`.
    pub fn tabulate<F: Fn(f64, f64) -> f64>(
        a: f64,
        b: f64,
        points: usize,
        smoothness: u32,
        f: F,
    ) -> Result<Self> {
        check_interval(a, b)?;
        if points < 2 {
            return Err(Error::parameter("points", "need at least 2 grid points"));
        }
        let grid: Vec<f64> = (0..points)
            .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
            .collect();
        let values = grid
            .iter()
            .flat_map(|&s| grid.iter().map(move |&t| (s, t)))
            .map(|(s, t)| f(s, t))
            .collect();
        Self::tabulated(grid.clone(), grid, values, smoothness)
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Sobolev order `m` of the operator's range.
    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            KernelKind::Green => "green",
            KernelKind::Exponential => "exponential",
            KernelKind::Tabulated(_) => "tabulated",
        }
    }

    /// Whether the kernel is only piecewise smooth across the diagonal `s = t`.
    pub fn has_diagonal_kink(&self) -> bool {
        !matches!(self.kind, KernelKind::Tabulated(_))
    }

    /// Grid lines in `t` across which a tabulated kernel is not smooth.
    pub fn t_breakpoints(&self) -> &[f64] {
        match &self.kind {
            KernelKind::Tabulated(tab) => &tab.t_grid,
            _ => &[],
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn check_point(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                value: x,
                a: self.a,
                b: self.b,
            })
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        self.check_point(s)?;
        self.check_point(t)?;
        Ok(self.eval_unchecked(s, t))
    }

    /// Evaluates without the domain check; callers guarantee `s, t` in `[a, b]`.
    #[inline]
    pub fn eval_unchecked(&self, s: f64, t: f64) -> f64 {
        match &self.kind {
            KernelKind::Green => {
                if s <= t {
                    s * (1.0 - t)
                } else {
                    t * (1.0 - s)
                }
            }
            KernelKind::Exponential => (-(s - t).abs()).exp(),
            KernelKind::Tabulated(tab) => tab.eval(s, t),
        }
    }
}

/// Free-function form of [`Kernel::eval`].
pub fn eval_kernel(kernel: &Kernel, s: f64, t: f64) -> Result<f64> {
    kernel.eval(s, t)
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::Config(format!("invalid interval [{a}, {b}]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_values() {
        let k = Kernel::green();
        assert_eq!(k.eval(0.25, 0.5).unwrap(), 0.125);
        assert_eq!(k.eval(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(k.eval(0.5, 0.25).unwrap(), 0.125);
        assert_eq!(k.eval(1.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn exponential_on_diagonal_is_one() {
        let k = Kernel::exponential();
        assert_eq!(k.eval(0.3, 0.3).unwrap(), 1.0);
        assert!((k.eval(0.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn out_of_domain_is_error() {
        let k = Kernel::green();
        assert!(matches!(k.eval(-0.1, 0.5), Err(Error::Domain { .. })));
        assert!(matches!(k.eval(0.5, 1.5), Err(Error::Domain { .. })));
        let e = Kernel::exponential_on(-1.0, 2.0).unwrap();
        assert!(e.eval(-0.5, 1.5).is_ok());
    }

    #[test]
    fn builtins_are_symmetric_with_m_two() {
        for k in [Kernel::green(), Kernel::exponential()] {
            assert_eq!(k.smoothness(), 2);
            for i in 0..=20 {
                for j in 0..=20 {
                    let (s, t) = (i as f64 / 20.0, j as f64 / 20.0);
                    assert_eq!(k.eval(s, t).unwrap(), k.eval(t, s).unwrap());
                }
            }
        }
    }

    #[test]
    fn tabulated_reproduces_bilinear_functions() {
        let f = |s: f64, t: f64| 1.0 + 2.0 * s - t + 3.0 * s * t;
        let k = Kernel::tabulate(0.0, 1.0, 7, 1, f).unwrap();
        for (s, t) in [(0.0, 0.0), (0.13, 0.77), (0.5, 0.5), (1.0, 0.41), (0.99, 1.0)] {
            assert!((k.eval(s, t).unwrap() - f(s, t)).abs() < 1e-13);
        }
    }

    #[test]
    fn tabulated_approximates_smooth_kernel() {
        let k = Kernel::tabulate(0.0, 1.0, 201, 2, |s, t| (-(s - t).abs()).exp()).unwrap();
        let e = Kernel::exponential();
        for (s, t) in [(0.1, 0.7), (0.9, 0.2)] {
            assert!((k.eval(s, t).unwrap() - e.eval(s, t).unwrap()).abs() < 1e-5);
        }
        // Bilinear interpolation smears the diagonal kink over one cell.
        assert!((k.eval(0.3325, 0.3325).unwrap() - 1.0).abs() < 5e-3);
    }

    #[test]
    fn tabulated_validation() {
        assert!(Kernel::tabulated(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0; 3], 1).is_err());
        assert!(Kernel::tabulated(vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0; 4], 1).is_err());
        assert!(Kernel::tabulated(vec![0.0, 1.0], vec![0.0, 2.0], vec![1.0; 4], 1).is_err());
        assert!(Kernel::tabulated(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0; 4], 0).is_err());
        assert!(Kernel::tabulated(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, f64::NAN, 1.0, 1.0], 1).is_err());
    }
}
