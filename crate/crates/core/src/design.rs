//! Sample locations and observed data.

use crate::error::{Error, Result};

/// Strictly increasing sample points `s_1 < ... < s_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDesign {
    points: Vec<f64>,
    quasi_uniform_bound: f64,
}

impl SampleDesign {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("sample design is empty".into()));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("sample point {p}")));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("sample points must be strictly increasing".into()));
        }
        let quasi_uniform_bound = gap_ratio(&points);
        Ok(Self {
            points,
            quasi_uniform_bound,
        })
    }

    /// `n` equispaced points covering `[a, b]` including both endpoints.
    pub fn uniform(n: usize, a: f64, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("a design needs at least 2 points, got {n}")));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Config(format!("invalid interval [{a}, {b}]")));
        }
        let step = (b - a) / (n - 1) as f64;
        let points = (0..n)
            .map(|i| if i + 1 == n { b } else { a + i as f64 * step })
            .collect();
        Ok(Self {
            points,
            quasi_uniform_bound: 1.0,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Measured `h_max / h_min` over consecutive gaps (1 for fewer than two gaps).
    pub fn quasi_uniform_bound(&self) -> f64 {
        self.quasi_uniform_bound
    }

    pub fn check_within(&self, a: f64, b: f64) -> Result<()> {
        let (first, last) = (self.points[0], *self.points.last().unwrap());
        for v in [first, last] {
            if v < a || v > b {
                return Err(Error::Domain { value: v, a, b });
            }
        }
        Ok(())
    }
}

/// Free-function form of [`SampleDesign::uniform`].
pub fn make_design(n: usize, a: f64, b: f64) -> Result<SampleDesign> {
    SampleDesign::uniform(n, a, b)
}

fn gap_ratio(points: &[f64]) -> f64 {
    if points.len() < 3 {
        return 1.0;
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for w in points.windows(2) {
        let g = w[1] - w[0];
        lo = lo.min(g);
        hi = hi.max(g);
    }
    hi / lo
}

/// Observed values `w(s_i) = y(s_i) + e(s_i)` on a design.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<'a> {
    design: &'a SampleDesign,
    values: Vec<f64>,
}

impl<'a> Observation<'a> {
    pub fn new(design: &'a SampleDesign, values: Vec<f64>) -> Result<Self> {
        if values.len() != design.len() {
            return Err(Error::Shape {
                context: "observation values",
                expected: design.len(),
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("observed value {v}")));
        }
        Ok(Self { design, values })
    }

    pub fn design(&self) -> &'a SampleDesign {
        self.design
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
