//! Shared fixtures for the benchmarks: the unit-interval test problem with
//! synthetic noisy data at a given sample count.

use fredholm_core::lab::{gen_noise, NoiseModel, Problem, TrueSolution};
use fredholm_core::tikhonov::Discretization;
use fredholm_core::{FemSpace, Kernel, SampleDesign};

pub struct Fixture {
    pub problem: Problem,
    pub design: SampleDesign,
    pub observations: Vec<f64>,
}

/// Smooth ground truth, default mesh, `n` equispaced samples and 1% noise.
pub fn fixture(kernel: Kernel, n: usize) -> Fixture {
    let problem = Problem::new(kernel, FemSpace::unit_default(), TrueSolution::quintic());
    let (a, b) = problem.kernel.domain();
    let design = SampleDesign::uniform(n, a, b).expect("n >= 2");
    let exact = problem.exact_data(design.points()).expect("points in domain");
    let sup = problem.data_sup_norm(n).expect("points in domain");
    let noise = gen_noise(&NoiseModel::relative(0.01, sup).expect("valid level"), n, 1);
    let observations = exact.iter().zip(&noise).map(|(y, e)| y + e).collect();
    Fixture {
        problem,
        design,
        observations,
    }
}

impl Fixture {
    pub fn discretization(&self) -> Discretization {
        let p = &self.problem;
        Discretization::new(&p.kernel, &p.space, &self.design, &p.quad).expect("valid setup")
    }
}
