#![allow(dead_code)]

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spinfluid_core::{
    assembly::assemble_all, AssembledOperators, CavitySpec, CoupledSystem, GalerkinBasis,
    InertiaSpec, State,
};

pub struct Setup {
    pub cavity: CavitySpec,
    pub inertia: InertiaSpec,
    pub ops: AssembledOperators,
}

impl Setup {
    pub fn new(radius: f64, viscosity: f64, moments: [f64; 3], l_max: usize, n_max: usize) -> Self {
        let cavity = CavitySpec::new(radius, viscosity).unwrap();
        let basis = GalerkinBasis::build(cavity, l_max, n_max).unwrap();
        let inertia = InertiaSpec::new(moments).unwrap();
        let ops = assemble_all(&basis, &cavity, &inertia).unwrap();
        Self { cavity, inertia, ops }
    }

    /// Unit ball, shell excess `excess` over the fluid inertia.
    pub fn excess(viscosity: f64, excess: [f64; 3], l_max: usize, n_max: usize) -> Self {
        let cavity = CavitySpec::new(1.0, viscosity).unwrap();
        let inertia = InertiaSpec::from_shell_excess(&cavity, excess).unwrap();
        Self::new(1.0, viscosity, inertia.moments(), l_max, n_max)
    }

    pub fn system(&self) -> CoupledSystem<'_> {
        CoupledSystem::new(&self.ops, self.inertia, self.cavity.viscosity()).unwrap()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn random_state(rng: &mut impl Rng, n: usize, c_scale: f64, a_scale: f64) -> State {
    let c = gaussian_vector(rng, n) * c_scale;
    let a = [
        rng.sample::<f64, _>(StandardNormal) * a_scale,
        rng.sample::<f64, _>(StandardNormal) * a_scale,
        rng.sample::<f64, _>(StandardNormal) * a_scale,
    ];
    State::new(c, a, 0.0)
}
