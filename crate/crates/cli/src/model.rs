//! From a scenario to assembled operators and an initial state.

use crate::cache;
use crate::config::{AxisChoice, Scenario};
use crate::error::{CliError, Context};
use crate::output::write_atomic;
use nalgebra::{Cholesky, DVector, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use spinfluid_core::dynamics::State;
use spinfluid_core::equilibria::enumerate;
use spinfluid_core::{AssembledOperators, CavitySpec, CoupledSystem, Equilibrium, GalerkinBasis, InertiaSpec};

/// Principal moments of a symmetric tensor, ascending, with the rotation whose
/// columns are the corresponding unit axes (right-handed, each with its
/// largest component positive where that does not flip handedness).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagonalization {
    pub moments: [f64; 3],
    pub rotation: [[f64; 3]; 3],
}

pub fn diagonalize(matrix: [[f64; 3]; 3]) -> Result<Diagonalization, CliError> {
    let m = Matrix3::from_fn(|r, c| matrix[r][c]);
    let asym = (m - m.transpose()).amax();
    if !(asym <= 1e-12 * m.amax().max(1.0)) {
        return Err(CliError::Config(format!(
            "inertia matrix is not symmetric (max |A - A^T| = {asym:e})"
        )));
    }
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut rotation = [[0.0; 3]; 3];
    let mut moments = [0.0; 3];
    for (col, &k) in order.iter().enumerate() {
        moments[col] = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        let pivot = (0..3).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for row in 0..3 {
            rotation[row][col] = sign * v[row];
        }
    }
    let r = Matrix3::from_fn(|i, j| rotation[i][j]);
    if r.determinant() < 0.0 {
        for row in rotation.iter_mut() {
            row[2] = -row[2];
        }
    }
    Ok(Diagonalization { moments, rotation })
}

pub fn cavity(s: &Scenario) -> Result<CavitySpec, CliError> {
    CavitySpec::new(s.cavity.radius, s.cavity.viscosity).context("cavity")
}

/// Diagonal inertia from whichever form the scenario uses.
pub fn inertia(s: &Scenario, cavity: &CavitySpec) -> Result<(InertiaSpec, Option<Diagonalization>), CliError> {
    let sec = &s.inertia;
    let (spec, diag) = if let Some(m) = sec.moments {
        (InertiaSpec::new(m), None)
    } else if let Some(e) = sec.excess {
        if e.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(CliError::Config("inertia.excess entries must be non-negative".into()));
        }
        (InertiaSpec::from_shell_excess(cavity, e), None)
    } else {
        let d = diagonalize(sec.matrix.expect("validated: one inertia form"))?;
        (InertiaSpec::new(d.moments), Some(d))
    };
    let spec = spec.context("inertia")?;
    spec.check_consistent(cavity).context("inertia")?;
    Ok((spec, diag))
}

pub struct Model {
    pub cavity: CavitySpec,
    pub inertia: InertiaSpec,
    pub diagonalization: Option<Diagonalization>,
    pub l_max: usize,
    pub n_max: usize,
    pub ops: AssembledOperators,
    pub from_cache: bool,
}

impl Model {
    pub fn build(s: &Scenario) -> Result<Self, CliError> {
        let cavity = cavity(s)?;
        let (inertia, diagonalization) = inertia(s, &cavity)?;
        Self::with(s, cavity, inertia, diagonalization, s.basis.l_max, s.basis.n_max)
    }

    /// Model for an explicit truncation and inertia, using the scenario's
    /// cache directory if any.
    pub fn with(
        s: &Scenario,
        cavity: CavitySpec,
        inertia: InertiaSpec,
        diagonalization: Option<Diagonalization>,
        l_max: usize,
        n_max: usize,
    ) -> Result<Self, CliError> {
        inertia.check_consistent(&cavity).context("inertia")?;
        let key = cache::operator_key(&cavity, l_max, n_max, &inertia);
        let cached = match &s.basis.cache_dir {
            Some(dir) => cache::load_operators(&cache::operator_path(dir, &key), &key)?,
            None => None,
        };
        let from_cache = cached.is_some();
        let ops = match cached {
            Some(ops) => ops,
            None => {
                let basis = GalerkinBasis::build(cavity, l_max, n_max).context("basis")?;
                let ops = AssembledOperators::assemble(&basis).context("assembly")?;
                if let Some(dir) = &s.basis.cache_dir {
                    let bytes = cache::encode_operators(&ops, &key, cavity.radius(), l_max, n_max);
                    write_atomic(&cache::operator_path(dir, &key), &bytes)?;
                }
                ops
            }
        };
        Ok(Self {
            cavity,
            inertia,
            diagonalization,
            l_max,
            n_max,
            ops,
            from_cache,
        })
    }

    pub fn system(&self) -> Result<CoupledSystem<'_>, CliError> {
        CoupledSystem::new(&self.ops, self.inertia, self.cavity.viscosity()).context("coupled system")
    }

    pub fn system_with(&self, inertia: InertiaSpec) -> Result<CoupledSystem<'_>, CliError> {
        inertia.check_consistent(&self.cavity).context("inertia")?;
        CoupledSystem::new(&self.ops, inertia, self.cavity.viscosity()).context("coupled system")
    }
}

/// Equilibrium family containing the smallest / middle / largest moment.
pub fn target_equilibrium(inertia: &InertiaSpec, axis: AxisChoice, momentum: f64) -> Result<Equilibrium, CliError> {
    if momentum == 0.0 {
        return Err(CliError::Config(
            "a permanent rotation needs initial.momentum > 0".into(),
        ));
    }
    let wanted = inertia.ascending_axes()[axis.slot()];
    enumerate(inertia, momentum)
        .context("equilibria")?
        .into_iter()
        .find(|f| f.axes.contains(&wanted))
        .ok_or_else(|| CliError::Config("no equilibrium family for the requested axis".into()))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Isotropic Gaussian in the `M` inner product: `c = L⁻ᵀξ` with `M = LLᵀ`
/// and `ξ ~ N(0, I)`, so that `cᵀMc = |ξ|²`; scaled to `‖c‖_M = amplitude`.
pub fn mass_gaussian(ops: &AssembledOperators, rng: &mut impl Rng, amplitude: f64) -> DVector<f64> {
    let n = ops.len();
    let xi = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let chol = Cholesky::new(ops.mass().clone()).expect("M checked positive definite");
    let c = chol
        .l()
        .transpose()
        .solve_upper_triangular(&xi)
        .expect("Cholesky factor is nonsingular");
    let norm = c.dot(&(ops.mass() * &c)).sqrt();
    if norm == 0.0 {
        c
    } else {
        c * (amplitude / norm)
    }
}

pub struct Initial {
    pub state: State,
    /// The permanent rotation the run starts from, if any.
    pub equilibrium: Option<Equilibrium>,
}

pub fn initial_state(s: &Scenario, model: &Model, sys: &CoupledSystem<'_>) -> Result<Initial, CliError> {
    let init = &s.initial;
    let n = model.ops.len();
    let (a, equilibrium) = match (init.equilibrium, init.a0) {
        (Some(axis), _) => {
            let eq = target_equilibrium(&model.inertia, axis, init.momentum)?;
            (eq.a_star, Some(eq))
        }
        (None, Some(a0)) => (a0, None),
        (None, None) => unreachable!("validated: equilibrium or a0"),
    };
    let c = if let Some(c0) = &init.c0 {
        if c0.len() != n {
            return Err(CliError::Config(format!(
                "initial.c0 has {} entries, the basis has {n} modes",
                c0.len()
            )));
        }
        DVector::from_column_slice(c0)
    } else if init.needs_seed() {
        let seed = init.seed.ok_or_else(|| {
            CliError::Config("random initial data needs a seed (initial.seed or --seed)".into())
        })?;
        let mut rng = rng(seed);
        let c = mass_gaussian(&model.ops, &mut rng, 1.0);
        match init.fluid_energy {
            Some(e) => {
                let current = 0.5 * c.dot(&(sys.eblocks().fluid_block() * &c));
                c * (e / current).sqrt()
            }
            None => c * init.amplitude,
        }
    } else {
        DVector::zeros(n)
    };
    Ok(Initial {
        state: State::new(c, a, 0.0),
        equilibrium,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalize_rotated_tensor() {
        let (c, s) = (0.6f64, 0.8f64);
        let r = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        let d = Matrix3::from_diagonal(&nalgebra::Vector3::new(3.0, 1.0, 2.0));
        let a = r * d * r.transpose();
        let out = diagonalize(core::array::from_fn(|i| core::array::from_fn(|j| a[(i, j)]))).unwrap();
        for (k, want) in [1.0, 2.0, 3.0].iter().enumerate() {
            assert!((out.moments[k] - want).abs() < 1e-12);
        }
        let q = Matrix3::from_fn(|i, j| out.rotation[i][j]);
        assert!((q.determinant() - 1.0).abs() < 1e-12);
        let back = q * Matrix3::from_diagonal(&nalgebra::Vector3::from(out.moments)) * q.transpose();
        assert!((back - a).amax() < 1e-12);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(diagonalize(m), Err(CliError::Config(_))));
    }

    #[test]
    fn gaussian_has_requested_mass_norm() {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let basis = GalerkinBasis::build(cavity, 1, 1).unwrap();
        let ops = AssembledOperators::assemble(&basis).unwrap();
        let c = mass_gaussian(&ops, &mut rng(3), 0.25);
        assert!((c.dot(&(ops.mass() * &c)).sqrt() - 0.25).abs() < 1e-14);
        let again = mass_gaussian(&ops, &mut rng(3), 0.25);
        assert_eq!(c, again);
    }
}
