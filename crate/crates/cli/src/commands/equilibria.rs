use super::Run;
use crate::error::{CliError, Context};
use crate::model::{Diagonalization, Model};
use crate::output::write_json;
use serde::Serialize;
use spinfluid_core::dynamics::State;
use spinfluid_core::equilibria::{enumerate, reduced_hessian_test, verify, Verdict};
use std::path::PathBuf;

/// Residual below which an enumerated representative counts as verified.
pub const VERIFY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub lambda: f64,
    pub a_star: [f64; 3],
    /// 1-based principal axes spanning the eigenspace.
    pub axes: Vec<usize>,
    pub eigenspace_dim: usize,
    pub manifold_dim: usize,
    pub residual: f64,
    pub verified: bool,
    /// `None` for the trivial equilibrium, which is excluded from the
    /// variational and spectral classification.
    pub verdict: Option<&'static str>,
    pub hessian_form: Vec<(usize, f64)>,
    pub is_max: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriaReport {
    pub moments: [f64; 3],
    pub fluid_moment: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonalization: Option<Diagonalization>,
    pub momentum: f64,
    pub case: &'static str,
    pub families: Vec<FamilyReport>,
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::LocalMinCandidate => "local-min-candidate",
        Verdict::Saddle => "saddle",
    }
}

pub fn compute(run: &Run) -> Result<EquilibriaReport, CliError> {
    let model = Model::build(&run.scenario)?;
    let sys = model.system()?;
    let inertia = model.inertia;
    let momentum = run.scenario.initial.momentum;
    let families = enumerate(&inertia, momentum).context("equilibria")?;
    let case = families[0].case.tag();
    let families = families
        .into_iter()
        .map(|f| {
            let check = verify(&sys, &State::rigid(sys.len(), f.a_star), VERIFY_TOL).context("verify")?;
            let hessian = if f.is_trivial() {
                None
            } else {
                Some(reduced_hessian_test(&inertia, f.a_star).context("variational test")?)
            };
            Ok(FamilyReport {
                lambda: f.lambda,
                a_star: f.a_star,
                axes: f.axes.iter().map(|a| a + 1).collect(),
                eigenspace_dim: f.eigenspace_dim(),
                manifold_dim: f.manifold_dim,
                residual: check.residual,
                verified: check.is_equilibrium,
                verdict: hessian.as_ref().map(|h| verdict_str(h.verdict)),
                hessian_form: hessian
                    .map(|h| h.form_values.iter().map(|&(a, v)| (a + 1, v)).collect())
                    .unwrap_or_default(),
                is_max: !f.is_trivial() && inertia.coincide(f.lambda, inertia.max_moment()),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(EquilibriaReport {
        moments: inertia.moments(),
        fluid_moment: model.cavity.fluid_moment(),
        diagonalization: model.diagonalization.clone(),
        momentum,
        case,
        families,
    })
}

pub fn execute(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let report = compute(run)?;
    let path = run.out.join("equilibria.json");
    write_json(&path, &run.header, &report)?;
    Ok(vec![path])
}
