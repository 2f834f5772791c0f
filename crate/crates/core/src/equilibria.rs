//! Permanent rotations: the rigid body spins about a principal axis with the
//! fluid at relative rest.
//!
//! `(0, a*)` is an equilibrium iff `a* × 𝕀a* = 0`, i.e. `𝕀a* = λ*a*`. With a
//! prescribed momentum magnitude `|𝕀a*| = m`, every distinct moment `λ_j`
//! contributes the sphere of radius `m/λ_j` in its eigenspace: a point pair
//! (distinct moment), a circle (double moment) or a sphere (spherical body).

use crate::assembly::CoupledSystem;
use crate::dynamics::{loads, State};
use crate::error::{Error, Result};
use crate::inertia::InertiaSpec;
use crate::vec3::{cross, dot, norm, scale, sub};
use alloc::vec::Vec;
use nalgebra::Cholesky;
use num_traits::Float;

/// How many principal moments coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryCase {
    /// `λ1 = λ2 = λ3`.
    Spherical,
    /// Exactly two moments coincide.
    Symmetric,
    /// Three distinct moments.
    Asymmetric,
}

impl SymmetryCase {
    pub fn of(inertia: &InertiaSpec) -> Self {
        match group_moments(inertia).len() {
            1 => SymmetryCase::Spherical,
            2 => SymmetryCase::Symmetric,
            _ => SymmetryCase::Asymmetric,
        }
    }

    /// Roman-numeral label used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            SymmetryCase::Spherical => "i",
            SymmetryCase::Symmetric => "ii",
            SymmetryCase::Asymmetric => "iii",
        }
    }
}

/// One family of equilibria: every `a` in the eigenspace of `lambda` with
/// `|𝕀a| = m`, represented by `a_star`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    pub a_star: [f64; 3],
    pub lambda: f64,
    /// Axes (user labels) spanning the eigenspace of `lambda`.
    pub axes: Vec<usize>,
    pub case: SymmetryCase,
    /// Dimension of the equilibrium set near `a_star`; equals the
    /// eigenspace dimension for `a_star ≠ 0`.
    pub manifold_dim: usize,
}

impl Equilibrium {
    pub fn eigenspace_dim(&self) -> usize {
        self.axes.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.a_star == [0.0; 3]
    }

    /// `0`, `1`, `2` for the smallest, middle and largest moment. Families
    /// spanning several sorted slots report the highest one.
    pub fn position(&self, inertia: &InertiaSpec) -> usize {
        let asc = inertia.ascending_axes();
        self.axes
            .iter()
            .map(|a| asc.iter().position(|x| x == a).unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Member of the family in the direction of `direction` projected onto
    /// the eigenspace; `None` if the projection vanishes.
    pub fn member(&self, direction: [f64; 3]) -> Option<[f64; 3]> {
        let mut p = [0.0; 3];
        for &axis in &self.axes {
            p[axis] = direction[axis];
        }
        let len = norm(p);
        if len == 0.0 {
            return None;
        }
        Some(scale(p, norm(self.a_star) / len))
    }
}

/// Axis groups of coinciding moments, by increasing moment.
fn group_moments(inertia: &InertiaSpec) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for axis in inertia.ascending_axes() {
        let m = inertia.moment(axis);
        match groups.last_mut() {
            Some(g) if inertia.coincide(inertia.moment(g[0]), m) => g.push(axis),
            _ => groups.push(alloc::vec![axis]),
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// One equilibrium family per distinct moment, ordered by increasing moment.
///
/// The representative lies on the lowest-numbered axis of the eigenspace.
/// For `momentum_magnitude = 0` the only equilibrium is `a = 0`; it is
/// returned alone, with empty `axes` and `lambda = 0`.
pub fn enumerate(inertia: &InertiaSpec, momentum_magnitude: f64) -> Result<Vec<Equilibrium>> {
    if !(momentum_magnitude.is_finite() && momentum_magnitude >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "momentum magnitude must be finite and non-negative, got {momentum_magnitude}"
        )));
    }
    let case = SymmetryCase::of(inertia);
    if momentum_magnitude == 0.0 {
        return Ok(alloc::vec![Equilibrium {
            a_star: [0.0; 3],
            lambda: 0.0,
            axes: Vec::new(),
            case,
            manifold_dim: 0,
        }]);
    }
    Ok(group_moments(inertia)
        .into_iter()
        .map(|axes| {
            let lambda = axes.iter().map(|&a| inertia.moment(a)).sum::<f64>() / axes.len() as f64;
            let mut a_star = [0.0; 3];
            a_star[axes[0]] = momentum_magnitude / inertia.moment(axes[0]);
            Equilibrium {
                a_star,
                lambda,
                manifold_dim: axes.len(),
                axes,
                case,
            }
        })
        .collect())
}

/// Family whose eigenspace contains `a` (within the equilibrium tolerance).
pub fn family_of(inertia: &InertiaSpec, a: [f64; 3]) -> Result<Equilibrium> {
    let m = norm(inertia.apply(a));
    let lambda = check_eigenvector(inertia, a)?;
    let family = enumerate(inertia, m)?
        .into_iter()
        .find(|f| inertia.coincide(f.lambda, lambda))
        .expect("a verified eigenvector belongs to some family");
    Ok(Equilibrium {
        a_star: a,
        ..family
    })
}

/// Relative size of `a × 𝕀a` accepted as zero.
pub const EQUILIBRIUM_RTOL: f64 = 1e-12;

/// `λ*` with `𝕀a = λ*a`, or an error if `a` is zero or no eigenvector.
fn check_eigenvector(inertia: &InertiaSpec, a: [f64; 3]) -> Result<f64> {
    let ia = inertia.apply(a);
    let a2 = dot(a, a);
    if a2 == 0.0 {
        return Err(Error::ZeroAngularVelocity);
    }
    let residual = norm(cross(a, ia));
    if residual > EQUILIBRIUM_RTOL * norm(a) * norm(ia) {
        return Err(Error::NotAnEquilibrium { t: 0.0, residual });
    }
    Ok(dot(ia, a) / a2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    /// `(f_fluidᵀ M⁻¹ f_fluid + |f_body|²)^{1/2}` for the loads `f` of `E u̇ = f`.
    pub residual: f64,
    pub fluid: f64,
    pub body: f64,
    pub is_equilibrium: bool,
}

/// Size of the right-hand side at `state`, measured before inverting `E`:
/// the fluid load in the dual norm of `M` and the body load `𝕀a × (a − ω)`
/// in the Euclidean norm. For `c = 0` this is exactly `|a × 𝕀a|`.
pub fn verify(sys: &CoupledSystem<'_>, state: &State, tol: f64) -> Result<ResidualReport> {
    if state.c.len() != sys.len() {
        return Err(Error::DimensionMismatch {
            expected: sys.len(),
            got: state.c.len(),
        });
    }
    let (fluid, body) = loads(sys, &state.c, state.a);
    let chol = Cholesky::new(sys.ops().mass().clone()).expect("M checked positive definite");
    let fluid_norm = fluid.dot(&chol.solve(&fluid)).max(0.0).sqrt();
    let body_norm = norm(body);
    let residual = fluid_norm.hypot(body_norm);
    Ok(ResidualReport {
        residual,
        fluid: fluid_norm,
        body: body_norm,
        is_equilibrium: residual < tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    LocalMinCandidate,
    Saddle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HessianReport {
    pub verdict: Verdict,
    pub lambda_star: f64,
    /// `(axis, φ(e_axis))` over the axes spanning `N(λ* − 𝕀)^⊥`. The form is
    /// diagonal in the principal axes, so these values decide definiteness.
    pub form_values: Vec<(usize, f64)>,
}

/// Constrained second-variation test of the energy at the permanent rotation
/// `a*`: `φ(b) = ((λ* − 𝕀)b | 𝕀b)` on the orthogonal complement of the
/// eigenspace of `λ*`.
pub fn reduced_hessian_test(inertia: &InertiaSpec, a_star: [f64; 3]) -> Result<HessianReport> {
    let lambda_star = check_eigenvector(inertia, a_star)?;
    let form_values: Vec<(usize, f64)> = (0..3)
        .filter(|&j| !inertia.coincide(inertia.moment(j), lambda_star))
        .map(|j| {
            let lj = inertia.moment(j);
            (j, (lambda_star - lj) * lj)
        })
        .collect();
    let verdict = if form_values.iter().all(|&(_, v)| v > 0.0) {
        Verdict::LocalMinCandidate
    } else {
        Verdict::Saddle
    };
    Ok(HessianReport {
        verdict,
        lambda_star,
        form_values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nearest {
    pub point: [f64; 3],
    pub distance: f64,
    pub lambda: f64,
}

/// Closest equilibrium with the same momentum magnitude `|𝕀a|`: within each
/// family the nearest member lies along the projection of `a` onto the
/// eigenspace. Returns `a = 0` for zero momentum.
pub fn nearest_equilibrium(inertia: &InertiaSpec, a: [f64; 3]) -> Nearest {
    let m = norm(inertia.apply(a));
    if m == 0.0 {
        return Nearest {
            point: [0.0; 3],
            distance: norm(a),
            lambda: 0.0,
        };
    }
    let families = enumerate(inertia, m).expect("momentum magnitude is finite");
    families
        .iter()
        .map(|f| {
            let point = f.member(a).unwrap_or(f.a_star);
            Nearest {
                point,
                distance: norm(sub(a, point)),
                lambda: f.lambda,
            }
        })
        .min_by(|x, y| x.distance.total_cmp(&y.distance))
        .expect("at least one family")
}

/// `dist(a, ℰ)` at fixed momentum magnitude.
pub fn distance_to_equilibria(inertia: &InertiaSpec, a: [f64; 3]) -> f64 {
    nearest_equilibrium(inertia, a).distance
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(m: [f64; 3]) -> InertiaSpec {
        InertiaSpec::new(m).unwrap()
    }

    #[test]
    fn asymmetric_families() {
        let fam = enumerate(&diag([1.0, 2.0, 3.0]), 3.0).unwrap();
        assert_eq!(fam.len(), 3);
        let reps: Vec<_> = fam.iter().map(|f| f.a_star).collect();
        assert_eq!(reps, [[3.0, 0.0, 0.0], [0.0, 1.5, 0.0], [0.0, 0.0, 1.0]]);
        assert!(fam.iter().all(|f| f.manifold_dim == 1 && f.case == SymmetryCase::Asymmetric));
    }

    #[test]
    fn spherical_single_family() {
        let fam = enumerate(&diag([1.0, 1.0, 1.0]), 2.0).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].manifold_dim, 3);
        assert_eq!(fam[0].case, SymmetryCase::Spherical);
        assert_eq!(fam[0].case.tag(), "i");
    }

    #[test]
    fn symmetric_circle_members_keep_momentum() {
        let inertia = diag([1.0, 2.0, 2.0]);
        let fam = enumerate(&inertia, 3.0).unwrap();
        assert_eq!(fam.len(), 2);
        let circle = &fam[1];
        assert_eq!(circle.axes, [1, 2]);
        for k in 0..12 {
            let t = k as f64 * 0.5;
            let a = circle.member([0.3, t.cos(), t.sin()]).unwrap();
            assert!((norm(inertia.apply(a)) - 3.0).abs() < 1e-14);
            assert!(norm(cross(a, inertia.apply(a))) < 1e-14);
        }
        assert!(circle.member([1.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn user_axis_order_is_respected() {
        let inertia = diag([3.0, 1.0, 2.0]);
        let fam = enumerate(&inertia, 6.0).unwrap();
        assert_eq!(fam[0].axes, [1]);
        assert_eq!(fam[2].a_star, [2.0, 0.0, 0.0]);
        assert_eq!(fam[2].position(&inertia), 2);
    }

    #[test]
    fn zero_momentum_gives_trivial_equilibrium() {
        let fam = enumerate(&diag([1.0, 2.0, 3.0]), 0.0).unwrap();
        assert_eq!(fam.len(), 1);
        assert!(fam[0].is_trivial());
        assert!(enumerate(&diag([1.0, 2.0, 3.0]), -1.0).is_err());
    }

    #[test]
    fn hessian_verdicts() {
        let inertia = diag([1.0, 2.0, 3.0]);
        assert_eq!(
            reduced_hessian_test(&inertia, [0.0, 0.0, 1.0]).unwrap().verdict,
            Verdict::LocalMinCandidate
        );
        assert_eq!(
            reduced_hessian_test(&inertia, [0.0, 1.0, 0.0]).unwrap().verdict,
            Verdict::Saddle
        );
        assert_eq!(
            reduced_hessian_test(&inertia, [1.0, 0.0, 0.0]).unwrap().verdict,
            Verdict::Saddle
        );
        let sphere = reduced_hessian_test(&diag([2.0; 3]), [0.3, -0.4, 1.0]).unwrap();
        assert_eq!(sphere.verdict, Verdict::LocalMinCandidate);
        assert!(sphere.form_values.is_empty());
        assert_eq!(
            reduced_hessian_test(&inertia, [0.0; 3]),
            Err(Error::ZeroAngularVelocity)
        );
        assert!(matches!(
            reduced_hessian_test(&inertia, [1.0, 0.0, 1.0]),
            Err(Error::NotAnEquilibrium { .. })
        ));
    }

    #[test]
    fn distance_to_equilibria() {
        let inertia = diag([1.0, 2.0, 3.0]);
        assert!(super::distance_to_equilibria(&inertia, [0.0, 0.0, 1.0]) < 1e-15);
        let a = [0.0, 0.1, 1.0];
        let near = nearest_equilibrium(&inertia, a);
        let m = norm(inertia.apply(a));
        assert!((near.point[2] - m / 3.0).abs() < 1e-15);
        assert_eq!(near.lambda, 3.0);
    }
}
