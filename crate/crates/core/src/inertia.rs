//! Principal moments of inertia of the whole body–fluid system.

use crate::basis::CavitySpec;
use crate::error::{Error, Result};
use alloc::format;

/// Relative tolerance under which two principal moments count as equal.
pub const MOMENT_COINCIDENCE_RTOL: f64 = 1e-10;

/// Diagonal inertia tensor `diag(λ1, λ2, λ3)` about the centre of mass, in the
/// user's axis labelling. The ascending order is kept as a permutation so that
/// "smallest / middle / largest" can be resolved without relabelling axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InertiaSpec {
    moments: [f64; 3],
    ascending: [usize; 3],
}

impl InertiaSpec {
    pub fn new(moments: [f64; 3]) -> Result<Self> {
        if moments.iter().any(|m| !m.is_finite() || *m <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "principal moments must be positive and finite, got {moments:?}"
            )));
        }
        let mut ascending = [0, 1, 2];
        ascending.sort_by(|&a, &b| moments[a].total_cmp(&moments[b]));
        Ok(Self { moments, ascending })
    }

    /// `J_fluid + diag(excess)`: the cavity fluid plus a rigid shell whose own
    /// principal moments are `excess`.
    pub fn from_shell_excess(cavity: &CavitySpec, excess: [f64; 3]) -> Result<Self> {
        let j = cavity.fluid_moment();
        Self::new([j + excess[0], j + excess[1], j + excess[2]])
    }

    pub fn moments(&self) -> [f64; 3] {
        self.moments
    }

    pub fn moment(&self, axis: usize) -> f64 {
        self.moments[axis]
    }

    /// Axis indices ordered by increasing moment.
    pub fn ascending_axes(&self) -> [usize; 3] {
        self.ascending
    }

    /// `λ1 ≤ λ2 ≤ λ3`.
    pub fn sorted_moments(&self) -> [f64; 3] {
        self.ascending.map(|i| self.moments[i])
    }

    pub fn max_moment(&self) -> f64 {
        self.moments[self.ascending[2]]
    }

    pub fn apply(&self, a: [f64; 3]) -> [f64; 3] {
        [
            self.moments[0] * a[0],
            self.moments[1] * a[1],
            self.moments[2] * a[2],
        ]
    }

    pub fn solve(&self, b: [f64; 3]) -> [f64; 3] {
        [
            b[0] / self.moments[0],
            b[1] / self.moments[1],
            b[2] / self.moments[2],
        ]
    }

    pub fn coincide(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= MOMENT_COINCIDENCE_RTOL * self.max_moment()
    }

    /// `𝕀 − J_fluid` must be positive semidefinite: the shell cannot carry
    /// negative inertia.
    pub fn check_consistent(&self, cavity: &CavitySpec) -> Result<()> {
        let fluid = cavity.fluid_moment();
        for (axis, &moment) in self.moments.iter().enumerate() {
            if moment < fluid * (1.0 - MOMENT_COINCIDENCE_RTOL) {
                return Err(Error::InconsistentInertia {
                    axis,
                    moment,
                    fluid,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorting_keeps_user_labels() {
        let i = InertiaSpec::new([3.0, 1.0, 2.0]).unwrap();
        assert_eq!(i.ascending_axes(), [1, 2, 0]);
        assert_eq!(i.sorted_moments(), [1.0, 2.0, 3.0]);
        assert_eq!(i.moments(), [3.0, 1.0, 2.0]);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(InertiaSpec::new([1.0, 0.0, 2.0]).is_err());
        assert!(InertiaSpec::new([1.0, f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn consistency_with_cavity() {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let j = cavity.fluid_moment();
        assert!(InertiaSpec::new([j, j + 1.0, j + 2.0])
            .unwrap()
            .check_consistent(&cavity)
            .is_ok());
        let err = InertiaSpec::new([1.0, 2.0, 3.0])
            .unwrap()
            .check_consistent(&cavity)
            .unwrap_err();
        assert!(matches!(err, Error::InconsistentInertia { axis: 0, .. }));
    }
}
