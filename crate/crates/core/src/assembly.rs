//! Finite-dimensional operators of the coupled fluid/body system.
//!
//! With `v = Σ_j c_j b_j` and test functions `b_i`, the Helmholtz projection
//! never has to be formed: every `b_i` is solenoidal with zero boundary values,
//! so `∫ b_i · ∇p = 0` and testing `ℙ f` against `b_i` is the same as testing
//! `f`. The operators are
//!
//! | symbol | entry                                 |
//! |--------|---------------------------------------|
//! | `M`    | `∫ b_i · b_j`                         |
//! | `S`    | `∫ ∇b_i : ∇b_j`                       |
//! | `R`    | column `j` is `∫ x × b_j`             |
//! | `T`    | `T_ijk = ∫ b_i · ((b_j · ∇) b_k)`     |
//! | `C_k`  | `∫ b_i · (e_k × b_j)`                 |
//! | `J`    | `∫ (|x|² Id − x ⊗ x)`                 |
//!
//! so that `∫ x × v = R c` and the fluid's angular velocity is `ω = 𝕀⁻¹ R c`.
//!
//! # The coupled mass operator
//!
//! The triple product `b · (x × w) = w · (b × x) = −w · (x × b)` gives
//! `∫ b_i · (x × w) = −(Rᵀ w)_i`. Testing the fluid component of
//! `E(v, a) = (v + ℙ(x × 𝕀⁻¹∫x × v) − ℙ(x × a), 𝕀a)` against `b_i` yields
//!
//! ```text
//! fluid row:  (M − Rᵀ 𝕀⁻¹ R) c + Rᵀ a
//! body row:   𝕀 a
//! ```
//!
//! The fluid–fluid block `M − Rᵀ𝕀⁻¹R` is symmetric; it is positive definite
//! exactly when `|v|² − (𝕀ω|ω) > 0` for every nonzero discrete velocity.

use crate::basis::{CavitySpec, GalerkinBasis, ModeKind};
use crate::error::{Error, Result};
use crate::inertia::InertiaSpec;
use crate::poly::PowerTable;
use crate::quadrature::BallQuadrature;
use alloc::format;
use alloc::vec::Vec;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix3};

/// Relative tolerance of the symmetry / skew-symmetry checks.
const STRUCTURE_RTOL: f64 = 1e-11;

#[derive(Clone, Debug)]
pub struct AssembledOperators {
    n: usize,
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    coupling: DMatrix<f64>,
    /// `T_ijk` at `(i * n + j) * n + k`.
    convection: Vec<f64>,
    coriolis: [DMatrix<f64>; 3],
    fluid_inertia: Matrix3<f64>,
    stiffness_radius: f64,
}

/// Per-point samples of every mode, laid out for matrix products.
struct Samples {
    /// rows `(q, d)`: `b_j,d(x_q)`
    values: DMatrix<f64>,
    /// rows `(q, d)`: `w_q b_j,d(x_q)`
    weighted: DMatrix<f64>,
    /// `jacobians[q * n + j][d][e] = ∂_e b_j,d(x_q)`
    jacobians: Vec<[[f64; 3]; 3]>,
}

impl Samples {
    fn collect(basis: &GalerkinBasis, rule: &BallQuadrature) -> Self {
        let n = basis.len();
        let nq = rule.len();
        let degree = basis
            .modes()
            .iter()
            .map(|m| m.polynomial_degree())
            .max()
            .unwrap_or(0);
        let mut values = DMatrix::zeros(3 * nq, n);
        let mut weighted = DMatrix::zeros(3 * nq, n);
        let mut jacobians = Vec::with_capacity(nq * n);
        for (q, (&x, &w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let table = PowerTable::new(x, degree);
            for (j, mode) in basis.modes().iter().enumerate() {
                let b = mode.value_with(&table);
                for d in 0..3 {
                    values[(3 * q + d, j)] = b[d];
                    weighted[(3 * q + d, j)] = w * b[d];
                }
                jacobians.push(mode.jacobian_with(&table));
            }
        }
        Self {
            values,
            weighted,
            jacobians,
        }
    }
}

impl AssembledOperators {
    /// Assembles every inertia-independent operator of `basis` with its own
    /// quadrature rule and checks their structural invariants.
    pub fn assemble(basis: &GalerkinBasis) -> Result<Self> {
        Self::assemble_with_rule(basis, basis.quadrature())
    }

    pub fn assemble_with_rule(basis: &GalerkinBasis, rule: &BallQuadrature) -> Result<Self> {
        let required = basis.required_quadrature_degree();
        if rule.degree() < required {
            return Err(Error::QuadratureTooCoarse {
                required,
                available: rule.degree(),
            });
        }
        let n = basis.len();
        let nq = rule.len();
        let samples = Samples::collect(basis, rule);

        let mass = samples.weighted.tr_mul(&samples.values);

        let mut grads = DMatrix::zeros(9 * nq, n);
        let mut weighted_grads = DMatrix::zeros(9 * nq, n);
        for q in 0..nq {
            let w = rule.weights()[q];
            for j in 0..n {
                let jac = &samples.jacobians[q * n + j];
                for d in 0..3 {
                    for e in 0..3 {
                        grads[(9 * q + 3 * d + e, j)] = jac[d][e];
                        weighted_grads[(9 * q + 3 * d + e, j)] = w * jac[d][e];
                    }
                }
            }
        }
        let stiffness = weighted_grads.tr_mul(&grads);
        drop((grads, weighted_grads));

        let mut coupling = DMatrix::zeros(3, n);
        let mut fluid_inertia = Matrix3::zeros();
        for (q, (&x, &w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            for a in 0..3 {
                for b in 0..3 {
                    let delta = if a == b { r2 } else { 0.0 };
                    fluid_inertia[(a, b)] += w * (delta - x[a] * x[b]);
                }
            }
            for j in 0..n {
                let b = [
                    samples.values[(3 * q, j)],
                    samples.values[(3 * q + 1, j)],
                    samples.values[(3 * q + 2, j)],
                ];
                let xb = crate::vec3::cross(x, b);
                for d in 0..3 {
                    coupling[(d, j)] += w * xb[d];
                }
            }
        }

        let coriolis = core::array::from_fn(|k| {
            let mut rotated = DMatrix::zeros(3 * nq, n);
            let mut axis = [0.0; 3];
            axis[k] = 1.0;
            for q in 0..nq {
                for j in 0..n {
                    let b = [
                        samples.values[(3 * q, j)],
                        samples.values[(3 * q + 1, j)],
                        samples.values[(3 * q + 2, j)],
                    ];
                    let eb = crate::vec3::cross(axis, b);
                    for d in 0..3 {
                        rotated[(3 * q + d, j)] = eb[d];
                    }
                }
            }
            samples.weighted.tr_mul(&rotated)
        });

        let mut convection = alloc::vec![0.0; n * n * n];
        let mut transported = DMatrix::zeros(3 * nq, n);
        for k in 0..n {
            // column j, rows (q, d): ((b_j · ∇) b_k)_d at x_q
            for q in 0..nq {
                let jac = &samples.jacobians[q * n + k];
                for j in 0..n {
                    let b = [
                        samples.values[(3 * q, j)],
                        samples.values[(3 * q + 1, j)],
                        samples.values[(3 * q + 2, j)],
                    ];
                    for d in 0..3 {
                        transported[(3 * q + d, j)] =
                            jac[d][0] * b[0] + jac[d][1] * b[1] + jac[d][2] * b[2];
                    }
                }
            }
            let slab = samples.weighted.tr_mul(&transported);
            for i in 0..n {
                for j in 0..n {
                    convection[(i * n + j) * n + k] = slab[(i, j)];
                }
            }
        }

        let has_rigid_modes = (-1..=1).all(|m| {
            basis
                .modes()
                .iter()
                .any(|md| md.kind() == ModeKind::Toroidal && md.degree() == 1 && md.order() == m)
        });
        Self::from_parts(
            mass,
            stiffness,
            coupling,
            convection,
            coriolis,
            fluid_inertia,
            has_rigid_modes,
        )
    }

    /// Rebuilds the operator set from raw arrays and re-checks every invariant.
    /// `expect_full_coupling` demands `rank R = 3`.
    pub fn from_parts(
        mass: DMatrix<f64>,
        stiffness: DMatrix<f64>,
        coupling: DMatrix<f64>,
        convection: Vec<f64>,
        coriolis: [DMatrix<f64>; 3],
        fluid_inertia: Matrix3<f64>,
        expect_full_coupling: bool,
    ) -> Result<Self> {
        let n = mass.nrows();
        let square = |m: &DMatrix<f64>| m.nrows() == n && m.ncols() == n;
        if !square(&mass) || !square(&stiffness) || !coriolis.iter().all(square) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: stiffness.nrows(),
            });
        }
        if coupling.nrows() != 3 || coupling.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: coupling.ncols(),
            });
        }
        if convection.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                got: convection.len(),
            });
        }

        check_symmetric("M", &mass)?;
        check_symmetric("S", &stiffness)?;
        let mass_chol = Cholesky::new(mass.clone()).ok_or(Error::InvariantViolated {
            name: "M",
            detail: "not positive definite".into(),
        })?;
        if Cholesky::new(stiffness.clone()).is_none() {
            return Err(Error::InvariantViolated {
                name: "S",
                detail: "not positive definite".into(),
            });
        }
        for (k, c) in coriolis.iter().enumerate() {
            let scale = c.amax().max(f64::MIN_POSITIVE);
            let defect = (c + c.transpose()).amax();
            if defect > STRUCTURE_RTOL * scale.max(1.0) {
                return Err(Error::InvariantViolated {
                    name: ["C1", "C2", "C3"][k],
                    detail: format!("not skew-symmetric (max |C + Cᵀ| = {defect:e})"),
                });
            }
        }
        let t_scale = convection.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..n {
                for k in i..n {
                    let a = convection[(i * n + j) * n + k];
                    let b = convection[(k * n + j) * n + i];
                    if (a + b).abs() > STRUCTURE_RTOL * t_scale.max(1.0) {
                        return Err(Error::InvariantViolated {
                            name: "T",
                            detail: format!("T[{i},{j},{k}] + T[{k},{j},{i}] = {:e}", a + b),
                        });
                    }
                }
            }
        }
        if expect_full_coupling {
            let sv = coupling.clone().svd(false, false).singular_values;
            let smax = sv.max();
            if sv.min() <= 1e-10 * smax.max(f64::MIN_POSITIVE) {
                return Err(Error::InvariantViolated {
                    name: "R",
                    detail: format!("rank below 3 (singular values {:?})", sv.as_slice()),
                });
            }
        }

        let stiffness_radius = generalized_extreme_eigenvalue(&mass_chol, &stiffness, true);

        Ok(Self {
            n,
            mass,
            stiffness,
            coupling,
            convection,
            coriolis,
            fluid_inertia,
            stiffness_radius,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// `R`, 3 × N.
    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// Flat `T_ijk` at `(i * N + j) * N + k`.
    pub fn convection(&self) -> &[f64] {
        &self.convection
    }

    pub fn convection_entry(&self, i: usize, j: usize, k: usize) -> f64 {
        self.convection[(i * self.n + j) * self.n + k]
    }

    pub fn coriolis(&self) -> &[DMatrix<f64>; 3] {
        &self.coriolis
    }

    pub fn fluid_inertia(&self) -> &Matrix3<f64> {
        &self.fluid_inertia
    }

    /// `λ_max(M⁻¹S)`, the stiffness scale of the Stokes block.
    pub fn stiffness_radius(&self) -> f64 {
        self.stiffness_radius
    }

    /// `∫ x × v = R c`.
    pub fn angular_momentum(&self, c: &DVector<f64>) -> [f64; 3] {
        let l = &self.coupling * c;
        [l[0], l[1], l[2]]
    }

    /// `(T·c·c′)_i = Σ_jk T_ijk c_j c′_k`.
    pub fn convective_apply(&self, c: &DVector<f64>, c2: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                let cj = c[j];
                if cj == 0.0 {
                    continue;
                }
                let row = &self.convection[(i * n + j) * n..(i * n + j + 1) * n];
                let inner: f64 = row.iter().zip(c2.iter()).map(|(t, x)| t * x).sum();
                acc += cj * inner;
            }
            out[i] = acc;
        }
        out
    }

    /// `(Σ_k w_k C_k) c`.
    pub fn coriolis_apply(&self, w: [f64; 3], c: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (k, ck) in self.coriolis.iter().enumerate() {
            if w[k] != 0.0 {
                out.gemv(w[k], ck, c, 1.0);
            }
        }
        out
    }

    /// `Σ_k w_k C_k`.
    pub fn coriolis_matrix(&self, w: [f64; 3]) -> DMatrix<f64> {
        &self.coriolis[0] * w[0] + &self.coriolis[1] * w[1] + &self.coriolis[2] * w[2]
    }

    /// `M − Rᵀ𝕀⁻¹R`.
    pub fn reduced_mass(&self, inertia: &InertiaSpec) -> DMatrix<f64> {
        let inv = Matrix3::from_diagonal(&nalgebra::Vector3::from(inertia.solve([1.0; 3])));
        let inv_dyn = DMatrix::from_fn(3, 3, |r, c| inv[(r, c)]);
        &self.mass - self.coupling.transpose() * inv_dyn * &self.coupling
    }

    /// Smallest eigenvalue of `M^{-1/2}(M − Rᵀ𝕀⁻¹R)M^{-1/2}`: the discrete
    /// constant `c₀` with `c₀|v|² ≤ |v|² − (𝕀ω|ω)`.
    pub fn coercivity_constant(&self, inertia: &InertiaSpec) -> f64 {
        let chol = Cholesky::new(self.mass.clone()).expect("M checked positive definite");
        generalized_extreme_eigenvalue(&chol, &self.reduced_mass(inertia), false)
    }
}

/// Extreme eigenvalue of the symmetric pencil `(A, M)` given `M = LLᵀ`.
fn generalized_extreme_eigenvalue(m: &Cholesky<f64, Dyn>, a: &DMatrix<f64>, largest: bool) -> f64 {
    let l = m.l();
    // L⁻¹ A L⁻ᵀ
    let left = l
        .solve_lower_triangular(a)
        .expect("Cholesky factor is nonsingular");
    let both = l
        .solve_lower_triangular(&left.transpose())
        .expect("Cholesky factor is nonsingular");
    let sym = (&both + both.transpose()) * 0.5;
    let ev = sym.symmetric_eigenvalues();
    if largest {
        ev.max()
    } else {
        ev.min()
    }
}

fn check_symmetric(name: &'static str, m: &DMatrix<f64>) -> Result<()> {
    let defect = (m - m.transpose()).amax();
    if defect > STRUCTURE_RTOL * m.amax().max(1.0) {
        return Err(Error::InvariantViolated {
            name,
            detail: format!("not symmetric (max |A − Aᵀ| = {defect:e})"),
        });
    }
    Ok(())
}

/// Assembles the operators and checks them against a given inertia tensor:
/// `𝕀 − J_fluid ⪰ 0` and `M − Rᵀ𝕀⁻¹R ≻ 0`.
pub fn assemble_all(
    basis: &GalerkinBasis,
    cavity: &CavitySpec,
    inertia: &InertiaSpec,
) -> Result<AssembledOperators> {
    inertia.check_consistent(cavity)?;
    let ops = AssembledOperators::assemble(basis)?;
    EBlocks::new(&ops, inertia)?;
    Ok(ops)
}

/// Block form of the coupled mass operator, factorised for repeated solves.
///
/// ```text
/// [ M − Rᵀ𝕀⁻¹R   Rᵀ ] [ ċ ]
/// [ 0            𝕀  ] [ ȧ ]
/// ```
#[derive(Clone, Debug)]
pub struct EBlocks {
    reduced_mass: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
    coupling_t: DMatrix<f64>,
    inertia: InertiaSpec,
}

impl EBlocks {
    pub fn new(ops: &AssembledOperators, inertia: &InertiaSpec) -> Result<Self> {
        let reduced_mass = ops.reduced_mass(inertia);
        let factor = Cholesky::new(reduced_mass.clone()).ok_or(Error::SingularCoupling)?;
        Ok(Self {
            reduced_mass,
            factor,
            coupling_t: ops.coupling().transpose(),
            inertia: *inertia,
        })
    }

    pub fn len(&self) -> usize {
        self.reduced_mass.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fluid–fluid block `M − Rᵀ𝕀⁻¹R`.
    pub fn fluid_block(&self) -> &DMatrix<f64> {
        &self.reduced_mass
    }

    /// Fluid–body block `Rᵀ`.
    pub fn coupling_block(&self) -> &DMatrix<f64> {
        &self.coupling_t
    }

    pub fn inertia(&self) -> &InertiaSpec {
        &self.inertia
    }

    pub fn apply(&self, c: &DVector<f64>, a: [f64; 3]) -> (DVector<f64>, [f64; 3]) {
        let mut fluid = &self.reduced_mass * c;
        fluid.gemv(1.0, &self.coupling_t, &DVector::from_row_slice(&a), 1.0);
        (fluid, self.inertia.apply(a))
    }

    pub fn solve(&self, fluid: &DVector<f64>, body: [f64; 3]) -> (DVector<f64>, [f64; 3]) {
        let a = self.inertia.solve(body);
        let mut rhs = fluid.clone();
        rhs.gemv(-1.0, &self.coupling_t, &DVector::from_row_slice(&a), 1.0);
        (self.factor.solve(&rhs), a)
    }

    /// Solves `E X = B` column by column for an `(N+3)`-row block `B`.
    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.len();
        let mut out = DMatrix::zeros(rhs.nrows(), rhs.ncols());
        for col in 0..rhs.ncols() {
            let fluid = DVector::from_fn(n, |i, _| rhs[(i, col)]);
            let body = [rhs[(n, col)], rhs[(n + 1, col)], rhs[(n + 2, col)]];
            let (c, a) = self.solve(&fluid, body);
            for i in 0..n {
                out[(i, col)] = c[i];
            }
            for d in 0..3 {
                out[(n + d, col)] = a[d];
            }
        }
        out
    }

    /// Dense `(N+3) × (N+3)` matrix of the operator.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut e = DMatrix::zeros(n + 3, n + 3);
        e.view_mut((0, 0), (n, n)).copy_from(&self.reduced_mass);
        e.view_mut((0, n), (n, 3)).copy_from(&self.coupling_t);
        for d in 0..3 {
            e[(n + d, n + d)] = self.inertia.moment(d);
        }
        e
    }
}

/// Free-function form of [`EBlocks::new`].
pub fn build_e(ops: &AssembledOperators, inertia: &InertiaSpec) -> Result<EBlocks> {
    EBlocks::new(ops, inertia)
}

/// Operators, inertia, viscosity and the factorised coupled mass operator:
/// everything the evolution equation needs.
#[derive(Clone, Debug)]
pub struct CoupledSystem<'a> {
    ops: &'a AssembledOperators,
    inertia: InertiaSpec,
    viscosity: f64,
    eblocks: EBlocks,
}

impl<'a> CoupledSystem<'a> {
    pub fn new(ops: &'a AssembledOperators, inertia: InertiaSpec, viscosity: f64) -> Result<Self> {
        if !(viscosity.is_finite() && viscosity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive, got {viscosity}"
            )));
        }
        let eblocks = EBlocks::new(ops, &inertia)?;
        Ok(Self {
            ops,
            inertia,
            viscosity,
            eblocks,
        })
    }

    pub fn ops(&self) -> &'a AssembledOperators {
        self.ops
    }

    pub fn inertia(&self) -> &InertiaSpec {
        &self.inertia
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn eblocks(&self) -> &EBlocks {
        &self.eblocks
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `ω = 𝕀⁻¹ R c`.
    pub fn omega(&self, c: &DVector<f64>) -> [f64; 3] {
        self.inertia.solve(self.ops.angular_momentum(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;

    fn ops(l_max: usize, n_max: usize) -> (GalerkinBasis, AssembledOperators) {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let basis = build_basis(cavity, l_max, n_max).unwrap();
        let ops = AssembledOperators::assemble(&basis).unwrap();
        (basis, ops)
    }

    #[test]
    fn fluid_inertia_matches_closed_form() {
        let (basis, ops) = ops(1, 0);
        let j = basis.cavity().fluid_moment();
        let expect = Matrix3::from_diagonal_element(j);
        assert!((ops.fluid_inertia() - expect).amax() < 1e-13);
    }

    #[test]
    fn only_l1_toroidal_modes_carry_angular_momentum() {
        let (basis, ops) = ops(2, 1);
        for (j, mode) in basis.modes().iter().enumerate() {
            let col = ops.coupling().column(j);
            let is_rigid = mode.kind() == ModeKind::Toroidal && mode.degree() == 1;
            if is_rigid {
                assert!(col.amax() > 1e-3, "mode {j} should couple");
            } else {
                assert!(col.amax() < 1e-12, "mode {j}: {:?}", col.as_slice());
            }
        }
    }

    #[test]
    fn coriolis_is_skew() {
        let (_, ops) = ops(2, 1);
        for c in ops.coriolis() {
            assert!((c + c.transpose()).norm() < 1e-12);
        }
    }

    #[test]
    fn coarse_rule_is_rejected() {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let basis = build_basis(cavity, 1, 0).unwrap();
        let rule = BallQuadrature::with_degree(1.0, 4);
        assert!(matches!(
            AssembledOperators::assemble_with_rule(&basis, &rule),
            Err(Error::QuadratureTooCoarse { .. })
        ));
    }

    #[test]
    fn inconsistent_inertia_is_rejected() {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let basis = build_basis(cavity, 1, 0).unwrap();
        let inertia = InertiaSpec::new([1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            assemble_all(&basis, &cavity, &inertia),
            Err(Error::InconsistentInertia { .. })
        ));
    }

    #[test]
    fn stripped_basis_decouples() {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let basis = build_basis(cavity, 2, 0)
            .unwrap()
            .retain(|m| !(m.kind() == ModeKind::Toroidal && m.degree() == 1));
        let ops = AssembledOperators::assemble(&basis).unwrap();
        assert!(ops.coupling().amax() < 1e-12);
        let inertia = InertiaSpec::new([1.0, 2.0, 3.0]).unwrap();
        let e = EBlocks::new(&ops, &inertia).unwrap();
        let n = ops.len();
        let mut expect = DMatrix::zeros(n + 3, n + 3);
        expect.view_mut((0, 0), (n, n)).copy_from(ops.mass());
        for d in 0..3 {
            expect[(n + d, n + d)] = inertia.moment(d);
        }
        assert!((e.dense() - expect).amax() < 1e-12);
    }

    #[test]
    fn tampered_parts_report_offending_matrix() {
        let (_, ops) = ops(1, 0);
        let mut c = ops.coriolis().clone();
        c[1][(0, 1)] += 1.0;
        let err = AssembledOperators::from_parts(
            ops.mass().clone(),
            ops.stiffness().clone(),
            ops.coupling().clone(),
            ops.convection().to_vec(),
            c,
            *ops.fluid_inertia(),
            true,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvariantViolated { name: "C2", .. }));
    }
}
