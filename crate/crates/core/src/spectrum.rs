//! Linearisation at a permanent rotation and its spectrum.
//!
//! Writing the evolution as `E u̇ + A(u) = 0`, the derivative of `A` at
//! `(0, a*)` with `𝕀a* = λ*a*` is
//!
//! ```text
//! fluid rows:  [ νS + 2 Σ_k a*_k C_k       0                ]
//! body rows:   [ λ* [a*]× 𝕀⁻¹R             [a*]× (𝕀 − λ*)   ]
//! ```
//!
//! and `L* = E⁻¹A*`. The linearised flow is `u̇ = −L* u`, so everything below
//! is reported for the generator `−L*`: eigenvalues with positive real part
//! are unstable. Zero is always an eigenvalue, with the eigenspace of `λ*` as
//! kernel.

use crate::assembly::CoupledSystem;
use crate::equilibria::family_of;
use crate::error::{Error, Result};
use crate::vec3::{cross, norm};
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{Complex, DMatrix, Schur};
use num_traits::Float;

trait Modulus {
    fn modulus(&self) -> f64;
}

impl Modulus for Complex<f64> {
    fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Relative size of the zero-cluster threshold `ε₀`.
pub const ZERO_CLUSTER_RTOL: f64 = 1e-9;

/// Convention note carried by every report.
pub const GENERATOR_CONVENTION: &str =
    "eigenvalues of the generator -L* (u' = -L* u); Re z > 0 is unstable";

/// `ε₀ = 10⁻⁹ (ν λ_max(M⁻¹S) + |a*|)`.
pub fn zero_threshold(sys: &CoupledSystem<'_>, a_star: [f64; 3]) -> f64 {
    ZERO_CLUSTER_RTOL * (sys.viscosity() * sys.ops().stiffness_radius() + norm(a_star))
}

/// `A*` as a dense `(N+3) × (N+3)` matrix.
pub fn linearized_load(sys: &CoupledSystem<'_>, a_star: [f64; 3]) -> Result<DMatrix<f64>> {
    let family = family_of(sys.inertia(), a_star)?;
    let lambda = family.lambda;
    let ops = sys.ops();
    let n = sys.len();
    let inertia = sys.inertia();
    let mut a = DMatrix::zeros(n + 3, n + 3);

    let fluid = ops.stiffness() * sys.viscosity() + ops.coriolis_matrix(a_star) * 2.0;
    a.view_mut((0, 0), (n, n)).copy_from(&fluid);

    // λ* a* × 𝕀⁻¹ R c, column by column
    for j in 0..n {
        let col = ops.coupling().column(j);
        let w = inertia.solve([col[0], col[1], col[2]]);
        let v = cross(a_star, w);
        for d in 0..3 {
            a[(n + d, j)] = lambda * v[d];
        }
    }
    // a* × (𝕀 − λ*) e_e
    for e in 0..3 {
        let mut basis = [0.0; 3];
        basis[e] = inertia.moment(e) - lambda;
        let v = cross(a_star, basis);
        for d in 0..3 {
            a[(n + d, n + e)] = v[d];
        }
    }
    Ok(a)
}

/// `L*ₕ = E⁻¹A*`; fails unless `a*` is a nonzero permanent rotation.
pub fn assemble_linearization(sys: &CoupledSystem<'_>, a_star: [f64; 3]) -> Result<DMatrix<f64>> {
    let a = linearized_load(sys, a_star)?;
    Ok(sys.eblocks().solve_matrix(&a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClusterTag {
    /// One of the `kernel_dim` eigenvalues closest to zero.
    Kernel,
    Unstable,
    Stable,
    /// Off the kernel but within `ε₀` of the imaginary axis.
    Marginal,
}

impl ClusterTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClusterTag::Kernel => "kernel",
            ClusterTag::Unstable => "unstable",
            ClusterTag::Stable => "stable",
            ClusterTag::Marginal => "marginal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    NormallyStable,
    NormallyHyperbolic,
    Indeterminate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::NormallyStable => "normally-stable",
            Classification::NormallyHyperbolic => "normally-hyperbolic",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue {
    pub z: Complex<f64>,
    pub tag: ClusterTag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub a_star: [f64; 3],
    pub lambda_star: f64,
    /// Eigenvalues of `−L*ₕ`, sorted by decreasing real part, then
    /// decreasing imaginary part.
    pub eigenvalues: Vec<Eigenvalue>,
    pub eps0: f64,
    /// `dim N(L*ₕ)` from the singular values of `L*ₕ` below `ε₀`.
    pub kernel_dim: usize,
    /// Local dimension of the equilibrium set at `a*`.
    pub manifold_dim: usize,
    pub rank: usize,
    /// Rank of `L*ₕ²`, from the alignment of the left and right kernels.
    pub rank_squared: usize,
    pub semisimple: bool,
    pub unstable_count: usize,
    /// `−max{Re z : Re z < −ε₀}` over the nonzero eigenvalues.
    pub spectral_gap: Option<f64>,
    pub axis_audit: bool,
    pub classification: Classification,
    pub convention: String,
}

impl SpectrumReport {
    /// Non-kernel eigenvalue closest to zero.
    pub fn nearest_nonzero(&self) -> Option<Complex<f64>> {
        self.eigenvalues
            .iter()
            .filter(|e| e.tag != ClusterTag::Kernel)
            .map(|e| e.z)
            .min_by(|x, y| x.modulus().total_cmp(&y.modulus()))
    }

    pub fn values(&self) -> Vec<Complex<f64>> {
        self.eigenvalues.iter().map(|e| e.z).collect()
    }
}

/// Eigenvalues of a dense real matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or_else(|| Error::Eigensolver(alloc::format!("QR iteration did not converge (n = {n})")))?;
    let values: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    Ok(values)
}

/// Smallest singular value of `U₀ᵀV₀` that still counts as independent.
pub const KERNEL_ALIGNMENT_TOL: f64 = 1e-6;

/// `(rank L, rank L²)` at threshold `eps0`.
///
/// `rank L² = rank L − dim(ker L ∩ ran L)`. With `V₀` spanning `ker L` and
/// `U₀` spanning `(ran L)^⊥` (the singular vectors with `σ ≤ eps0`), the
/// intersection has dimension `k − rank(U₀ᵀV₀)`. Squaring `L` itself would
/// push eigenvalues of size `√eps0` under the threshold.
fn ranks(m: &DMatrix<f64>, threshold: f64) -> (usize, usize) {
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let small: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    let rank = m.nrows() - small.len();
    if small.is_empty() {
        return (rank, rank);
    }
    let k = small.len();
    let align = DMatrix::from_fn(k, k, |i, j| u.column(small[i]).dot(&v_t.row(small[j]).transpose()));
    let aligned = align
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > KERNEL_ALIGNMENT_TOL)
        .count();
    (rank, rank - (k - aligned))
}

/// Drops the `kernel_dim` eigenvalues closest to zero and tags the rest.
fn tag_eigenvalues(values: &[Complex<f64>], kernel_dim: usize, eps0: f64) -> Vec<Eigenvalue> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].modulus().total_cmp(&values[j].modulus()).then(i.cmp(&j)));
    let mut tags = alloc::vec![ClusterTag::Stable; values.len()];
    for (rank, &i) in order.iter().enumerate() {
        let z = values[i];
        tags[i] = if rank < kernel_dim {
            ClusterTag::Kernel
        } else if z.re > eps0 {
            ClusterTag::Unstable
        } else if z.re < -eps0 {
            ClusterTag::Stable
        } else {
            ClusterTag::Marginal
        };
    }
    let mut out: Vec<Eigenvalue> = values
        .iter()
        .zip(tags)
        .map(|(&z, tag)| Eigenvalue { z, tag })
        .collect();
    out.sort_by(|x, y| y.z.re.total_cmp(&x.z.re).then(y.z.im.total_cmp(&x.z.im)));
    out
}

/// True iff no eigenvalue outside the kernel cluster lies within `ε₀` of the
/// imaginary axis.
pub fn imaginary_axis_audit(report: &SpectrumReport) -> bool {
    let values = report.values();
    tag_eigenvalues(&values, report.kernel_dim, report.eps0)
        .iter()
        .all(|e| e.tag != ClusterTag::Marginal)
}

/// Full spectral analysis of `L*ₕ` at the permanent rotation `a_star`.
pub fn compute_spectrum(
    sys: &CoupledSystem<'_>,
    l: &DMatrix<f64>,
    a_star: [f64; 3],
) -> Result<SpectrumReport> {
    let dim = sys.len() + 3;
    if l.nrows() != dim || l.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: l.nrows(),
        });
    }
    let family = family_of(sys.inertia(), a_star)?;
    let eps0 = zero_threshold(sys, a_star);
    let values: Vec<Complex<f64>> = eigenvalues(l)?.into_iter().map(|z| -z).collect();

    let (rank, rank_squared) = ranks(l, eps0);
    let kernel_dim = dim - rank;
    let semisimple = rank_squared == rank;

    let eigenvalues = tag_eigenvalues(&values, kernel_dim, eps0);
    let unstable_count = eigenvalues.iter().filter(|e| e.tag == ClusterTag::Unstable).count();
    let axis_audit = eigenvalues.iter().all(|e| e.tag != ClusterTag::Marginal);
    let spectral_gap = eigenvalues
        .iter()
        .filter(|e| e.tag == ClusterTag::Stable)
        .map(|e| -e.z.re)
        .reduce(f64::min);

    let classification = if !axis_audit || !semisimple || kernel_dim != family.manifold_dim {
        Classification::Indeterminate
    } else if unstable_count > 0 {
        Classification::NormallyHyperbolic
    } else {
        Classification::NormallyStable
    };

    Ok(SpectrumReport {
        a_star,
        lambda_star: family.lambda,
        eigenvalues,
        eps0,
        kernel_dim,
        manifold_dim: family.manifold_dim,
        rank,
        rank_squared,
        semisimple,
        unstable_count,
        spectral_gap,
        axis_audit,
        classification,
        convention: GENERATOR_CONVENTION.into(),
    })
}

/// [`assemble_linearization`] followed by [`compute_spectrum`].
pub fn analyze(sys: &CoupledSystem<'_>, a_star: [f64; 3]) -> Result<SpectrumReport> {
    let l = assemble_linearization(sys, a_star)?;
    compute_spectrum(sys, &l, a_star)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub unstable_count: usize,
    pub classification: Classification,
    /// Tracked real branch `z(μ)`.
    pub branch: f64,
    pub nearest: Complex<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingSweep {
    pub rows: Vec<SweepRow>,
    pub mu_cross: f64,
    /// `z(μ_cross)`.
    pub branch_at_cross: f64,
    /// Central-difference slope `z′(μ_cross)`.
    pub slope: f64,
    /// First sweep parameter at which the branch exceeds `ε₀`, if any.
    pub sign_change_at: Option<f64>,
}

/// Real part of the eigenvalue closest to `prediction` once the `drop`
/// eigenvalues nearest zero (the persistent kernel) are removed.
fn branch_candidate(point: &(f64, SpectrumReport), drop: usize, prediction: f64) -> Result<f64> {
    let (mu, report) = point;
    let mut candidates: Vec<Complex<f64>> = report.values();
    candidates.sort_by(|x, y| x.modulus().total_cmp(&y.modulus()));
    let mut candidates: Vec<Complex<f64>> = candidates.into_iter().skip(drop).collect();
    candidates.sort_by(|x, y| {
        (x - prediction).modulus().total_cmp(&(y - prediction).modulus())
    });
    let best = *candidates.first().ok_or_else(|| Error::BranchLost {
        mu: *mu,
        detail: "no eigenvalues left".into(),
    })?;
    if best.im.abs() > report.eps0 {
        return Err(Error::BranchLost {
            mu: *mu,
            detail: alloc::format!("nearest eigenvalue {best} is not real"),
        });
    }
    if let Some(second) = candidates.get(1) {
        let d1 = (best - prediction).modulus();
        let d2 = (second - prediction).modulus();
        if d2 <= d1 + report.eps0 && (second - best).modulus() > report.eps0 {
            return Err(Error::BranchLost {
                mu: *mu,
                detail: alloc::format!("eigenvalues {best} and {second} collide"),
            });
        }
    }
    Ok(best.re)
}

/// Follows the real eigenvalue branch of `−L*(μ)` that passes through zero
/// at `mu_cross`, given spectra at increasing parameters `(μ, report)`.
///
/// At `mu_cross` the branch is the second zero eigenvalue. From there the
/// sweep walks outwards in both directions; at each step the persistent
/// kernel eigenvalue is discarded and the branch is the eigenvalue closest to
/// the linear prediction from the previous two points. The branch is lost if
/// it turns complex or if a second eigenvalue is as close to the prediction. `mu_cross` must be one of the sweep parameters, with at least
/// one point on each side.
pub fn track_branch(points: &[(f64, SpectrumReport)], mu_cross: f64) -> Result<CrossingSweep> {
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidParameter("sweep parameters must increase".into()));
    }
    let centre = points
        .iter()
        .position(|(mu, _)| (mu - mu_cross).abs() <= 1e-12 * mu_cross.abs().max(1.0))
        .ok_or_else(|| Error::InvalidParameter("sweep must contain the crossing parameter".into()))?;
    if centre == 0 || centre + 1 == points.len() {
        return Err(Error::InvalidParameter(
            "the crossing parameter needs neighbours on both sides".into(),
        ));
    }

    let mut branch = alloc::vec![0.0; points.len()];
    branch[centre] = branch_candidate(&points[centre], 1, 0.0)?;
    for dir in [1isize, -1] {
        let mut k = centre as isize + dir;
        while k >= 0 && (k as usize) < points.len() {
            let i = k as usize;
            let prev = (i as isize - dir) as usize;
            let prediction = if prev == centre {
                branch[centre]
            } else {
                let before = (prev as isize - dir) as usize;
                let slope = (branch[prev] - branch[before]) / (points[prev].0 - points[before].0);
                branch[prev] + slope * (points[i].0 - points[prev].0)
            };
            branch[i] = branch_candidate(&points[i], points[i].1.manifold_dim, prediction)?;
            k += dir;
        }
    }

    let rows: Vec<SweepRow> = points
        .iter()
        .zip(&branch)
        .map(|((mu, report), &z)| SweepRow {
            mu: *mu,
            unstable_count: report.unstable_count,
            classification: report.classification,
            branch: z,
            nearest: report.nearest_nonzero().unwrap_or(Complex::new(0.0, 0.0)),
        })
        .collect();

    let (lo, hi) = (&rows[centre - 1], &rows[centre + 1]);
    let slope = (hi.branch - lo.branch) / (hi.mu - lo.mu);
    let sign_change_at = rows
        .iter()
        .zip(points)
        .find(|(r, (_, report))| r.branch > report.eps0)
        .map(|(r, _)| r.mu);
    Ok(CrossingSweep {
        branch_at_cross: rows[centre].branch,
        mu_cross,
        slope,
        sign_change_at,
        rows,
    })
}
