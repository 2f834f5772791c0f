//! Divergence-free Galerkin basis on the spherical cavity.
//!
//! Modes are built from real solid harmonics `S_lm(x) = r^l Y_lm(θ, φ)` (with
//! `Y_lm` orthonormal on the unit sphere) and a radial factor in `s = r²`:
//!
//! * toroidal: `b = curl(ψ x)`, `ψ = (R² − r²) q_n(r²/R²) S_lm`
//! * poloidal: `b = curl curl(ψ x)`, `ψ = (R² − r²)² q_n(r²/R²) S_lm`
//!
//! where `q_n(u) = P_n(2u − 1)` is the shifted Legendre polynomial. A curl is
//! solenoidal, and the `(R² − r²)` factors make every field vanish on the
//! boundary, so each mode lies in the space of divergence-free fields with
//! homogeneous Dirichlet data. All components are Cartesian polynomials and are
//! stored symbolically.
//!
//! Ordering is fixed: toroidal before poloidal, then `l` ascending, then `m`
//! from `−l` to `l`, then `n` ascending.

use crate::error::{Error, Result};
use crate::poly::{Poly3, PowerTable, VectorPoly};
use crate::quadrature::BallQuadrature;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavitySpec {
    radius: f64,
    viscosity: f64,
}

impl CavitySpec {
    /// Fluid density is normalised to 1.
    pub const FLUID_DENSITY: f64 = 1.0;

    pub fn new(radius: f64, viscosity: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cavity radius must be positive, got {radius}"
            )));
        }
        if !(viscosity.is_finite() && viscosity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive, got {viscosity}"
            )));
        }
        Ok(Self { radius, viscosity })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn with_viscosity(self, viscosity: f64) -> Result<Self> {
        Self::new(self.radius, viscosity)
    }

    /// Each diagonal entry of `∫(|x|² Id − x⊗x)` over the ball, `8πR⁵/15`.
    pub fn fluid_moment(&self) -> f64 {
        8.0 * PI * self.radius.powi(5) / 15.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeKind {
    Toroidal,
    Poloidal,
}

#[derive(Clone, Debug)]
pub struct Mode {
    kind: ModeKind,
    degree: usize,
    order: i32,
    radial_index: usize,
    radius: f64,
    /// Coefficients of the radial factor of `ψ` in powers of `s = r²`.
    radial: Vec<f64>,
    field: VectorPoly,
    jacobian: [[Poly3; 3]; 3],
}

impl Mode {
    fn new(kind: ModeKind, l: usize, m: i32, n: usize, radius: f64) -> Self {
        let power = match kind {
            ModeKind::Toroidal => 1,
            ModeKind::Poloidal => 2,
        };
        let radial = radial_profile(power, n, radius);
        let mut s_pow = Poly3::constant(1.0);
        let r2 = Poly3::radius_squared();
        let mut radial_poly = Poly3::zero();
        for &c in &radial {
            radial_poly = &radial_poly + &s_pow.scale(c);
            s_pow = &s_pow * &r2;
        }
        let psi = &radial_poly * &solid_harmonic(l, m);
        let toroidal = VectorPoly::gradient_cross_position(&psi);
        let field = match kind {
            ModeKind::Toroidal => toroidal,
            ModeKind::Poloidal => toroidal.curl(),
        };
        let jacobian = field.jacobian();
        Self {
            kind,
            degree: l,
            order: m,
            radial_index: n,
            radius,
            radial,
            field,
            jacobian,
        }
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    /// Spherical-harmonic degree `l`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Real spherical-harmonic order `m`; negative orders carry `sin(|m|φ)`.
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn radial_index(&self) -> usize {
        self.radial_index
    }

    pub fn radial_coefficients(&self) -> &[f64] {
        &self.radial
    }

    pub fn field(&self) -> &VectorPoly {
        &self.field
    }

    /// `jacobian()[d][e] = ∂_e b_d`.
    pub fn jacobian(&self) -> &[[Poly3; 3]; 3] {
        &self.jacobian
    }

    /// Total polynomial degree of the vector field.
    pub fn polynomial_degree(&self) -> usize {
        self.field.degree().unwrap_or(0)
    }

    fn check_inside(&self, point: [f64; 3]) -> Result<()> {
        let r2 = point[0] * point[0] + point[1] * point[1] + point[2] * point[2];
        let r = r2.sqrt();
        if r > self.radius * (1.0 + 1e-12) || !r.is_finite() {
            return Err(Error::OutsideCavity {
                point,
                radius: self.radius,
            });
        }
        Ok(())
    }

    /// Exact evaluation of the field at a point of the closed ball.
    pub fn evaluate(&self, point: [f64; 3]) -> Result<[f64; 3]> {
        self.check_inside(point)?;
        Ok(self.field.eval(point))
    }

    pub fn evaluate_jacobian(&self, point: [f64; 3]) -> Result<[[f64; 3]; 3]> {
        self.check_inside(point)?;
        let table = PowerTable::new(point, self.polynomial_degree());
        Ok(self.jacobian_with(&table))
    }

    pub fn divergence(&self, point: [f64; 3]) -> Result<f64> {
        let j = self.evaluate_jacobian(point)?;
        Ok(j[0][0] + j[1][1] + j[2][2])
    }

    pub(crate) fn value_with(&self, table: &PowerTable) -> [f64; 3] {
        self.field.eval_with(table)
    }

    pub(crate) fn jacobian_with(&self, table: &PowerTable) -> [[f64; 3]; 3] {
        let j = &self.jacobian;
        core::array::from_fn(|d| core::array::from_fn(|e| j[d][e].eval_with(table)))
    }
}

/// `(R² − s)^power · q_n(s/R²)` as coefficients in `s`.
fn radial_profile(power: u32, n: usize, radius: f64) -> Vec<f64> {
    let r2 = radius * radius;
    // shifted Legendre: q_n(u) = Σ_k (−1)^{n+k} C(n,k) C(n+k,k) u^k
    let mut q: Vec<f64> = (0..=n)
        .map(|k| {
            let sign = if (n + k).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(n, k) * binomial(n + k, k) / r2.powi(k as i32)
        })
        .collect();
    for _ in 0..power {
        // multiply by (R² − s)
        let mut next = alloc::vec![0.0; q.len() + 1];
        for (k, &c) in q.iter().enumerate() {
            next[k] += r2 * c;
            next[k + 1] -= c;
        }
        q = next;
    }
    q
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn factorial_ratio(hi: usize, lo: usize) -> f64 {
    // hi! / lo!
    ((lo + 1)..=hi).fold(1.0, |acc, j| acc * j as f64)
}

/// Real solid harmonic `r^l Y_lm` as a Cartesian polynomial, with `Y_lm`
/// orthonormal on the unit sphere (no Condon–Shortley phase).
pub fn solid_harmonic(l: usize, m: i32) -> Poly3 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");

    // d^m/dt^m P_l(t) = Σ_k a_k t^{l−m−2k}
    let mut zonal = Poly3::zero();
    let r2 = Poly3::radius_squared();
    for k in 0..=(l / 2) {
        let p = l - 2 * k;
        if p < am {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * binomial(l, k) * binomial(2 * l - 2 * k, l) / 2f64.powi(l as i32)
            * factorial_ratio(p, p - am);
        let mono = Poly3::monomial([0, 0, (p - am) as u16], coeff);
        zonal = &zonal + &(&mono * &r2.pow(k as u32));
    }

    // Re / Im of (x + iy)^|m|
    let mut azimuthal = Poly3::zero();
    for j in 0..=am {
        let want_imag = m < 0;
        if (j % 2 == 1) != want_imag {
            continue;
        }
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        azimuthal = &azimuthal
            + &Poly3::monomial([(am - j) as u16, j as u16, 0], sign * binomial(am, j));
    }

    let mut norm = ((2 * l + 1) as f64 / (4.0 * PI) / factorial_ratio(l + am, l - am)).sqrt();
    if am > 0 {
        norm *= 2f64.sqrt();
    }
    (&zonal * &azimuthal).scale(norm)
}

#[derive(Clone, Debug)]
pub struct GalerkinBasis {
    cavity: CavitySpec,
    l_max: usize,
    n_max: usize,
    modes: Vec<Mode>,
    quadrature: BallQuadrature,
}

impl GalerkinBasis {
    /// All toroidal and poloidal modes with `1 ≤ l ≤ l_max`, `0 ≤ n ≤ n_max`.
    pub fn build(cavity: CavitySpec, l_max: usize, n_max: usize) -> Result<Self> {
        if l_max < 1 {
            return Err(Error::InvalidParameter(
                "l_max must be at least 1; without l = 1 toroidal modes the fluid carries no angular momentum".into(),
            ));
        }
        let mut modes = Vec::with_capacity(2 * (l_max * (l_max + 2)) * (n_max + 1));
        for kind in [ModeKind::Toroidal, ModeKind::Poloidal] {
            for l in 1..=l_max {
                for m in -(l as i32)..=(l as i32) {
                    for n in 0..=n_max {
                        modes.push(Mode::new(kind, l, m, n, cavity.radius()));
                    }
                }
            }
        }
        Ok(Self::from_modes(cavity, l_max, n_max, modes))
    }

    fn from_modes(cavity: CavitySpec, l_max: usize, n_max: usize, modes: Vec<Mode>) -> Self {
        let degree = Self::required_degree_for(&modes);
        Self {
            cavity,
            l_max,
            n_max,
            modes,
            quadrature: BallQuadrature::with_degree(cavity.radius(), degree),
        }
    }

    /// Sub-basis keeping the modes accepted by `keep`, in the same order.
    pub fn retain<F: FnMut(&Mode) -> bool>(&self, mut keep: F) -> Self {
        let modes = self.modes.iter().filter(|m| keep(m)).cloned().collect();
        Self::from_modes(self.cavity, self.l_max, self.n_max, modes)
    }

    fn required_degree_for(modes: &[Mode]) -> usize {
        let d = modes.iter().map(Mode::polynomial_degree).max().unwrap_or(0);
        // b_i · (b_j · ∇) b_k is the highest-degree integrand
        (3 * d).saturating_sub(1).max(2)
    }

    /// Exactness degree assembly needs from a quadrature rule.
    pub fn required_quadrature_degree(&self) -> usize {
        Self::required_degree_for(&self.modes)
    }

    pub fn cavity(&self) -> &CavitySpec {
        &self.cavity
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> &Mode {
        &self.modes[index]
    }

    pub fn quadrature(&self) -> &BallQuadrature {
        &self.quadrature
    }

    /// Velocity `Σ c_j b_j(x)` of a modal coefficient vector.
    pub fn velocity(&self, coefficients: &[f64], point: [f64; 3]) -> Result<[f64; 3]> {
        if coefficients.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coefficients.len(),
            });
        }
        let mut v = [0.0; 3];
        for (mode, &c) in self.modes.iter().zip(coefficients) {
            let b = mode.evaluate(point)?;
            for d in 0..3 {
                v[d] += c * b[d];
            }
        }
        Ok(v)
    }

    /// Velocity gradient `∂_e v_d` of a modal coefficient vector.
    pub fn velocity_gradient(&self, coefficients: &[f64], point: [f64; 3]) -> Result<[[f64; 3]; 3]> {
        if coefficients.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coefficients.len(),
            });
        }
        let mut g = [[0.0; 3]; 3];
        for (mode, &c) in self.modes.iter().zip(coefficients) {
            let j = mode.evaluate_jacobian(point)?;
            for d in 0..3 {
                for e in 0..3 {
                    g[d][e] += c * j[d][e];
                }
            }
        }
        Ok(g)
    }
}

/// Free-function form of [`GalerkinBasis::build`].
pub fn build_basis(cavity: CavitySpec, l_max: usize, n_max: usize) -> Result<GalerkinBasis> {
    GalerkinBasis::build(cavity, l_max, n_max)
}

/// The product rule attached to a basis, exact for every assembly integrand.
pub fn quadrature(basis: &GalerkinBasis) -> &BallQuadrature {
    basis.quadrature()
}
