//! Sparse real polynomials in the three Cartesian coordinates.
//!
//! Every Galerkin mode is a polynomial vector field, so the basis is
//! represented symbolically and differentiated exactly. Evaluation goes
//! through per-point power tables, which keeps quadrature assembly cheap.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

/// Exponents `(i, j, k)` of the monomial `x^i y^j z^k`.
pub type Exponent = [u16; 3];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly3 {
    // sorted by exponent, no zero coefficients
    terms: Vec<(Exponent, f64)>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(exp: Exponent, coeff: f64) -> Self {
        if coeff == 0.0 {
            Self::zero()
        } else {
            Self {
                terms: alloc::vec![(exp, coeff)],
            }
        }
    }

    /// The coordinate function `x_axis`.
    pub fn coordinate(axis: usize) -> Self {
        let mut e = [0u16; 3];
        e[axis] = 1;
        Self::monomial(e, 1.0)
    }

    /// `x² + y² + z²`.
    pub fn radius_squared() -> Self {
        Self::from_map(
            [([2, 0, 0], 1.0), ([0, 2, 0], 1.0), ([0, 0, 2], 1.0)]
                .into_iter()
                .collect(),
        )
    }

    fn from_map(map: BTreeMap<Exponent, f64>) -> Self {
        Self {
            terms: map.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }

    pub fn terms(&self) -> &[(Exponent, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms
            .iter()
            .map(|(e, _)| (e[0] + e[1] + e[2]) as usize)
            .max()
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|&(e, c)| (e, c * s)).collect(),
        }
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut map = BTreeMap::new();
        for &(e, c) in &self.terms {
            if e[axis] == 0 {
                continue;
            }
            let mut d = e;
            d[axis] -= 1;
            *map.entry(d).or_insert(0.0) += c * f64::from(e[axis]);
        }
        Self::from_map(map)
    }

    pub fn gradient(&self) -> [Poly3; 3] {
        [self.derivative(0), self.derivative(1), self.derivative(2)]
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    /// Straightforward evaluation at a point.
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let degree = self.degree().unwrap_or(0);
        self.eval_with(&PowerTable::new(x, degree))
    }

    pub fn eval_with(&self, powers: &PowerTable) -> f64 {
        self.terms
            .iter()
            .map(|&(e, c)| c * powers.monomial(e))
            .sum()
    }
}

impl Add for &Poly3 {
    type Output = Poly3;
    fn add(self, rhs: &Poly3) -> Poly3 {
        let mut map: BTreeMap<Exponent, f64> = self.terms.iter().copied().collect();
        for &(e, c) in &rhs.terms {
            *map.entry(e).or_insert(0.0) += c;
        }
        Poly3::from_map(map)
    }
}

impl Sub for &Poly3 {
    type Output = Poly3;
    fn sub(self, rhs: &Poly3) -> Poly3 {
        self + &(-rhs)
    }
}

impl Neg for &Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        self.scale(-1.0)
    }
}

impl Mul for &Poly3 {
    type Output = Poly3;
    fn mul(self, rhs: &Poly3) -> Poly3 {
        let mut map = BTreeMap::new();
        for &(ea, ca) in &self.terms {
            for &(eb, cb) in &rhs.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                *map.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        Poly3::from_map(map)
    }
}

/// Powers `x^0..=x^d`, `y^0..=y^d`, `z^0..=z^d` of one point.
#[derive(Clone, Debug)]
pub struct PowerTable {
    powers: [Vec<f64>; 3],
}

impl PowerTable {
    pub fn new(x: [f64; 3], degree: usize) -> Self {
        let table = |v: f64| {
            let mut p = Vec::with_capacity(degree + 1);
            let mut acc = 1.0;
            for _ in 0..=degree {
                p.push(acc);
                acc *= v;
            }
            p
        };
        Self {
            powers: [table(x[0]), table(x[1]), table(x[2])],
        }
    }

    #[inline]
    pub fn monomial(&self, e: Exponent) -> f64 {
        self.powers[0][e[0] as usize] * self.powers[1][e[1] as usize] * self.powers[2][e[2] as usize]
    }
}

/// A polynomial vector field on ℝ³.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPoly(pub [Poly3; 3]);

impl VectorPoly {
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().filter_map(Poly3::degree).max()
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let table = PowerTable::new(x, self.degree().unwrap_or(0));
        self.eval_with(&table)
    }

    pub fn eval_with(&self, powers: &PowerTable) -> [f64; 3] {
        [
            self.0[0].eval_with(powers),
            self.0[1].eval_with(powers),
            self.0[2].eval_with(powers),
        ]
    }

    pub fn curl(&self) -> VectorPoly {
        let [u, v, w] = &self.0;
        VectorPoly([
            &w.derivative(1) - &v.derivative(2),
            &u.derivative(2) - &w.derivative(0),
            &v.derivative(0) - &u.derivative(1),
        ])
    }

    pub fn divergence(&self) -> Poly3 {
        let [u, v, w] = &self.0;
        &(&u.derivative(0) + &v.derivative(1)) + &w.derivative(2)
    }

    /// `jacobian[d][e] = ∂_e (component d)`.
    pub fn jacobian(&self) -> [[Poly3; 3]; 3] {
        [
            self.0[0].gradient(),
            self.0[1].gradient(),
            self.0[2].gradient(),
        ]
    }

    /// `grad × x` for a scalar polynomial, i.e. `curl(ψ x)`.
    pub fn gradient_cross_position(psi: &Poly3) -> VectorPoly {
        let [px, py, pz] = psi.gradient();
        let [x, y, z] = [
            Poly3::coordinate(0),
            Poly3::coordinate(1),
            Poly3::coordinate(2),
        ];
        VectorPoly([
            &(&py * &z) - &(&pz * &y),
            &(&pz * &x) - &(&px * &z),
            &(&px * &y) - &(&py * &x),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_derivative() {
        let x = Poly3::coordinate(0);
        let y = Poly3::coordinate(1);
        let p = &(&x * &x) * &y; // x²y
        assert_eq!(p.degree(), Some(3));
        let dx = p.derivative(0);
        assert_eq!(dx.terms(), &[([1, 1, 0], 2.0)]);
        assert!((p.eval([2.0, 3.0, 5.0]) - 12.0).abs() < 1e-15);
    }

    #[test]
    fn cancellation_drops_terms() {
        let r2 = Poly3::radius_squared();
        assert!((&r2 - &r2).is_zero());
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let psi = &Poly3::radius_squared().pow(2) * &Poly3::coordinate(2);
        let g = VectorPoly(psi.gradient());
        assert!(g.curl().0.iter().all(Poly3::is_zero));
    }

    #[test]
    fn gradient_cross_position_is_solenoidal() {
        let psi = &Poly3::radius_squared() * &(&Poly3::coordinate(0) * &Poly3::coordinate(1));
        let b = VectorPoly::gradient_cross_position(&psi);
        assert!(b.divergence().max_coefficient() < 1e-14);
    }
}
