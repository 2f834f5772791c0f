//! Product quadrature on the ball: Gauss–Legendre in the radius, Gauss–Legendre
//! in `cos θ` and the trapezoidal rule in `φ`.
//!
//! A rule built for degree `D` integrates every Cartesian polynomial of total
//! degree `≤ D` exactly (up to rounding). Along a ray such a polynomial is of
//! degree `D` in `r`, and the volume element adds `r²`, so the radial rule needs
//! `2 n_r - 1 ≥ D + 2`. On the sphere the `φ`-average of each Fourier mode is
//! exact for `n_φ > D`, and the surviving zonal part is a polynomial of degree
//! `≤ D` in `cos θ`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Debug)]
pub struct BallQuadrature {
    radius: f64,
    degree: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl BallQuadrature {
    /// Rule exact for Cartesian polynomials of total degree `≤ degree`.
    pub fn with_degree(radius: f64, degree: usize) -> Self {
        let n_r = (degree + 4).div_ceil(2);
        let n_theta = (degree + 2).div_ceil(2);
        let n_phi = degree + 1;

        let (xr, wr) = gauss_legendre(n_r);
        let (xt, wt) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;

        let mut points = Vec::with_capacity(n_r * n_theta * n_phi);
        let mut weights = Vec::with_capacity(points.capacity());
        for (&sr, &w_r) in xr.iter().zip(&wr) {
            let r = 0.5 * radius * (sr + 1.0);
            let radial_weight = 0.5 * radius * w_r * r * r;
            for (&ct, &w_t) in xt.iter().zip(&wt) {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                for k in 0..n_phi {
                    let phi = dphi * k as f64;
                    points.push([r * st * phi.cos(), r * st * phi.sin(), r * ct]);
                    weights.push(radial_weight * w_t * dphi);
                }
            }
        }
        Self {
            radius,
            degree,
            points,
            weights,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Polynomial exactness degree.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut([f64; 3]) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        let (x, w) = gauss_legendre(6);
        for p in 0..12u32 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-14, "p = {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn odd_rule_has_center_node() {
        let (x, w) = gauss_legendre(5);
        assert_eq!(x[2], 0.0);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn unit_ball_volume_and_second_moment() {
        let q = BallQuadrature::with_degree(1.0, 4);
        assert!((q.integrate(|_| 1.0) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((q.integrate(|x| x[0] * x[0]) - 4.0 * PI / 15.0).abs() < 1e-13);
        assert!(q.integrate(|x| x[0] * x[1]).abs() < 1e-14);
    }

    #[test]
    fn exact_up_to_recorded_degree() {
        // ∫_B x^{2a} y^{2b} z^{2c} = R^{2s+3}/(2s+3) · 2Γ(a+½)Γ(b+½)Γ(c+½)/Γ(s+3/2), s = a+b+c
        let gamma_half = |k: u32| (0..k).fold(PI.sqrt(), |v, j| v * (j as f64 + 0.5));
        let r: f64 = 1.3;
        let q = BallQuadrature::with_degree(r, 8);
        let sphere = 2.0 * gamma_half(2) * gamma_half(1) * gamma_half(1) / gamma_half(5);
        let exact = sphere * r.powi(11) / 11.0;
        let got = q.integrate(|x| x[0].powi(4) * x[1].powi(2) * x[2].powi(2));
        assert!((got - exact).abs() < 1e-13, "{got} vs {exact}");
    }
}
