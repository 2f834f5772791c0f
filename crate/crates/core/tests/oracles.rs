//! Checks of the assembled operators and diagnostics against pointwise
//! evaluation of the velocity field, with integration rules unrelated to the
//! one used during assembly.

mod common;

use common::{gaussian_vector, random_state, rng, Setup};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;
use spinfluid_core::dynamics::{dissipation, energy};
use spinfluid_core::{BallQuadrature, CavitySpec, GalerkinBasis, InertiaSpec};

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn setup_with_basis(radius: f64) -> (Setup, GalerkinBasis) {
    let cavity = CavitySpec::new(radius, 0.07).unwrap();
    let inertia = InertiaSpec::from_shell_excess(&cavity, [0.3, 0.6, 1.1]).unwrap();
    let setup = Setup::new(radius, 0.07, inertia.moments(), 2, 1);
    let basis = GalerkinBasis::build(cavity, 2, 1).unwrap();
    (setup, basis)
}

#[test]
fn mass_matrix_against_monte_carlo() {
    let (setup, basis) = setup_with_basis(1.0);
    let n = basis.len();
    let mut r = rng(99);
    let samples = 200_000;
    let mut acc = vec![0.0; n * n];
    let mut vals = vec![[0.0; 3]; n];
    let mut taken = 0;
    while taken < samples {
        let p = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        if dot(p, p) >= 1.0 {
            continue;
        }
        taken += 1;
        for (j, mode) in basis.modes().iter().enumerate() {
            vals[j] = mode.evaluate(p).unwrap();
        }
        for i in 0..n {
            for j in 0..n {
                acc[i * n + j] += dot(vals[i], vals[j]);
            }
        }
    }
    let volume = 4.0 / 3.0 * std::f64::consts::PI;
    let scale = setup.ops.mass().amax();
    for i in 0..n {
        for j in 0..n {
            let mc = acc[i * n + j] * volume / samples as f64;
            // ~5 standard errors of a 2·10⁵-sample estimate
            assert!((mc - setup.ops.mass()[(i, j)]).abs() < 0.02 * scale, "M[{i},{j}] {mc}");
        }
    }
}

#[test]
fn energy_and_dissipation_by_pointwise_quadrature() {
    for radius in [1.0, 0.8] {
        let (setup, basis) = setup_with_basis(radius);
        let sys = setup.system();
        // a finer rule than the assembly rule, on a different point set
        let rule = BallQuadrature::with_degree(radius, basis.required_quadrature_degree() + 7);
        let mut r = rng(4);
        for _ in 0..5 {
            let state = random_state(&mut r, sys.len(), 0.4, 1.0);
            let c = state.c.as_slice();
            let kinetic = rule.integrate(|x| {
                let v = basis.velocity(c, x).unwrap();
                dot(v, v)
            });
            let ang: [f64; 3] =
                core::array::from_fn(|d| rule.integrate(|x| cross(x, basis.velocity(c, x).unwrap())[d]));
            let inertia = setup.inertia;
            let omega = inertia.solve(ang);
            let e = 0.5 * (kinetic - dot(inertia.apply(omega), omega) + dot(inertia.apply(state.a), state.a));
            assert!((energy(&sys, &state) - e).abs() < 1e-11 * e.abs().max(1.0));

            let grad2 = rule.integrate(|x| {
                let g = basis.velocity_gradient(c, x).unwrap();
                g.iter().flatten().map(|v| v * v).sum()
            });
            let d = dissipation(&sys, &state);
            assert!((d - 0.07 * grad2).abs() < 1e-11 * d.max(1.0));
            let rc = setup.ops.angular_momentum(&state.c);
            for k in 0..3 {
                assert!((rc[k] - ang[k]).abs() < 1e-12 * (1.0 + ang[k].abs()));
            }
        }
    }
}

#[test]
fn convection_and_coriolis_entries_by_pointwise_quadrature() {
    let (setup, basis) = setup_with_basis(1.0);
    let rule = BallQuadrature::with_degree(1.0, basis.required_quadrature_degree() + 5);
    let n = basis.len();
    let mut r = rng(21);
    for _ in 0..30 {
        let (i, j, k) = (r.random_range(0..n), r.random_range(0..n), r.random_range(0..n));
        let (bi, bj, bk) = (basis.mode(i), basis.mode(j), basis.mode(k));
        let t = rule.integrate(|x| {
            let vi = bi.evaluate(x).unwrap();
            let vj = bj.evaluate(x).unwrap();
            let gk = bk.evaluate_jacobian(x).unwrap();
            // ((b_j·∇) b_k)_d = Σ_e b_j,e ∂_e b_k,d
            (0..3).map(|d| vi[d] * (0..3).map(|e| vj[e] * gk[d][e]).sum::<f64>()).sum()
        });
        assert!((setup.ops.convection_entry(i, j, k) - t).abs() < 1e-11 * (1.0 + t.abs()));
        for axis in 0..3 {
            let mut e = [0.0; 3];
            e[axis] = 1.0;
            let c = rule.integrate(|x| dot(bi.evaluate(x).unwrap(), cross(e, bj.evaluate(x).unwrap())));
            assert!((setup.ops.coriolis()[axis][(i, j)] - c).abs() < 1e-12 * (1.0 + c.abs()));
        }
    }
}

#[test]
fn combined_field_is_solenoidal_and_vanishes_on_the_wall() {
    let (_, basis) = setup_with_basis(0.9);
    let mut r = rng(2);
    let c = gaussian_vector(&mut r, basis.len());
    for _ in 0..50 {
        let p = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let len = dot(p, p).sqrt();
        let inside = [p[0] * 0.5 / len, p[1] * 0.5 / len, p[2] * 0.5 / len];
        let g = basis.velocity_gradient(c.as_slice(), inside).unwrap();
        assert!((g[0][0] + g[1][1] + g[2][2]).abs() < 1e-11);
        let wall = [p[0] * 0.9 / len, p[1] * 0.9 / len, p[2] * 0.9 / len];
        let v = basis.velocity(c.as_slice(), wall).unwrap();
        assert!(dot(v, v).sqrt() < 1e-12);
    }
}

#[test]
fn coercivity_constant_bounds_the_energy() {
    let mut r = rng(31);
    let (setup, _) = setup_with_basis(1.0);
    let c0 = setup.ops.coercivity_constant(&setup.inertia);
    assert!(c0 > 0.0 && c0 <= 1.0);
    let sys = setup.system();
    for _ in 0..20 {
        let state = random_state(&mut r, sys.len(), 0.5, 1.0);
        let mc = state.c.dot(&(setup.ops.mass() * &state.c));
        let ia = setup.inertia.apply(state.a);
        let lower = 0.5 * c0 * mc + 0.5 * dot(ia, state.a);
        assert!(energy(&sys, &state) >= lower - 1e-12 * lower);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bilinear_terms_do_no_work(seed in any::<u64>(), w in prop::array::uniform3(-3.0f64..3.0)) {
        thread_local! {
            static SETUP: Setup = setup_with_basis(1.0).0;
        }
        SETUP.with(|setup| {
            let mut r = rng(seed);
            let c: DVector<f64> = gaussian_vector(&mut r, setup.ops.len());
            let d: DVector<f64> = gaussian_vector(&mut r, setup.ops.len());
            let t = setup.ops.convective_apply(&d, &c);
            let scale = setup.ops.convective_apply(&d, &d).norm() * c.norm();
            // (T·d·c | c) = ∫ c·((d·∇)c) = 0 for solenoidal d
            prop_assert!(c.dot(&t).abs() <= 1e-11 * scale.max(1.0));
            let cw = setup.ops.coriolis_apply(w, &c);
            prop_assert!(c.dot(&cw).abs() <= 1e-12 * (1.0 + cw.norm() * c.norm()));
            Ok(())
        })?;
    }
}
