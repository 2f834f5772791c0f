mod common;

use common::{random_state, rng, Setup};
use spinfluid_core::dynamics::{
    dissipation, energy, integrate, momentum, rhs, IntegratorConfig, RunStatus, Scheme,
};
use spinfluid_core::State;

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[test]
fn rhs_satisfies_energy_and_momentum_identities() {
    let setup = Setup::excess(0.1, [0.4, 0.9, 1.7], 2, 1);
    let sys = setup.system();
    let mut r = rng(11);
    for _ in 0..20 {
        let state = random_state(&mut r, sys.len(), 0.3, 1.0);
        let (cdot, adot) = rhs(&sys, &state).unwrap();
        // directional derivatives of E and |𝕀a|² along the vector field
        let ops = sys.ops();
        let mt = sys.eblocks().fluid_block();
        let ia = sys.inertia().apply(state.a);
        let de = state.c.dot(&(mt * &cdot))
            + (0..3).map(|k| ia[k] * adot[k]).sum::<f64>();
        let d = dissipation(&sys, &state);
        assert!((de + d).abs() < 1e-10 * (1.0 + d), "dE/dt {de} vs -D {}", -d);
        let ia_dot = sys.inertia().apply(adot);
        let dm: f64 = (0..3).map(|k| ia[k] * ia_dot[k]).sum();
        assert!(dm.abs() < 1e-12 * (1.0 + norm3(ia).powi(2)));
        // energy() uses M and 𝕀 directly, the identity above the reduced mass
        let e_alt = 0.5 * (state.c.dot(&(mt * &state.c)) + (0..3).map(|k| ia[k] * state.a[k]).sum::<f64>());
        assert!((energy(&sys, &state) - e_alt).abs() < 1e-12 * (1.0 + e_alt));
        let _ = ops;
    }
}

#[test]
fn rigid_rotation_about_principal_axis_is_stationary() {
    let setup = Setup::excess(0.1, [0.4, 0.9, 1.7], 2, 1);
    let sys = setup.system();
    for axis in 0..3 {
        let mut a = [0.0; 3];
        a[axis] = 1.3;
        let state = State::rigid(sys.len(), a);
        let (cdot, adot) = rhs(&sys, &state).unwrap();
        assert!(cdot.norm() < 1e-13 && norm3(adot) < 1e-13);
        let traj = integrate(&sys, &state, 5.0, &IntegratorConfig::default()).unwrap();
        let last = &traj.last().state;
        assert!(last.c.norm() < 1e-13);
        assert!((last.a[axis] - 1.3).abs() < 1e-13);
    }
}

#[test]
fn trajectory_conserves_momentum_and_dissipates_energy() {
    let setup = Setup::excess(0.05, [0.3, 0.8, 1.5], 2, 1);
    let sys = setup.system();
    let mut r = rng(3);
    let state = random_state(&mut r, sys.len(), 0.2, 1.0);
    let config = IntegratorConfig::default();
    let traj = integrate(&sys, &state, 20.0, &config).unwrap();
    assert_eq!(traj.status, RunStatus::Completed);
    assert!(traj.momentum_drift() < 1e-12, "{}", traj.momentum_drift());
    let e0 = traj.samples[0].energy;
    assert!(traj.max_energy_increase() <= 10.0 * config.rtol * e0);
    assert!(traj.last().energy < e0);
    // dissipation integral balances the energy loss up to time discretisation
    assert!(traj.energy_balance_residual() < 1e-4 * e0, "{}", traj.energy_balance_residual());
    let m0 = momentum(&sys, &state);
    let m1 = traj.last().momentum;
    assert!((norm3(m0) - norm3(m1)).abs() < 1e-12 * norm3(m0));
}

#[test]
fn fixed_step_scheme_is_second_order() {
    let setup = Setup::excess(0.1, [0.3, 0.8, 1.5], 1, 1);
    let sys = setup.system();
    let mut r = rng(5);
    let state = random_state(&mut r, sys.len(), 0.3, 1.0);
    let run = |dt: f64| {
        let cfg = IntegratorConfig { dt: Some(dt), ..Default::default() };
        integrate(&sys, &state, 1.0, &cfg).unwrap().last().state.clone()
    };
    let reference = run(1.0 / 4096.0);
    let err = |s: &State| {
        let dc = &s.c - &reference.c;
        let da: f64 = (0..3).map(|k| (s.a[k] - reference.a[k]).powi(2)).sum();
        (dc.norm_squared() + da).sqrt()
    };
    let e1 = err(&run(1.0 / 32.0));
    let e2 = err(&run(1.0 / 64.0));
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.2, "observed order {order} ({e1}, {e2})");
}

#[test]
fn adaptive_mode_agrees_with_fine_fixed_step() {
    let setup = Setup::excess(0.1, [0.3, 0.8, 1.5], 1, 1);
    let sys = setup.system();
    let mut r = rng(6);
    let state = random_state(&mut r, sys.len(), 0.3, 1.0);
    let cfg = IntegratorConfig {
        scheme: Scheme::ImexMidpointAdaptive,
        dt: Some(0.1),
        rtol: 1e-10,
        ..Default::default()
    };
    let adaptive = integrate(&sys, &state, 2.0, &cfg).unwrap();
    let fixed = integrate(
        &sys,
        &state,
        2.0,
        &IntegratorConfig { dt: Some(5e-5), ..Default::default() },
    )
    .unwrap();
    let a = &adaptive.last().state;
    let f = &fixed.last().state;
    assert!((a.t - 2.0).abs() < 1e-12);
    let diff = (&a.c - &f.c).norm() + (0..3).map(|k| (a.a[k] - f.a[k]).abs()).sum::<f64>();
    // rtol bounds the local error; the global error is a few hundred times larger
    assert!(diff < 1e-5, "{diff}");
    assert!(adaptive.momentum_drift() < 1e-12);
}

#[test]
fn blowup_guard_reports_divergence() {
    let setup = Setup::excess(0.1, [0.3, 0.8, 1.5], 1, 0);
    let sys = setup.system();
    let state = State::rigid(sys.len(), [0.0, 0.0, 2.0]);
    let cfg = IntegratorConfig { blowup_guard: 1.0, ..Default::default() };
    let traj = integrate(&sys, &state, 1.0, &cfg).unwrap();
    assert_eq!(traj.status, RunStatus::Diverged);
    assert_eq!(traj.samples.len(), 2);
}

#[test]
fn rejects_bad_inputs() {
    let setup = Setup::excess(0.1, [0.3, 0.8, 1.5], 1, 0);
    let sys = setup.system();
    let bad = State::rigid(sys.len() + 1, [0.0, 0.0, 1.0]);
    assert!(integrate(&sys, &bad, 1.0, &IntegratorConfig::default()).is_err());
    let ok = State::rigid(sys.len(), [0.0, 0.0, 1.0]);
    assert!(integrate(&sys, &ok, -1.0, &IntegratorConfig::default()).is_err());
    assert!(integrate(&sys, &ok, 1.0, &IntegratorConfig { dt: Some(0.0), ..Default::default() }).is_err());
}
