mod common;

use common::{rng, Setup};
use nalgebra::DMatrix;
use rand::Rng;
use spinfluid_core::dynamics::rhs;
use spinfluid_core::equilibria::enumerate;
use spinfluid_core::spectrum::{
    analyze, assemble_linearization, imaginary_axis_audit, linearized_load, track_branch,
};
use spinfluid_core::{Classification, CoupledSystem, InertiaSpec, State};

/// Central-difference Jacobian of the vector field at `(0, a*)`, each column
/// the Richardson combination of steps `h` and `h/2`.
fn fd_jacobian(sys: &CoupledSystem<'_>, a_star: [f64; 3], h: f64) -> DMatrix<f64> {
    let n = sys.len();
    let base = State::rigid(n, a_star);
    let field = |s: &State| {
        let (cd, ad) = rhs(sys, s).unwrap();
        let mut v = cd.as_slice().to_vec();
        v.extend_from_slice(&ad);
        v
    };
    let shifted = |j: usize, step: f64| {
        let mut s = base.clone();
        if j < n {
            s.c[j] += step;
        } else {
            s.a[j - n] += step;
        }
        field(&s)
    };
    let mut jac = DMatrix::zeros(n + 3, n + 3);
    for j in 0..n + 3 {
        let (p1, m1) = (shifted(j, h), shifted(j, -h));
        let (p2, m2) = (shifted(j, h / 2.0), shifted(j, -h / 2.0));
        for i in 0..n + 3 {
            let d1 = (p1[i] - m1[i]) / (2.0 * h);
            let d2 = (p2[i] - m2[i]) / h;
            jac[(i, j)] = (4.0 * d2 - d1) / 3.0;
        }
    }
    jac
}

fn axis(k: usize, len: f64) -> [f64; 3] {
    let mut a = [0.0; 3];
    a[k] = len;
    a
}

#[test]
fn linearization_matches_finite_differences() {
    for excess in [[0.5, 1.0, 1.5], [1.2, 0.3, 0.7], [0.2, 2.0, 0.9]] {
        let setup = Setup::excess(0.1, excess, 1, 1);
        let sys = setup.system();
        for k in 0..3 {
            let a_star = axis(k, 1.3);
            let l = assemble_linearization(&sys, a_star).unwrap();
            let fd = fd_jacobian(&sys, a_star, 1e-3);
            // the vector field's Jacobian is −L*
            let defect = (&l + &fd).amax();
            assert!(defect <= 1e-6 * l.amax(), "axis {k}: {defect:e} vs {:e}", l.amax());
        }
    }
}

#[test]
fn kernel_direction_is_annihilated() {
    let setup = Setup::excess(0.1, [0.5, 1.0, 1.5], 1, 1);
    let sys = setup.system();
    let n = sys.len();
    for k in 0..3 {
        let l = assemble_linearization(&sys, axis(k, 1.0)).unwrap();
        let col = l.column(n + k);
        assert!(col.amax() < 1e-14 * l.amax(), "{}", col.amax());
    }
}

#[test]
fn viscosity_scales_only_the_stokes_block() {
    let setup = Setup::excess(0.1, [0.5, 1.0, 1.5], 1, 1);
    let sys1 = CoupledSystem::new(&setup.ops, setup.inertia, 0.1).unwrap();
    let sys2 = CoupledSystem::new(&setup.ops, setup.inertia, 0.2).unwrap();
    let a_star = axis(2, 1.0);
    let a1 = linearized_load(&sys1, a_star).unwrap();
    let a2 = linearized_load(&sys2, a_star).unwrap();
    let n = sys1.len();
    let diff = &a2 - &a1;
    let expect = setup.ops.stiffness() * 0.1;
    assert!((diff.view((0, 0), (n, n)) - expect).amax() < 1e-14 * a1.amax());
    let mut rest = diff.clone();
    rest.view_mut((0, 0), (n, n)).fill(0.0);
    assert_eq!(rest.amax(), 0.0);
}

#[test]
fn stability_by_axis() {
    let setup = Setup::excess(0.1, [0.5, 1.0, 1.5], 2, 2);
    let sys = setup.system();
    let expected = [2, 1, 0];
    for (k, want) in expected.iter().enumerate() {
        let report = analyze(&sys, axis(k, 1.0)).unwrap();
        assert_eq!(report.unstable_count, *want, "axis {k}");
        assert_eq!(report.kernel_dim, 1);
        assert!(report.semisimple && report.axis_audit);
        assert!(imaginary_axis_audit(&report));
        let class = if *want == 0 {
            Classification::NormallyStable
        } else {
            Classification::NormallyHyperbolic
        };
        assert_eq!(report.classification, class);
        // conjugate symmetry
        let z = report.values();
        for v in &z {
            let conj = v.conj();
            assert!(z.iter().any(|w| (w - conj).norm() <= 1e-9 * (1.0 + v.norm())));
        }
        assert!(report.spectral_gap.is_some());
    }
}

#[test]
fn kernel_multiplicity_in_degenerate_cases() {
    // spherical body: every direction is an equilibrium
    let setup = Setup::excess(0.1, [0.8, 0.8, 0.8], 1, 1);
    let sys = setup.system();
    let report = analyze(&sys, [0.3, -0.5, 0.8]).unwrap();
    assert_eq!(report.kernel_dim, 3);
    assert!(report.semisimple);

    // symmetric body: the double moment gives a circle of equilibria
    for (excess, circle_axis, line_axis) in [([0.4, 1.1, 1.1], 1, 0), ([1.1, 0.4, 0.4], 2, 0)] {
        let setup = Setup::excess(0.1, excess, 1, 1);
        let sys = setup.system();
        let on_circle = analyze(&sys, axis(circle_axis, 1.0)).unwrap();
        assert_eq!(on_circle.kernel_dim, 2);
        assert_eq!(on_circle.manifold_dim, 2);
        assert!(on_circle.semisimple);
        let on_line = analyze(&sys, axis(line_axis, 1.0)).unwrap();
        assert_eq!(on_line.kernel_dim, 1);
        assert!(on_line.semisimple);
    }
}

#[test]
fn spectrum_counts_agree_across_resolutions() {
    let coarse = Setup::excess(0.1, [0.7, 0.2, 1.3], 1, 1);
    let fine = Setup::excess(0.1, [0.7, 0.2, 1.3], 2, 2);
    for k in 0..3 {
        let a = analyze(&coarse.system(), axis(k, 1.1)).unwrap();
        let b = analyze(&fine.system(), axis(k, 1.1)).unwrap();
        assert_eq!(a.unstable_count, b.unstable_count);
        assert_eq!(a.kernel_dim, b.kernel_dim);
    }
}

#[test]
fn random_inertia_counts() {
    let mut r = rng(17);
    for _ in 0..5 {
        let excess = [r.random_range(0.1..2.0), r.random_range(0.1..2.0), r.random_range(0.1..2.0)];
        let setup = Setup::excess(0.1, excess, 1, 1);
        let sys = setup.system();
        let m = r.random_range(0.5..3.0);
        for fam in enumerate(&setup.inertia, m).unwrap() {
            let report = analyze(&sys, fam.a_star).unwrap();
            let pos = fam.position(&setup.inertia);
            assert_eq!(report.unstable_count, 2 - pos, "excess {excess:?}");
        }
    }
}

#[test]
fn eigenvalue_branch_crosses_zero_with_positive_slope() {
    let setup = Setup::excess(0.1, [0.5, 1.0, 1.5], 1, 1);
    let j = setup.cavity.fluid_moment();
    let (mu1, mu3) = (j + 0.5, j + 1.5);
    let a_star = [0.0, 0.0, 1.0];
    let points: Vec<_> = (-5..=5)
        .map(|k| {
            let mu = mu3 + 1e-3 * k as f64;
            let inertia = InertiaSpec::new([mu1, mu, mu3]).unwrap();
            let sys = CoupledSystem::new(&setup.ops, inertia, 0.1).unwrap();
            (mu, analyze(&sys, a_star).unwrap())
        })
        .collect();
    let sweep = track_branch(&points, mu3).unwrap();
    for (row, (_, report)) in sweep.rows.iter().zip(&points) {
        let want = if row.mu <= mu3 { 0 } else { 1 };
        assert_eq!(row.unstable_count, want, "mu = {}", row.mu);
        if row.mu < mu3 {
            assert!(row.branch < -report.eps0, "mu = {} z = {}", row.mu, row.branch);
        } else if row.mu > mu3 {
            assert!(row.branch > report.eps0, "mu = {} z = {}", row.mu, row.branch);
        }
    }
    assert!(sweep.branch_at_cross.abs() <= points[5].1.eps0);
    assert!(sweep.slope > 0.0);
    assert!(sweep.sign_change_at.unwrap() > mu3);
}

#[test]
fn branch_collision_is_reported() {
    // well below the crossing the real branch has merged into a complex pair
    let setup = Setup::excess(0.1, [0.5, 1.0, 1.5], 1, 1);
    let j = setup.cavity.fluid_moment();
    let (mu1, mu3) = (j + 0.5, j + 1.5);
    let points: Vec<_> = (-5..=1)
        .map(|k| {
            let mu = mu3 + 0.01 * k as f64;
            let inertia = InertiaSpec::new([mu1, mu, mu3]).unwrap();
            let sys = CoupledSystem::new(&setup.ops, inertia, 0.1).unwrap();
            (mu, analyze(&sys, [0.0, 0.0, 1.0]).unwrap())
        })
        .collect();
    let err = track_branch(&points, mu3).unwrap_err();
    assert!(matches!(err, spinfluid_core::Error::BranchLost { mu, .. } if mu < mu3));
}
