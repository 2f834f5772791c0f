use proptest::prelude::*;
use spinfluid::config::{AxisChoice, Format, Scenario, SweepSection, MAX_SEED};

const BASE: &str = "[cavity]\nviscosity = 0.1\n[inertia]\nexcess = [0.5, 1.0, 1.5]\n";

fn axis() -> impl Strategy<Value = AxisChoice> {
    prop_oneof![Just(AxisChoice::Min), Just(AxisChoice::Mid), Just(AxisChoice::Max)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn serialisation_round_trips(
        radius in 0.1f64..5.0,
        nu in 1e-4f64..10.0,
        moments in prop::array::uniform3(0.0f64..10.0),
        l in 1usize..6,
        n in 0usize..6,
        eq in prop::option::of(axis()),
        momentum in 0.0f64..10.0,
        amplitude in 0.0f64..1.0,
        seed in prop::option::of(0..=MAX_SEED),
        horizon in 1e-3f64..1e4,
        dt in prop::option::of(1e-6f64..1.0),
        sample_every in prop::option::of(1usize..100),
        json in any::<bool>(),
        half_width in 1e-4f64..1.0,
        points in (1usize..20).prop_map(|k| 2 * k + 1),
    ) {
        let mut s = Scenario::from_toml(BASE).unwrap();
        s.cavity.radius = radius;
        s.cavity.viscosity = nu;
        s.inertia.excess = Some(moments);
        s.basis.l_max = l;
        s.basis.n_max = n;
        s.initial.equilibrium = eq;
        if eq.is_none() {
            s.initial.a0 = Some([momentum, -amplitude, 0.25]);
        }
        s.initial.momentum = momentum;
        s.initial.amplitude = amplitude;
        s.initial.seed = seed;
        s.integrator.horizon = horizon;
        s.integrator.dt = dt;
        s.integrator.sample_every = sample_every;
        s.output.format = if json { Format::Json } else { Format::Csv };
        s.sweep = Some(SweepSection::MuCrossing { half_width, points });
        s.validate().unwrap();
        let back = Scenario::from_toml(&s.to_toml()).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.hash(), s.hash());
    }
}
