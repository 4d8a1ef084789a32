use map_ising::analytic::{
    build_chain, free_energy_direct, observables, stationary, CONTINUITY_TOL,
};
use map_ising::experiments::regime_midpoint;
use map_ising::recursion::{a_fn, b_fn, discover_states, empirical_entropy, run_recursion, ZERO_TEMPERATURE};
use map_ising::sampler::sample_pair;
use map_ising::{analyze, boundary_epsilon, ModelParams};

#[test]
fn recurrent_set_has_4m_states() {
    for q in [0.1, 0.24, 0.4] {
        for m in 1..=8 {
            let p = ModelParams::new(q, regime_midpoint(q, m).unwrap()).unwrap();
            let states = discover_states(&p.couplings(), Some(m)).unwrap();
            assert_eq!(states.recurrent.len(), 4 * m as usize, "q={q} m={m}");
        }
    }
}

#[test]
fn free_energy_two_ways_across_regimes() {
    for q in [0.05, 0.24, 0.45] {
        for m in 1..=8 {
            let p = ModelParams::new(q, regime_midpoint(q, m).unwrap()).unwrap();
            let c = p.couplings();
            let marg = stationary(&build_chain(&p, m).unwrap()).unwrap();
            let obs = observables(&marg, &c, false);
            assert!((free_energy_direct(&marg, &c) - obs.f).abs() < CONTINUITY_TOL, "q={q} m={m}");
        }
    }
}

#[test]
fn recursion_free_energy_and_entropy_match_stationary_law() {
    for (q, e) in [(0.24, 0.15), (0.24, 0.3), (0.1, 0.2)] {
        let p = ModelParams::new(q, e).unwrap();
        let a = analyze(&p).unwrap();
        let (_, y) = sample_pair(&p, 200_000, 3, 0);
        let tally = run_recursion(&y, &p.couplings()).unwrap();
        assert_eq!(tally.m, a.regime.m);
        assert!((tally.free_energy() - a.observables.f).abs() < 5e-3, "q={q} eps={e}");
        assert!((empirical_entropy(&tally) - a.observables.theta).abs() < 3e-3, "q={q} eps={e}");
    }
}

#[test]
fn noise_free_and_ml_limits() {
    let q = 0.24;
    let a = analyze(&ModelParams::new(q, 1e-6).unwrap()).unwrap();
    assert_eq!(a.regime.m, 1);
    assert!((a.observables.c - (1.0 - 2.0 * q)).abs() < 1e-5);
    assert_eq!(a.observables.v, 1.0);
    // Large noise: the estimate grows ferromagnetic and decouples from y.
    let mut last_c = 0.0;
    for m in [4, 8, 12] {
        let e = regime_midpoint(q, m).unwrap();
        let a = analyze(&ModelParams::new(q, e).unwrap()).unwrap();
        assert!(a.observables.c > last_c);
        last_c = a.observables.c;
    }
    assert!(last_c > 0.95);
}

#[test]
fn observables_jump_at_boundaries() {
    for m in 1..=4 {
        let e = boundary_epsilon(0.24, m).unwrap();
        let below = analyze(&ModelParams::new(0.24, e * (1.0 - 1e-9)).unwrap()).unwrap();
        let above = analyze(&ModelParams::new(0.24, e * (1.0 + 1e-9)).unwrap()).unwrap();
        assert_eq!((below.regime.m, above.regime.m), (m, m + 1));
        assert!((below.observables.f - above.observables.f).abs() < 1e-6);
        assert!((below.observables.v - above.observables.v).abs() > 1e-3);
        assert!((below.observables.c - above.observables.c).abs() > 1e-3);
    }
}

#[test]
fn finite_temperature_maps_approach_zero_temperature() {
    let j = 0.7;
    for u in [-3.0, -0.7, -0.2, 0.0, 0.5, 0.7, 2.0] {
        let a0 = a_fn(u, j, ZERO_TEMPERATURE);
        let b0 = b_fn(u, j, ZERO_TEMPERATURE);
        assert_eq!(a0, f64::clamp(u, -j, j));
        assert_eq!(b0, f64::max(j, f64::abs(u)));
        assert!((a_fn(u, j, 1e4) - a0).abs() < 1e-3);
        assert!((b_fn(u, j, 1e4) - b0).abs() < 1e-3);
        assert!(a_fn(u, j, 1.0).abs() <= j);
    }
}
