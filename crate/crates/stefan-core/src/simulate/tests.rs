use super::*;
use crate::presets::preset;

fn fast_config() -> SimConfig {
    SimConfig { cells_per_phase: 60, dt: 2e-3, t_end: 0.06, ..Default::default() }
}

fn sim_for(name: &str, config: SimConfig) -> Simulator {
    let case = preset(name).unwrap();
    Simulator::new(case.model, 3, case.geometry.r_omega, case.u_star, config).unwrap()
}

#[test]
fn equilibrium_is_a_fixed_point_of_both_regimes() {
    for name in ["gamma-stable", "nogamma-stable"] {
        let sim = sim_for(name, SimConfig { t_end: 0.2, cells_per_phase: 60, dt: 2e-3, ..Default::default() });
        let eq = sim.equilibrium_state();
        let traj = sim.run(eq.clone()).unwrap();
        let last = traj.states.last().unwrap();
        assert!(
            (last.r - eq.r).abs() < 1e-10 * eq.r,
            "{name}: drifted to R = {} from {}",
            last.r,
            eq.r
        );
        assert!((last.u_gamma - eq.u_gamma).abs() < 1e-10 * eq.u_gamma);
        for (a, b) in last.u_inner.iter().zip(&eq.u_inner) {
            assert!((a - b).abs() < 1e-10, "{name}: bulk moved");
        }
        // Nothing moves, so both functionals are constant to round-off.
        let e = &traj.diagnostics.energy;
        let p = &traj.diagnostics.entropy;
        assert!((e.last().unwrap() - e[0]).abs() < 1e-12 * e[0].abs());
        assert!((p.last().unwrap() - p[0]).abs() < 1e-12 * p[0].abs().max(1.0));
    }
}

#[test]
fn initial_velocity_sign_follows_gibbs_thomson() {
    // u ≡ const off equilibrium: sign(V) = sign(φ - (n-1)σ/R) / γ at t = 0.
    for eps in [2e-3f64, -2e-3] {
        let mut config = fast_config();
        config.perturbation =
            Perturbation { eps_u: eps, eps_r: 0.0, shape: PerturbationShape::Constant };
        let sim = sim_for("gamma-stable", config);
        let init = sim.perturbed_state().unwrap();
        let q = sim.model.derived(init.u_gamma).unwrap();
        let drive = q.phi - 2.0 * q.sigma / init.r;
        assert!(drive.abs() > 1e-6, "perturbation must unbalance the interface");
        let next = sim.step(&init, None).unwrap();
        let v = (next.r - init.r) / (next.t - init.t);
        assert_eq!(v.signum(), drive.signum(), "eps = {eps}");
    }
}

#[test]
fn constraint_is_enforced_every_step_without_undercooling() {
    let mut config = fast_config();
    config.perturbation =
        Perturbation { eps_u: 1e-3, eps_r: 5e-4, shape: PerturbationShape::Cosine };
    let sim = sim_for("nogamma-stable", config);
    let init = sim.perturbed_state().unwrap();
    // The initial data satisfy the constraint by construction.
    let q = sim.model.derived(init.u_gamma).unwrap();
    assert!((q.lambda - 2.0 / init.r).abs() < 1e-12);
    let traj = sim.run(init).unwrap();
    for (k, gt) in traj.diagnostics.gt_residual.iter().enumerate() {
        assert!(gt.abs() < 1e-8, "step {k}: constraint residual {gt}");
    }
}

#[test]
fn entropy_does_not_decrease_on_a_short_perturbed_run() {
    let mut config = fast_config();
    config.perturbation =
        Perturbation { eps_u: 1e-3, eps_r: 1e-3, shape: PerturbationShape::Gauss };
    for name in ["gamma-stable", "nogamma-stable"] {
        let sim = sim_for(name, config);
        let traj = sim.run(sim.perturbed_state().unwrap()).unwrap();
        let phi = &traj.diagnostics.entropy;
        for w in phi.windows(2) {
            assert!(w[1] >= w[0] - 1e-10 * w[0].abs().max(1.0), "{name}: entropy dipped");
        }
    }
}

#[test]
fn random_perturbation_is_seed_reproducible() {
    let mut config = fast_config();
    config.perturbation =
        Perturbation { eps_u: 1e-3, eps_r: 0.0, shape: PerturbationShape::Random { seed: 42 } };
    let sim = sim_for("gamma-stable", config);
    let a = sim.perturbed_state().unwrap();
    let b = sim.perturbed_state().unwrap();
    assert_eq!(a.u_inner, b.u_inner);
    let mut config2 = config;
    config2.perturbation =
        Perturbation { eps_u: 1e-3, eps_r: 0.0, shape: PerturbationShape::Random { seed: 43 } };
    let case = preset("gamma-stable").unwrap();
    let sim2 = Simulator::new(case.model, 3, case.geometry.r_omega, case.u_star, config2).unwrap();
    let c = sim2.perturbed_state().unwrap();
    assert_ne!(a.u_inner, c.u_inner);
}

#[test]
fn temperature_bounds_abort_cleanly() {
    let mut config = fast_config();
    config.perturbation =
        Perturbation { eps_u: 10.0, eps_r: 0.0, shape: PerturbationShape::Constant };
    let sim = sim_for("gamma-stable", config);
    assert!(matches!(
        sim.perturbed_state(),
        Err(SimError::WellPosednessAbortTemperature { .. })
    ));
}

#[test]
fn mcflow_residual_small_along_no_undercooling_run() {
    let mut config = fast_config();
    config.t_end = 0.04;
    config.perturbation =
        Perturbation { eps_u: 5e-4, eps_r: 5e-4, shape: PerturbationShape::Cosine };
    let sim = sim_for("nogamma-stable", config);
    let traj = sim.run(sim.perturbed_state().unwrap()).unwrap();
    let mc = &traj.diagnostics.mcflow_residual;
    // Interior samples only (endpoints carry NaN by construction).
    let interior: Vec<f64> = mc[1..mc.len() - 1].to_vec();
    assert!(!interior.is_empty());
    for v in &interior {
        assert!(v.is_finite());
        assert!(v.abs() < 1e-3, "mcflow residual {v}");
    }
}

#[test]
fn mcflow_residual_vanishes_at_equilibrium() {
    let sim = sim_for("nogamma-stable", fast_config());
    let eq = sim.equilibrium_state();
    let mut before = eq.clone();
    before.t = 0.0;
    let mut at = eq.clone();
    at.t = 1e-3;
    let mut after = eq;
    after.t = 2e-3;
    let res = sim.mcflow_residual(&before, &at, &after).unwrap();
    assert!(res.abs() < 1e-9, "residual {res}");
}

#[test]
fn bdf2_matches_implicit_euler_to_first_order() {
    let mut c1 = fast_config();
    c1.perturbation = Perturbation { eps_u: 1e-3, eps_r: 1e-3, shape: PerturbationShape::Cosine };
    let mut c2 = c1;
    c2.scheme = Scheme::Bdf2;
    let s1 = sim_for("gamma-stable", c1);
    let s2 = sim_for("gamma-stable", c2);
    let t1 = s1.run(s1.perturbed_state().unwrap()).unwrap();
    let t2 = s2.run(s2.perturbed_state().unwrap()).unwrap();
    let r1 = t1.states.last().unwrap().r;
    let r2 = t2.states.last().unwrap().r;
    // Same trajectory up to the temporal discretization error.
    assert!((r1 - r2).abs() < 1e-5 * r1, "IE {r1} vs BDF2 {r2}");
    assert!((r1 - r2).abs() > 0.0, "schemes should not be bitwise identical");
}
