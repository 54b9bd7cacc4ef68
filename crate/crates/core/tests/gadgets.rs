//! Closed-form values of the single-gadget and greedy-gap instances, the
//! set-cover reduction thresholds, and the approximation bound.

use sensact::experiment::{predicted_gap_ratio, select_instance, Instance, Method, ProblemKind};
use sensact::instances::{
    example1_mdp, example1_pomdp, example2_mdp, example3_instance, example4_instance, r_approx,
    setcover_to_fmdp_as, setcover_to_fmdp_ss, GapParams, SetCoverInstance, Var3Reward,
};
use sensact::mdp::value_iteration;
use sensact::pomdp::{solve_infinite_horizon, SolverOptions};
use sensact::selection::{evaluate_actuator_set, evaluate_sensor_set};

#[test]
fn single_gadget_sensor_values() {
    let with = solve_infinite_horizon(&example1_pomdp(1.0, 0.1, 0.9, true).unwrap(), 1e-6).unwrap();
    assert!((with.value_at_b0 - 10.0).abs() < 1e-4, "with sensor {}", with.value_at_b0);
    let without = solve_infinite_horizon(&example1_pomdp(1.0, 0.1, 0.9, false).unwrap(), 1e-6).unwrap();
    assert!(without.value_at_b0.abs() < 1e-4, "without sensor {}", without.value_at_b0);

    let problem = example1_mdp(1.0, 0.1, 0.9).unwrap();
    assert!((evaluate_sensor_set(&problem.mdp, &problem.catalog, &[0]).unwrap() - 10.0).abs() < 1e-4);
    assert!(evaluate_sensor_set(&problem.mdp, &problem.catalog, &[]).unwrap().abs() < 1e-4);
}

#[test]
fn noiseless_sensor_matches_the_fully_observed_mdp() {
    let pomdp = example1_pomdp(1.0, 0.1, 0.9, true).unwrap();
    let solution = solve_infinite_horizon(&pomdp, 1e-8).unwrap();
    let (v, _) = value_iteration(&pomdp.mdp, 1e-10).unwrap();
    for block in &solution.blocks {
        for (i, &s) in block.states.iter().enumerate() {
            let mut b = vec![0.0; block.states.len()];
            b[i] = 1.0;
            assert!((block.set.value(&b) - v.0[s]).abs() < 1e-6, "state {s}");
        }
    }
}

#[test]
fn single_gadget_actuator_values() {
    let problem = example2_mdp(1.0, 0.1, 0.9).unwrap();
    let with = evaluate_actuator_set(&problem.mdp, &problem.catalog, &[0]).unwrap();
    let without = evaluate_actuator_set(&problem.mdp, &problem.catalog, &[]).unwrap();
    assert!((with - 10.0).abs() < 1e-9, "with actuator {with}");
    assert!(without.abs() < 1e-9, "without actuator {without}");
}

fn gap_ratio(inst: &Instance) -> (Vec<usize>, f64) {
    let opts = SolverOptions::default();
    let greedy = select_instance(inst, Method::Greedy, &opts, 0).unwrap();
    let brute = select_instance(inst, Method::Brute, &opts, 0).unwrap();
    (greedy.selected, greedy.value / brute.value)
}

#[test]
fn actuator_gap_follows_the_predicted_ratio() {
    for r4 in [2.0, 5.0, 10.0, 100.0] {
        for mode in [Var3Reward::PenaltyOnly, Var3Reward::Omitted, Var3Reward::Full] {
            let mut p = GapParams::new(1.0, 0.5, r4, 0.01, 0.9);
            p.var3_reward = mode;
            let (selected, ratio) = gap_ratio(&Instance::Actuator(example4_instance(&p).unwrap()));
            let predicted = predicted_gap_ratio(&p, ProblemKind::Actuator);
            assert!((ratio - predicted).abs() < 1e-6, "R4={r4} {mode:?}: {ratio} vs {predicted}");
            if mode == Var3Reward::PenaltyOnly {
                assert_eq!(selected, vec![0, 1]);
            }
        }
    }
}

#[test]
fn sensor_gap_follows_the_predicted_ratio() {
    let p = GapParams::new(1.0, 0.5, 5.0, 0.01, 0.9);
    let (selected, ratio) = gap_ratio(&Instance::Sensor(example3_instance(&p).unwrap()));
    assert_eq!(selected, vec![0, 1]);
    assert!((ratio - p.predicted_ratio()).abs() < 1e-4, "{ratio}");

    for mode in [Var3Reward::Omitted, Var3Reward::Full] {
        let mut p = p;
        p.var3_reward = mode;
        let (_, ratio) = gap_ratio(&Instance::Sensor(example3_instance(&p).unwrap()));
        let predicted = predicted_gap_ratio(&p, ProblemKind::Sensor);
        assert!((ratio - predicted).abs() < 1e-4, "{mode:?}: {ratio} vs {predicted}");
    }
}

#[test]
fn gap_parameters_are_validated() {
    // R4 must exceed R1 = R2 + c
    assert!(example4_instance(&GapParams::new(1.0, 0.5, 1.0, 0.01, 0.9)).is_err());
    let mut p = GapParams::new(1.0, 0.5, 5.0, 0.01, 0.9);
    p.delta = 1.0;
    assert!(example3_instance(&p).is_err());
}

#[test]
fn reduction_thresholds_separate_cover_from_no_cover() {
    let opts = SolverOptions::default();
    // {0,1} and {2} cover {0,1,2} with k = 2; {0} and {1} do not
    let cover = SetCoverInstance::new(3, vec![vec![0, 1], vec![2]], 2).unwrap();
    let gap = SetCoverInstance::new(3, vec![vec![0], vec![1]], 2).unwrap();
    for (sc, covered) in [(cover, true), (gap, false)] {
        let ss = setcover_to_fmdp_ss(&sc, 2.0, 1.0, 0.5).unwrap();
        let act = setcover_to_fmdp_as(&sc, 2.0, 1.0, 0.5).unwrap();
        let best_ss = select_instance(&Instance::SensorReduction(ss.clone()), Method::Brute, &opts, 0).unwrap();
        let best_as = select_instance(&Instance::ActuatorReduction(act.clone()), Method::Brute, &opts, 0).unwrap();
        for (value, r) in [(best_ss.value, ss.threshold), (best_as.value, act.threshold)] {
            assert_eq!(value >= r - 1e-4, covered, "value {value} threshold {r}");
        }
        if !covered {
            assert!(best_ss.value <= ss.no_cover_bound + 1e-4);
            assert!(best_as.value <= act.no_cover_bound + 1e-4);
        }
    }
}

#[test]
fn approximation_bound() {
    assert_eq!(r_approx(2, 3, 0.9, 2.0).unwrap(), 0.296875);
    let grid: Vec<f64> = (0..10).map(|i| r_approx(2, 3, 0.9, 1.5 + 0.5 * i as f64).unwrap()).collect();
    assert!(grid.windows(2).all(|w| w[1] < w[0]), "{grid:?}");
}
