mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybridplan::maneuver::outcomes;
use hybridplan::pipeline::Plan;
use hybridplan::runtime::{Disturbance, RunOutcome, Runtime, Start};
use hybridplan::scenario::Scenario;
use hybridplan::workspace::FaceLabel;

/// Every realized label is an outcome of the running primitive, and the new
/// box is the face neighbor of the old one.
fn assert_sound(plan: &Plan, log: &hybridplan::runtime::TrajectoryLog) {
    for e in &log.events {
        assert!(e.violation.is_none(), "{e:?}");
        let label: FaceLabel = e.label.parse().unwrap();
        let prim = e.prim_from.parse().unwrap();
        assert!(outcomes(&prim).contains(&label), "{e:?}");
        let from = plan.ots.location_of(&e.box_from).unwrap();
        let to = plan.ots.location_of(&e.box_to).unwrap();
        assert_eq!(
            plan.ots.neighbor(from, &label),
            hybridplan::workspace::Neighbor::Location(to)
        );
    }
}

#[test]
fn nominal_runs_are_sound_safe_and_live() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut runs = 0;
    for trial in 0..24 {
        let p = 1 + trial % 2;
        let s = common::random_scenario(&mut rng, p, 4, 0.25);
        let plan = Plan::build(s, None).unwrap();
        let rt = Runtime::new(&plan, &[]).unwrap();
        for _ in 0..4 {
            let Some(start) = rt.random_start(&mut rng) else {
                break;
            };
            let log = rt.run(&start, None).unwrap();
            assert_eq!(log.summary.outcome, RunOutcome::Reached, "trial {trial} {start:?}");
            assert!(log.summary.violations.is_empty());
            assert_eq!(log.summary.recoveries, 0);
            assert_sound(&plan, &log);
            // Sampled positions stay inside the current box up to the event tolerance.
            let eps = plan.scenario.numerics.eps_x;
            for smp in &log.samples {
                for i in 0..plan.scenario.p() {
                    let d = plan.scenario.box_length(i);
                    let xi = smp.y[i] - smp.cell[i] as f64 * d;
                    assert!(xi >= -eps && xi <= d + eps, "{smp:?}");
                }
                assert!(plan.ots.location_of(&smp.cell).is_some());
            }
            for w in log.samples.windows(2) {
                assert!(w[1].t > w[0].t);
            }
            runs += 1;
        }
    }
    assert!(runs >= 60);
}

#[test]
fn three_output_runs_reach() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..4 {
        let s = common::random_scenario(&mut rng, 3, 3, 0.2);
        let plan = Plan::build(s, None).unwrap();
        let rt = Runtime::new(&plan, &[]).unwrap();
        for _ in 0..3 {
            let start = rt.random_start(&mut rng).unwrap();
            let log = rt.run(&start, None).unwrap();
            assert!(log.summary.reached, "{:?}", log.summary);
            assert_sound(&plan, &log);
        }
    }
}

#[test]
fn hold_at_goal_settles_with_decaying_envelope() {
    let s = Scenario::single_vehicle(vec![2], vec![1.0], vec![1.0], vec![], [vec![1]]).unwrap();
    let plan = Plan::build(s, None).unwrap();
    let rt = Runtime::new(&plan, &[]).unwrap();
    let log = rt.run(&Start::at_rest(vec![0.5]), Some(30.0)).unwrap();
    assert!(log.summary.reached);
    // After entering the goal the error to the center shrinks at least like
    // e^{-t/tau} times a constant.
    let entry = log.events.last().unwrap().t;
    let e0 = log
        .samples
        .iter()
        .find(|s| s.t >= entry)
        .map(|s| ((s.y[0] - 1.5).powi(2) + s.v[0].powi(2)).sqrt())
        .unwrap();
    for smp in log.samples.iter().filter(|s| s.t >= entry) {
        let e = ((smp.y[0] - 1.5).powi(2) + smp.v[0].powi(2)).sqrt();
        assert!(e <= 3.0 * e0 * (-(smp.t - entry)).exp() + 1e-9);
    }
}

#[test]
fn pushed_into_obstacle_is_a_hard_violation() {
    // Box 1 is an obstacle; a strong push from box 0 forces the crossing.
    let s = Scenario::single_vehicle(vec![3, 2], vec![1.0; 2], vec![1.0; 2], vec![vec![1, 0]], [vec![2, 1]])
        .unwrap();
    let plan = Plan::build(s, None).unwrap();
    let wind = [Disturbance::new(0.0, 5.0, 0, 4.0).unwrap()];
    let rt = Runtime::new(&plan, &wind).unwrap();
    let log = rt.run(&Start::at_rest(vec![0.5, 0.5]), None).unwrap();
    assert_eq!(log.summary.outcome, RunOutcome::SafetyViolation);
    assert_eq!(log.summary.outcome.exit_code(), 3);
    assert!(log.summary.violations.iter().any(|v| v.kind.is_hard()));
}

#[test]
fn pushed_out_of_workspace_is_a_hard_violation() {
    let s = Scenario::single_vehicle(vec![2], vec![1.0], vec![1.0], vec![], [vec![1]]).unwrap();
    let plan = Plan::build(s, None).unwrap();
    let wind = [Disturbance::new(0.0, 5.0, 0, -4.0).unwrap()];
    let rt = Runtime::new(&plan, &wind).unwrap();
    let log = rt.run(&Start::at_rest(vec![0.5]), None).unwrap();
    assert_eq!(log.summary.outcome, RunOutcome::SafetyViolation);
}

#[test]
fn too_short_horizon_is_not_reached() {
    let s = Scenario::single_vehicle(vec![3], vec![1.0], vec![1.0], vec![], [vec![2]]).unwrap();
    let plan = Plan::build(s, None).unwrap();
    let rt = Runtime::new(&plan, &[]).unwrap();
    let log = rt.run(&Start::at_rest(vec![0.5]), Some(1.0)).unwrap();
    assert_eq!(log.summary.outcome, RunOutcome::NotReached);
    assert_eq!(log.summary.outcome.exit_code(), 2);
}

#[test]
fn start_in_obstacle_or_unplanned_box_is_rejected() {
    let s = Scenario::single_vehicle(
        vec![3, 3],
        vec![1.0; 2],
        vec![1.0; 2],
        vec![vec![1, 1], vec![1, 2], vec![2, 1]],
        [vec![2, 2]],
    )
    .unwrap();
    let plan = Plan::build(s, None).unwrap();
    let rt = Runtime::new(&plan, &[]).unwrap();
    assert!(rt.run(&Start::at_rest(vec![1.5, 1.5]), None).is_err());
    assert!(matches!(
        rt.run(&Start::at_rest(vec![0.5, 0.5]), None),
        Err(hybridplan::Error::Stuck { .. })
    ));
}

#[test]
fn swap_scenario_nominal_and_disturbed() {
    let s = Scenario::from_path(common::scenario_path("swap.json")).unwrap();
    let plan = Plan::build(s, None).unwrap();
    let start = Start::at_rest(common::swap_start(&plan.scenario));
    let nominal = Runtime::new(&plan, &[]).unwrap().run(&start, None).unwrap();
    assert!(nominal.summary.reached);
    assert_sound(&plan, &nominal);
    let wind = [Disturbance::new(0.0, 10.0, 2, -0.3).unwrap()];
    let disturbed = Runtime::new(&plan, &wind).unwrap().run(&start, None).unwrap();
    assert!(disturbed.summary.reached);
    assert!(disturbed.summary.violations.is_empty());
    assert!(disturbed.summary.t_reach.unwrap() > nominal.summary.t_reach.unwrap());
}
