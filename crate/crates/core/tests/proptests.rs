mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybridplan::maneuver::{outcomes, CompositePrimitive, ManeuverAutomaton};
use hybridplan::pipeline::{Abstraction, Timings};
use hybridplan::scenario::{PrimitiveMode, Scenario};
use hybridplan::workspace::{global_to_cell, FaceLabel, Neighbor};

proptest! {
    #[test]
    fn label_code_round_trip(p in 1usize..=5, seed in any::<u32>()) {
        let code = seed % 3u32.pow(p as u32);
        let label = FaceLabel::from_code(code, p);
        prop_assert_eq!(label.code(), code);
        prop_assert_eq!(label.to_string().parse::<FaceLabel>().unwrap(), label.clone());
        prop_assert_eq!(label.negate().negate(), label);
    }

    #[test]
    fn primitive_code_round_trip(p in 1usize..=5, seed in any::<u32>()) {
        let code = seed % 3u32.pow(p as u32);
        let m = CompositePrimitive::from_code(code, p);
        prop_assert_eq!(m.code(), code);
        prop_assert_eq!(m.to_string().parse::<CompositePrimitive>().unwrap(), m.clone());
        // Hold outputs never appear in an outcome's support.
        for o in outcomes(&m) {
            prop_assert!(o.support() <= m.moving_count());
        }
    }

    #[test]
    fn global_to_cell_recovers_the_point(
        seed in any::<u64>(),
        fr in proptest::collection::vec(0.0f64..=1.0, 3),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_scenario(&mut rng, 3, 5, 0.0);
        let y: Vec<f64> = (0..3)
            .map(|i| fr[i] * s.extent(i) as f64 * s.box_length(i))
            .collect();
        let (cell, local) = global_to_cell(&s, &y).unwrap();
        for i in 0..3 {
            let d = s.box_length(i);
            prop_assert!(cell[i] < s.extent(i));
            prop_assert!(local[i] >= 0.0 && local[i] <= d);
            prop_assert!((cell[i] as f64 * d + local[i] - y[i]).abs() <= 1e-12 * (1.0 + y[i]));
        }
    }

    #[test]
    fn points_outside_are_rejected(seed in any::<u64>(), over in 1e-9f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_scenario(&mut rng, 2, 4, 0.0);
        let top = s.extent(0) as f64 * s.box_length(0);
        prop_assert!(global_to_cell(&s, &[top + over, 0.0]).is_err());
        prop_assert!(global_to_cell(&s, &[-over, 0.0]).is_err());
    }

    #[test]
    fn product_edges_project_onto_both_factors(
        seed in any::<u64>(),
        p in 1usize..=3,
        deterministic in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = common::random_scenario(&mut rng, p, 4, 0.25);
        s.primitive_mode = if deterministic { PrimitiveMode::D } else { PrimitiveMode::ND };
        let Abstraction { ots, ma, pa } = Abstraction::build(&s, &mut Timings::default()).unwrap();
        for state in 0..pa.state_count() {
            let (l, m) = (pa.location_of(state), pa.primitive_of(state));
            prop_assert_eq!(pa.state(l, m), state);
            let edges: Vec<_> = pa.edges(state).collect();
            if !pa.is_admissible(state) {
                prop_assert!(edges.is_empty());
                continue;
            }
            for e in edges {
                prop_assert_eq!(ma.outcome_codes(m)[e.slot], e.label);
                prop_assert_eq!(
                    ots.neighbor_code(l, e.label),
                    Neighbor::Location(pa.location_of(e.target))
                );
                prop_assert!(ma
                    .successor_indices(m, e.slot)
                    .contains(&(pa.primitive_of(e.target) as u32)));
                prop_assert!(e.cost > 0.0);
            }
        }
    }

    #[test]
    fn maneuver_edges_follow_outcomes(p in 1usize..=3, deterministic in any::<bool>()) {
        let mode = if deterministic { PrimitiveMode::D } else { PrimitiveMode::ND };
        let ma = ManeuverAutomaton::compose(p, mode);
        for (from, label, to) in ma.edges() {
            let m = ma.primitive(from);
            let label = FaceLabel::from_code(label, p);
            prop_assert!(outcomes(m).contains(&label));
            prop_assert!(to < ma.primitive_count());
        }
    }

    #[test]
    fn scenario_json_round_trip_keeps_hash(seed in any::<u64>(), p in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_scenario(&mut rng, p, 4, 0.3);
        let back = Scenario::parse(&s.to_json()).unwrap();
        prop_assert_eq!(back.hash(), s.hash());
        prop_assert_eq!(back.to_json(), s.to_json());
        let mut edited = back.clone();
        edited.box_lengths[0] *= 1.5;
        prop_assert_ne!(edited.hash(), s.hash());
    }
}
