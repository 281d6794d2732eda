//! Synchronous product of the output transition system and the discrete
//! maneuver automaton.
//!
//! Product states are `(location, primitive)` pairs indexed as
//! `location * |M| + primitive`. Inadmissible states (some outcome face leads
//! off the free workspace) are kept but have no outgoing edges, so state
//! indices stay dense.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::maneuver::ManeuverAutomaton;
use crate::scenario::{CostVariant, Costs};
use crate::workspace::{Neighbor, Ots};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductEdge {
    /// Index of the label among the source primitive's outcomes.
    pub slot: usize,
    pub label: u32,
    pub target: usize,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct ProductAutomaton {
    p: usize,
    location_count: usize,
    primitive_count: usize,
    admissible: Vec<bool>,
    is_final: Vec<bool>,
    finals: Vec<usize>,
    slot_counts: Vec<u16>,
    outcome_codes: Vec<Vec<u32>>,
    offsets: Vec<usize>,
    edge_slot: Vec<u16>,
    edge_label: Vec<u32>,
    edge_target: Vec<u32>,
    edge_cost: Vec<f64>,
    terminal_cost: f64,
}

/// Summary counts of a product automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductStats {
    pub states: usize,
    pub edges: usize,
    pub admissible: usize,
    pub finals: usize,
}

impl ProductAutomaton {
    pub fn build(
        ots: &Ots,
        ma: &ManeuverAutomaton,
        costs: &Costs,
        final_any_primitive: bool,
    ) -> Result<ProductAutomaton> {
        if ots.p() != ma.p() {
            return Err(Error::ContractViolation(format!(
                "workspace has {} outputs but the maneuver automaton has {}",
                ots.p(),
                ma.p()
            )));
        }
        let nl = ots.location_count();
        let nm = ma.primitive_count();
        let n = nl * nm;

        let mut admissible = vec![false; n];
        let mut is_final = vec![false; n];
        let mut finals = Vec::new();
        let mut slot_counts = vec![0u16; n];
        for l in 0..nl {
            for m in 0..nm {
                let q = l * nm + m;
                admissible[q] = ma
                    .outcome_codes(m)
                    .iter()
                    .all(|&code| matches!(ots.neighbor_code(l, code), Neighbor::Location(_)));
                if admissible[q] {
                    slot_counts[q] = ma.outcome_codes(m).len() as u16;
                }
                if ots.is_goal(l) && (final_any_primitive || ma.primitive(m).is_all_hold()) {
                    is_final[q] = true;
                    finals.push(q);
                }
            }
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut edge_slot = Vec::new();
        let mut edge_label = Vec::new();
        let mut edge_target = Vec::new();
        let mut edge_cost = Vec::new();
        offsets.push(0);
        for l in 0..nl {
            for m in 0..nm {
                let q = l * nm + m;
                if admissible[q] {
                    let cost = match costs.variant {
                        CostVariant::Uniform => costs.edge_cost,
                        CostVariant::MovingCoords => ma.primitive(m).moving_count() as f64,
                    };
                    for (slot, &code) in ma.outcome_codes(m).iter().enumerate() {
                        let Neighbor::Location(next) = ots.neighbor_code(l, code) else {
                            unreachable!("admissible state has a free neighbor for every outcome")
                        };
                        for &t in ma.successor_indices(m, slot) {
                            let target = next * nm + t as usize;
                            if admissible[target] {
                                edge_slot.push(slot as u16);
                                edge_label.push(code);
                                edge_target.push(target as u32);
                                edge_cost.push(cost);
                            }
                        }
                    }
                }
                offsets.push(edge_slot.len());
            }
        }

        Ok(ProductAutomaton {
            p: ots.p(),
            location_count: nl,
            primitive_count: nm,
            admissible,
            is_final,
            finals,
            slot_counts,
            outcome_codes: (0..nm).map(|m| ma.outcome_codes(m).to_vec()).collect(),
            offsets,
            edge_slot,
            edge_label,
            edge_target,
            edge_cost,
            terminal_cost: costs.terminal_cost,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn state_count(&self) -> usize {
        self.admissible.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_slot.len()
    }

    pub fn location_count(&self) -> usize {
        self.location_count
    }

    pub fn primitive_count(&self) -> usize {
        self.primitive_count
    }

    pub fn state(&self, location: usize, primitive: usize) -> usize {
        location * self.primitive_count + primitive
    }

    pub fn location_of(&self, state: usize) -> usize {
        state / self.primitive_count
    }

    pub fn primitive_of(&self, state: usize) -> usize {
        state % self.primitive_count
    }

    pub fn is_admissible(&self, state: usize) -> bool {
        self.admissible[state]
    }

    pub fn is_final(&self, state: usize) -> bool {
        self.is_final[state]
    }

    /// Final states, or an error when no goal state exists.
    pub fn finals(&self) -> Result<&[usize]> {
        if self.finals.is_empty() {
            Err(Error::UnreachableGoal("product automaton has no final state".into()))
        } else {
            Ok(&self.finals)
        }
    }

    pub fn terminal_cost(&self, state: usize) -> f64 {
        debug_assert!(self.is_final[state]);
        self.terminal_cost
    }

    /// Number of outcome labels of an admissible state (0 when inadmissible).
    pub fn slot_count(&self, state: usize) -> usize {
        self.slot_counts[state] as usize
    }

    /// Label code of an outcome slot of a state's primitive.
    pub fn slot_label(&self, state: usize, slot: usize) -> u32 {
        self.outcome_codes[self.primitive_of(state)][slot]
    }

    pub fn edge_range(&self, state: usize) -> Range<usize> {
        self.offsets[state]..self.offsets[state + 1]
    }

    pub fn edge(&self, index: usize) -> ProductEdge {
        ProductEdge {
            slot: self.edge_slot[index] as usize,
            label: self.edge_label[index],
            target: self.edge_target[index] as usize,
            cost: self.edge_cost[index],
        }
    }

    /// Outgoing edges grouped by slot, each group ordered by target.
    pub fn edges(&self, state: usize) -> impl Iterator<Item = ProductEdge> + '_ {
        self.edge_range(state).map(move |i| self.edge(i))
    }

    pub fn min_edge_cost(&self) -> Option<f64> {
        self.edge_cost.iter().cloned().reduce(f64::min)
    }

    pub fn stats(&self) -> ProductStats {
        ProductStats {
            states: self.state_count(),
            edges: self.edge_count(),
            admissible: self.admissible.iter().filter(|&&a| a).count(),
            finals: self.finals.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maneuver::CompositePrimitive;
    use crate::scenario::{PrimitiveMode, Scenario};
    use crate::workspace::FaceLabel;

    fn grid4() -> (Ots, ManeuverAutomaton, ProductAutomaton) {
        let s = Scenario::single_vehicle(
            vec![4, 4],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            [vec![2, 2]],
            [vec![3, 3]],
        )
        .unwrap();
        let ots = Ots::build(&s).unwrap();
        let ma = ManeuverAutomaton::compose(2, PrimitiveMode::ND);
        let pa = ProductAutomaton::build(&ots, &ma, &s.costs, false).unwrap();
        (ots, ma, pa)
    }

    fn prim(ma: &ManeuverAutomaton, s: &str) -> usize {
        ma.index_of(&s.parse::<CompositePrimitive>().unwrap()).unwrap()
    }

    #[test]
    fn l1_forward_has_four_edges_to_l2() {
        let (ots, ma, pa) = grid4();
        let l1 = ots.location_of(&[0, 0]).unwrap();
        let l2 = ots.location_of(&[1, 0]).unwrap();
        let q = pa.state(l1, prim(&ma, "FH"));
        let edges: Vec<_> = pa.edges(q).collect();
        assert_eq!(edges.len(), 4);
        let label = "+0".parse::<FaceLabel>().unwrap().code();
        let mut targets: Vec<String> = edges
            .iter()
            .map(|e| {
                assert_eq!(e.label, label);
                assert_eq!(pa.location_of(e.target), l2);
                ma.primitive(pa.primitive_of(e.target)).to_string()
            })
            .collect();
        targets.sort();
        assert_eq!(targets, vec!["FF", "FH", "HF", "HH"]);
    }

    #[test]
    fn blocked_forward_is_inadmissible() {
        let (ots, ma, pa) = grid4();
        let left_of_obstacle = ots.location_of(&[1, 2]).unwrap();
        let q = pa.state(left_of_obstacle, prim(&ma, "FH"));
        assert!(!pa.is_admissible(q));
        assert_eq!(pa.edges(q).count(), 0);
        let corner = ots.location_of(&[3, 0]).unwrap();
        assert!(!pa.is_admissible(pa.state(corner, prim(&ma, "FH"))));
    }

    #[test]
    fn counts_and_finals() {
        let (ots, ma, pa) = grid4();
        assert_eq!(pa.state_count(), 135);
        assert_eq!(pa.finals().unwrap().len(), 1);
        let goal = ots.goal_locations()[0];
        assert!(pa.is_final(pa.state(goal, prim(&ma, "HH"))));
        assert!(!pa.is_final(pa.state(goal, prim(&ma, "FH"))));
    }

    #[test]
    fn final_any_primitive_and_two_goals() {
        let s = Scenario::single_vehicle(
            vec![3, 3],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            [],
            [vec![2, 2], vec![0, 2]],
        )
        .unwrap();
        let ots = Ots::build(&s).unwrap();
        let ma = ManeuverAutomaton::compose(2, PrimitiveMode::ND);
        let pa = ProductAutomaton::build(&ots, &ma, &s.costs, false).unwrap();
        assert_eq!(pa.finals().unwrap().len(), 2);
        let pa = ProductAutomaton::build(&ots, &ma, &s.costs, true).unwrap();
        assert_eq!(pa.finals().unwrap().len(), 18);
    }

    #[test]
    fn edges_project_onto_both_factors() {
        let (ots, ma, pa) = grid4();
        let ma_edges: std::collections::BTreeSet<(usize, u32, usize)> = ma.edges().collect();
        for q in 0..pa.state_count() {
            let (l, m) = (pa.location_of(q), pa.primitive_of(q));
            let mut labels_seen = std::collections::BTreeSet::new();
            for e in pa.edges(q) {
                let (l2, m2) = (pa.location_of(e.target), pa.primitive_of(e.target));
                assert!(ots.edges(l).any(|(c, t)| c == e.label && t == l2));
                assert!(ma_edges.contains(&(m, e.label, m2)));
                assert!(pa.is_admissible(e.target));
                assert_eq!(ma.outcome_codes(m)[e.slot], e.label);
                labels_seen.insert(e.label);
            }
            if pa.is_admissible(q) {
                // Each outcome has at least the all-Hold-successor or some edge.
                for &code in ma.outcome_codes(m) {
                    assert!(matches!(ots.neighbor_code(l, code), Neighbor::Location(_)));
                }
            }
        }
    }

    #[test]
    fn moving_coords_cost() {
        let s = Scenario::single_vehicle(vec![3, 3], vec![1.0; 2], vec![1.0; 2], [], [vec![2, 2]])
            .unwrap();
        let ots = Ots::build(&s).unwrap();
        let ma = ManeuverAutomaton::compose(2, PrimitiveMode::ND);
        let costs = Costs {
            variant: CostVariant::MovingCoords,
            ..Costs::default()
        };
        let pa = ProductAutomaton::build(&ots, &ma, &costs, false).unwrap();
        let l = ots.location_of(&[0, 0]).unwrap();
        assert!(pa.edges(pa.state(l, prim(&ma, "FF"))).all(|e| e.cost == 2.0));
        assert!(pa.edges(pa.state(l, prim(&ma, "FH"))).all(|e| e.cost == 1.0));
    }
}
