//! Offline pipeline from a scenario to a checked policy, and the policy file.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maneuver::{AtomicEdgeTable, CompositePrimitive, ManeuverAutomaton};
use crate::planner::{self, Policy, PolicyCheck, Value, ValueFunction};
use crate::product::ProductAutomaton;
use crate::scenario::{Costs, JointCell, PrimitiveMode, Scenario};
use crate::workspace::{FaceLabel, Neighbor, Ots};

pub const POLICY_FORMAT: &str = "hybridplan-policy/1";

/// Wall-clock seconds spent in each offline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub ots: f64,
    pub ma: f64,
    pub pa: f64,
    pub solve: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.ots + self.ma + self.pa + self.solve
    }
}

/// The discrete abstraction of a scenario.
#[derive(Debug, Clone)]
pub struct Abstraction {
    pub ots: Ots,
    pub ma: ManeuverAutomaton,
    pub pa: ProductAutomaton,
}

impl Abstraction {
    pub fn build(scenario: &Scenario, timings: &mut Timings) -> Result<Abstraction> {
        let start = Instant::now();
        let ots = Ots::build(scenario)?;
        timings.ots = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let table = match &scenario.atomic_edges {
            Some(specs) => AtomicEdgeTable::from_specs(specs)?,
            None => AtomicEdgeTable::default(),
        };
        let ma = ManeuverAutomaton::compose_with(scenario.p(), scenario.primitive_mode, table);
        timings.ma = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let pa = ProductAutomaton::build(&ots, &ma, &scenario.costs, scenario.final_any_primitive)?;
        timings.pa = start.elapsed().as_secs_f64();
        Ok(Abstraction { ots, ma, pa })
    }
}

/// A solved scenario: abstraction, value function and policy.
#[derive(Debug, Clone)]
pub struct Plan {
    pub scenario: Scenario,
    /// Hash of the scenario as read, before any primitive-mode override.
    pub scenario_hash: String,
    pub ots: Ots,
    pub ma: ManeuverAutomaton,
    pub pa: ProductAutomaton,
    pub values: ValueFunction,
    pub policy: Policy,
    pub timings: Timings,
}

impl Plan {
    pub fn build(scenario: Scenario, mode: Option<PrimitiveMode>) -> Result<Plan> {
        let scenario_hash = scenario.hash();
        let mut scenario = scenario;
        if let Some(mode) = mode {
            scenario.primitive_mode = mode;
        }
        let mut timings = Timings::default();
        let Abstraction { ots, ma, pa } = Abstraction::build(&scenario, &mut timings)?;
        let start = Instant::now();
        let (values, policy) = planner::solve(&pa)?;
        timings.solve = start.elapsed().as_secs_f64();
        Ok(Plan {
            scenario,
            scenario_hash,
            ots,
            ma,
            pa,
            values,
            policy,
            timings,
        })
    }

    /// Fails when no location outside the goal can be steered to it.
    pub fn require_reachable(&self) -> Result<()> {
        let outside: Vec<usize> = (0..self.ots.location_count())
            .filter(|&l| !self.ots.is_goal(l))
            .collect();
        if !outside.is_empty() && outside.iter().all(|&l| self.policy.dispatch(l).is_none()) {
            return Err(Error::UnreachableGoal(
                "no location outside the goal has a primitive with finite value".into(),
            ));
        }
        Ok(())
    }

    pub fn check(&self) -> PolicyCheck {
        planner::check_policy(&self.pa, &self.policy)
    }

    pub fn value(&self, location: usize, primitive: usize) -> Value {
        self.values.get(self.pa.state(location, primitive))
    }

    pub fn state_name(&self, state: usize) -> String {
        let l = self.pa.location_of(state);
        let m = self.pa.primitive_of(state);
        format!("({}|{})", self.ots.cell(l), self.ma.primitive(m))
    }

    pub fn to_document(&self) -> PolicyDocument {
        let p = self.pa.p();
        let mut states = Vec::new();
        for q in 0..self.pa.state_count() {
            let Value::Finite(value) = self.values.get(q) else {
                continue;
            };
            let mut choices = BTreeMap::new();
            if let Some(entry) = self.policy.entry(q) {
                for (slot, &t) in entry.iter().enumerate() {
                    let label = FaceLabel::from_code(self.pa.slot_label(q, slot), p);
                    let prim = self.ma.primitive(self.pa.primitive_of(t as usize));
                    choices.insert(label.to_string(), prim.to_string());
                }
            }
            states.push(StateRecord {
                state: q,
                cell: self.ots.cell(self.pa.location_of(q)).clone(),
                primitive: self.ma.primitive(self.pa.primitive_of(q)).to_string(),
                value,
                choices,
            });
        }
        let dispatch = (0..self.ots.location_count())
            .filter_map(|l| {
                let m = self.policy.dispatch(l)?;
                Some(DispatchRecord {
                    location: l,
                    cell: self.ots.cell(l).clone(),
                    primitive: self.ma.primitive(m).to_string(),
                    value: self.value(l, m).finite()?,
                })
            })
            .collect();
        PolicyDocument {
            format: POLICY_FORMAT.into(),
            solver_version: planner::SOLVER_VERSION.into(),
            scenario_hash: self.scenario_hash.clone(),
            primitive_mode: self.scenario.primitive_mode,
            costs: self.scenario.costs,
            final_any_primitive: self.scenario.final_any_primitive,
            outputs: p,
            states,
            dispatch,
        }
    }

    pub fn policy_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_document()).expect("policy serializes");
        text.push('\n');
        text
    }

    /// Rebuilds the abstraction for `scenario` and reads values and choices
    /// from a policy file. Choices that are not product edges are kept so the
    /// checker can report them.
    pub fn load(scenario: Scenario, policy_text: &str) -> Result<Plan> {
        let doc: PolicyDocument = serde_json::from_str(policy_text).map_err(|e| Error::syntax(&e))?;
        if doc.format != POLICY_FORMAT {
            return Err(Error::PolicyFormat(format!("unknown format `{}`", doc.format)));
        }
        let scenario_hash = scenario.hash();
        if doc.scenario_hash != scenario_hash {
            return Err(Error::PolicyMismatch {
                expected: scenario_hash,
                found: doc.scenario_hash,
            });
        }
        let mut scenario = scenario;
        scenario.primitive_mode = doc.primitive_mode;
        if doc.outputs != scenario.p() {
            return Err(Error::PolicyFormat(format!(
                "policy has {} outputs, scenario has {}",
                doc.outputs,
                scenario.p()
            )));
        }
        let mut timings = Timings::default();
        let Abstraction { ots, ma, pa } = Abstraction::build(&scenario, &mut timings)?;
        let n = pa.state_count();
        let mut values = vec![Value::Unreachable; n];
        let mut entries: Vec<Option<Box<[u32]>>> = vec![None; n];
        let prim_index = |name: &str| -> Result<usize> {
            let m: CompositePrimitive = name.parse()?;
            if m.p() != scenario.p() {
                return Err(Error::PolicyFormat(format!("primitive `{name}` has wrong length")));
            }
            ma.index_of(&m)
                .ok_or_else(|| Error::PolicyFormat(format!("primitive `{name}` is not in the automaton")))
        };
        for rec in &doc.states {
            if rec.state >= n {
                return Err(Error::PolicyFormat(format!("state {} out of range", rec.state)));
            }
            let l = pa.location_of(rec.state);
            let m = pa.primitive_of(rec.state);
            if ots.cell(l) != &rec.cell || prim_index(&rec.primitive)? != m {
                return Err(Error::PolicyFormat(format!(
                    "state {} does not match its cell and primitive",
                    rec.state
                )));
            }
            values[rec.state] = Value::Finite(rec.value);
            if pa.is_final(rec.state) {
                continue;
            }
            let slots = pa.slot_count(rec.state);
            let mut entry = Vec::with_capacity(slots);
            for slot in 0..slots {
                let code = pa.slot_label(rec.state, slot);
                let label = FaceLabel::from_code(code, pa.p());
                let name = rec.choices.get(&label.to_string()).ok_or_else(|| {
                    Error::PolicyFormat(format!("state {} has no choice for face {label}", rec.state))
                })?;
                let Neighbor::Location(next) = ots.neighbor_code(l, code) else {
                    return Err(Error::PolicyFormat(format!(
                        "state {} face {label} leaves the free workspace",
                        rec.state
                    )));
                };
                entry.push(pa.state(next, prim_index(name)?) as u32);
            }
            if slots > 0 {
                entries[rec.state] = Some(entry.into());
            }
        }
        let mut dispatch = vec![None; ots.location_count()];
        for rec in &doc.dispatch {
            if rec.location >= dispatch.len() {
                return Err(Error::PolicyFormat(format!("location {} out of range", rec.location)));
            }
            dispatch[rec.location] = Some(prim_index(&rec.primitive)?);
        }
        Ok(Plan {
            scenario,
            scenario_hash,
            ots,
            ma,
            pa,
            values: ValueFunction::new(values),
            policy: Policy::new(entries, dispatch),
            timings,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDocument {
    pub format: String,
    pub solver_version: String,
    pub scenario_hash: String,
    pub primitive_mode: PrimitiveMode,
    pub costs: Costs,
    pub final_any_primitive: bool,
    pub outputs: usize,
    pub states: Vec<StateRecord>,
    pub dispatch: Vec<DispatchRecord>,
}

/// One finite-value product state. `choices` maps each outcome face to the
/// successor primitive; it is empty for final states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub state: usize,
    pub cell: JointCell,
    pub primitive: String,
    pub value: f64,
    pub choices: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispatchRecord {
    pub location: usize,
    pub cell: JointCell,
    pub primitive: String,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid4() -> Scenario {
        Scenario::single_vehicle(vec![4, 4], vec![1.0; 2], vec![1.0; 2], vec![vec![2, 2]], [vec![3, 3]])
            .unwrap()
    }

    #[test]
    fn policy_round_trip_is_exact() {
        let plan = Plan::build(grid4(), None).unwrap();
        let text = plan.policy_json();
        let loaded = Plan::load(grid4(), &text).unwrap();
        assert_eq!(loaded.values, plan.values);
        assert_eq!(loaded.policy, plan.policy);
        assert_eq!(loaded.policy_json(), text);
        assert!(loaded.check().is_certified());
    }

    #[test]
    fn mode_override_survives_reload() {
        let plan = Plan::build(grid4(), Some(PrimitiveMode::D)).unwrap();
        assert_eq!(plan.ma.primitive_count(), 5);
        let loaded = Plan::load(grid4(), &plan.policy_json()).unwrap();
        assert_eq!(loaded.ma.primitive_count(), 5);
        assert_eq!(loaded.policy, plan.policy);
    }

    #[test]
    fn edited_scenario_is_rejected() {
        let plan = Plan::build(grid4(), None).unwrap();
        let mut other = grid4();
        other.obstacles.insert(vec![0, 3]);
        assert!(matches!(
            Plan::load(other, &plan.policy_json()),
            Err(Error::PolicyMismatch { .. })
        ));
    }

    #[test]
    fn boxed_in_goal_is_unreachable() {
        let s = Scenario::single_vehicle(
            vec![3, 3],
            vec![1.0; 2],
            vec![1.0; 2],
            vec![vec![1, 2], vec![2, 1], vec![1, 1]],
            [vec![2, 2]],
        )
        .unwrap();
        let plan = Plan::build(s, None).unwrap();
        assert!(matches!(plan.require_reachable(), Err(Error::UnreachableGoal(_))));
    }
}
