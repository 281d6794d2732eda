//! Worst-case shortest paths on the product automaton.
//!
//! The environment picks which outcome face a primitive reaches, the
//! controller picks the successor primitive. The value of a state is
//! `max over faces of min over edges (cost + value of target)`, with final
//! states worth their terminal cost. [`solve`] computes it by label setting;
//! [`value_iteration`] is the fixpoint oracle used to cross-check it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::{Error, Result};
use crate::product::ProductAutomaton;

pub const SOLVER_VERSION: &str = concat!("label-setting/", env!("CARGO_PKG_VERSION"));

/// Extended nonnegative cost. `Unreachable` orders above every finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Finite(f64),
    Unreachable,
}

impl Value {
    pub fn is_finite(self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Unreachable => None,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => a.partial_cmp(b),
            (Value::Finite(_), Value::Unreachable) => Some(Ordering::Less),
            (Value::Unreachable, Value::Finite(_)) => Some(Ordering::Greater),
            (Value::Unreachable, Value::Unreachable) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(v) => write!(f, "{v}"),
            Value::Unreachable => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    values: Vec<Value>,
}

impl ValueFunction {
    pub fn new(values: Vec<Value>) -> ValueFunction {
        ValueFunction { values }
    }

    pub fn get(&self, state: usize) -> Value {
        self.values[state]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Memoryless discrete feedback: for every non-final state with finite value,
/// one chosen target state per outcome slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    entries: Vec<Option<Box<[u32]>>>,
    /// Best primitive per location, when any has finite value.
    dispatch: Vec<Option<usize>>,
}

impl Policy {
    pub fn new(entries: Vec<Option<Box<[u32]>>>, dispatch: Vec<Option<usize>>) -> Policy {
        Policy { entries, dispatch }
    }

    /// Chosen targets for each outcome slot of `state`.
    pub fn entry(&self, state: usize) -> Option<&[u32]> {
        self.entries[state].as_deref()
    }

    pub fn choice(&self, state: usize, slot: usize) -> Option<usize> {
        self.entry(state).and_then(|e| e.get(slot)).map(|&t| t as usize)
    }

    pub fn dispatch(&self, location: usize) -> Option<usize> {
        self.dispatch[location]
    }

    pub fn state_count(&self) -> usize {
        self.entries.len()
    }

    /// States with an entry, ascending.
    pub fn planned_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(q, e)| e.as_ref().map(|_| q))
    }

    /// Overwrites one choice. Used to probe the checker.
    pub fn set_choice(&mut self, state: usize, slot: usize, target: usize) {
        if let Some(entry) = self.entries[state].as_mut() {
            entry[slot] = target as u32;
        }
    }
}

fn check_costs(pa: &ProductAutomaton) -> Result<()> {
    match pa.min_edge_cost() {
        Some(c) if c <= 0.0 => Err(Error::NonPositiveEdgeCost(c)),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Queued {
    value: f64,
    state: u32,
}

impl Eq for Queued {}

impl Ord for Queued {
    // Reversed so the max-heap pops the smallest (value, state) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.state.cmp(&self.state))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Predecessor lists: for each state, the `(source, edge index)` pairs
/// pointing at it.
struct Predecessors {
    offsets: Vec<usize>,
    entries: Vec<(u32, u32)>,
}

impl Predecessors {
    fn build(pa: &ProductAutomaton) -> Predecessors {
        let n = pa.state_count();
        let mut counts = vec![0usize; n + 1];
        for q in 0..n {
            for e in pa.edge_range(q) {
                counts[pa.edge(e).target + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut entries = vec![(0u32, 0u32); pa.edge_count()];
        for q in 0..n {
            for e in pa.edge_range(q) {
                let t = pa.edge(e).target;
                entries[fill[t]] = (q as u32, e as u32);
                fill[t] += 1;
            }
        }
        Predecessors {
            offsets: counts,
            entries,
        }
    }

    fn of(&self, state: usize) -> &[(u32, u32)] {
        &self.entries[self.offsets[state]..self.offsets[state + 1]]
    }
}

/// Label-setting solver for the worst-case value function.
///
/// States are finalized in order of increasing value. A non-final state
/// becomes eligible once every outcome slot has at least one finalized
/// target; its key is the largest of the per-slot minima. Ties between
/// equally good targets go to the smallest target index.
pub fn solve(pa: &ProductAutomaton) -> Result<(ValueFunction, Policy)> {
    check_costs(pa)?;
    let finals = pa.finals()?;
    let n = pa.state_count();

    let mut slot_base = vec![0usize; n + 1];
    for q in 0..n {
        slot_base[q + 1] = slot_base[q] + pa.slot_count(q);
    }
    let mut best_value = vec![f64::INFINITY; slot_base[n]];
    let mut best_target = vec![u32::MAX; slot_base[n]];
    let mut satisfied = vec![0usize; n];
    let mut tentative = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut values = vec![Value::Unreachable; n];

    let preds = Predecessors::build(pa);
    let mut heap = BinaryHeap::new();
    for &q in finals {
        tentative[q] = pa.terminal_cost(q);
        heap.push(Queued {
            value: tentative[q],
            state: q as u32,
        });
    }

    while let Some(Queued { value, state }) = heap.pop() {
        let q = state as usize;
        if done[q] {
            continue;
        }
        done[q] = true;
        values[q] = Value::Finite(value);
        for &(src, e) in preds.of(q) {
            let src = src as usize;
            if done[src] || pa.is_final(src) {
                continue;
            }
            let edge = pa.edge(e as usize);
            let k = slot_base[src] + edge.slot;
            let candidate = edge.cost + value;
            if best_target[k] == u32::MAX {
                best_value[k] = candidate;
                best_target[k] = state;
                satisfied[src] += 1;
            } else if candidate < best_value[k]
                || (candidate == best_value[k] && state < best_target[k])
            {
                best_value[k] = candidate;
                best_target[k] = state;
            }
            if satisfied[src] == pa.slot_count(src) {
                let key = best_value[slot_base[src]..slot_base[src + 1]]
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                if key < tentative[src] {
                    tentative[src] = key;
                    heap.push(Queued {
                        value: key,
                        state: src as u32,
                    });
                }
            }
        }
    }

    let entries = (0..n)
        .map(|q| {
            (done[q] && !pa.is_final(q))
                .then(|| best_target[slot_base[q]..slot_base[q + 1]].into())
        })
        .collect();
    let values = ValueFunction::new(values);
    let dispatch = dispatch_table(pa, &values);
    Ok((values, Policy::new(entries, dispatch)))
}

/// One application of the max-min Bellman operator at `state`.
pub fn bellman(pa: &ProductAutomaton, values: &[Value], state: usize) -> Value {
    if pa.is_final(state) {
        return Value::Finite(pa.terminal_cost(state));
    }
    let slots = pa.slot_count(state);
    if slots == 0 {
        return Value::Unreachable;
    }
    let mut slot_min = vec![f64::INFINITY; slots];
    for e in pa.edges(state) {
        if let Value::Finite(v) = values[e.target] {
            let c = e.cost + v;
            if c < slot_min[e.slot] {
                slot_min[e.slot] = c;
            }
        }
    }
    let worst = slot_min.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if worst.is_finite() {
        Value::Finite(worst)
    } else {
        Value::Unreachable
    }
}

/// Applies the Bellman operator to every state once (Jacobi sweep).
pub fn bellman_sweep(pa: &ProductAutomaton, values: &ValueFunction) -> ValueFunction {
    ValueFunction::new(
        (0..pa.state_count())
            .map(|q| bellman(pa, values.values(), q))
            .collect(),
    )
}

/// Fixpoint iteration of the Bellman operator from the terminal costs.
pub fn value_iteration(pa: &ProductAutomaton) -> ValueFunction {
    let n = pa.state_count();
    let mut values: Vec<Value> = (0..n)
        .map(|q| {
            if pa.is_final(q) {
                Value::Finite(pa.terminal_cost(q))
            } else {
                Value::Unreachable
            }
        })
        .collect();
    // Gauss-Seidel sweeps; values only decrease and settle within n sweeps.
    for _ in 0..=n {
        let mut changed = false;
        for q in 0..n {
            let v = bellman(pa, &values, q);
            if v != values[q] {
                values[q] = v;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    ValueFunction::new(values)
}

/// Greedy policy for a value function: per slot the cheapest edge, ties to
/// the smallest target index.
pub fn extract_policy(pa: &ProductAutomaton, values: &ValueFunction) -> Policy {
    let n = pa.state_count();
    let entries = (0..n)
        .map(|q| {
            if pa.is_final(q) || !values.get(q).is_finite() {
                return None;
            }
            let slots = pa.slot_count(q);
            let mut best = vec![(f64::INFINITY, u32::MAX); slots];
            for e in pa.edges(q) {
                if let Value::Finite(v) = values.get(e.target) {
                    let c = e.cost + v;
                    let cur = &mut best[e.slot];
                    if c < cur.0 || (c == cur.0 && (e.target as u32) < cur.1) {
                        *cur = (c, e.target as u32);
                    }
                }
            }
            Some(best.into_iter().map(|(_, t)| t).collect())
        })
        .collect();
    Policy::new(entries, dispatch_table(pa, values))
}

/// For every location, the primitive of smallest value (ties to the smaller
/// primitive index), if any value is finite.
pub fn dispatch_table(pa: &ProductAutomaton, values: &ValueFunction) -> Vec<Option<usize>> {
    (0..pa.location_count())
        .map(|l| {
            let mut best: Option<(f64, usize)> = None;
            for m in 0..pa.primitive_count() {
                if let Value::Finite(v) = values.get(pa.state(l, m)) {
                    if best.is_none_or(|(b, _)| v < b) {
                        best = Some((v, m));
                    }
                }
            }
            best.map(|(_, m)| m)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleKind {
    /// A run under the policy revisits a state.
    Lasso,
    /// A run reaches a non-final state without a policy entry.
    DeadEnd,
    /// A policy choice is not an edge of the product automaton for its face.
    InvalidChoice,
}

/// Witness run: `prefix` leads from a start state to the problem; for a
/// lasso, `cycle` repeats forever. Steps are `(state, label code taken)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    pub prefix: Vec<(usize, u32)>,
    pub cycle: Vec<(usize, u32)>,
    /// State at which the run stops (dead end / invalid choice) or re-enters.
    pub at: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certificate {
    pub start_states: usize,
    pub reachable_states: usize,
    /// Longest number of transitions any run takes to reach a final state.
    pub max_run_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyCheck {
    Certified(Certificate),
    Counterexample(Counterexample),
}

impl PolicyCheck {
    pub fn is_certified(&self) -> bool {
        matches!(self, PolicyCheck::Certified(_))
    }
}

/// DFS frame: state, its closed-loop successors, next child.
type Frame = (usize, Vec<(u32, usize)>, usize);

/// Closed-loop successors of a planned state as `(label, target)`, or the
/// reason the policy is unusable there.
fn closed_loop(
    pa: &ProductAutomaton,
    policy: &Policy,
    state: usize,
) -> std::result::Result<Vec<(u32, usize)>, (CounterexampleKind, u32)> {
    let Some(entry) = policy.entry(state) else {
        return Err((CounterexampleKind::DeadEnd, 0));
    };
    let slots = pa.slot_count(state);
    if entry.len() != slots || slots == 0 {
        return Err((CounterexampleKind::InvalidChoice, 0));
    }
    let mut out = Vec::with_capacity(slots);
    for (slot, &target) in entry.iter().enumerate() {
        let label = pa.slot_label(state, slot);
        let valid = pa
            .edges(state)
            .any(|e| e.slot == slot && e.target == target as usize);
        if !valid {
            return Err((CounterexampleKind::InvalidChoice, label));
        }
        out.push((label, target as usize));
    }
    Ok(out)
}

/// Successors of `state` in the closed loop, when the policy is usable there.
pub fn closed_loop_successors(
    pa: &ProductAutomaton,
    policy: &Policy,
    state: usize,
) -> Option<Vec<(u32, usize)>> {
    closed_loop(pa, policy, state).ok()
}

/// Exhaustively explores the closed loop (adversary picks faces, policy picks
/// edges) from every planned state. Certifies when every run ends in a final
/// state; otherwise returns a concrete counterexample.
pub fn check_policy(pa: &ProductAutomaton, policy: &Policy) -> PolicyCheck {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let n = pa.state_count();
    let mut color = vec![WHITE; n];
    let mut depth = vec![0usize; n];
    let mut starts = 0;
    let mut reachable = 0;
    let mut max_run = 0;

    for root in policy.planned_states() {
        starts += 1;
        if color[root] != WHITE {
            max_run = max_run.max(depth[root]);
            continue;
        }
        let mut stack: Vec<Frame> = Vec::new();
        let enter = |q: usize,
                     stack: &mut Vec<Frame>,
                     color: &mut Vec<u8>|
         -> std::result::Result<(), (CounterexampleKind, u32)> {
            let succ = closed_loop(pa, policy, q)?;
            color[q] = GRAY;
            stack.push((q, succ, 0));
            Ok(())
        };
        if let Err((kind, _)) = enter(root, &mut stack, &mut color) {
            return PolicyCheck::Counterexample(Counterexample {
                kind,
                prefix: Vec::new(),
                cycle: Vec::new(),
                at: root,
            });
        }
        reachable += 1;
        while let Some(frame) = stack.last_mut() {
            let (q, ref succ, ref mut next) = *frame;
            if *next == succ.len() {
                let d = succ.iter().map(|&(_, t)| depth[t] + 1).max().unwrap_or(0);
                depth[q] = d;
                color[q] = BLACK;
                stack.pop();
                continue;
            }
            let (_, t) = succ[*next];
            *next += 1;
            if pa.is_final(t) {
                continue;
            }
            match color[t] {
                BLACK => {}
                GRAY => {
                    let path: Vec<(usize, u32)> =
                        stack.iter().map(|f| (f.0, f.1[f.2 - 1].0)).collect();
                    let start = path.iter().position(|&(s, _)| s == t).unwrap();
                    return PolicyCheck::Counterexample(Counterexample {
                        kind: CounterexampleKind::Lasso,
                        prefix: path[..start].to_vec(),
                        cycle: path[start..].to_vec(),
                        at: t,
                    });
                }
                _ => {
                    if let Err((kind, _)) = enter(t, &mut stack, &mut color) {
                        let path: Vec<(usize, u32)> =
                            stack.iter().map(|f| (f.0, f.1[f.2 - 1].0)).collect();
                        return PolicyCheck::Counterexample(Counterexample {
                            kind,
                            prefix: path,
                            cycle: Vec::new(),
                            at: t,
                        });
                    }
                    reachable += 1;
                }
            }
        }
        max_run = max_run.max(depth[root]);
    }

    if max_run > n {
        // Unreachable for an acyclic closed loop; kept as the stated bound.
        return PolicyCheck::Counterexample(Counterexample {
            kind: CounterexampleKind::Lasso,
            prefix: Vec::new(),
            cycle: Vec::new(),
            at: 0,
        });
    }
    PolicyCheck::Certified(Certificate {
        start_states: starts,
        reachable_states: reachable,
        max_run_length: max_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maneuver::{CompositePrimitive, ManeuverAutomaton};
    use crate::scenario::{PrimitiveMode, Scenario};
    use crate::workspace::Ots;

    struct Fixture {
        ots: Ots,
        ma: ManeuverAutomaton,
        pa: ProductAutomaton,
    }

    fn fixture(extent: Vec<usize>, obstacles: Vec<Vec<usize>>, goal: Vec<usize>) -> Fixture {
        let p = extent.len();
        let s = Scenario::single_vehicle(extent, vec![1.0; p], vec![1.0; p], obstacles, [goal])
            .unwrap();
        let ots = Ots::build(&s).unwrap();
        let ma = ManeuverAutomaton::compose(p, PrimitiveMode::ND);
        let pa = ProductAutomaton::build(&ots, &ma, &s.costs, false).unwrap();
        Fixture { ots, ma, pa }
    }

    impl Fixture {
        fn state(&self, cell: &[usize], prim: &str) -> usize {
            let m = self
                .ma
                .index_of(&prim.parse::<CompositePrimitive>().unwrap())
                .unwrap();
            self.pa.state(self.ots.location_of(cell).unwrap(), m)
        }
    }

    #[test]
    fn corridor_values_by_hand() {
        let f = fixture(vec![3], vec![], vec![2]);
        let (v, policy) = solve(&f.pa).unwrap();
        assert_eq!(v.get(f.state(&[2], "H")), Value::Finite(0.0));
        assert_eq!(v.get(f.state(&[1], "F")), Value::Finite(1.0));
        assert_eq!(v.get(f.state(&[0], "F")), Value::Finite(2.0));
        assert_eq!(v.get(f.state(&[0], "H")), Value::Unreachable);
        assert_eq!(v.get(f.state(&[2], "F")), Value::Unreachable);
        assert_eq!(v.get(f.state(&[1], "B")), Value::Unreachable);
        // From b1 under F the policy keeps moving, then holds at the goal.
        assert_eq!(policy.choice(f.state(&[0], "F"), 0), Some(f.state(&[1], "F")));
        assert_eq!(policy.choice(f.state(&[1], "F"), 0), Some(f.state(&[2], "H")));
        assert_eq!(v, value_iteration(&f.pa));
        let loc0 = f.ots.location_of(&[0]).unwrap();
        assert_eq!(policy.dispatch(loc0), Some(1));
    }

    #[test]
    fn walled_in_location_only_holds() {
        // (1,1) has obstacles on every side except diagonals; F and B moves blocked.
        let obstacles = vec![vec![0, 1], vec![2, 1], vec![1, 0], vec![1, 2]];
        let f = fixture(vec![3, 3], obstacles, vec![2, 2]);
        let (v, _) = solve(&f.pa).unwrap();
        for m in 0..f.ma.primitive_count() {
            let q = f.pa.state(f.ots.location_of(&[1, 1]).unwrap(), m);
            if f.ma.primitive(m).is_all_hold() {
                assert!(f.pa.is_admissible(q));
            } else {
                assert!(!f.pa.is_admissible(q), "{}", f.ma.primitive(m));
            }
            assert_eq!(v.get(q), Value::Unreachable);
        }
    }

    #[test]
    fn grid4_every_location_has_finite_value() {
        let f = fixture(vec![4, 4], vec![vec![2, 2]], vec![3, 3]);
        let (v, policy) = solve(&f.pa).unwrap();
        for l in 0..f.ots.location_count() {
            assert!(policy.dispatch(l).is_some(), "location {l}");
        }
        assert_eq!(v, value_iteration(&f.pa));
        assert_eq!(policy, extract_policy(&f.pa, &v));
        assert_eq!(bellman_sweep(&f.pa, &v), v);
        assert!(check_policy(&f.pa, &policy).is_certified());
    }

    #[test]
    fn zero_edge_cost_is_rejected() {
        let s = Scenario::parse(
            r#"{"grid": {"extent": [3], "box_lengths": [1.0]},
                "vehicles": {"count": 1, "u_max": [1.0]},
                "goals": [[2]], "costs": {"edge_cost": 0.0}}"#,
        )
        .unwrap();
        let ots = Ots::build(&s).unwrap();
        let ma = ManeuverAutomaton::compose(1, PrimitiveMode::ND);
        let pa = ProductAutomaton::build(&ots, &ma, &s.costs, false).unwrap();
        assert!(matches!(solve(&pa), Err(Error::NonPositiveEdgeCost(_))));
    }

    #[test]
    fn non_edge_choice_is_invalid() {
        let f = fixture(vec![4], vec![], vec![3]);
        let (_, mut policy) = solve(&f.pa).unwrap();
        assert!(check_policy(&f.pa, &policy).is_certified());
        // F never switches to B on a crossing.
        policy.set_choice(f.state(&[1], "F"), 0, f.state(&[2], "B"));
        match check_policy(&f.pa, &policy) {
            PolicyCheck::Counterexample(c) => {
                assert_eq!(c.kind, CounterexampleKind::InvalidChoice)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unplanned_target_is_dead_end() {
        let f = fixture(vec![4], vec![], vec![3]);
        let (v, mut policy) = solve(&f.pa).unwrap();
        // b2/F may continue as b3/H, which can never leave b3.
        let dead = f.state(&[2], "H");
        assert_eq!(v.get(dead), Value::Unreachable);
        policy.set_choice(f.state(&[1], "F"), 0, dead);
        match check_policy(&f.pa, &policy) {
            PolicyCheck::Counterexample(c) => {
                assert_eq!(c.kind, CounterexampleKind::DeadEnd);
                assert_eq!(c.at, dead);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn genuine_lasso_is_reported() {
        let f = fixture(vec![3, 2], vec![], vec![2, 1]);
        let (_, mut policy) = solve(&f.pa).unwrap();
        // A square loop around the unit cell corner.
        let ring = [
            f.state(&[0, 0], "FH"),
            f.state(&[1, 0], "HF"),
            f.state(&[1, 1], "BH"),
            f.state(&[0, 1], "HB"),
        ];
        for i in 0..4 {
            policy.set_choice(ring[i], 0, ring[(i + 1) % 4]);
        }
        match check_policy(&f.pa, &policy) {
            PolicyCheck::Counterexample(c) => {
                assert_eq!(c.kind, CounterexampleKind::Lasso);
                let mut states: Vec<usize> = c.cycle.iter().map(|&(s, _)| s).collect();
                states.sort();
                let mut expected = ring.to_vec();
                expected.sort();
                assert_eq!(states, expected);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certificate_bound_on_empty_grid() {
        let f = fixture(vec![2, 2], vec![], vec![1, 1]);
        let (v, policy) = solve(&f.pa).unwrap();
        match check_policy(&f.pa, &policy) {
            PolicyCheck::Certified(c) => {
                assert!(c.max_run_length <= f.pa.state_count());
                assert!(c.max_run_length >= 1);
            }
            other => panic!("{other:?}"),
        }
        // Values strictly decrease along every closed-loop edge.
        let min_cost = f.pa.min_edge_cost().unwrap();
        for q in policy.planned_states() {
            let vq = v.get(q).finite().unwrap();
            for (_, t) in closed_loop_successors(&f.pa, &policy, q).unwrap() {
                let vt = v.get(t).finite().unwrap();
                assert!(vq - vt >= min_cost - 1e-12);
            }
        }
    }
}
