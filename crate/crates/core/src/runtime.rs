//! Closed-loop execution of a plan on double-integrator outputs.
//!
//! Each output follows `ÿ = u(ξ, ν) + w(t)` where `(ξ, ν)` is the local state
//! in its current box and `u` the engaged atomic law. Face crossings are
//! localized by bisection, turned into labels, and fed to the policy. A
//! commanded atomic whose invariant does not admit the current local state is
//! deferred: the output keeps holding until the invariant admits it.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{CellDisplay, Error, Result};
use crate::pipeline::Plan;
use crate::planner::Value;
use crate::primitives::{AtomicParams, AtomicPrimitive, AtomicTag, InvariantRegion};
use crate::workspace::{global_to_cell, FaceLabel, Sign};

/// Piecewise-constant acceleration offset on one output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub t_start: f64,
    pub t_end: f64,
    pub output: usize,
    /// m/s²
    pub accel: f64,
}

impl Disturbance {
    pub fn new(t_start: f64, t_end: f64, output: usize, accel: f64) -> Result<Disturbance> {
        if t_start.is_nan() || t_end.is_nan() || t_start >= t_end || !accel.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "disturbance needs t_start < t_end and finite acceleration, got {t_start}:{t_end}:{accel}"
            )));
        }
        Ok(Disturbance {
            t_start,
            t_end,
            output,
            accel,
        })
    }

    fn active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }
}

impl std::str::FromStr for Disturbance {
    type Err = Error;
    /// `t_start:t_end:output:accel`
    fn from_str(s: &str) -> Result<Disturbance> {
        let bad = || Error::InvalidArgument(format!("bad disturbance `{s}` (expected t0:t1:output:w)"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let t0 = parts[0].trim().parse().map_err(|_| bad())?;
        let t1 = parts[1].trim().parse().map_err(|_| bad())?;
        let out = parts[2].trim().parse().map_err(|_| bad())?;
        let w = parts[3].trim().parse().map_err(|_| bad())?;
        Disturbance::new(t0, t1, out, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engagement {
    Engaged,
    /// Holding until the invariant of the commanded atomic admits the state.
    Deferred(AtomicTag),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub t: f64,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub cell: Vec<usize>,
    pub location: usize,
    /// Primitive index in the plan's maneuver automaton.
    pub primitive: usize,
    pub engagement: Vec<Engagement>,
}

/// Initial condition. Without a primitive the runtime dispatches the best one
/// whose invariants admit the state.
#[derive(Debug, Clone, PartialEq)]
pub struct Start {
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub primitive: Option<usize>,
}

impl Start {
    pub fn at_rest(y: Vec<f64>) -> Start {
        let v = vec![0.0; y.len()];
        Start {
            y,
            v,
            primitive: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub cell: Vec<usize>,
    pub primitive: String,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Realized face is not an outcome of the running primitive.
    Abstraction,
    /// Entered a joint box labelled as obstacle or collision.
    Obstacle,
    /// Left the gridded workspace.
    Workspace,
}

impl ViolationKind {
    pub fn is_hard(self) -> bool {
        !matches!(self, ViolationKind::Abstraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
    pub cell: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub label: String,
    pub box_from: Vec<usize>,
    pub box_to: Vec<usize>,
    pub prim_from: String,
    pub prim_to: String,
    pub deferred: Vec<bool>,
    pub violation: Option<ViolationKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Reached,
    NotReached,
    SafetyViolation,
    NumericFailure,
    Stuck,
}

impl RunOutcome {
    pub fn exit_code(self) -> i32 {
        match self {
            RunOutcome::Reached => 0,
            RunOutcome::NotReached => 2,
            RunOutcome::SafetyViolation => 3,
            RunOutcome::NumericFailure | RunOutcome::Stuck => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub outcome: RunOutcome,
    pub reached: bool,
    pub t_reach: Option<f64>,
    pub t_end: f64,
    pub t_max: f64,
    pub transitions: usize,
    pub recoveries: usize,
    pub violations: Vec<Violation>,
    /// Diagnostic for stuck or numeric failures.
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub p: usize,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub summary: RunSummary,
}

impl TrajectoryLog {
    /// Sequence of distinct joint boxes visited.
    pub fn box_sequence(&self) -> Vec<Vec<usize>> {
        let mut seq: Vec<Vec<usize>> = Vec::new();
        for s in &self.samples {
            if seq.last() != Some(&s.cell) {
                seq.push(s.cell.clone());
            }
        }
        seq
    }

    pub fn write_trajectory(&self, out: &mut impl Write) -> io::Result<()> {
        let p = self.p;
        let mut header = String::from("t");
        for prefix in ["y", "v", "box"] {
            for i in 1..=p {
                write!(header, ",{prefix}_{i}").unwrap();
            }
        }
        header.push_str(",primitive");
        for i in 1..=p {
            write!(header, ",u_{i}").unwrap();
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for s in &self.samples {
            line.clear();
            line.push_str(&sig9(s.t));
            for x in s.y.iter().chain(&s.v) {
                line.push(',');
                line.push_str(&sig9(*x));
            }
            for c in &s.cell {
                write!(line, ",{c}").unwrap();
            }
            write!(line, ",{}", s.primitive).unwrap();
            for x in &s.u {
                line.push(',');
                line.push_str(&sig9(*x));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn write_events(&self, out: &mut impl Write) -> io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut *out, e)?;
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn trajectory_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_trajectory(&mut buf).expect("write to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn events_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_events(&mut buf).expect("write to memory");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// Nine significant digits, plain decimal for moderate magnitudes.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        return sci;
    }
    let decimals = (8 - exp).max(0) as usize;
    let rounded: f64 = format!("{mantissa}e{exp}").parse().expect("valid float");
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// One classical Runge-Kutta step of a single output under a fixed atomic law
/// with constant acceleration offset `w`.
pub fn rk4_step(law: &AtomicPrimitive, clip: Option<f64>, x: (f64, f64), w: f64, dt: f64) -> (f64, f64) {
    let f = |xi: f64, nu: f64| -> (f64, f64) { (nu, saturate(law.control(xi, nu), clip) + w) };
    let k1 = f(x.0, x.1);
    let k2 = f(x.0 + 0.5 * dt * k1.0, x.1 + 0.5 * dt * k1.1);
    let k3 = f(x.0 + 0.5 * dt * k2.0, x.1 + 0.5 * dt * k2.1);
    let k4 = f(x.0 + dt * k3.0, x.1 + dt * k3.1);
    (
        x.0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        x.1 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

fn saturate(u: f64, clip: Option<f64>) -> f64 {
    match clip {
        Some(c) => u.clamp(-c, c),
        None => u,
    }
}

struct Output {
    d: f64,
    params: AtomicParams,
    laws: [AtomicPrimitive; 3],
    regions: [InvariantRegion; 3],
    clip: Option<f64>,
}

/// Executes a plan. Borrowed data is read-only, so many runs may share it.
pub struct Runtime<'a> {
    plan: &'a Plan,
    outputs: Vec<Output>,
    disturbances: Vec<Disturbance>,
    breakpoints: Vec<f64>,
}

const TAGS: [AtomicTag; 3] = [AtomicTag::Hold, AtomicTag::Forward, AtomicTag::Backward];

impl<'a> Runtime<'a> {
    pub fn new(plan: &'a Plan, disturbances: &[Disturbance]) -> Result<Runtime<'a>> {
        let s = &plan.scenario;
        let p = s.p();
        for d in disturbances {
            if d.output >= p {
                return Err(Error::InvalidArgument(format!(
                    "disturbance output {} out of range (p = {p})",
                    d.output
                )));
            }
        }
        let outputs = (0..p)
            .map(|i| {
                let params = s.atomic_params(i);
                Output {
                    d: params.d,
                    params,
                    laws: TAGS.map(|t| AtomicPrimitive::new(t, &params)),
                    regions: TAGS.map(|t| InvariantRegion::new(t, &params)),
                    clip: s.u_clip.map(|c| c * params.u_star),
                }
            })
            .collect();
        let mut breakpoints: Vec<f64> = disturbances
            .iter()
            .flat_map(|d| [d.t_start, d.t_end])
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(Runtime {
            plan,
            outputs,
            disturbances: disturbances.to_vec(),
            breakpoints,
        })
    }

    pub fn plan(&self) -> &Plan {
        self.plan
    }

    fn p(&self) -> usize {
        self.outputs.len()
    }

    fn local(&self, s: &HybridState, i: usize) -> (f64, f64) {
        (s.y[i] - s.cell[i] as f64 * self.outputs[i].d, s.v[i])
    }

    fn tag(&self, primitive: usize, i: usize) -> AtomicTag {
        self.plan.ma.primitive(primitive).tags()[i]
    }

    /// Atomic law actually applied to output `i`.
    pub fn effective_tag(&self, s: &HybridState, i: usize) -> AtomicTag {
        match s.engagement[i] {
            Engagement::Engaged => self.tag(s.primitive, i),
            Engagement::Deferred(_) => AtomicTag::Hold,
        }
    }

    fn admits(&self, i: usize, tag: AtomicTag, x: (f64, f64)) -> bool {
        let eps = self.plan.scenario.numerics.eps_inv;
        self.outputs[i].regions[tag.code() as usize].contains(x, eps)
    }

    fn disturbance(&self, i: usize, t: f64) -> f64 {
        self.disturbances
            .iter()
            .filter(|d| d.output == i && d.active(t))
            .map(|d| d.accel)
            .sum()
    }

    /// Commanded (saturated) accelerations, without disturbance.
    pub fn control(&self, s: &HybridState) -> Vec<f64> {
        (0..self.p())
            .map(|i| {
                let o = &self.outputs[i];
                let (xi, nu) = self.local(s, i);
                let law = &o.laws[self.effective_tag(s, i).code() as usize];
                saturate(law.control(xi, nu), o.clip)
            })
            .collect()
    }

    /// Advances every output by `dt` under its applied law. The disturbance
    /// is taken as constant over the step, so steps must not straddle a
    /// disturbance breakpoint.
    pub fn integrate_step(&self, s: &HybridState, dt: f64) -> Result<HybridState> {
        let mut next = s.clone();
        let tm = s.t + 0.5 * dt;
        for i in 0..self.p() {
            let o = &self.outputs[i];
            let law = &o.laws[self.effective_tag(s, i).code() as usize];
            let x = self.local(s, i);
            let (xi, nu) = rk4_step(law, o.clip, x, self.disturbance(i, tm), dt);
            if !(xi.is_finite() && nu.is_finite()) {
                return Err(Error::NumericFailure { t: s.t + dt });
            }
            next.y[i] = s.cell[i] as f64 * o.d + xi;
            next.v[i] = nu;
        }
        next.t = s.t + dt;
        Ok(next)
    }

    /// Per-output crossing signs of `next` relative to its current box, or
    /// `None` when every output is still inside.
    pub fn detect_event(&self, next: &HybridState) -> Option<FaceLabel> {
        let signs: Vec<Sign> = (0..self.p())
            .map(|i| {
                let (xi, _) = self.local(next, i);
                if xi > self.outputs[i].d {
                    Sign::Plus
                } else if xi < 0.0 {
                    Sign::Minus
                } else {
                    Sign::Zero
                }
            })
            .collect();
        let label = FaceLabel(signs);
        (!label.is_interior()).then_some(label)
    }

    /// Shrinks a step that produced a crossing until the crossing time is
    /// known to position tolerance. Returns the state just past the face.
    fn refine(&self, s: &HybridState, dt: f64, crossed: HybridState) -> Result<HybridState> {
        let numerics = &self.plan.scenario.numerics;
        let (mut lo, mut hi) = (0.0, dt);
        let mut best = crossed;
        for _ in 0..numerics.bisection_max_iter {
            let speed = best
                .v
                .iter()
                .chain(&s.v)
                .fold(0.0f64, |m, v| m.max(v.abs()));
            if (hi - lo) * speed <= numerics.eps_x {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let st = self.integrate_step(s, mid)?;
            if self.detect_event(&st).is_some() {
                hi = mid;
                best = st;
            } else {
                lo = mid;
            }
        }
        Ok(best)
    }

    /// Chooses the cheapest finite-value primitive at `location` for local
    /// states `x`. Primitives whose invariants admit the state, directly or
    /// by deferring through Hold, come first; otherwise the cheapest finite
    /// one is deferred wholesale.
    pub fn recover(&self, location: usize, x: &[(f64, f64)]) -> Option<(usize, Vec<Engagement>)> {
        let plan = self.plan;
        let mut admitted: Option<(f64, usize)> = None;
        let mut fallback: Option<(f64, usize)> = None;
        for m in 0..plan.ma.primitive_count() {
            let Value::Finite(v) = plan.value(location, m) else {
                continue;
            };
            if fallback.is_none_or(|(b, _)| v < b) {
                fallback = Some((v, m));
            }
            let ok = (0..self.p()).all(|i| {
                self.admits(i, self.tag(m, i), x[i]) || self.admits(i, AtomicTag::Hold, x[i])
            });
            if ok && admitted.is_none_or(|(b, _)| v < b) {
                admitted = Some((v, m));
            }
        }
        let (_, m) = admitted.or(fallback)?;
        Some((m, self.engagement(m, x)))
    }

    fn engagement(&self, m: usize, x: &[(f64, f64)]) -> Vec<Engagement> {
        (0..self.p())
            .map(|i| {
                let tag = self.tag(m, i);
                if tag == AtomicTag::Hold || self.admits(i, tag, x[i]) {
                    Engagement::Engaged
                } else {
                    Engagement::Deferred(tag)
                }
            })
            .collect()
    }

    fn locals(&self, s: &HybridState) -> Vec<(f64, f64)> {
        (0..self.p()).map(|i| self.local(s, i)).collect()
    }

    /// Engages deferred outputs whose target invariant now admits them.
    fn update_engagement(&self, s: &mut HybridState) {
        for i in 0..self.p() {
            if let Engagement::Deferred(tag) = s.engagement[i] {
                if self.admits(i, tag, self.local(s, i)) {
                    s.engagement[i] = Engagement::Engaged;
                }
            }
        }
    }

    /// Builds the initial hybrid state.
    pub fn initial_state(&self, start: &Start) -> Result<HybridState> {
        let plan = self.plan;
        let p = self.p();
        if start.y.len() != p || start.v.len() != p {
            return Err(Error::InvalidArgument(format!("start state must have {p} positions and velocities")));
        }
        let (cell, _) = global_to_cell(&plan.scenario, &start.y)?;
        let location = plan.ots.location_of(&cell).ok_or_else(|| {
            Error::InvalidArgument(format!("start box ({cell}) is not free"))
        })?;
        let mut s = HybridState {
            t: 0.0,
            y: start.y.clone(),
            v: start.v.clone(),
            cell: cell.0.clone(),
            location,
            primitive: 0,
            engagement: vec![Engagement::Engaged; p],
        };
        let x = self.locals(&s);
        let (m, engagement) = match start.primitive {
            Some(m) => {
                if !plan.value(location, m).is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "primitive {} has no finite value at box ({cell})",
                        plan.ma.primitive(m)
                    )));
                }
                (m, self.engagement(m, &x))
            }
            None => self.recover(location, &x).ok_or_else(|| Error::Stuck {
                t: 0.0,
                cell: CellDisplay(cell.0.clone()),
            })?,
        };
        s.primitive = m;
        s.engagement = engagement;
        self.settle_final(&mut s);
        Ok(s)
    }

    /// In a final state any moving primitive is replaced by all-Hold.
    fn settle_final(&self, s: &mut HybridState) {
        let plan = self.plan;
        let q = plan.pa.state(s.location, s.primitive);
        if plan.pa.is_final(q) && !plan.ma.primitive(s.primitive).is_all_hold() {
            s.primitive = plan.ma.all_hold_index();
            s.engagement = vec![Engagement::Engaged; self.p()];
        }
    }

    /// Goal box, all-Hold engaged, and every output settled near the center.
    pub fn is_settled(&self, s: &HybridState) -> bool {
        let plan = self.plan;
        if !plan.ots.is_goal(s.location) || !plan.ma.primitive(s.primitive).is_all_hold() {
            return false;
        }
        let rho = plan.scenario.numerics.rho;
        (0..self.p()).all(|i| {
            let (xi, nu) = self.local(s, i);
            let o = &self.outputs[i];
            s.engagement[i] == Engagement::Engaged
                && (xi - 0.5 * o.d).abs() <= rho
                && nu.abs() <= rho / o.params.tau()
        })
    }

    /// Default horizon: 20 time constants per unit of start value.
    pub fn default_horizon(&self, s: &HybridState) -> f64 {
        let tau = self
            .outputs
            .iter()
            .map(|o| o.params.tau())
            .fold(0.0, f64::max);
        let v = self
            .plan
            .value(s.location, s.primitive)
            .finite()
            .unwrap_or(1.0)
            .max(1.0);
        20.0 * v * tau
    }

    fn sample(&self, s: &HybridState) -> Sample {
        Sample {
            t: s.t,
            y: s.y.clone(),
            v: s.v.clone(),
            cell: s.cell.clone(),
            primitive: self.plan.ma.primitive(s.primitive).to_string(),
            u: self.control(s),
        }
    }

    fn deferred_flags(s: &HybridState) -> Vec<bool> {
        s.engagement
            .iter()
            .map(|e| matches!(e, Engagement::Deferred(_)))
            .collect()
    }

    /// Applies a realized face crossing: moves the box, then either follows
    /// the policy or re-localizes.
    pub fn transition(&self, s: &mut HybridState, label: &FaceLabel) -> Transition {
        let plan = self.plan;
        let p = self.p();
        let scenario = &plan.scenario;
        let mut cell = s.cell.clone();
        for i in 0..p {
            let c = cell[i] as isize + label.0[i].offset();
            if c < 0 || c as usize >= scenario.extent(i) {
                return Transition::Hard(ViolationKind::Workspace, cell);
            }
            cell[i] = c as usize;
        }
        let Some(location) = plan.ots.location_of(&cell) else {
            return Transition::Hard(ViolationKind::Obstacle, cell);
        };
        let q = plan.pa.state(s.location, s.primitive);
        let slot = plan.ma.outcome_slot(s.primitive, label.code());
        s.cell = cell;
        s.location = location;
        let x = self.locals(s);
        let chosen = slot
            .and_then(|k| plan.policy.choice(q, k))
            .filter(|&target| plan.pa.location_of(target) == location);
        let result = match chosen {
            Some(target) => {
                let m = plan.pa.primitive_of(target);
                s.primitive = m;
                s.engagement = self.engagement(m, &x);
                Transition::Followed
            }
            None => match self.recover(location, &x) {
                Some((m, engagement)) => {
                    s.primitive = m;
                    s.engagement = engagement;
                    if slot.is_none() {
                        Transition::Recovered(Some(ViolationKind::Abstraction))
                    } else {
                        Transition::Recovered(None)
                    }
                }
                None => Transition::Stuck,
            },
        };
        self.settle_final(s);
        result
    }

    /// Runs the closed loop until the goal is held, the horizon passes, or a
    /// failure occurs. `t_max` overrides the scenario and default horizons.
    pub fn run(&self, start: &Start, t_max: Option<f64>) -> Result<TrajectoryLog> {
        let plan = self.plan;
        let numerics = plan.scenario.numerics;
        let mut s = self.initial_state(start)?;
        let t_max = t_max
            .or(numerics.t_max)
            .unwrap_or_else(|| self.default_horizon(&s));
        let mut samples = vec![self.sample(&s)];
        let mut events = Vec::new();
        let mut violations = Vec::new();
        let mut transitions = 0;
        let mut recoveries = 0;
        let mut message = None;

        let outcome = loop {
            if self.is_settled(&s) {
                break RunOutcome::Reached;
            }
            if s.t >= t_max {
                break RunOutcome::NotReached;
            }
            let mut dt = numerics.h.min(t_max - s.t);
            if let Some(&b) = self.breakpoints.iter().find(|&&b| b > s.t) {
                dt = dt.min(b - s.t);
            }
            let next = match self.integrate_step(&s, dt) {
                Ok(n) => n,
                Err(e) => {
                    message = Some(e.to_string());
                    break RunOutcome::NumericFailure;
                }
            };
            if self.detect_event(&next).is_none() {
                s = next;
                self.update_engagement(&mut s);
                samples.push(self.sample(&s));
                continue;
            }
            let crossed = match self.refine(&s, dt, next) {
                Ok(c) => c,
                Err(e) => {
                    message = Some(e.to_string());
                    break RunOutcome::NumericFailure;
                }
            };
            let label = self.detect_event(&crossed).expect("refined state is past a face");
            let before = crossed.clone();
            s = crossed;
            transitions += 1;
            let result = self.transition(&mut s, &label);
            let violation = match &result {
                Transition::Hard(kind, _) => Some(*kind),
                Transition::Recovered(v) => *v,
                _ => None,
            };
            let box_to = match &result {
                Transition::Hard(_, cell) => cell.clone(),
                _ => s.cell.clone(),
            };
            events.push(Event {
                t: s.t,
                label: label.to_string(),
                box_from: before.cell.clone(),
                box_to: box_to.clone(),
                prim_from: plan.ma.primitive(before.primitive).to_string(),
                prim_to: plan.ma.primitive(s.primitive).to_string(),
                deferred: Self::deferred_flags(&s),
                violation,
            });
            if let Some(kind) = violation {
                violations.push(Violation {
                    t: s.t,
                    kind,
                    cell: box_to.clone(),
                });
            }
            match result {
                Transition::Hard(..) => {
                    samples.push(self.sample(&before));
                    break RunOutcome::SafetyViolation;
                }
                Transition::Stuck => {
                    message = Some(
                        Error::Stuck {
                            t: s.t,
                            cell: CellDisplay(s.cell.clone()),
                        }
                        .to_string(),
                    );
                    samples.push(self.sample(&before));
                    break RunOutcome::Stuck;
                }
                Transition::Recovered(_) => recoveries += 1,
                Transition::Followed => {}
            }
            self.update_engagement(&mut s);
            samples.push(self.sample(&s));
        };

        let reached = outcome == RunOutcome::Reached;
        Ok(TrajectoryLog {
            p: self.p(),
            samples,
            events,
            summary: RunSummary {
                outcome,
                reached,
                t_reach: reached.then_some(s.t),
                t_end: s.t,
                t_max,
                transitions,
                recoveries,
                violations,
                message,
            },
        })
    }

    /// Draws a start state: a location with finite dispatch, a finite-value
    /// primitive there, and a local state inside each atomic invariant.
    pub fn random_start(&self, rng: &mut impl rand::Rng) -> Option<Start> {
        let plan = self.plan;
        let locations: Vec<usize> = (0..plan.ots.location_count())
            .filter(|&l| plan.policy.dispatch(l).is_some())
            .collect();
        if locations.is_empty() {
            return None;
        }
        let l = locations[rng.gen_range(0..locations.len())];
        let prims: Vec<usize> = (0..plan.ma.primitive_count())
            .filter(|&m| plan.value(l, m).is_finite())
            .collect();
        let m = prims[rng.gen_range(0..prims.len())];
        let cell = plan.ots.cell(l);
        let mut y = Vec::with_capacity(self.p());
        let mut v = Vec::with_capacity(self.p());
        for i in 0..self.p() {
            let o = &self.outputs[i];
            let tag = self.tag(m, i);
            let (xi, nu) = sample_invariant(&o.regions[tag.code() as usize], &o.params, rng);
            y.push(cell[i] as f64 * o.d + xi);
            v.push(nu);
        }
        Some(Start {
            y,
            v,
            primitive: Some(m),
        })
    }
}

/// Uniform sample from an invariant region by rejection from its bounding box.
pub fn sample_invariant(
    region: &InvariantRegion,
    params: &AtomicParams,
    rng: &mut impl rand::Rng,
) -> (f64, f64) {
    let (lo, hi) = match region.tag {
        AtomicTag::Forward => (0.0, params.v_star),
        AtomicTag::Backward => (-params.v_star, 0.0),
        AtomicTag::Hold => (-params.v_star, params.v_star),
    };
    loop {
        let x = (rng.gen_range(0.0..=params.d), rng.gen_range(lo..=hi));
        if region.contains(x, 0.0) {
            return x;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transition {
    Followed,
    /// Re-localized, with the abstraction violation that forced it if any.
    Recovered(Option<ViolationKind>),
    Hard(ViolationKind, Vec<usize>),
    Stuck,
}
