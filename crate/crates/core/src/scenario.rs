//! Scenario documents: parsing, validation and the joint multi-vehicle
//! labeling of grid cells.
//!
//! A scenario describes a gridded workspace shared by `N` vehicles. Each
//! vehicle owns `outputs_per_vehicle` position outputs, so the joint output
//! space has `p = outputs_per_vehicle * N` axes. A joint cell concatenates the
//! per-vehicle box indices in vehicle order.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::maneuver::AtomicEdgeTable;
use crate::primitives::AtomicParams;

/// Upper bound on the number of joint cells a scenario may describe.
pub const MAX_JOINT_CELLS: usize = 1 << 24;
/// Upper bound on the total number of outputs.
pub const MAX_OUTPUTS: usize = 10;

/// Per-output box index vector of length `p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointCell(pub Vec<usize>);

impl Deref for JointCell {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for JointCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PrimitiveMode {
    /// Keep every composed primitive, including ones with several moving outputs.
    #[default]
    ND,
    /// Keep only primitives with at most one moving output.
    D,
}

impl fmt::Display for PrimitiveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimitiveMode::ND => write!(f, "ND"),
            PrimitiveMode::D => write!(f, "D"),
        }
    }
}

impl std::str::FromStr for PrimitiveMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ND" | "nd" => Ok(PrimitiveMode::ND),
            "D" | "d" => Ok(PrimitiveMode::D),
            other => Err(Error::InvalidArgument(format!(
                "unknown primitive mode `{other}` (expected ND or D)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CostVariant {
    /// Every product edge costs `edge_cost`.
    #[default]
    Uniform,
    /// An edge costs the number of moving outputs of its source primitive.
    MovingCoords,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Costs {
    #[serde(default = "one")]
    pub edge_cost: f64,
    #[serde(default)]
    pub terminal_cost: f64,
    #[serde(default)]
    pub variant: CostVariant,
}

impl Default for Costs {
    fn default() -> Self {
        Costs {
            edge_cost: 1.0,
            terminal_cost: 0.0,
            variant: CostVariant::Uniform,
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Integration and event-handling settings. Missing entries are derived from
/// the box sizes and actuation limits when the scenario is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// Integration step (s).
    pub h: f64,
    /// Position tolerance for crossing localization (m).
    pub eps_x: f64,
    /// Simulation horizon (s). `None` derives it from the start state's value.
    pub t_max: Option<f64>,
    /// Radius around goal-box centers that counts as settled (m).
    pub rho: f64,
    /// Invariant membership tolerance in normalized units.
    pub eps_inv: f64,
    pub bisection_max_iter: u32,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumericsDoc {
    h: Option<f64>,
    eps_x: Option<f64>,
    t_max: Option<f64>,
    rho: Option<f64>,
    eps_inv: Option<f64>,
    bisection_max_iter: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    extent: Vec<usize>,
    box_lengths: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehiclesDoc {
    count: usize,
    u_max: Vec<f64>,
    #[serde(default)]
    collision_margin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u_clip: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GoalsDoc {
    /// One goal set shared by every vehicle.
    Shared(Vec<Vec<usize>>),
    Detailed {
        per_vehicle: Vec<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        joint: Option<Vec<Vec<usize>>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    grid: GridDoc,
    vehicles: VehiclesDoc,
    #[serde(default)]
    obstacles: Vec<Vec<usize>>,
    goals: GoalsDoc,
    #[serde(default)]
    costs: Costs,
    #[serde(default)]
    numerics: NumericsDoc,
    #[serde(default)]
    primitive_mode: PrimitiveMode,
    #[serde(default)]
    final_any_primitive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atomic_edges: Option<Vec<String>>,
}

/// Whether a joint cell can be occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellLabel {
    Free,
    Obstacle,
}

/// Validated, normalized scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub outputs_per_vehicle: usize,
    pub vehicles: usize,
    /// Box count along each per-vehicle axis.
    pub grid_extent: Vec<usize>,
    /// Box side length along each per-vehicle axis (m).
    pub box_lengths: Vec<f64>,
    /// Maximum nominal acceleration for every joint output (m/s²), length `p`.
    pub u_max: Vec<f64>,
    /// Physical obstacle cells in per-vehicle coordinates.
    pub obstacles: BTreeSet<Vec<usize>>,
    /// Goal cells of each vehicle.
    pub goals: Vec<BTreeSet<Vec<usize>>>,
    /// Explicit joint goals; overrides the product of `goals` when present.
    pub joint_goals: Option<BTreeSet<Vec<usize>>>,
    /// Two vehicles conflict when the Chebyshev distance of their cells is at most this.
    pub collision_margin: usize,
    /// Optional symmetric acceleration clip, as a multiple of each output's `u_max`.
    pub u_clip: Option<f64>,
    pub costs: Costs,
    pub numerics: Numerics,
    pub primitive_mode: PrimitiveMode,
    /// Accept any primitive on a goal box as final, not only all-Hold.
    pub final_any_primitive: bool,
    pub atomic_edges: Option<Vec<String>>,
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Scenario> {
        let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::syntax(&e))?;
        Scenario::from_doc(doc)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        Scenario::parse(&text)
    }

    /// Single-vehicle scenario on a grid with unit costs and default numerics.
    pub fn single_vehicle(
        extent: Vec<usize>,
        box_lengths: Vec<f64>,
        u_max: Vec<f64>,
        obstacles: impl IntoIterator<Item = Vec<usize>>,
        goals: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Scenario> {
        let doc = ScenarioDoc {
            grid: GridDoc {
                extent,
                box_lengths,
            },
            vehicles: VehiclesDoc {
                count: 1,
                u_max,
                collision_margin: 0,
                u_clip: None,
            },
            obstacles: obstacles.into_iter().collect(),
            goals: GoalsDoc::Shared(goals.into_iter().collect()),
            costs: Costs::default(),
            numerics: NumericsDoc::default(),
            primitive_mode: PrimitiveMode::ND,
            final_any_primitive: false,
            atomic_edges: None,
        };
        Scenario::from_doc(doc)
    }

    fn from_doc(doc: ScenarioDoc) -> Result<Scenario> {
        let sem = |msg: String| Err(Error::Semantic(msg));
        let opv = doc.grid.extent.len();
        if opv == 0 {
            return sem("grid.extent must name at least one axis".into());
        }
        if doc.grid.box_lengths.len() != opv {
            return sem(format!(
                "grid.box_lengths has {} entries, grid.extent has {opv}",
                doc.grid.box_lengths.len()
            ));
        }
        if let Some(i) = doc.grid.extent.iter().position(|&e| e == 0) {
            return sem(format!("grid.extent[{i}] must be positive"));
        }
        if let Some(i) = doc
            .grid
            .box_lengths
            .iter()
            .position(|&d| !(d.is_finite() && d > 0.0))
        {
            return sem(format!("grid.box_lengths[{i}] must be positive and finite"));
        }
        let n = doc.vehicles.count;
        if n == 0 {
            return sem("vehicles.count must be positive".into());
        }
        let p = opv * n;
        if p > MAX_OUTPUTS {
            return sem(format!("{p} outputs exceed the supported maximum of {MAX_OUTPUTS}"));
        }
        let per_vehicle_cells: usize = doc.grid.extent.iter().product();
        let joint_cells = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(per_vehicle_cells));
        match joint_cells {
            Some(c) if c <= MAX_JOINT_CELLS => {}
            _ => return sem("joint workspace is too large".into()),
        }

        let u_max = if doc.vehicles.u_max.len() == opv {
            (0..p).map(|i| doc.vehicles.u_max[i % opv]).collect::<Vec<_>>()
        } else if doc.vehicles.u_max.len() == p {
            doc.vehicles.u_max.clone()
        } else {
            return sem(format!(
                "vehicles.u_max must have {opv} (per axis) or {p} (per output) entries"
            ));
        };
        if let Some(i) = u_max.iter().position(|&u| !(u.is_finite() && u > 0.0)) {
            return sem(format!("u_max for output {i} must be positive and finite"));
        }
        if let Some(c) = doc.vehicles.u_clip {
            if !(c.is_finite() && c > 0.0) {
                return sem("vehicles.u_clip must be positive".into());
            }
        }

        let check_cell = |what: &str, cell: &[usize]| -> Result<()> {
            if cell.len() != opv {
                return Err(Error::Semantic(format!(
                    "{what} cell {cell:?} must have {opv} indices"
                )));
            }
            for (axis, (&c, &e)) in cell.iter().zip(&doc.grid.extent).enumerate() {
                if c >= e {
                    return Err(Error::Semantic(format!(
                        "{what} cell {cell:?} is outside the grid on axis {axis}"
                    )));
                }
            }
            Ok(())
        };

        let mut obstacles = BTreeSet::new();
        for cell in &doc.obstacles {
            check_cell("obstacle", cell)?;
            obstacles.insert(cell.clone());
        }

        let (per_vehicle, joint) = match doc.goals {
            GoalsDoc::Shared(cells) => (vec![cells; n], None),
            GoalsDoc::Detailed { per_vehicle, joint } => (per_vehicle, joint),
        };
        if per_vehicle.len() != n {
            return sem(format!(
                "goals.per_vehicle has {} entries for {n} vehicles",
                per_vehicle.len()
            ));
        }
        let mut goals = Vec::with_capacity(n);
        for (v, cells) in per_vehicle.iter().enumerate() {
            if cells.is_empty() && joint.is_none() {
                return sem(format!("goal set of vehicle {v} is empty"));
            }
            let mut set = BTreeSet::new();
            for cell in cells {
                check_cell("goal", cell)?;
                if obstacles.contains(cell) {
                    return sem(format!("goal cell {cell:?} is an obstacle"));
                }
                set.insert(cell.clone());
            }
            goals.push(set);
        }
        let joint_goals = match joint {
            None => None,
            Some(cells) => {
                if cells.is_empty() {
                    return sem("goals.joint is empty".into());
                }
                let mut set = BTreeSet::new();
                for cell in cells {
                    if cell.len() != p {
                        return sem(format!("joint goal {cell:?} must have {p} indices"));
                    }
                    for v in 0..n {
                        let sub = &cell[v * opv..(v + 1) * opv];
                        check_cell("joint goal", sub)?;
                        if obstacles.contains(sub) {
                            return sem(format!("joint goal {cell:?} places a vehicle on an obstacle"));
                        }
                    }
                    set.insert(cell);
                }
                Some(set)
            }
        };

        let costs = doc.costs;
        if !(costs.edge_cost.is_finite() && costs.edge_cost >= 0.0) {
            return sem("costs.edge_cost must be nonnegative".into());
        }
        if !(costs.terminal_cost.is_finite() && costs.terminal_cost >= 0.0) {
            return sem("costs.terminal_cost must be nonnegative".into());
        }

        if let Some(specs) = &doc.atomic_edges {
            AtomicEdgeTable::from_specs(specs)?;
        }

        let d_min = doc.grid.box_lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let u_top = u_max.iter().cloned().fold(0.0, f64::max);
        let tau = (d_min / u_top).sqrt();
        let nd = &doc.numerics;
        let numerics = Numerics {
            h: nd.h.unwrap_or(0.005 * tau),
            eps_x: nd.eps_x.unwrap_or(1e-6 * d_min),
            t_max: nd.t_max,
            rho: nd.rho.unwrap_or(0.05 * d_min),
            eps_inv: nd.eps_inv.unwrap_or(1e-9),
            bisection_max_iter: nd.bisection_max_iter.unwrap_or(60),
        };
        for (name, val) in [
            ("h", Some(numerics.h)),
            ("eps_x", Some(numerics.eps_x)),
            ("t_max", numerics.t_max),
            ("rho", Some(numerics.rho)),
        ] {
            if let Some(v) = val {
                if !(v.is_finite() && v > 0.0) {
                    return sem(format!("numerics.{name} must be positive"));
                }
            }
        }
        if !(numerics.eps_inv.is_finite() && numerics.eps_inv >= 0.0) {
            return sem("numerics.eps_inv must be nonnegative".into());
        }
        if numerics.bisection_max_iter == 0 {
            return sem("numerics.bisection_max_iter must be positive".into());
        }

        Ok(Scenario {
            outputs_per_vehicle: opv,
            vehicles: n,
            grid_extent: doc.grid.extent,
            box_lengths: doc.grid.box_lengths,
            u_max,
            obstacles,
            goals,
            joint_goals,
            collision_margin: doc.vehicles.collision_margin,
            u_clip: doc.vehicles.u_clip,
            costs,
            numerics,
            primitive_mode: doc.primitive_mode,
            final_any_primitive: doc.final_any_primitive,
            atomic_edges: doc.atomic_edges,
        })
    }

    fn to_doc(&self) -> ScenarioDoc {
        let opv = self.outputs_per_vehicle;
        let per_axis = (0..self.p()).all(|i| self.u_max[i] == self.u_max[i % opv]);
        ScenarioDoc {
            grid: GridDoc {
                extent: self.grid_extent.clone(),
                box_lengths: self.box_lengths.clone(),
            },
            vehicles: VehiclesDoc {
                count: self.vehicles,
                u_max: if per_axis {
                    self.u_max[..opv].to_vec()
                } else {
                    self.u_max.clone()
                },
                collision_margin: self.collision_margin,
                u_clip: self.u_clip,
            },
            obstacles: self.obstacles.iter().cloned().collect(),
            goals: GoalsDoc::Detailed {
                per_vehicle: self
                    .goals
                    .iter()
                    .map(|g| g.iter().cloned().collect())
                    .collect(),
                joint: self
                    .joint_goals
                    .as_ref()
                    .map(|g| g.iter().cloned().collect()),
            },
            costs: self.costs,
            numerics: NumericsDoc {
                h: Some(self.numerics.h),
                eps_x: Some(self.numerics.eps_x),
                t_max: self.numerics.t_max,
                rho: Some(self.numerics.rho),
                eps_inv: Some(self.numerics.eps_inv),
                bisection_max_iter: Some(self.numerics.bisection_max_iter),
            },
            primitive_mode: self.primitive_mode,
            final_any_primitive: self.final_any_primitive,
            atomic_edges: self.atomic_edges.clone(),
        }
    }

    /// Serializes the normalized scenario with every default spelled out.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("scenario serializes")
    }

    /// Hex SHA-256 of the canonical compact encoding.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&self.to_doc()).expect("scenario serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Total number of outputs.
    pub fn p(&self) -> usize {
        self.outputs_per_vehicle * self.vehicles
    }

    /// Vehicle owning joint output `i`.
    pub fn vehicle_of(&self, output: usize) -> usize {
        output / self.outputs_per_vehicle
    }

    pub fn box_length(&self, output: usize) -> f64 {
        self.box_lengths[output % self.outputs_per_vehicle]
    }

    pub fn extent(&self, output: usize) -> usize {
        self.grid_extent[output % self.outputs_per_vehicle]
    }

    /// Joint grid extent, length `p`.
    pub fn joint_extent(&self) -> Vec<usize> {
        (0..self.p()).map(|i| self.extent(i)).collect()
    }

    pub fn joint_cell_count(&self) -> usize {
        self.joint_extent().iter().product()
    }

    pub fn atomic_params(&self, output: usize) -> AtomicParams {
        AtomicParams::new(self.box_length(output), self.u_max[output])
            .expect("validated scenario yields valid primitive parameters")
    }

    /// Time constant `sqrt(d / u*)` of output `i`.
    pub fn tau(&self, output: usize) -> f64 {
        (self.box_length(output) / self.u_max[output]).sqrt()
    }

    pub fn d_min(&self) -> f64 {
        self.box_lengths.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn in_bounds(&self, cell: &[usize]) -> bool {
        cell.len() == self.p() && cell.iter().enumerate().all(|(i, &c)| c < self.extent(i))
    }

    pub fn vehicle_cell<'a>(&self, cell: &'a [usize], vehicle: usize) -> &'a [usize] {
        let opv = self.outputs_per_vehicle;
        &cell[vehicle * opv..(vehicle + 1) * opv]
    }

    /// A joint cell is an obstacle when some vehicle sits on a physical
    /// obstacle or two vehicles are within `collision_margin` boxes
    /// (Chebyshev distance) of each other.
    pub fn joint_obstacle_label(&self, cell: &[usize]) -> CellLabel {
        debug_assert!(self.in_bounds(cell));
        let n = self.vehicles;
        for v in 0..n {
            if self.obstacles.contains(self.vehicle_cell(cell, v)) {
                return CellLabel::Obstacle;
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if chebyshev(self.vehicle_cell(cell, a), self.vehicle_cell(cell, b))
                    <= self.collision_margin
                {
                    return CellLabel::Obstacle;
                }
            }
        }
        CellLabel::Free
    }

    pub fn joint_goal_label(&self, cell: &[usize]) -> bool {
        match &self.joint_goals {
            Some(joint) => joint.contains(cell),
            None => (0..self.vehicles).all(|v| self.goals[v].contains(self.vehicle_cell(cell, v))),
        }
    }
}

pub(crate) fn chebyshev(a: &[usize], b: &[usize]) -> usize {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.abs_diff(y))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID4: &str = r#"{
        "grid": {"extent": [4, 4], "box_lengths": [1.0, 1.0]},
        "vehicles": {"count": 1, "u_max": [1.0, 1.0]},
        "obstacles": [[2, 2]],
        "goals": [[3, 3]]
    }"#;

    fn two_vehicles(margin: usize) -> Scenario {
        let text = format!(
            r#"{{
            "grid": {{"extent": [4, 4], "box_lengths": [1.0, 1.0]}},
            "vehicles": {{"count": 2, "u_max": [1.0, 1.0], "collision_margin": {margin}}},
            "goals": {{"per_vehicle": [[[3, 3]], [[0, 3]]]}}
        }}"#
        );
        Scenario::parse(&text).unwrap()
    }

    #[test]
    fn parses_grid4() {
        let s = Scenario::parse(GRID4).unwrap();
        assert_eq!(s.p(), 2);
        assert_eq!(s.joint_cell_count(), 16);
        let free = (0..4)
            .flat_map(|x| (0..4).map(move |y| vec![x, y]))
            .filter(|c| s.joint_obstacle_label(c) == CellLabel::Free)
            .count();
        assert_eq!(free, 15);
        assert_eq!(s.costs, Costs::default());
        assert_eq!(s.primitive_mode, PrimitiveMode::ND);
        assert!((s.numerics.h - 0.005).abs() < 1e-15);
        assert!((s.numerics.eps_x - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn degenerate_single_box() {
        let s = Scenario::parse(
            r#"{"grid": {"extent": [1], "box_lengths": [2.0]},
                "vehicles": {"count": 1, "u_max": [0.5]},
                "goals": [[0]]}"#,
        )
        .unwrap();
        assert_eq!(s.joint_cell_count(), 1);
        assert!(s.joint_goal_label(&[0]));
    }

    #[test]
    fn goal_on_obstacle_is_rejected() {
        let err = Scenario::parse(
            r#"{"grid": {"extent": [2, 2], "box_lengths": [1.0, 1.0]},
                "vehicles": {"count": 1, "u_max": [1.0, 1.0]},
                "obstacles": [[1, 1]],
                "goals": [[1, 1]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Semantic(_)), "{err}");
    }

    #[test]
    fn semantic_errors() {
        let cases = [
            // out-of-range obstacle
            r#"{"grid": {"extent": [2], "box_lengths": [1.0]}, "vehicles": {"count": 1, "u_max": [1.0]},
                "obstacles": [[2]], "goals": [[0]]}"#,
            // zero box length
            r#"{"grid": {"extent": [2], "box_lengths": [0.0]}, "vehicles": {"count": 1, "u_max": [1.0]},
                "goals": [[0]]}"#,
            // empty goal
            r#"{"grid": {"extent": [2], "box_lengths": [1.0]}, "vehicles": {"count": 1, "u_max": [1.0]},
                "goals": []}"#,
            // wrong u_max arity
            r#"{"grid": {"extent": [2, 2], "box_lengths": [1.0, 1.0]}, "vehicles": {"count": 1, "u_max": [1.0, 1.0, 1.0]},
                "goals": [[0, 0]]}"#,
        ];
        for text in cases {
            assert!(matches!(Scenario::parse(text), Err(Error::Semantic(_))), "{text}");
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = Scenario::parse("{\n  \"grid\": [1,\n}").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert!(line >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn same_cell_and_distant_cells() {
        let s = two_vehicles(0);
        assert_eq!(s.joint_obstacle_label(&[0, 0, 0, 0]), CellLabel::Obstacle);
        assert_eq!(s.joint_obstacle_label(&[0, 0, 3, 3]), CellLabel::Free);
        assert_eq!(s.joint_obstacle_label(&[0, 0, 0, 1]), CellLabel::Free);
        let s1 = two_vehicles(1);
        assert_eq!(s1.joint_obstacle_label(&[0, 0, 0, 1]), CellLabel::Obstacle);
        assert_eq!(s1.joint_obstacle_label(&[0, 0, 1, 1]), CellLabel::Obstacle);
        assert_eq!(s1.joint_obstacle_label(&[0, 0, 2, 1]), CellLabel::Free);
    }

    #[test]
    fn margin_matches_pairwise_distance_oracle() {
        for margin in 0..3 {
            let s = two_vehicles(margin);
            for a in 0..16 {
                for b in 0..16 {
                    let cell = [a % 4, a / 4, b % 4, b / 4];
                    let dx = (cell[0] as i64 - cell[2] as i64).abs();
                    let dy = (cell[1] as i64 - cell[3] as i64).abs();
                    let conflict = dx.max(dy) <= margin as i64;
                    let expect = if conflict { CellLabel::Obstacle } else { CellLabel::Free };
                    assert_eq!(s.joint_obstacle_label(&cell), expect, "{cell:?} margin {margin}");
                }
            }
        }
    }

    #[test]
    fn goals_are_per_vehicle() {
        let s = two_vehicles(0);
        assert!(s.joint_goal_label(&[3, 3, 0, 3]));
        assert!(!s.joint_goal_label(&[3, 3, 1, 3]));
        assert!(!s.joint_goal_label(&[0, 3, 3, 3]));
    }

    #[test]
    fn explicit_joint_goals_override_product() {
        let s = Scenario::parse(
            r#"{"grid": {"extent": [3], "box_lengths": [1.0]},
                "vehicles": {"count": 2, "u_max": [1.0]},
                "goals": {"per_vehicle": [[[2]], [[0]]], "joint": [[0, 2]]}}"#,
        )
        .unwrap();
        assert!(s.joint_goal_label(&[0, 2]));
        assert!(!s.joint_goal_label(&[2, 0]));
    }

    #[test]
    fn serialize_roundtrip_and_hash() {
        let s = Scenario::parse(GRID4).unwrap();
        let again = Scenario::parse(&s.to_json()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.hash(), again.hash());
        let mut edited = s.clone();
        edited.obstacles.insert(vec![1, 1]);
        assert_ne!(s.hash(), edited.hash());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = GRID4.replace("\"obstacles\"", "\"obstacle_cells\"");
        assert!(matches!(Scenario::parse(&text), Err(Error::Syntax { .. })));
    }
}
