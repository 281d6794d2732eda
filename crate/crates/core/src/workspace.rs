//! Output transition system: the free joint cells of the gridded output space
//! and the face-labeled edges between contiguous cells.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scenario::{CellLabel, JointCell, Scenario};

/// One component of a face label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Zero,
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 3] = [Sign::Zero, Sign::Plus, Sign::Minus];

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Sign {
        Sign::ALL[code as usize]
    }

    pub fn offset(self) -> isize {
        match self {
            Sign::Zero => 0,
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Zero => Sign::Zero,
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Zero => '0',
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Sign> {
        match c {
            '0' => Some(Sign::Zero),
            '+' => Some(Sign::Plus),
            '-' => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// Face of a box: one sign per output. The all-zero label is the interior.
///
/// Labels are also addressed by a base-3 code (output 0 is the least
/// significant digit, `Zero = 0, Plus = 1, Minus = 2`), which is what the
/// automata store internally.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceLabel(pub Vec<Sign>);

impl FaceLabel {
    pub fn interior(p: usize) -> FaceLabel {
        FaceLabel(vec![Sign::Zero; p])
    }

    pub fn from_code(mut code: u32, p: usize) -> FaceLabel {
        let mut signs = Vec::with_capacity(p);
        for _ in 0..p {
            signs.push(Sign::from_code(code % 3));
            code /= 3;
        }
        FaceLabel(signs)
    }

    pub fn code(&self) -> u32 {
        self.0.iter().rev().fold(0, |acc, s| acc * 3 + s.code())
    }

    pub fn p(&self) -> usize {
        self.0.len()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&s| s == Sign::Zero)
    }

    pub fn negate(&self) -> FaceLabel {
        FaceLabel(self.0.iter().map(|s| s.flip()).collect())
    }

    /// Number of non-zero components.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|&&s| s != Sign::Zero).count()
    }
}

impl fmt::Display for FaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for FaceLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<FaceLabel> {
        s.chars()
            .map(|c| {
                Sign::from_symbol(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad face label `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(FaceLabel)
    }
}

/// Result of stepping from a location through a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Location(usize),
    OutOfBounds,
    Obstacle,
}

const NO_LOCATION: u32 = u32::MAX;

/// Output transition system over the free joint cells of a scenario.
#[derive(Debug, Clone)]
pub struct Ots {
    p: usize,
    extent: Vec<usize>,
    strides: Vec<usize>,
    cells: Vec<JointCell>,
    cell_to_location: Vec<u32>,
    goal: Vec<bool>,
    goals: Vec<usize>,
    edge_offsets: Vec<usize>,
    edge_labels: Vec<u32>,
    edge_targets: Vec<u32>,
}

impl Ots {
    /// Builds the OTS of a scenario. Locations are numbered in increasing
    /// linear cell order with output 0 varying fastest.
    pub fn build(scenario: &Scenario) -> Result<Ots> {
        let p = scenario.p();
        let extent = scenario.joint_extent();
        let mut strides = vec![1usize; p];
        for i in 1..p {
            strides[i] = strides[i - 1] * extent[i - 1];
        }
        let total: usize = extent.iter().product();

        let mut cells = Vec::new();
        let mut cell_to_location = vec![NO_LOCATION; total];
        let mut goal = Vec::new();
        let mut goals = Vec::new();
        let mut cell = vec![0usize; p];
        for (linear, slot) in cell_to_location.iter_mut().enumerate() {
            decode(linear, &extent, &mut cell);
            if scenario.joint_obstacle_label(&cell) == CellLabel::Free {
                let loc = cells.len();
                *slot = loc as u32;
                let is_goal = scenario.joint_goal_label(&cell);
                if is_goal {
                    goals.push(loc);
                }
                goal.push(is_goal);
                cells.push(JointCell(cell.clone()));
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyWorkspace);
        }
        if goals.is_empty() {
            return Err(Error::UnreachableGoal(
                "no free joint cell satisfies the goal condition".into(),
            ));
        }

        let mut ots = Ots {
            p,
            extent,
            strides,
            cells,
            cell_to_location,
            goal,
            goals,
            edge_offsets: Vec::new(),
            edge_labels: Vec::new(),
            edge_targets: Vec::new(),
        };
        let label_count = 3u32.pow(p as u32);
        let mut offsets = Vec::with_capacity(ots.cells.len() + 1);
        let mut labels = Vec::new();
        let mut targets = Vec::new();
        offsets.push(0);
        for loc in 0..ots.cells.len() {
            for code in 1..label_count {
                if let Neighbor::Location(t) = ots.neighbor_code(loc, code) {
                    labels.push(code);
                    targets.push(t as u32);
                }
            }
            offsets.push(labels.len());
        }
        ots.edge_offsets = offsets;
        ots.edge_labels = labels;
        ots.edge_targets = targets;
        Ok(ots)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn location_count(&self) -> usize {
        self.cells.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_labels.len()
    }

    pub fn cell(&self, location: usize) -> &JointCell {
        &self.cells[location]
    }

    pub fn location_of(&self, cell: &[usize]) -> Option<usize> {
        if cell.len() != self.p || cell.iter().zip(&self.extent).any(|(&c, &e)| c >= e) {
            return None;
        }
        let linear: usize = cell.iter().zip(&self.strides).map(|(c, s)| c * s).sum();
        match self.cell_to_location[linear] {
            NO_LOCATION => None,
            loc => Some(loc as usize),
        }
    }

    pub fn is_goal(&self, location: usize) -> bool {
        self.goal[location]
    }

    pub fn goal_locations(&self) -> &[usize] {
        &self.goals
    }

    /// Outgoing edges of a location as `(label code, target location)`,
    /// ordered by label code.
    pub fn edges(&self, location: usize) -> impl Iterator<Item = (u32, usize)> + '_ {
        let range = self.edge_offsets[location]..self.edge_offsets[location + 1];
        self.edge_labels[range.clone()]
            .iter()
            .zip(&self.edge_targets[range])
            .map(|(&l, &t)| (l, t as usize))
    }

    pub fn neighbor(&self, location: usize, label: &FaceLabel) -> Neighbor {
        debug_assert!(!label.is_interior(), "interior label has no neighbor");
        self.neighbor_code(location, label.code())
    }

    /// Same as [`Ots::neighbor`] with the label given by its code.
    pub fn neighbor_code(&self, location: usize, mut code: u32) -> Neighbor {
        let cell = &self.cells[location];
        let mut linear = 0usize;
        for i in 0..self.p {
            let offset = Sign::from_code(code % 3).offset();
            code /= 3;
            let c = cell[i] as isize + offset;
            if c < 0 || c as usize >= self.extent[i] {
                return Neighbor::OutOfBounds;
            }
            linear += c as usize * self.strides[i];
        }
        match self.cell_to_location[linear] {
            NO_LOCATION => Neighbor::Obstacle,
            loc => Neighbor::Location(loc as usize),
        }
    }

    /// Line-oriented dump: one record per edge.
    pub fn dump(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        for loc in 0..self.location_count() {
            let goal = if self.goal[loc] { " goal" } else { "" };
            writeln!(out, "location {loc} cell={}{goal}", self.cells[loc])?;
        }
        for loc in 0..self.location_count() {
            for (code, target) in self.edges(loc) {
                writeln!(
                    out,
                    "edge {loc} cell={} label={} target={target}",
                    self.cells[loc],
                    FaceLabel::from_code(code, self.p)
                )?;
            }
        }
        Ok(())
    }
}

fn decode(mut linear: usize, extent: &[usize], out: &mut [usize]) {
    for (slot, &e) in out.iter_mut().zip(extent) {
        *slot = linear % e;
        linear /= e;
    }
}

/// Maps a global output point to its joint cell and the local coordinate
/// inside that cell. A point on a face shared by two cells belongs to the
/// lower-index cell, with local coordinate equal to the box length.
pub fn global_to_cell(scenario: &Scenario, y: &[f64]) -> Result<(JointCell, Vec<f64>)> {
    let p = scenario.p();
    if y.len() != p {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, expected {p}",
            y.len()
        )));
    }
    let mut cell = Vec::with_capacity(p);
    let mut local = Vec::with_capacity(p);
    for (i, &yi) in y.iter().enumerate() {
        let d = scenario.box_length(i);
        let extent = scenario.extent(i);
        let upper = extent as f64 * d;
        if !(yi >= 0.0 && yi <= upper) {
            return Err(Error::OutOfWorkspace { point: y.to_vec() });
        }
        let raw = (yi / d).floor();
        let mut idx = raw as usize;
        if idx >= extent {
            idx = extent - 1;
        } else if idx > 0 && yi == idx as f64 * d {
            idx -= 1;
        }
        cell.push(idx);
        local.push(yi - idx as f64 * d);
    }
    Ok((JointCell(cell), local))
}
