//! SVG projection of a trajectory file onto two axes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Plot axis: a per-vehicle output index or time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Output(usize),
    Time,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Axis> {
        match s {
            "t" | "time" => Ok(Axis::Time),
            _ => s
                .parse()
                .map(Axis::Output)
                .map_err(|_| Error::InvalidArgument(format!("bad axis `{s}` (expected an output index or t)"))),
        }
    }
}

/// Parsed trajectory rows: time, positions and boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub p: usize,
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub cell: Vec<Vec<usize>>,
}

impl Trajectory {
    pub fn parse(text: &str) -> Result<Trajectory> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("trajectory file is empty".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        let p = cols.iter().filter(|c| c.starts_with("y_")).count();
        if cols.first() != Some(&"t") || p == 0 || cols.len() != 4 * p + 2 {
            return Err(Error::InvalidArgument("trajectory header is malformed".into()));
        }
        let mut traj = Trajectory {
            p,
            t: Vec::new(),
            y: Vec::new(),
            cell: Vec::new(),
        };
        for (n, line) in lines.enumerate() {
            let bad = || Error::InvalidArgument(format!("trajectory row {} is malformed", n + 1));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols.len() {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            traj.t.push(num(fields[0])?);
            traj.y.push(fields[1..=p].iter().map(|s| num(s)).collect::<Result<_>>()?);
            traj.cell.push(
                fields[2 * p + 1..3 * p + 1]
                    .iter()
                    .map(|s| s.parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            );
        }
        if traj.t.is_empty() {
            return Err(Error::InvalidArgument("trajectory has no samples".into()));
        }
        Ok(traj)
    }
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 30.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * SIZE
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN + SIZE - (y - self.y0) / (self.y1 - self.y0) * SIZE
    }

    fn rect(&self, out: &mut String, x: (f64, f64), y: (f64, f64), fill: &str) {
        let (a, b) = (self.px(x.0), self.px(x.1));
        let (c, d) = (self.py(y.1), self.py(y.0));
        writeln!(
            out,
            r#"<rect x="{a:.2}" y="{c:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            b - a,
            d - c
        )
        .unwrap();
    }
}

/// Renders the trajectory of every vehicle projected on `(horizontal,
/// vertical)` axes, with grid, obstacles, goals and box-change markers.
pub fn render_svg(scenario: &Scenario, traj: &Trajectory, axes: (Axis, Axis)) -> Result<String> {
    let opv = scenario.outputs_per_vehicle;
    if traj.p != scenario.p() {
        return Err(Error::InvalidArgument(format!(
            "trajectory has {} outputs, scenario has {}",
            traj.p,
            scenario.p()
        )));
    }
    for a in [axes.0, axes.1] {
        if let Axis::Output(i) = a {
            if i >= opv {
                return Err(Error::InvalidArgument(format!(
                    "axis {i} out of range (vehicles have {opv} outputs)"
                )));
            }
        }
    }
    let t_end = traj.t.last().copied().unwrap_or(0.0).max(1e-9);
    let range = |a: Axis| match a {
        Axis::Output(i) => (0.0, scenario.grid_extent[i] as f64 * scenario.box_lengths[i]),
        Axis::Time => (0.0, t_end),
    };
    let (x0, x1) = range(axes.0);
    let (y0, y1) = range(axes.1);
    let f = Frame { x0, x1, y0, y1 };

    let mut out = String::new();
    let full = SIZE + 2.0 * MARGIN;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    // Obstacles and goals: cells when both axes are outputs, bands when one
    // axis is time and vehicles are one-dimensional.
    let band = |a: Axis, cell: &[usize]| match a {
        Axis::Output(i) => {
            let d = scenario.box_lengths[i];
            Some((cell[i] as f64 * d, (cell[i] + 1) as f64 * d))
        }
        Axis::Time if opv == 1 => Some((0.0, t_end)),
        Axis::Time => None,
    };
    let mut shade = |cell: &[usize], fill: &str| {
        if let (Some(bx), Some(by)) = (band(axes.0, cell), band(axes.1, cell)) {
            f.rect(&mut out, bx, by, fill);
        }
    };
    for (v, goals) in scenario.goals.iter().enumerate() {
        let color = COLORS[v % COLORS.len()];
        for g in goals {
            shade(g, &format!("{color}33"));
        }
    }
    for o in &scenario.obstacles {
        shade(o, "#555555");
    }

    for (a, vertical) in [(axes.0, false), (axes.1, true)] {
        if let Axis::Output(i) = a {
            let d = scenario.box_lengths[i];
            for k in 0..=scenario.grid_extent[i] {
                let c = k as f64 * d;
                let (xa, ya, xb, yb) = if vertical {
                    (f.px(x0), f.py(c), f.px(x1), f.py(c))
                } else {
                    (f.px(c), f.py(y0), f.px(c), f.py(y1))
                };
                writeln!(
                    out,
                    r##"<line x1="{xa:.2}" y1="{ya:.2}" x2="{xb:.2}" y2="{yb:.2}" stroke="#bbbbbb" stroke-width="1"/>"##
                )
                .unwrap();
            }
        }
    }
    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    )
    .unwrap();

    let coord = |a: Axis, row: usize, v: usize| match a {
        Axis::Output(i) => traj.y[row][v * opv + i],
        Axis::Time => traj.t[row],
    };
    for v in 0..scenario.vehicles {
        let color = COLORS[v % COLORS.len()];
        let mut points = String::new();
        for row in 0..traj.t.len() {
            write!(
                points,
                "{:.2},{:.2} ",
                f.px(coord(axes.0, row, v)),
                f.py(coord(axes.1, row, v))
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.trim_end()
        )
        .unwrap();
        let own = |row: usize| &traj.cell[row][v * opv..(v + 1) * opv];
        for row in 1..traj.t.len() {
            if own(row) != own(row - 1) {
                writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    f.px(coord(axes.0, row, v)),
                    f.py(coord(axes.1, row, v))
                )
                .unwrap();
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
