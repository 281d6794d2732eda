//! Offline-cost benchmark over single-vehicle grids with one goal and no
//! obstacles.

use std::io::{self, Write};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use rayon::prelude::*;

use crate::error::Result;
use crate::pipeline::{Abstraction, Timings};
use crate::planner;
use crate::scenario::{PrimitiveMode, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub p: usize,
    pub grid: usize,
    pub mode: PrimitiveMode,
}

impl BenchConfig {
    /// `grid^p` boxes of unit size, goal in the far corner.
    pub fn scenario(&self) -> Result<Scenario> {
        let mut s = Scenario::single_vehicle(
            vec![self.grid; self.p],
            vec![1.0; self.p],
            vec![1.0; self.p],
            vec![],
            [vec![self.grid - 1; self.p]],
        )?;
        s.primitive_mode = self.mode;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub config: BenchConfig,
    pub ots_locations: usize,
    pub ma_primitives: usize,
    pub ma_edges: usize,
    pub pa_states: usize,
    pub pa_edges: usize,
    pub timings: Timings,
    pub timeout: bool,
}

pub const CSV_HEADER: &str =
    "p,grid,mode,ots_locations,ma_primitives,ma_edges,pa_states,pa_edges,t_ots,t_ma,t_pa,t_solve,t_total,timeout";

impl BenchRecord {
    fn timed_out(config: BenchConfig) -> BenchRecord {
        BenchRecord {
            config,
            ots_locations: 0,
            ma_primitives: 0,
            ma_edges: 0,
            pa_states: 0,
            pa_edges: 0,
            timings: Timings::default(),
            timeout: true,
        }
    }

    pub fn csv_row(&self) -> String {
        let t = &self.timings;
        format!(
            "{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            self.config.p,
            self.config.grid,
            self.config.mode,
            self.ots_locations,
            self.ma_primitives,
            self.ma_edges,
            self.pa_states,
            self.pa_edges,
            t.ots,
            t.ma,
            t.pa,
            t.solve,
            t.total(),
            self.timeout
        )
    }
}

/// Runs every offline stage once and records sizes and wall-clock times.
pub fn measure(config: BenchConfig) -> Result<BenchRecord> {
    let scenario = config.scenario()?;
    let mut timings = Timings::default();
    let Abstraction { ots, ma, pa } = Abstraction::build(&scenario, &mut timings)?;
    let start = std::time::Instant::now();
    planner::solve(&pa)?;
    timings.solve = start.elapsed().as_secs_f64();
    Ok(BenchRecord {
        config,
        ots_locations: ots.location_count(),
        ma_primitives: ma.primitive_count(),
        ma_edges: ma.edge_count(),
        pa_states: pa.state_count(),
        pa_edges: pa.edge_count(),
        timings,
        timeout: false,
    })
}

/// Best of `repeat` measurements, per stage, with a wall-clock limit.
pub fn measure_with(config: BenchConfig, repeat: usize, timeout: Duration) -> Result<BenchRecord> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut best: Option<BenchRecord> = None;
        for _ in 0..repeat.max(1) {
            match measure(config) {
                Ok(r) => {
                    best = Some(match best {
                        None => r,
                        Some(mut b) => {
                            b.timings.ots = b.timings.ots.min(r.timings.ots);
                            b.timings.ma = b.timings.ma.min(r.timings.ma);
                            b.timings.pa = b.timings.pa.min(r.timings.pa);
                            b.timings.solve = b.timings.solve.min(r.timings.solve);
                            b
                        }
                    })
                }
                Err(e) => {
                    let _ = tx.send(Err(e));
                    return;
                }
            }
        }
        let _ = tx.send(Ok(best.expect("at least one repetition")));
    });
    match rx.recv_timeout(timeout) {
        Ok(result) => result,
        Err(_) => Ok(BenchRecord::timed_out(config)),
    }
}

/// All `(p, grid, mode)` combinations in the given order.
pub fn configurations(ps: &[usize], grids: &[usize], modes: &[PrimitiveMode]) -> Vec<BenchConfig> {
    let mut out = Vec::new();
    for &p in ps {
        for &grid in grids {
            for &mode in modes {
                out.push(BenchConfig { p, grid, mode });
            }
        }
    }
    out
}

pub fn run(
    configs: &[BenchConfig],
    repeat: usize,
    timeout: Duration,
    parallel: bool,
) -> Result<Vec<BenchRecord>> {
    if parallel {
        configs
            .par_iter()
            .map(|&c| measure_with(c, repeat, timeout))
            .collect()
    } else {
        configs
            .iter()
            .map(|&c| measure_with(c, repeat, timeout))
            .collect()
    }
}

pub fn write_csv(records: &[BenchRecord], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}
