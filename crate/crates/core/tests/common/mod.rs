#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use hybridplan::scenario::Scenario;

/// Single-vehicle scenario with `p` outputs, per-axis extents in `2..=max_grid`,
/// obstacles at the given density and one goal cell.
pub fn random_scenario(rng: &mut impl Rng, p: usize, max_grid: usize, density: f64) -> Scenario {
    let extent: Vec<usize> = (0..p).map(|_| rng.gen_range(2..=max_grid)).collect();
    let mut cells = vec![vec![]];
    for &e in &extent {
        cells = cells
            .into_iter()
            .flat_map(|c: Vec<usize>| {
                (0..e).map(move |i| {
                    let mut c = c.clone();
                    c.push(i);
                    c
                })
            })
            .collect();
    }
    cells.shuffle(rng);
    let goal = cells.pop().unwrap();
    let k = (density * (cells.len() + 1) as f64).floor() as usize;
    let obstacles: Vec<Vec<usize>> = cells.into_iter().take(k).collect();
    let d: Vec<f64> = (0..p).map(|_| rng.gen_range(0.5..2.0)).collect();
    let u: Vec<f64> = (0..p).map(|_| rng.gen_range(0.5..2.0)).collect();
    Scenario::single_vehicle(extent, d, u, obstacles, [goal]).unwrap()
}

pub fn scenario_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

/// Box centers of the swap scenario's start cells.
pub fn swap_start(s: &Scenario) -> Vec<f64> {
    let d = &s.box_lengths;
    let center = |cell: [usize; 2]| [(cell[0] as f64 + 0.5) * d[0], (cell[1] as f64 + 0.5) * d[1]];
    let a = center([0, 2]);
    let b = center([4, 3]);
    vec![a[0], a[1], b[0], b[1]]
}
