//! Grid convergence study with a travelling plane p-wave in a uniform solid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::amr::{AmrGrid, GridSpec};
use crate::basis::gauss_legendre;
use crate::error::Result;
use crate::solver::{Simulation, SolverConfig};
use crate::state::*;

const LAMBDA0: f64 = 2.0;
const MU0: f64 = 1.0;
const RHO0: f64 = 1.0;

/// Exact right-going p-wave `u = sin(2π(x − cp t))` in the unit material.
pub fn plane_wave_exact(x: [f64; 2], t: f64) -> State13 {
    let cp = ((LAMBDA0 + 2.0 * MU0) / RHO0).sqrt();
    let f = (2.0 * PI * (x[0] - cp * t)).sin();
    let mut q = State13::at_rest(MaterialSample::new(LAMBDA0, MU0, RHO0), 1.0);
    q.0[AU] = f;
    q.0[SXX] = -RHO0 * cp * f;
    q.0[SYY] = -LAMBDA0 / cp * f;
    q.0[SZZ] = -LAMBDA0 / cp * f;
    q
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub h: f64,
    pub l2_error: f64,
    /// Observed order against the previous row.
    pub order: Option<f64>,
}

/// L2 error over the evolved components.
pub fn l2_error(sim: &Simulation, exact: impl Fn([f64; 2]) -> State13) -> f64 {
    let q = sim.cfg.degree + 3;
    let (xs, ws) = gauss_legendre(q);
    let mut acc = 0.0;
    for c in 0..sim.grid.len() {
        let (lo, h) = sim.grid.cell_box(c);
        let u = sim.cell(c);
        for (b, wb) in ws.iter().enumerate() {
            for (a, wa) in ws.iter().enumerate() {
                let x = [lo[0] + h[0] * xs[a], lo[1] + h[1] * xs[b]];
                let num = sim.ops.evaluate(u, [xs[a], xs[b]]);
                let ex = exact(x);
                let e2: f64 = (0..NEVOLVED).map(|v| (num[v] - ex[v]).powi(2)).sum();
                acc += wa * wb * h[0] * h[1] * e2;
            }
        }
    }
    acc.sqrt()
}

/// Runs the plane wave on a strip `[0,1] × [0, 2/n]` of `n × 2` square cells
/// for each entry of `cells` up to `t_end`.
pub fn convergence_study(degree: usize, cells: &[usize], t_end: f64) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in cells {
        let h = 1.0 / n as f64;
        let spec = GridSpec {
            lo: [0.0, 0.0],
            hi: [1.0, 2.0 * h],
            dims: [n, 2],
            periodic: [true, true],
        };
        let grid = AmrGrid::uniform(spec, 3)?;
        let cfg = SolverConfig {
            degree,
            ..Default::default()
        };
        let mut sim = Simulation::new(grid, cfg, &|x| Ok(plane_wave_exact(x, 0.0)), Some(vec![false; 2 * n]), None)?;
        sim.advance(t_end, |_, _| Ok(()))?;
        let err = l2_error(&sim, |x| plane_wave_exact(x, t_end));
        let order = rows.last().map(|p| (p.l2_error / err).ln() / (p.h / h).ln());
        rows.push(ConvergenceRow {
            cells: n,
            h,
            l2_error: err,
            order,
        });
    }
    Ok(rows)
}

/// Base resolutions `25 · 2^k` for `k < levels`.
pub fn default_cells(levels: usize) -> Vec<usize> {
    (0..levels).map(|k| 25 << k).collect()
}
