//! Receivers, seismogram CSV files and legacy VTK snapshots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sim::config::{component_index, Component, ReceiverConfig};
use crate::solver::Simulation;
use crate::state::*;

/// A receiver resolved to its owning leaf.
///
/// Points on a face belong to the lower cell along each axis.
#[derive(Debug, Clone)]
pub struct Receiver {
    pub id: String,
    pub position: [f64; 2],
    pub cell: usize,
    pub xi: [f64; 2],
    pub names: Vec<String>,
    components: Vec<Component>,
}

impl Receiver {
    pub fn new(sim: &Simulation, cfg: &ReceiverConfig) -> Result<Self> {
        let cell = sim.grid.locate(cfg.position)?;
        let (lo, h) = sim.grid.cell_box(cell);
        let components = cfg
            .components
            .iter()
            .map(|c| component_index(c).ok_or_else(|| Error::config("receivers.components", format!("unknown `{c}`"))))
            .collect::<Result<_>>()?;
        Ok(Receiver {
            id: cfg.id.clone(),
            position: cfg.position,
            cell,
            xi: [(cfg.position[0] - lo[0]) / h[0], (cfg.position[1] - lo[1]) / h[1]],
            names: cfg.components.clone(),
            components,
        })
    }

    /// Recorded values of the current solution.
    pub fn sample(&self, sim: &Simulation) -> Vec<f64> {
        let q = sim.ops.evaluate(sim.cell(self.cell), self.xi);
        let vel = q.velocity(&sim.cfg.reg());
        self.components
            .iter()
            .map(|c| match *c {
                Component::Stored(i) => q[i],
                Component::Velocity(d) => vel[d],
            })
            .collect()
    }
}

/// Time series of all receivers, one row per accepted step.
#[derive(Debug, Clone)]
pub struct Recorder {
    pub receivers: Vec<Receiver>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<Vec<f64>>>,
}

impl Recorder {
    pub fn new(sim: &Simulation, cfgs: &[ReceiverConfig]) -> Result<Self> {
        let receivers: Vec<Receiver> = cfgs.iter().map(|c| Receiver::new(sim, c)).collect::<Result<_>>()?;
        let n = receivers.len();
        Ok(Recorder {
            receivers,
            times: Vec::new(),
            rows: vec![Vec::new(); n],
        })
    }

    pub fn record(&mut self, sim: &Simulation) {
        self.times.push(sim.t);
        for (r, rows) in self.receivers.iter().zip(&mut self.rows) {
            rows.push(r.sample(sim));
        }
    }

    /// Trace of one component of one receiver.
    pub fn trace(&self, receiver: usize, component: &str) -> Option<Vec<f64>> {
        let k = self.receivers[receiver].names.iter().position(|n| n == component)?;
        Some(self.rows[receiver].iter().map(|r| r[k]).collect())
    }

    pub fn csv(&self, receiver: usize) -> String {
        let r = &self.receivers[receiver];
        let mut out = String::from("t");
        for n in &r.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.rows[receiver]) {
            let _ = write!(out, "{t:e}");
            for v in row {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }

    /// Writes `seismogram_<id>.csv` for every receiver.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for (k, r) in self.receivers.iter().enumerate() {
            let p = dir.join(format!("seismogram_{}.csv", r.id));
            std::fs::write(&p, self.csv(k)).map_err(|e| Error::io(&p, e))?;
            paths.push(p);
        }
        Ok(paths)
    }
}

/// Point arrays of a snapshot in file order.
pub const SNAPSHOT_FIELDS: [&str; 13] = [
    "sigma_xx", "sigma_yy", "sigma_zz", "sigma_xy", "sigma_yz", "sigma_xz", "u", "v", "w", "alpha", "lambda", "mu",
    "rho",
];

fn snapshot_value(q: &[f64], field: usize, reg: &RegularizationParams) -> f64 {
    match field {
        0..=5 => q[field],
        6..=8 => q[AU + field - 6] * inv_alpha_reg(q[ALPHA], reg),
        9 => q[ALPHA],
        10 => q[LAMBDA],
        11 => q[MU],
        _ => q[RHO],
    }
}

/// Legacy ASCII VTK text: one `POLY_VERTEX` per leaf holding its nodal points.
pub fn snapshot_text(sim: &Simulation) -> String {
    let m = sim.ops.m;
    let nn = m * m;
    let ncell = sim.grid.len();
    let npts = ncell * nn;
    let nodes = &sim.ops.basis.nodes;
    let reg = sim.cfg.reg();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "dimseis t={:e} step={}", sim.t, sim.step);
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {npts} double");
    for c in 0..ncell {
        let (lo, h) = sim.grid.cell_box(c);
        for j in 0..m {
            for i in 0..m {
                let _ = writeln!(s, "{:e} {:e} 0", lo[0] + h[0] * nodes[i], lo[1] + h[1] * nodes[j]);
            }
        }
    }
    let _ = writeln!(s, "CELLS {} {}", ncell, ncell * (nn + 1));
    for c in 0..ncell {
        let _ = write!(s, "{nn}");
        for k in 0..nn {
            let _ = write!(s, " {}", c * nn + k);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {ncell}");
    for _ in 0..ncell {
        s.push_str("2\n");
    }
    let _ = writeln!(s, "CELL_DATA {ncell}");
    s.push_str("SCALARS level int 1\nLOOKUP_TABLE default\n");
    for k in &sim.grid.leaves {
        let _ = writeln!(s, "{}", k.level);
    }
    s.push_str("SCALARS limited int 1\nLOOKUP_TABLE default\n");
    for &l in &sim.limited {
        let _ = writeln!(s, "{}", l as u8);
    }
    let _ = writeln!(s, "POINT_DATA {npts}");
    for (f, name) in SNAPSHOT_FIELDS.iter().enumerate() {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for q in sim.u.chunks_exact(NVAR) {
            let _ = writeln!(s, "{:e}", snapshot_value(q, f, &reg));
        }
    }
    s
}

pub fn write_snapshot(sim: &Simulation, path: &Path) -> Result<()> {
    std::fs::write(path, snapshot_text(sim)).map_err(|e| Error::io(path, e))
}
