//! Setup and execution of a configured run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amr::{refine_static, AmrGrid};
use crate::basis::{gauss_legendre, Basis};
use crate::error::{Error, Result};
use crate::geometry::{sample_alpha_field, AlphaGeometry};
use crate::limiter::{build_mask, range_in_band};
use crate::sim::config::RunConfig;
use crate::sim::output::{write_snapshot, Recorder};
use crate::solver::Simulation;
use crate::state::*;

/// Cell mean of α by composite Gauss–Legendre quadrature, exact when the
/// closed-form α range shows the cell is pure.
pub fn alpha_mean(g: &AlphaGeometry, lo: [f64; 2], h: [f64; 2]) -> Result<f64> {
    let hi = [lo[0] + h[0], lo[1] + h[1]];
    if let Some((a, b)) = g.alpha_range(lo, hi) {
        if a == b {
            return Ok(a);
        }
    }
    const PIECES: usize = 16;
    let (xs, ws) = gauss_legendre(3);
    let hp = [h[0] / PIECES as f64, h[1] / PIECES as f64];
    let mut acc = 0.0;
    for pj in 0..PIECES {
        for pi in 0..PIECES {
            for (b, wb) in ws.iter().enumerate() {
                for (a, wa) in ws.iter().enumerate() {
                    let x = [lo[0] + hp[0] * (pi as f64 + xs[a]), lo[1] + hp[1] * (pj as f64 + xs[b])];
                    acc += wa * wb * g.alpha(x)?;
                }
            }
        }
    }
    Ok(acc / (PIECES * PIECES) as f64)
}

/// Statically refined grid for a configuration.
pub fn build_grid(cfg: &RunConfig, g: &AlphaGeometry) -> Result<AmrGrid> {
    refine_static(cfg.domain.grid_spec(), &cfg.discretization.refinement, &|lo, h| alpha_mean(g, lo, h))
}

/// Limiter mask. A cell is flagged when its α values meet the open band
/// `(eps, 1 − eps)` or when α jumps from vacuum to solid inside it.
///
/// Smooth profiles use the closed-form α range where the shape provides one.
/// Otherwise, and always for sharp profiles, the nodal and subcell samples are
/// used, which lie strictly inside the cell so that a step on a face flags
/// nothing.
pub fn build_limiter_mask(grid: &AmrGrid, g: &AlphaGeometry, basis: &Basis, eps: f64) -> Result<Vec<bool>> {
    (0..grid.len())
        .into_par_iter()
        .map(|c| {
            let (lo, h) = grid.cell_box(c);
            let hi = [lo[0] + h[0], lo[1] + h[1]];
            if g.profile.thickness > 0.0 {
                if let Some((a, b)) = g.alpha_range(lo, hi) {
                    return Ok(range_in_band(a, b, eps));
                }
            }
            let s = sample_alpha_field(g, &[(lo, h)], basis)?.pop().expect("one cell");
            let values: Vec<f64> = s.nodal.into_iter().chain(s.subcell).collect();
            let lo_v = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi_v = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(build_mask(&[values], eps)[0] || (lo_v <= eps && hi_v >= 1.0 - eps))
        })
        .collect()
}

/// Pointwise initial state of a configuration.
pub fn initial_state(cfg: &RunConfig, g: &AlphaGeometry, x: [f64; 2]) -> Result<State13> {
    let alpha = g.alpha(x)?;
    let mut q = State13::at_rest(cfg.materials.material_at(x)?, alpha);
    let p = cfg.initial.perturbation(x);
    q.0[..6].copy_from_slice(&p[..6]);
    for d in 0..3 {
        q.0[AU + d] = alpha * p[6 + d];
    }
    Ok(q)
}

/// A configured simulation ready to advance.
pub struct Prepared {
    pub config: RunConfig,
    pub geometry: AlphaGeometry,
    pub sim: Simulation,
}

/// Builds geometry, grid, mask and initial data. Relative raster paths are
/// resolved against `base_dir`.
pub fn prepare(cfg: &RunConfig, base_dir: &Path) -> Result<Prepared> {
    cfg.validate()?;
    let geometry = AlphaGeometry::new(&cfg.geometry, base_dir)?;
    let grid = build_grid(cfg, &geometry)?;
    let basis = crate::basis::build_basis(cfg.discretization.degree)?;
    let mask = build_limiter_mask(&grid, &geometry, &basis, cfg.discretization.mask_eps)?;
    let sim = Simulation::new(
        grid,
        cfg.discretization.solver_config(),
        &|x| initial_state(cfg, &geometry, x),
        Some(mask),
        cfg.source,
    )?;
    Ok(Prepared {
        config: cfg.clone(),
        geometry,
        sim,
    })
}

/// Run manifest written next to the other artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub t_end: f64,
    pub steps: usize,
    pub dt_history: Vec<f64>,
    pub dt_sum: f64,
    pub cells: usize,
    pub cells_per_level: Vec<usize>,
    pub refined_cells: usize,
    pub limited_cells: usize,
    pub grid_hash: u64,
    pub wall_time_s: f64,
    pub seismograms: Vec<PathBuf>,
    pub snapshots: Vec<PathBuf>,
}

/// Runs a configuration and writes seismograms, snapshots and the manifest
/// into `out_dir`.
pub fn run(cfg: &RunConfig, base_dir: &Path, out_dir: &Path) -> Result<Manifest> {
    let start = Instant::now();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let Prepared { mut sim, .. } = prepare(cfg, base_dir)?;
    let mut recorder = Recorder::new(&sim, &cfg.receivers)?;
    recorder.record(&sim);
    let mut snapshots = Vec::new();
    let snap = |sim: &Simulation, list: &mut Vec<PathBuf>| -> Result<()> {
        if cfg.output.snapshots {
            let p = out_dir.join(format!("snapshot_{:06}.vtk", sim.step));
            write_snapshot(sim, &p)?;
            list.push(p);
        }
        Ok(())
    };
    snap(&sim, &mut snapshots)?;
    let every = cfg.output.snapshot_every;
    let t_end = cfg.time.t_end;
    sim.advance(t_end, |s, _| {
        recorder.record(s);
        if every > 0 && s.step % every == 0 {
            snap(s, &mut snapshots)?;
        }
        Ok(())
    })?;
    if sim.step > 0 && (every == 0 || sim.step % every != 0) {
        snap(&sim, &mut snapshots)?;
    }
    let seismograms = recorder.write_all(out_dir)?;
    let counts = sim.grid.level_counts();
    let manifest = Manifest {
        name: cfg.name.clone(),
        t_end,
        steps: sim.step,
        dt_sum: sim.dt_history.iter().sum(),
        dt_history: sim.dt_history.clone(),
        cells: sim.grid.len(),
        refined_cells: counts.iter().skip(1).sum(),
        cells_per_level: counts,
        limited_cells: sim.limited_count(),
        grid_hash: sim.grid.grid_hash(),
        wall_time_s: start.elapsed().as_secs_f64(),
        seismograms,
        snapshots,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
