//! Time-marching driver combining the DG kernels, the subcell limiter and
//! the adaptive grid.
//!
//! Each step runs in bulk-synchronous phases: time step, predictor on every
//! cell, face fluctuations, subcell update of limited cells, corrector of the
//! remaining cells. Parallel phases collect results in cell order, so runs are
//! bit-reproducible regardless of the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amr::AmrGrid;
use crate::dg::*;
use crate::elastic::{ricker, Axis, SourceSpec};
use crate::error::{Error, Result};
use crate::limiter::{build_mask, fv_step, FvSettings, SubcellOperators, HALO};
use crate::riemann::{PathSpec, SolverKind};
use crate::state::*;

/// Numerical settings of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub degree: usize,
    pub cfl: f64,
    pub solver: SolverKind,
    pub eps0: f64,
    pub path_order: usize,
    pub picard_tolerance: f64,
    pub mask_eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            degree: 4,
            cfl: 0.9,
            solver: SolverKind::Godunov,
            eps0: 1e-3,
            path_order: 3,
            picard_tolerance: 1e-12,
            mask_eps: crate::limiter::DEFAULT_MASK_EPS,
        }
    }
}

impl SolverConfig {
    pub fn reg(&self) -> RegularizationParams {
        RegularizationParams { eps0: self.eps0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree > crate::basis::MAX_DEGREE {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::config("discretization.cfl", "must be positive"));
        }
        if !(self.eps0 > 0.0) {
            return Err(Error::config("discretization.eps0", "must be positive"));
        }
        PathSpec::new(self.path_order)?;
        Ok(())
    }
}

/// Where a halo subcell of a limited cell takes its value from.
#[derive(Debug, Clone)]
enum HaloSource {
    /// Subcell of the own patch (outflow copy at the box boundary).
    Own(usize),
    /// Subcell of a same-level limited neighbour.
    Patch { cell: usize, sub: usize },
    /// Quadrature of neighbour polynomials: `Σ w · u[cell][node]`.
    Poly(Vec<(usize, Vec<f64>)>),
}

#[derive(Debug, Clone)]
struct LimitedCell {
    patch: Vec<f64>,
    halo: Vec<(usize, HaloSource)>,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub dt: f64,
    pub max_sweeps: usize,
    pub predicted_cells: usize,
    pub active_faces: usize,
}

/// State and operators of a running simulation.
pub struct Simulation {
    pub grid: AmrGrid,
    pub ops: DgOperators,
    pub sub: SubcellOperators,
    pub cfg: SolverConfig,
    /// Nodal states of all leaves, `nodes_per_cell · NVAR` values per leaf.
    pub u: Vec<f64>,
    statics: Vec<CellStatic>,
    pub limited: Vec<bool>,
    limited_cells: Vec<Option<LimitedCell>>,
    source: Option<(usize, CellSource)>,
    pub t: f64,
    pub step: usize,
    flux: FluxSettings,
    fv: FvSettings,
    picard: PicardSettings,
    pub dt_history: Vec<f64>,
}

impl Simulation {
    /// Initializes nodal data and subcell patches from a pointwise state.
    ///
    /// Without an explicit `mask`, cells are limited when any nodal or
    /// subcell-averaged α lies strictly inside `(eps, 1 − eps)`.
    pub fn new(
        grid: AmrGrid,
        cfg: SolverConfig,
        init: &(dyn Fn([f64; 2]) -> Result<State13> + Sync),
        mask: Option<Vec<bool>>,
        source: Option<SourceSpec>,
    ) -> Result<Self> {
        cfg.validate()?;
        let ops = DgOperators::new(cfg.degree, grid.factor)?;
        let sub = SubcellOperators::new(&ops.basis)?;
        let reg = cfg.reg();
        let m = ops.m;
        let nn = m * m;
        let ns = sub.ns;

        let per_cell: Vec<(Vec<f64>, Vec<f64>)> = (0..grid.len())
            .into_par_iter()
            .map(|c| -> Result<(Vec<f64>, Vec<f64>)> {
                let (lo, h) = grid.cell_box(c);
                let mut u = vec![0.0; nn * NVAR];
                for j in 0..m {
                    for i in 0..m {
                        let q = init([lo[0] + h[0] * ops.basis.nodes[i], lo[1] + h[1] * ops.basis.nodes[j]])?;
                        q.validate()?;
                        u[(j * m + i) * NVAR..][..NVAR].copy_from_slice(&q.0);
                    }
                }
                let patch = subcell_averages(&ops, ns, lo, h, init)?;
                Ok((u, patch))
            })
            .collect::<Result<_>>()?;

        let limited = match mask {
            Some(mk) => {
                if mk.len() != grid.len() {
                    return Err(Error::config("mask", "length differs from the number of cells"));
                }
                mk
            }
            None => {
                let alpha: Vec<Vec<f64>> = per_cell
                    .iter()
                    .map(|(u, p)| {
                        u.chunks_exact(NVAR)
                            .chain(p.chunks_exact(NVAR))
                            .map(|q| q[ALPHA])
                            .collect()
                    })
                    .collect();
                build_mask(&alpha, cfg.mask_eps)
            }
        };

        let mut u = Vec::with_capacity(grid.len() * nn * NVAR);
        let mut patches = Vec::with_capacity(grid.len());
        for (c, (uc, p)) in per_cell.into_iter().enumerate() {
            u.extend_from_slice(&uc);
            patches.push(if limited[c] { Some(p) } else { None });
        }
        let statics = (0..grid.len())
            .map(|c| CellStatic::new(&ops, &u[c * nn * NVAR..(c + 1) * nn * NVAR], grid.cell_box(c).1, &reg))
            .collect();

        let path = PathSpec::new(cfg.path_order)?;
        let mut sim = Simulation {
            ops,
            sub,
            cfg,
            u,
            statics,
            limited: limited.clone(),
            limited_cells: Vec::new(),
            source: None,
            t: 0.0,
            step: 0,
            flux: FluxSettings {
                kind: cfg.solver,
                path: path.clone(),
                reg,
            },
            fv: FvSettings {
                kind: cfg.solver,
                path,
                reg,
                cfl: 0.9,
            },
            picard: PicardSettings {
                tolerance: cfg.picard_tolerance,
            },
            dt_history: Vec::new(),
            grid,
        };
        sim.limited_cells = patches
            .into_iter()
            .enumerate()
            .map(|(c, p)| {
                p.map(|patch| LimitedCell {
                    halo: sim.halo_sources(c),
                    patch,
                })
            })
            .collect();
        if let Some(spec) = source {
            spec.validate()?;
            let cell = sim.grid.locate(spec.location)?;
            let (lo, h) = sim.grid.cell_box(cell);
            let xi = [(spec.location[0] - lo[0]) / h[0], (spec.location[1] - lo[1]) / h[1]];
            let rho = sim.ops.evaluate(sim.cell(cell), xi)[RHO];
            sim.source = Some((
                cell,
                CellSource {
                    spec,
                    weights: sim.ops.point_source_weights(xi, h),
                    rho,
                },
            ));
        }
        Ok(sim)
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.ops.nodes_per_cell()
    }

    /// Nodal data of one leaf.
    pub fn cell(&self, c: usize) -> &[f64] {
        let s = self.nodes_per_cell() * NVAR;
        &self.u[c * s..(c + 1) * s]
    }

    /// Subcell averages of a limited leaf.
    pub fn patch(&self, c: usize) -> Option<&[f64]> {
        self.limited_cells.get(c)?.as_ref().map(|l| l.patch.as_slice())
    }

    pub fn limited_count(&self) -> usize {
        self.limited.iter().filter(|&&l| l).count()
    }

    /// Evaluates the discrete solution at a physical point.
    pub fn evaluate(&self, x: [f64; 2]) -> Result<State13> {
        let c = self.grid.locate(x)?;
        let (lo, h) = self.grid.cell_box(c);
        Ok(self.ops.evaluate(self.cell(c), [(x[0] - lo[0]) / h[0], (x[1] - lo[1]) / h[1]]))
    }

    fn halo_sources(&self, c: usize) -> Vec<(usize, HaloSource)> {
        let ns = self.sub.ns;
        let m = self.ops.m;
        let p = ns + 2 * HALO;
        let (lo, h) = self.grid.cell_box(c);
        let hs = [h[0] / ns as f64, h[1] / ns as f64];
        let spec = &self.grid.spec;
        let level = self.grid.leaves[c].level;
        let mut out = Vec::new();
        for y in 0..p {
            for x in 0..p {
                let (ix, iy) = (x as i64 - HALO as i64, y as i64 - HALO as i64);
                if (0..ns as i64).contains(&ix) && (0..ns as i64).contains(&iy) {
                    continue;
                }
                let idx = [ix, iy];
                let mut center = [0.0; 2];
                let mut clamped = [ix, iy];
                let mut outside = false;
                for d in 0..2 {
                    let mut xc = lo[d] + (idx[d] as f64 + 0.5) * hs[d];
                    if xc < spec.lo[d] || xc > spec.hi[d] {
                        if spec.periodic[d] {
                            let len = spec.hi[d] - spec.lo[d];
                            xc -= len * ((xc - spec.lo[d]) / len).floor();
                        } else {
                            outside = true;
                            clamped[d] = idx[d].clamp(0, ns as i64 - 1);
                        }
                    }
                    center[d] = xc;
                }
                let entry = if outside {
                    let (cx, cy) = (clamped[0] as usize, clamped[1] as usize);
                    if (0..ns).contains(&cx) && (0..ns).contains(&cy) {
                        HaloSource::Own(cy * ns + cx)
                    } else {
                        // Corner beyond the box along one axis only: fall back to the
                        // neighbour value of the clamped position.
                        HaloSource::Own(cy.min(ns - 1) * ns + cx.min(ns - 1))
                    }
                } else {
                    let nb = self.grid.locate(center).expect("halo point inside the box");
                    if self.limited[nb] && self.grid.leaves[nb].level == level {
                        let (nlo, _) = self.grid.cell_box(nb);
                        let sx = (((center[0] - nlo[0]) / hs[0]).floor() as usize).min(ns - 1);
                        let sy = (((center[1] - nlo[1]) / hs[1]).floor() as usize).min(ns - 1);
                        HaloSource::Patch {
                            cell: nb,
                            sub: sy * ns + sx,
                        }
                    } else {
                        let mut contrib: Vec<(usize, Vec<f64>)> = Vec::new();
                        let (xs, ws) = (&self.ops.basis.nodes, &self.ops.basis.weights);
                        for b in 0..m {
                            for a in 0..m {
                                let pt = [
                                    center[0] + (xs[a] - 0.5) * hs[0],
                                    center[1] + (xs[b] - 0.5) * hs[1],
                                ];
                                let pt = [pt[0].clamp(spec.lo[0], spec.hi[0]), pt[1].clamp(spec.lo[1], spec.hi[1])];
                                let cell = self.grid.locate(pt).expect("quadrature point inside the box");
                                let (clo, ch) = self.grid.cell_box(cell);
                                let bx = self.ops.basis.eval(((pt[0] - clo[0]) / ch[0]).clamp(0.0, 1.0));
                                let by = self.ops.basis.eval(((pt[1] - clo[1]) / ch[1]).clamp(0.0, 1.0));
                                let pos = match contrib.iter().position(|(k, _)| *k == cell) {
                                    Some(p) => p,
                                    None => {
                                        contrib.push((cell, vec![0.0; m * m]));
                                        contrib.len() - 1
                                    }
                                };
                                let wq = ws[a] * ws[b];
                                for j in 0..m {
                                    for i in 0..m {
                                        contrib[pos].1[j * m + i] += wq * bx[i] * by[j];
                                    }
                                }
                            }
                        }
                        HaloSource::Poly(contrib)
                    }
                };
                out.push((y * p + x, entry));
            }
        }
        out
    }

    /// Largest regularized signal speed over all nodes and subcells.
    pub fn lambda_max(&self) -> f64 {
        let reg = self.cfg.reg();
        let nodal = self
            .u
            .par_chunks_exact(NVAR)
            .map(|q| {
                let mut s = State13::default();
                s.0.copy_from_slice(q);
                max_signal_speed(&s, &reg)
            })
            .reduce(|| 0.0, f64::max);
        self.limited_cells
            .iter()
            .flatten()
            .flat_map(|l| l.patch.chunks_exact(NVAR))
            .map(|q| {
                let mut s = State13::default();
                s.0.copy_from_slice(q);
                max_signal_speed(&s, &reg)
            })
            .fold(nodal, f64::max)
    }

    /// Admissible global time step.
    pub fn compute_dt(&self) -> Result<TimeStepInfo> {
        cfl_dt(self.cfg.cfl, 2, self.grid.h_min(), self.cfg.degree, self.lambda_max())
    }

    /// Advances the solution by one step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<StepStats> {
        let nn = self.nodes_per_cell();
        let stride = nn * NVAR;
        let m = self.ops.m;
        let t = self.t;
        let ncell = self.grid.len();

        // Predictor.
        let preds: Vec<(Prediction, usize, bool)> = (0..ncell)
            .into_par_iter()
            .map(|c| -> Result<(Prediction, usize, bool)> {
                let u = &self.u[c * stride..(c + 1) * stride];
                let src = self.source.as_ref().filter(|(sc, _)| *sc == c).map(|(_, s)| s);
                let quiet = src.is_none() && u.chunks_exact(NVAR).all(|q| q[..NEVOLVED].iter().all(|&v| v == 0.0));
                match predictor(&self.ops, &self.statics[c], u, dt, t, src, &self.picard) {
                    Ok(stc) => {
                        let sweeps = stc.sweeps;
                        Ok((finish_prediction(&self.ops, &self.statics[c], &stc, dt, t, src), sweeps, quiet))
                    }
                    Err(_) if self.limited[c] => Ok((frozen_prediction(&self.ops, u), 0, quiet)),
                    Err(_) => Err(Error::PredictorDivergence { cell: c }),
                }
            })
            .collect::<Result<_>>()?;

        // Face fluctuations.
        let faces = &self.grid.faces;
        let contribs: Vec<Option<FaceContribution>> = faces
            .par_iter()
            .map(|f| {
                let (pm, pp) = (&preds[f.minus], &preds[f.plus]);
                let frozen = |c: usize| self.limited[c] || self.statics[c].vacuum;
                if (frozen(f.minus) && frozen(f.plus)) || (pm.2 && pp.2) {
                    return None;
                }
                let axis = if f.axis == 0 { Axis::X } else { Axis::Y };
                Some(face_fluctuations(&self.ops, axis, &pm.0, &pp.0, f.sub, &self.flux))
            })
            .collect();
        let mut face_acc = vec![vec![0.0; nn * NEVOLVED]; ncell];
        let mut active = 0;
        for (f, fc) in faces.iter().zip(&contribs) {
            let Some(fc) = fc else { continue };
            active += 1;
            let (hi_face, lo_face) = if f.axis == 0 { (1, 0) } else { (3, 2) };
            if !self.limited[f.minus] && !self.statics[f.minus].vacuum {
                let h = self.statics[f.minus].h;
                scatter_face(&self.ops, h, hi_face, &fc.minus, dt, &mut face_acc[f.minus]);
            }
            if !self.limited[f.plus] && !self.statics[f.plus].vacuum {
                let h = self.statics[f.plus].h;
                scatter_face(&self.ops, h, lo_face, &fc.plus, dt, &mut face_acc[f.plus]);
            }
        }

        // Subcell update of limited cells.
        let ns = self.sub.ns;
        let updated: Vec<(usize, Vec<f64>)> = self
            .limited_cells
            .par_iter()
            .enumerate()
            .filter_map(|(c, l)| l.as_ref().map(|l| (c, l)))
            .map(|(c, l)| -> Result<(usize, Vec<f64>)> {
                let padded = self.gather_padded(c, l);
                let h = self.statics[c].h;
                let hs = [h[0] / ns as f64, h[1] / ns as f64];
                let src = self.fv_source(c, hs, t, dt);
                let interior = fv_step(&padded, [ns, ns], hs, dt, &self.fv, src)
                    .map_err(|_| Error::NonFinite { cell: c, step: self.step })?;
                Ok((c, interior))
            })
            .collect::<Result<_>>()?;
        for (c, mut patch) in updated {
            // Parameters and α stay at their initial subcell values.
            let old = &self.limited_cells[c].as_ref().expect("limited").patch;
            for (new, prev) in patch.chunks_exact_mut(NVAR).zip(old.chunks_exact(NVAR)) {
                new[NEVOLVED..].copy_from_slice(&prev[NEVOLVED..]);
            }
            let u = &mut self.u[c * stride..(c + 1) * stride];
            self.sub.reconstruct(&patch, 0..NEVOLVED, u);
            self.limited_cells[c].as_mut().expect("limited").patch = patch;
        }

        // Corrector on unlimited cells.
        // Pure vacuum cells carry no waves and keep αv = 0, so they are not
        // updated. Their α-weighted velocity would otherwise pick up the
        // interface source and feed back into the Roe average.
        let step = self.step;
        let limited = &self.limited;
        let statics = &self.statics;
        self.u
            .par_chunks_exact_mut(stride)
            .zip(preds.par_iter())
            .zip(face_acc.par_iter())
            .enumerate()
            .try_for_each(|(c, ((u, p), acc))| {
                if limited[c] || statics[c].vacuum {
                    return Ok(());
                }
                corrector(u, &p.0, acc);
                if u.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { cell: c, step });
                }
                Ok(())
            })?;

        let stats = StepStats {
            dt,
            max_sweeps: preds.iter().map(|p| p.1).max().unwrap_or(0),
            predicted_cells: preds.iter().filter(|p| p.1 > 0).count(),
            active_faces: active,
        };
        let _ = m;
        self.t += dt;
        self.step += 1;
        self.dt_history.push(dt);
        Ok(stats)
    }

    fn gather_padded(&self, c: usize, l: &LimitedCell) -> Vec<f64> {
        let ns = self.sub.ns;
        let p = ns + 2 * HALO;
        let nn = self.nodes_per_cell();
        let stride = nn * NVAR;
        let mut out = vec![0.0; p * p * NVAR];
        for y in 0..ns {
            for x in 0..ns {
                out[((y + HALO) * p + x + HALO) * NVAR..][..NVAR]
                    .copy_from_slice(&l.patch[(y * ns + x) * NVAR..][..NVAR]);
            }
        }
        for (k, src) in &l.halo {
            let dst = &mut out[k * NVAR..(k + 1) * NVAR];
            match src {
                HaloSource::Own(s) => dst.copy_from_slice(&l.patch[s * NVAR..][..NVAR]),
                HaloSource::Patch { cell, sub } => {
                    let np = &self.limited_cells[*cell].as_ref().expect("limited neighbour").patch;
                    dst.copy_from_slice(&np[sub * NVAR..][..NVAR]);
                }
                HaloSource::Poly(list) => {
                    for (cell, w) in list {
                        let u = &self.u[cell * stride..(cell + 1) * stride];
                        for (n, &wn) in w.iter().enumerate() {
                            if wn == 0.0 {
                                continue;
                            }
                            for v in 0..NVAR {
                                dst[v] += wn * u[n * NVAR + v];
                            }
                        }
                    }
                }
            }
        }
        let _ = c;
        out
    }

    fn fv_source(&self, c: usize, hs: [f64; 2], t: f64, dt: f64) -> Option<(usize, [f64; NEVOLVED])> {
        let (sc, src) = self.source.as_ref()?;
        if *sc != c {
            return None;
        }
        let ns = self.sub.ns;
        let (lo, _) = self.grid.cell_box(c);
        let sx = (((src.spec.location[0] - lo[0]) / hs[0]).floor() as usize).min(ns - 1);
        let sy = (((src.spec.location[1] - lo[1]) / hs[1]).floor() as usize).min(ns - 1);
        let amp = ricker(t + 0.5 * dt, &src.spec) / (src.rho * hs[0] * hs[1]);
        let mut v = [0.0; NEVOLVED];
        v[AU] = amp * src.spec.direction[0];
        v[AV] = amp * src.spec.direction[1];
        Some((sy * ns + sx, v))
    }

    /// Marches to `t_end`, clipping the last step to land on it exactly.
    ///
    /// `observer` is called after every accepted step.
    pub fn advance(
        &mut self,
        t_end: f64,
        mut observer: impl FnMut(&Simulation, &StepStats) -> Result<()>,
    ) -> Result<()> {
        let tol = 1e-12 * t_end.abs().max(1e-300);
        while t_end - self.t > tol {
            let info = self.compute_dt()?;
            let remaining = t_end - self.t;
            let last = info.dt >= remaining - tol;
            let dt = if last { remaining } else { info.dt };
            let stats = self.step(dt)?;
            if last {
                self.t = t_end;
            }
            observer(self, &stats)?;
        }
        Ok(())
    }
}

/// Subcell averages of a pointwise state by Gauss–Legendre quadrature.
fn subcell_averages(
    ops: &DgOperators,
    ns: usize,
    lo: [f64; 2],
    h: [f64; 2],
    init: &(dyn Fn([f64; 2]) -> Result<State13> + Sync),
) -> Result<Vec<f64>> {
    let (xs, ws) = (&ops.basis.nodes, &ops.basis.weights);
    let hs = [h[0] / ns as f64, h[1] / ns as f64];
    let mut out = vec![0.0; ns * ns * NVAR];
    for sy in 0..ns {
        for sx in 0..ns {
            let o = &mut out[(sy * ns + sx) * NVAR..][..NVAR];
            for (b, wb) in ws.iter().enumerate() {
                for (a, wa) in ws.iter().enumerate() {
                    let q = init([
                        lo[0] + hs[0] * (sx as f64 + xs[a]),
                        lo[1] + hs[1] * (sy as f64 + xs[b]),
                    ])?;
                    for v in 0..NVAR {
                        o[v] += wa * wb * q[v];
                    }
                }
            }
        }
    }
    Ok(out)
}
