//! Subcell finite-volume limiter.
//!
//! A limited cell carries `(2N+1)²` subcell averages. They are advanced by a
//! second-order MUSCL–Hancock scheme in fluctuation form with minmod slopes
//! and converted back to a degree-N polynomial by least squares.
//!
//! Material parameters and α are not reconstructed: limited cells keep their
//! geometric subcell averages and nodal values for the whole run.

use nalgebra::DMatrix;

use crate::basis::{gauss_legendre, Basis};
use crate::elastic::{Axis, QuasilinearMatrix};
use crate::error::{Error, Result};
use crate::riemann::{fluctuations, PathSpec, SolverKind};
use crate::state::*;

/// Default width of the band `(eps, 1 − eps)` that activates the limiter.
pub const DEFAULT_MASK_EPS: f64 = 1e-3;

/// Flags cells whose α values reach into the open band `(eps, 1 − eps)`.
pub fn build_mask(alpha_values: &[Vec<f64>], eps: f64) -> Vec<bool> {
    alpha_values
        .iter()
        .map(|vals| vals.iter().any(|&a| a > eps && a < 1.0 - eps))
        .collect()
}

/// Flag for one cell whose α varies continuously over `[amin, amax]`.
pub fn range_in_band(amin: f64, amax: f64, eps: f64) -> bool {
    amax > eps && amin < 1.0 - eps
}

/// 1D tensor factors of the subcell projection and reconstruction.
#[derive(Debug, Clone)]
pub struct SubcellOperators {
    pub m: usize,
    pub ns: usize,
    /// `p1[s·m + k]`: average of `ψ_k` over subcell `s`.
    pub p1: Vec<f64>,
    /// `r1[k·ns + s]`: least-squares inverse of `p1`.
    pub r1: Vec<f64>,
}

impl SubcellOperators {
    pub fn new(basis: &Basis) -> Result<Self> {
        let m = basis.len();
        let ns = 2 * basis.degree + 1;
        let (xq, wq) = gauss_legendre(m);
        let mut p = DMatrix::<f64>::zeros(ns, m);
        for s in 0..ns {
            for (x, w) in xq.iter().zip(&wq) {
                let v = basis.eval((s as f64 + x) / ns as f64);
                for k in 0..m {
                    p[(s, k)] += w * v[k];
                }
            }
        }
        let ptp = p.transpose() * &p;
        let inv = ptp
            .try_inverse()
            .ok_or(Error::NumericalDegeneracy { residual: f64::NAN })?;
        let r = inv * p.transpose();
        Ok(SubcellOperators {
            m,
            ns,
            p1: (0..ns * m).map(|i| p[(i / m, i % m)]).collect(),
            r1: (0..m * ns).map(|i| r[(i / ns, i % ns)]).collect(),
        })
    }

    fn tensor(
        &self,
        a: &[f64],
        rows: usize,
        cols: usize,
        input: &[f64],
        comps: std::ops::Range<usize>,
        out: &mut [f64],
    ) {
        // out[(J, I)] = Σ_j Σ_i A[J, j] A[I, i] in[(j, i)] for the given components.
        let mut tmp = vec![0.0; cols * rows * NVAR];
        for j in 0..cols {
            for ii in 0..rows {
                for i in 0..cols {
                    let c = a[ii * cols + i];
                    for v in comps.clone() {
                        tmp[(j * rows + ii) * NVAR + v] += c * input[(j * cols + i) * NVAR + v];
                    }
                }
            }
        }
        for jj in 0..rows {
            for ii in 0..rows {
                for v in comps.clone() {
                    out[(jj * rows + ii) * NVAR + v] = 0.0;
                }
                for j in 0..cols {
                    let c = a[jj * cols + j];
                    for v in comps.clone() {
                        out[(jj * rows + ii) * NVAR + v] += c * tmp[(j * rows + ii) * NVAR + v];
                    }
                }
            }
        }
    }

    /// Exact subcell averages of a nodal polynomial (components in `comps`).
    pub fn project(&self, u: &[f64], comps: std::ops::Range<usize>, patch: &mut [f64]) {
        self.tensor(&self.p1, self.ns, self.m, u, comps, patch);
    }

    /// Least-squares polynomial fit of subcell averages (components in `comps`).
    pub fn reconstruct(&self, patch: &[f64], comps: std::ops::Range<usize>, u: &mut [f64]) {
        self.tensor(&self.r1, self.m, self.ns, patch, comps, u);
    }
}

/// Free-function form of [`SubcellOperators::project`] for all components.
pub fn project_to_subcells(ops: &SubcellOperators, u: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; ops.ns * ops.ns * NVAR];
    ops.project(u, 0..NVAR, &mut p);
    p
}

/// Free-function form of [`SubcellOperators::reconstruct`] for all components.
pub fn reconstruct_dg(ops: &SubcellOperators, patch: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; ops.m * ops.m * NVAR];
    ops.reconstruct(patch, 0..NVAR, &mut u);
    u
}

/// Number of halo layers required by [`fv_step`].
pub const HALO: usize = 2;

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Settings of the subcell scheme.
#[derive(Debug, Clone)]
pub struct FvSettings {
    pub kind: SolverKind,
    pub path: PathSpec,
    pub reg: RegularizationParams,
    /// Largest admissible `dt Σ_d λ/h_d` per sub-step.
    pub cfl: f64,
}

impl Default for FvSettings {
    fn default() -> Self {
        FvSettings {
            kind: SolverKind::Godunov,
            path: PathSpec::default(),
            reg: RegularizationParams::default(),
            cfl: 0.9,
        }
    }
}

/// Advances the interior of a padded patch by `dt`.
///
/// `padded` holds `(nx + 4) × (ny + 4)` subcell states (x fastest) including a
/// two-layer halo that stays frozen during internal sub-steps. `source`
/// optionally adds a rate `(subcell index, vector)` to one interior subcell.
/// Returns the updated interior as `nx × ny` states.
pub fn fv_step(
    padded: &[f64],
    dims: [usize; 2],
    hs: [f64; 2],
    dt: f64,
    settings: &FvSettings,
    source: Option<(usize, [f64; NEVOLVED])>,
) -> Result<Vec<f64>> {
    let (nx, ny) = (dims[0], dims[1]);
    let px = nx + 2 * HALO;
    let py = ny + 2 * HALO;
    let mut work = padded.to_vec();
    let smax = work
        .chunks_exact(NVAR)
        .map(|q| {
            let mut s = State13::default();
            s.0.copy_from_slice(q);
            max_signal_speed(&s, &settings.reg)
        })
        .fold(0.0f64, f64::max);
    let courant = dt * smax * (1.0 / hs[0] + 1.0 / hs[1]);
    let nsub = ((courant / settings.cfl).ceil() as usize).max(1);
    let dts = dt / nsub as f64;

    let st = |buf: &[f64], x: usize, y: usize| -> State13 {
        let mut s = State13::default();
        s.0.copy_from_slice(&buf[(y * px + x) * NVAR..][..NVAR]);
        s
    };

    for _ in 0..nsub {
        // Limited slopes and half-step states on all cells with a full stencil.
        let mut sx = vec![[0.0; NVAR]; px * py];
        let mut sy = vec![[0.0; NVAR]; px * py];
        let mut half = vec![State13::default(); px * py];
        for y in 1..py - 1 {
            for x in 1..px - 1 {
                let c = st(&work, x, y);
                let (w, e) = (st(&work, x - 1, y), st(&work, x + 1, y));
                let (s, n) = (st(&work, x, y - 1), st(&work, x, y + 1));
                let k = y * px + x;
                for v in 0..NEVOLVED {
                    sx[k][v] = minmod(c[v] - w[v], e[v] - c[v]);
                    sy[k][v] = minmod(c[v] - s[v], n[v] - c[v]);
                }
                let bx = QuasilinearMatrix::from_state(&c, Axis::X, &settings.reg).apply(&sx[k]);
                let by = QuasilinearMatrix::from_state(&c, Axis::Y, &settings.reg).apply(&sy[k]);
                let mut h = c;
                for v in 0..NEVOLVED {
                    h[v] -= 0.5 * dts * (bx[v] / hs[0] + by[v] / hs[1]);
                }
                half[k] = h;
            }
        }
        let edge = |k: usize, slope: &[f64; NVAR], sign: f64| -> State13 {
            let mut q = half[k];
            for v in 0..NEVOLVED {
                q[v] += sign * 0.5 * slope[v];
            }
            q
        };
        let mut next = work.clone();
        let mut acc = vec![[0.0; NEVOLVED]; nx * ny];
        // x faces between (x, y) and (x + 1, y).
        for y in HALO..HALO + ny {
            for x in HALO - 1..HALO + nx {
                let (kl, kr) = (y * px + x, y * px + x + 1);
                let f = fluctuations(
                    settings.kind,
                    &edge(kl, &sx[kl], 1.0),
                    &edge(kr, &sx[kr], -1.0),
                    Axis::X,
                    &settings.path,
                    &settings.reg,
                );
                if x >= HALO {
                    let a = &mut acc[(y - HALO) * nx + x - HALO];
                    for v in 0..NEVOLVED {
                        a[v] += f.d_minus[v] / hs[0];
                    }
                }
                if x + 1 < HALO + nx {
                    let a = &mut acc[(y - HALO) * nx + x + 1 - HALO];
                    for v in 0..NEVOLVED {
                        a[v] += f.d_plus[v] / hs[0];
                    }
                }
            }
        }
        for y in HALO - 1..HALO + ny {
            for x in HALO..HALO + nx {
                let (kb, kt) = (y * px + x, (y + 1) * px + x);
                let f = fluctuations(
                    settings.kind,
                    &edge(kb, &sy[kb], 1.0),
                    &edge(kt, &sy[kt], -1.0),
                    Axis::Y,
                    &settings.path,
                    &settings.reg,
                );
                if y >= HALO {
                    let a = &mut acc[(y - HALO) * nx + x - HALO];
                    for v in 0..NEVOLVED {
                        a[v] += f.d_minus[v] / hs[1];
                    }
                }
                if y + 1 < HALO + ny {
                    let a = &mut acc[(y + 1 - HALO) * nx + x - HALO];
                    for v in 0..NEVOLVED {
                        a[v] += f.d_plus[v] / hs[1];
                    }
                }
            }
        }
        for y in 0..ny {
            for x in 0..nx {
                let k = (y + HALO) * px + x + HALO;
                // Vacuum subcells are frozen like vacuum DG cells.
                if work[k * NVAR + ALPHA] == 0.0 {
                    continue;
                }
                // Path integral across the reconstructed profile inside the subcell.
                let bx = QuasilinearMatrix::from_state(&half[k], Axis::X, &settings.reg).apply(&sx[k]);
                let by = QuasilinearMatrix::from_state(&half[k], Axis::Y, &settings.reg).apply(&sy[k]);
                let a = &acc[y * nx + x];
                let idx = y * nx + x;
                for v in 0..NEVOLVED {
                    let mut rate = a[v] + bx[v] / hs[0] + by[v] / hs[1];
                    if let Some((s, vec)) = &source {
                        if *s == idx {
                            rate -= vec[v];
                        }
                    }
                    let val = work[k * NVAR + v] - dts * rate;
                    if !val.is_finite() {
                        return Err(Error::NonFinite { cell: idx, step: 0 });
                    }
                    next[k * NVAR + v] = val;
                }
            }
        }
        work = next;
    }
    let mut out = vec![0.0; nx * ny * NVAR];
    for y in 0..ny {
        for x in 0..nx {
            let k = (y + HALO) * px + x + HALO;
            out[(y * nx + x) * NVAR..][..NVAR].copy_from_slice(&work[k * NVAR..][..NVAR]);
        }
    }
    Ok(out)
}
