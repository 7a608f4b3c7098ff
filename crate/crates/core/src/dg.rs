//! Element kernels of the ADER-DG scheme on rectangular cells.
//!
//! Cell data are nodal values at the tensor Gauss–Legendre points, stored as
//! `u[(j·m + i)·NVAR + c]` with `m = N + 1`, `i` along x and `j` along y.
//! The space-time predictor solves the element-local weak problem in time
//! with upwinding from `t^n` by Picard iteration; the corrector combines the
//! time-integrated volume term with path-conservative face fluctuations.

use nalgebra::DMatrix;

use crate::basis::{build_basis, Basis};
use crate::elastic::{apply_point_source, Axis, PointCoefficients, SourceSpec};
use crate::error::{Error, Result};
use crate::riemann::{fluctuations, PathSpec, SolverKind};
use crate::state::*;

/// Tables shared by all elements of a given degree.
#[derive(Debug, Clone)]
pub struct DgOperators {
    pub basis: Basis,
    pub m: usize,
    /// Time-step propagation matrix `G = K⁻¹ diag(w)` (row-major, m×m).
    pub g_time: Vec<f64>,
    /// Interpolation from a coarse face onto the nodes of sub-face `k`:
    /// `sub_interp[k][q·m + j] = ψ_j((k + x_q)/r)`.
    pub sub_interp: Vec<Vec<f64>>,
    pub factor: usize,
}

impl DgOperators {
    pub fn new(degree: usize, factor: usize) -> Result<Self> {
        let basis = build_basis(degree)?;
        let m = basis.len();
        let mut k1 = DMatrix::<f64>::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                k1[(a, b)] = basis.right[a] * basis.right[b] - basis.weights[b] * basis.dmat[b][a];
            }
        }
        let kinv = k1
            .try_inverse()
            .ok_or(Error::NumericalDegeneracy { residual: f64::NAN })?;
        let mut g_time = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                g_time[a * m + b] = kinv[(a, b)] * basis.weights[b];
            }
        }
        let sub_interp = (0..factor)
            .map(|k| {
                let pts: Vec<f64> = basis.nodes.iter().map(|x| (k as f64 + x) / factor as f64).collect();
                basis.interpolation_matrix(&pts).into_iter().flatten().collect()
            })
            .collect();
        Ok(DgOperators {
            basis,
            m,
            g_time,
            sub_interp,
            factor,
        })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.m * self.m
    }

    /// Evaluates all components of a nodal polynomial at reference point `xi`.
    pub fn evaluate(&self, u: &[f64], xi: [f64; 2]) -> State13 {
        let bx = self.basis.eval(xi[0]);
        let by = self.basis.eval(xi[1]);
        let mut out = [0.0; NVAR];
        for (j, wy) in by.iter().enumerate() {
            for (i, wx) in bx.iter().enumerate() {
                let w = wx * wy;
                if w == 0.0 {
                    continue;
                }
                let node = &u[(j * self.m + i) * NVAR..][..NVAR];
                for c in 0..NVAR {
                    out[c] += w * node[c];
                }
            }
        }
        State13(out)
    }

    /// Nodal representation `φ_k(x_s) / (|T| w_k)` of a point source in a cell.
    pub fn point_source_weights(&self, xi: [f64; 2], h: [f64; 2]) -> Vec<f64> {
        let bx = self.basis.eval(xi[0]);
        let by = self.basis.eval(xi[1]);
        let w = &self.basis.weights;
        let mut out = vec![0.0; self.nodes_per_cell()];
        for j in 0..self.m {
            for i in 0..self.m {
                out[j * self.m + i] = bx[i] * by[j] / (h[0] * h[1] * w[i] * w[j]);
            }
        }
        out
    }
}

/// Static data of one cell: geometry and material coefficients at its nodes.
#[derive(Debug, Clone)]
pub struct CellStatic {
    pub h: [f64; 2],
    pub coeffs: Vec<PointCoefficients>,
    /// `(∂x α, ∂y α)` at the nodes.
    pub dalpha: Vec<[f64; 2]>,
    /// α vanishes at every node.
    pub vacuum: bool,
}

impl CellStatic {
    pub fn new(ops: &DgOperators, u: &[f64], h: [f64; 2], reg: &RegularizationParams) -> Self {
        let m = ops.m;
        let nn = m * m;
        let d = &ops.basis.dmat;
        let mut coeffs = Vec::with_capacity(nn);
        let mut dalpha = Vec::with_capacity(nn);
        let mut vacuum = true;
        for j in 0..m {
            for i in 0..m {
                let n = j * m + i;
                let mut q = State13::default();
                q.0.copy_from_slice(&u[n * NVAR..(n + 1) * NVAR]);
                coeffs.push(PointCoefficients::new(&q, reg));
                if q[ALPHA] != 0.0 {
                    vacuum = false;
                }
                let mut gx = 0.0;
                let mut gy = 0.0;
                for l in 0..m {
                    gx += d[i][l] * u[(j * m + l) * NVAR + ALPHA];
                    gy += d[j][l] * u[(l * m + i) * NVAR + ALPHA];
                }
                dalpha.push([gx / h[0], gy / h[1]]);
            }
        }
        CellStatic {
            h,
            coeffs,
            dalpha,
            vacuum,
        }
    }
}

/// Point source attached to one cell.
#[derive(Debug, Clone)]
pub struct CellSource {
    pub spec: SourceSpec,
    pub weights: Vec<f64>,
    pub rho: f64,
}

/// Face traces and time-integrated volume term of one predicted cell.
///
/// Trace `f` (0: x-low, 1: x-high, 2: y-low, 3: y-high) is stored as
/// `[time node a][tangential node q][component]`.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub traces: [Vec<f64>; 4],
    /// `dt Σ_a w_a (B∇q − S)` at the nodes, evolved components only.
    pub volume: Vec<f64>,
}

impl Prediction {
    pub fn trace(&self, face: usize, a: usize, q: usize, m: usize) -> &[f64] {
        &self.traces[face][(a * m + q) * NVAR..][..NVAR]
    }
}

/// Picard stopping settings.
#[derive(Debug, Clone, Copy)]
pub struct PicardSettings {
    pub tolerance: f64,
}

impl Default for PicardSettings {
    fn default() -> Self {
        PicardSettings { tolerance: 1e-12 }
    }
}

/// Residual `S − B(q)∇q` at all nodes of one time slice (evolved rows).
fn residual_slice(
    ops: &DgOperators,
    st: &CellStatic,
    q: &[f64],
    out: &mut [f64],
) {
    let m = ops.m;
    let d = &ops.basis.dmat;
    let (hxi, hyi) = (1.0 / st.h[0], 1.0 / st.h[1]);
    for j in 0..m {
        for i in 0..m {
            let n = j * m + i;
            let mut dx = [0.0; NEVOLVED];
            let mut dy = [0.0; NEVOLVED];
            for l in 0..m {
                let (cx, cy) = (d[i][l] * hxi, d[j][l] * hyi);
                let qx = &q[(j * m + l) * NVAR..];
                let qy = &q[(l * m + i) * NVAR..];
                for c in 0..NEVOLVED {
                    dx[c] += cx * qx[c];
                    dy[c] += cy * qy[c];
                }
            }
            let mut b = [0.0; NVAR];
            let qn = &q[n * NVAR..(n + 1) * NVAR];
            let pc = &st.coeffs[n];
            pc.add_ncp(Axis::X, qn, &dx, st.dalpha[n][0], &mut b);
            pc.add_ncp(Axis::Y, qn, &dy, st.dalpha[n][1], &mut b);
            let o = &mut out[n * NEVOLVED..(n + 1) * NEVOLVED];
            for c in 0..NEVOLVED {
                o[c] = -b[c];
            }
        }
    }
}

fn add_source(ops: &DgOperators, src: &CellSource, t: f64, out: &mut [f64]) {
    let nn = ops.nodes_per_cell();
    let mut full = vec![0.0; nn * NVAR];
    apply_point_source(&mut full, &src.weights, &src.spec, src.rho, t);
    for n in 0..nn {
        for c in [AU, AV] {
            out[n * NEVOLVED + c] += full[n * NVAR + c];
        }
    }
}

/// Result of the space-time predictor before trace extraction.
#[derive(Debug, Clone)]
pub struct SpaceTimeCoeffs {
    /// `[time node a][space node n][component]`.
    pub q: Vec<f64>,
    pub sweeps: usize,
}

/// Solves the element-local space-time problem on `[t, t + dt]`.
pub fn predictor(
    ops: &DgOperators,
    st: &CellStatic,
    u: &[f64],
    dt: f64,
    t: f64,
    source: Option<&CellSource>,
    settings: &PicardSettings,
) -> std::result::Result<SpaceTimeCoeffs, usize> {
    let m = ops.m;
    let nn = m * m;
    let slab = nn * NVAR;
    let mut q: Vec<f64> = Vec::with_capacity(m * slab);
    for _ in 0..m {
        q.extend_from_slice(u);
    }
    let quiet = u
        .chunks_exact(NVAR)
        .all(|n| n[..NEVOLVED].iter().all(|&v| v == 0.0));
    if source.is_none() && (st.vacuum || quiet) {
        return Ok(SpaceTimeCoeffs { q, sweeps: 0 });
    }
    let mut r = vec![0.0; m * nn * NEVOLVED];
    let scale = u
        .chunks_exact(NVAR)
        .flat_map(|n| n[..NEVOLVED].iter())
        .fold(0.0f64, |a, &v| a.max(v.abs()));
    let base_sweeps = m + 1;
    let cap = 2 * base_sweeps;
    let mut prev_inc = f64::INFINITY;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        for a in 0..m {
            let rs = &mut r[a * nn * NEVOLVED..(a + 1) * nn * NEVOLVED];
            residual_slice(ops, st, &q[a * slab..(a + 1) * slab], rs);
            if let Some(src) = source {
                add_source(ops, src, t + ops.basis.nodes[a] * dt, rs);
            }
        }
        let mut inc = 0.0f64;
        let mut qmax = scale;
        for a in 0..m {
            let g = &ops.g_time[a * m..(a + 1) * m];
            for n in 0..nn {
                for c in 0..NEVOLVED {
                    let mut acc = 0.0;
                    for b in 0..m {
                        acc += g[b] * r[(b * nn + n) * NEVOLVED + c];
                    }
                    let new = u[n * NVAR + c] + dt * acc;
                    let idx = a * slab + n * NVAR + c;
                    inc = inc.max((new - q[idx]).abs());
                    qmax = qmax.max(new.abs());
                    q[idx] = new;
                }
            }
        }
        if !inc.is_finite() {
            return Err(sweeps);
        }
        let converged = inc <= settings.tolerance * qmax.max(f64::MIN_POSITIVE);
        let contracting = inc < prev_inc;
        if converged || (sweeps >= base_sweeps && contracting) {
            break;
        }
        if sweeps >= cap {
            return Err(sweeps);
        }
        prev_inc = inc;
    }
    Ok(SpaceTimeCoeffs { q, sweeps })
}

/// Extracts face traces and the time-integrated volume term.
pub fn finish_prediction(
    ops: &DgOperators,
    st: &CellStatic,
    stc: &SpaceTimeCoeffs,
    dt: f64,
    t: f64,
    source: Option<&CellSource>,
) -> Prediction {
    let m = ops.m;
    let nn = m * m;
    let slab = nn * NVAR;
    let w = &ops.basis.weights;
    let mut volume = vec![0.0; nn * NEVOLVED];
    if stc.sweeps > 0 || source.is_some() {
        let mut r = vec![0.0; nn * NEVOLVED];
        for a in 0..m {
            residual_slice(ops, st, &stc.q[a * slab..(a + 1) * slab], &mut r);
            if let Some(src) = source {
                add_source(ops, src, t + ops.basis.nodes[a] * dt, &mut r);
            }
            for (v, x) in volume.iter_mut().zip(&r) {
                *v -= dt * w[a] * x;
            }
        }
    }
    let (left, right) = (&ops.basis.left, &ops.basis.right);
    let mut traces: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; m * m * NVAR]);
    for a in 0..m {
        let qa = &stc.q[a * slab..(a + 1) * slab];
        for tq in 0..m {
            for l in 0..m {
                let xn = &qa[(tq * m + l) * NVAR..][..NVAR];
                let yn = &qa[(l * m + tq) * NVAR..][..NVAR];
                let o = (a * m + tq) * NVAR;
                for c in 0..NVAR {
                    traces[0][o + c] += left[l] * xn[c];
                    traces[1][o + c] += right[l] * xn[c];
                    traces[2][o + c] += left[l] * yn[c];
                    traces[3][o + c] += right[l] * yn[c];
                }
            }
        }
    }
    Prediction { traces, volume }
}

/// Constant-in-time prediction used when the Picard iteration is bypassed.
pub fn frozen_prediction(ops: &DgOperators, u: &[f64]) -> Prediction {
    let m = ops.m;
    let stc = SpaceTimeCoeffs {
        q: u.repeat(m),
        sweeps: 0,
    };
    let st = CellStatic {
        h: [1.0, 1.0],
        coeffs: vec![],
        dalpha: vec![],
        vacuum: true,
    };
    finish_prediction(ops, &st, &stc, 0.0, 0.0, None)
}

/// Tangential projection of face fluctuations onto one side's basis:
/// `P[j][c] = (scale / w_j) Σ_q w_q ψ_j(η_q) D̄_q[c]`.
#[derive(Debug, Clone)]
pub struct FaceContribution {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

/// Shared numerical settings of face computations.
#[derive(Debug, Clone)]
pub struct FluxSettings {
    pub kind: SolverKind,
    pub path: PathSpec,
    pub reg: RegularizationParams,
}

/// Computes the time-integrated fluctuations on one (sub-)face.
///
/// `minus_trace` and `plus_trace` are the face traces facing each other;
/// `sub` describes sub-face placement for non-conforming faces.
pub fn face_fluctuations(
    ops: &DgOperators,
    axis: Axis,
    minus: &Prediction,
    plus: &Prediction,
    sub: Option<crate::amr::SubFace>,
    flux: &FluxSettings,
) -> FaceContribution {
    let m = ops.m;
    let w = &ops.basis.weights;
    // The minus cell contributes its high trace, the plus cell its low trace.
    let (fm_idx, fp_idx) = match axis {
        Axis::X => (1, 0),
        _ => (3, 2),
    };
    let interp = |trace: &[f64], a: usize, q: usize, coarse: Option<usize>| -> State13 {
        let mut s = [0.0; NVAR];
        match coarse {
            None => s.copy_from_slice(&trace[(a * m + q) * NVAR..][..NVAR]),
            Some(k) => {
                let row = &ops.sub_interp[k][q * m..(q + 1) * m];
                for (j, &c) in row.iter().enumerate() {
                    let src = &trace[(a * m + j) * NVAR..][..NVAR];
                    for v in 0..NVAR {
                        s[v] += c * src[v];
                    }
                }
            }
        }
        State13(s)
    };
    let (coarse_minus, coarse_plus) = match sub {
        None => (None, None),
        Some(sf) if sf.fine_is_minus => (None, Some(sf.k)),
        Some(sf) => (Some(sf.k), None),
    };
    // Time-averaged fluctuations at the quadrature points of the face.
    let mut dm = vec![0.0; m * NEVOLVED];
    let mut dp = vec![0.0; m * NEVOLVED];
    for a in 0..m {
        for q in 0..m {
            let ql = interp(&minus.traces[fm_idx], a, q, coarse_minus);
            let qr = interp(&plus.traces[fp_idx], a, q, coarse_plus);
            let f = fluctuations(flux.kind, &ql, &qr, axis, &flux.path, &flux.reg);
            for c in 0..NEVOLVED {
                dm[q * NEVOLVED + c] += w[a] * f.d_minus[c];
                dp[q * NEVOLVED + c] += w[a] * f.d_plus[c];
            }
        }
    }
    let project = |d: &[f64], coarse: Option<usize>| -> Vec<f64> {
        let mut out = vec![0.0; m * NEVOLVED];
        match coarse {
            None => out.copy_from_slice(d),
            Some(k) => {
                let r = ops.factor as f64;
                for j in 0..m {
                    for q in 0..m {
                        let c = w[q] * ops.sub_interp[k][q * m + j] / (r * w[j]);
                        for v in 0..NEVOLVED {
                            out[j * NEVOLVED + v] += c * d[q * NEVOLVED + v];
                        }
                    }
                }
            }
        }
        out
    };
    FaceContribution {
        minus: project(&dm, coarse_minus),
        plus: project(&dp, coarse_plus),
    }
}

/// Adds a face contribution to a cell's accumulated update.
///
/// `face` is the local face index (0: x-low, 1: x-high, 2: y-low, 3: y-high).
pub fn scatter_face(ops: &DgOperators, h: [f64; 2], face: usize, p: &[f64], dt: f64, acc: &mut [f64]) {
    let m = ops.m;
    let w = &ops.basis.weights;
    let (axis, ends) = match face {
        0 => (0, &ops.basis.left),
        1 => (0, &ops.basis.right),
        2 => (1, &ops.basis.left),
        _ => (1, &ops.basis.right),
    };
    for j in 0..m {
        for i in 0..m {
            let (normal, tang) = if axis == 0 { (i, j) } else { (j, i) };
            let c = dt * ends[normal] / (w[normal] * h[axis]);
            if c == 0.0 {
                continue;
            }
            let n = j * m + i;
            for v in 0..NEVOLVED {
                acc[n * NEVOLVED + v] += c * p[tang * NEVOLVED + v];
            }
        }
    }
}

/// Applies the corrector: `u ← u − volume − faces`.
pub fn corrector(u: &mut [f64], pred: &Prediction, face_acc: &[f64]) {
    for (n, node) in u.chunks_exact_mut(NVAR).enumerate() {
        for c in 0..NEVOLVED {
            node[c] -= pred.volume[n * NEVOLVED + c] + face_acc[n * NEVOLVED + c];
        }
    }
}

/// Time step `cfl/d · h_min/(2N+1) / λmax`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeStepInfo {
    pub dt: f64,
    pub cfl: f64,
    pub lambda_max: f64,
    pub h_min: f64,
}

/// Closed-form admissible time step.
pub fn cfl_dt(cfl: f64, dims: usize, h_min: f64, degree: usize, lambda_max: f64) -> Result<TimeStepInfo> {
    if !(lambda_max > 0.0) {
        return Err(Error::NoSignal);
    }
    Ok(TimeStepInfo {
        dt: cfl / dims as f64 * h_min / (2 * degree + 1) as f64 / lambda_max,
        cfl,
        lambda_max,
        h_min,
    })
}
