//! Path-conservative interface operators.
//!
//! States are connected by the straight segment `ψ(s) = qL + s (qR − qL)`.
//! The Roe matrix `B̃ = ∫ B(ψ(s)) ds` is evaluated with Gauss–Legendre
//! quadrature and keeps the sparsity pattern of `B`, so fluctuations are
//! computed in sparse form.
//!
//! The spectrum of every `B̃` is `{±c̃p, ±c̃s, 0}` with
//! `c̃p² = B̃[σnn,vn]·B̃[vn,σnn]` and `c̃s² = B̃[σnt,vt]·B̃[vt,σnt]`. Therefore
//! `|B̃|` equals the even polynomial `a B̃² + b B̃⁴` that interpolates `|x|` at
//! those eigenvalues, and no eigendecomposition is needed per face. The
//! dense eigen-projector path in [`linearized_rp`] is used for the exact
//! interface states.

use crate::basis::gauss_legendre;
use crate::elastic::{Axis, Matrix13, QuasilinearMatrix};
use crate::error::{Error, Result};
use crate::state::*;

/// Quadrature rule along the segment path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec::new(3).expect("three points are valid")
    }
}

impl PathSpec {
    /// Gauss–Legendre rule with `order ≥ 3` points on s ∈ [0, 1].
    pub fn new(order: usize) -> Result<Self> {
        if order < 3 {
            return Err(Error::config("path.order", "at least 3 quadrature points are required"));
        }
        let (nodes, weights) = gauss_legendre(order);
        Ok(PathSpec { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// Left- and right-going fluctuations at an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fluctuations {
    pub d_minus: [f64; NVAR],
    pub d_plus: [f64; NVAR],
    pub max_signal: f64,
}

impl Fluctuations {
    pub const ZERO: Fluctuations = Fluctuations {
        d_minus: [0.0; NVAR],
        d_plus: [0.0; NVAR],
        max_signal: 0.0,
    };
}

/// Interface flux family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Roe-type splitting with `|B̃|`.
    #[default]
    Godunov,
    /// Local Lax–Friedrichs splitting.
    Rusanov,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "godunov" => Ok(SolverKind::Godunov),
            "rusanov" => Ok(SolverKind::Rusanov),
            other => Err(Error::config("solver", format!("unknown solver `{other}`"))),
        }
    }
}

/// Sparse Roe matrix along the segment path.
pub fn roe_sparse(
    ql: &State13,
    qr: &State13,
    axis: Axis,
    path: &PathSpec,
    reg: &RegularizationParams,
) -> QuasilinearMatrix {
    if ql == qr {
        return QuasilinearMatrix::from_state(ql, axis, reg);
    }
    let mut acc = QuasilinearMatrix::zero(axis);
    for (&s, &w) in path.nodes.iter().zip(&path.weights) {
        let mut q = *ql;
        for i in 0..NVAR {
            q[i] += s * (qr[i] - ql[i]);
        }
        let b = QuasilinearMatrix::from_state(&q, axis, reg);
        for (a, v) in acc.vals.iter_mut().zip(b.vals) {
            *a += w * v;
        }
    }
    acc
}

/// Dense generalized Roe matrix `B̃ = Σ_g w_g B(ψ(s_g))`.
pub fn roe_matrix(
    ql: &State13,
    qr: &State13,
    axis: usize,
    path: &PathSpec,
    reg: &RegularizationParams,
) -> Result<Matrix13> {
    let axis = Axis::from_index(axis)?;
    Ok(roe_sparse(ql, qr, axis, path, reg).to_dense())
}

/// Applies `|B̃|` to `v` through the interpolating polynomial `a B̃² + b B̃⁴`.
pub fn abs_apply(b: &QuasilinearMatrix, v: &[f64; NVAR]) -> [f64; NVAR] {
    let cp = b.p_speed_sq().sqrt();
    let cs = b.s_speed_sq().sqrt();
    if cp == 0.0 {
        return [0.0; NVAR];
    }
    let b2 = b.apply(&b.apply(v));
    if cs < 1e-8 * cp {
        // The s-waves degenerate to the null space.
        return b2.map(|x| x / cp);
    }
    let bc = -1.0 / (cp * cs * (cp + cs));
    let ac = 1.0 / cs - bc * cs * cs;
    let b4 = b.apply(&b.apply(&b2));
    std::array::from_fn(|i| ac * b2[i] + bc * b4[i])
}

fn both_vacuum(ql: &State13, qr: &State13, reg: &RegularizationParams) -> bool {
    ql.alpha() <= reg.eps0 && qr.alpha() <= reg.eps0
}

fn jump(ql: &State13, qr: &State13) -> [f64; NVAR] {
    std::array::from_fn(|i| qr[i] - ql[i])
}

/// Roe-type fluctuations `D± = ½(B̃ ± |B̃|)(qR − qL)`.
pub fn fluctuations_godunov(
    ql: &State13,
    qr: &State13,
    axis: Axis,
    path: &PathSpec,
    reg: &RegularizationParams,
) -> Fluctuations {
    if both_vacuum(ql, qr, reg) {
        return Fluctuations::ZERO;
    }
    let b = roe_sparse(ql, qr, axis, path, reg);
    let dq = jump(ql, qr);
    let bd = b.apply(&dq);
    let ad = abs_apply(&b, &dq);
    Fluctuations {
        d_minus: std::array::from_fn(|i| 0.5 * (bd[i] - ad[i])),
        d_plus: std::array::from_fn(|i| 0.5 * (bd[i] + ad[i])),
        max_signal: b.p_speed_sq().sqrt(),
    }
}

/// Rusanov fluctuations `D± = ½(B̃ ± s_max I)(qR − qL)`.
///
/// The dissipation acts on the evolved components only, so that stationary
/// jumps of the material and of α produce no fluctuation.
pub fn fluctuations_rusanov(
    ql: &State13,
    qr: &State13,
    axis: Axis,
    path: &PathSpec,
    reg: &RegularizationParams,
) -> Fluctuations {
    if both_vacuum(ql, qr, reg) {
        return Fluctuations::ZERO;
    }
    let b = roe_sparse(ql, qr, axis, path, reg);
    let smax = max_signal_speed(ql, reg).max(max_signal_speed(qr, reg));
    let dq = jump(ql, qr);
    let bd = b.apply(&dq);
    let visc = |i: usize| if i < NEVOLVED { smax * dq[i] } else { 0.0 };
    Fluctuations {
        d_minus: std::array::from_fn(|i| 0.5 * (bd[i] - visc(i))),
        d_plus: std::array::from_fn(|i| 0.5 * (bd[i] + visc(i))),
        max_signal: smax,
    }
}

/// Dispatches to the selected flux family.
pub fn fluctuations(
    kind: SolverKind,
    ql: &State13,
    qr: &State13,
    axis: Axis,
    path: &PathSpec,
    reg: &RegularizationParams,
) -> Fluctuations {
    match kind {
        SolverKind::Godunov => fluctuations_godunov(ql, qr, axis, path, reg),
        SolverKind::Rusanov => fluctuations_rusanov(ql, qr, axis, path, reg),
    }
}

/// Exact similarity solution `Q(ξ)` of the Riemann problem linearized with `B̃`.
///
/// Waves travelling exactly at speed ξ are treated as not yet passed, i.e.
/// the solution is the limit from the left side of the ray.
pub fn linearized_rp(
    ql: &State13,
    qr: &State13,
    axis: usize,
    xi: f64,
    path: &PathSpec,
    reg: &RegularizationParams,
) -> Result<State13> {
    let ax = Axis::from_index(axis)?;
    if both_vacuum(ql, qr, reg) {
        return Ok(if xi <= 0.0 { *ql } else { *qr });
    }
    let bs = roe_sparse(ql, qr, ax, path, reg);
    let cp = bs.p_speed_sq().sqrt();
    let cs = bs.s_speed_sq().sqrt();
    let eig = [-cp, -cs, 0.0, cs, cp];
    let scale = cp.max(1e-300);
    let gap = (cp - cs).min(cs);
    if gap <= 1e-10 * scale {
        return Err(Error::NumericalDegeneracy { residual: gap / scale });
    }
    let b = bs.to_dense();
    let id = Matrix13::identity();
    // Spectral projectors of the four moving waves. The contact eigenvalue may
    // carry a Jordan block once α jumps across the face, so zero enters the
    // interpolating polynomial as a double root and its projector is the
    // complement of the others.
    let b2 = b * b;
    let moving = [eig[0], eig[1], eig[3], eig[4]];
    let mut projectors: Vec<Matrix13> = moving
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            let mut p = b2 / (li * li);
            for (j, &lj) in moving.iter().enumerate() {
                if j != i {
                    p = p * (b - id * lj) / (li - lj);
                }
            }
            p
        })
        .collect();
    let residual = moving
        .iter()
        .zip(&projectors)
        .map(|(&l, p)| ((b * p - p * l).abs().max() / scale).max((p * p - p).abs().max()))
        .fold(0.0f64, f64::max);
    if !residual.is_finite() || residual > 1e-8 {
        return Err(Error::NumericalDegeneracy { residual });
    }
    let p0 = projectors.iter().fold(id, |acc, p| acc - p);
    projectors.insert(2, p0);
    let vl = nalgebra::SVector::<f64, NVAR>::from(ql.0);
    let vr = nalgebra::SVector::<f64, NVAR>::from(qr.0);
    let mut out = nalgebra::SVector::<f64, NVAR>::zeros();
    for (&l, p) in eig.iter().zip(&projectors) {
        out += if l - xi >= 0.0 { p * vl } else { p * vr };
    }
    Ok(State13(out.into()))
}

/// Interface state `Q(0)` of the linearized Riemann problem.
pub fn godunov_state(
    ql: &State13,
    qr: &State13,
    axis: usize,
    reg: &RegularizationParams,
) -> Result<State13> {
    linearized_rp(ql, qr, axis, 0.0, &PathSpec::default(), reg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reg() -> RegularizationParams {
        RegularizationParams::default()
    }

    fn solid(sxx: f64, au: f64, alpha: f64) -> State13 {
        let mut q = State13::at_rest(MaterialSample::new(2.0, 1.0, 1.0), alpha);
        q[SXX] = sxx;
        q[AU] = au;
        q
    }

    #[test]
    fn path_needs_three_points() {
        assert!(PathSpec::new(2).is_err());
        assert_eq!(PathSpec::default().order(), 3);
    }

    #[test]
    fn roe_of_equal_states() {
        let q = solid(0.3, 0.1, 0.6);
        let b = roe_matrix(&q, &q, 1, &PathSpec::default(), &reg()).unwrap();
        assert_eq!(b, crate::elastic::assemble_b(&q, 1, &reg()).unwrap());
    }

    #[test]
    fn zero_jump_gives_zero_fluctuations() {
        let q = solid(0.3, 0.1, 0.6);
        for kind in [SolverKind::Godunov, SolverKind::Rusanov] {
            let f = fluctuations(kind, &q, &q, Axis::X, &PathSpec::default(), &reg());
            assert!(f.d_minus.iter().chain(&f.d_plus).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn riemann_extremes() {
        let ql = solid(0.3, 0.1, 1.0);
        let qr = solid(-0.2, 0.4, 1.0);
        let p = PathSpec::default();
        let left = linearized_rp(&ql, &qr, 1, -2.5, &p, &reg()).unwrap();
        let right = linearized_rp(&ql, &qr, 1, 2.5, &p, &reg()).unwrap();
        for i in 0..NVAR {
            assert_relative_eq!(left[i], ql[i], epsilon = 1e-13);
            assert_relative_eq!(right[i], qr[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn abs_polynomial_reproduces_speed() {
        // A pure right-going p-wave eigenvector is scaled by cp.
        let q = solid(0.0, 0.0, 1.0);
        let b = QuasilinearMatrix::from_state(&q, Axis::X, &reg());
        let mut v = [0.0; NVAR];
        v[SXX] = 4.0;
        v[SYY] = 2.0;
        v[SZZ] = 2.0;
        v[AU] = -2.0;
        let a = abs_apply(&b, &v);
        for i in 0..NVAR {
            assert_relative_eq!(a[i], 2.0 * v[i], epsilon = 1e-13);
        }
    }
}
