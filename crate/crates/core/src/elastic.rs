//! Quasilinear form of the diffuse-interface elasticity system.
//!
//! The system reads `∂t Q + B1 ∂x Q + B2 ∂y Q + B3 ∂z Q = S` with the state
//! layout of [`State13`]. Every matrix `Bd` has the same sixteen-entry
//! sparsity pattern once rows and columns are relabelled by the normal and
//! tangential directions of the axis, so matrices are stored sparsely as
//! [`QuasilinearMatrix`] and densified only for inspection and tests.
//!
//! Divisions by α are regularized with [`inv_alpha_reg`]. The entries of the
//! last column contain the physical velocity `u = (αu)/α` multiplied by one
//! more `1/α`; that product is formed as `(αu) / (α² + ε(α))`, which is finite
//! at α = 0 and keeps the contact eigenvector `(−σ·n, αv, α)` exact for all α.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::*;

pub type Matrix13 = SMatrix<f64, NVAR, NVAR>;

/// Number of structural nonzeros of one quasilinear matrix.
pub const NNZ: usize = 16;

/// Coordinate axis of a quasilinear matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Axis from a 1-based index (1 = x, 2 = y, 3 = z).
    pub fn from_index(i: usize) -> Result<Axis> {
        match i {
            1 => Ok(Axis::X),
            2 => Ok(Axis::Y),
            3 => Ok(Axis::Z),
            _ => Err(Error::InvalidAxis(i)),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub(crate) fn layout(self) -> &'static AxisLayout {
        &LAYOUTS[self.index()]
    }
}

/// Component indices relabelled by normal (n) and tangential (t1, t2) directions.
#[derive(Debug)]
pub(crate) struct AxisLayout {
    pub snn: usize,
    pub st1t1: usize,
    pub st2t2: usize,
    pub snt1: usize,
    pub snt2: usize,
    pub st1t2: usize,
    pub vn: usize,
    pub vt1: usize,
    pub vt2: usize,
}

const LAYOUTS: [AxisLayout; 3] = [
    AxisLayout {
        snn: SXX,
        st1t1: SYY,
        st2t2: SZZ,
        snt1: SXY,
        snt2: SXZ,
        st1t2: SYZ,
        vn: AU,
        vt1: AV,
        vt2: AW,
    },
    AxisLayout {
        snn: SYY,
        st1t1: SXX,
        st2t2: SZZ,
        snt1: SXY,
        snt2: SYZ,
        st1t2: SXZ,
        vn: AV,
        vt1: AU,
        vt2: AW,
    },
    AxisLayout {
        snn: SZZ,
        st1t1: SXX,
        st2t2: SYY,
        snt1: SXZ,
        snt2: SYZ,
        st1t2: SXY,
        vn: AW,
        vt1: AU,
        vt2: AV,
    },
];

const fn pattern(l: &AxisLayout) -> [(usize, usize); NNZ] {
    [
        (l.snn, l.vn),
        (l.snn, ALPHA),
        (l.st1t1, l.vn),
        (l.st1t1, ALPHA),
        (l.st2t2, l.vn),
        (l.st2t2, ALPHA),
        (l.snt1, l.vt1),
        (l.snt1, ALPHA),
        (l.snt2, l.vt2),
        (l.snt2, ALPHA),
        (l.vn, l.snn),
        (l.vn, ALPHA),
        (l.vt1, l.snt1),
        (l.vt1, ALPHA),
        (l.vt2, l.snt2),
        (l.vt2, ALPHA),
    ]
}

const PATTERNS: [[(usize, usize); NNZ]; 3] = [
    pattern(&LAYOUTS[0]),
    pattern(&LAYOUTS[1]),
    pattern(&LAYOUTS[2]),
];

/// Sparse quasilinear matrix `Bd(Q)` for one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasilinearMatrix {
    pub axis: Axis,
    pub vals: [f64; NNZ],
}

impl QuasilinearMatrix {
    pub fn zero(axis: Axis) -> Self {
        QuasilinearMatrix {
            axis,
            vals: [0.0; NNZ],
        }
    }

    /// Evaluates `Bd(q)`.
    pub fn from_state(q: &State13, axis: Axis, reg: &RegularizationParams) -> Self {
        let l = axis.layout();
        let alpha = q[ALPHA];
        let (lam, mu, rho) = (q[LAMBDA], q[MU], q[RHO]);
        let k = lam + 2.0 * mu;
        let dd = reg.inv_denominator(alpha);
        let inv = alpha * dd;
        let arho = alpha / rho;
        let rinv = 1.0 / rho;
        let (mn, mt1, mt2) = (q[l.vn], q[l.vt1], q[l.vt2]);
        QuasilinearMatrix {
            axis,
            vals: [
                -k * inv,
                k * mn * dd,
                -lam * inv,
                lam * mn * dd,
                -lam * inv,
                lam * mn * dd,
                -mu * inv,
                mu * mt1 * dd,
                -mu * inv,
                mu * mt2 * dd,
                -arho,
                -q[l.snn] * rinv,
                -arho,
                -q[l.snt1] * rinv,
                -arho,
                -q[l.snt2] * rinv,
            ],
        }
    }

    /// Structural (row, column) positions of the stored values.
    pub fn pattern(&self) -> &'static [(usize, usize); NNZ] {
        &PATTERNS[self.axis.index()]
    }

    /// Returns `B v`.
    #[inline]
    pub fn apply(&self, v: &[f64; NVAR]) -> [f64; NVAR] {
        let mut out = [0.0; NVAR];
        for (&(r, c), &b) in self.pattern().iter().zip(self.vals.iter()) {
            out[r] += b * v[c];
        }
        out
    }

    pub fn to_dense(&self) -> Matrix13 {
        let mut m = Matrix13::zeros();
        for (&(r, c), &b) in self.pattern().iter().zip(self.vals.iter()) {
            m[(r, c)] += b;
        }
        m
    }

    /// Squared p-wave speed `B[σnn, vn] · B[vn, σnn]` of the matrix.
    #[inline]
    pub fn p_speed_sq(&self) -> f64 {
        (self.vals[0] * self.vals[10]).max(0.0)
    }

    /// Squared s-wave speed `B[σnt, vt] · B[vt, σnt]` of the matrix.
    #[inline]
    pub fn s_speed_sq(&self) -> f64 {
        (self.vals[6] * self.vals[12]).max(0.0)
    }
}

/// Dense `Bd(q)` with rows and columns ordered as the state vector.
pub fn assemble_b(q: &State13, axis: usize, reg: &RegularizationParams) -> Result<Matrix13> {
    let axis = Axis::from_index(axis)?;
    Ok(QuasilinearMatrix::from_state(q, axis, reg).to_dense())
}

/// Static per-point coefficients of the quasilinear matrices.
///
/// Material parameters and α do not evolve, so everything except the
/// stresses and velocities can be computed once per quadrature point.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointCoefficients {
    pub kinv: f64,
    pub linv: f64,
    pub minv: f64,
    pub arho: f64,
    pub kdd: f64,
    pub ldd: f64,
    pub mdd: f64,
    pub rinv: f64,
}

impl PointCoefficients {
    pub fn new(q: &State13, reg: &RegularizationParams) -> Self {
        let alpha = q[ALPHA];
        let (lam, mu, rho) = (q[LAMBDA], q[MU], q[RHO]);
        let k = lam + 2.0 * mu;
        let dd = reg.inv_denominator(alpha);
        let inv = alpha * dd;
        PointCoefficients {
            kinv: k * inv,
            linv: lam * inv,
            minv: mu * inv,
            arho: alpha / rho,
            kdd: k * dd,
            ldd: lam * dd,
            mdd: mu * dd,
            rinv: 1.0 / rho,
        }
    }

    /// Accumulates `Bd(q) · dq` into `out`, where `dq` holds the derivatives of
    /// the nine evolved components and `dalpha` the derivative of α.
    #[inline]
    pub fn add_ncp(&self, axis: Axis, q: &[f64], dq: &[f64], dalpha: f64, out: &mut [f64]) {
        let l = axis.layout();
        let dvn = dq[l.vn];
        let mn_a = q[l.vn] * dalpha;
        out[l.snn] += -self.kinv * dvn + self.kdd * mn_a;
        let t = -self.linv * dvn + self.ldd * mn_a;
        out[l.st1t1] += t;
        out[l.st2t2] += t;
        out[l.snt1] += -self.minv * dq[l.vt1] + self.mdd * q[l.vt1] * dalpha;
        out[l.snt2] += -self.minv * dq[l.vt2] + self.mdd * q[l.vt2] * dalpha;
        out[l.vn] += -self.arho * dq[l.snn] - self.rinv * q[l.snn] * dalpha;
        out[l.vt1] += -self.arho * dq[l.snt1] - self.rinv * q[l.snt1] * dalpha;
        out[l.vt2] += -self.arho * dq[l.snt2] - self.rinv * q[l.snt2] * dalpha;
    }
}

/// The 13 eigenvalues of `Bd(q)` in ascending order.
pub fn eigenvalues(q: &State13, axis: usize, reg: &RegularizationParams) -> Result<[f64; NVAR]> {
    Axis::from_index(axis)?;
    let (cp, cs) = wave_speeds(&q.material())?;
    let f = speed_factor(q.alpha(), reg);
    let (p, s) = (f * cp, f * cs);
    Ok([-p, -s, -s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, s, s, p])
}

/// Right eigenvectors of `Bd(q)` as columns, ordered like [`eigenvalues`].
///
/// The columns are the regularized generalization of the classical elastic
/// eigenvectors; at α = 1 they coincide with them.
pub fn right_eigenvectors(q: &State13, axis: usize, reg: &RegularizationParams) -> Result<Matrix13> {
    let ax = Axis::from_index(axis)?;
    let (cp, cs) = wave_speeds(&q.material())?;
    let alpha = q.alpha();
    if alpha <= 0.0 || cs <= 0.0 {
        return Err(Error::DegenerateEigenspace { alpha });
    }
    let l = ax.layout();
    let f = speed_factor(alpha, reg);
    let (p, s) = (f * cp, f * cs);
    let inv = inv_alpha_reg(alpha, reg);
    let (lam, mu) = (q[LAMBDA], q[MU]);
    let k = lam + 2.0 * mu;
    let mut r = Matrix13::zeros();

    for (col, sign) in [(0usize, 1.0), (12usize, -1.0)] {
        r[(l.snn, col)] = k * inv;
        r[(l.st1t1, col)] = lam * inv;
        r[(l.st2t2, col)] = lam * inv;
        r[(l.vn, col)] = sign * p;
    }
    for (col, st, vt, sign) in [
        (1usize, l.snt1, l.vt1, 1.0),
        (2, l.snt2, l.vt2, 1.0),
        (10, l.snt2, l.vt2, -1.0),
        (11, l.snt1, l.vt1, -1.0),
    ] {
        r[(st, col)] = mu * inv;
        r[(vt, col)] = sign * s;
    }
    r[(l.st1t1, 3)] = 1.0;
    r[(l.st2t2, 4)] = 1.0;
    r[(l.st1t2, 5)] = 1.0;
    r[(RHO, 6)] = 1.0;
    r[(MU, 7)] = 1.0;
    r[(LAMBDA, 8)] = 1.0;
    // Stationary contact in α and the material.
    r[(l.snn, 9)] = -q[l.snn];
    r[(l.snt1, 9)] = -q[l.snt1];
    r[(l.snt2, 9)] = -q[l.snt2];
    r[(AU, 9)] = q[AU];
    r[(AV, 9)] = q[AV];
    r[(AW, 9)] = q[AW];
    r[(ALPHA, 9)] = alpha;
    Ok(r)
}

/// Directional point source with a Ricker wavelet time signature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub location: [f64; 2],
    /// Unit vector applied to the (u, v) velocity equations.
    pub direction: [f64; 2],
    pub amplitude: f64,
    pub center_frequency: f64,
    pub delay: f64,
}

impl SourceSpec {
    /// Source direction (−sin θ, cos θ) normal to a surface tilted by θ degrees.
    pub fn tilted(location: [f64; 2], tilt_deg: f64, amplitude: f64, fc: f64, delay: f64) -> Self {
        let th = tilt_deg.to_radians();
        SourceSpec {
            location,
            direction: [-th.sin(), th.cos()],
            amplitude,
            center_frequency: fc,
            delay,
        }
    }

    /// a2 = −(π fc)².
    pub fn a2(&self) -> f64 {
        let x = std::f64::consts::PI * self.center_frequency;
        -x * x
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.direction[0].hypot(self.direction[1]);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::config("source.direction", "must be a unit vector"));
        }
        if self.a2() >= 0.0 {
            return Err(Error::config("source.center_frequency", "must be positive"));
        }
        Ok(())
    }
}

/// Ricker wavelet `a1 (0.5 + a2 τ²) exp(a2 τ²)` with `τ = t − t_D`.
pub fn ricker(t: f64, s: &SourceSpec) -> f64 {
    let tau = t - s.delay;
    let x = s.a2() * tau * tau;
    s.amplitude * (0.5 + x) * x.exp()
}

/// Adds the discrete point source to an element-local nodal residual.
///
/// `weights[k]` holds `φ_k(x_s) / (|T| w_k)`, the nodal representation of the
/// delta distribution; `residual` is laid out as `[node][component]`.
pub fn apply_point_source(residual: &mut [f64], weights: &[f64], s: &SourceSpec, rho: f64, t: f64) {
    let amp = ricker(t, s) / rho;
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        residual[k * NVAR + AU] += w * amp * s.direction[0];
        residual[k * NVAR + AV] += w * amp * s.direction[1];
    }
}
