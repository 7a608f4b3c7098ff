//! State vector layout, material samples and the volume-fraction regularization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of components in the state vector.
pub const NVAR: usize = 13;
/// Number of evolved components (stresses and α-weighted velocities).
pub const NEVOLVED: usize = 9;

pub const SXX: usize = 0;
pub const SYY: usize = 1;
pub const SZZ: usize = 2;
pub const SXY: usize = 3;
pub const SYZ: usize = 4;
pub const SXZ: usize = 5;
pub const AU: usize = 6;
pub const AV: usize = 7;
pub const AW: usize = 8;
pub const LAMBDA: usize = 9;
pub const MU: usize = 10;
pub const RHO: usize = 11;
pub const ALPHA: usize = 12;

/// Component names in storage order, used for CSV headers and VTK arrays.
pub const COMPONENT_NAMES: [&str; NVAR] = [
    "sigma_xx", "sigma_yy", "sigma_zz", "sigma_xy", "sigma_yz", "sigma_xz", "alpha_u", "alpha_v",
    "alpha_w", "lambda", "mu", "rho", "alpha",
];

/// The 13-component state `(σxx, σyy, σzz, σxy, σyz, σxz, αu, αv, αw, λ, μ, ρ, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State13(pub [f64; NVAR]);

impl Default for State13 {
    fn default() -> Self {
        State13([0.0; NVAR])
    }
}

impl State13 {
    /// Quiet state carrying only the material and the volume fraction.
    pub fn at_rest(material: MaterialSample, alpha: f64) -> Self {
        let mut q = [0.0; NVAR];
        q[LAMBDA] = material.lambda;
        q[MU] = material.mu;
        q[RHO] = material.rho;
        q[ALPHA] = alpha;
        State13(q)
    }

    pub fn alpha(&self) -> f64 {
        self.0[ALPHA]
    }

    pub fn material(&self) -> MaterialSample {
        MaterialSample {
            lambda: self.0[LAMBDA],
            mu: self.0[MU],
            rho: self.0[RHO],
        }
    }

    /// Physical velocity `(u, v, w)` recovered from the α-weighted components.
    pub fn velocity(&self, reg: &RegularizationParams) -> [f64; 3] {
        let inv = inv_alpha_reg(self.alpha(), reg);
        [self.0[AU] * inv, self.0[AV] * inv, self.0[AW] * inv]
    }

    /// Checks the state invariants (α ∈ [0,1], ρ > 0, μ ≥ 0, λ + 2μ > 0).
    pub fn validate(&self) -> Result<()> {
        self.material().validate()?;
        let a = self.alpha();
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::config("alpha", format!("volume fraction {a} outside [0, 1]")));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for State13 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for State13 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Isotropic elastic material: Lamé constants and density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSample {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
}

impl MaterialSample {
    pub fn new(lambda: f64, mu: f64, rho: f64) -> Self {
        MaterialSample { lambda, mu, rho }
    }

    /// Material with prescribed p- and s-wave speeds.
    pub fn from_speeds(cp: f64, cs: f64, rho: f64) -> Self {
        let mu = rho * cs * cs;
        MaterialSample {
            lambda: rho * cp * cp - 2.0 * mu,
            mu,
            rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rho > 0.0
            && self.mu >= 0.0
            && self.lambda + 2.0 * self.mu > 0.0
            && self.lambda.is_finite()
            && self.mu.is_finite()
            && self.rho.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMaterial {
                lambda: self.lambda,
                mu: self.mu,
                rho: self.rho,
            })
        }
    }
}

/// Returns the p- and s-wave speeds `(cp, cs)`.
pub fn wave_speeds(m: &MaterialSample) -> Result<(f64, f64)> {
    m.validate()?;
    Ok((
        ((m.lambda + 2.0 * m.mu) / m.rho).sqrt(),
        (m.mu / m.rho).sqrt(),
    ))
}

/// Regularization of the division by the volume fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    pub eps0: f64,
}

impl Default for RegularizationParams {
    fn default() -> Self {
        RegularizationParams { eps0: 1e-3 }
    }
}

impl RegularizationParams {
    /// ε(α) = ε0 (1 − α).
    #[inline]
    pub fn epsilon(&self, alpha: f64) -> f64 {
        self.eps0 * (1.0 - alpha)
    }

    /// 1 / (α² + ε(α)), finite on the whole of [0, 1].
    #[inline]
    pub fn inv_denominator(&self, alpha: f64) -> f64 {
        1.0 / (alpha * alpha + self.epsilon(alpha))
    }
}

/// Regularized reciprocal α / (α² + ε0(1 − α)).
#[inline]
pub fn inv_alpha_reg(alpha: f64, reg: &RegularizationParams) -> f64 {
    alpha * reg.inv_denominator(alpha)
}

/// Eigenvalue scaling factor f = α / sqrt(α² + ε0(1 − α)).
#[inline]
pub fn speed_factor(alpha: f64, reg: &RegularizationParams) -> f64 {
    alpha * reg.inv_denominator(alpha).sqrt()
}

/// Largest regularized signal speed f(α)·cp of a state; zero in vacuum.
pub fn max_signal_speed(q: &State13, reg: &RegularizationParams) -> f64 {
    let m = q.material();
    if m.rho <= 0.0 {
        return 0.0;
    }
    let cp = ((m.lambda + 2.0 * m.mu) / m.rho).max(0.0).sqrt();
    speed_factor(q.alpha(), reg) * cp
}
