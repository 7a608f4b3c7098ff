//! Volume-fraction geometry: signed distances, the diffuse profile and
//! material layouts.
//!
//! Signed distances are negative inside the solid. The diffuse profile maps a
//! signed distance `r` to α through a piecewise linear ramp ξ(r) followed by
//! `α = (1 − ξ)^p_d`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::dtm::{dtm_load, ExtentPolicy, NodataPolicy, Raster};
use crate::error::{Error, Result};
use crate::state::MaterialSample;

/// Shape parameters of the diffuse interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterfaceProfile {
    /// Interface half-thickness I_D; zero gives a sharp step.
    pub thickness: f64,
    pub eta: f64,
    pub pd: f64,
}

impl Default for InterfaceProfile {
    fn default() -> Self {
        InterfaceProfile {
            thickness: 0.0,
            eta: -0.6,
            pd: 0.5,
        }
    }
}

impl InterfaceProfile {
    pub fn with_thickness(thickness: f64) -> Self {
        InterfaceProfile {
            thickness,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.thickness >= 0.0) {
            return Err(Error::config("geometry.profile.thickness", "must be non-negative"));
        }
        if !(self.pd > 0.0) {
            return Err(Error::config("geometry.profile.pd", "must be positive"));
        }
        Ok(())
    }

    /// Signed distances `(r0, r1)` outside of which ξ saturates at 0 and 1.
    pub fn support(&self) -> (f64, f64) {
        (-(1.0 - self.eta) * self.thickness, (1.0 + self.eta) * self.thickness)
    }
}

/// Piecewise linear ramp ξ(r): 0 deep in the solid, 1 far outside.
pub fn xi_profile(r: f64, p: &InterfaceProfile) -> f64 {
    let (r0, r1) = p.support();
    if r >= r1 {
        1.0
    } else if r <= r0 {
        0.0
    } else {
        (r - r0) / (2.0 * p.thickness)
    }
}

/// Volume fraction `(1 − ξ(r))^p_d`; a step at r = 0 when the thickness is zero.
pub fn alpha_of_r(r: f64, p: &InterfaceProfile) -> f64 {
    if p.thickness == 0.0 {
        return if r <= 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - xi_profile(r, p)).powf(p.pd)
}

/// One sine term `amplitude · sin(wavenumber · x + phase)` of a height field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineMode {
    pub amplitude: f64,
    pub wavenumber: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Description of the solid region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeSpec {
    /// The whole box is solid.
    Solid,
    /// Solid on the side opposite to the outward `normal`.
    HalfSpace { point: [f64; 2], normal: [f64; 2] },
    Circle {
        center: [f64; 2],
        radius: f64,
        #[serde(default = "default_true")]
        solid_outside: bool,
    },
    /// Solid below `y = base + slope·x + Σ sines`.
    HeightField {
        base: f64,
        #[serde(default)]
        slope: f64,
        #[serde(default)]
        modes: Vec<SineMode>,
    },
    /// Solid below a DTM surface; the 2D section is taken at `northing`.
    Raster {
        path: PathBuf,
        #[serde(default)]
        northing: Option<f64>,
        #[serde(default)]
        extent: ExtentPolicy,
        #[serde(default)]
        nodata: NodataPolicy,
    },
}

fn default_true() -> bool {
    true
}

/// Axis-aligned box outside of which α is forced to zero (sharp edge).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl ClipBox {
    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|d| x[d] >= self.min[d] && x[d] <= self.max[d])
    }
}

/// Serializable geometry description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub shape: ShapeSpec,
    #[serde(default)]
    pub profile: InterfaceProfile,
    #[serde(default)]
    pub clip: Option<ClipBox>,
}

#[derive(Debug, Clone)]
enum Shape {
    Solid,
    HalfSpace { point: [f64; 2], normal: [f64; 2] },
    Circle { center: [f64; 2], radius: f64, solid_outside: bool },
    HeightField { base: f64, slope: f64, modes: Vec<SineMode> },
    Raster { raster: Box<Raster>, northing: f64 },
}

/// Geometry ready for point queries.
#[derive(Debug, Clone)]
pub struct AlphaGeometry {
    shape: Shape,
    pub profile: InterfaceProfile,
    pub clip: Option<ClipBox>,
}

impl AlphaGeometry {
    /// Builds the geometry, loading raster files relative to `base_dir`.
    pub fn new(spec: &GeometrySpec, base_dir: &Path) -> Result<Self> {
        spec.profile.validate()?;
        let shape = match &spec.shape {
            ShapeSpec::Solid => Shape::Solid,
            ShapeSpec::HalfSpace { point, normal } => {
                let n = normal[0].hypot(normal[1]);
                if !(n > 0.0) {
                    return Err(Error::config("geometry.shape.normal", "must be non-zero"));
                }
                Shape::HalfSpace {
                    point: *point,
                    normal: [normal[0] / n, normal[1] / n],
                }
            }
            ShapeSpec::Circle {
                center,
                radius,
                solid_outside,
            } => {
                if !(*radius > 0.0) {
                    return Err(Error::config("geometry.shape.radius", "must be positive"));
                }
                Shape::Circle {
                    center: *center,
                    radius: *radius,
                    solid_outside: *solid_outside,
                }
            }
            ShapeSpec::HeightField { base, slope, modes } => Shape::HeightField {
                base: *base,
                slope: *slope,
                modes: modes.clone(),
            },
            ShapeSpec::Raster {
                path,
                northing,
                extent,
                nodata,
            } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let mut raster = dtm_load(&full)?;
                raster.extent = *extent;
                raster.nodata_policy = *nodata;
                let mid = raster.y0 + 0.5 * (raster.nrows - 1) as f64 * raster.cellsize;
                Shape::Raster {
                    raster: Box::new(raster),
                    northing: northing.unwrap_or(mid),
                }
            }
        };
        Ok(AlphaGeometry {
            shape,
            profile: spec.profile,
            clip: spec.clip,
        })
    }

    /// Geometry from an in-memory raster.
    pub fn from_raster(raster: Raster, northing: f64, profile: InterfaceProfile) -> Self {
        AlphaGeometry {
            shape: Shape::Raster {
                raster: Box::new(raster),
                northing,
            },
            profile,
            clip: None,
        }
    }

    /// Signed distance to the interface, negative inside the solid.
    pub fn signed_distance(&self, x: [f64; 2]) -> Result<f64> {
        Ok(match &self.shape {
            Shape::Solid => f64::NEG_INFINITY,
            Shape::HalfSpace { point, normal } => {
                (x[0] - point[0]) * normal[0] + (x[1] - point[1]) * normal[1]
            }
            Shape::Circle {
                center,
                radius,
                solid_outside,
            } => {
                let d = (x[0] - center[0]).hypot(x[1] - center[1]);
                if *solid_outside {
                    radius - d
                } else {
                    d - radius
                }
            }
            Shape::HeightField { base, slope, modes } => {
                let f = base
                    + slope * x[0]
                    + modes
                        .iter()
                        .map(|m| m.amplitude * (m.wavenumber * x[0] + m.phase).sin())
                        .sum::<f64>();
                x[1] - f
            }
            Shape::Raster { raster, northing } => x[1] - raster.bilinear(x[0], *northing)?,
        })
    }

    /// Volume fraction at `x`, clamped to [0, 1].
    pub fn alpha(&self, x: [f64; 2]) -> Result<f64> {
        if let Some(c) = &self.clip {
            if !c.contains(x) {
                return Ok(0.0);
            }
        }
        let r = self.signed_distance(x)?;
        Ok(alpha_of_r(r, &self.profile).clamp(0.0, 1.0))
    }

    /// Exact range of α over the box `[lo, hi]` for shapes whose distance
    /// range is available in closed form, `None` otherwise. A box reaching
    /// outside the clip box includes the value 0.
    pub fn alpha_range(&self, lo: [f64; 2], hi: [f64; 2]) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (lo, hi);
        let mut cut = false;
        if let Some(c) = &self.clip {
            for d in 0..2 {
                cut |= lo[d] < c.min[d] || hi[d] > c.max[d];
                lo[d] = lo[d].max(c.min[d]);
                hi[d] = hi[d].min(c.max[d]);
                if lo[d] > hi[d] {
                    return Some((0.0, 0.0));
                }
            }
        }
        let (rmin, rmax) = match &self.shape {
            Shape::Solid => return Some((1.0, 1.0)),
            Shape::HalfSpace { point, normal } => {
                let mut a = f64::INFINITY;
                let mut b = f64::NEG_INFINITY;
                for x in [lo[0], hi[0]] {
                    for y in [lo[1], hi[1]] {
                        let r = (x - point[0]) * normal[0] + (y - point[1]) * normal[1];
                        a = a.min(r);
                        b = b.max(r);
                    }
                }
                (a, b)
            }
            Shape::Circle {
                center,
                radius,
                solid_outside,
            } => {
                let cx = center[0].clamp(lo[0], hi[0]);
                let cy = center[1].clamp(lo[1], hi[1]);
                let dmin = (cx - center[0]).hypot(cy - center[1]);
                let dx = (lo[0] - center[0]).abs().max((hi[0] - center[0]).abs());
                let dy = (lo[1] - center[1]).abs().max((hi[1] - center[1]).abs());
                let dmax = dx.hypot(dy);
                if *solid_outside {
                    (radius - dmax, radius - dmin)
                } else {
                    (dmin - radius, dmax - radius)
                }
            }
            _ => return None,
        };
        let p = &self.profile;
        let amin = if cut { 0.0 } else { alpha_of_r(rmax, p) };
        Some((amin, alpha_of_r(rmin, p)))
    }
}

/// Nodal and subcell-averaged α values of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSamples {
    /// Values at the `(N+1)²` tensor Gauss–Legendre nodes, x fastest.
    pub nodal: Vec<f64>,
    /// Averages over the `(2N+1)²` subcells, x fastest.
    pub subcell: Vec<f64>,
}

/// Samples α on the nodes and subcells of axis-aligned cells `(lo, h)`.
pub fn sample_alpha_field(g: &AlphaGeometry, cells: &[([f64; 2], [f64; 2])], basis: &Basis) -> Result<Vec<AlphaSamples>> {
    let m = basis.len();
    let ns = 2 * basis.degree + 1;
    cells
        .iter()
        .map(|&(lo, h)| {
            let mut nodal = Vec::with_capacity(m * m);
            for j in 0..m {
                for i in 0..m {
                    nodal.push(g.alpha([lo[0] + h[0] * basis.nodes[i], lo[1] + h[1] * basis.nodes[j]])?);
                }
            }
            let hs = [h[0] / ns as f64, h[1] / ns as f64];
            let mut subcell = Vec::with_capacity(ns * ns);
            for sj in 0..ns {
                for si in 0..ns {
                    let mut acc = 0.0;
                    for j in 0..m {
                        for i in 0..m {
                            let x = lo[0] + hs[0] * (si as f64 + basis.nodes[i]);
                            let y = lo[1] + hs[1] * (sj as f64 + basis.nodes[j]);
                            acc += basis.weights[i] * basis.weights[j] * g.alpha([x, y])?;
                        }
                    }
                    subcell.push(acc.clamp(0.0, 1.0));
                }
            }
            Ok(AlphaSamples { nodal, subcell })
        })
        .collect()
}

/// Region of a material zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Everywhere,
    /// Points with `normal · x > offset`.
    HalfPlane { normal: [f64; 2], offset: f64 },
}

impl Region {
    pub fn contains(&self, x: [f64; 2]) -> bool {
        match self {
            Region::Everywhere => true,
            Region::HalfPlane { normal, offset } => normal[0] * x[0] + normal[1] * x[1] > *offset,
        }
    }
}

/// Material given either by Lamé constants or by wave speeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    Lame { lambda: f64, mu: f64, rho: f64 },
    Speeds { cp: f64, cs: f64, rho: f64 },
}

impl MaterialSpec {
    pub fn sample(&self) -> MaterialSample {
        match *self {
            MaterialSpec::Lame { lambda, mu, rho } => MaterialSample::new(lambda, mu, rho),
            MaterialSpec::Speeds { cp, cs, rho } => MaterialSample::from_speeds(cp, cs, rho),
        }
    }
}

/// One entry of a [`MaterialLayout`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialZone {
    pub region: Region,
    pub material: MaterialSpec,
}

/// Ordered material zones; the first zone containing a point wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialLayout {
    pub zones: Vec<MaterialZone>,
}

impl MaterialLayout {
    pub fn uniform(m: MaterialSpec) -> Self {
        MaterialLayout {
            zones: vec![MaterialZone {
                region: Region::Everywhere,
                material: m,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.zones.is_empty() {
            return Err(Error::config("materials", "at least one zone is required"));
        }
        if !self.zones.iter().any(|z| z.region == Region::Everywhere) {
            return Err(Error::config("materials", "the last zone must cover everywhere"));
        }
        for z in &self.zones {
            z.material.sample().validate()?;
        }
        Ok(())
    }

    pub fn material_at(&self, x: [f64; 2]) -> Result<MaterialSample> {
        self.zones
            .iter()
            .find(|z| z.region.contains(x))
            .map(|z| z.material.sample())
            .ok_or_else(|| Error::config("materials", format!("no zone covers {x:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geom(shape: ShapeSpec, thickness: f64) -> AlphaGeometry {
        AlphaGeometry::new(
            &GeometrySpec {
                shape,
                profile: InterfaceProfile::with_thickness(thickness),
                clip: None,
            },
            Path::new("."),
        )
        .unwrap()
    }

    #[test]
    fn circle_distance() {
        let g = geom(
            ShapeSpec::Circle {
                center: [0.0, 0.0],
                radius: 0.25,
                solid_outside: true,
            },
            0.0,
        );
        assert_eq!(g.signed_distance([0.0, 0.0]).unwrap(), 0.25);
    }

    #[test]
    fn half_space_distance() {
        let g = geom(
            ShapeSpec::HalfSpace {
                point: [0.0, 0.0],
                normal: [1.0, 0.0],
            },
            0.0,
        );
        assert_eq!(g.signed_distance([0.1, 0.0]).unwrap(), 0.1);
        assert_eq!(g.alpha([-0.1, 0.0]).unwrap(), 1.0);
        assert_eq!(g.alpha([0.1, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn height_field_distance() {
        let g = geom(
            ShapeSpec::HeightField {
                base: 2000.0,
                slope: 0.0,
                modes: vec![
                    SineMode {
                        amplitude: 100.0,
                        wavenumber: 3.0 / 200.0,
                        phase: 0.0,
                    },
                    SineMode {
                        amplitude: 100.0,
                        wavenumber: 2.0 / 200.0,
                        phase: 0.0,
                    },
                ],
            },
            5.0,
        );
        assert_eq!(g.signed_distance([0.0, 2010.0]).unwrap(), 10.0);
    }

    #[test]
    fn profile_values() {
        let p = InterfaceProfile::with_thickness(0.01);
        assert_relative_eq!(xi_profile(0.0, &p), 0.8, epsilon = 1e-15);
        assert_eq!(xi_profile(0.004, &p), 1.0);
        assert_eq!(xi_profile(-0.016, &p), 0.0);
        assert_relative_eq!(alpha_of_r(0.0, &p), 0.2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(alpha_of_r(-1.0, &p), 1.0);
        assert_eq!(alpha_of_r(1.0, &p), 0.0);
        // Continuity at both breakpoints.
        let (r0, r1) = p.support();
        assert!((xi_profile(r0 + 1e-15, &p) - 0.0).abs() < 1e-12);
        assert!((xi_profile(r1 - 1e-15, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn defaults_match_recommended() {
        let p = InterfaceProfile::default();
        assert_eq!((p.eta, p.pd), (-0.6, 0.5));
    }

    #[test]
    fn alpha_monotone() {
        let p = InterfaceProfile::with_thickness(0.3);
        let mut prev = 1.0;
        for k in 0..=2000 {
            let a = alpha_of_r(-1.0 + k as f64 / 1000.0, &p);
            assert!(a <= prev);
            prev = a;
        }
    }

    #[test]
    fn exact_range_brackets_samples() {
        let g = geom(
            ShapeSpec::Circle {
                center: [0.0, 0.0],
                radius: 0.25,
                solid_outside: true,
            },
            0.05,
        );
        let (lo, hi) = ([0.1, 0.15], [0.3, 0.35]);
        let (amin, amax) = g.alpha_range(lo, hi).unwrap();
        for i in 0..=50 {
            for j in 0..=50 {
                let x = [lo[0] + 0.2 * i as f64 / 50.0, lo[1] + 0.2 * j as f64 / 50.0];
                let a = g.alpha(x).unwrap();
                assert!(a >= amin - 1e-15 && a <= amax + 1e-15);
            }
        }
    }

    #[test]
    fn clip_box_is_sharp() {
        let g = AlphaGeometry::new(
            &GeometrySpec {
                shape: ShapeSpec::Solid,
                profile: InterfaceProfile::default(),
                clip: Some(ClipBox {
                    min: [0.0, 0.0],
                    max: [1.0, 1.0],
                }),
            },
            Path::new("."),
        )
        .unwrap();
        assert_eq!(g.alpha([0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(g.alpha([-0.01, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn layout_first_match() {
        let layout = MaterialLayout {
            zones: vec![
                MaterialZone {
                    region: Region::HalfPlane {
                        normal: [0.5, 1.0],
                        offset: 1500.0,
                    },
                    material: MaterialSpec::Speeds {
                        cp: 3200.0,
                        cs: 1847.5,
                        rho: 2200.0,
                    },
                },
                MaterialZone {
                    region: Region::Everywhere,
                    material: MaterialSpec::Speeds {
                        cp: 2262.74,
                        cs: 1306.38,
                        rho: 2200.0,
                    },
                },
            ],
        };
        layout.validate().unwrap();
        let up = layout.material_at([0.0, 1600.0]).unwrap();
        let down = layout.material_at([0.0, 1500.0]).unwrap();
        assert_relative_eq!(up.mu, 2200.0 * 1847.5 * 1847.5, max_relative = 1e-14);
        assert_relative_eq!(down.mu, 2200.0 * 1306.38 * 1306.38, max_relative = 1e-14);
    }
}
