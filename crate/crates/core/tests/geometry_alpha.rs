//! Volume-fraction construction from shapes and rasters.

mod common;

use std::path::Path;

use common::*;
use dimseis::dtm::parse_esri_ascii;
use dimseis::geometry::*;
use rand::Rng;

fn circle(thickness: f64) -> AlphaGeometry {
    let spec = GeometrySpec {
        shape: ShapeSpec::Circle {
            center: [0.1, -0.2],
            radius: 0.25,
            solid_outside: true,
        },
        profile: InterfaceProfile::with_thickness(thickness),
        clip: None,
    };
    AlphaGeometry::new(&spec, Path::new(".")).unwrap()
}

#[test]
fn circle_alpha_follows_profile_definition() {
    let g = circle(0.01);
    let mut r = rng(21);
    for _ in 0..2000 {
        let x: [f64; 2] = [r.random_range(-0.5..0.7), r.random_range(-0.8..0.4)];
        let d = (x[0] - 0.1).hypot(x[1] + 0.2);
        let expect = profile_alpha(0.25 - d, 0.01, -0.6, 0.5);
        let got = g.alpha(x).unwrap();
        assert!((got - expect).abs() < 1e-12, "at {x:?}: {got} vs {expect}");
    }
}

#[test]
fn alpha_gradient_points_into_the_solid() {
    // Cavity: α grows away from the centre.
    let g = circle(0.05);
    let h = 1e-6;
    for k in 0..16 {
        let th = k as f64 * std::f64::consts::PI / 8.0;
        let (c, s) = (th.cos(), th.sin());
        let x = [0.1 + 0.24 * c, -0.2 + 0.24 * s];
        let gx = (g.alpha([x[0] + h, x[1]]).unwrap() - g.alpha([x[0] - h, x[1]]).unwrap()) / (2.0 * h);
        let gy = (g.alpha([x[0], x[1] + h]).unwrap() - g.alpha([x[0], x[1] - h]).unwrap()) / (2.0 * h);
        let radial = gx * c + gy * s;
        assert!(radial > 0.0, "angle {th}: radial derivative {radial}");
        assert!((gx * s - gy * c).abs() < 1e-6 * radial.abs(), "gradient not radial");
    }
    // Tilted half space: α decreases along the outward normal.
    let th = 10f64.to_radians();
    let n = [-th.sin(), th.cos()];
    let spec = GeometrySpec {
        shape: ShapeSpec::HalfSpace {
            point: [0.0, 2000.0],
            normal: n,
        },
        profile: InterfaceProfile::with_thickness(2.0),
        clip: None,
    };
    let g = AlphaGeometry::new(&spec, Path::new(".")).unwrap();
    let x0 = [1000.0, 2000.0 + 1000.0 * th.tan()];
    let a = g.alpha([x0[0] - 0.5 * n[0], x0[1] - 0.5 * n[1]]).unwrap();
    let b = g.alpha([x0[0] + 0.5 * n[0], x0[1] + 0.5 * n[1]]).unwrap();
    assert!(a > b, "{a} <= {b}");
}

#[test]
fn sharp_profile_is_a_step() {
    let g = circle(0.0);
    assert_eq!(g.alpha([0.1, -0.2]).unwrap(), 0.0);
    assert_eq!(g.alpha([0.1 + 0.2500001, -0.2]).unwrap(), 1.0);
}

#[test]
fn bilinear_reproduces_a_plane() {
    // h = 2x + 3y on a 4 × 3 raster with unit spacing, north row first.
    let mut text = String::from("ncols 4\nnrows 3\nxllcenter 10\nyllcenter 20\ncellsize 5\nNODATA_value -9999\n");
    for row in (0..3).rev() {
        let line: Vec<String> = (0..4)
            .map(|c| format!("{}", 2.0 * (10.0 + 5.0 * c as f64) + 3.0 * (20.0 + 5.0 * row as f64)))
            .collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    let raster = parse_esri_ascii(&text).unwrap();
    let mut r = rng(4);
    for _ in 0..500 {
        let (x, y) = (r.random_range(10.0..25.0), r.random_range(20.0..30.0));
        let got = raster.bilinear(x, y).unwrap();
        assert!((got - (2.0 * x + 3.0 * y)).abs() < 1e-11, "({x}, {y}): {got}");
    }
}

#[test]
fn exact_range_contains_brute_force_samples() {
    let g = circle(0.01);
    let mut r = rng(8);
    for _ in 0..200 {
        let lo = [r.random_range(-0.3..0.4), r.random_range(-0.6..0.1)];
        let h = r.random_range(0.005..0.1);
        let (amin, amax) = g.alpha_range(lo, [lo[0] + h, lo[1] + h]).unwrap();
        for i in 0..=20 {
            for j in 0..=20 {
                let x = [lo[0] + h * i as f64 / 20.0, lo[1] + h * j as f64 / 20.0];
                let a = g.alpha(x).unwrap();
                assert!(a >= amin - 1e-14 && a <= amax + 1e-14);
            }
        }
    }
}
