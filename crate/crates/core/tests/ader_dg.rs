//! Space-time predictor, time step and stability checks of the DG core.

mod common;

use common::*;
use dimseis::amr::{AmrGrid, GridSpec};
use dimseis::dg::*;
use dimseis::error::Error;
use dimseis::sim::convergence::{l2_error, plane_wave_exact};
use dimseis::solver::{Simulation, SolverConfig};
use dimseis::state::*;

/// Polynomial `Σ c_k x^k` and its derivative.
fn peval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn pderiv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

#[test]
fn predictor_reproduces_cauchy_kovalevskaya_series() {
    let (lam, mu, rho) = (2.0, 1.0, 1.5);
    let k = lam + 2.0 * mu;
    for degree in 1..=5 {
        let ops = DgOperators::new(degree, 3).unwrap();
        let m = ops.m;
        let h = [0.1, 0.1];
        // Degree-N polynomial data in x: σxx, σyy = σzz and u.
        let sxx: Vec<f64> = (0..=degree).map(|i| 0.3 / (i as f64 + 1.0)).collect();
        let syy: Vec<f64> = (0..=degree).map(|i| -0.2 + 0.05 * i as f64).collect();
        let vel: Vec<f64> = (0..=degree).map(|i| if i % 2 == 0 { 0.4 } else { -0.7 }).collect();
        // Time-derivative cascade of the 1D p-wave system:
        // ∂t σxx = k ∂x u, ∂t σyy = λ ∂x u, ∂t u = ∂x σxx / ρ.
        let mut cascade = vec![(sxx.clone(), syy.clone(), vel.clone())];
        for _ in 0..=degree {
            let (s, _, v) = cascade.last().unwrap().clone();
            let dv = pderiv(&v);
            let ds = pderiv(&s);
            cascade.push((
                dv.iter().map(|a| k * a).collect(),
                dv.iter().map(|a| lam * a).collect(),
                ds.iter().map(|a| a / rho).collect(),
            ));
        }
        let exact = |x: f64, t: f64| {
            let mut out = [0.0; 3];
            let mut fact = 1.0;
            for (n, (s, y, v)) in cascade.iter().enumerate() {
                if n > 0 {
                    fact *= n as f64;
                }
                let w = t.powi(n as i32) / fact;
                out[0] += w * peval(s, x);
                out[1] += w * peval(y, x);
                out[2] += w * peval(v, x);
            }
            out
        };
        let mut u = vec![0.0; m * m * NVAR];
        for j in 0..m {
            for i in 0..m {
                let x = h[0] * ops.basis.nodes[i];
                let e = exact(x, 0.0);
                let mut q = State13::at_rest(MaterialSample::new(lam, mu, rho), 1.0);
                q[SXX] = e[0];
                q[SYY] = e[1];
                q[SZZ] = e[1];
                q[AU] = e[2];
                u[(j * m + i) * NVAR..][..NVAR].copy_from_slice(&q.0);
            }
        }
        let st = CellStatic::new(&ops, &u, h, &reg());
        let dt = 0.013;
        let stc = predictor(&ops, &st, &u, dt, 0.0, None, &PicardSettings::default()).unwrap();
        let nn = m * m;
        let mut worst = 0.0f64;
        for a in 0..m {
            let t = dt * ops.basis.nodes[a];
            for j in 0..m {
                for i in 0..m {
                    let e = exact(h[0] * ops.basis.nodes[i], t);
                    let q = &stc.q[(a * nn + j * m + i) * NVAR..][..NVAR];
                    worst = worst
                        .max((q[SXX] - e[0]).abs())
                        .max((q[SYY] - e[1]).abs())
                        .max((q[SZZ] - e[1]).abs())
                        .max((q[AU] - e[2]).abs())
                        .max(q[AV].abs())
                        .max(q[SXY].abs());
                }
            }
        }
        assert!(worst < 1e-12, "degree {degree}: deviation {worst:e}");
    }
}

fn periodic_grid(n: usize) -> AmrGrid {
    let spec = GridSpec {
        lo: [0.0, 0.0],
        hi: [1.0, 1.0],
        dims: [n, n],
        periodic: [true, true],
    };
    AmrGrid::uniform(spec, 3).unwrap()
}

#[test]
fn sine_wave_returns_after_one_period() {
    let spec = GridSpec {
        lo: [0.0, 0.0],
        hi: [1.0, 0.1],
        dims: [10, 1],
        periodic: [true, true],
    };
    let grid = AmrGrid::uniform(spec, 3).unwrap();
    let cfg = SolverConfig {
        degree: 4,
        ..Default::default()
    };
    let mut sim = Simulation::new(grid, cfg, &|x| Ok(plane_wave_exact(x, 0.0)), Some(vec![false; 10]), None).unwrap();
    // Unit wavelength at cp = 2.
    sim.advance(0.5, |_, _| Ok(())).unwrap();
    let err = l2_error(&sim, |x| plane_wave_exact(x, 0.0));
    assert!(err < 1e-4, "error after one period {err:e}");
}

fn noise(x: [f64; 2]) -> f64 {
    let s = (x[0] * 12.9898 + x[1] * 78.233).sin() * 43758.5453;
    s - s.floor() - 0.5
}

fn noise_state(x: [f64; 2]) -> dimseis::error::Result<State13> {
    let mut q = State13::at_rest(unit_material(), 1.0);
    for v in 0..NEVOLVED {
        q[v] = noise([x[0] + v as f64 * 0.37, x[1] - v as f64 * 0.11]);
    }
    Ok(q)
}

/// Runs `steps` steps of white noise on a periodic 6×6 grid and returns the
/// growth of the max-norm, or the error that stopped the run. Nodal maxima of
/// white noise may overshoot by a small factor without any instability.
fn noise_growth(degree: usize, cfl: f64, steps: usize) -> Result<f64, Error> {
    let grid = periodic_grid(6);
    let cfg = SolverConfig {
        degree,
        cfl,
        ..Default::default()
    };
    let mut sim = Simulation::new(grid, cfg, &noise_state, Some(vec![false; 36]), None)?;
    let m0 = max_evolved(&sim.u);
    let dt = sim.compute_dt()?.dt;
    for _ in 0..steps {
        sim.step(dt)?;
    }
    Ok(max_evolved(&sim.u) / m0)
}

#[test]
fn degree_four_stability_boundary_lies_between_0_8_and_0_85() {
    for cfl in [0.7, 0.8] {
        let g = noise_growth(4, cfl, 1500).unwrap();
        assert!(g < 10.0, "CFL {cfl}: growth {g}");
    }
    match noise_growth(4, 0.85, 1500) {
        Ok(g) => assert!(g > 1e6, "CFL 0.85 expected to grow, got {g}"),
        Err(_) => {}
    }
}

#[test]
fn degree_three_is_stable_at_default_cfl() {
    let g = noise_growth(3, 0.9, 1500).unwrap();
    assert!(g < 10.0, "growth {g}");
}

#[test]
fn excessive_cfl_aborts_with_non_finite_state() {
    let err = noise_growth(4, 1.3, 5000).unwrap_err();
    assert!(
        matches!(err, Error::NonFinite { .. } | Error::PredictorDivergence { .. }),
        "unexpected error {err}"
    );
}

#[test]
fn sub_face_integrals_sum_to_coarse_face_integral() {
    for degree in 1..=5 {
        for r in [2, 3] {
            let ops = DgOperators::new(degree, r).unwrap();
            let b = &ops.basis;
            let m = ops.m;
            // Linear and degree-N traces.
            for coeffs in [vec![0.7, -1.3], (0..=degree).map(|k| 1.0 / (k as f64 + 1.5)).collect::<Vec<_>>()] {
                let nodal: Vec<f64> = b.nodes.iter().map(|&x| peval(&coeffs, x)).collect();
                let coarse: f64 = b.weights.iter().zip(&nodal).map(|(w, f)| w * f).sum();
                let mut fine = 0.0;
                for k in 0..r {
                    let interp = &ops.sub_interp[k];
                    for q in 0..m {
                        let v: f64 = (0..m).map(|j| interp[q * m + j] * nodal[j]).sum();
                        fine += b.weights[q] * v / r as f64;
                    }
                }
                assert!((fine - coarse).abs() < 1e-12, "N={degree} r={r}: {fine} vs {coarse}");
            }
        }
    }
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let run = || {
        let grid = periodic_grid(5);
        let cfg = SolverConfig {
            degree: 3,
            ..Default::default()
        };
        let mut sim = Simulation::new(grid, cfg, &noise_state, Some(vec![false; 25]), None).unwrap();
        let dt = sim.compute_dt().unwrap().dt;
        for _ in 0..20 {
            sim.step(dt).unwrap();
        }
        sim.u
    };
    let a = run();
    let b = run();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}
