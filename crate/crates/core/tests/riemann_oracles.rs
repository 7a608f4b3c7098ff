//! Eigenstructure and interface-state checks against generic numerical methods.

mod common;

use common::*;
use dimseis::elastic::*;
use dimseis::riemann::*;
use dimseis::state::*;
use nalgebra::{DMatrix, DVector};

fn sample_state(alpha: f64) -> State13 {
    let mut q = State13::at_rest(unit_material(), alpha);
    q[SXX] = 0.3;
    q[SXY] = -0.2;
    q[SYY] = 0.1;
    q[AU] = 0.1 * alpha;
    q[AV] = -0.05 * alpha;
    q
}

fn sorted_real_eigenvalues(b: &Matrix13) -> Vec<f64> {
    let ev = b.complex_eigenvalues();
    for z in ev.iter() {
        assert!(z.im.abs() < 1e-8, "complex eigenvalue {z}");
    }
    let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    re
}

/// Dimension of the null space of `b − l I` from its singular values.
fn nullity(b: &Matrix13, l: f64) -> usize {
    let a = b - Matrix13::identity() * l;
    let sv = a.singular_values();
    let tol = 1e-9 * sv.max().max(1.0);
    sv.iter().filter(|&&s| s < tol).count()
}

#[test]
fn eigenvalues_at_half_alpha_match_numerical_solver() {
    let reg = reg();
    let q = sample_state(0.5);
    let f = 0.5 / 0.2505f64.sqrt();
    assert!((f - 0.999_001_5).abs() < 1e-7);
    for axis in 1..=3 {
        let b = assemble_b(&q, axis, &reg).unwrap();
        let numeric = sorted_real_eigenvalues(&b);
        let analytic = eigenvalues(&q, axis, &reg).unwrap();
        for (n, a) in numeric.iter().zip(analytic.iter()) {
            assert!((n - a).abs() < 1e-7, "axis {axis}: {n} vs {a}");
        }
        assert!((analytic[12] - 2.0 * f).abs() < 1e-14);
        assert!((analytic[10] - f).abs() < 1e-14);
    }
}

#[test]
fn eigenvectors_at_alpha_0_7_span_numerical_eigenspaces() {
    let reg = reg();
    let q = sample_state(0.7);
    for axis in 1..=3 {
        let b = assemble_b(&q, axis, &reg).unwrap();
        let lam = eigenvalues(&q, axis, &reg).unwrap();
        let r = right_eigenvectors(&q, axis, &reg).unwrap();
        // Residual of every column.
        for k in 0..NVAR {
            let col = r.column(k);
            let res = (b * col - col * lam[k]).norm();
            assert!(res < 1e-12 * col.norm().max(1.0), "axis {axis} column {k}: residual {res:e}");
        }
        // Columns are independent and each eigenvalue group fills its eigenspace.
        let sv = r.singular_values();
        assert!(sv.min() > 1e-8 * sv.max(), "eigenvector matrix is singular");
        for (l, mult) in [(lam[0], 1), (lam[1], 2), (0.0, 7), (lam[11], 2), (lam[12], 1)] {
            assert_eq!(nullity(&b, l), mult, "axis {axis}, eigenvalue {l}");
        }
        // Simple eigenvalues: the column is parallel to the numerical null vector.
        for k in [0, 12] {
            let a = b - Matrix13::identity() * lam[k];
            let svd = a.svd(false, true);
            let vt = svd.v_t.unwrap();
            let (imin, _) = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .unwrap();
            let v = vt.row(imin).transpose();
            let c = r.column(k).normalize();
            let cos = v.dot(&c).abs();
            assert!((cos - 1.0).abs() < 1e-10, "axis {axis} column {k}: cos {cos}");
        }
    }
}

#[test]
fn material_contact_jump_produces_no_fluctuation() {
    let reg = reg();
    let path = PathSpec::default();
    let mut r = rng(7);
    for _ in 0..50 {
        let ql = State13::at_rest(random_material(&mut r), rand::Rng::random_range(&mut r, 0.0..=1.0));
        let qr = State13::at_rest(random_material(&mut r), rand::Rng::random_range(&mut r, 0.0..=1.0));
        for axis in Axis::ALL {
            // The jump lies in the null space of the Roe matrix.
            let b = roe_matrix(&ql, &qr, axis.index() + 1, &path, &reg).unwrap();
            let dq = DVector::from_iterator(NVAR, (0..NVAR).map(|i| qr[i] - ql[i]));
            let bd = DMatrix::from_iterator(NVAR, NVAR, b.iter().copied()) * &dq;
            assert_eq!(bd.amax(), 0.0);
            for kind in [SolverKind::Godunov, SolverKind::Rusanov] {
                let f = fluctuations(kind, &ql, &qr, axis, &path, &reg);
                assert!(f.d_minus.iter().chain(&f.d_plus).all(|&x| x == 0.0), "{kind:?}");
            }
        }
    }
}

/// Elastic energy density ½ρ|v|² + ½ σ : C⁻¹ : σ of a solid state.
fn energy(q: &State13) -> f64 {
    let m = q.material();
    let v = [q[AU], q[AV], q[AW]];
    let kin = 0.5 * m.rho * v.iter().map(|x| x * x).sum::<f64>();
    let tr = q[SXX] + q[SYY] + q[SZZ];
    let nu = m.lambda / (3.0 * m.lambda + 2.0 * m.mu);
    let eps_dd = |s: f64| (s - nu * tr) / (2.0 * m.mu);
    let normal = q[SXX] * eps_dd(q[SXX]) + q[SYY] * eps_dd(q[SYY]) + q[SZZ] * eps_dd(q[SZZ]);
    let shear = (q[SXY].powi(2) + q[SYZ].powi(2) + q[SXZ].powi(2)) / m.mu;
    kin + 0.5 * (normal + shear)
}

#[test]
fn rusanov_dissipates_more_than_godunov_on_p_wave_jump() {
    let reg = reg();
    let path = PathSpec::default();
    let mut ql = State13::at_rest(unit_material(), 1.0);
    let mut qr = ql;
    ql[SXX] = 1.0;
    ql[AU] = 0.3;
    qr[SYY] = 0.2;
    let nu = 0.4;
    let update = |kind| {
        let f = fluctuations(kind, &ql, &qr, Axis::X, &path, &reg);
        let (mut a, mut b) = (ql, qr);
        for v in 0..NEVOLVED {
            a[v] -= nu * f.d_minus[v];
            b[v] -= nu * f.d_plus[v];
        }
        energy(&a) + energy(&b)
    };
    let e0 = energy(&ql) + energy(&qr);
    let eg = update(SolverKind::Godunov);
    let er = update(SolverKind::Rusanov);
    assert!(eg < e0);
    assert!(er < eg, "rusanov {er} godunov {eg}");
}

/// Similarity solution of `q_t + B q_x = 0` by projection of the jump on the
/// generalized eigenspaces of `B`. Each space is the null space of
/// `(B − λ I)^m`, with `m` the algebraic multiplicity of `λ`, taken from a
/// singular value decomposition.
fn eigen_expansion(b: &Matrix13, ql: &State13, qr: &State13, xis: &[f64]) -> Vec<[f64; NVAR]> {
    let ev = sorted_real_eigenvalues(b);
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &l in &ev {
        match distinct.last_mut() {
            Some((d, m)) if (l - *d).abs() <= 1e-7 => *m += 1,
            _ => distinct.push((l, 1)),
        }
    }
    let mut vectors = Vec::new();
    let mut speeds = Vec::new();
    for &(l, mult) in &distinct {
        let shifted = b - Matrix13::identity() * l;
        let mut power = Matrix13::identity();
        for _ in 0..mult {
            power = shifted * power;
        }
        let svd = power.svd(false, true);
        let vt = svd.v_t.unwrap();
        let tol = 1e-9 * svd.singular_values.max().max(1.0);
        let before = vectors.len();
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s < tol {
                vectors.push(vt.row(k).transpose());
                speeds.push(l);
            }
        }
        assert_eq!(vectors.len() - before, mult, "eigenspace of {l}");
    }
    let r = DMatrix::from_columns(&vectors.iter().map(|v| DVector::from_column_slice(v.as_slice())).collect::<Vec<_>>());
    let jump = DVector::from_iterator(NVAR, (0..NVAR).map(|c| qr[c] - ql[c]));
    let coef = r.clone().lu().solve(&jump).unwrap();
    xis.iter()
        .map(|&xi| {
            let mut q = ql.0;
            for (k, &l) in speeds.iter().enumerate() {
                if l < xi {
                    for c in 0..NVAR {
                        q[c] += coef[k] * r[(c, k)];
                    }
                }
            }
            q
        })
        .collect()
}

#[test]
fn linearized_riemann_solution_matches_eigen_expansion() {
    let reg = reg();
    let path = PathSpec::default();
    let mut r = rng(11);
    let mat = random_material(&mut r);
    let ql = random_state(&mut r, mat, 1.0);
    let m = random_material(&mut r);
    let qr = random_state(&mut r, m, 0.6);
    for axis in 1..=2 {
        let b = roe_matrix(&ql, &qr, axis, &path, &reg).unwrap();
        let ev = sorted_real_eigenvalues(&b);
        let (cp, cs) = (ev[12], ev[11]);
        let xis = [-(cp + cs) / 2.0, -cs / 2.0, cs / 2.0, (cp + cs) / 2.0];
        let marched = eigen_expansion(&b, &ql, &qr, &xis);
        for (xi, m) in xis.iter().zip(&marched) {
            let exact = linearized_rp(&ql, &qr, axis, *xi, &path, &reg).unwrap();
            for c in 0..NVAR {
                assert!((exact[c] - m[c]).abs() < 1e-9, "axis {axis} ξ={xi} component {c}: {} vs {}", exact[c], m[c]);
            }
        }
    }
}
