//! Nodal Lagrange bases on Gauss–Legendre points of the unit interval.

use crate::error::{Error, Result};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 9;

/// Gauss–Legendre nodes and weights for `n` points on [0, 1].
///
/// Nodes are returned in ascending order; the rule integrates polynomials of
/// degree `2n − 1` exactly.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        // Map from [-1, 1] to [0, 1]; descending z gives ascending x.
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Legendre polynomial `P_n(z)` and its derivative.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// One-dimensional nodal basis of degree `N` on [0, 1].
#[derive(Debug, Clone)]
pub struct Basis {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `dmat[k][l] = ψ_l'(x_k)`.
    pub dmat: Vec<Vec<f64>>,
    /// `ψ_k(0)`.
    pub left: Vec<f64>,
    /// `ψ_k(1)`.
    pub right: Vec<f64>,
    bary: Vec<f64>,
}

/// Builds the Gauss–Legendre nodal basis of degree `n`.
pub fn build_basis(n: usize) -> Result<Basis> {
    if n > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(n));
    }
    let (nodes, weights) = gauss_legendre(n + 1);
    let m = n + 1;
    let bary: Vec<f64> = (0..m)
        .map(|j| {
            let p: f64 = (0..m).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
            1.0 / p
        })
        .collect();
    let mut dmat = vec![vec![0.0; m]; m];
    for k in 0..m {
        let mut diag = 0.0;
        for l in 0..m {
            if l != k {
                let v = bary[l] / bary[k] / (nodes[k] - nodes[l]);
                dmat[k][l] = v;
                diag -= v;
            }
        }
        dmat[k][k] = diag;
    }
    let mut b = Basis {
        degree: n,
        nodes,
        weights,
        dmat,
        left: vec![],
        right: vec![],
        bary,
    };
    b.left = b.eval(0.0);
    b.right = b.eval(1.0);
    Ok(b)
}

impl Basis {
    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values of all basis functions at `x`.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let m = self.len();
        if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
            let mut v = vec![0.0; m];
            v[j] = 1.0;
            return v;
        }
        let t: Vec<f64> = (0..m).map(|j| self.bary[j] / (x - self.nodes[j])).collect();
        let s: f64 = t.iter().sum();
        t.into_iter().map(|v| v / s).collect()
    }

    /// Derivatives of all basis functions at `x`.
    pub fn eval_deriv(&self, x: f64) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|j| {
                // ψ_j'(x) = Σ_{k≠j} 1/(x_j−x_k) Π_{l≠j,k} (x−x_l)/(x_j−x_l)
                let mut acc = 0.0;
                for k in 0..m {
                    if k == j {
                        continue;
                    }
                    let mut p = 1.0 / (self.nodes[j] - self.nodes[k]);
                    for l in 0..m {
                        if l != j && l != k {
                            p *= (x - self.nodes[l]) / (self.nodes[j] - self.nodes[l]);
                        }
                    }
                    acc += p;
                }
                acc
            })
            .collect()
    }

    /// Interpolation matrix `M[q][k] = ψ_k(points[q])`.
    pub fn interpolation_matrix(&self, points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&x| self.eval(x)).collect()
    }

    /// Evaluates a nodal 1D polynomial at `x`.
    pub fn interpolate(&self, coeffs: &[f64], x: f64) -> f64 {
        self.eval(x).iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn degree_zero() {
        let b = build_basis(0).unwrap();
        assert_eq!(b.nodes.len(), 1);
        assert_relative_eq!(b.nodes[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(b.weights[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degree_one_nodes() {
        let b = build_basis(1).unwrap();
        let s3 = 3f64.sqrt();
        assert_relative_eq!(b.nodes[0], (3.0 - s3) / 6.0, epsilon = 1e-15);
        assert_relative_eq!(b.nodes[1], (3.0 + s3) / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_high_degree() {
        assert!(matches!(build_basis(10), Err(Error::UnsupportedDegree(10))));
    }

    #[test]
    fn monomial_exactness() {
        for n in 0..=MAX_DEGREE {
            let b = build_basis(n).unwrap();
            for p in 0..=(2 * n + 1) {
                let q: f64 = b.nodes.iter().zip(&b.weights).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert_relative_eq!(q, 1.0 / (p as f64 + 1.0), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn cardinality_and_derivatives() {
        for n in 1..=MAX_DEGREE {
            let b = build_basis(n).unwrap();
            for (j, &x) in b.nodes.iter().enumerate() {
                let v = b.eval(x);
                for (k, &vk) in v.iter().enumerate() {
                    assert_eq!(vk, if j == k { 1.0 } else { 0.0 });
                }
            }
            // Differentiate x^n exactly.
            let f: Vec<f64> = b.nodes.iter().map(|x| x.powi(n as i32)).collect();
            for k in 0..=n {
                let d: f64 = (0..=n).map(|l| b.dmat[k][l] * f[l]).sum();
                let exact = n as f64 * b.nodes[k].powi(n as i32 - 1);
                assert_relative_eq!(d, exact, epsilon = 1e-10 * (1.0 + exact.abs()));
                let d2: f64 = b.eval_deriv(b.nodes[k]).iter().zip(&f).map(|(a, c)| a * c).sum();
                assert_relative_eq!(d2, exact, epsilon = 1e-10 * (1.0 + exact.abs()));
            }
            let s: f64 = b.right.iter().sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-13);
        }
    }
}
