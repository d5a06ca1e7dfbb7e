//! Gauss rules on [-1, 1] for the weights (1+t)^b, built by Golub-Welsch.

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// n-point rule for the weight (1+t)^b on [-1, 1], b > -1.
pub fn gauss_jacobi(n: usize, b: f64) -> Rule {
    assert!(n >= 1 && b > -1.0);
    let a = 0.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let alpha = if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };
        m[(k, k)] = alpha;
        if k + 1 < n {
            let j = kf + 1.0;
            let s = 2.0 * j + a + b;
            let beta = 4.0 * j * (j + a) * (j + b) * (j + a + b) / (s * s * (s + 1.0) * (s - 1.0));
            let off = beta.sqrt();
            m[(k, k + 1)] = off;
            m[(k + 1, k)] = off;
        }
    }
    // with a = 0 the total mass is 2^(b+1)/(b+1)
    let mu0 = 2f64.powf(b + 1.0) / (b + 1.0);
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi(n, 0.0)
}

/// Rules needed by the strip integrator: plain Legendre and Jacobi rules for
/// the corner exponents alpha - 1 in {-1/2, 1/2, 1}.
#[derive(Clone, Debug)]
pub struct RuleSet {
    pub n: usize,
    pub legendre: Rule,
    jacobi: Vec<(f64, Rule)>,
}

impl RuleSet {
    pub fn new(n: usize) -> Self {
        let jacobi = [-0.5, 0.5, 1.0].iter().map(|&b| (b, gauss_jacobi(n, b))).collect();
        RuleSet { n, legendre: gauss_legendre(n), jacobi }
    }

    pub fn jacobi(&self, b: f64) -> &Rule {
        self.jacobi
            .iter()
            .find(|(bb, _)| (bb - b).abs() < 1e-12)
            .map(|(_, r)| r)
            .expect("corner exponent without a prepared rule")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(8);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_half_moments() {
        let r = gauss_jacobi(10, -0.5);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t * t).sum();
        // substitute u = 1+t: int_0^2 u^{-1/2} (u-1)^2 du
        let exact = 2f64.powf(2.5) / 2.5 - 2.0 * 2f64.powf(1.5) / 1.5 + 2f64.powf(0.5) / 0.5;
        assert!((s - exact).abs() < 1e-13, "{s} {exact}");
    }

    #[test]
    fn jacobi_weight_one() {
        let r = gauss_jacobi(12, 1.0);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }
}
