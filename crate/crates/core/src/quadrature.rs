//! Quadrature rules over momentum space.
//!
//! [`QuadratureRule`] is a tensor Gauss-Hermite rule for `∫d³p f(p)` whose weights
//! already contain the inverse Gaussian factor, so it integrates plain functions
//! (not functions against `e^{−x²}`). It is exact for `e^{−|x|²}·poly(x)` of degree
//! `2n − 1` per axis in the scaled coordinate `x = (p − center)/scale`.
//!
//! [`PairRule`] integrates rotationally invariant two-point functions
//! `∫d³p_a ∫d³p_b F(|p_a|, |p_b|, cos θ_ab)` with Gauss-Legendre rules in both radii
//! (mapped onto [0, ∞) by `r = L t/(1 − t)`) and in `cos θ_ab`.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::lorentz::{energy, FourVector, LorentzTransform};
use crate::numerics::{pairwise_sum, par_map};

const MAX_NODES: usize = 256;

/// Gauss-Hermite nodes and weights for `∫ e^{−x²} f(x) dx`, by Newton iteration on the
/// normalised Hermite recurrence. Returns `(x, w, w·e^{x²})`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    assert!((1..=MAX_NODES).contains(&n), "node count {n} out of range");
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let scaled = x
        .iter()
        .zip(&w)
        .map(|(xi, wi)| wi * (xi * xi).exp())
        .collect();
    (x, w, scaled)
}

/// Gauss-Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(
        (1..=4 * MAX_NODES).contains(&n),
        "node count {n} out of range"
    );
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Nodes and weights approximating `∫d³p`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<Vector3<f64>>,
    weights: Vec<f64>,
    boundary: Vec<bool>,
    nodes_per_axis: usize,
    label: String,
}

impl QuadratureRule {
    /// Tensor Gauss-Hermite rule with `p = center + scale ∘ x`.
    pub fn gauss_hermite(center: Vector3<f64>, scale: Vector3<f64>, n: usize) -> Result<Self> {
        if !(1..=MAX_NODES).contains(&n) {
            return Err(Error::InvalidInput(format!(
                "nodes per axis {n} not in 1..={MAX_NODES}"
            )));
        }
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-positive quadrature scale {scale:?}"
            )));
        }
        let (x, _, w) = gauss_hermite(n);
        let mut nodes = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        let mut boundary = Vec::with_capacity(n * n * n);
        let edge = |i: usize| i == 0 || i == n - 1;
        let jac = scale.x * scale.y * scale.z;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    nodes.push(
                        center + Vector3::new(scale.x * x[i], scale.y * x[j], scale.z * x[k]),
                    );
                    weights.push(jac * w[i] * w[j] * w[k]);
                    boundary.push(edge(i) || edge(j) || edge(k));
                }
            }
        }
        let label = format!(
            "gauss-hermite n={n} center=({:.6},{:.6},{:.6}) scale=({:.6},{:.6},{:.6})",
            center.x, center.y, center.z, scale.x, scale.y, scale.z
        );
        Ok(Self {
            nodes,
            weights,
            boundary,
            nodes_per_axis: n,
            label,
        })
    }

    /// Carries the rule through a Lorentz transformation: `∫d³p f(p) = ∫d³q (ω_{Λq}/ω_q) f(Λq)`.
    pub fn transported(&self, lambda: &LorentzTransform) -> Self {
        let (nodes, weights): (Vec<_>, Vec<_>) = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(q, w)| {
                let p = lambda.apply(&FourVector::on_shell(*q)).spatial();
                (p, w * energy(&p) / energy(q))
            })
            .unzip();
        Self {
            nodes,
            weights,
            boundary: self.boundary.clone(),
            nodes_per_axis: self.nodes_per_axis,
            label: format!("{} transported", self.label),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True for nodes on the outermost layer of the tensor grid.
    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Σ_k w_k f(p_k)` with parallel evaluation and pairwise reduction.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&Vector3<f64>) -> f64 + Sync,
    {
        let idx: Vec<usize> = (0..self.len()).collect();
        let terms = par_map(&idx, |&k| self.weights[k] * f(&self.nodes[k]));
        pairwise_sum(&terms)
    }
}

/// Gauss-Legendre rule for `∫₀^∞ dr` under `r = L t/(1 − t)`.
#[derive(Clone, Debug)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn rational(n: usize, length: f64) -> Self {
        let (t, w) = gauss_legendre(n);
        let (nodes, weights) = t
            .iter()
            .zip(&w)
            .map(|(ti, wi)| {
                let u = 0.5 * (ti + 1.0);
                let r = length * u / (1.0 - u);
                (r, 0.5 * wi * length / ((1.0 - u) * (1.0 - u)))
            })
            .unzip();
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * f(*r))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Reduced rule for rotationally invariant two-point integrands.
#[derive(Clone, Debug)]
pub struct PairRule {
    pub radial: RadialRule,
    pub cosine: (Vec<f64>, Vec<f64>),
}

impl PairRule {
    pub fn new(radial_nodes: usize, length: f64, cosine_nodes: usize) -> Self {
        Self {
            radial: RadialRule::rational(radial_nodes, length),
            cosine: gauss_legendre(cosine_nodes),
        }
    }

    /// `∫d³p_a ∫d³p_b F = 8π² ∫r_a² dr_a ∫r_b² dr_b ∫d(cos θ) F(r_a, r_b, cos θ)`.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(f64, f64, f64) -> f64 + Sync,
    {
        let r = &self.radial;
        let (c, cw) = &self.cosine;
        let rows = par_map(&(0..r.nodes.len()).collect::<Vec<_>>(), |&a| {
            let ra = r.nodes[a];
            let mut terms = Vec::with_capacity(r.nodes.len() * c.len());
            for (rb, wb) in r.nodes.iter().zip(&r.weights) {
                for (ci, wc) in c.iter().zip(cw) {
                    terms.push(wb * wc * rb * rb * f(ra, *rb, *ci));
                }
            }
            r.weights[a] * ra * ra * pairwise_sum(&terms)
        });
        8.0 * PI * PI * pairwise_sum(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let (x, w, _) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-14);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn hermite_large_n_scaled_weights() {
        // ∫ e^{−2x²} dx = √(π/2) through the scaled weights.
        let (x, _, ws) = gauss_hermite(128);
        let s: f64 = x
            .iter()
            .zip(&ws)
            .map(|(x, w)| w * (-2.0 * x * x).exp())
            .sum();
        assert!((s - (PI / 2.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn legendre_moments() {
        let (x, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m12 - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_rule_gaussian_volume() {
        let rule = QuadratureRule::gauss_hermite(
            Vector3::new(0.3, -0.2, 1.0),
            Vector3::new(0.5, 1.0, 2.0),
            16,
        )
        .unwrap();
        let c = Vector3::new(0.3, -0.2, 1.0);
        let v = rule.integrate(|p| {
            let d = p - c;
            (-(d.x / 0.5).powi(2) - d.y.powi(2) - (d.z / 2.0).powi(2)).exp()
        });
        assert!((v - PI.powf(1.5)).abs() < 1e-12);
        assert_eq!(
            rule.boundary().iter().filter(|b| !**b).count(),
            14 * 14 * 14
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(
            QuadratureRule::gauss_hermite(Vector3::zeros(), Vector3::new(1.0, 0.0, 1.0), 4)
                .is_err()
        );
        assert!(QuadratureRule::gauss_hermite(Vector3::zeros(), Vector3::repeat(1.0), 0).is_err());
    }

    #[test]
    fn transported_rule_integrates_the_same_function() {
        let rule =
            QuadratureRule::gauss_hermite(Vector3::zeros(), Vector3::repeat(0.7), 24).unwrap();
        let boost = LorentzTransform::boost_from_velocity(&Vector3::new(0.0, 0.3, 0.4)).unwrap();
        let back = boost.inverse();
        let moved = rule.transported(&boost);
        // A density pulled back from the rest frame, as a boosted packet produces.
        let g = |q: &Vector3<f64>| (-q.norm_squared() / 0.49).exp();
        let f = |p: &Vector3<f64>| {
            let q = back.apply(&FourVector::on_shell(*p)).spatial();
            g(&q) * energy(&q) / energy(p)
        };
        let reference = rule.integrate(g);
        assert!((reference - (0.49 * PI).powf(1.5)).abs() < 1e-12);
        assert!((moved.integrate(f) - reference).abs() < 1e-12);
        let centre = boost.apply(&FourVector::rest()).spatial();
        let direct = QuadratureRule::gauss_hermite(centre, Vector3::repeat(0.7), 64)
            .unwrap()
            .integrate(f);
        assert!(
            (direct - reference).abs() < 1e-6 * reference,
            "{direct} vs {reference}"
        );
    }

    #[test]
    fn radial_rule_gaussian() {
        // ∫₀^∞ r² e^{−r²} dr = √π/4
        let rule = RadialRule::rational(96, 1.0);
        let v = rule.integrate(|r| r * r * (-r * r).exp());
        assert!((v - PI.sqrt() / 4.0).abs() < 1e-13);
    }

    #[test]
    fn pair_rule_factorises() {
        // ∫∫ e^{−|a|²−|b|²}(1 + cos θ) = π³
        let rule = PairRule::new(80, 1.0, 4);
        let v = rule.integrate(|a, b, c| (-a * a - b * b).exp() * (1.0 + c));
        assert!((v - PI.powi(3)).abs() < 1e-11);
    }
}
