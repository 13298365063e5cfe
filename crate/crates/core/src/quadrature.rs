//! Quadrature rules realizing the reference measure on boxes and on S^2,
//! plus the `Measure` abstraction combining a rule with a density.
//!
//! Conventions:
//!
//! * every rule's weights sum to 1, i.e. the rule integrates against the
//!   normalized reference measure of its domain (normalized Lebesgue on a
//!   box, normalized surface measure on the sphere);
//! * the rule records the plain Lebesgue `volume` of a box so callers can
//!   convert to unnormalized integrals where the mollifier formulas need
//!   them (mollifiers on boxes are densities against plain Lebesgue).

use crate::domain::{check_box, Ambient};
use crate::error::{McdError, Result};
use crate::num::{pairwise_sum, pairwise_sum_by};

/// Gauss-Legendre nodes and weights on [-1, 1]; weights sum to 2.
///
/// Nodes are found by Newton iteration from the Chebyshev-like initial
/// guess and mirrored so the rule is exactly symmetric.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // i-th root counted from +1 downwards
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // One clean-up iteration to settle the last bit.
        let (p, d) = legendre_with_derivative(n, x);
        x -= p / d;
        let dp = legendre_with_derivative(n, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Chebyshev rule of the first kind: integrates
/// `f(t) (1 - t^2)^{-1/2}` exactly for polynomial `f` of degree <= 2n - 1.
pub fn gauss_chebyshev_first(n: usize) -> (Vec<f64>, Vec<f64>) {
    let w = std::f64::consts::PI / n as f64;
    let nodes = (0..n)
        .map(|i| (std::f64::consts::PI * (2.0 * (n - i) as f64 - 1.0) / (2.0 * n as f64)).cos())
        .collect();
    (nodes, vec![w; n])
}

/// Gauss-Chebyshev rule of the second kind: integrates
/// `f(t) (1 - t^2)^{1/2}` exactly for polynomial `f` of degree <= 2n - 1.
pub fn gauss_chebyshev_second(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in (1..=n).rev() {
        let theta = std::f64::consts::PI * i as f64 / (n + 1) as f64;
        nodes.push(theta.cos());
        weights.push(std::f64::consts::PI / (n + 1) as f64 * theta.sin() * theta.sin());
    }
    (nodes, weights)
}

/// Integral over [-1, 1] of `f(t) (1 - t^2)^{half_exponent / 2}`.
///
/// The weight exponent is given in half units so the Gegenbauer weights
/// `(1 - t^2)^{(n-3)/2}` of every sphere dimension n >= 2 are representable.
/// Exact for polynomial `f` when `points` is large enough.
pub fn integrate_power_weight(
    f: impl Fn(f64) -> f64,
    half_exponent: i32,
    points: usize,
) -> Result<f64> {
    if half_exponent < -1 {
        return Err(McdError::InvalidArgument(format!(
            "weight exponent {}/2 is not integrable on [-1, 1]",
            half_exponent
        )));
    }
    let (nodes, weights, fold): (Vec<f64>, Vec<f64>, i32) = if half_exponent == -1 {
        let (n, w) = gauss_chebyshev_first(points);
        (n, w, 0)
    } else if half_exponent.rem_euclid(2) == 0 {
        let (n, w) = gauss_legendre(points);
        (n, w, half_exponent / 2)
    } else {
        let (n, w) = gauss_chebyshev_second(points);
        (n, w, (half_exponent - 1) / 2)
    };
    let vals: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| {
            let poly_weight = (1.0 - t * t).powi(fold);
            w * poly_weight * f(t)
        })
        .collect();
    Ok(pairwise_sum(&vals))
}

/// Quadrature nodes and weights realizing the normalized reference measure
/// on a box or on S^2.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub domain: Ambient,
    /// Declared polynomial exactness degree.
    pub exactness: usize,
    /// Plain Lebesgue volume of the box; 1 on the sphere.
    pub volume: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `g` against the rule's normalized reference measure.
    pub fn integrate(&self, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        let vals: Vec<f64> = (0..self.len())
            .map(|i| self.weights[i] * g(self.node(i)))
            .collect();
        pairwise_sum(&vals)
    }
}

/// Tensor Gauss-Legendre rule on a box, normalized to total weight 1.
/// Exact for polynomials of degree `2 * points_per_axis - 1` per axis.
pub fn box_rule(lo: &[f64], hi: &[f64], points_per_axis: usize) -> Result<QuadratureRule> {
    check_box(lo, hi)?;
    if points_per_axis == 0 {
        return Err(McdError::InvalidArgument(
            "points_per_axis must be at least 1".into(),
        ));
    }
    let n = lo.len();
    let (gl_nodes, gl_weights) = gauss_legendre(points_per_axis);
    let total = points_per_axis.pow(n as u32);
    let mut nodes = Vec::with_capacity(total * n);
    let mut weights = Vec::with_capacity(total);
    let mut counter = vec![0usize; n];
    loop {
        let mut w = 1.0;
        for axis in 0..n {
            let u = gl_nodes[counter[axis]];
            nodes.push((lo[axis] + hi[axis]) / 2.0 + (hi[axis] - lo[axis]) / 2.0 * u);
            w *= gl_weights[counter[axis]] / 2.0;
        }
        weights.push(w);
        // odometer increment
        let mut axis = 0;
        loop {
            counter[axis] += 1;
            if counter[axis] < points_per_axis {
                break;
            }
            counter[axis] = 0;
            axis += 1;
            if axis == n {
                return Ok(QuadratureRule {
                    dim: n,
                    nodes,
                    weights,
                    domain: Ambient::Box {
                        lo: lo.to_vec(),
                        hi: hi.to_vec(),
                    },
                    exactness: 2 * points_per_axis - 1,
                    volume: lo.iter().zip(hi).map(|(a, b)| b - a).product(),
                });
            }
        }
    }
}

/// Product rule on S^2: Gauss-Legendre in cos(theta) times a uniform
/// azimuthal grid, normalized to total weight 1. Exact for spherical
/// polynomials of degree `min(2 n_theta - 1, n_phi - 1)`.
pub fn sphere_rule(n_theta: usize, n_phi: usize) -> Result<QuadratureRule> {
    if n_theta == 0 || n_phi == 0 {
        return Err(McdError::InvalidArgument(
            "sphere rule needs at least one node per direction".into(),
        ));
    }
    let (t_nodes, t_weights) = gauss_legendre(n_theta);
    let mut nodes = Vec::with_capacity(n_theta * n_phi * 3);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (t, wt) in t_nodes.iter().zip(&t_weights) {
        let st = (1.0 - t * t).max(0.0).sqrt();
        for j in 0..n_phi {
            let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
            nodes.push(st * phi.cos());
            nodes.push(st * phi.sin());
            nodes.push(*t);
            weights.push(wt / 2.0 / n_phi as f64);
        }
    }
    Ok(QuadratureRule {
        dim: 3,
        nodes,
        weights,
        domain: Ambient::Sphere2,
        exactness: (2 * n_theta - 1).min(n_phi - 1),
        volume: 1.0,
    })
}

/// Default points per axis for box rules at degree d: enough for degree
/// `2d` moment integrands plus headroom for a smooth density factor.
pub fn default_box_points(d: usize) -> usize {
    (2 * d + 16).max(48)
}

/// Default sphere resolution for degree d and zonal mollifier degree k.
pub fn default_sphere_resolution(d: usize, k: usize) -> (usize, usize) {
    let n_theta = (2 * d + k + 8).max(48);
    (n_theta, 2 * n_theta + 1)
}

/// Whether a measure is backed by a density against the reference measure
/// or by an empirical sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    DensityBacked,
    Empirical,
}

/// A quadrature-backed measure: either `f dlambda` with `f` evaluated at
/// the rule's nodes, or the empirical measure of a sample set.
#[derive(Clone)]
pub struct Measure {
    pub rule: QuadratureRule,
    density_values: Vec<f64>,
    density: Option<crate::density::DensityFn>,
    pub kind: MeasureKind,
    /// Total mass of the measure against the rule's normalized reference.
    pub total_mass: f64,
}

impl std::fmt::Debug for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Measure")
            .field("kind", &self.kind)
            .field("nodes", &self.rule.len())
            .field("total_mass", &self.total_mass)
            .finish()
    }
}

impl Measure {
    /// Measure with density `f` against the rule's normalized reference
    /// measure. The density must be finite and strictly positive at every
    /// node.
    pub fn with_density(
        rule: QuadratureRule,
        f: crate::density::DensityFn,
    ) -> Result<Self> {
        let mut density_values = Vec::with_capacity(rule.len());
        for i in 0..rule.len() {
            let v = f(rule.node(i));
            if !v.is_finite() {
                return Err(McdError::NonFiniteIntegrand { index: i });
            }
            if v <= 0.0 {
                return Err(McdError::InvalidArgument(format!(
                    "density must be strictly positive; value {v} at node {i}"
                )));
            }
            density_values.push(v);
        }
        let total_mass = pairwise_sum_by(rule.len(), &|i| rule.weight(i) * density_values[i]);
        Ok(Self {
            rule,
            density_values,
            density: Some(f),
            kind: MeasureKind::DensityBacked,
            total_mass,
        })
    }

    /// The normalized reference measure itself (f = 1).
    pub fn uniform(rule: QuadratureRule) -> Self {
        let n = rule.len();
        Self {
            rule,
            density_values: vec![1.0; n],
            density: Some(crate::density::uniform()),
            kind: MeasureKind::DensityBacked,
            total_mass: 1.0,
        }
    }

    /// Empirical measure of a flat sample array (`dim` coordinates per
    /// sample), with uniform weights.
    pub fn empirical(dim: usize, samples: Vec<f64>, domain: Ambient) -> Result<Self> {
        if dim == 0 || samples.is_empty() || !samples.len().is_multiple_of(dim) {
            return Err(McdError::InvalidArgument(
                "empirical sample array must be a nonempty multiple of dim".into(),
            ));
        }
        let count = samples.len() / dim;
        let volume = domain.volume();
        let rule = QuadratureRule {
            dim,
            nodes: samples,
            weights: vec![1.0 / count as f64; count],
            domain,
            exactness: 0,
            volume,
        };
        Ok(Self {
            rule,
            density_values: vec![1.0; count],
            density: None,
            kind: MeasureKind::Empirical,
            total_mass: 1.0,
        })
    }

    pub fn density_at_node(&self, i: usize) -> f64 {
        self.density_values[i]
    }

    /// The measure's density against the rule's normalized reference, if
    /// it is available as a function (not just node values).
    pub fn density_fn(&self) -> Option<&crate::density::DensityFn> {
        self.density.as_ref()
    }

    /// Integral of `g` against the measure: `sum_i w_i f(node_i) g(node_i)`.
    pub fn integrate(&self, mut g: impl FnMut(&[f64]) -> f64) -> Result<f64> {
        let mut vals = Vec::with_capacity(self.rule.len());
        for i in 0..self.rule.len() {
            let v = g(self.rule.node(i));
            if !v.is_finite() {
                return Err(McdError::NonFiniteIntegrand { index: i });
            }
            vals.push(self.rule.weight(i) * self.density_values[i] * v);
        }
        Ok(pairwise_sum(&vals))
    }
}

/// Module-level spelling of [`Measure::integrate`].
pub fn integrate(m: &Measure, g: impl FnMut(&[f64]) -> f64) -> Result<f64> {
    m.integrate(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::SplitMix64;

    #[test]
    fn gauss_legendre_known_values() {
        let (n3, w3) = gauss_legendre(3);
        assert!((n3[0] + 0.774_596_669_241_483_4).abs() < 1e-14);
        assert!((n3[1]).abs() < 1e-15);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-14);
        assert!((w3[0] - 5.0 / 9.0).abs() < 1e-14);
        // weights always sum to 2 and nodes are symmetric
        for n in [1, 2, 7, 48, 161] {
            let (nodes, weights) = gauss_legendre(n);
            let s: f64 = weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "n={n}: sum {s}");
            for i in 0..n {
                assert_eq!(nodes[i], -nodes[n - 1 - i]);
            }
        }
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        // degree 2n-1 exactness: int t^k dt = 2/(k+1) for even k
        for n in [4, 9, 33] {
            let (nodes, weights) = gauss_legendre(n);
            for k in (0..=(2 * n - 1)).step_by(2) {
                let q: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&t, &w)| w * t.powi(k as i32))
                    .sum();
                assert!(
                    (q - 2.0 / (k as f64 + 1.0)).abs() < 1e-12,
                    "n={n} k={k}: {q}"
                );
            }
        }
    }

    #[test]
    fn chebyshev_rules_are_exact_for_their_weights() {
        // int t^2 (1-t^2)^{-1/2} = pi/2; int t^2 (1-t^2)^{1/2} = pi/8
        let (n1, w1) = gauss_chebyshev_first(8);
        let q1: f64 = n1.iter().zip(&w1).map(|(&t, &w)| w * t * t).sum();
        assert!((q1 - std::f64::consts::PI / 2.0).abs() < 1e-13);
        let (n2, w2) = gauss_chebyshev_second(8);
        let q2: f64 = n2.iter().zip(&w2).map(|(&t, &w)| w * t * t).sum();
        assert!((q2 - std::f64::consts::PI / 8.0).abs() < 1e-13);
    }

    #[test]
    fn power_weight_integrator_matches_beta_values() {
        // int (1+t)^2 (1-t^2)^{e} dt for e in {-1/2, 0, 1/2, 1} against
        // closed forms 2^{2+2e} B(3 + e, 1 + e) with B the Beta function.
        // Spelled out: e = -1/2 -> 3 pi / 2; e = 0 -> 8/3;
        // e = 1/2 -> 5 pi / 8; e = 1 -> 8/5.
        let f = |t: f64| (1.0 + t) * (1.0 + t);
        let cases = [
            (-1, 3.0 * std::f64::consts::PI / 2.0),
            (0, 8.0 / 3.0),
            (1, 5.0 * std::f64::consts::PI / 8.0),
            (2, 8.0 / 5.0),
        ];
        for (half_exp, expect) in cases {
            let got = integrate_power_weight(f, half_exp, 16).unwrap();
            assert!(
                (got - expect).abs() < 1e-12,
                "half_exp={half_exp}: {got} vs {expect}"
            );
        }
        assert!(integrate_power_weight(f, -2, 8).is_err());
    }

    #[test]
    fn box_rule_normalized_moments() {
        let r = box_rule(&[-1.0], &[1.0], 3).unwrap();
        let m2 = r.integrate(|x| x[0] * x[0]);
        assert!((m2 - 1.0 / 3.0).abs() < 1e-14);

        let r = box_rule(&[0.0], &[1.0], 5).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14);

        let r = box_rule(&[0.0, 0.0], &[1.0, 2.0], 4).unwrap();
        let m = r.integrate(|x| x[0] * x[1]);
        assert!((m - 0.5).abs() < 1e-14);
        assert_eq!(r.volume, 2.0);
    }

    #[test]
    fn box_rule_rejects_bad_input() {
        assert!(box_rule(&[1.0], &[0.0], 3).is_err());
        assert!(box_rule(&[0.0; 4], &[1.0; 4], 3).is_err());
        assert!(box_rule(&[0.0], &[1.0], 0).is_err());
    }

    #[test]
    fn box_rule_weights_positive_and_exact_on_random_polynomial() {
        let r = box_rule(&[-0.5, 0.25], &[1.5, 2.0], 6).unwrap();
        assert!(r.weights().iter().all(|&w| w > 0.0));
        let mut rng = SplitMix64::new(3);
        // random polynomial of the declared exactness degree per axis
        let deg = r.exactness;
        let coeffs: Vec<f64> = (0..=deg).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let poly1 = |x: f64| -> f64 {
            let mut acc = 0.0;
            for (k, c) in coeffs.iter().enumerate() {
                acc += c * x.powi(k as i32);
            }
            acc
        };
        let got = r.integrate(|x| poly1(x[0]));
        // analytic: mean over the first axis of the polynomial
        let (a, b) = (-0.5f64, 1.5f64);
        let mut analytic = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            let q = k as i32 + 1;
            analytic += c * (b.powi(q) - a.powi(q)) / (q as f64 * (b - a));
        }
        assert!((got - analytic).abs() < 1e-10);
    }

    #[test]
    fn sphere_rule_basics() {
        let r = sphere_rule(2, 5).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14);

        let r = sphere_rule(16, 33).unwrap();
        let z2 = r.integrate(|x| x[2] * x[2]);
        assert!((z2 - 1.0 / 3.0).abs() < 1e-13);
        // symmetry oracle: the three squared coordinates integrate alike
        let x2 = r.integrate(|x| x[0] * x[0]);
        let y2 = r.integrate(|x| x[1] * x[1]);
        assert!((x2 - z2).abs() < 1e-13 && (y2 - z2).abs() < 1e-13);
    }

    #[test]
    fn sphere_rule_kills_nonconstant_harmonics() {
        use crate::basis::eval_sph_harmonic;
        let r = sphere_rule(8, 17).unwrap();
        for l in 1..=8usize {
            for m in -(l as i32)..=(l as i32) {
                let v = r.integrate(|x| eval_sph_harmonic(l, m, x).unwrap());
                assert!(v.abs() < 1e-12, "l={l} m={m}: {v}");
            }
        }
    }

    #[test]
    fn sphere_rule_exactness_on_monomials() {
        // int x^{2p} y^{2q} z^{2r} dlambda = (2p-1)!! (2q-1)!! (2r-1)!! /
        // (2p+2q+2r+1)!!; odd powers vanish.
        fn double_factorial(k: i64) -> f64 {
            let mut v = 1.0;
            let mut i = k;
            while i > 1 {
                v *= i as f64;
                i -= 2;
            }
            v
        }
        let r = sphere_rule(10, 21).unwrap();
        for p in 0..=3i64 {
            for q in 0..=3i64 {
                for rr in 0..=3i64 {
                    let deg = 2 * (p + q + rr);
                    if deg as usize > r.exactness {
                        continue;
                    }
                    let got = r.integrate(|x| {
                        x[0].powi(2 * p as i32) * x[1].powi(2 * q as i32) * x[2].powi(2 * rr as i32)
                    });
                    let expect = double_factorial(2 * p - 1)
                        * double_factorial(2 * q - 1)
                        * double_factorial(2 * rr - 1)
                        / double_factorial(2 * (p + q + rr) + 1);
                    assert!(
                        (got - expect).abs() < 1e-10,
                        "p={p} q={q} r={rr}: {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn measure_integrate_matches_spec_examples() {
        // uniform box measure, g = const
        let m = Measure::uniform(box_rule(&[0.0], &[1.0], 8).unwrap());
        assert!((m.integrate(|_| 3.25).unwrap() - 3.25).abs() < 1e-14);

        // empirical measure: integral is the sample mean
        let samples = vec![0.0, 0.5, 1.0, 2.0];
        let m = Measure::empirical(
            1,
            samples.clone(),
            Ambient::boxed(vec![0.0], vec![2.0]).unwrap(),
        )
        .unwrap();
        let got = m.integrate(|x| x[0] * x[0]).unwrap();
        let mean: f64 = samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64;
        assert!((got - mean).abs() < 1e-14);

        // non-finite integrand is an error
        let m = Measure::uniform(box_rule(&[0.0], &[1.0], 4).unwrap());
        assert!(m.integrate(|x| 1.0 / (x[0] - x[0])).is_err());
    }

    #[test]
    fn vmf_mixture_normalizes_to_one() {
        // density-backed sphere measure with a von Mises-Fisher density
        // integrates to 1 against the probability surface measure
        let rule = sphere_rule(32, 65).unwrap();
        let f = crate::density::vmf_mixture(3.0, vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let m = Measure::with_density(rule, f).unwrap();
        assert!((m.total_mass - 1.0).abs() < 1e-8);
        assert!((m.integrate(|_| 1.0).unwrap() - 1.0).abs() < 1e-8);
    }
}
