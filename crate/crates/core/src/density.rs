//! Ground-truth densities for experiments, expressed against the
//! normalized reference measure of their domain (so "uniform" is f = 1).

use std::sync::Arc;

use crate::error::{McdError, Result};

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The constant density 1 (the normalized reference measure itself).
pub fn uniform() -> DensityFn {
    Arc::new(|_| 1.0)
}

/// Equally weighted mixture of von Mises-Fisher densities on S^2 against
/// the normalized surface measure:
/// `f(y) = (1/len) sum_i kappa/sinh(kappa) exp(kappa <mu_i, y>)`.
///
/// The normalization `kappa / sinh(kappa)` is analytic (it is
/// `4 pi C(kappa)` for the usual surface-measure constant
/// `C(kappa) = kappa / (4 pi sinh kappa)`). `kappa = 0` degenerates to the
/// uniform density.
pub fn vmf_mixture(kappa: f64, means: Vec<[f64; 3]>) -> Result<DensityFn> {
    if kappa < 0.0 {
        return Err(McdError::InvalidArgument(format!(
            "vMF concentration must be nonnegative, got {kappa}"
        )));
    }
    if means.is_empty() {
        return Err(McdError::InvalidArgument("vMF mixture needs a mean".into()));
    }
    for mu in &means {
        let n = (mu[0] * mu[0] + mu[1] * mu[1] + mu[2] * mu[2]).sqrt();
        if (n - 1.0).abs() > 1e-10 {
            return Err(McdError::InvalidArgument(format!(
                "vMF mean must be a unit vector (|mu| = {n})"
            )));
        }
    }
    if kappa == 0.0 {
        return Ok(uniform());
    }
    let scale = kappa / kappa.sinh();
    let weight = 1.0 / means.len() as f64;
    Ok(Arc::new(move |y: &[f64]| {
        let mut acc = 0.0;
        for mu in &means {
            let dot = mu[0] * y[0] + mu[1] * y[1] + mu[2] * y[2];
            acc += scale * (kappa * dot).exp();
        }
        weight * acc
    }))
}

/// The mixture of three vMF components with means on the canonical basis
/// vectors; `f3` is this density at kappa = 3.
pub fn vmf_canonical_mixture(kappa: f64) -> DensityFn {
    vmf_mixture(
        kappa,
        vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    )
    .expect("canonical means are unit vectors")
}

/// Smooth strictly positive density `(2 + sin(2 pi x)) / 2` on [0, 1]
/// (already normalized there). Evaluated on the first coordinate.
pub fn smooth_1d() -> DensityFn {
    Arc::new(|x: &[f64]| (2.0 + (std::f64::consts::TAU * x[0]).sin()) / 2.0)
}

/// Univariate polynomial density `sum_k c_k x^k` in the first coordinate.
/// Positivity is enforced where the measure is built (at quadrature nodes).
pub fn polynomial_1d(coeffs: Vec<f64>) -> Result<DensityFn> {
    if coeffs.is_empty() {
        return Err(McdError::InvalidArgument(
            "polynomial density needs at least one coefficient".into(),
        ));
    }
    Ok(Arc::new(move |x: &[f64]| {
        let mut acc = 0.0;
        for c in coeffs.iter().rev() {
            acc = acc * x[0] + c;
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_1d_is_normalized_and_positive() {
        let f = smooth_1d();
        let rule = crate::quadrature::box_rule(&[0.0], &[1.0], 24).unwrap();
        let mass = rule.integrate(|x| f(x));
        assert!((mass - 1.0).abs() < 1e-12);
        for i in 0..rule.len() {
            assert!(f(rule.node(i)) > 0.0);
        }
    }

    #[test]
    fn vmf_kappa_zero_is_uniform() {
        let f = vmf_mixture(0.0, vec![[0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(f(&[1.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn vmf_rejects_bad_input() {
        assert!(vmf_mixture(-1.0, vec![[0.0, 0.0, 1.0]]).is_err());
        assert!(vmf_mixture(1.0, vec![[0.0, 0.0, 2.0]]).is_err());
        assert!(vmf_mixture(1.0, vec![]).is_err());
    }

    #[test]
    fn polynomial_density_horner() {
        let f = polynomial_1d(vec![1.0, -2.0, 3.0]).unwrap();
        let x = 0.5;
        assert!((f(&[x]) - (1.0 - 2.0 * x + 3.0 * x * x)).abs() < 1e-15);
    }
}
