//! The kernel engine: mollified Christoffel-Darboux kernel evaluation, the
//! support dichotomy with its exact lower bound, the density estimator with
//! its error decomposition, and the two-degree support classifier.
//!
//! For a measure mu with moment matrix M of a degree-d basis b, the kernel
//! is the quadratic form `MCD(x, y) = l_x(b)^T M^{-1} l_y(b)` where
//! `l_z(p) = int_A phi_z p dlambda`. Region A selects the use: the whole
//! variety for support location (SMCD), the support X for density
//! estimation (DMCD). The estimator of `1/f(x)` is
//! `g_hat(x) = MCD(x, x) / ||phi_x||^2`.

use crate::basis::Basis;
use crate::domain::{Ambient, SupportDescriptor};
use crate::error::{McdError, Result};
use crate::moments::{build_moment_matrix, MomentMatrix};
use crate::mollifier::{MollifierFamily, MollifierSpec, Region, Resolution};
use crate::quadrature::Measure;

/// Everything needed to evaluate the kernel and the estimator: the
/// measure, a factorized moment matrix, the region, and the mollifier
/// family at a fixed resolution (centers vary per query).
pub struct KernelContext {
    pub measure: Measure,
    pub basis: Basis,
    pub moments: MomentMatrix,
    pub region: Region,
    pub family: MollifierFamily,
    pub resolution: Resolution,
}

impl KernelContext {
    /// Builds the moment matrix and validates that the basis, measure and
    /// mollifier family live on the same ambient. Fails when the
    /// factorization breaks down or its pivot ratio exceeds the safety
    /// threshold.
    pub fn build(
        measure: Measure,
        basis: Basis,
        region: Region,
        family: MollifierFamily,
        resolution: Resolution,
    ) -> Result<Self> {
        if basis.dim() != measure.rule.dim {
            return Err(McdError::DimensionMismatch {
                expected: measure.rule.dim,
                got: basis.dim(),
            });
        }
        let on_sphere = matches!(measure.rule.domain, Ambient::Sphere2);
        match family {
            MollifierFamily::ZonalAlgebraic => {
                if !on_sphere || !matches!(basis, Basis::Harmonic(_)) {
                    return Err(McdError::Unsupported(
                        "zonal mollifiers require the sphere with a harmonic basis".into(),
                    ));
                }
                if resolution.zonal_degree().is_none() {
                    return Err(McdError::InvalidArgument(
                        "zonal mollifiers take an integer degree resolution".into(),
                    ));
                }
            }
            MollifierFamily::LasserreBox | MollifierFamily::SmoothBump => {
                if on_sphere {
                    return Err(McdError::Unsupported(
                        "Euclidean mollifier families require a box domain".into(),
                    ));
                }
                if resolution.epsilon().is_none() {
                    return Err(McdError::InvalidArgument(
                        "Euclidean mollifiers take an epsilon resolution".into(),
                    ));
                }
            }
        }
        let moments = build_moment_matrix(&measure, &basis)?;
        moments.check_condition()?;
        Ok(Self {
            measure,
            basis,
            moments,
            region,
            family,
            resolution,
        })
    }

    pub fn ambient(&self) -> &Ambient {
        &self.measure.rule.domain
    }

    /// The mollifier of this context centered at `z`.
    pub fn mollifier_at(&self, z: &[f64]) -> Result<MollifierSpec> {
        match self.family {
            MollifierFamily::LasserreBox => MollifierSpec::lasserre_box(
                z.to_vec(),
                self.resolution.epsilon().unwrap(),
                self.ambient().clone(),
            ),
            MollifierFamily::SmoothBump => MollifierSpec::smooth_bump(
                z.to_vec(),
                self.resolution.epsilon().unwrap(),
                self.ambient().clone(),
            ),
            MollifierFamily::ZonalAlgebraic => {
                if z.len() != 3 {
                    return Err(McdError::DimensionMismatch {
                        expected: 3,
                        got: z.len(),
                    });
                }
                MollifierSpec::zonal([z[0], z[1], z[2]], self.resolution.zonal_degree().unwrap())
            }
        }
    }

    /// l-vector of the mollifier centered at `z` against the context basis.
    pub fn ell(&self, z: &[f64]) -> Result<Vec<f64>> {
        let spec = self.mollifier_at(z)?;
        Ok(spec.ell_vector(&self.basis, self.region)?.values)
    }

    /// `MCD(x, y) = l_x^T M^{-1} l_y`.
    pub fn mcd_eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let rx = self.ell(x)?;
        let ry = self.ell(y)?;
        Ok(self
            .moments
            .weighted_inner_truncated(&rx, &ry, self.moments.size()))
    }

    /// Kernel diagonal `MCD(z, z)`.
    pub fn diag(&self, z: &[f64]) -> Result<f64> {
        let r = self.ell(z)?;
        self.moments.weighted_norm_sq(&r)
    }

    /// Kernel diagonal truncated to the degree-`d` sub-basis; the graded
    /// ordering makes this the exact degree-d kernel of the same measure.
    pub fn diag_at_degree(&self, z: &[f64], d: usize) -> Result<f64> {
        let r = self.ell(z)?;
        let size = self.basis.len_at_degree(d);
        Ok(self.moments.weighted_norm_sq_truncated(&r, size))
    }

    /// `||phi_x||^2_{L^2(lambda)}` for this context's family at center x.
    pub fn mollifier_norm_sq(&self, x: &[f64]) -> Result<f64> {
        self.mollifier_at(x)?.norm_sq()
    }

    /// Density estimator at x: `g_hat = DMCD(x, x) / ||phi_x||^2` and the
    /// recovered density `f_hat = 1/g_hat` (only when g_hat > 0).
    pub fn density_estimate(&self, x: &[f64]) -> Result<DensityEstimate> {
        self.density_estimate_at_degree(x, self.basis.degree())
    }

    pub fn density_estimate_at_degree(&self, x: &[f64], d: usize) -> Result<DensityEstimate> {
        if self.region != Region::DensityEstimator {
            return Err(McdError::Unsupported(
                "density estimation requires a context built with the density region".into(),
            ));
        }
        let norm_sq = self.mollifier_norm_sq(x)?;
        let g_hat = self.diag_at_degree(x, d)? / norm_sq;
        let f_hat = if g_hat > 0.0 { Some(1.0 / g_hat) } else { None };
        Ok(DensityEstimate { g_hat, f_hat })
    }

    /// The infinite-degree limit `||h_x||^2_{L^2(mu)} = int phi_x^2 / f
    /// dlambda` by direct quadrature over the mollifier support, where f is
    /// the density against the reference measure of the mollifier formulas
    /// (plain Lebesgue on boxes). Needs the measure to carry its density as
    /// a function.
    pub fn h_norm_sq_limit(&self, x: &[f64]) -> Result<f64> {
        let Some(f) = self.measure.density_fn() else {
            return Err(McdError::Unsupported(
                "the ground-truth limit needs a density-backed measure".into(),
            ));
        };
        let volume = self.measure.rule.volume;
        let spec = self.mollifier_at(x)?;
        spec.integrate_sq_against(self.region, |y| volume / f(y))
    }

    /// Full per-point diagnostics: the estimate, the infinite-degree limit,
    /// and the projection/approximation error split. `err_total` compares
    /// against the true `g(x) = 1/f(x)` (density against the mollifier
    /// reference measure).
    pub fn estimate_with_errors(&self, x: &[f64]) -> Result<PointEstimate> {
        self.estimate_with_errors_at_degree(x, self.basis.degree())
    }

    pub fn estimate_with_errors_at_degree(&self, x: &[f64], d: usize) -> Result<PointEstimate> {
        let est = self.density_estimate_at_degree(x, d)?;
        let norm_sq = self.mollifier_norm_sq(x)?;
        let (h_norm_sq, g_true) = match self.measure.density_fn() {
            Some(f) => {
                let volume = self.measure.rule.volume;
                let t = self.h_norm_sq_limit(x)?;
                (Some(t), Some(volume / f(x)))
            }
            None => (None, None),
        };
        let (err_total, err_proj, err_approx, proj_defect) = match (h_norm_sq, g_true) {
            (Some(t), Some(g)) => {
                let dmcd = est.g_hat * norm_sq;
                let proj = (t - dmcd).abs() / norm_sq;
                let approx = (t / norm_sq - g).abs();
                let total = (est.g_hat - g).abs();
                (Some(total), Some(proj), Some(approx), Some((t - dmcd) / norm_sq))
            }
            _ => (None, None, None, None),
        };
        Ok(PointEstimate {
            g_hat: est.g_hat,
            f_hat: est.f_hat,
            g_true,
            h_norm_sq,
            err_total,
            err_proj,
            err_approx,
            proj_defect,
        })
    }
}

/// Support-locator diagonal `SMCD(z, z)`: the kernel diagonal of a context
/// built with the whole-variety region.
pub fn smcd_diag(ctx: &KernelContext, z: &[f64]) -> Result<f64> {
    if ctx.region != Region::SupportLocator {
        return Err(McdError::Unsupported(
            "smcd_diag requires a context built with the support-locator region".into(),
        ));
    }
    ctx.diag(z)
}

/// The estimator value at one point.
#[derive(Clone, Copy, Debug)]
pub struct DensityEstimate {
    /// `DMCD(x, x) / ||phi_x||^2`, the estimate of `1/f(x)`.
    pub g_hat: f64,
    /// `1/g_hat` when the estimate is positive; `None` flags a degenerate
    /// estimate (possible at very low degree or under ill-conditioning).
    pub f_hat: Option<f64>,
}

/// Per-point estimator diagnostics with the error decomposition
/// `|g_hat - g| <= err_proj + err_approx`.
#[derive(Clone, Copy, Debug)]
pub struct PointEstimate {
    pub g_hat: f64,
    pub f_hat: Option<f64>,
    pub g_true: Option<f64>,
    /// `||h_x||^2_{L^2(mu)}`, the d -> infinity value of the kernel
    /// diagonal, by direct quadrature.
    pub h_norm_sq: Option<f64>,
    pub err_total: Option<f64>,
    pub err_proj: Option<f64>,
    pub err_approx: Option<f64>,
    /// Signed normalized projection defect
    /// `(||h||^2 - DMCD(x,x)) / ||phi||^2`; the Pythagoras identity makes
    /// it nonnegative up to quadrature error.
    pub proj_defect: Option<f64>,
}

/// The exact exponential lower bound of the support dichotomy at an
/// exterior point.
#[derive(Clone, Copy, Debug)]
pub struct DichotomyBound {
    pub distance: f64,
    pub eccentricity: f64,
    pub degree: usize,
    /// `int_{B(z, delta/2)} phi dlambda` (1 for local-support families at
    /// admissible resolutions).
    pub mollifier_mass: f64,
    /// mu(X), the total mass of the measure.
    pub measure_mass: f64,
    /// The bound itself:
    /// `(1 + 3 d^2 / (4 (r^2 - d^2)))^{2 ceil(deg/2)} mass^2 / mu(X)`.
    pub value: f64,
}

/// Evaluates the dichotomy lower bound at an exterior point `z`. Requires
/// a local-support mollifier with `epsilon < delta(z)/2`.
pub fn dichotomy_bound(
    z: &[f64],
    descriptor: &SupportDescriptor,
    degree: usize,
    spec: &MollifierSpec,
    measure_mass: f64,
) -> Result<DichotomyBound> {
    let delta = descriptor.distance(z);
    let rho = descriptor.eccentricity(z);
    if delta <= 0.0 {
        return Err(McdError::InvalidArgument(
            "dichotomy bound applies to points outside the support".into(),
        ));
    }
    let Some(eps) = spec.support_radius() else {
        return Err(McdError::Unsupported(
            "the dichotomy bound requires a local-support mollifier".into(),
        ));
    };
    if eps >= delta / 2.0 {
        return Err(McdError::BoundInapplicable {
            epsilon: eps,
            half_delta: delta / 2.0,
        });
    }
    let mass = spec.mass_in_ball(delta / 2.0);
    let growth = 1.0 + 3.0 * delta * delta / (4.0 * (rho * rho - delta * delta));
    let exponent = 2 * degree.div_ceil(2);
    let value = growth.powi(exponent as i32) * mass * mass / measure_mass;
    Ok(DichotomyBound {
        distance: delta,
        eccentricity: rho,
        degree,
        mollifier_mass: mass,
        measure_mass,
        value,
    })
}

/// Support classification of one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportLabel {
    Inside,
    Outside,
    /// The epsilon-ball straddles the boundary; the theory provides no
    /// guarantee in this band and the classifier refuses to guess.
    Ambiguous,
}

/// Decision rule for the two-degree classifier.
#[derive(Clone, Copy, Debug)]
pub struct ClassifyPolicy {
    /// Fraction of the theoretical log-growth rate used as the slope
    /// threshold.
    pub slope_fraction: f64,
    /// Points with no descriptor distance (interior candidates) are judged
    /// against the growth rate at `floor_distance_factor * epsilon`, the
    /// smallest distance at which the bound could apply.
    pub floor_distance_factor: f64,
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        Self {
            slope_fraction: 0.5,
            floor_distance_factor: 4.0,
        }
    }
}

/// Labels each grid point from SMCD diagonals at two degrees
/// `degrees.0 < degrees.1`: outside when the log-growth between the two
/// degrees exceeds the policy threshold, inside when it plateaus,
/// ambiguous when the epsilon-ball straddles the boundary.
pub fn classify_support(
    points: &[Vec<f64>],
    values_low: &[f64],
    values_high: &[f64],
    degrees: (usize, usize),
    descriptor: &SupportDescriptor,
    epsilon: f64,
    policy: &ClassifyPolicy,
) -> Vec<SupportLabel> {
    assert!(degrees.0 < degrees.1);
    assert_eq!(points.len(), values_low.len());
    assert_eq!(points.len(), values_high.len());
    points
        .iter()
        .zip(values_low.iter().zip(values_high))
        .map(|(z, (&v1, &v2))| {
            let clearance = descriptor.boundary_clearance(z);
            if clearance.abs() <= epsilon {
                return SupportLabel::Ambiguous;
            }
            if v1 <= 0.0 || v2 <= 0.0 {
                return SupportLabel::Ambiguous;
            }
            let slope = (v2.ln() - v1.ln()) / (degrees.1 - degrees.0) as f64;
            let delta = descriptor.distance(z).max(policy.floor_distance_factor * epsilon);
            let rho = descriptor.eccentricity(z);
            let spread = rho * rho - delta * delta;
            let threshold = if spread <= 0.0 {
                // z farther than every support point can be: any growth
                // marks it outside
                0.0
            } else {
                policy.slope_fraction * (1.0 + 3.0 * delta * delta / (4.0 * spread)).ln()
            };
            if slope >= threshold {
                SupportLabel::Outside
            } else {
                SupportLabel::Inside
            }
        })
        .collect()
}

/// One degree of an experiment run: per-point estimates plus summary
/// diagnostics.
#[derive(Clone, Debug)]
pub struct EstimateRow {
    pub degree: usize,
    pub resolution: f64,
    pub points: Vec<PointEstimate>,
    /// L^2(lambda) error of `f_hat` against the ground truth over the
    /// evaluation grid, when a ground truth is known.
    pub l2_error: Option<f64>,
    pub cond_est: f64,
    pub seconds: f64,
}

/// Rows of an experiment, sorted by degree.
#[derive(Clone, Debug, Default)]
pub struct EstimateSeries {
    rows: Vec<EstimateRow>,
}

impl EstimateSeries {
    pub fn push(&mut self, row: EstimateRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.degree <= last.degree {
                return Err(McdError::InvalidArgument(
                    "estimate rows must arrive in strictly increasing degree".into(),
                ));
            }
        }
        if let Some(err) = row.l2_error {
            if err < 0.0 {
                return Err(McdError::InvalidArgument("negative error".into()));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[EstimateRow] {
        &self.rows
    }

    /// Least-squares slope of log(error) against log(degree).
    pub fn fitted_slope(&self) -> Option<(f64, f64)> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| r.l2_error.map(|e| ((r.degree as f64).ln(), e.ln())))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let (slope, _, resid) = crate::num::fit_line(&xs, &ys);
        Some((slope, resid))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis, BoxBasis, BoxBasisKind, SphericalHarmonicBasis};
    use crate::num::SplitMix64;
    use crate::quadrature::{box_rule, sphere_rule, Measure};

    fn box_context(degree: usize, eps: f64, region: Region) -> KernelContext {
        let rule = box_rule(&[0.0], &[1.0], 48).unwrap();
        let measure = Measure::uniform(rule);
        let basis = Basis::Box(
            BoxBasis::new(&[0.0], &[1.0], degree, BoxBasisKind::Legendre).unwrap(),
        );
        KernelContext::build(
            measure,
            basis,
            region,
            MollifierFamily::LasserreBox,
            Resolution::Epsilon(eps),
        )
        .unwrap()
    }

    fn sphere_context(degree: usize, k: usize) -> KernelContext {
        let rule = sphere_rule(2 * degree + k + 8, 2 * (2 * degree + k + 8) + 1).unwrap();
        let measure = Measure::uniform(rule);
        let basis = Basis::Harmonic(SphericalHarmonicBasis::new(degree));
        KernelContext::build(
            measure,
            basis,
            Region::DensityEstimator,
            MollifierFamily::ZonalAlgebraic,
            Resolution::ZonalDegree(k),
        )
        .unwrap()
    }

    #[test]
    fn degree_zero_kernel_is_one() {
        // V_0 = constants, l(1) = 1, M = [1] for a probability measure with
        // the mollifier mass inside the region.
        let ctx = box_context(0, 0.1, Region::DensityEstimator);
        let v = ctx.mcd_eval(&[0.5], &[0.4]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_symmetric() {
        let ctx = box_context(8, 0.1, Region::DensityEstimator);
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let x = [rng.uniform(0.15, 0.85)];
            let y = [rng.uniform(0.15, 0.85)];
            let a = ctx.mcd_eval(&x, &y).unwrap();
            let b = ctx.mcd_eval(&y, &x).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn cauchy_schwarz_on_random_pairs() {
        let ctx = box_context(10, 0.08, Region::DensityEstimator);
        let mut rng = SplitMix64::new(5);
        for _ in 0..25 {
            let x = [rng.uniform(0.1, 0.9)];
            let y = [rng.uniform(0.1, 0.9)];
            let kxy = ctx.mcd_eval(&x, &y).unwrap();
            let kxx = ctx.diag(&x).unwrap();
            let kyy = ctx.diag(&y).unwrap();
            assert!(kxy * kxy <= kxx * kyy * (1.0 + 1e-9));
        }
    }

    #[test]
    fn uniform_sphere_diag_matches_mollifier_norm() {
        // k <= d: the zonal mollifier is a polynomial, projection is exact,
        // MCD(x,x) = ||phi||^2 = (k+1)^2/(2k+1).
        let ctx = sphere_context(8, 5);
        let mut rng = SplitMix64::new(9);
        for _ in 0..5 {
            let x = rng.unit_sphere();
            let v = ctx.diag(&x).unwrap();
            let expect = 36.0 / 11.0;
            assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
        }
    }

    #[test]
    fn uniform_sphere_estimate_is_one() {
        let ctx = sphere_context(8, 5);
        let mut rng = SplitMix64::new(13);
        for _ in 0..20 {
            let x = rng.unit_sphere();
            let est = ctx.density_estimate(&x).unwrap();
            assert!((est.g_hat - 1.0).abs() < 1e-9);
            assert!((est.f_hat.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn smcd_diag_enforces_the_region() {
        let locator = box_context(4, 0.1, Region::SupportLocator);
        assert!(smcd_diag(&locator, &[0.5]).is_ok());
        let estimator = box_context(4, 0.1, Region::DensityEstimator);
        assert!(smcd_diag(&estimator, &[0.5]).is_err());
        assert!(estimator.density_estimate(&[0.5]).is_ok());
        assert!(locator.density_estimate(&[0.5]).is_err());
    }

    #[test]
    fn smcd_diag_monotone_in_degree() {
        let rule = box_rule(&[-1.0], &[1.0], 64).unwrap();
        let measure = Measure::uniform(rule);
        let basis = Basis::Box(
            BoxBasis::new(&[-1.0], &[1.0], 16, BoxBasisKind::Legendre).unwrap(),
        );
        let ctx = KernelContext::build(
            measure,
            basis,
            Region::SupportLocator,
            MollifierFamily::LasserreBox,
            Resolution::Epsilon(0.2),
        )
        .unwrap();
        let z = [1.5];
        let mut prev = 0.0;
        for d in 0..=16 {
            let v = ctx.diag_at_degree(&z, d).unwrap();
            assert!(v >= prev - 1e-12, "degree {d}");
            prev = v;
        }
        assert!(prev > 1.0);
    }

    #[test]
    fn dichotomy_bound_reference_case() {
        // X = [-1,1], z = 2, eps = 0.25: delta = 1, rho = 3,
        // growth = 1 + 3/(4*8) = 35/32, mass = 1, mu(X) = 1.
        let desc = SupportDescriptor::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        };
        let amb = Ambient::boxed(vec![-1.0], vec![1.0]).unwrap();
        let spec = MollifierSpec::lasserre_box(vec![2.0], 0.25, amb).unwrap();
        for d in [2usize, 8, 20] {
            let b = dichotomy_bound(&[2.0], &desc, d, &spec, 1.0).unwrap();
            let expect = (35.0f64 / 32.0).powi(2 * d.div_ceil(2) as i32);
            assert!((b.value - expect).abs() < 1e-12 * expect, "d={d}");
            assert_eq!(b.mollifier_mass, 1.0);
        }
        // odd d and d+1 share the exponent
        let b5 = dichotomy_bound(&[2.0], &desc, 5, &spec, 1.0).unwrap();
        let b6 = dichotomy_bound(&[2.0], &desc, 6, &spec, 1.0).unwrap();
        assert_eq!(b5.value, b6.value);
        // inapplicable when eps >= delta/2
        let spec_wide = MollifierSpec::lasserre_box(
            vec![2.0],
            0.6,
            Ambient::boxed(vec![-1.0], vec![1.0]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            dichotomy_bound(&[2.0], &desc, 4, &spec_wide, 1.0),
            Err(McdError::BoundInapplicable { .. })
        ));
    }

    #[test]
    fn dichotomy_bound_degenerates_to_mass_ratio() {
        // delta -> 0: growth factor -> 1, bound -> mass^2 / mu(X).
        let desc = SupportDescriptor::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        };
        let amb = Ambient::boxed(vec![-1.0], vec![1.0]).unwrap();
        let z = 1.0 + 1e-6;
        let spec = MollifierSpec::lasserre_box(vec![z], 1e-8, amb).unwrap();
        let b = dichotomy_bound(&[z], &desc, 20, &spec, 1.0).unwrap();
        assert!((b.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn classifier_labels_reference_grid() {
        let rule = box_rule(&[-1.0], &[1.0], 64).unwrap();
        let measure = Measure::uniform(rule);
        let basis = Basis::Box(
            BoxBasis::new(&[-1.0], &[1.0], 16, BoxBasisKind::Legendre).unwrap(),
        );
        let eps = 0.2;
        let ctx = KernelContext::build(
            measure,
            basis,
            Region::SupportLocator,
            MollifierFamily::LasserreBox,
            Resolution::Epsilon(eps),
        )
        .unwrap();
        let desc = SupportDescriptor::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        };
        let points: Vec<Vec<f64>> = vec![vec![0.0], vec![0.95], vec![2.0]];
        let (d1, d2) = (8usize, 16usize);
        let v1: Vec<f64> = points
            .iter()
            .map(|z| ctx.diag_at_degree(z, d1).unwrap())
            .collect();
        let v2: Vec<f64> = points
            .iter()
            .map(|z| ctx.diag_at_degree(z, d2).unwrap())
            .collect();
        let labels = classify_support(
            &points,
            &v1,
            &v2,
            (d1, d2),
            &desc,
            eps,
            &ClassifyPolicy::default(),
        );
        assert_eq!(labels[0], SupportLabel::Inside);
        assert_eq!(labels[1], SupportLabel::Ambiguous); // ball straddles the boundary
        assert_eq!(labels[2], SupportLabel::Outside);
    }

    #[test]
    fn estimate_errors_satisfy_triangle_identity() {
        let rule = box_rule(&[0.0], &[1.0], 48).unwrap();
        let f = crate::density::smooth_1d();
        let measure = Measure::with_density(rule, f).unwrap();
        let basis = Basis::Box(
            BoxBasis::new(&[0.0], &[1.0], 10, BoxBasisKind::Legendre).unwrap(),
        );
        let ctx = KernelContext::build(
            measure,
            basis,
            Region::DensityEstimator,
            MollifierFamily::SmoothBump,
            Resolution::Epsilon(0.15),
        )
        .unwrap();
        let est = ctx.estimate_with_errors(&[0.5]).unwrap();
        let total = est.err_total.unwrap();
        let proj = est.err_proj.unwrap();
        let approx = est.err_approx.unwrap();
        assert!(total <= proj + approx + 1e-9);
        assert!(est.proj_defect.unwrap() >= -1e-9);
    }

    #[test]
    fn uniform_box_estimate_climbs_to_one() {
        // with f = 1 on [0,1] the estimator equals ||Pi_d phi||^2/||phi||^2,
        // monotone in d by nesting and converging to 1
        let rule = box_rule(&[0.0], &[1.0], default_box_points_for_test(40)).unwrap();
        let measure = Measure::uniform(rule);
        let basis = Basis::Box(
            BoxBasis::new(&[0.0], &[1.0], 40, BoxBasisKind::Legendre).unwrap(),
        );
        let ctx = KernelContext::build(
            measure,
            basis,
            Region::DensityEstimator,
            MollifierFamily::LasserreBox,
            Resolution::Epsilon(0.1),
        )
        .unwrap();
        let x = [0.5];
        let mut prev = 0.0;
        for d in (0..=40).step_by(5) {
            let est = ctx.density_estimate_at_degree(&x, d).unwrap();
            assert!(est.g_hat >= prev - 1e-12);
            assert!(est.g_hat <= 1.0 + 1e-9);
            prev = est.g_hat;
        }
        let low = ctx.density_estimate_at_degree(&x, 10).unwrap().g_hat;
        let high = ctx.density_estimate_at_degree(&x, 40).unwrap().g_hat;
        assert!(1.0 - high < 1.0 - low, "no progress toward 1: {low} vs {high}");
        assert!(high > 0.8, "degree 40 estimate still far from 1: {high}");
    }

    fn default_box_points_for_test(d: usize) -> usize {
        crate::quadrature::default_box_points(d)
    }

    #[test]
    fn uniform_density_has_no_approximation_error() {
        // constant 1/f makes the mollification ratio exact, so the whole
        // error is the projection part at every resolution
        let rule = box_rule(&[0.0], &[1.0], 48).unwrap();
        let measure = Measure::uniform(rule);
        let basis = Basis::Box(
            BoxBasis::new(&[0.0], &[1.0], 8, BoxBasisKind::Legendre).unwrap(),
        );
        for eps in [0.3, 0.15, 0.08] {
            let ctx = KernelContext::build(
                measure.clone(),
                basis.clone(),
                Region::DensityEstimator,
                MollifierFamily::SmoothBump,
                Resolution::Epsilon(eps),
            )
            .unwrap();
            let est = ctx.estimate_with_errors(&[0.5]).unwrap();
            assert!(est.err_approx.unwrap() < 1e-8, "eps={eps}");
            assert!(
                (est.err_total.unwrap() - est.err_proj.unwrap()).abs() < 1e-8,
                "eps={eps}"
            );
        }
    }

    #[test]
    fn contexts_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>(_: &T) {}
        let ctx = box_context(4, 0.1, Region::DensityEstimator);
        assert_send_sync(&ctx);
        let value = std::thread::scope(|s| {
            let handle = s.spawn(|| ctx.diag(&[0.5]).unwrap());
            handle.join().unwrap()
        });
        assert!(value.is_finite());
    }

    #[test]
    fn series_rejects_unsorted_rows() {
        let mut s = EstimateSeries::default();
        let row = |d: usize| EstimateRow {
            degree: d,
            resolution: 0.1,
            points: vec![],
            l2_error: Some(0.5),
            cond_est: 1.0,
            seconds: 0.0,
        };
        s.push(row(4)).unwrap();
        s.push(row(8)).unwrap();
        assert!(s.push(row(8)).is_err());
    }
}
