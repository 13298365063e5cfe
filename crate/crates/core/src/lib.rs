//! Mollified Christoffel-Darboux kernels from moment data.
//!
//! The classical Christoffel-Darboux kernel of a measure mu encodes the
//! geometry of supp(mu) in its diagonal, but recovering the density itself
//! requires knowing the equilibrium measure of the domain. Replacing point
//! evaluation by integration against a mollifier removes that obstruction:
//! the mollified kernel diagonal is uniformly bounded in the degree on the
//! interior of the support, grows exponentially outside it, and, suitably
//! normalized, converges to the reciprocal density.
//!
//! This crate computes these kernels from moment matrices by linear
//! algebra and ships the machinery the experiments need:
//!
//! * [`basis`]: monomial and box-adapted polynomial bases, real spherical
//!   harmonics, Gegenbauer polynomials;
//! * [`quadrature`]: Gauss-Legendre tensor rules on boxes, product rules
//!   on S^2, weighted 1D rules, and the [`quadrature::Measure`] type;
//! * [`density`]: ground-truth densities (uniform, von Mises-Fisher
//!   mixtures, smooth and polynomial test densities);
//! * [`moments`]: Gram matrices in L^2(mu) with Cholesky factorization and
//!   orthogonal projection;
//! * [`mollifier`]: the Lasserre box, smooth bump, and zonal algebraic
//!   mollifier families, their functionals and closed-form ratios, and the
//!   Funk-Hecke reduction;
//! * [`mcd`]: the kernel engine with the support dichotomy, its exact
//!   lower bound, the density estimator, and the error decomposition.

pub mod basis;
pub mod density;
pub mod domain;
pub mod error;
pub mod mcd;
pub mod mollifier;
pub mod moments;
pub mod num;
pub mod quadrature;

pub use basis::{
    enumerate_monomials, eval_gegenbauer, eval_monomial, eval_sph_harmonic, Basis, BoxBasis,
    BoxBasisKind, GegenbauerParams, MonomialBasis, MultiIndex, SphericalHarmonicBasis,
};
pub use domain::{Ambient, SupportDescriptor};
pub use error::{McdError, Result};
pub use mcd::{
    classify_support, dichotomy_bound, smcd_diag, ClassifyPolicy, DensityEstimate,
    DichotomyBound, EstimateRow, EstimateSeries, KernelContext, PointEstimate, SupportLabel,
};
pub use mollifier::{
    funk_hecke_lambda, ratio_gradient, ratio_one_minus_t, EllVector, MollifierFamily,
    MollifierSpec, Region, Resolution,
};
pub use moments::{build_moment_matrix, project, MomentMatrix, ProjectionCoefficients};
pub use quadrature::{box_rule, integrate, sphere_rule, Measure, MeasureKind, QuadratureRule};
