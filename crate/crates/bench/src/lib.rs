//! Shared fixtures for the kernel benchmarks.

use mcd_kernel::basis::{Basis, SphericalHarmonicBasis};
use mcd_kernel::density::vmf_canonical_mixture;
use mcd_kernel::mcd::KernelContext;
use mcd_kernel::mollifier::{MollifierFamily, Region, Resolution};
use mcd_kernel::quadrature::{default_sphere_resolution, sphere_rule, Measure};

/// A density-backed sphere context at the d^{4/3} zonal coupling.
pub fn sphere_context(d: usize) -> KernelContext {
    let k = (d as f64).powf(4.0 / 3.0).floor() as usize;
    let (nt, np) = default_sphere_resolution(d, k);
    let measure =
        Measure::with_density(sphere_rule(nt, np).unwrap(), vmf_canonical_mixture(3.0)).unwrap();
    let basis = Basis::Harmonic(SphericalHarmonicBasis::new(d));
    KernelContext::build(
        measure,
        basis,
        Region::DensityEstimator,
        MollifierFamily::ZonalAlgebraic,
        Resolution::ZonalDegree(k),
    )
    .unwrap()
}
