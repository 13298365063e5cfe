//! The exponential lower bound holds pointwise at off-support points in 1D
//! and 2D box experiments, at every even degree up to 20.

use mcd_kernel::basis::{Basis, BoxBasis, BoxBasisKind};
use mcd_kernel::domain::{Ambient, SupportDescriptor};
use mcd_kernel::mcd::{dichotomy_bound, KernelContext};
use mcd_kernel::mollifier::{MollifierFamily, MollifierSpec, Region, Resolution};
use mcd_kernel::num::SplitMix64;
use mcd_kernel::quadrature::{box_rule, default_box_points, Measure};

fn exterior_points_1d(rng: &mut SplitMix64, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let side = if i % 2 == 0 { 1.0 } else { -1.0 };
            vec![side * rng.uniform(1.4, 3.0)]
        })
        .collect()
}

fn exterior_points_2d(rng: &mut SplitMix64, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    while out.len() < count {
        let p = vec![rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)];
        let dist = p
            .iter()
            .map(|v| (v.abs() - 1.0).max(0.0))
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        if dist > 0.4 {
            out.push(p);
        }
    }
    out
}

fn run_case(lo: Vec<f64>, hi: Vec<f64>, points: Vec<Vec<f64>>) {
    let n = lo.len();
    let desc = SupportDescriptor::Box {
        lo: lo.clone(),
        hi: hi.clone(),
    };
    let ambient = Ambient::boxed(lo.clone(), hi.clone()).unwrap();
    let measure = Measure::uniform(box_rule(&lo, &hi, default_box_points(20)).unwrap());
    let basis = Basis::Box(BoxBasis::new(&lo, &hi, 20, BoxBasisKind::Legendre).unwrap());
    for z in points {
        let delta = desc.distance(&z);
        let eps = (0.2f64).min(delta / 4.0);
        let ctx = KernelContext::build(
            measure.clone(),
            basis.clone(),
            Region::SupportLocator,
            MollifierFamily::LasserreBox,
            Resolution::Epsilon(eps),
        )
        .unwrap();
        let spec = MollifierSpec::lasserre_box(z.clone(), eps, ambient.clone()).unwrap();
        for d in (2..=20usize).step_by(2) {
            let smcd = ctx.diag_at_degree(&z, d).unwrap();
            let bound = dichotomy_bound(&z, &desc, d, &spec, 1.0).unwrap();
            assert!(
                smcd >= bound.value,
                "{n}D z={z:?} d={d}: SMCD {smcd:.6e} below bound {:.6e}",
                bound.value
            );
        }
    }
}

#[test]
fn exterior_bound_holds_in_1d() {
    let mut rng = SplitMix64::new(101);
    run_case(vec![-1.0], vec![1.0], exterior_points_1d(&mut rng, 10));
}

#[test]
fn exterior_bound_holds_in_2d() {
    let mut rng = SplitMix64::new(202);
    run_case(
        vec![-1.0, -1.0],
        vec![1.0, 1.0],
        exterior_points_2d(&mut rng, 10),
    );
}
