//! Ambient domains and closed-form support geometry.
//!
//! The engine works on two ambients: axis-aligned boxes in R^n (n <= 3) and
//! the unit sphere S^2 in R^3. Support descriptors provide the distance
//! delta(z) and eccentricity rho(z) needed by the dichotomy bound, in closed
//! form so the bound check carries no geometric quadrature error.

use crate::error::{McdError, Result};

/// The ambient space a mollifier or kernel lives on.
#[derive(Clone, Debug, PartialEq)]
pub enum Ambient {
    /// Axis-aligned box `[lo_i, hi_i]` in R^n, n <= 3. The reference measure
    /// for mollifier formulas on this ambient is the plain Lebesgue measure.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Unit sphere in R^3 with the rotation-invariant probability measure.
    Sphere2,
}

impl Ambient {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_box(&lo, &hi)?;
        Ok(Ambient::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            Ambient::Box { lo, .. } => lo.len(),
            Ambient::Sphere2 => 3,
        }
    }

    /// Plain Lebesgue volume for boxes; 1 for the sphere (its reference
    /// measure is already a probability measure).
    pub fn volume(&self) -> f64 {
        match self {
            Ambient::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Ambient::Sphere2 => 1.0,
        }
    }
}

pub(crate) fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.is_empty() || lo.len() > 3 {
        return Err(McdError::InvalidArgument(format!(
            "box dimension must be 1..=3, got {}",
            lo.len()
        )));
    }
    if lo.len() != hi.len() {
        return Err(McdError::DimensionMismatch {
            expected: lo.len(),
            got: hi.len(),
        });
    }
    for (a, b) in lo.iter().zip(hi) {
        if a >= b || a.is_nan() || b.is_nan() {
            return Err(McdError::InvalidArgument(format!(
                "degenerate box: [{a}, {b}]"
            )));
        }
    }
    Ok(())
}

/// Closed-form description of the support X used by the dichotomy bound and
/// the support classifier.
#[derive(Clone, Debug)]
pub enum SupportDescriptor {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Spherical cap `{ y in S^2 : <y, axis> >= cos(half_angle) }`.
    SphericalCap { axis: [f64; 3], half_angle: f64 },
}

impl SupportDescriptor {
    /// delta(z) = min { ||z - y|| : y in X } (Euclidean, 0 when z in X).
    pub fn distance(&self, z: &[f64]) -> f64 {
        match self {
            SupportDescriptor::Box { lo, hi } => {
                let mut s = 0.0;
                for i in 0..lo.len() {
                    let d = (lo[i] - z[i]).max(z[i] - hi[i]).max(0.0);
                    s += d * d;
                }
                s.sqrt()
            }
            SupportDescriptor::SphericalCap { axis, half_angle } => {
                let psi = angle_to(axis, z);
                if psi <= *half_angle {
                    0.0
                } else {
                    chord(psi - half_angle)
                }
            }
        }
    }

    /// rho(z) = max { ||z - y|| : y in X } (Euclidean).
    pub fn eccentricity(&self, z: &[f64]) -> f64 {
        match self {
            SupportDescriptor::Box { lo, hi } => {
                let mut s = 0.0;
                for i in 0..lo.len() {
                    let d = (z[i] - lo[i]).abs().max((z[i] - hi[i]).abs());
                    s += d * d;
                }
                s.sqrt()
            }
            SupportDescriptor::SphericalCap { axis, half_angle } => {
                let psi = angle_to(axis, z);
                chord((psi + half_angle).min(std::f64::consts::PI))
            }
        }
    }

    /// Distance from z to the boundary of X: positive inside, negative
    /// outside (then equal to -delta(z)).
    pub fn boundary_clearance(&self, z: &[f64]) -> f64 {
        match self {
            SupportDescriptor::Box { lo, hi } => {
                let delta = self.distance(z);
                if delta > 0.0 {
                    return -delta;
                }
                let mut c = f64::INFINITY;
                for i in 0..lo.len() {
                    c = c.min(z[i] - lo[i]).min(hi[i] - z[i]);
                }
                c
            }
            SupportDescriptor::SphericalCap { axis, half_angle } => {
                let psi = angle_to(axis, z);
                if psi <= *half_angle {
                    chord(half_angle - psi)
                } else {
                    -chord(psi - half_angle)
                }
            }
        }
    }
}

fn angle_to(axis: &[f64; 3], z: &[f64]) -> f64 {
    let dot: f64 = axis.iter().zip(z).map(|(a, b)| a * b).sum();
    dot.clamp(-1.0, 1.0).acos()
}

/// Euclidean distance between unit vectors separated by angle `gamma`.
fn chord(gamma: f64) -> f64 {
    2.0 * (gamma / 2.0).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_distance_and_eccentricity() {
        let d = SupportDescriptor::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        };
        assert_eq!(d.distance(&[2.0]), 1.0);
        assert_eq!(d.eccentricity(&[2.0]), 3.0);
        assert_eq!(d.distance(&[0.5]), 0.0);
        assert_eq!(d.boundary_clearance(&[0.5]), 0.5);
        assert_eq!(d.boundary_clearance(&[2.0]), -1.0);
    }

    #[test]
    fn box_distance_2d_corner() {
        let d = SupportDescriptor::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        };
        let z = [2.0, 2.0];
        assert!((d.distance(&z) - 2f64.sqrt()).abs() < 1e-15);
        assert!((d.eccentricity(&z) - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cap_geometry() {
        let cap = SupportDescriptor::SphericalCap {
            axis: [0.0, 0.0, 1.0],
            half_angle: std::f64::consts::FRAC_PI_2,
        };
        // South pole is at angle pi, so distance = chord(pi/2) = sqrt(2).
        let south = [0.0, 0.0, -1.0];
        assert!((cap.distance(&south) - 2f64.sqrt()).abs() < 1e-12);
        // North pole: inside, eccentricity = chord(pi/2).
        let north = [0.0, 0.0, 1.0];
        assert_eq!(cap.distance(&north), 0.0);
        assert!((cap.eccentricity(&north) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(Ambient::boxed(vec![0.0], vec![0.0]).is_err());
        assert!(Ambient::boxed(vec![0.0; 4], vec![1.0; 4]).is_err());
    }
}
