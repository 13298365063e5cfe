//! Small numeric helpers: deterministic summation, a seedable PRNG for
//! reproducible evaluation points, and least-squares slope fitting.

/// Pairwise (cascade) summation. Deterministic for a fixed input order and
/// more accurate than naive left-to-right accumulation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const CUTOFF: usize = 32;
    if values.len() <= CUTOFF {
        let mut acc = 0.0;
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise summation of `f(i)` for `i in 0..len` without materializing
/// the intermediate vector.
pub fn pairwise_sum_by(len: usize, f: &dyn Fn(usize) -> f64) -> f64 {
    fn go(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        const CUTOFF: usize = 32;
        if hi - lo <= CUTOFF {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, len, f)
}

/// SplitMix64: a tiny, fully deterministic PRNG. Used for reproducible
/// evaluation points; statistical quality is more than sufficient for
/// picking test locations.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform point on the unit sphere in R^3 (Marsaglia's method).
    pub fn unit_sphere(&mut self) -> [f64; 3] {
        loop {
            let x1 = self.uniform(-1.0, 1.0);
            let x2 = self.uniform(-1.0, 1.0);
            let s = x1 * x1 + x2 * x2;
            if s >= 1.0 {
                continue;
            }
            let factor = 2.0 * (1.0 - s).sqrt();
            return [x1 * factor, x2 * factor, 1.0 - 2.0 * s];
        }
    }
}

/// Least-squares fit of `y = a + b x`; returns `(slope b, intercept a, rms residual)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ss += r * r;
    }
    (slope, intercept, (ss / n).sqrt())
}

/// Binomial coefficient as f64-safe u64 (panics on overflow, which cannot
/// happen for the basis sizes this crate supports).
pub fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut num: u64 = 1;
    for i in 0..k {
        num = num
            .checked_mul((n - i) as u64)
            .expect("binomial overflow")
            / (i as u64 + 1);
    }
    num
}

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn sphere_surface_area(n: usize) -> f64 {
    // omega_{n-1} = 2 pi^{n/2} / Gamma(n/2), computed via the half-integer
    // Gamma recursion to avoid a gamma-function dependency.
    assert!(n >= 1);
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// Gamma(n/2) for integer n >= 1.
fn gamma_half_integer(n: usize) -> f64 {
    let mut z = n as f64 / 2.0;
    let mut acc = 1.0;
    while z > 1.0 + 1e-9 {
        z -= 1.0;
        acc *= z;
    }
    // z is now 1.0 or 0.5
    if (z - 1.0).abs() < 1e-9 {
        acc
    } else {
        acc * std::f64::consts::PI.sqrt()
    }
}
