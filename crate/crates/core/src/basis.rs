//! Polynomial bases on boxes and real spherical harmonics on S^2.
//!
//! Three interchangeable families back the moment-matrix machinery:
//!
//! * plain monomials in graded-lex order (the textbook basis, exact small
//!   examples, ill-conditioned past moderate degree),
//! * box-adapted tensor bases (norm-scaled monomials or tensor Legendre,
//!   the latter being the numerically sane default on boxes),
//! * real spherical harmonics normalized against the probability surface
//!   measure, so `Y_{0,0} = 1` and `int Y^2 dlambda = 1`.
//!
//! All bases are graded: the first `len_at_degree(d')` entries span exactly
//! the polynomials of degree <= d', which lets one Cholesky factorization
//! serve a whole degree schedule.

use crate::error::{McdError, Result};
use crate::num::binomial;

/// Exponent vector of a monomial; ordering of a basis is graded
/// lexicographic and deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// All multi-indices of total degree <= d in n variables, graded-lex:
/// degree blocks in increasing order, first exponent decreasing within a
/// block.
pub fn graded_lex_indices(n: usize, d: usize) -> Vec<MultiIndex> {
    fn block(n: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if n == 1 {
            prefix.push(deg);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=deg).rev() {
            prefix.push(a);
            block(n - 1, deg - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(n + d, d) as usize);
    let mut prefix = Vec::with_capacity(n);
    for deg in 0..=d as u32 {
        block(n, deg, &mut prefix, &mut out);
    }
    out
}

/// The monomial basis of polynomials of degree <= d in n variables.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub dim: usize,
    pub degree: usize,
    pub indices: Vec<MultiIndex>,
}

/// Enumerates all multi-indices of degree <= d in graded-lex order.
pub fn enumerate_monomials(n: usize, d: usize) -> Result<MonomialBasis> {
    if n == 0 {
        return Err(McdError::InvalidArgument(
            "basis dimension must be at least 1".into(),
        ));
    }
    Ok(MonomialBasis {
        dim: n,
        degree: d,
        indices: graded_lex_indices(n, d),
    })
}

/// Evaluates the monomial `prod x_i^{a_i}`.
pub fn eval_monomial(idx: &MultiIndex, x: &[f64]) -> Result<f64> {
    if idx.dim() != x.len() {
        return Err(McdError::DimensionMismatch {
            expected: idx.dim(),
            got: x.len(),
        });
    }
    let mut v = 1.0;
    for (a, xi) in idx.0.iter().zip(x) {
        v *= xi.powi(*a as i32);
    }
    Ok(v)
}

/// Which 1D family a box-adapted tensor basis is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxBasisKind {
    /// Monomials divided by their L^2 norm against the normalized Lebesgue
    /// measure of the box. Tames conditioning somewhat but still degrades
    /// exponentially with the degree.
    ScaledMonomial,
    /// Tensor products of Legendre polynomials mapped to the box and scaled
    /// to be orthonormal against the normalized Lebesgue measure. Moment
    /// matrices stay well-conditioned far beyond degree 30.
    Legendre,
}

/// Tensor-product polynomial basis adapted to a box.
#[derive(Clone, Debug)]
pub struct BoxBasis {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub degree: usize,
    pub kind: BoxBasisKind,
    pub indices: Vec<MultiIndex>,
    /// Per-entry multiplier (1 for Legendre, inverse L^2 norms otherwise).
    scales: Vec<f64>,
}

impl BoxBasis {
    pub fn new(lo: &[f64], hi: &[f64], degree: usize, kind: BoxBasisKind) -> Result<Self> {
        crate::domain::check_box(lo, hi)?;
        let indices = graded_lex_indices(lo.len(), degree);
        let scales = match kind {
            BoxBasisKind::Legendre => vec![1.0; indices.len()],
            BoxBasisKind::ScaledMonomial => indices
                .iter()
                .map(|idx| {
                    let mut norm_sq = 1.0;
                    for (i, &a) in idx.0.iter().enumerate() {
                        // mean of y^{2a} over [lo, hi]
                        let p = 2 * a + 1;
                        let num = hi[i].powi(p as i32) - lo[i].powi(p as i32);
                        norm_sq *= num / (p as f64 * (hi[i] - lo[i]));
                    }
                    1.0 / norm_sq.sqrt()
                })
                .collect(),
        };
        Ok(Self {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            degree,
            kind,
            indices,
            scales,
        })
    }

    /// Value of the p-th 1D factor on axis `axis` at coordinate `y`.
    fn eval_axis(&self, axis: usize, p: u32, y: f64) -> f64 {
        match self.kind {
            BoxBasisKind::ScaledMonomial => y.powi(p as i32),
            BoxBasisKind::Legendre => {
                let u = map_to_unit(y, self.lo[axis], self.hi[axis]);
                ((2 * p + 1) as f64).sqrt() * legendre(p as usize, u)
            }
        }
    }

    pub(crate) fn scale(&self, j: usize) -> f64 {
        self.scales[j]
    }

    /// Antiderivative-based integral of the p-th 1D factor over `[a, b]`
    /// (plain Lebesgue). Exact; used by the analytic box-mollifier
    /// functionals.
    pub(crate) fn integral_axis(&self, axis: usize, p: u32, a: f64, b: f64) -> f64 {
        match self.kind {
            BoxBasisKind::ScaledMonomial => {
                let q = p as i32 + 1;
                (b.powi(q) - a.powi(q)) / q as f64
            }
            BoxBasisKind::Legendre => {
                let (lo, hi) = (self.lo[axis], self.hi[axis]);
                let half = (hi - lo) / 2.0;
                let ua = map_to_unit(a, lo, hi);
                let ub = map_to_unit(b, lo, hi);
                let scale = ((2 * p + 1) as f64).sqrt();
                half * scale * (legendre_antiderivative(p as usize, ub)
                    - legendre_antiderivative(p as usize, ua))
            }
        }
    }
}

fn map_to_unit(y: f64, lo: f64, hi: f64) -> f64 {
    (2.0 * y - lo - hi) / (hi - lo)
}

/// Legendre polynomial P_p(u) by the three-term recurrence.
pub fn legendre(p: usize, u: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = u;
    for l in 2..=p {
        let next = ((2 * l - 1) as f64 * u * cur - (l - 1) as f64 * prev) / l as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Antiderivative of P_p: int_{-1}^{u} P_p = (P_{p+1} - P_{p-1}) / (2p+1)
/// for p >= 1, and u + 1 for p = 0.
fn legendre_antiderivative(p: usize, u: f64) -> f64 {
    if p == 0 {
        return u;
    }
    (legendre(p + 1, u) - legendre(p - 1, u)) / (2 * p + 1) as f64
}

/// Real spherical harmonics of degree <= d on S^2, orthonormal against the
/// normalized surface measure, ordered by degree then order.
#[derive(Clone, Debug)]
pub struct SphericalHarmonicBasis {
    pub max_degree: usize,
    pub entries: Vec<(usize, i32)>,
}

impl SphericalHarmonicBasis {
    pub fn new(max_degree: usize) -> Self {
        let mut entries = Vec::with_capacity((max_degree + 1) * (max_degree + 1));
        for l in 0..=max_degree {
            for m in -(l as i32)..=(l as i32) {
                entries.push((l, m));
            }
        }
        Self {
            max_degree,
            entries,
        }
    }

    /// Evaluates every harmonic up to `max_degree` at the unit vector `x`,
    /// writing into `out` (length `(d+1)^2`, indexed by `l^2 + l + m`).
    pub fn eval_all_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.entries.len());
        let d = self.max_degree;
        let ct = x[2];
        let st = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let (cphi, sphi) = if st > 1e-300 {
            (x[0] / st, x[1] / st)
        } else {
            (1.0, 0.0)
        };
        let sqrt2 = std::f64::consts::SQRT_2;

        // cos(m phi), sin(m phi) by the angle-addition recurrence.
        let mut cos_m = Vec::with_capacity(d + 1);
        let mut sin_m = Vec::with_capacity(d + 1);
        cos_m.push(1.0);
        sin_m.push(0.0);
        for m in 1..=d {
            cos_m.push(cos_m[m - 1] * cphi - sin_m[m - 1] * sphi);
            sin_m.push(sin_m[m - 1] * cphi + cos_m[m - 1] * sphi);
        }

        // Upward recurrence in l at fixed m on the fully normalized
        // associated Legendre values q_l^m; stable to degrees far beyond
        // anything this crate asks for.
        let mut q_diag = 1.0; // q_m^m
        for m in 0..=d {
            if m > 0 {
                q_diag *= st * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            }
            let mut q_prev = q_diag;
            let mut q_cur = if m < d {
                ct * ((2 * m + 3) as f64).sqrt() * q_diag
            } else {
                0.0
            };
            for l in m..=d {
                let q = if l == m {
                    q_prev
                } else if l == m + 1 {
                    q_cur
                } else {
                    let lf = l as f64;
                    let mf = m as f64;
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let b = (((2.0 * lf + 1.0) * (lf - 1.0 - mf) * (lf - 1.0 + mf))
                        / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
                        .sqrt();
                    let next = a * ct * q_cur - b * q_prev;
                    q_prev = q_cur;
                    q_cur = next;
                    next
                };
                let base = l * l + l;
                if m == 0 {
                    out[base] = q;
                } else {
                    out[(base as i32 + m as i32) as usize] = sqrt2 * q * cos_m[m];
                    out[(base as i32 - m as i32) as usize] = sqrt2 * q * sin_m[m];
                }
            }
        }
    }
}

/// Evaluates the real spherical harmonic Y_{l,m} at a unit vector,
/// normalized so that `int Y^2 dlambda = 1` (hence `Y_{0,0} = 1`).
pub fn eval_sph_harmonic(l: usize, m: i32, x: &[f64]) -> Result<f64> {
    if x.len() != 3 {
        return Err(McdError::DimensionMismatch {
            expected: 3,
            got: x.len(),
        });
    }
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(McdError::InvalidArgument(format!(
            "point must lie on the unit sphere (|x| = {norm})"
        )));
    }
    if m.unsigned_abs() as usize > l {
        return Err(McdError::InvalidArgument(format!(
            "harmonic order |{m}| exceeds degree {l}"
        )));
    }
    let ma = m.unsigned_abs() as usize;
    let ct = x[2];
    let st = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let (cphi, sphi) = if st > 1e-300 {
        (x[0] / st, x[1] / st)
    } else {
        (1.0, 0.0)
    };

    // q_m^m, then upward in l.
    let mut q_diag = 1.0;
    for mm in 1..=ma {
        q_diag *= st * ((2 * mm + 1) as f64 / (2 * mm) as f64).sqrt();
    }
    let q = if l == ma {
        q_diag
    } else {
        let mut q_prev = q_diag;
        let mut q_cur = ct * ((2 * ma + 3) as f64).sqrt() * q_diag;
        for ll in (ma + 2)..=l {
            let lf = ll as f64;
            let mf = ma as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((2.0 * lf + 1.0) * (lf - 1.0 - mf) * (lf - 1.0 + mf))
                / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
                .sqrt();
            let next = a * ct * q_cur - b * q_prev;
            q_prev = q_cur;
            q_cur = next;
        }
        q_cur
    };

    // azimuthal factor
    if m == 0 {
        return Ok(q);
    }
    let mut cm = 1.0;
    let mut sm = 0.0;
    for _ in 0..ma {
        let c = cm * cphi - sm * sphi;
        sm = sm * cphi + cm * sphi;
        cm = c;
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    Ok(if m > 0 { sqrt2 * q * cm } else { sqrt2 * q * sm })
}

/// Parameters of a Gegenbauer polynomial `C_l^{(alpha)}`.
#[derive(Clone, Copy, Debug)]
pub struct GegenbauerParams {
    pub alpha: f64,
    pub ell: usize,
}

impl GegenbauerParams {
    pub fn new(alpha: f64, ell: usize) -> Result<Self> {
        if alpha <= -0.5 || alpha.is_nan() {
            return Err(McdError::InvalidArgument(format!(
                "Gegenbauer order must exceed -1/2, got {alpha}"
            )));
        }
        Ok(Self { alpha, ell })
    }
}

/// Gegenbauer polynomial by the standard three-term recurrence; `C_0 = 1`.
pub fn eval_gegenbauer(p: GegenbauerParams, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(McdError::InvalidArgument(format!(
            "Gegenbauer argument {t} outside [-1, 1]"
        )));
    }
    let alpha = p.alpha;
    let mut prev = 1.0;
    if p.ell == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * alpha * t;
    for l in 2..=p.ell {
        let lf = l as f64;
        let next = (2.0 * t * (lf + alpha - 1.0) * cur - (lf + 2.0 * alpha - 2.0) * prev) / lf;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Gegenbauer polynomial normalized to 1 at t = 1. For alpha = 0 (the S^1
/// case) the standard recurrence degenerates, and the correct normalized
/// limit is the Chebyshev polynomial T_l.
pub fn gegenbauer_normalized(alpha: f64, ell: usize, t: f64) -> f64 {
    if alpha.abs() < 1e-14 {
        // Chebyshev T_l by recurrence.
        let mut prev = 1.0;
        if ell == 0 {
            return prev;
        }
        let mut cur = t;
        for _ in 2..=ell {
            let next = 2.0 * t * cur - prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    let p = GegenbauerParams { alpha, ell };
    let v = eval_gegenbauer(p, t).expect("t checked by caller");
    // C_l^{(alpha)}(1) = binom(l + 2 alpha - 1, l)
    let mut at_one = 1.0;
    for i in 0..ell {
        at_one *= (2.0 * alpha + i as f64) / (i as f64 + 1.0);
    }
    v / at_one
}

/// One of the polynomial bases understood by the moment machinery.
#[derive(Clone, Debug)]
pub enum Basis {
    Monomial(MonomialBasis),
    Box(BoxBasis),
    Harmonic(SphericalHarmonicBasis),
}

impl Basis {
    pub fn len(&self) -> usize {
        match self {
            Basis::Monomial(b) => b.indices.len(),
            Basis::Box(b) => b.indices.len(),
            Basis::Harmonic(b) => b.entries.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Basis::Monomial(b) => b.dim,
            Basis::Box(b) => b.lo.len(),
            Basis::Harmonic(_) => 3,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Basis::Monomial(b) => b.degree,
            Basis::Box(b) => b.degree,
            Basis::Harmonic(b) => b.max_degree,
        }
    }

    /// Number of leading entries spanning polynomials of degree <= d. The
    /// graded orderings make every degree a prefix of the next.
    pub fn len_at_degree(&self, d: usize) -> usize {
        let d = d.min(self.degree());
        match self {
            Basis::Monomial(_) | Basis::Box(_) => binomial(self.dim() + d, d) as usize,
            Basis::Harmonic(_) => (d + 1) * (d + 1),
        }
    }

    /// Evaluates the whole basis at `x` into `out` (length `self.len()`).
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Basis::Monomial(b) => {
                for (j, idx) in b.indices.iter().enumerate() {
                    let mut v = 1.0;
                    for (i, &a) in idx.0.iter().enumerate() {
                        v *= x[i].powi(a as i32);
                    }
                    out[j] = v;
                }
            }
            Basis::Box(b) => {
                // Tabulate per-axis 1D values once, then take products.
                let n = b.lo.len();
                let d = b.degree;
                let mut table = vec![0.0; n * (d + 1)];
                for axis in 0..n {
                    for p in 0..=d {
                        table[axis * (d + 1) + p] = b.eval_axis(axis, p as u32, x[axis]);
                    }
                }
                for (j, idx) in b.indices.iter().enumerate() {
                    let mut v = b.scales[j];
                    for (axis, &a) in idx.0.iter().enumerate() {
                        v *= table[axis * (d + 1) + a as usize];
                    }
                    out[j] = v;
                }
            }
            Basis::Harmonic(b) => b.eval_all_into(x, out),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }
}
