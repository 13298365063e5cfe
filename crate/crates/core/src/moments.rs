#![allow(clippy::needless_range_loop)]

//! Moment (Gram) matrices of a basis in L^2(mu), their Cholesky factors,
//! and the linear solves behind kernel evaluation and orthogonal
//! projection.
//!
//! The build streams quadrature nodes in blocks and parallelizes over
//! matrix columns; every entry is accumulated in a fixed order, so results
//! are identical run to run regardless of thread scheduling. Graded bases
//! make the factor reusable: the Cholesky factor of a leading principal
//! block is the leading block of the factor, so one factorization serves a
//! whole degree schedule.

use rayon::prelude::*;

use crate::basis::Basis;
use crate::error::{McdError, Result};
use crate::num::pairwise_sum;
use crate::quadrature::Measure;

/// Pivot-ratio threshold beyond which experiments abort with a diagnostic.
pub const PIVOT_RATIO_LIMIT: f64 = 1e14;

const NODE_BLOCK: usize = 256;

/// Gram matrix `M_ij = int b_i b_j dmu` with its Cholesky factor.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    size: usize,
    matrix: Vec<f64>,
    chol: Vec<f64>,
    /// (max diagonal pivot / min diagonal pivot)^2, a cheap condition
    /// estimate.
    pivot_ratio: f64,
    /// M_11; equals mu(X) when the first basis element is the constant 1.
    pub mass: f64,
}

/// Coefficients of an orthogonal projection onto the basis span.
#[derive(Clone, Debug)]
pub struct ProjectionCoefficients {
    /// Solution of `M c = r` with `r_j = int h b_j dmu`.
    pub coeffs: Vec<f64>,
    /// `||Pi h||^2 = c^T r`.
    pub norm_sq: f64,
    /// `||h - Pi h||^2 = ||h||^2 - c^T r` (clamped at 0 against rounding).
    pub residual_norm_sq: f64,
}

/// Builds the moment matrix of `basis` in L^2 of the given measure and
/// factorizes it. Fails loudly (with the offending pivot) when the
/// factorization breaks down.
pub fn build_moment_matrix(measure: &Measure, basis: &Basis) -> Result<MomentMatrix> {
    let n = basis.len();
    let nodes = measure.rule.len();
    let mut matrix = vec![0.0; n * n];

    let mut scratch = vec![0.0; NODE_BLOCK * n]; // column-major within block
    let mut row = vec![0.0; n];
    let mut start = 0;
    while start < nodes {
        let block = NODE_BLOCK.min(nodes - start);
        for local in 0..block {
            let i = start + local;
            basis.eval_into(measure.rule.node(i), &mut row);
            let wf = measure.rule.weight(i) * measure.density_at_node(i);
            let scale = wf.max(0.0).sqrt();
            for j in 0..n {
                scratch[j * NODE_BLOCK + local] = scale * row[j];
            }
        }
        // Accumulate the block's contribution; each (i, j) entry is a dot
        // product over this block in index order, summed across blocks in
        // block order: fully deterministic.
        let scratch_ref = &scratch;
        let updates: Vec<(usize, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|j| {
                let col_j = &scratch_ref[j * NODE_BLOCK..j * NODE_BLOCK + block];
                let mut partial = vec![0.0; j + 1];
                for (i, slot) in partial.iter_mut().enumerate() {
                    let col_i = &scratch_ref[i * NODE_BLOCK..i * NODE_BLOCK + block];
                    let mut acc = 0.0;
                    for (a, b) in col_i.iter().zip(col_j) {
                        acc += a * b;
                    }
                    *slot = acc;
                }
                (j, partial)
            })
            .collect();
        for (j, partial) in updates {
            for (i, v) in partial.iter().enumerate() {
                matrix[i * n + j] += v;
            }
        }
        start += block;
    }
    // Mirror the upper triangle.
    for i in 0..n {
        for j in 0..i {
            matrix[i * n + j] = matrix[j * n + i];
        }
    }

    let (chol, pivot_ratio) = cholesky_lower(&matrix, n)?;
    let mass = matrix[0];
    Ok(MomentMatrix {
        size: n,
        matrix,
        chol,
        pivot_ratio,
        mass,
    })
}

/// In-place lower Cholesky; returns the factor and the squared pivot
/// ratio. Errors carry the smallest (non-positive) pivot encountered.
fn cholesky_lower(matrix: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    let mut l = matrix.to_vec();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot: f64 = 0.0;
    for j in 0..n {
        let mut diag = l[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(McdError::CholeskyFailure {
                index: j,
                pivot: diag,
            });
        }
        let d = diag.sqrt();
        min_pivot = min_pivot.min(d);
        max_pivot = max_pivot.max(d);
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut v = l[i * n + j];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / d;
        }
        for k in (j + 1)..n {
            l[j * n + k] = 0.0;
        }
    }
    let ratio = (max_pivot / min_pivot).powi(2);
    Ok((l, ratio))
}

impl MomentMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.size + j]
    }

    /// Squared pivot ratio of the Cholesky factor.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    /// Errors out when the pivot ratio exceeds [`PIVOT_RATIO_LIMIT`].
    pub fn check_condition(&self) -> Result<()> {
        if self.pivot_ratio > PIVOT_RATIO_LIMIT {
            return Err(McdError::ConditionOverflow {
                ratio: self.pivot_ratio,
                limit: PIVOT_RATIO_LIMIT,
            });
        }
        Ok(())
    }

    /// Forward solve `L u = r` restricted to the leading `size` block.
    pub fn forward_solve_truncated(&self, r: &[f64], size: usize) -> Vec<f64> {
        let n = self.size;
        debug_assert!(size <= n && r.len() >= size);
        let mut u = vec![0.0; size];
        for i in 0..size {
            let mut v = r[i];
            for k in 0..i {
                v -= self.chol[i * n + k] * u[k];
            }
            u[i] = v / self.chol[i * n + i];
        }
        u
    }

    /// Back solve `L^T c = u` restricted to the leading `size` block.
    fn back_solve_truncated(&self, u: &[f64], size: usize) -> Vec<f64> {
        let n = self.size;
        let mut c = vec![0.0; size];
        for i in (0..size).rev() {
            let mut v = u[i];
            for k in (i + 1)..size {
                v -= self.chol[k * n + i] * c[k];
            }
            c[i] = v / self.chol[i * n + i];
        }
        c
    }

    /// `M^{-1} r` via the two triangular solves.
    pub fn solve(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.size {
            return Err(McdError::DimensionMismatch {
                expected: self.size,
                got: r.len(),
            });
        }
        let u = self.forward_solve_truncated(r, self.size);
        Ok(self.back_solve_truncated(&u, self.size))
    }

    /// `r^T M^{-1} r` computed through the Cholesky factor; always
    /// nonnegative by construction.
    pub fn weighted_norm_sq(&self, r: &[f64]) -> Result<f64> {
        if r.len() != self.size {
            return Err(McdError::DimensionMismatch {
                expected: self.size,
                got: r.len(),
            });
        }
        Ok(self.weighted_norm_sq_truncated(r, self.size))
    }

    /// `r^T M^{-1} r` using only the leading `size` block (the moment
    /// matrix of the same basis truncated to a lower degree).
    pub fn weighted_norm_sq_truncated(&self, r: &[f64], size: usize) -> f64 {
        let u = self.forward_solve_truncated(r, size);
        pairwise_sum(&u.iter().map(|v| v * v).collect::<Vec<_>>())
    }

    /// `r^T M^{-1} s` on the leading `size` block.
    pub fn weighted_inner_truncated(&self, r: &[f64], s: &[f64], size: usize) -> f64 {
        let u = self.forward_solve_truncated(r, size);
        let v = self.forward_solve_truncated(s, size);
        pairwise_sum(&u.iter().zip(&v).map(|(a, b)| a * b).collect::<Vec<_>>())
    }

    /// Writes the full symmetric matrix as CSV, row-major.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size)
                .map(|j| format!("{:.17e}", self.entry(i, j)))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Orthogonal projection of `h` onto the basis span in L^2(mu): solves the
/// normal equations `M c = r` with `r_j = int h b_j dmu`.
pub fn project(
    measure: &Measure,
    mm: &MomentMatrix,
    basis: &Basis,
    mut h: impl FnMut(&[f64]) -> f64,
) -> Result<ProjectionCoefficients> {
    let n = basis.len();
    if mm.size != n {
        return Err(McdError::DimensionMismatch {
            expected: mm.size,
            got: n,
        });
    }
    let nodes = measure.rule.len();
    let mut r = vec![0.0; n];
    let mut h_norm_sq_terms = Vec::with_capacity(nodes);
    let mut row = vec![0.0; n];
    // Accumulate r in node blocks with pairwise block sums.
    let mut partials: Vec<Vec<f64>> = Vec::new();
    let mut start = 0;
    while start < nodes {
        let block = NODE_BLOCK.min(nodes - start);
        let mut partial = vec![0.0; n];
        for local in 0..block {
            let i = start + local;
            let x = measure.rule.node(i);
            let hv = h(x);
            if !hv.is_finite() {
                return Err(McdError::NonFiniteIntegrand { index: i });
            }
            let wf = measure.rule.weight(i) * measure.density_at_node(i);
            basis.eval_into(x, &mut row);
            for j in 0..n {
                partial[j] += wf * hv * row[j];
            }
            h_norm_sq_terms.push(wf * hv * hv);
        }
        partials.push(partial);
        start += block;
    }
    for j in 0..n {
        let col: Vec<f64> = partials.iter().map(|p| p[j]).collect();
        r[j] = pairwise_sum(&col);
    }
    let h_norm_sq = pairwise_sum(&h_norm_sq_terms);

    let coeffs = mm.solve(&r)?;
    let norm_sq = pairwise_sum(&coeffs.iter().zip(&r).map(|(c, r)| c * r).collect::<Vec<_>>());
    let residual_norm_sq = (h_norm_sq - norm_sq).max(0.0);
    Ok(ProjectionCoefficients {
        coeffs,
        norm_sq,
        residual_norm_sq,
    })
}

/// Columns of `L^{-T}`, i.e. the coefficient vectors of the orthonormalized
/// basis `q = L^{-T} b`. Exposed for the dual-route identity checks.
pub fn orthonormalized_columns(mm: &MomentMatrix) -> Vec<Vec<f64>> {
    let n = mm.size;
    (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            // Solve L^T q = e_j.
            mm.back_solve_truncated(&e, n)
        })
        .collect()
}
