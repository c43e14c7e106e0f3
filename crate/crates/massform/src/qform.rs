//! Positive definite quadratic forms as even Gram matrices.
//!
//! A form f(x) = Σ b_i x_i² + Σ_{i<j} c_ij x_i x_j is stored through its even
//! Gram matrix A with f(x) = xᵀAx/2, so A has even diagonal and integer
//! off-diagonal entries. The module counts representations r_f(n) by exact
//! lattice enumeration (theta series), computes levels and determinants from
//! exact integer linear algebra, and counts automorphisms by backtracking.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A positive definite integral quadratic form, stored as its even Gram
/// matrix (even diagonal, symmetric). Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadForm {
    dim: usize,
    gram: Vec<Vec<i64>>,
    diagonal_coeffs: Option<Vec<u64>>,
}

impl QuadForm {
    /// Builds a form from its even Gram matrix, validating symmetry, even
    /// diagonal, and positive definiteness (all leading minors > 0).
    pub fn from_gram(gram: Vec<Vec<i64>>) -> Result<Self> {
        let d = gram.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty Gram matrix".into()));
        }
        for row in &gram {
            if row.len() != d {
                return Err(Error::InvalidInput("Gram matrix is not square".into()));
            }
        }
        for i in 0..d {
            if gram[i][i] % 2 != 0 {
                return Err(Error::InvalidInput(format!(
                    "Gram diagonal entry {} at ({i},{i}) is odd",
                    gram[i][i]
                )));
            }
            for j in 0..d {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidInput("Gram matrix is not symmetric".into()));
                }
            }
        }
        let minors = leading_minors(&gram);
        if minors.iter().any(|m| !m.is_positive()) {
            return Err(Error::InvalidInput("Gram matrix is not positive definite".into()));
        }
        let diagonal_coeffs = if (0..d).all(|i| (0..d).all(|j| i == j || gram[i][j] == 0)) {
            let b: Vec<u64> = gram.iter().enumerate().map(|(i, r)| (r[i] / 2) as u64).collect();
            let g = b.iter().fold(0u64, |acc, &v| acc.gcd(&v));
            if g == 1 {
                Some(b)
            } else {
                None
            }
        } else {
            None
        };
        Ok(QuadForm { dim: d, gram, diagonal_coeffs })
    }

    /// Builds the diagonal form Σ b_i x_i². The coefficients must be
    /// positive with gcd 1 (primitive form).
    pub fn from_diagonal(b: &[u64]) -> Result<Self> {
        if b.is_empty() || b.contains(&0) {
            return Err(Error::InvalidInput("diagonal coefficients must be positive".into()));
        }
        let g = b.iter().fold(0u64, |acc, &v| acc.gcd(&v));
        if g != 1 {
            return Err(Error::InvalidInput(format!(
                "diagonal coefficients have gcd {g} > 1; only primitive forms are supported"
            )));
        }
        let d = b.len();
        let mut gram = vec![vec![0i64; d]; d];
        for i in 0..d {
            gram[i][i] = 2 * b[i] as i64;
        }
        Ok(QuadForm { dim: d, gram, diagonal_coeffs: Some(b.to_vec()) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    /// The diagonal coefficients (b_1..b_d) when the form is diagonal and
    /// primitive.
    pub fn diagonal_coeffs(&self) -> Option<&[u64]> {
        self.diagonal_coeffs.as_deref()
    }

    /// f(x) = xᵀAx/2, exact in i128.
    pub fn evaluate(&self, x: &[i64]) -> i128 {
        assert_eq!(x.len(), self.dim);
        let mut acc: i128 = 0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.gram[i][j] as i128 * x[i] as i128 * x[j] as i128;
            }
        }
        debug_assert!(acc % 2 == 0);
        acc / 2
    }

    /// Determinant of the even Gram matrix.
    pub fn det_gram(&self) -> BigInt {
        leading_minors(&self.gram).pop().unwrap()
    }

    /// The level: the least N ≥ 1 such that N·A⁻¹ is integral with even
    /// diagonal, computed from the exact adjugate.
    pub fn level(&self) -> Result<u64> {
        let det = self.det_gram();
        let adj = adjugate(&self.gram);
        let mut n = BigInt::one();
        let two_det: BigInt = &det * 2;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = &adj[i][j];
                if a.is_zero() {
                    continue;
                }
                // integrality: det | N·adj_ij
                let need = &det / det.gcd(a);
                n = n.lcm(&need);
                if i == j {
                    // even diagonal: 2·det | N·adj_ii
                    let need = &two_det / two_det.gcd(a);
                    n = n.lcm(&need);
                }
            }
        }
        n.to_u64().ok_or_else(|| Error::Unsupported("level exceeds u64".into()))
    }

    /// The finest partition of coordinate indices into mutually orthogonal
    /// blocks of the Gram matrix.
    pub fn orthogonal_blocks(&self) -> Vec<Vec<usize>> {
        orthogonal_blocks_of(&self.gram)
    }

    /// The sub-form on a set of coordinates (the block must be orthogonal to
    /// its complement for theta factorization to be valid; this is not
    /// re-checked here).
    pub fn restrict(&self, indices: &[usize]) -> QuadForm {
        let gram: Vec<Vec<i64>> =
            indices.iter().map(|&i| indices.iter().map(|&j| self.gram[i][j]).collect()).collect();
        QuadForm::from_gram(gram).expect("restriction of a valid form")
    }
}

/// The finest orthogonal-block partition of a symmetric matrix: connected
/// components of the graph with an edge where gram[i][j] ≠ 0.
fn orthogonal_blocks_of(gram: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let d = gram.len();
    let mut seen = vec![false; d];
    let mut blocks = Vec::new();
    for start in 0..d {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            for j in 0..d {
                if !seen[j] && gram[i][j] != 0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        blocks.push(comp);
    }
    blocks
}

/// Leading principal minors det(A[..k][..k]) for k = 1..d, by fraction-free
/// (Bareiss) elimination over BigInt.
fn leading_minors(gram: &[Vec<i64>]) -> Vec<BigInt> {
    let d = gram.len();
    let mut m: Vec<Vec<BigInt>> =
        gram.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut minors = Vec::with_capacity(d);
    let mut prev = BigInt::one();
    for k in 0..d {
        if m[k][k].is_zero() {
            // A zero pivot cannot occur for a positive definite matrix; the
            // minor sequence just reports it so the caller rejects the form.
            minors.push(BigInt::zero());
            for _ in k + 1..d {
                minors.push(BigInt::zero());
            }
            return minors;
        }
        minors.push(m[k][k].clone());
        for i in k + 1..d {
            for j in k + 1..d {
                let num = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
        for i in k + 1..d {
            m[i][k] = BigInt::zero();
        }
    }
    minors
}

/// Adjugate matrix (det·A⁻¹) via cofactor determinants.
fn adjugate(gram: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let d = gram.len();
    if d == 1 {
        return vec![vec![BigInt::one()]];
    }
    let mut adj = vec![vec![BigInt::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let minor: Vec<Vec<i64>> = (0..d)
                .filter(|&r| r != i)
                .map(|r| (0..d).filter(|&c| c != j).map(|c| gram[r][c]).collect())
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            // adj_ij = (−1)^{i+j}·M_ji; with symmetric input M_ji = M_ij.
            adj[j][i] = determinant_of(&minor) * sign;
        }
    }
    adj
}

fn determinant_of(m: &[Vec<i64>]) -> BigInt {
    if m.is_empty() {
        return BigInt::one();
    }
    // Bareiss elimination with partial pivoting (row swaps flip the sign).
    let d = m.len();
    let mut a: Vec<Vec<BigInt>> =
        m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut sign = 1i64;
    let mut prev = BigInt::one();
    for k in 0..d {
        if a[k][k].is_zero() {
            match (k + 1..d).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    a[d - 1][d - 1].clone() * sign
}

// ---------------------------------------------------------------------------
// Exact enumeration: fraction-free LDLᵀ
// ---------------------------------------------------------------------------

/// Integral data for exact Fincke–Pohst-style enumeration: with pivot rows
/// R_i (R_ii = i-th leading minor d_i) from fraction-free elimination,
/// xᵀAx = Σ_i s_i²/(d_i·d_{i−1}) where s_i = Σ_{j≥i} R_ij x_j. Scaling by
/// Λ = lcm(d_i·d_{i−1}) keeps everything in integers:
/// Λ·xᵀAx = Σ_i W_i·s_i².
struct IntLdl {
    rows: Vec<Vec<i128>>,
    weights: Vec<i128>,
    lambda: i128,
}

fn int_ldl(gram: &[Vec<i64>]) -> IntLdl {
    let d = gram.len();
    let mut m: Vec<Vec<BigInt>> =
        gram.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(d);
    let mut prev = BigInt::one();
    for k in 0..d {
        rows.push(m[k].clone());
        for i in k + 1..d {
            for j in k + 1..d {
                let num = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
        for i in k + 1..d {
            m[i][k] = BigInt::zero();
        }
    }
    let mut lambda = BigInt::one();
    let mut denoms = Vec::with_capacity(d);
    let mut dprev = BigInt::one();
    for (i, r) in rows.iter().enumerate() {
        let di = r[i].clone();
        let denom = &di * &dprev;
        lambda = lambda.lcm(&denom);
        denoms.push(denom);
        dprev = di;
    }
    let to_i128 = |b: &BigInt| -> i128 {
        b.to_i128().expect("enumeration pivot data exceeds i128; form too large")
    };
    let weights: Vec<i128> = denoms.iter().map(|den| to_i128(&(&lambda / den))).collect();
    let rows128: Vec<Vec<i128>> =
        rows.iter().map(|r| r.iter().map(|v| to_i128(v)).collect()).collect();
    IntLdl { rows: rows128, weights, lambda: to_i128(&lambda) }
}

fn isqrt_i128(v: i128) -> i128 {
    debug_assert!(v >= 0);
    v.sqrt()
}

/// Counts lattice vectors by form value: returns counts[n] = #{x : f(x) = n}
/// for 0 ≤ n ≤ n_max, where f(x) = xᵀAx/2. Enumerates only representatives
/// with positive leading (outermost nonzero) coordinate and doubles them.
fn block_theta_counts(gram: &[Vec<i64>], n_max: u64, parallel: bool) -> Vec<u64> {
    let d = gram.len();
    let ldl = int_ldl(gram);
    let budget: i128 = 2 * n_max as i128 * ldl.lambda;
    let top = d - 1;
    let w_top = ldl.weights[top];
    let r_top = ldl.rows[top][top];
    debug_assert!(r_top > 0);
    let smax = isqrt_i128(budget / w_top);
    let ymax = smax / r_top;

    let run_branch = |y: i128| -> Vec<u64> {
        let mut counts = vec![0u64; n_max as usize + 1];
        let mut partial = vec![0i128; d];
        let s = r_top * y;
        let term = w_top * s * s;
        let mult = if y > 0 { 2 } else { 1 };
        let leading = y == 0;
        if d == 1 {
            let val = term / ldl.lambda;
            debug_assert_eq!(term % ldl.lambda, 0);
            debug_assert_eq!(val % 2, 0);
            counts[(val / 2) as usize] += mult;
        } else {
            for i in 0..top {
                partial[i] = ldl.rows[i][top] * y;
            }
            dfs_count(&ldl, top - 1, budget - term, term, leading, mult, &mut partial, &mut counts);
        }
        counts
    };

    if parallel && d >= 4 && ymax >= 4 {
        (0..=ymax as i64)
            .into_par_iter()
            .map(|y| run_branch(y as i128))
            .reduce(|| vec![0u64; n_max as usize + 1], add_count_vecs)
    } else {
        let mut total = vec![0u64; n_max as usize + 1];
        for y in 0..=ymax {
            total = add_count_vecs(total, run_branch(y));
        }
        total
    }
}

fn add_count_vecs(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

#[allow(clippy::too_many_arguments)]
fn dfs_count(
    ldl: &IntLdl,
    level: usize,
    budget: i128,
    consumed: i128,
    leading: bool,
    mult: u64,
    partial: &mut [i128],
    counts: &mut [u64],
) {
    let w = ldl.weights[level];
    let r = ldl.rows[level][level];
    let center = partial[level];
    let smax = isqrt_i128(budget / w);
    // R·y + center ∈ [−smax, smax]
    let ylo = div_ceil_i128(-smax - center, r);
    let yhi = div_floor_i128(smax - center, r);
    let ylo = if leading { ylo.max(0) } else { ylo };
    for y in ylo..=yhi {
        let s = r * y + center;
        let term = w * s * s;
        debug_assert!(term <= budget);
        let mult_here = if leading && y > 0 { 2 } else { mult };
        let leading_here = leading && y == 0;
        if level == 0 {
            let val = (consumed + term) / ldl.lambda;
            debug_assert_eq!((consumed + term) % ldl.lambda, 0);
            debug_assert_eq!(val % 2, 0);
            counts[(val / 2) as usize] += mult_here;
        } else {
            for i in 0..level {
                partial[i] += ldl.rows[i][level] * y;
            }
            dfs_count(
                ldl,
                level - 1,
                budget - term,
                consumed + term,
                leading_here,
                mult_here,
                partial,
                counts,
            );
            for i in 0..level {
                partial[i] -= ldl.rows[i][level] * y;
            }
        }
    }
}

fn div_floor_i128(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn div_ceil_i128(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// Collects all lattice vectors x with f(x) ≤ n_max (both signs), paired
/// with their exact value f(x). Intended for small search regions
/// (automorphism candidate lists).
fn enumerate_vectors(gram: &[Vec<i64>], n_max: u64) -> Vec<(Vec<i64>, u64)> {
    let d = gram.len();
    let ldl = int_ldl(gram);
    let budget: i128 = 2 * n_max as i128 * ldl.lambda;
    let mut out = Vec::new();
    let mut partial = vec![0i128; d];
    let mut x = vec![0i64; d];
    dfs_collect(&ldl, d - 1, budget, 0, &mut partial, &mut x, &mut out);
    out
}

fn dfs_collect(
    ldl: &IntLdl,
    level: usize,
    budget: i128,
    consumed: i128,
    partial: &mut [i128],
    x: &mut [i64],
    out: &mut Vec<(Vec<i64>, u64)>,
) {
    let w = ldl.weights[level];
    let r = ldl.rows[level][level];
    let center = partial[level];
    let smax = isqrt_i128(budget / w);
    let ylo = div_ceil_i128(-smax - center, r);
    let yhi = div_floor_i128(smax - center, r);
    for y in ylo..=yhi {
        let s = r * y + center;
        let term = w * s * s;
        x[level] = y as i64;
        if level == 0 {
            let val = (consumed + term) / ldl.lambda;
            out.push((x.to_vec(), (val / 2) as u64));
        } else {
            for i in 0..level {
                partial[i] += ldl.rows[i][level] * y;
            }
            dfs_collect(ldl, level - 1, budget - term, consumed + term, partial, x, out);
            for i in 0..level {
                partial[i] -= ldl.rows[i][level] * y;
            }
        }
    }
    x[level] = 0;
}

// ---------------------------------------------------------------------------
// Theta series
// ---------------------------------------------------------------------------

/// Exact theta series coefficients r_f(0..N).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaSeries {
    pub form: QuadForm,
    pub precision: usize,
    pub coeffs: Vec<BigUint>,
}

impl ThetaSeries {
    pub fn coeff(&self, n: usize) -> &BigUint {
        &self.coeffs[n]
    }
}

/// Theta series of a diagonal form by truncated products of unary series
/// Σ_x q^{b·x²}. This path never touches the lattice enumerator, so it can
/// serve as an independent cross-check of `theta_general`.
pub fn theta_diagonal(b: &[u64], n_max: usize) -> Result<ThetaSeries> {
    let form = QuadForm::from_diagonal(b)?;
    let mut series = vec![0u128; n_max + 1];
    series[0] = 1;
    for &bi in b {
        let mut next = vec![0u128; n_max + 1];
        for n in 0..=n_max {
            if series[n] == 0 {
                continue;
            }
            let c = series[n];
            next[n] = next[n].checked_add(c).expect("theta coefficient overflow");
            let mut x = 1u64;
            while bi.checked_mul(x * x).map(|v| v as usize + n <= n_max).unwrap_or(false) {
                let m = n + (bi * x * x) as usize;
                next[m] = next[m].checked_add(2 * c).expect("theta coefficient overflow");
                x += 1;
            }
        }
        series = next;
    }
    Ok(ThetaSeries {
        form,
        precision: n_max,
        coeffs: series.into_iter().map(BigUint::from).collect(),
    })
}

/// Theta series of an arbitrary positive definite form by exact lattice
/// enumeration. The Gram matrix is first split into orthogonal blocks; each
/// block is enumerated independently (the outermost coordinate range is
/// partitioned across threads for large blocks) and the per-block series are
/// convolved.
pub fn theta_general(f: &QuadForm, n_max: usize) -> Result<ThetaSeries> {
    let blocks = f.orthogonal_blocks();
    let mut series: Vec<u128> = vec![0; n_max + 1];
    series[0] = 1;
    let mut first = true;
    for block in blocks {
        let sub: Vec<Vec<i64>> =
            block.iter().map(|&i| block.iter().map(|&j| f.gram()[i][j]).collect()).collect();
        let counts = block_theta_counts(&sub, n_max as u64, true);
        let counts: Vec<u128> = counts.into_iter().map(u128::from).collect();
        if first {
            series = counts;
            first = false;
        } else {
            series = convolve_series(&series, &counts, n_max);
        }
    }
    Ok(ThetaSeries {
        form: f.clone(),
        precision: n_max,
        coeffs: series.into_iter().map(BigUint::from).collect(),
    })
}

/// Truncated product of two coefficient series, iterating over the sparser
/// factor for speed.
fn convolve_series(a: &[u128], b: &[u128], n_max: usize) -> Vec<u128> {
    let (sparse, dense) = {
        let nnz_a = a.iter().filter(|v| !v.is_zero()).count();
        let nnz_b = b.iter().filter(|v| !v.is_zero()).count();
        if nnz_a <= nnz_b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut out = vec![0u128; n_max + 1];
    for (m, &c) in sparse.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for n in m..=n_max {
            let term = c.checked_mul(dense[n - m]).expect("theta coefficient overflow");
            out[n] = out[n].checked_add(term).expect("theta coefficient overflow");
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Automorphisms
// ---------------------------------------------------------------------------

/// Result of a capped combinatorial count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountResult {
    Exact(u64),
    CapExceeded,
}

impl CountResult {
    pub fn exact(self) -> Option<u64> {
        match self {
            CountResult::Exact(v) => Some(v),
            CountResult::CapExceeded => None,
        }
    }
}

/// |O(f)|: the number of integer matrices α with αᵀAα = A, by backtracking
/// over images of the basis vectors. Aborts with `CapExceeded` after
/// exploring `cap` nodes.
pub fn automorphism_count(f: &QuadForm, cap: u64) -> CountResult {
    automorphism_count_detailed(f, cap, 0).0
}

/// As `automorphism_count`, but also returns up to `keep` of the counted
/// automorphism matrices (columns = images of basis vectors, original
/// order) for external re-verification.
pub fn automorphism_count_detailed(
    f: &QuadForm,
    cap: u64,
    keep: usize,
) -> (CountResult, Vec<Vec<Vec<i64>>>) {
    let d = f.dim();
    let gram = f.gram();
    let max_norm = (0..d).map(|i| gram[i][i] / 2).max().unwrap() as u64;
    let all = enumerate_vectors(gram, max_norm);
    // Bucket candidate image vectors by exact norm (doubled, = A_ii).
    let mut by_norm: HashMap<i64, Vec<Vec<i64>>> = HashMap::new();
    for (v, n) in all {
        by_norm.entry(2 * n as i64).or_default().push(v);
    }
    // Place columns in order of increasing candidate-list size.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&i| by_norm.get(&gram[i][i]).map_or(0, |v| v.len()));
    let empty: Vec<Vec<i64>> = Vec::new();
    let cands: Vec<&Vec<Vec<i64>>> =
        order.iter().map(|&i| by_norm.get(&gram[i][i]).unwrap_or(&empty)).collect();

    struct Search<'a> {
        d: usize,
        gram: &'a [Vec<i64>],
        order: &'a [usize],
        cands: &'a [&'a Vec<Vec<i64>>],
        cap: u64,
        nodes: u64,
        count: u64,
        keep: usize,
        kept: Vec<Vec<Vec<i64>>>,
        placed: Vec<Vec<i64>>,
        gram_times: Vec<Vec<i128>>,
    }
    impl Search<'_> {
        fn go(&mut self, step: usize) -> bool {
            if step == self.d {
                self.count += 1;
                if self.kept.len() < self.keep {
                    // Reassemble columns into original index order.
                    let mut cols = vec![Vec::new(); self.d];
                    for (k, &i) in self.order.iter().enumerate() {
                        cols[i] = self.placed[k].clone();
                    }
                    self.kept.push(cols);
                }
                return true;
            }
            let i = self.order[step];
            'cand: for v in self.cands[step].iter() {
                self.nodes += 1;
                if self.nodes > self.cap {
                    return false;
                }
                for (k, w) in self.gram_times.iter().enumerate().take(step) {
                    let j = self.order[k];
                    let dot: i128 = v.iter().zip(w).map(|(&a, &b)| a as i128 * b).sum();
                    if dot != self.gram[i][j] as i128 {
                        continue 'cand;
                    }
                }
                let gv: Vec<i128> = (0..self.d)
                    .map(|r| v.iter().enumerate().map(|(c, &x)| self.gram[r][c] as i128 * x as i128).sum())
                    .collect();
                self.placed.push(v.clone());
                self.gram_times.push(gv);
                let ok = self.go(step + 1);
                self.placed.pop();
                self.gram_times.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut s = Search {
        d,
        gram,
        order: &order,
        cands: &cands,
        cap,
        nodes: 0,
        count: 0,
        keep,
        kept: Vec::new(),
        placed: Vec::new(),
        gram_times: Vec::new(),
    };
    if s.go(0) {
        (CountResult::Exact(s.count), s.kept)
    } else {
        (CountResult::CapExceeded, s.kept)
    }
}

// ---------------------------------------------------------------------------
// Theta cache
// ---------------------------------------------------------------------------

/// Hex SHA-256 of the row-major decimal Gram entries joined by commas.
pub fn gram_hash(f: &QuadForm) -> String {
    let flat: Vec<String> =
        f.gram().iter().flat_map(|r| r.iter().map(|v| v.to_string())).collect();
    let mut hasher = Sha256::new();
    hasher.update(flat.join(",").as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes a theta series to the line-oriented cache format:
/// header `theta v1 <gram-hash> <N>`, then `n r_n` pairs in decimal.
pub fn write_theta_cache(series: &ThetaSeries, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "theta v1 {} {}", gram_hash(&series.form), series.precision)?;
    for (n, c) in series.coeffs.iter().enumerate() {
        writeln!(out, "{n} {c}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a cached theta series for `form`, if the cache file matches the
/// form's Gram hash and holds at least `precision` coefficients. A wrong
/// hash or a too-short cache is a miss (`None`); a malformed file is an
/// error.
pub fn read_theta_cache(
    path: &Path,
    form: &QuadForm,
    precision: usize,
) -> Result<Option<ThetaSeries>> {
    if !path.exists() {
        return Ok(None);
    }
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::InvalidInput("empty theta cache file".into())),
    };
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "theta" || parts[1] != "v1" {
        return Err(Error::InvalidInput(format!("bad theta cache header: {header}")));
    }
    let n_file: usize = parts[3]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad theta cache precision: {}", parts[3])))?;
    if parts[2] != gram_hash(form) || n_file < precision {
        return Ok(None);
    }
    let mut coeffs = Vec::with_capacity(precision + 1);
    for (expect, line) in lines.enumerate() {
        if expect > precision {
            break;
        }
        let line = line?;
        let mut it = line.split_whitespace();
        let (n, c) = match (it.next(), it.next()) {
            (Some(n), Some(c)) => (n, c),
            _ => return Err(Error::InvalidInput(format!("bad theta cache line: {line}"))),
        };
        if n.parse::<usize>().ok() != Some(expect) {
            return Err(Error::InvalidInput(format!("theta cache line out of order: {line}")));
        }
        let c: BigUint = c
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad theta cache coefficient: {c}")))?;
        coeffs.push(c);
    }
    if coeffs.len() != precision + 1 {
        return Err(Error::InvalidInput("theta cache truncated".into()));
    }
    Ok(Some(ThetaSeries { form: form.clone(), precision, coeffs }))
}
