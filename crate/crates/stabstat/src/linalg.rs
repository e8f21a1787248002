//! Exact integer and modular matrix algebra.
//!
//! Everything here is exact: integer matrices use arbitrary precision, modular
//! matrices keep entries reduced into `[0, M)`. The two canonical forms are
//! the Smith normal form over `Z` (with both transforms, verified by
//! multiplication in the test suite) and the Howell form over `Z/M`, which is
//! what makes solving, kernels, intersections and quotients of `Z/M`-modules
//! exact even for composite `M`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("claimed submodule has a generator outside the ambient module")]
    NotASubmodule,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense integer matrix, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    a: Vec<BigInt>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, a: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count mismatch");
        IntMat { rows, cols, a: data.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut m = IntMat::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = BigInt::from(f(i, j));
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = &self[(i, k)];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = aik * &other[(k, j)];
                    out[(i, j)] += t;
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.a.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.a.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// row i += q * row j
    fn add_row(&mut self, i: usize, j: usize, q: &BigInt) {
        for c in 0..self.cols {
            let t = q * &self[(j, c)];
            self[(i, c)] += t;
        }
    }

    /// col i += q * col j
    fn add_col(&mut self, i: usize, j: usize, q: &BigInt) {
        for r in 0..self.rows {
            let t = q * &self[(r, j)];
            self[(r, i)] += t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let t = -self[(i, c)].clone();
            self[(i, c)] = t;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for r in 0..self.rows {
            let t = -self[(r, j)].clone();
            self[(r, j)] = t;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.a[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        let c = self.cols;
        &mut self.a[i * c + j]
    }
}

/// U * A * V = diag(factors), with U, V unimodular. `factors` has
/// min(rows, cols) entries, each dividing the next; unit entries are kept so
/// the diagonal length is predictable. Zeros sort to the end.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub u: IntMat,
    pub v: IntMat,
    pub factors: Vec<BigInt>,
}

pub fn smith_normal_form(a: &IntMat) -> SmithDecomposition {
    let mut s = a.clone();
    let mut u = IntMat::identity(a.rows);
    let mut v = IntMat::identity(a.cols);
    let n = a.rows.min(a.cols);

    for t in 0..n {
        // Bring the smallest-magnitude nonzero of the remaining block to the
        // pivot position; keeping pivots small limits growth.
        let mut piv: Option<(usize, usize)> = None;
        for i in t..s.rows {
            for j in t..s.cols {
                if !s[(i, j)].is_zero() {
                    match piv {
                        Some(p) if s[p].abs() <= s[(i, j)].abs() => {}
                        _ => piv = Some((i, j)),
                    }
                }
            }
        }
        let Some((pi, pj)) = piv else { break };
        s.swap_rows(t, pi);
        u.swap_rows(t, pi);
        s.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let mut dirty = false;
            // Clear column t below the pivot; a nonzero remainder becomes the
            // new, strictly smaller pivot.
            for i in (t + 1)..s.rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let (q, r) = s[(i, t)].div_rem(&s[(t, t)]);
                s.add_row(i, t, &-q.clone());
                u.add_row(i, t, &-q);
                if !r.is_zero() {
                    s.swap_rows(t, i);
                    u.swap_rows(t, i);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Clear row t right of the pivot.
            for j in (t + 1)..s.cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let (q, r) = s[(t, j)].div_rem(&s[(t, t)]);
                s.add_col(j, t, &-q.clone());
                v.add_col(j, t, &-q);
                if !r.is_zero() {
                    s.swap_cols(t, j);
                    v.swap_cols(t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Divisibility: if the pivot misses an entry of the trailing
            // block, fold that row in and keep reducing.
            let mut folded = false;
            'scan: for i in (t + 1)..s.rows {
                for j in (t + 1)..s.cols {
                    if !(&s[(i, j)] % &s[(t, t)]).is_zero() {
                        s.add_row(t, i, &BigInt::one());
                        u.add_row(t, i, &BigInt::one());
                        folded = true;
                        break 'scan;
                    }
                }
            }
            if !folded {
                break;
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }

    let factors = (0..n).map(|i| s[(i, i)].clone()).collect();
    SmithDecomposition { u, v, factors }
}

/// A * U = H with U unimodular; H is in column Hermite form: pivot rows
/// strictly increase, pivots positive, entries to the right of a pivot in its
/// row reduced into `[0, pivot)`, zero columns at the end.
#[derive(Debug, Clone)]
pub struct HermiteDecomposition {
    pub h: IntMat,
    pub u: IntMat,
}

pub fn hermite_normal_form(a: &IntMat) -> HermiteDecomposition {
    let mut h = a.clone();
    let mut u = IntMat::identity(a.cols);
    let mut pivot_col = 0usize;
    for row in 0..h.rows {
        if pivot_col >= h.cols {
            break;
        }
        // Reduce all columns >= pivot_col at this row to a single nonzero.
        loop {
            let mut smallest: Option<usize> = None;
            for j in pivot_col..h.cols {
                if !h[(row, j)].is_zero() {
                    match smallest {
                        Some(s) if h[(row, s)].abs() <= h[(row, j)].abs() => {}
                        _ => smallest = Some(j),
                    }
                }
            }
            let Some(s) = smallest else { break };
            h.swap_cols(pivot_col, s);
            u.swap_cols(pivot_col, s);
            let mut done = true;
            for j in (pivot_col + 1)..h.cols {
                if h[(row, j)].is_zero() {
                    continue;
                }
                let q = h[(row, j)].div_rem(&h[(row, pivot_col)]).0;
                h.add_col(j, pivot_col, &-q.clone());
                u.add_col(j, pivot_col, &-q);
                if !h[(row, j)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(row, pivot_col)].is_zero() {
            continue; // no pivot in this row
        }
        if h[(row, pivot_col)].is_negative() {
            h.negate_col(pivot_col);
            u.negate_col(pivot_col);
        }
        // Reduce earlier columns at this row into [0, pivot).
        for j in 0..pivot_col {
            let q = h[(row, j)].div_floor(&h[(row, pivot_col)]);
            if !q.is_zero() {
                h.add_col(j, pivot_col, &-q.clone());
                u.add_col(j, pivot_col, &-q);
            }
        }
        pivot_col += 1;
    }
    HermiteDecomposition { h, u }
}

/// Basis (as columns of the returned matrix) of `{ x : A x = 0 }` over `Z`.
pub fn integer_kernel(a: &IntMat) -> IntMat {
    let dec = hermite_normal_form(a);
    // Columns of U corresponding to zero columns of H span the kernel.
    let mut zero_cols = Vec::new();
    for j in 0..dec.h.cols {
        if (0..dec.h.rows).all(|i| dec.h[(i, j)].is_zero()) {
            zero_cols.push(j);
        }
    }
    let mut k = IntMat::zero(a.cols, zero_cols.len());
    for (out_j, &j) in zero_cols.iter().enumerate() {
        for i in 0..a.cols {
            k[(i, out_j)] = dec.u[(i, j)].clone();
        }
    }
    k
}

// ---------------------------------------------------------------------------
// Modular matrices
// ---------------------------------------------------------------------------

/// Dense matrix over `Z/M`, entries reduced into `[0, M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMat {
    pub modulus: i64,
    pub rows: usize,
    pub cols: usize,
    a: Vec<i64>,
}

impl ModMat {
    pub fn zero(modulus: i64, rows: usize, cols: usize) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        ModMat { modulus, rows, cols, a: vec![0; rows * cols] }
    }

    pub fn from_fn(modulus: i64, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut m = ModMat::zero(modulus, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_columns(modulus: i64, dim: usize, cols: &[Vec<i64>]) -> Self {
        let mut m = ModMat::zero(modulus, dim, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), dim, "column length mismatch");
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.a[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.a[i * self.cols + j] = v.rem_euclid(self.modulus);
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// A * x mod M for a dense vector x of length `cols`.
    pub fn mul_vec(&self, x: &[i64]) -> Vec<i64> {
        assert_eq!(x.len(), self.cols);
        let m = self.modulus;
        (0..self.rows)
            .map(|i| {
                let mut acc: i64 = 0;
                for j in 0..self.cols {
                    acc = (acc + self.get(i, j) * x[j].rem_euclid(m)) % m;
                }
                acc.rem_euclid(m)
            })
            .collect()
    }
}

pub fn extgcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = extgcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// A unit u mod M with u * a = gcd(a, M) mod M (a nonzero mod M).
fn unit_multiplier(a: i64, m: i64) -> i64 {
    let a = a.rem_euclid(m);
    let g = gcd(a, m);
    let a1 = a / g;
    let mstar = m / g;
    // a1 is a unit mod mstar; lift its inverse to a unit mod m.
    let (_, inv, _) = extgcd(a1.rem_euclid(mstar), mstar);
    let mut u = inv.rem_euclid(mstar);
    if u == 0 {
        u = mstar; // mstar == 1 case: any unit works
    }
    while gcd(u, m) != 1 {
        u += mstar;
    }
    debug_assert_eq!((u * a).rem_euclid(m), g.rem_euclid(m));
    u.rem_euclid(m)
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Row-style Howell form. `transform * A = howell` over `Z/M`; the rows of
/// `howell` are a canonical generating set of the row module of `A` with the
/// Howell property: any element of the row module whose leading entries up to
/// column j vanish lies in the span of the rows with pivot at column >= j.
/// `kernel` rows t satisfy t * A = 0 and generate all such t.
#[derive(Debug, Clone)]
pub struct HowellForm {
    pub modulus: i64,
    /// Canonical nonzero rows, pivot columns strictly increasing.
    pub rows: Vec<Vec<i64>>,
    /// Pivot column of each row.
    pub pivots: Vec<usize>,
    /// Transform rows: transform[i] * A = rows[i].
    pub transform: Vec<Vec<i64>>,
    /// Generators of the left kernel of A.
    pub kernel: Vec<Vec<i64>>,
}

/// Compute the Howell form of the rows of `a` (given as slices of length
/// `cols`), over `Z/M`.
pub fn howell_form(modulus: i64, cols: usize, a: &[Vec<i64>]) -> HowellForm {
    let m = modulus;
    assert!(m >= 2);
    let n = a.len();
    // Working rows carry [row | transform].
    let mut work: Vec<(Vec<i64>, Vec<i64>)> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            assert_eq!(r.len(), cols, "row length mismatch");
            let mut t = vec![0i64; n];
            t[i] = 1;
            (r.iter().map(|&x| x.rem_euclid(m)).collect(), t)
        })
        .collect();

    let mut out_rows: Vec<Vec<i64>> = Vec::new();
    let mut out_piv: Vec<usize> = Vec::new();
    let mut out_tr: Vec<Vec<i64>> = Vec::new();

    for col in 0..cols {
        // Collect rows with leading nonzero at `col`.
        let mut idxs: Vec<usize> = (0..work.len()).filter(|&i| work[i].0[col] != 0).collect();
        if idxs.is_empty() {
            continue;
        }
        // Combine them into one pivot row.
        let lead = idxs[0];
        for &i in &idxs[1..] {
            let (a0, b0) = (work[lead].0[col], work[i].0[col]);
            let (g, s, t) = extgcd(a0, b0);
            let (p, q) = (b0 / g, a0 / g);
            // [s t; -p q] has determinant s*q + t*p = 1.
            let new_lead: (Vec<i64>, Vec<i64>) = (
                combine(m, s, &work[lead].0, t, &work[i].0),
                combine(m, s, &work[lead].1, t, &work[i].1),
            );
            let new_other: (Vec<i64>, Vec<i64>) = (
                combine(m, -p, &work[lead].0, q, &work[i].0),
                combine(m, -p, &work[lead].1, q, &work[i].1),
            );
            work[lead] = new_lead;
            work[i] = new_other;
            debug_assert_eq!(work[i].0[col], 0);
        }
        idxs.truncate(1);
        // Normalize the pivot to gcd(pivot, M).
        let pv = work[lead].0[col];
        let u = unit_multiplier(pv, m);
        work[lead].0 = scale(m, u, &work[lead].0);
        work[lead].1 = scale(m, u, &work[lead].1);
        let g = work[lead].0[col];
        debug_assert_eq!(g, gcd(pv, m));
        // Annihilator row keeps the Howell property for composite M.
        if g != 1 {
            let ann = m / g;
            let extra = (scale(m, ann, &work[lead].0), scale(m, ann, &work[lead].1));
            if extra.0.iter().any(|&x| x != 0) {
                work.push(extra);
            } else if extra.1.iter().any(|&x| x != 0) {
                // Pure kernel contribution.
                work.push(extra);
            }
        }
        let row = work.remove(lead);
        out_rows.push(row.0);
        out_piv.push(col);
        out_tr.push(row.1);
    }

    // Remaining rows are left-kernel generators (their row part is zero).
    let mut kernel: Vec<Vec<i64>> = Vec::new();
    for (r, t) in work {
        debug_assert!(r.iter().all(|&x| x == 0));
        if t.iter().any(|&x| x != 0) {
            kernel.push(t);
        }
    }

    // Reduce entries above each pivot into [0, pivot_value).
    for k in (0..out_rows.len()).rev() {
        let col = out_piv[k];
        let g = out_rows[k][col];
        for j in 0..k {
            let v = out_rows[j][col];
            let q = v / g;
            if q != 0 {
                out_rows[j] = combine(m, 1, &out_rows[j].clone(), -q, &out_rows[k]);
                out_tr[j] = combine(m, 1, &out_tr[j].clone(), -q, &out_tr[k]);
            }
        }
    }

    HowellForm { modulus: m, rows: out_rows, pivots: out_piv, transform: out_tr, kernel }
}

fn combine(m: i64, c1: i64, r1: &[i64], c2: i64, r2: &[i64]) -> Vec<i64> {
    r1.iter()
        .zip(r2)
        .map(|(&x, &y)| (c1.rem_euclid(m) * x + c2.rem_euclid(m) * y).rem_euclid(m))
        .collect()
}

fn scale(m: i64, c: i64, r: &[i64]) -> Vec<i64> {
    r.iter().map(|&x| (c.rem_euclid(m) * x).rem_euclid(m)).collect()
}

/// Outcome of a modular linear solve: not finding a solution is a result, not
/// an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solution {
        /// One x with A x = b.
        particular: Vec<i64>,
        /// Generators of { x : A x = 0 }.
        kernel: Vec<Vec<i64>>,
    },
    NoSolution,
}

/// Solve A x = b over `Z/M` where the columns of `a` are the images of the
/// unknowns. Returns a particular solution plus a complete kernel basis.
pub fn solve_mod(a: &ModMat, b: &[i64]) -> SolveOutcome {
    assert_eq!(b.len(), a.rows, "rhs length mismatch");
    let m = a.modulus;
    let ncols_sys = a.rows; // equations
    let nunk = a.cols;
    // Rows of the Howell system: transposed columns of A.
    let sys: Vec<Vec<i64>> = (0..nunk).map(|j| a.column(j)).collect();
    let hf = howell_form(m, ncols_sys, &sys);

    // Kernel of x -> A x is exactly the left kernel of the transposed system.
    let kernel = hf.kernel.clone();

    // Reduce b against the Howell rows.
    let Some(coeffs) = reduce_to_coefficients(&hf, b) else {
        return SolveOutcome::NoSolution;
    };
    // b = sum coeffs[k] * rows[k] = sum coeffs[k] * transform[k] * A^T-rows,
    // so x = sum coeffs[k] * transform[k].
    let mut x = vec![0i64; nunk];
    for (k, c) in coeffs.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        for j in 0..nunk {
            x[j] = (x[j] + c * hf.transform[k][j]).rem_euclid(m);
        }
    }
    debug_assert_eq!(a.mul_vec(&x), b.iter().map(|&v| v.rem_euclid(m)).collect::<Vec<_>>());
    SolveOutcome::Solution { particular: x, kernel }
}

/// Express `b` over the Howell rows of `hf`, or report that `b` is outside
/// their span. The coefficient vector is indexed like `hf.rows`.
fn reduce_to_coefficients(hf: &HowellForm, b: &[i64]) -> Option<Vec<i64>> {
    let m = hf.modulus;
    let mut r: Vec<i64> = b.iter().map(|&x| x.rem_euclid(m)).collect();
    let mut coeffs = vec![0i64; hf.rows.len()];
    for (k, row) in hf.rows.iter().enumerate() {
        let col = hf.pivots[k];
        let v = r[col];
        if v == 0 {
            continue;
        }
        let g = row[col];
        if v % g != 0 {
            return None;
        }
        let q = v / g;
        coeffs[k] = q;
        r = combine(m, 1, &r, -q, row);
    }
    if r.iter().any(|&x| x != 0) {
        return None;
    }
    Some(coeffs)
}

/// Canonical generators (as columns) of the column span of `a`: the Howell
/// form of the transposed module, transposed back.
pub fn column_span_basis(a: &ModMat) -> ModMat {
    let sys: Vec<Vec<i64>> = (0..a.cols).map(|j| a.column(j)).collect();
    let hf = howell_form(a.modulus, a.rows, &sys);
    let cols: Vec<Vec<i64>> = hf.rows;
    ModMat::from_columns(a.modulus, a.rows, &cols)
}

/// Generators of the intersection of the column spans of `a` and `b`
/// (submodules of `(Z/M)^dim`), returned as canonical columns.
pub fn module_intersection(a: &ModMat, b: &ModMat) -> ModMat {
    assert_eq!(a.modulus, b.modulus);
    assert_eq!(a.rows, b.rows, "ambient dimension mismatch");
    let m = a.modulus;
    let joint = ModMat::from_fn(m, a.rows, a.cols + b.cols, |i, j| {
        if j < a.cols {
            a.get(i, j)
        } else {
            b.get(i, j - a.cols)
        }
    });
    // Kernel vectors (x; y) with A x + B y = 0 give intersection elements A x.
    let sys: Vec<Vec<i64>> = (0..joint.cols).map(|j| joint.column(j)).collect();
    let hf = howell_form(m, joint.rows, &sys);
    let mut gens: Vec<Vec<i64>> = Vec::new();
    for t in &hf.kernel {
        let x = &t[..a.cols];
        let g = a.mul_vec(x);
        if g.iter().any(|&v| v != 0) {
            gens.push(g);
        }
    }
    let gen_mat = ModMat::from_columns(m, a.rows, &gens);
    column_span_basis(&gen_mat)
}

/// Invariant factors of a finite abelian group, entries >= 2 in a divisibility
/// chain; the empty list is the trivial group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantFactors(pub Vec<i64>);

impl InvariantFactors {
    pub fn order(&self) -> i64 {
        self.0.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for InvariantFactors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "trivial");
        }
        let parts: Vec<String> = self.0.iter().map(|d| format!("Z{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Invariant factors of `Z^k / (span(columns of rel) + M Z^k)`. Entries stay
/// reduced mod M throughout, so plain i64 arithmetic is exact.
pub fn presentation_invariants_mod(modulus: i64, k: usize, rel: &[Vec<i64>]) -> InvariantFactors {
    let m = modulus;
    let mut a: Vec<Vec<i64>> = rel
        .iter()
        .map(|c| {
            assert_eq!(c.len(), k);
            c.iter().map(|&x| x.rem_euclid(m)).collect()
        })
        .collect();
    let rows = k;
    let mut row_alive: Vec<bool> = vec![true; rows];
    let mut factors: Vec<i64> = Vec::new();

    loop {
        // Find the entry with smallest nonzero gcd(value, M) among live rows.
        let mut best: Option<(usize, usize, i64)> = None;
        for (j, col) in a.iter().enumerate() {
            for i in 0..rows {
                if !row_alive[i] || col[i] == 0 {
                    continue;
                }
                let g = gcd(col[i], m);
                match best {
                    Some((_, _, bg)) if bg <= g => {}
                    _ => best = Some((i, j, g)),
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        // Normalize pivot to gcd(pivot, M) by a unit.
        let u = unit_multiplier(a[pj][pi], m);
        for v in a[pj].iter_mut() {
            *v = (*v * u).rem_euclid(m);
        }
        let g = a[pj][pi];
        // Clear the pivot row across other columns (column ops on the
        // presentation are row ops on relations; both are legal).
        for j in 0..a.len() {
            if j == pj || a[j][pi] == 0 {
                continue;
            }
            let v = a[j][pi];
            if v % g == 0 {
                let q = v / g;
                for i in 0..rows {
                    a[j][i] = (a[j][i] - q * a[pj][i]).rem_euclid(m);
                }
            } else {
                // Fold to make the pivot the gcd, then redo.
                let (g2, s, t) = extgcd(a[pj][pi], v);
                let (p, q) = (v / g2, a[pj][pi] / g2);
                let colp: Vec<i64> = (0..rows)
                    .map(|i| (s * a[pj][i] + t * a[j][i]).rem_euclid(m))
                    .collect();
                let colo: Vec<i64> = (0..rows)
                    .map(|i| (-p * a[pj][i] + q * a[j][i]).rem_euclid(m))
                    .collect();
                a[pj] = colp;
                a[j] = colo;
            }
        }
        // Re-normalize (folds may have changed the pivot).
        let u = unit_multiplier(a[pj][pi], m);
        for v in a[pj].iter_mut() {
            *v = (*v * u).rem_euclid(m);
        }
        let g = a[pj][pi];
        // Clear the pivot column across rows: generator change of basis. Other
        // rows' entries in this column are multiples of g after the gcd fold
        // loop above? Not necessarily for other rows; handle by gcd-folding
        // rows too.
        let mut clean = true;
        for i in 0..rows {
            if i == pi || !row_alive[i] || a[pj][i] == 0 {
                continue;
            }
            let v = a[pj][i];
            if v % g == 0 {
                let q = v / g;
                // row op on presentation matrix: row_i -= q * row_pi applied
                // across all columns.
                for col in a.iter_mut() {
                    col[i] = (col[i] - q * col[pi]).rem_euclid(m);
                }
            } else {
                // Mix rows to pull the gcd into the pivot, then restart.
                let (g2, s, t) = extgcd(g, v);
                let (p, q) = (v / g2, g / g2);
                for col in a.iter_mut() {
                    let x = col[pi];
                    let y = col[i];
                    col[pi] = (s * x + t * y).rem_euclid(m);
                    col[i] = (-p * x + q * y).rem_euclid(m);
                }
                clean = false;
                break;
            }
        }
        if !clean {
            continue; // restart pivot search with improved pivot
        }
        let g = gcd(a[pj][pi], m);
        factors.push(g);
        row_alive[pi] = false;
        a.swap_remove(pj);
    }

    // Rows never pivoted contribute a factor M (only the M Z^k relation).
    let remaining = row_alive.iter().filter(|&&x| x).count();
    factors.extend(std::iter::repeat(m).take(remaining));

    // Assemble the divisibility chain from prime powers.
    canonical_chain(&factors)
}

/// Rebuild a divisibility chain from arbitrary cyclic factors, dropping units.
fn canonical_chain(factors: &[i64]) -> InvariantFactors {
    use std::collections::BTreeMap;
    // prime -> multiset of exponents
    let mut primes: BTreeMap<i64, Vec<u32>> = BTreeMap::new();
    for &f in factors {
        let mut f = f;
        let mut p = 2;
        while p * p <= f {
            if f % p == 0 {
                let mut e = 0;
                while f % p == 0 {
                    f /= p;
                    e += 1;
                }
                primes.entry(p).or_default().push(e);
            }
            p += 1;
        }
        if f > 1 {
            primes.entry(f).or_default().push(1);
        }
    }
    let width = primes.values().map(|v| v.len()).max().unwrap_or(0);
    let mut chain = vec![1i64; width];
    for (p, mut exps) in primes {
        exps.sort_unstable();
        // Largest exponent goes to the last factor.
        for (slot, e) in exps.into_iter().rev().enumerate() {
            let idx = width - 1 - slot;
            chain[idx] *= p.pow(e);
        }
    }
    InvariantFactors(chain.into_iter().filter(|&d| d >= 2).collect())
}

/// Invariant factors of full / sub, both given as column-generated submodules
/// of `(Z/M)^dim`. Errors if some generator of `sub` is not in `full`.
pub fn quotient_invariants(sub: &ModMat, full: &ModMat) -> Result<InvariantFactors, LinalgError> {
    assert_eq!(sub.modulus, full.modulus);
    if sub.rows != full.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "sub ambient {} vs full ambient {}",
            sub.rows, full.rows
        )));
    }
    let m = full.modulus;
    // One Howell form of full's columns serves every containment check.
    let full_sys: Vec<Vec<i64>> = (0..full.cols).map(|j| full.column(j)).collect();
    let hf_full = howell_form(m, full.rows, &full_sys);
    for j in 0..sub.cols {
        if reduce_to_coefficients(&hf_full, &sub.column(j)).is_none() {
            return Err(LinalgError::NotASubmodule);
        }
    }
    let k = full.cols;
    if k == 0 {
        return Ok(InvariantFactors(Vec::new()));
    }
    // Relations among the generators of full, modulo sub: coefficient vectors
    // c with full * c in span(sub). These are the c-parts of the kernel of
    // [full | sub].
    let joint = ModMat::from_fn(m, full.rows, full.cols + sub.cols, |i, j| {
        if j < full.cols {
            full.get(i, j)
        } else {
            sub.get(i, j - full.cols)
        }
    });
    let sys: Vec<Vec<i64>> = (0..joint.cols).map(|j| joint.column(j)).collect();
    let hf = howell_form(m, joint.rows, &sys);
    let rel: Vec<Vec<i64>> = hf.kernel.iter().map(|t| t[..k].to_vec()).collect();
    Ok(presentation_invariants_mod(m, k, &rel))
}
