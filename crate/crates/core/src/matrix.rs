//! Matrices over F_p and the elimination engine behind every rank,
//! kernel and cokernel computation in the crate.
//!
//! Matrices are immutable after construction and safe to share across
//! threads. Elimination is plain Gaussian elimination with the pivot
//! chosen as the first nonzero position, so results are bit-reproducible.
//! Dense storage is used unless fewer than one entry in ten is nonzero,
//! in which case a column-major sparse layout is kept instead.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::field::PrimeField;

/// Density threshold below which sparse storage is preferred.
const SPARSE_DENSITY: f64 = 0.10;

#[derive(Clone, Debug, Serialize, Deserialize)]
enum Storage {
    /// Row-major dense entries, length rows*cols.
    Dense(Vec<u64>),
    /// Column-major sparse: for each column, (row, value) pairs sorted by row.
    Sparse(Vec<Vec<(u32, u64)>>),
}

/// An immutable matrix over F_p.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            storage: Storage::Sparse(vec![Vec::new(); cols]),
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut data = vec![0u64; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Matrix {
            field,
            rows: n,
            cols: n,
            storage: Storage::Dense(data),
        }
    }

    /// Build from explicit rows; every row must have the same length.
    pub fn from_rows(field: PrimeField, rows: Vec<Vec<u64>>) -> Result<Self, Error> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::dim(format!(
                    "row {i} has length {}, expected {width}",
                    row.len()
                )));
            }
        }
        let mut data = Vec::with_capacity(height * width);
        for row in rows {
            for v in row {
                data.push(v % field.prime());
            }
        }
        Ok(Matrix {
            field,
            rows: height,
            cols: width,
            storage: Storage::Dense(data),
        })
    }

    /// Build from signed integer rows, reducing entries modulo p.
    pub fn from_int_rows(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self, Error> {
        let reduced = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.reduce_i64(v)).collect())
            .collect();
        Matrix::from_rows(field, reduced)
    }

    /// Build from (row, col, value) triplets; duplicate positions are summed.
    /// Picks dense or sparse storage by entry count.
    pub fn from_triplets(
        field: PrimeField,
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Result<Self, Error> {
        let mut by_col: Vec<Vec<(u32, u64)>> = vec![Vec::new(); cols];
        let mut nonzero = 0usize;
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::dim(format!(
                    "triplet ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            let v = v % field.prime();
            if v != 0 {
                by_col[c].push((r as u32, v));
            }
        }
        for col in by_col.iter_mut() {
            col.sort_by_key(|&(r, _)| r);
            let mut merged: Vec<(u32, u64)> = Vec::with_capacity(col.len());
            for &(r, v) in col.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 = field.add(last.1, v),
                    _ => merged.push((r, v)),
                }
            }
            merged.retain(|&(_, v)| v != 0);
            nonzero += merged.len();
            *col = merged;
        }
        let cells = rows.saturating_mul(cols);
        if cells > 0 && (nonzero as f64) < SPARSE_DENSITY * cells as f64 {
            Ok(Matrix {
                field,
                rows,
                cols,
                storage: Storage::Sparse(by_col),
            })
        } else {
            let mut data = vec![0u64; cells];
            for (c, col) in by_col.iter().enumerate() {
                for &(r, v) in col {
                    data[r as usize * cols + c] = v;
                }
            }
            Ok(Matrix {
                field,
                rows,
                cols,
                storage: Storage::Dense(data),
            })
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        match &self.storage {
            Storage::Dense(data) => data[r * self.cols + c],
            Storage::Sparse(cols) => cols[c]
                .binary_search_by_key(&(r as u32), |&(row, _)| row)
                .map(|i| cols[c][i].1)
                .unwrap_or(0),
        }
    }

    pub fn row(&self, r: usize) -> Vec<u64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn column(&self, c: usize) -> Vec<(u32, u64)> {
        match &self.storage {
            Storage::Dense(data) => (0..self.rows)
                .filter_map(|r| {
                    let v = data[r * self.cols + c];
                    (v != 0).then_some((r as u32, v))
                })
                .collect(),
            Storage::Sparse(cols) => cols[c].clone(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut triplets = Vec::new();
        self.for_each_entry(|r, c, v| triplets.push((c, r, v)));
        Matrix::from_triplets(self.field, self.cols, self.rows, triplets)
            .expect("transpose preserves bounds")
    }

    fn for_each_entry(&self, mut visit: impl FnMut(usize, usize, u64)) {
        match &self.storage {
            Storage::Dense(data) => {
                for r in 0..self.rows {
                    for c in 0..self.cols {
                        let v = data[r * self.cols + c];
                        if v != 0 {
                            visit(r, c, v);
                        }
                    }
                }
            }
            Storage::Sparse(cols) => {
                for (c, col) in cols.iter().enumerate() {
                    for &(r, v) in col {
                        visit(r as usize, c, v);
                    }
                }
            }
        }
    }

    /// Matrix product self * other.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix, Error> {
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut triplets = Vec::new();
        for r in 0..self.rows {
            let mut acc = vec![0u64; other.cols];
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for &(c, b) in &other.column_cache(k) {
                    acc[c as usize] = f.add(acc[c as usize], f.mul(a, b));
                }
            }
            for (c, v) in acc.into_iter().enumerate() {
                if v != 0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Matrix::from_triplets(self.field, self.rows, other.cols, triplets)
    }

    // `column` allocates for dense storage; mul wants rows of `other`
    // instead, which this provides without transposing.
    fn column_cache(&self, r: usize) -> Vec<(u32, u64)> {
        match &self.storage {
            Storage::Dense(data) => (0..self.cols)
                .filter_map(|c| {
                    let v = data[r * self.cols + c];
                    (v != 0).then_some((c as u32, v))
                })
                .collect(),
            Storage::Sparse(_) => (0..self.cols)
                .filter_map(|c| {
                    let v = self.get(r, c);
                    (v != 0).then_some((c as u32, v))
                })
                .collect(),
        }
    }

    /// Apply to a coefficient vector: self * v.
    pub fn apply(&self, v: &[u64]) -> Result<Vec<u64>, Error> {
        if v.len() != self.cols {
            return Err(Error::dim(format!(
                "apply: vector length {} vs {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = &self.field;
        let mut out = vec![0u64; self.rows];
        self.for_each_entry(|r, c, val| {
            if v[c] != 0 {
                out[r] = f.add(out[r], f.mul(val, v[c]));
            }
        });
        Ok(out)
    }

    /// Rank of the matrix: dimension of the row space (= column space).
    pub fn rank(&self) -> usize {
        self.rank_bounded(usize::MAX)
    }

    /// Rank with early exit once `upper_bound` is reached. The caller must
    /// guarantee that `upper_bound` really bounds the rank (for example a
    /// target-space dimension, or exactness of a complex); the returned
    /// value is then exact.
    pub fn rank_bounded(&self, upper_bound: usize) -> usize {
        let (veclen, stream_len, transposed) = if self.rows <= self.cols {
            (self.rows, self.cols, false)
        } else {
            (self.cols, self.rows, true)
        };
        let cap = upper_bound.min(veclen).min(stream_len);
        let mut acc = RankAccumulator::new(self.field, veclen);
        let mut scratch = vec![0u64; veclen];
        for k in 0..stream_len {
            if acc.rank() >= cap {
                break;
            }
            scratch.iter_mut().for_each(|x| *x = 0);
            if transposed {
                match &self.storage {
                    Storage::Dense(data) => {
                        scratch.copy_from_slice(&data[k * self.cols..(k + 1) * self.cols]);
                    }
                    Storage::Sparse(cols) => {
                        for (c, col) in cols.iter().enumerate() {
                            if let Ok(i) = col.binary_search_by_key(&(k as u32), |&(r, _)| r) {
                                scratch[c] = col[i].1;
                            }
                        }
                    }
                }
            } else {
                match &self.storage {
                    Storage::Dense(data) => {
                        for r in 0..self.rows {
                            scratch[r] = data[r * self.cols + k];
                        }
                    }
                    Storage::Sparse(cols) => {
                        for &(r, v) in &cols[k] {
                            scratch[r as usize] = v;
                        }
                    }
                }
            }
            acc.insert(&mut scratch);
        }
        acc.rank()
    }

    /// Dimension of the kernel {x : self * x = 0}.
    pub fn kernel_dim(&self) -> usize {
        self.cols - self.rank()
    }

    /// Dimension of the cokernel (target modulo column span).
    pub fn cokernel_dim(&self) -> usize {
        self.rows - self.rank()
    }

    /// A basis of the kernel, one vector per free column of the reduced
    /// row echelon form. Intended for the moderate sizes that subsystem
    /// construction needs.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let f = &self.field;
        // Reduced row echelon form of the row span.
        let mut rref: Vec<Vec<u64>> = Vec::new();
        let mut pivot_cols: Vec<usize> = Vec::new();
        for r in 0..self.rows {
            let mut row = self.row(r);
            reduce_against(f, &mut row, &rref, &pivot_cols);
            if let Some(lead) = row.iter().position(|&v| v != 0) {
                let inv = f.inv(row[lead]);
                row.iter_mut().for_each(|v| *v = f.mul(*v, inv));
                // Keep earlier rows reduced against the new pivot.
                for (prev, &pc) in rref.iter_mut().zip(&pivot_cols) {
                    let _ = pc;
                    let c = prev[lead];
                    if c != 0 {
                        for k in 0..prev.len() {
                            prev[k] = f.sub(prev[k], f.mul(c, row[k]));
                        }
                    }
                }
                let at = pivot_cols.partition_point(|&pc| pc < lead);
                pivot_cols.insert(at, lead);
                rref.insert(at, row);
            }
        }
        let pivot_set: std::collections::BTreeSet<usize> = pivot_cols.iter().copied().collect();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivot_set.contains(c)) {
            let mut v = vec![0u64; self.cols];
            v[free] = 1;
            for (row, &pc) in rref.iter().zip(&pivot_cols) {
                v[pc] = f.neg(row[free]);
            }
            basis.push(v);
        }
        basis
    }

    /// Reduced row echelon basis of the row space, rows sorted by pivot
    /// column. Canonical for a given row space, hence reproducible.
    pub fn row_space_rref(&self) -> Matrix {
        let f = &self.field;
        let mut rref: Vec<Vec<u64>> = Vec::new();
        let mut pivot_cols: Vec<usize> = Vec::new();
        for r in 0..self.rows {
            let mut row = self.row(r);
            reduce_against(f, &mut row, &rref, &pivot_cols);
            if let Some(lead) = row.iter().position(|&v| v != 0) {
                let inv = f.inv(row[lead]);
                row.iter_mut().for_each(|v| *v = f.mul(*v, inv));
                for prev in rref.iter_mut() {
                    let c = prev[lead];
                    if c != 0 {
                        for k in 0..prev.len() {
                            prev[k] = f.sub(prev[k], f.mul(c, row[k]));
                        }
                    }
                }
                let at = pivot_cols.partition_point(|&pc| pc < lead);
                pivot_cols.insert(at, lead);
                rref.insert(at, row);
            }
        }
        Matrix::from_rows(self.field, rref).expect("rref rows are rectangular")
    }
}

fn reduce_against(f: &PrimeField, row: &mut [u64], rref: &[Vec<u64>], pivot_cols: &[usize]) {
    for (basis_row, &pc) in rref.iter().zip(pivot_cols) {
        let c = row[pc];
        if c != 0 {
            for k in 0..row.len() {
                row[k] = f.sub(row[k], f.mul(c, basis_row[k]));
            }
        }
    }
}

/// Incremental pivot basis: vectors are inserted one at a time, reduced
/// against the pivots found so far (first-nonzero-position pivoting).
/// The workhorse behind `rank` and the Koszul strand computations, where
/// columns are streamed rather than materialized.
pub struct RankAccumulator {
    field: PrimeField,
    veclen: usize,
    lazy: bool,
    /// (pivot position, normalized row with leading 1).
    pivots: Vec<(usize, Vec<u64>)>,
}

impl RankAccumulator {
    pub fn new(field: PrimeField, veclen: usize) -> Self {
        RankAccumulator {
            field,
            veclen,
            lazy: field.lazy_ok(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn veclen(&self) -> usize {
        self.veclen
    }

    /// Pivot positions in insertion order.
    pub fn pivot_positions(&self) -> Vec<usize> {
        self.pivots.iter().map(|&(pos, _)| pos).collect()
    }

    /// Normalized pivot rows in insertion order; they span exactly the
    /// inserted vectors.
    pub fn pivot_rows(&self) -> impl Iterator<Item = &[u64]> {
        self.pivots.iter().map(|(_, row)| row.as_slice())
    }

    /// Reduce `v` against the pivot basis without inserting; afterwards
    /// `v` is fully reduced modulo p with zeros at every pivot position.
    pub fn reduce_only(&self, v: &mut [u64]) {
        assert_eq!(v.len(), self.veclen, "accumulator vector length");
        let p = self.field.prime();
        if self.lazy {
            for &(pos, ref row) in &self.pivots {
                let c = v[pos] % p;
                if c == 0 {
                    continue;
                }
                let m = p - c;
                for (slot, &r) in v.iter_mut().zip(row.iter()) {
                    *slot += m * r;
                }
            }
        } else {
            for &(pos, ref row) in &self.pivots {
                let c = v[pos] % p;
                if c == 0 {
                    continue;
                }
                let m = p - c;
                for (slot, &r) in v.iter_mut().zip(row.iter()) {
                    *slot = ((*slot % p) + m * r % p) % p;
                }
            }
        }
        v.iter_mut().for_each(|x| *x %= p);
    }

    /// Reduce `v` in place against the pivot basis and absorb what is
    /// left as a new pivot. Returns true when the vector was independent.
    /// `v` entries may be arbitrary u64 values congruent to the intended
    /// residues (lazy accumulation is reduced on the fly).
    pub fn insert(&mut self, v: &mut [u64]) -> bool {
        assert_eq!(v.len(), self.veclen, "accumulator vector length");
        let p = self.field.prime();
        if self.lazy {
            // Slots accumulate without reduction: each axpy adds at most
            // (p-1)^2 < 2^31 per slot, so u64 overflows only after ~2^33
            // pivot passes, far beyond any vector length used here.
            for &(pos, ref row) in &self.pivots {
                let c = v[pos] % p;
                if c == 0 {
                    continue;
                }
                let m = p - c;
                for (slot, &r) in v.iter_mut().zip(row.iter()) {
                    *slot += m * r;
                }
            }
        } else {
            for &(pos, ref row) in &self.pivots {
                let c = v[pos] % p;
                if c == 0 {
                    continue;
                }
                let m = p - c;
                for (slot, &r) in v.iter_mut().zip(row.iter()) {
                    *slot = ((*slot % p) + m * r % p) % p;
                }
            }
        }
        v.iter_mut().for_each(|x| *x %= p);
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(lead) => {
                let inv = self.field.inv(v[lead]);
                let row: Vec<u64> = v.iter().map(|&x| self.field.mul(x, inv)).collect();
                self.pivots.push((lead, row));
                true
            }
        }
    }

    /// Insert a sparse vector given as (position, value) pairs (repeated
    /// positions accumulate), using the provided scratch buffer, which
    /// must be zeroed on entry and is zeroed again on exit.
    pub fn insert_sparse(&mut self, entries: &[(u32, u64)], scratch: &mut [u64]) -> bool {
        for &(pos, val) in entries {
            scratch[pos as usize] += val;
        }
        let fresh = self.insert(scratch);
        scratch.iter_mut().for_each(|x| *x = 0);
        fresh
    }
}

/// Echelon basis that can express later vectors in terms of the inserted
/// ones. Rows are kept exactly as inserted (reduced against earlier rows
/// only), so recorded elimination coefficients are coordinates.
pub struct Echelon {
    field: PrimeField,
    veclen: usize,
    pivot_pos: Vec<usize>,
    rows: Vec<Vec<u64>>,
}

/// Outcome of [`Echelon::insert`].
pub enum EchelonInsert {
    /// Vector was dependent; coefficients express it in the stored basis.
    Dependent(Vec<u64>),
    /// Vector extended the basis; its index in the basis is returned.
    Independent(usize),
}

impl Echelon {
    pub fn new(field: PrimeField, veclen: usize) -> Self {
        Echelon {
            field,
            veclen,
            pivot_pos: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis_rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn insert(&mut self, mut v: Vec<u64>) -> EchelonInsert {
        assert_eq!(v.len(), self.veclen);
        let f = self.field;
        let mut coeffs = vec![0u64; self.rows.len()];
        for i in 0..self.rows.len() {
            let c = v[self.pivot_pos[i]];
            if c != 0 {
                coeffs[i] = c;
                let row = &self.rows[i];
                for k in 0..self.veclen {
                    v[k] = f.sub(v[k], f.mul(c, row[k]));
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => EchelonInsert::Dependent(coeffs),
            Some(lead) => {
                let inv = f.inv(v[lead]);
                v.iter_mut().for_each(|x| *x = f.mul(*x, inv));
                self.pivot_pos.push(lead);
                self.rows.push(v);
                EchelonInsert::Independent(self.rows.len() - 1)
            }
        }
    }

    /// Coordinates of `v` in the stored basis; None if `v` is outside the span.
    pub fn coordinates(&self, v: &[u64]) -> Option<Vec<u64>> {
        let f = self.field;
        let mut work = v.to_vec();
        let mut coeffs = vec![0u64; self.rows.len()];
        for i in 0..self.rows.len() {
            let c = work[self.pivot_pos[i]];
            if c != 0 {
                coeffs[i] = c;
                let row = &self.rows[i];
                for k in 0..self.veclen {
                    work[k] = f.sub(work[k], f.mul(c, row[k]));
                }
            }
        }
        work.iter().all(|&x| x == 0).then_some(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> PrimeField {
        PrimeField::default_field()
    }

    #[test]
    fn rank_of_empty_matrix_is_zero() {
        let m = Matrix::zeros(f(), 0, 0);
        assert_eq!(m.rank(), 0);
        assert_eq!(m.kernel_dim(), 0);
        assert_eq!(m.cokernel_dim(), 0);
    }

    #[test]
    fn rank_of_identity() {
        for n in 1..8 {
            assert_eq!(Matrix::identity(f(), n).rank(), n);
            assert_eq!(Matrix::identity(f(), n).kernel_dim(), 0);
            assert_eq!(Matrix::identity(f(), n).cokernel_dim(), 0);
        }
    }

    #[test]
    fn proportional_rows_have_rank_one() {
        let m = Matrix::from_rows(f(), vec![vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_of_zero_matrix() {
        let m = Matrix::zeros(f(), 3, 5);
        assert_eq!(m.kernel_dim(), 5);
        assert_eq!(m.cokernel_dim(), 3);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 5);
    }

    #[test]
    fn kernel_dim_rank_two() {
        let m = Matrix::from_rows(f(), vec![vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(m.kernel_dim(), 1);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        assert_eq!(m.apply(&basis[0]).unwrap(), vec![0, 0]);
    }

    #[test]
    fn surjective_map_has_no_cokernel() {
        let m = Matrix::from_rows(f(), vec![vec![1, 0, 3], vec![0, 1, 4]]).unwrap();
        assert_eq!(m.cokernel_dim(), 0);
        let z = Matrix::zeros(f(), 4, 2);
        assert_eq!(z.cokernel_dim(), 4);
    }

    #[test]
    fn kernel_vectors_are_killed() {
        let m = Matrix::from_int_rows(
            f(),
            &[
                vec![1, 2, 3, 4, 5],
                vec![2, 4, 6, 8, 10],
                vec![0, 1, 0, -1, 3],
            ],
        )
        .unwrap();
        assert_eq!(m.rank(), 2);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 3);
        for v in &basis {
            assert!(m.apply(v).unwrap().iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn sparse_and_dense_storage_agree() {
        // 1 nonzero in 30 cells triggers sparse storage.
        let sparse = Matrix::from_triplets(f(), 5, 6, vec![(2, 3, 7)]).unwrap();
        assert!(sparse.is_sparse());
        assert_eq!(sparse.get(2, 3), 7);
        assert_eq!(sparse.rank(), 1);
        let dense = Matrix::from_triplets(f(), 2, 2, vec![(0, 0, 1), (1, 1, 1)]).unwrap();
        assert!(!dense.is_sparse());
        assert_eq!(dense.rank(), 2);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let p = f().prime();
        let m =
            Matrix::from_triplets(f(), 2, 40, vec![(0, 0, 5), (0, 0, p - 5), (1, 1, 3)]).unwrap();
        assert_eq!(m.get(0, 0), 0);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn transpose_swaps_shape() {
        let m = Matrix::from_rows(f(), vec![vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        let t = m.transpose();
        assert_eq!((t.rows(), t.cols()), (3, 2));
        assert_eq!(t.get(2, 1), 6);
    }

    #[test]
    fn mul_matches_by_hand() {
        let a = Matrix::from_rows(f(), vec![vec![1, 2], vec![3, 4]]).unwrap();
        let b = Matrix::from_rows(f(), vec![vec![5, 6], vec![7, 8]]).unwrap();
        let c = a.mul(&b).unwrap();
        assert_eq!(c.row(0), vec![19, 22]);
        assert_eq!(c.row(1), vec![43, 50]);
        assert!(a.mul(&Matrix::zeros(f(), 3, 1)).is_err());
    }

    #[test]
    fn rank_bounded_early_exit_is_exact_for_valid_bounds() {
        let m = Matrix::from_rows(f(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]]).unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(m.rank_bounded(2), 2);
    }

    #[test]
    fn matrices_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Matrix>();
        assert_send_sync::<PrimeField>();
    }

    #[test]
    fn echelon_coordinates_roundtrip() {
        let field = f();
        let mut ech = Echelon::new(field, 4);
        assert!(matches!(
            ech.insert(vec![1, 2, 0, 0]),
            EchelonInsert::Independent(0)
        ));
        assert!(matches!(
            ech.insert(vec![0, 1, 1, 0]),
            EchelonInsert::Independent(1)
        ));
        // 2*(1,2,0,0) + 3*(0,1,1,0) = (2,7,3,0)
        let coeffs = match ech.insert(vec![2, 7, 3, 0]) {
            EchelonInsert::Dependent(c) => c,
            _ => panic!("expected dependent vector"),
        };
        let rows = ech.basis_rows().to_vec();
        let mut recon = vec![0u64; 4];
        for (c, row) in coeffs.iter().zip(&rows) {
            for k in 0..4 {
                recon[k] = field.add(recon[k], field.mul(*c, row[k]));
            }
        }
        assert_eq!(recon, vec![2, 7, 3, 0]);
        assert!(ech.coordinates(&[0, 0, 0, 1]).is_none());
    }
}
