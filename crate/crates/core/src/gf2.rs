//! Sparse and dense matrices over GF(2), exact rank computation, and the
//! Betti-number bookkeeping that turns boundary ranks into homology.
//!
//! The sparse type is a plain CSR layout with strictly increasing column
//! indices per row. Ranks come from two independent elimination routines: a
//! bit-packed dense Gaussian elimination (guarded by a size cap) and a
//! sparse column-reduction in the style of persistent-homology reductions,
//! which also exposes its pivot rows so chained boundary matrices can skip
//! columns that are known to die (`∂∘∂ = 0` clearing).

use std::collections::HashSet;
use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Gf2Error {
    #[error("row {row} has column index {col} out of range for {cols} columns")]
    ColumnOutOfRange { row: usize, col: u32, cols: usize },
    #[error("row {row} has column indices out of order or repeated")]
    UnsortedRow { row: usize },
    #[error("dimension mismatch: left is {lr}x{lc}, right is {rr}x{rc}")]
    Shape {
        lr: usize,
        lc: usize,
        rr: usize,
        rc: usize,
    },
    #[error("dense elimination refused: {rows}x{cols} needs {bits} bits, cap is {cap}")]
    DenseCapExceeded {
        rows: usize,
        cols: usize,
        bits: u128,
        cap: u64,
    },
    #[error("negative Betti number b_{dim} = {value}; ranks inconsistent with cell counts")]
    NegativeBetti { dim: usize, value: i64 },
    #[error("{0} cell counts but {1} boundary ranks; expected one rank per positive dimension")]
    RankCountMismatch(usize, usize),
    #[error("cannot parse matrix data: {0}")]
    Parse(String),
    #[error("matrix i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("confidence target {0} is not in [0, 1)")]
    BadConfidence(f64),
    #[error(
        "randomized rank trials kept disagreeing after {budget} attempts; \
         leading candidates {first} and {second}"
    )]
    TrialsDisagree {
        first: usize,
        second: usize,
        budget: u32,
    },
}

/// Default ceiling on `rows × cols` for dense elimination, in bits.
pub const DEFAULT_DENSE_CAP_BITS: u64 = 100_000_000;

/// Sparse GF(2) matrix in CSR form. Column indices are strictly increasing
/// within each row; an entry's value is always 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBoolMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
}

impl SparseBoolMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseBoolMatrix {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
        }
    }

    /// Builds from per-row column lists, validating order and range.
    pub fn from_rows<I>(rows: usize, cols: usize, data: I) -> Result<Self, Gf2Error>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        let mut row_ptr = Vec::with_capacity(rows + 1);
        row_ptr.push(0usize);
        let mut col_idx = Vec::new();
        let mut count = 0usize;
        for (r, row) in data.into_iter().enumerate() {
            count += 1;
            let mut last: Option<u32> = None;
            for &c in &row {
                if c as usize >= cols {
                    return Err(Gf2Error::ColumnOutOfRange { row: r, col: c, cols });
                }
                if let Some(prev) = last {
                    if c <= prev {
                        return Err(Gf2Error::UnsortedRow { row: r });
                    }
                }
                last = Some(c);
            }
            col_idx.extend_from_slice(&row);
            row_ptr.push(col_idx.len());
        }
        if count != rows {
            return Err(Gf2Error::Parse(format!(
                "expected {rows} rows, got {count}"
            )));
        }
        Ok(SparseBoolMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn is_zero(&self) -> bool {
        self.col_idx.is_empty()
    }

    pub fn transpose(&self) -> SparseBoolMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut col_idx = vec![0u32; self.col_idx.len()];
        let mut cursor = counts;
        for r in 0..self.rows {
            for &c in self.row(r) {
                col_idx[cursor[c as usize]] = r as u32;
                cursor[c as usize] += 1;
            }
        }
        SparseBoolMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
        }
    }

    /// Sparse product over GF(2). Scratch stays proportional to the live
    /// entries of each output row, so products that are identically zero
    /// (boundary-of-boundary checks) cost only the flips that cancel.
    pub fn mul(&self, rhs: &SparseBoolMatrix) -> Result<SparseBoolMatrix, Gf2Error> {
        if self.cols != rhs.rows {
            return Err(Gf2Error::Shape {
                lr: self.rows,
                lc: self.cols,
                rr: rhs.rows,
                rc: rhs.cols,
            });
        }
        let mut live = vec![false; rhs.cols];
        let mut touched: Vec<u32> = Vec::new();
        let mut out_rows: Vec<Vec<u32>> = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            for &mid in self.row(r) {
                for &c in rhs.row(mid as usize) {
                    touched.push(c);
                    live[c as usize] = !live[c as usize];
                }
            }
            let mut row: Vec<u32> = touched.drain(..).filter(|&c| live[c as usize]).collect();
            row.sort_unstable();
            row.dedup();
            for &c in &row {
                live[c as usize] = false;
            }
            out_rows.push(row);
        }
        SparseBoolMatrix::from_rows(self.rows, rhs.cols, out_rows)
    }

    /// Applies the matrix to a block of 64 column vectors packed as one u64
    /// word per coordinate: `out[i] = XOR of v[j] over entries (i, j)`.
    pub fn mul_block(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols, "block vector length mismatch");
        let mut out = vec![0u64; self.rows];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = 0u64;
            for &c in self.row(r) {
                acc ^= v[c as usize];
            }
            *slot = acc;
        }
        out
    }

    /// Serializes in SMS exchange format: a `rows cols M` header, one-based
    /// `i j 1` triples, and a `0 0 0` terminator.
    pub fn to_sms(&self) -> String {
        let mut out = Vec::new();
        self.write_sms(&mut out)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("SMS output is ASCII")
    }

    /// Streams the SMS form without materializing it; the boundary matrices
    /// of a genus-2 complex run to hundreds of megabytes as text.
    pub fn write_sms<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {} M", self.rows, self.cols)?;
        for r in 0..self.rows {
            for &c in self.row(r) {
                writeln!(w, "{} {} 1", r + 1, c + 1)?;
            }
        }
        writeln!(w, "0 0 0")
    }

    pub fn from_sms(text: &str) -> Result<Self, Gf2Error> {
        Self::read_sms(text.as_bytes())
    }

    pub fn read_sms<R: io::BufRead>(r: R) -> Result<Self, Gf2Error> {
        let mut lines = r.lines();
        let header = loop {
            match lines.next() {
                None => return Err(Gf2Error::Parse("empty matrix data".into())),
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
            }
        };
        let mut parts = header.split_whitespace();
        let rows: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Gf2Error::Parse(format!("bad header `{header}`")))?;
        let cols: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Gf2Error::Parse(format!("bad header `{header}`")))?;
        if parts.next() != Some("M") {
            return Err(Gf2Error::Parse(format!("bad header `{header}`")));
        }
        let mut entries: Vec<(u32, u32)> = Vec::new();
        let mut terminated = false;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if terminated {
                return Err(Gf2Error::Parse("data after terminator".into()));
            }
            let mut parts = line.split_whitespace();
            let i: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Gf2Error::Parse(format!("bad entry `{line}`")))?;
            let j: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Gf2Error::Parse(format!("bad entry `{line}`")))?;
            let v: u32 = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Gf2Error::Parse(format!("bad entry `{line}`")))?;
            if parts.next().is_some() {
                return Err(Gf2Error::Parse(format!("bad entry `{line}`")));
            }
            if (i, j, v) == (0, 0, 0) {
                terminated = true;
                continue;
            }
            if v != 1 {
                return Err(Gf2Error::Parse(format!("entry value {v} is not 1")));
            }
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(Gf2Error::Parse(format!("entry `{line}` out of range")));
            }
            entries.push(((i - 1) as u32, (j - 1) as u32));
        }
        if !terminated {
            return Err(Gf2Error::Parse("missing 0 0 0 terminator".into()));
        }
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0] == w[1]) {
            return Err(Gf2Error::Parse("repeated entry".into()));
        }
        let mut data: Vec<Vec<u32>> = vec![Vec::new(); rows];
        for (i, j) in entries {
            data[i as usize].push(j);
        }
        SparseBoolMatrix::from_rows(rows, cols, data)
    }
}

/// Dense bit-packed GF(2) matrix, 64 columns per word.
#[derive(Debug, Clone)]
pub struct DenseBitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl DenseBitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        DenseBitMatrix {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn from_sparse(a: &SparseBoolMatrix) -> Self {
        let mut d = DenseBitMatrix::zero(a.rows(), a.cols());
        for r in 0..a.rows() {
            for &c in a.row(r) {
                d.set(r, c as usize);
            }
        }
        d
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words_per_row + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize) {
        self.data[r * self.words_per_row + c / 64] |= 1 << (c % 64);
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.words_per_row + c / 64] ^= 1 << (c % 64);
    }

    /// In-place row-echelon rank.
    pub fn rank(mut self) -> usize {
        let w = self.words_per_row;
        let mut rank = 0usize;
        for c in 0..self.cols {
            let (word, bit) = (c / 64, 1u64 << (c % 64));
            let pivot = (rank..self.rows).find(|&r| self.data[r * w + word] & bit != 0);
            let Some(p) = pivot else { continue };
            if p != rank {
                for k in 0..w {
                    self.data.swap(p * w + k, rank * w + k);
                }
            }
            for r in 0..self.rows {
                if r != rank && self.data[r * w + word] & bit != 0 {
                    let (lo, hi) = self.data.split_at_mut(r.max(rank) * w);
                    let (src, dst) = if rank < r {
                        (&lo[rank * w..rank * w + w], &mut hi[..w])
                    } else {
                        (&lo[r * w..r * w + w], &mut hi[..w])
                    };
                    if rank < r {
                        for k in 0..w {
                            dst[k] ^= src[k];
                        }
                    } else {
                        // eliminating an earlier row against the new pivot
                        let (a, b) = self.data.split_at_mut(rank * w);
                        for k in 0..w {
                            a[r * w + k] ^= b[k];
                        }
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

/// Rank by dense elimination, refused above the bit cap (default 10^8 bits).
pub fn rank_dense(a: &SparseBoolMatrix, cap_bits: Option<u64>) -> Result<usize, Gf2Error> {
    let cap = cap_bits.unwrap_or(DEFAULT_DENSE_CAP_BITS);
    let bits = a.rows() as u128 * a.cols() as u128;
    if bits > cap as u128 {
        return Err(Gf2Error::DenseCapExceeded {
            rows: a.rows(),
            cols: a.cols(),
            bits,
            cap,
        });
    }
    Ok(DenseBitMatrix::from_sparse(a).rank())
}

/// Outcome of a sparse column reduction: the rank, plus the set of rows that
/// ended up as pivots (the lowest remaining entry of each reduced column).
#[derive(Debug, Clone)]
pub struct ColumnReduction {
    pub rank: usize,
    pub pivot_rows: Vec<u32>,
}

/// Sparse column-reduction rank. Columns are reduced against earlier pivot
/// columns sharing the same lowest row, persistent-homology style. Columns
/// listed in `skip` are not processed (and contribute nothing): when `a` and
/// a successor matrix `b` satisfy `a·b = 0`, the pivot rows of `b`'s
/// reduction index columns of `a` that necessarily reduce to zero, so they
/// can be skipped wholesale.
pub fn reduce_columns(a: &SparseBoolMatrix, skip: &HashSet<u32>) -> ColumnReduction {
    let by_col = a.transpose();
    let mut pivot_owner: Vec<u32> = vec![u32::MAX; a.rows()];
    let mut stored: Vec<Vec<u32>> = Vec::new();
    let mut pivot_rows: Vec<u32> = Vec::new();
    // The working column lives in a reused bitset: adding a stored pivot
    // column costs its own support, not a merge of the whole column, which
    // is what keeps long reduction chains affordable.
    let mut bits: Vec<u64> = vec![0; a.rows().div_ceil(64)];
    for j in 0..a.cols() {
        if skip.contains(&(j as u32)) {
            continue;
        }
        let col = by_col.row(j);
        let Some(&max_row) = col.last() else {
            continue;
        };
        for &r in col {
            bits[(r / 64) as usize] |= 1 << (r % 64);
        }
        let mut hi_word = (max_row / 64) as usize;
        let mut lo_word = (col[0] / 64) as usize;
        loop {
            while hi_word > 0 && bits[hi_word] == 0 {
                hi_word -= 1;
            }
            let word = bits[hi_word];
            if word == 0 {
                break; // the column reduced to zero
            }
            let low = (hi_word * 64) as u32 + 63 - word.leading_zeros();
            let owner = pivot_owner[low as usize];
            if owner == u32::MAX {
                // new pivot: freeze the bitset back into sparse form
                let mut frozen = Vec::new();
                for (w, slot) in bits.iter_mut().enumerate().take(hi_word + 1).skip(lo_word) {
                    let mut word = std::mem::take(slot);
                    while word != 0 {
                        let b = word.trailing_zeros();
                        frozen.push((w * 64) as u32 + b);
                        word &= word - 1;
                    }
                }
                pivot_owner[low as usize] = stored.len() as u32;
                pivot_rows.push(low);
                stored.push(frozen);
                break;
            }
            let other = &stored[owner as usize];
            lo_word = lo_word.min((other[0] / 64) as usize);
            for &r in other {
                bits[(r / 64) as usize] ^= 1 << (r % 64);
            }
        }
    }
    ColumnReduction {
        rank: stored.len(),
        pivot_rows,
    }
}

/// Rank by sparse column reduction.
pub fn rank_elimination(a: &SparseBoolMatrix) -> usize {
    reduce_columns(a, &HashSet::new()).rank
}

/// Betti numbers from cell counts and boundary ranks:
/// `b_j = n_j − rank ∂_j − rank ∂_{j+1}`, with the out-of-range ranks zero.
/// `boundary_ranks[i]` is the rank of the boundary map from (i+1)-cells to
/// i-cells. A negative result is a hard error, not a clamp.
pub fn betti_numbers(
    cell_counts: &[usize],
    boundary_ranks: &[usize],
) -> Result<Vec<usize>, Gf2Error> {
    if cell_counts.is_empty() && boundary_ranks.is_empty() {
        return Ok(Vec::new());
    }
    if boundary_ranks.len() + 1 != cell_counts.len() {
        return Err(Gf2Error::RankCountMismatch(
            cell_counts.len(),
            boundary_ranks.len(),
        ));
    }
    let rank_at = |j: usize| -> i64 {
        if j == 0 || j > boundary_ranks.len() {
            0
        } else {
            boundary_ranks[j - 1] as i64
        }
    };
    let mut out = Vec::with_capacity(cell_counts.len());
    for (j, &n) in cell_counts.iter().enumerate() {
        let b = n as i64 - rank_at(j) - rank_at(j + 1);
        if b < 0 {
            return Err(Gf2Error::NegativeBetti { dim: j, value: b });
        }
        out.push(b as usize);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> SparseBoolMatrix {
        let data = (0..rows)
            .map(|_| {
                (0..cols as u32)
                    .filter(|_| rng.gen_bool(density))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        SparseBoolMatrix::from_rows(rows, cols, data).unwrap()
    }

    /// Third rank implementation, deliberately naive: row echelon on
    /// Vec<bool> rows.
    fn rank_naive(a: &SparseBoolMatrix) -> usize {
        let mut rows: Vec<Vec<bool>> = (0..a.rows())
            .map(|r| {
                let mut v = vec![false; a.cols()];
                for &c in a.row(r) {
                    v[c as usize] = true;
                }
                v
            })
            .collect();
        let mut rank = 0;
        for c in 0..a.cols() {
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) {
                rows.swap(p, rank);
                let pivot = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row[c] {
                        for (x, y) in row.iter_mut().zip(&pivot) {
                            *x ^= y;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn construction_validates() {
        assert!(SparseBoolMatrix::from_rows(1, 3, vec![vec![0, 2]]).is_ok());
        assert!(matches!(
            SparseBoolMatrix::from_rows(1, 3, vec![vec![0, 3]]),
            Err(Gf2Error::ColumnOutOfRange { .. })
        ));
        assert!(matches!(
            SparseBoolMatrix::from_rows(1, 3, vec![vec![2, 1]]),
            Err(Gf2Error::UnsortedRow { .. })
        ));
        assert!(matches!(
            SparseBoolMatrix::from_rows(1, 3, vec![vec![1, 1]]),
            Err(Gf2Error::UnsortedRow { .. })
        ));
        assert!(SparseBoolMatrix::from_rows(2, 3, vec![vec![0]]).is_err());
    }

    #[test]
    fn transpose_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_sparse(&mut rng, 13, 29, 0.15);
            assert_eq!(a.transpose().transpose(), a);
        }
    }

    #[test]
    fn three_rank_methods_agree_on_randoms() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..60 {
            let rows = 1 + (trial * 7) % 40;
            let cols = 1 + (trial * 11) % 40;
            let a = random_sparse(&mut rng, rows, cols, 0.2);
            let d = rank_dense(&a, None).unwrap();
            let e = rank_elimination(&a);
            let n = rank_naive(&a);
            assert_eq!(d, n, "dense vs naive on {rows}x{cols}");
            assert_eq!(e, n, "elimination vs naive on {rows}x{cols}");
        }
    }

    #[test]
    fn thousand_matrices_match_independent_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..1000 {
            let rows = 1 + trial % 23;
            let cols = 1 + (trial * 5) % 23;
            let density = [0.05, 0.15, 0.35, 0.7][trial % 4];
            let a = random_sparse(&mut rng, rows, cols, density);
            assert_eq!(
                rank_dense(&a, None).unwrap(),
                rank_naive(&a),
                "trial {trial} {rows}x{cols}"
            );
        }
    }

    #[test]
    fn rank_invariant_under_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..8 {
            let a = random_sparse(&mut rng, 35, 50, 0.1);
            let base = rank_dense(&a, None).unwrap();
            for _ in 0..5 {
                let mut row_perm: Vec<u32> = (0..35).collect();
                let mut col_perm: Vec<u32> = (0..50).collect();
                for i in (1..row_perm.len()).rev() {
                    row_perm.swap(i, rng.gen_range(0..=i));
                }
                for i in (1..col_perm.len()).rev() {
                    col_perm.swap(i, rng.gen_range(0..=i));
                }
                let shuffled_rows: Vec<Vec<u32>> = row_perm
                    .iter()
                    .map(|&r| {
                        let mut row: Vec<u32> =
                            a.row(r as usize).iter().map(|&c| col_perm[c as usize]).collect();
                        row.sort_unstable();
                        row
                    })
                    .collect();
                let shuffled = SparseBoolMatrix::from_rows(35, 50, shuffled_rows).unwrap();
                assert_eq!(rank_dense(&shuffled, None).unwrap(), base);
                assert_eq!(rank_elimination(&shuffled), base);
            }
        }
    }

    #[test]
    fn rank_agrees_on_structured_matrices() {
        // zero, identity, nilpotent shift, duplicated rows, rank-one blocks
        let zero = SparseBoolMatrix::zero(5, 7);
        assert_eq!(rank_dense(&zero, None).unwrap(), 0);
        assert_eq!(rank_elimination(&zero), 0);

        let eye = SparseBoolMatrix::from_rows(6, 6, (0..6).map(|i| vec![i as u32])).unwrap();
        assert_eq!(rank_dense(&eye, None).unwrap(), 6);
        assert_eq!(rank_elimination(&eye), 6);

        let shift =
            SparseBoolMatrix::from_rows(6, 6, (0..6).map(|i| if i < 5 { vec![i as u32 + 1] } else { vec![] }))
                .unwrap();
        assert_eq!(rank_dense(&shift, None).unwrap(), 5);
        assert_eq!(rank_elimination(&shift), 5);

        // rows 0 and 1 repeat, and row 3 is the sum of rows 0 and 2
        let dup = SparseBoolMatrix::from_rows(4, 3, vec![vec![0, 2], vec![0, 2], vec![1], vec![0, 1, 2]])
            .unwrap();
        assert_eq!(rank_dense(&dup, None).unwrap(), 2);
        assert_eq!(rank_elimination(&dup), 2);

        let ones = SparseBoolMatrix::from_rows(5, 4, (0..5).map(|_| vec![0, 1, 2, 3])).unwrap();
        assert_eq!(rank_dense(&ones, None).unwrap(), 1);
        assert_eq!(rank_elimination(&ones), 1);
    }

    #[test]
    fn rank_equals_transpose_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let a = random_sparse(&mut rng, 23, 17, 0.18);
            assert_eq!(rank_elimination(&a), rank_elimination(&a.transpose()));
            assert_eq!(
                rank_dense(&a, None).unwrap(),
                rank_dense(&a.transpose(), None).unwrap()
            );
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let a = SparseBoolMatrix::zero(10_001, 10_000);
        assert!(matches!(
            rank_dense(&a, None),
            Err(Gf2Error::DenseCapExceeded { .. })
        ));
        assert!(rank_dense(&a, Some(10_001 * 10_000)).is_ok());
    }

    #[test]
    fn sparse_product_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let a = random_sparse(&mut rng, 9, 14, 0.25);
            let b = random_sparse(&mut rng, 14, 11, 0.25);
            let ab = a.mul(&b).unwrap();
            for r in 0..9 {
                for c in 0..11u32 {
                    let mut expect = false;
                    for &mid in a.row(r) {
                        if b.row(mid as usize).contains(&c) {
                            expect = !expect;
                        }
                    }
                    assert_eq!(ab.row(r).contains(&c), expect);
                }
            }
        }
    }

    #[test]
    fn mul_block_matches_column_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_sparse(&mut rng, 31, 19, 0.2);
        let v: Vec<u64> = (0..19).map(|_| rng.gen()).collect();
        let out = a.mul_block(&v);
        for bit in 0..64 {
            let x: Vec<bool> = v.iter().map(|w| w >> bit & 1 == 1).collect();
            for (r, word) in out.iter().enumerate() {
                let expect = a.row(r).iter().fold(false, |acc, &c| acc ^ x[c as usize]);
                assert_eq!(word >> bit & 1 == 1, expect);
            }
        }
    }

    #[test]
    fn sms_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let a = random_sparse(&mut rng, 8, 13, 0.3);
            let text = a.to_sms();
            assert!(text.starts_with("8 13 M\n"));
            assert!(text.ends_with("0 0 0\n"));
            assert_eq!(SparseBoolMatrix::from_sms(&text).unwrap(), a);
        }
        assert!(SparseBoolMatrix::from_sms("2 2 M\n1 1 1\n").is_err());
        assert!(SparseBoolMatrix::from_sms("2 2 M\n3 1 1\n0 0 0\n").is_err());
        assert!(SparseBoolMatrix::from_sms("2 2 M\n1 1 2\n0 0 0\n").is_err());
        assert!(SparseBoolMatrix::from_sms("2 2 M\n1 1 1\n1 1 1\n0 0 0\n").is_err());
    }

    #[test]
    fn clearing_skips_dead_columns() {
        // For a pair with a·b = 0, the pivot rows of b's reduction index
        // columns of a that are combinations of strictly earlier columns, so
        // skipping them must not change a's rank. Build such pairs by taking
        // a's rows from the left kernel of a random b.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut exercised = 0;
        for _ in 0..20 {
            let b = random_sparse(&mut rng, 15, 10, 0.25);
            let kernel = kernel_basis(&DenseBitMatrix::from_sparse(&b.transpose()));
            if kernel.is_empty() {
                continue;
            }
            let arows: Vec<Vec<u32>> = (0..12)
                .map(|_| {
                    let mut acc = [false; 15];
                    for k in &kernel {
                        if rng.gen_bool(0.5) {
                            for (slot, &bit) in acc.iter_mut().zip(k) {
                                *slot ^= bit;
                            }
                        }
                    }
                    acc.iter()
                        .enumerate()
                        .filter_map(|(i, &s)| s.then_some(i as u32))
                        .collect()
                })
                .collect();
            let a = SparseBoolMatrix::from_rows(12, 15, arows).unwrap();
            assert!(a.mul(&b).unwrap().is_zero());

            let skip: HashSet<u32> = reduce_columns(&b, &HashSet::new())
                .pivot_rows
                .iter()
                .copied()
                .collect();
            assert_eq!(rank_elimination(&a), reduce_columns(&a, &skip).rank);
            exercised += 1;
        }
        assert!(exercised > 10);
    }

    fn kernel_basis(m: &DenseBitMatrix) -> Vec<Vec<bool>> {
        // right kernel of m (vectors x with m·x = 0), naive elimination
        let rows = m.rows();
        let cols = m.cols();
        let mut mat: Vec<Vec<bool>> = (0..rows)
            .map(|r| (0..cols).map(|c| m.get(r, c)).collect())
            .collect();
        let mut pivot_col_of_row = Vec::new();
        let mut rank = 0usize;
        for c in 0..cols {
            if let Some(p) = (rank..rows).find(|&r| mat[r][c]) {
                mat.swap(p, rank);
                let pivot = mat[rank].clone();
                for (r, row) in mat.iter_mut().enumerate() {
                    if r != rank && row[c] {
                        for (x, y) in row.iter_mut().zip(&pivot) {
                            *x ^= y;
                        }
                    }
                }
                pivot_col_of_row.push(c);
                rank += 1;
            }
        }
        let pivot_cols: HashSet<usize> = pivot_col_of_row.iter().copied().collect();
        let mut basis = Vec::new();
        for free in (0..cols).filter(|c| !pivot_cols.contains(c)) {
            let mut v = vec![false; cols];
            v[free] = true;
            for (r, &pc) in pivot_col_of_row.iter().enumerate() {
                if mat[r][free] {
                    v[pc] = true;
                }
            }
            basis.push(v);
        }
        basis
    }

    #[test]
    fn betti_arithmetic() {
        assert_eq!(
            betti_numbers(&[2, 3], &[1]).unwrap(),
            vec![1, 2],
            "two-level complex"
        );
        assert_eq!(betti_numbers(&[5], &[]).unwrap(), vec![5]);
        assert_eq!(betti_numbers(&[], &[]).unwrap(), Vec::<usize>::new());
        assert!(matches!(
            betti_numbers(&[2, 3], &[1, 5]),
            Err(Gf2Error::RankCountMismatch(..))
        ));
        assert!(matches!(
            betti_numbers(&[1, 3], &[2]),
            Err(Gf2Error::NegativeBetti { dim: 0, .. })
        ));
    }

    #[test]
    fn reduction_pivot_rows_are_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = random_sparse(&mut rng, 30, 30, 0.12);
        let red = reduce_columns(&a, &HashSet::new());
        let set: HashSet<u32> = red.pivot_rows.iter().copied().collect();
        assert_eq!(set.len(), red.pivot_rows.len());
        assert_eq!(red.rank, red.pivot_rows.len());
    }
}
