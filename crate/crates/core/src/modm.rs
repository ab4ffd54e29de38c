//! Small dense matrices and vectors over `Z/m` for prime m (here 2 or 3).
//!
//! These are the coordinate-space companions of the homology code: cycle
//! coordinates, Gram matrices of the intersection pairing, symplectic group
//! elements and basis-transport maps are all `2g × 2g` matrices over `Z/m`.
//! Everything is tiny (4×4 at genus 2), so the representation favors clarity:
//! row-major `Vec<u8>` with entries already reduced mod m.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModError {
    #[error("modulus {0} not supported (need a prime, 2 or 3)")]
    BadModulus(u8),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("matrix with {0} entries mod {1} does not fit a packed u64 code")]
    PackOverflow(usize, u8),
}

pub fn check_modulus(m: u8) -> Result<(), ModError> {
    if m == 2 || m == 3 {
        Ok(())
    } else {
        Err(ModError::BadModulus(m))
    }
}

#[inline]
pub fn add_mod(a: u8, b: u8, m: u8) -> u8 {
    (a + b) % m
}

#[inline]
pub fn sub_mod(a: u8, b: u8, m: u8) -> u8 {
    (a + m - b) % m
}

#[inline]
pub fn mul_mod(a: u8, b: u8, m: u8) -> u8 {
    (a * b) % m
}

#[inline]
pub fn neg_mod(a: u8, m: u8) -> u8 {
    (m - a) % m
}

/// Multiplicative inverse mod a prime; panics on zero.
#[inline]
pub fn inv_mod(a: u8, m: u8) -> u8 {
    assert!(!a.is_multiple_of(m), "zero has no inverse");
    for x in 1..m {
        if mul_mod(a, x, m) == 1 {
            return x;
        }
    }
    unreachable!("modulus is prime")
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatMod {
    m: u8,
    rows: usize,
    cols: usize,
    a: Vec<u8>,
}

impl MatMod {
    pub fn zero(rows: usize, cols: usize, m: u8) -> Self {
        MatMod {
            m,
            rows,
            cols,
            a: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, m: u8) -> Self {
        let mut out = MatMod::zero(n, n, m);
        for i in 0..n {
            out.set(i, i, 1);
        }
        out
    }

    pub fn from_rows(rows: &[Vec<u8>], m: u8) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut out = MatMod::zero(r, c, m);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                out.set(i, j, v % m);
            }
        }
        out
    }

    /// The standard symplectic form: g diagonal blocks `[[0, 1], [−1, 0]]`
    /// for the basis order (a₁, b₁, …, a_g, b_g).
    pub fn standard_symplectic(g: usize, m: u8) -> Self {
        let mut j = MatMod::zero(2 * g, 2 * g, m);
        for i in 0..g {
            j.set(2 * i, 2 * i + 1, 1);
            j.set(2 * i + 1, 2 * i, neg_mod(1, m));
        }
        j
    }

    pub fn modulus(&self) -> u8 {
        self.m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.a[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.a[i * self.cols + j] = v % self.m;
    }

    pub fn mul(&self, rhs: &MatMod) -> MatMod {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        assert_eq!(self.m, rhs.m);
        let mut out = MatMod::zero(self.rows, rhs.cols, self.m);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = add_mod(out.get(i, j), mul_mod(aik, rhs.get(k, j), self.m), self.m);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u8;
                for (j, &vj) in v.iter().enumerate() {
                    acc = add_mod(acc, mul_mod(self.get(i, j), vj % self.m, self.m), self.m);
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> MatMod {
        let mut out = MatMod::zero(self.cols, self.rows, self.m);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn add(&self, rhs: &MatMod) -> MatMod {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (x, &y) in out.a.iter_mut().zip(&rhs.a) {
            *x = add_mod(*x, y, self.m);
        }
        out
    }

    pub fn neg(&self) -> MatMod {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x = neg_mod(*x, self.m);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[u8]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.set(i, j, x);
        }
    }

    /// Determinant by fraction-free-ish Gaussian elimination over the prime field.
    pub fn det(&self) -> u8 {
        assert_eq!(self.rows, self.cols, "determinant needs a square matrix");
        let n = self.rows;
        let mut w = self.clone();
        let mut det = 1u8;
        for col in 0..n {
            let pivot = (col..n).find(|&r| w.get(r, col) != 0);
            let pivot = match pivot {
                Some(p) => p,
                None => return 0,
            };
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (w.get(col, j), w.get(pivot, j));
                    w.set(col, j, y);
                    w.set(pivot, j, x);
                }
                det = neg_mod(det, self.m);
            }
            let p = w.get(col, col);
            det = mul_mod(det, p, self.m);
            let pinv = inv_mod(p, self.m);
            for r in (col + 1)..n {
                let factor = mul_mod(w.get(r, col), pinv, self.m);
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    let v = sub_mod(w.get(r, j), mul_mod(factor, w.get(col, j), self.m), self.m);
                    w.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<MatMod> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut w = self.clone();
        let mut inv = MatMod::identity(n, self.m);
        for col in 0..n {
            let pivot = (col..n).find(|&r| w.get(r, col) != 0)?;
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (w.get(col, j), w.get(pivot, j));
                    w.set(col, j, y);
                    w.set(pivot, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot, j));
                    inv.set(col, j, y);
                    inv.set(pivot, j, x);
                }
            }
            let pinv = inv_mod(w.get(col, col), self.m);
            for j in 0..n {
                w.set(col, j, mul_mod(w.get(col, j), pinv, self.m));
                inv.set(col, j, mul_mod(inv.get(col, j), pinv, self.m));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = w.get(r, col);
                if factor == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = sub_mod(w.get(r, j), mul_mod(factor, w.get(col, j), self.m), self.m);
                    w.set(r, j, v);
                    let v = sub_mod(inv.get(r, j), mul_mod(factor, inv.get(col, j), self.m), self.m);
                    inv.set(r, j, v);
                }
            }
        }
        Some(inv)
    }

    /// Packs all entries as base-m digits, row-major, first entry least
    /// significant. Total order on packed codes = lexicographic order on the
    /// reversed entry list; any fixed total order works for canonical picks.
    pub fn pack(&self) -> Result<u64, ModError> {
        let k = self.a.len();
        // m^k must fit: 2^64 over m=3 allows 40 digits; m=2 allows 64.
        let max_digits = if self.m == 2 { 64 } else { 40 };
        if k > max_digits {
            return Err(ModError::PackOverflow(k, self.m));
        }
        let mut code = 0u64;
        for &v in self.a.iter().rev() {
            code = code * self.m as u64 + v as u64;
        }
        Ok(code)
    }

    pub fn unpack(code: u64, rows: usize, cols: usize, m: u8) -> Result<Self, ModError> {
        let mut out = MatMod::zero(rows, cols, m);
        let mut c = code;
        for v in out.a.iter_mut() {
            *v = (c % m as u64) as u8;
            c /= m as u64;
        }
        if c != 0 {
            return Err(ModError::PackOverflow(rows * cols, m));
        }
        Ok(out)
    }
}

impl fmt::Debug for MatMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatMod {}x{} mod {} [", self.rows, self.cols, self.m)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_mat(n: usize, m: u8, rng: &mut ChaCha8Rng) -> MatMod {
        let mut out = MatMod::zero(n, n, m);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, rng.gen_range(0..m));
            }
        }
        out
    }

    /// Cofactor-expansion determinant as an independent oracle.
    fn det_cofactor(a: &MatMod) -> u8 {
        let n = a.rows();
        let m = a.modulus();
        if n == 1 {
            return a.get(0, 0);
        }
        let mut acc = 0u8;
        for j in 0..n {
            if a.get(0, j) == 0 {
                continue;
            }
            let mut minor = MatMod::zero(n - 1, n - 1, m);
            for r in 1..n {
                let mut cc = 0;
                for c in 0..n {
                    if c != j {
                        minor.set(r - 1, cc, a.get(r, c));
                        cc += 1;
                    }
                }
            }
            let term = mul_mod(a.get(0, j), det_cofactor(&minor), m);
            acc = if j % 2 == 0 {
                add_mod(acc, term, m)
            } else {
                sub_mod(acc, term, m)
            };
        }
        acc
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [2u8, 3] {
            for n in 1..=4 {
                for _ in 0..50 {
                    let a = random_mat(n, m, &mut rng);
                    assert_eq!(a.det(), det_cofactor(&a), "{a:?}");
                }
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut invertible_seen = 0;
        for m in [2u8, 3] {
            for _ in 0..200 {
                let a = random_mat(4, m, &mut rng);
                match a.inverse() {
                    None => assert_eq!(a.det(), 0),
                    Some(inv) => {
                        invertible_seen += 1;
                        assert_ne!(a.det(), 0);
                        assert_eq!(a.mul(&inv), MatMod::identity(4, m));
                        assert_eq!(inv.mul(&a), MatMod::identity(4, m));
                    }
                }
            }
        }
        assert!(invertible_seen > 50);
    }

    #[test]
    fn pack_unpack_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [2u8, 3] {
            for _ in 0..100 {
                let a = random_mat(4, m, &mut rng);
                let code = a.pack().unwrap();
                assert_eq!(MatMod::unpack(code, 4, 4, m).unwrap(), a);
            }
        }
        let too_big = MatMod::zero(7, 7, 3);
        assert!(too_big.pack().is_err());
    }

    #[test]
    fn standard_symplectic_shape() {
        let j2 = MatMod::standard_symplectic(1, 2);
        assert_eq!(j2, MatMod::from_rows(&[vec![0, 1], vec![1, 0]], 2));
        let j3 = MatMod::standard_symplectic(2, 3);
        assert_eq!(j3.det(), 1);
        assert_eq!(j3.add(&j3.transpose()), MatMod::zero(4, 4, 3));
    }

    #[test]
    fn mul_associative_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let a = random_mat(4, 3, &mut rng);
            let b = random_mat(4, 3, &mut rng);
            let c = random_mat(4, 3, &mut rng);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }
    }
}
