//! Arithmetic in the prime field `F_p` and dense `F_p` matrices.
//!
//! Scalars are `u8` values in `0..p` (odd primes up to 251). The matrix
//! type is the single linear-algebra engine for the whole crate: every
//! rank, solve, nullspace, and inverse ultimately lands here after
//! linearizing module data over `F_p`.

use alloc::vec;
use alloc::vec::Vec;

/// `a + b mod p`.
#[inline]
pub fn fp_add(p: u8, a: u8, b: u8) -> u8 {
    let s = a as u16 + b as u16;
    (if s >= p as u16 { s - p as u16 } else { s }) as u8
}

/// `a - b mod p`.
#[inline]
pub fn fp_sub(p: u8, a: u8, b: u8) -> u8 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

/// `-a mod p`.
#[inline]
pub fn fp_neg(p: u8, a: u8) -> u8 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

/// `a * b mod p`.
#[inline]
pub fn fp_mul(p: u8, a: u8, b: u8) -> u8 {
    ((a as u16 * b as u16) % p as u16) as u8
}

/// `a^k mod p` by square-and-multiply.
pub fn fp_pow(p: u8, a: u8, mut k: u64) -> u8 {
    let mut base = a % p;
    let mut acc = 1u8;
    while k > 0 {
        if k & 1 == 1 {
            acc = fp_mul(p, acc, base);
        }
        base = fp_mul(p, base, base);
        k >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero scalar.
pub fn fp_inv(p: u8, a: u8) -> u8 {
    assert!(a % p != 0, "division by zero in F_{p}");
    fp_pow(p, a, p as u64 - 2)
}

/// Dense row-major matrix over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMat {
    pub p: u8,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u8>,
}

impl FpMat {
    pub fn zero(p: u8, rows: usize, cols: usize) -> Self {
        FpMat {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u8, n: usize) -> Self {
        let mut m = FpMat::zero(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row vectors (all of equal length).
    pub fn from_rows(p: u8, rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        FpMat {
            p,
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &FpMat) -> FpMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        assert_eq!(self.p, rhs.p);
        let p = self.p as u32;
        let mut out = FpMat::zero(self.p, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0 {
                    continue;
                }
                let a = a as u32;
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = ((*d as u32 + a * s as u32) % p) as u8;
                }
            }
        }
        out
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(self.cols, v.len());
        let p = self.p as u32;
        let mut out = vec![0u8; self.rows];
        for i in 0..self.rows {
            let mut acc = 0u32;
            let row = self.row(i);
            for (&a, &b) in row.iter().zip(v) {
                acc = (acc + a as u32 * b as u32) % p;
            }
            out[i] = acc as u8;
        }
        out
    }

    /// In-place reduced row echelon form. Returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // Find a row with a nonzero entry in column c.
            let mut sel = None;
            for i in r..self.rows {
                if self.at(i, c) != 0 {
                    sel = Some(i);
                    break;
                }
            }
            let Some(i) = sel else { continue };
            self.swap_rows(r, i);
            let inv = fp_inv(p, self.at(r, c));
            if inv != 1 {
                self.scale_row(r, inv);
            }
            for i in 0..self.rows {
                if i != r {
                    let m = self.at(i, c);
                    if m != 0 {
                        self.row_axpy(i, r, fp_neg(p, m), c);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, i: usize, m: u8) {
        let p = self.p as u16;
        for v in &mut self.data[i * self.cols..(i + 1) * self.cols] {
            *v = ((*v as u16 * m as u16) % p) as u8;
        }
    }

    /// `row[i] += m * row[src]`, starting from column `from` (earlier
    /// columns are known to stay fixed during elimination).
    fn row_axpy(&mut self, i: usize, src: usize, m: u8, from: usize) {
        let p = self.p as u16;
        let cols = self.cols;
        let (lo, hi) = if i < src { (i, src) } else { (src, i) };
        let (a, b) = self.data.split_at_mut(hi * cols);
        let (dst, srow) = if i < src {
            (&mut a[lo * cols + from..lo * cols + cols], &b[from..cols])
        } else {
            (&mut b[from..cols], &a[lo * cols + from..lo * cols + cols])
        };
        let m = m as u16;
        for (d, &s) in dst.iter_mut().zip(srow.iter()) {
            if s != 0 {
                *d = ((*d as u16 + m * s as u16) % p) as u8;
            }
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace (`self * x = 0`), one vector per row of
    /// the returned matrix.
    pub fn nullspace(&self) -> FpMat {
        let p = self.p;
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = FpMat::zero(p, free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            out.data[k * self.cols + fc] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                let v = m.at(r, fc);
                if v != 0 {
                    out.data[k * self.cols + pc] = fp_neg(p, v);
                }
            }
        }
        out
    }

    /// Solves `self * x = b`. Returns one particular solution, or `None`
    /// if the system is inconsistent.
    pub fn solve(&self, b: &[u8]) -> Option<Vec<u8>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = FpMat::zero(self.p, self.rows, self.cols + 1);
        for i in 0..self.rows {
            aug.data[i * (self.cols + 1)..i * (self.cols + 1) + self.cols]
                .copy_from_slice(self.row(i));
            aug.data[i * (self.cols + 1) + self.cols] = b[i] % self.p;
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the constant column
        }
        let mut x = vec![0u8; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.at(r, self.cols);
        }
        Some(x)
    }

    /// Inverse of a square matrix, if invertible.
    pub fn inverse(&self) -> Option<FpMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = FpMat::zero(self.p, n, 2 * n);
        for i in 0..n {
            aug.data[i * 2 * n..i * 2 * n + n].copy_from_slice(self.row(i));
            aug.data[i * 2 * n + n + i] = 1;
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = FpMat::zero(self.p, n, n);
        for i in 0..n {
            inv.data[i * n..(i + 1) * n].copy_from_slice(&aug.data[i * 2 * n + n..(i + 1) * 2 * n]);
        }
        Some(inv)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &FpMat) -> FpMat {
        assert_eq!(self.cols, other.cols);
        assert_eq!(self.p, other.p);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        FpMat {
            p: self.p,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ops() {
        assert_eq!(fp_add(3, 2, 2), 1);
        assert_eq!(fp_sub(5, 1, 3), 3);
        assert_eq!(fp_mul(5, 3, 4), 2);
        assert_eq!(fp_inv(5, 3), 2); // 3 * 2 = 6 = 1 mod 5
        assert_eq!(fp_inv(3, 2), 2); // 2 * 2 = 4 = 1 mod 3
        assert_eq!(fp_pow(7, 3, 6), 1); // Fermat
    }

    #[test]
    fn rref_and_rank() {
        // [[1,2],[2,4]] over F_5 has rank 1.
        let m = FpMat::from_rows(5, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(), 1);
        let m = FpMat::from_rows(5, &[vec![1, 2], vec![2, 3]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        // x + 2y = 4, 2x + 3y = 2 over F_5 -> unique solution.
        let m = FpMat::from_rows(5, &[vec![1, 2], vec![2, 3]]);
        let x = m.solve(&[4, 2]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![4, 2]);
        // Inconsistent: x + 2y = 1, 2x + 4y = 1.
        let m = FpMat::from_rows(5, &[vec![1, 2], vec![2, 4]]);
        assert!(m.solve(&[1, 1]).is_none());
    }

    #[test]
    fn nullspace_is_kernel() {
        let m = FpMat::from_rows(3, &[vec![1, 1, 1], vec![0, 1, 2]]);
        let ns = m.nullspace();
        assert_eq!(ns.rows, 1);
        for k in 0..ns.rows {
            let v: Vec<u8> = ns.row(k).to_vec();
            assert_eq!(m.mul_vec(&v), vec![0, 0]);
        }
        // Full-rank square matrix has trivial nullspace.
        let m = FpMat::identity(3, 4);
        assert_eq!(m.nullspace().rows, 0);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = FpMat::from_rows(7, &[vec![1, 2, 0], vec![0, 1, 3], vec![2, 0, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), FpMat::identity(7, 3));
        assert_eq!(inv.mul(&m), FpMat::identity(7, 3));
        let sing = FpMat::from_rows(7, &[vec![1, 2], vec![2, 4]]);
        assert!(sing.inverse().is_none());
    }
}
