//! Dense matrices over `W/p^M` and over `F_q`, with the rank computations used
//! to read off Jordan types of unipotent operators.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::padic::{FqElem, PrimeContext, WittElem};

/// A dense matrix over `W/p^M`. Entries are stored row-major, `f` residues each.
/// `digits` is the number of reliable `p`-adic digits of every entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WMatrix {
    ctx: Arc<PrimeContext>,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    digits: u32,
}

impl WMatrix {
    pub fn zeros(ctx: &Arc<PrimeContext>, rows: usize, cols: usize) -> Self {
        WMatrix { ctx: ctx.clone(), rows, cols, data: vec![0; rows * cols * ctx.f()], digits: ctx.precision() }
    }

    pub fn identity(ctx: &Arc<PrimeContext>, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.entry_mut(i, i)[0] = 1 % ctx.modulus();
        }
        m
    }

    /// Builds a matrix from its columns, each a flat vector of `rows * f` residues.
    pub fn from_columns(ctx: &Arc<PrimeContext>, columns: &[Vec<u64>], digits: u32) -> Self {
        let f = ctx.f();
        let rows = columns.first().map_or(0, |c| c.len() / f);
        let mut m = Self::zeros(ctx, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for r in 0..rows {
                m.entry_mut(r, c).copy_from_slice(&col[r * f..(r + 1) * f]);
            }
        }
        m.digits = digits.min(ctx.precision());
        m
    }

    pub fn ctx(&self) -> &Arc<PrimeContext> {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn with_digits(mut self, digits: u32) -> Self {
        self.digits = self.digits.min(digits);
        self
    }

    pub fn entry(&self, r: usize, c: usize) -> &[u64] {
        let f = self.ctx.f();
        let at = (r * self.cols + c) * f;
        &self.data[at..at + f]
    }

    pub fn entry_mut(&mut self, r: usize, c: usize) -> &mut [u64] {
        let f = self.ctx.f();
        let at = (r * self.cols + c) * f;
        &mut self.data[at..at + f]
    }

    pub fn witt(&self, r: usize, c: usize) -> WittElem {
        WittElem::from_raw(&self.ctx, self.entry(r, c).to_vec())
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        let f = self.ctx.f();
        let mut out = Vec::with_capacity(self.rows * f);
        for r in 0..self.rows {
            out.extend_from_slice(self.entry(r, c));
        }
        out
    }

    pub fn mul(&self, other: &WMatrix) -> WMatrix {
        assert_eq!(self.cols, other.rows);
        let m = self.ctx.modulus();
        let mut out = WMatrix::zeros(&self.ctx, self.rows, other.cols);
        let f = self.ctx.f();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entry(i, k);
                if a.iter().all(|&x| x == 0) {
                    continue;
                }
                let a = a.to_vec();
                for j in 0..other.cols {
                    let b = other.entry(k, j);
                    if b.iter().all(|&x| x == 0) {
                        continue;
                    }
                    let at = (i * other.cols + j) * f;
                    self.ctx.raw_mul_acc(&mut out.data[at..at + f], &a, b, m);
                }
            }
        }
        out.digits = self.digits.min(other.digits);
        out
    }

    pub fn add(&self, other: &WMatrix) -> WMatrix {
        let mut out = self.clone();
        self.ctx.raw_add_assign(&mut out.data, &other.data, self.ctx.modulus());
        out.digits = self.digits.min(other.digits);
        out
    }

    pub fn sub(&self, other: &WMatrix) -> WMatrix {
        let mut out = self.clone();
        self.ctx.raw_sub_assign(&mut out.data, &other.data, self.ctx.modulus());
        out.digits = self.digits.min(other.digits);
        out
    }

    pub fn scale(&self, w: &WittElem) -> WMatrix {
        let f = self.ctx.f();
        let m = self.ctx.modulus();
        let mut out = self.clone();
        for chunk in out.data.chunks_mut(f) {
            let prod = self.ctx.raw_mul(chunk, w.coeffs(), m);
            chunk.copy_from_slice(&prod);
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> WMatrix {
        let mut result = WMatrix::identity(&self.ctx, self.rows).with_digits(self.digits);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Matrix-vector product; `v` is a flat vector of `cols * f` residues.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        let f = self.ctx.f();
        let m = self.ctx.modulus();
        let mut out = vec![0; self.rows * f];
        for c in 0..self.cols {
            let x = &v[c * f..(c + 1) * f];
            if x.iter().all(|&y| y == 0) {
                continue;
            }
            for r in 0..self.rows {
                let a = self.entry(r, c);
                if a.iter().all(|&y| y == 0) {
                    continue;
                }
                self.ctx.raw_mul_acc(&mut out[r * f..(r + 1) * f], a, x, m);
            }
        }
        out
    }

    /// Equality modulo `p^k` entrywise.
    pub fn congruent(&self, other: &WMatrix, k: u32) -> bool {
        let pk = self.ctx.p_pow(k);
        self.data.iter().zip(&other.data).all(|(a, b)| a % pk == b % pk)
    }

    /// Inverse over `W/p^M` by Gauss-Jordan elimination with unit pivots.
    pub fn inverse(&self) -> Result<WMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let m = self.ctx.modulus();
        let p = self.ctx.p();
        let mut a = self.clone();
        let mut inv = WMatrix::identity(&self.ctx, n);
        for c in 0..n {
            let pivot = (c..n)
                .find(|&r| a.entry(r, c).iter().any(|&x| x % p != 0))
                .ok_or(Error::SingularMatrix)?;
            a.swap_rows(c, pivot);
            inv.swap_rows(c, pivot);
            let pinv = self.ctx.raw_witt_inverse(a.entry(c, c))?;
            a.scale_row(c, &pinv);
            inv.scale_row(c, &pinv);
            for r in 0..n {
                if r == c {
                    continue;
                }
                let factor = a.entry(r, c).to_vec();
                if factor.iter().all(|&x| x == 0) {
                    continue;
                }
                for j in 0..n {
                    let t = self.ctx.raw_mul(&factor, a.entry(c, j), m);
                    self.ctx.raw_sub_assign(a.entry_mut(r, j), &t, m);
                    let t = self.ctx.raw_mul(&factor, inv.entry(c, j), m);
                    self.ctx.raw_sub_assign(inv.entry_mut(r, j), &t, m);
                }
            }
        }
        inv.digits = self.digits;
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let f = self.ctx.f();
        let w = self.cols * f;
        for k in 0..w {
            self.data.swap(a * w + k, b * w + k);
        }
    }

    fn scale_row(&mut self, r: usize, s: &[u64]) {
        let m = self.ctx.modulus();
        for c in 0..self.cols {
            let t = self.ctx.raw_mul(self.entry(r, c), s, m);
            self.entry_mut(r, c).copy_from_slice(&t);
        }
    }

    /// Rescales to the lattice basis `p^{e_k} b_k`: entry `(u, v)` becomes
    /// `a_{uv} p^{e_v} / p^{e_u}`. Fails if the lattice is not stable.
    pub fn rescale(&self, exps: &[u32]) -> Result<WMatrix> {
        let mut out = self.clone();
        let max_e = exps.iter().copied().max().unwrap_or(0);
        for u in 0..self.rows {
            for v in 0..self.cols {
                let up = self.ctx.p_pow(exps[v]);
                let down = self.ctx.p_pow(exps[u]);
                let m = self.ctx.modulus();
                let reliable = self.ctx.p_pow(self.digits.min(self.ctx.precision()).min(exps[u]));
                let entry = out.entry_mut(u, v);
                for x in entry.iter_mut() {
                    let y = PrimeContext::mulmod(*x, up % m, m);
                    if !y.is_multiple_of(reliable) {
                        return Err(Error::NotDivisible(format!("lattice not stable at ({u}, {v})")));
                    }
                    *x = y / down;
                }
            }
        }
        out.digits = self.digits.saturating_sub(max_e);
        Ok(out)
    }

    pub fn reduce_mod_p(&self) -> FqMatrix {
        let p = self.ctx.p();
        FqMatrix {
            ctx: self.ctx.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x % p).collect(),
        }
    }
}

/// A dense matrix over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqMatrix {
    ctx: Arc<PrimeContext>,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FqMatrix {
    pub fn zeros(ctx: &Arc<PrimeContext>, rows: usize, cols: usize) -> Self {
        FqMatrix { ctx: ctx.clone(), rows, cols, data: vec![0; rows * cols * ctx.f()] }
    }

    pub fn identity(ctx: &Arc<PrimeContext>, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, &FqElem::one(ctx));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FqElem {
        let f = self.ctx.f();
        let at = (r * self.cols + c) * f;
        FqElem::from_raw(&self.ctx, self.data[at..at + f].to_vec())
    }

    pub fn set(&mut self, r: usize, c: usize, v: &FqElem) {
        let f = self.ctx.f();
        let at = (r * self.cols + c) * f;
        self.data[at..at + f].copy_from_slice(v.coeffs());
    }

    pub fn mul(&self, other: &FqMatrix) -> FqMatrix {
        assert_eq!(self.cols, other.rows);
        let f = self.ctx.f();
        let p = self.ctx.p();
        let mut out = FqMatrix::zeros(&self.ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[(i * self.cols + k) * f..(i * self.cols + k + 1) * f];
                if a.iter().all(|&x| x == 0) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[(k * other.cols + j) * f..(k * other.cols + j + 1) * f];
                    let at = (i * other.cols + j) * f;
                    self.ctx.raw_mul_acc(&mut out.data[at..at + f], a, b, p);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &FqMatrix) -> FqMatrix {
        let mut out = self.clone();
        self.ctx.raw_sub_assign(&mut out.data, &other.data, self.ctx.p());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut a: Vec<Vec<FqElem>> =
            (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c)).collect()).collect();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(piv) = (rank..self.rows).find(|&r| !a[r][c].is_zero()) else {
                continue;
            };
            a.swap(rank, piv);
            let inv = a[rank][c].inverse().expect("pivot is nonzero");
            let pivot_row: Vec<FqElem> = a[rank].iter().map(|x| x * &inv).collect();
            for r in 0..self.rows {
                if r != rank && !a[r][c].is_zero() {
                    let factor = a[r][c].clone();
                    for j in c..self.cols {
                        a[r][j] = &a[r][j] - &(&factor * &pivot_row[j]);
                    }
                }
            }
            a[rank] = pivot_row;
            rank += 1;
        }
        rank
    }
}

/// Ranks of `(T-1)^i` for `i = 0..=p+1`.
pub fn unipotent_ranks(t: &FqMatrix, p: usize) -> Vec<usize> {
    let n = t.rows;
    let nil = t.sub(&FqMatrix::identity(&t.ctx, n));
    let mut ranks = vec![n];
    let mut power = FqMatrix::identity(&t.ctx, n);
    for _ in 0..=p {
        power = power.mul(&nil);
        ranks.push(power.rank());
    }
    ranks
}

/// Jordan type from the ranks of `(T-1)^i`: entry `i-1` of the result is the
/// number of blocks of size `i`, for `i = 1..=p`.
pub fn jordan_from_ranks(ranks: &[usize], p: usize) -> Result<Vec<usize>> {
    if ranks[p] != 0 {
        return Err(Error::Inconsistent(format!("(T-1)^{p} has rank {} instead of 0", ranks[p])));
    }
    Ok((1..=p).map(|i| ranks[i - 1] + ranks[i + 1] - 2 * ranks[i]).collect())
}

/// Jordan type of a unipotent operator `T` with `(T-1)^p = 0`.
pub fn jordan_type(t: &FqMatrix, p: usize) -> Result<Vec<usize>> {
    jordan_from_ranks(&unipotent_ranks(t, p), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let ctx = PrimeContext::new(3, 2, 5).unwrap();
        let mut m = WMatrix::identity(&ctx, 3);
        m.entry_mut(0, 1).copy_from_slice(&[7, 2]);
        m.entry_mut(2, 0).copy_from_slice(&[3, 9]);
        m.entry_mut(1, 2).copy_from_slice(&[1, 1]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), WMatrix::identity(&ctx, 3));
    }

    #[test]
    fn singular_mod_p_is_rejected() {
        let ctx = PrimeContext::new(2, 1, 4).unwrap();
        let mut m = WMatrix::zeros(&ctx, 2, 2);
        m.entry_mut(0, 0)[0] = 2;
        m.entry_mut(1, 1)[0] = 1;
        assert_eq!(m.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn jordan_type_of_single_block() {
        let ctx = PrimeContext::new(3, 1, 1).unwrap();
        let mut t = FqMatrix::identity(&ctx, 5);
        t.set(0, 1, &FqElem::one(&ctx));
        t.set(1, 2, &FqElem::one(&ctx));
        t.set(3, 4, &FqElem::one(&ctx));
        assert_eq!(jordan_type(&t, 3).unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn rank_over_f4() {
        let ctx = PrimeContext::new(2, 2, 1).unwrap();
        let u = FqElem::generator(&ctx);
        let mut m = FqMatrix::zeros(&ctx, 2, 2);
        m.set(0, 0, &FqElem::one(&ctx));
        m.set(0, 1, &u);
        m.set(1, 0, &u);
        m.set(1, 1, &(&u * &u));
        assert_eq!(m.rank(), 1);
    }
}
