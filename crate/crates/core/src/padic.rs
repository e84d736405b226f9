//! Exact arithmetic in `Z/p^M`, the residue field `F_q` and the truncated
//! unramified ring `W/p^M`, where `W` is the ring of Witt vectors of `F_q`.
//!
//! `W/p^M` is modelled as `(Z/p^M)[u]/(g(u))` where `g` is a monic lift of an
//! irreducible polynomial of degree `f` over `F_p`. Its coefficients are lifted
//! verbatim to `{0, .., p-1}`. `F_q` is the same quotient taken mod `p`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

/// Largest inertia degree accepted by [`PrimeContext`].
pub const MAX_DEGREE: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("inertia degree must be between 1 and {MAX_DEGREE}, got {0}")]
    BadDegree(usize),
    #[error("coefficient precision must be at least 1")]
    ZeroPrecision,
    #[error("{p}^{m} does not fit in 63 bits")]
    PrecisionOverflow { p: u64, m: u32 },
    #[error("no built-in Conway polynomial for p={p}, f={f}; supply a defining polynomial")]
    NoConwayPolynomial { p: u64, f: usize },
    #[error("defining polynomial must be monic with coefficients in [0, p)")]
    BadPolynomial,
    #[error("defining polynomial is reducible over F_p")]
    Reducible,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("Teichmüller lift of zero")]
    ZeroInput,
    #[error("expected {expected} coefficients, got {got}")]
    Length { expected: usize, got: usize },
}

/// Conway polynomials, coefficients from low to high degree (monic).
const CONWAY: &[(u64, usize, &[u64])] = &[
    (2, 1, &[1, 1]),
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (3, 1, &[1, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (5, 1, &[3, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 3, &[3, 3, 0, 1]),
    (5, 4, &[2, 4, 4, 0, 1]),
];

/// Built-in Conway polynomial for `(p, f)`, if tabulated.
pub fn conway_polynomial(p: u64, f: usize) -> Option<&'static [u64]> {
    CONWAY
        .iter()
        .find(|(cp, cf, _)| *cp == p && *cf == f)
        .map(|(_, _, c)| *c)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Inverse of `a` modulo `m`, when it exists.
pub fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// The parameters `(p, f, M)` together with the defining polynomial of `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeContext {
    p: u64,
    f: usize,
    precision: u32,
    modulus: u64,
    q: u64,
    poly: Vec<u64>,
}

impl PrimeContext {
    /// Context using the tabulated Conway polynomial.
    pub fn new(p: u64, f: usize, precision: u32) -> Result<Arc<Self>, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        let poly = conway_polynomial(p, f).ok_or(PadicError::NoConwayPolynomial { p, f })?;
        Self::with_polynomial(p, poly, precision)
    }

    /// Context for a user-supplied monic polynomial (low to high degree).
    pub fn with_polynomial(p: u64, poly: &[u64], precision: u32) -> Result<Arc<Self>, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        if poly.len() < 2 || poly.len() - 1 > MAX_DEGREE {
            return Err(PadicError::BadDegree(poly.len().saturating_sub(1)));
        }
        if *poly.last().unwrap() != 1 || poly.iter().any(|&c| c >= p) {
            return Err(PadicError::BadPolynomial);
        }
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        let modulus = checked_pow(p, precision).ok_or(PadicError::PrecisionOverflow { p, m: precision })?;
        let f = poly.len() - 1;
        if !is_irreducible_mod_p(poly, p) {
            return Err(PadicError::Reducible);
        }
        let q = checked_pow(p, f as u32).ok_or(PadicError::BadDegree(f))?;
        Ok(Arc::new(PrimeContext { p, f, precision, modulus, q, poly: poly.to_vec() }))
    }

    /// Same residue field and polynomial at a different coefficient precision.
    pub fn with_precision(&self, precision: u32) -> Result<Arc<Self>, PadicError> {
        Self::with_polynomial(self.p, &self.poly, precision)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    /// The exponent `M`: arithmetic is carried out mod `p^M`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn defining_polynomial(&self) -> &[u64] {
        &self.poly
    }

    /// `p^k` for `k <= M`.
    pub fn p_pow(&self, k: u32) -> u64 {
        self.p.pow(k)
    }

    // ---- raw coefficient-slice arithmetic ----------------------------------
    //
    // A raw element is a slice of `f` residues. `m` selects the modulus: `p^M`
    // for `W/p^M`, `p` for `F_q`.

    #[inline]
    pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
        if m <= u32::MAX as u64 {
            a * b % m
        } else {
            ((a as u128 * b as u128) % m as u128) as u64
        }
    }

    #[inline]
    pub(crate) fn raw_add_assign(&self, a: &mut [u64], b: &[u64], m: u64) {
        for (x, &y) in a.iter_mut().zip(b) {
            let s = *x + y;
            *x = if s >= m { s - m } else { s };
        }
    }

    #[inline]
    pub(crate) fn raw_sub_assign(&self, a: &mut [u64], b: &[u64], m: u64) {
        for (x, &y) in a.iter_mut().zip(b) {
            *x = if *x >= y { *x - y } else { *x + m - y };
        }
    }

    /// `acc += a * b` in the quotient ring mod `m`.
    pub(crate) fn raw_mul_acc(&self, acc: &mut [u64], a: &[u64], b: &[u64], m: u64) {
        let f = self.f;
        if f == 1 {
            let s = acc[0] + Self::mulmod(a[0], b[0], m);
            acc[0] = if s >= m { s - m } else { s };
            return;
        }
        let mut tmp = [0u64; 2 * MAX_DEGREE];
        for i in 0..f {
            if a[i] == 0 {
                continue;
            }
            for j in 0..f {
                if b[j] != 0 {
                    let s = tmp[i + j] + Self::mulmod(a[i], b[j], m);
                    tmp[i + j] = if s >= m { s - m } else { s };
                }
            }
        }
        self.reduce_tmp(&mut tmp, m);
        self.raw_add_assign(acc, &tmp[..f], m);
    }

    fn reduce_tmp(&self, tmp: &mut [u64], m: u64) {
        let f = self.f;
        for k in (f..2 * f - 1).rev() {
            let c = tmp[k];
            if c == 0 {
                continue;
            }
            tmp[k] = 0;
            for i in 0..f {
                let g = self.poly[i] % m;
                if g != 0 {
                    let sub = Self::mulmod(c, g, m);
                    let x = tmp[k - f + i];
                    tmp[k - f + i] = if x >= sub { x - sub } else { x + m - sub };
                }
            }
        }
    }

    pub(crate) fn raw_mul(&self, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        let mut out = vec![0; self.f];
        self.raw_mul_acc(&mut out, a, b, m);
        out
    }

    /// `p`-adic valuation of a raw `W/p^M` element, `None` when it is zero.
    pub(crate) fn raw_vp(&self, a: &[u64]) -> Option<u32> {
        a.iter()
            .filter(|&&c| c != 0)
            .map(|&c| {
                let mut v = 0;
                let mut c = c;
                while c % self.p == 0 {
                    c /= self.p;
                    v += 1;
                }
                v
            })
            .min()
    }

    pub(crate) fn raw_pow(&self, a: &[u64], mut e: u64, m: u64) -> Vec<u64> {
        let mut result = vec![0; self.f];
        result[0] = 1 % m;
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.raw_mul(&result, &base, m);
            }
            base = self.raw_mul(&base, &base, m);
            e >>= 1;
        }
        result
    }

    /// Inverse of a unit of `W/p^M` by Newton iteration from the residue inverse.
    pub(crate) fn raw_witt_inverse(&self, a: &[u64]) -> Result<Vec<u64>, PadicError> {
        let res: Vec<u64> = a.iter().map(|c| c % self.p).collect();
        if res.iter().all(|&c| c == 0) {
            return Err(PadicError::NotAUnit);
        }
        let m = self.modulus;
        let mut x = self.raw_pow(&res, self.q - 2, self.p);
        let mut two = vec![0; self.f];
        two[0] = 2 % m;
        for _ in 0..64 {
            let ax = self.raw_mul(a, &x, m);
            if ax[0] == 1 % m && ax[1..].iter().all(|&c| c == 0) {
                return Ok(x);
            }
            let mut corr = two.clone();
            self.raw_sub_assign(&mut corr, &ax, m);
            x = self.raw_mul(&x, &corr, m);
        }
        Err(PadicError::NotAUnit)
    }
}

fn checked_pow(p: u64, e: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p)?;
        if acc >= 1 << 63 {
            return None;
        }
    }
    Some(acc)
}

/// Remainder of `a` modulo monic `b` over `F_p` (coefficients low to high).
fn poly_rem_mod_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let c = *r.last().unwrap() % p;
        let shift = r.len() - 1 - db;
        if c != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + p * p - c * bc % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Brute-force irreducibility test: no monic factor of degree `<= f/2`.
pub fn is_irreducible_mod_p(poly: &[u64], p: u64) -> bool {
    let f = poly.len() - 1;
    for d in 1..=f / 2 {
        let count = match p.checked_pow(d as u32) {
            Some(c) => c,
            None => return false,
        };
        for idx in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut k = idx;
            for _ in 0..d {
                cand.push(k % p);
                k /= p;
            }
            cand.push(1);
            if poly_rem_mod_p(poly, &cand, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

// ---- element types -----------------------------------------------------------

/// An element of `W/p^M`: a polynomial of degree `< f` in the unramified
/// generator, coefficients reduced to `[0, p^M)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WittElem {
    ctx: Arc<PrimeContext>,
    coeffs: Vec<u64>,
}

/// An element of the residue field `F_q`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem {
    ctx: Arc<PrimeContext>,
    coeffs: Vec<u64>,
}

impl PartialOrd for PrimeContext {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PrimeContext {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.p, self.f, self.precision, &self.poly).cmp(&(other.p, other.f, other.precision, &other.poly))
    }
}

impl std::hash::Hash for PrimeContext {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.p, self.f, self.precision, &self.poly).hash(state)
    }
}

impl WittElem {
    pub fn from_coeffs(ctx: &Arc<PrimeContext>, coeffs: &[u64]) -> Result<Self, PadicError> {
        if coeffs.len() != ctx.f {
            return Err(PadicError::Length { expected: ctx.f, got: coeffs.len() });
        }
        let m = ctx.modulus;
        Ok(WittElem { ctx: ctx.clone(), coeffs: coeffs.iter().map(|c| c % m).collect() })
    }

    pub(crate) fn from_raw(ctx: &Arc<PrimeContext>, coeffs: Vec<u64>) -> Self {
        debug_assert_eq!(coeffs.len(), ctx.f);
        WittElem { ctx: ctx.clone(), coeffs }
    }

    pub fn from_int(ctx: &Arc<PrimeContext>, n: i64) -> Self {
        let m = ctx.modulus as i128;
        let mut coeffs = vec![0; ctx.f];
        coeffs[0] = (n as i128).rem_euclid(m) as u64;
        WittElem { ctx: ctx.clone(), coeffs }
    }

    pub fn zero(ctx: &Arc<PrimeContext>) -> Self {
        Self::from_int(ctx, 0)
    }

    pub fn one(ctx: &Arc<PrimeContext>) -> Self {
        Self::from_int(ctx, 1)
    }

    /// The unramified generator `u` (class of the indeterminate).
    pub fn generator(ctx: &Arc<PrimeContext>) -> Self {
        let mut coeffs = vec![0; ctx.f];
        if ctx.f == 1 {
            coeffs[0] = (ctx.modulus - ctx.poly[0]) % ctx.modulus;
        } else {
            coeffs[1] = 1;
        }
        WittElem { ctx: ctx.clone(), coeffs }
    }

    pub fn ctx(&self) -> &Arc<PrimeContext> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// `p`-adic valuation; `None` for zero (mod `p^M`).
    pub fn valuation(&self) -> Option<u32> {
        self.ctx.raw_vp(&self.coeffs)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    pub fn inverse(&self) -> Result<Self, PadicError> {
        Ok(WittElem { ctx: self.ctx.clone(), coeffs: self.ctx.raw_witt_inverse(&self.coeffs)? })
    }

    pub fn pow(&self, e: u64) -> Self {
        WittElem { ctx: self.ctx.clone(), coeffs: self.ctx.raw_pow(&self.coeffs, e, self.ctx.modulus) }
    }

    pub fn scale(&self, k: i64) -> Self {
        self * &WittElem::from_int(&self.ctx, k)
    }

    /// Reduction mod `p`.
    pub fn residue(&self) -> FqElem {
        let p = self.ctx.p;
        FqElem { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|c| c % p).collect() }
    }

    /// Exact division by `p^k`; `None` if not divisible.
    pub fn div_p_pow(&self, k: u32) -> Option<Self> {
        let pk = self.ctx.p_pow(k);
        if self.coeffs.iter().any(|c| c % pk != 0) {
            return None;
        }
        Some(WittElem { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|c| c / pk).collect() })
    }

    /// `binom(self, i) = self (self-1) .. (self-i+1) / i!` for `i < p`.
    pub fn binomial(&self, i: usize) -> Self {
        assert!((i as u64) < self.ctx.p || i == 0, "truncated binomials need i < p");
        let mut acc = WittElem::one(&self.ctx);
        let mut fact: u64 = 1;
        for j in 0..i {
            acc = &acc * &(self - &WittElem::from_int(&self.ctx, j as i64));
            fact *= (j + 1) as u64;
        }
        let inv = inverse_mod(fact % self.ctx.modulus, self.ctx.modulus).expect("i! is a unit for i < p");
        acc.scale(inv as i64)
    }
}

impl FqElem {
    pub fn from_coeffs(ctx: &Arc<PrimeContext>, coeffs: &[u64]) -> Result<Self, PadicError> {
        if coeffs.len() != ctx.f {
            return Err(PadicError::Length { expected: ctx.f, got: coeffs.len() });
        }
        Ok(FqElem { ctx: ctx.clone(), coeffs: coeffs.iter().map(|c| c % ctx.p).collect() })
    }

    pub(crate) fn from_raw(ctx: &Arc<PrimeContext>, coeffs: Vec<u64>) -> Self {
        debug_assert_eq!(coeffs.len(), ctx.f);
        FqElem { ctx: ctx.clone(), coeffs }
    }

    pub fn from_int(ctx: &Arc<PrimeContext>, n: i64) -> Self {
        let mut coeffs = vec![0; ctx.f];
        coeffs[0] = n.rem_euclid(ctx.p as i64) as u64;
        FqElem { ctx: ctx.clone(), coeffs }
    }

    pub fn zero(ctx: &Arc<PrimeContext>) -> Self {
        Self::from_int(ctx, 0)
    }

    pub fn one(ctx: &Arc<PrimeContext>) -> Self {
        Self::from_int(ctx, 1)
    }

    pub fn generator(ctx: &Arc<PrimeContext>) -> Self {
        WittElem::generator(ctx).residue()
    }

    /// All `q` elements, in lexicographic coefficient order.
    pub fn all(ctx: &Arc<PrimeContext>) -> Vec<Self> {
        (0..ctx.q)
            .map(|mut k| {
                let mut coeffs = vec![0; ctx.f];
                for c in coeffs.iter_mut() {
                    *c = k % ctx.p;
                    k /= ctx.p;
                }
                FqElem { ctx: ctx.clone(), coeffs }
            })
            .collect()
    }

    pub fn ctx(&self) -> &Arc<PrimeContext> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// True when the element lies in the prime field `F_p`.
    pub fn in_prime_field(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn pow(&self, e: u64) -> Self {
        FqElem { ctx: self.ctx.clone(), coeffs: self.ctx.raw_pow(&self.coeffs, e, self.ctx.p) }
    }

    pub fn inverse(&self) -> Result<Self, PadicError> {
        if self.is_zero() {
            return Err(PadicError::NotAUnit);
        }
        Ok(self.pow(self.ctx.q - 2))
    }

    /// Frobenius `a -> a^p`.
    pub fn frobenius(&self) -> Self {
        self.pow(self.ctx.p)
    }

    /// The unique `p`-th root (Frobenius is bijective on `F_q`).
    pub fn pth_root(&self) -> Self {
        self.pow(self.ctx.q / self.ctx.p)
    }

    /// The coefficient lift to `{0..p-1}` coordinates in `W/p^M`.
    pub fn lift(&self) -> WittElem {
        WittElem { ctx: self.ctx.clone(), coeffs: self.coeffs.clone() }
    }

    /// Dense index in `[0, q)`, the inverse of the ordering used by [`FqElem::all`].
    pub fn index(&self) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| acc * self.ctx.p + c)
    }
}

/// The Teichmüller representative of a nonzero residue: the unique
/// `(q-1)`-th root of unity in `W/p^M` reducing to `a`.
///
/// Computed by raising a lift to the `p`-th power `f` times per round until
/// the value stops changing mod `p^M`; at most `M` rounds are needed.
pub fn teichmuller_lift(a: &FqElem) -> Result<WittElem, PadicError> {
    if a.is_zero() {
        return Err(PadicError::ZeroInput);
    }
    let ctx = &a.ctx;
    let mut x = a.lift();
    for _ in 0..=ctx.precision {
        let mut y = x.clone();
        for _ in 0..ctx.f {
            y = y.pow(ctx.p);
        }
        if y == x {
            return Ok(x);
        }
        x = y;
    }
    Ok(x)
}

pub fn residue(a: &WittElem) -> FqElem {
    a.residue()
}

// ---- operator impls ------------------------------------------------------------

macro_rules! ring_ops {
    ($t:ident, $modulus:ident) => {
        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                let mut coeffs = self.coeffs.clone();
                self.ctx.raw_add_assign(&mut coeffs, &rhs.coeffs, self.ctx.$modulus);
                $t { ctx: self.ctx.clone(), coeffs }
            }
        }
        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                let mut coeffs = self.coeffs.clone();
                self.ctx.raw_sub_assign(&mut coeffs, &rhs.coeffs, self.ctx.$modulus);
                $t { ctx: self.ctx.clone(), coeffs }
            }
        }
        impl Mul for &$t {
            type Output = $t;
            fn mul(self, rhs: &$t) -> $t {
                $t { ctx: self.ctx.clone(), coeffs: self.ctx.raw_mul(&self.coeffs, &rhs.coeffs, self.ctx.$modulus) }
            }
        }
        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                let mut coeffs = vec![0; self.ctx.f];
                self.ctx.raw_sub_assign(&mut coeffs, &self.coeffs, self.ctx.$modulus);
                $t { ctx: self.ctx.clone(), coeffs }
            }
        }
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                &self + &rhs
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                &self - &rhs
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                &self * &rhs
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}

ring_ops!(WittElem, modulus);
ring_ops!(FqElem, p);

impl fmt::Debug for WittElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{:?}", self.coeffs)
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{:?}", self.coeffs)
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "u".to_string(),
                (1, c) => format!("{c}u"),
                (i, 1) => format!("u^{i}"),
                (i, c) => format!("{c}u^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_minimal_polynomial_identity() {
        let ctx = PrimeContext::new(2, 2, 1).unwrap();
        let u = FqElem::generator(&ctx);
        let one = FqElem::one(&ctx);
        assert_eq!(&u * &(&u + &one), one);
    }

    #[test]
    fn inverse_of_two_mod_81() {
        let ctx = PrimeContext::new(3, 1, 4).unwrap();
        let inv = WittElem::from_int(&ctx, 2).inverse().unwrap();
        assert_eq!(inv.coeffs(), &[41]);
    }

    #[test]
    fn random_units_invert() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for &(p, f, m) in &[(2, 2, 20), (3, 2, 9), (5, 3, 6), (3, 1, 12)] {
            let ctx = PrimeContext::new(p, f, m).unwrap();
            let mut done = 0;
            while done < 100 {
                let c: Vec<u64> = (0..f).map(|_| rng.gen_range(0..ctx.modulus())).collect();
                let a = WittElem::from_coeffs(&ctx, &c).unwrap();
                if !a.is_unit() {
                    continue;
                }
                assert_eq!(&a * &a.inverse().unwrap(), WittElem::one(&ctx));
                done += 1;
            }
        }
    }

    #[test]
    fn non_unit_inverse_fails() {
        let ctx = PrimeContext::new(3, 2, 4).unwrap();
        assert_eq!(WittElem::from_int(&ctx, 3).inverse(), Err(PadicError::NotAUnit));
        assert_eq!(FqElem::zero(&ctx).inverse(), Err(PadicError::NotAUnit));
    }

    #[test]
    fn teichmuller_of_two_mod_81_is_minus_one() {
        let ctx = PrimeContext::new(3, 1, 4).unwrap();
        let t = teichmuller_lift(&FqElem::from_int(&ctx, 2)).unwrap();
        assert_eq!(t.coeffs(), &[80]);
    }

    #[test]
    fn teichmuller_cube_root_of_unity_in_w4() {
        let ctx = PrimeContext::new(2, 2, 30).unwrap();
        let w = teichmuller_lift(&FqElem::generator(&ctx)).unwrap();
        assert_eq!(w.pow(3), WittElem::one(&ctx));
        assert_ne!(w, WittElem::one(&ctx));
        assert_eq!(w.residue(), FqElem::generator(&ctx));
    }

    #[test]
    fn teichmuller_of_one_and_zero() {
        let ctx = PrimeContext::new(5, 2, 5).unwrap();
        assert_eq!(teichmuller_lift(&FqElem::one(&ctx)).unwrap(), WittElem::one(&ctx));
        assert_eq!(teichmuller_lift(&FqElem::zero(&ctx)), Err(PadicError::ZeroInput));
    }

    #[test]
    fn residue_is_a_section_on_f9() {
        let ctx = PrimeContext::new(3, 2, 6).unwrap();
        for a in FqElem::all(&ctx).into_iter().filter(|a| !a.is_zero()) {
            let t = teichmuller_lift(&a).unwrap();
            assert_eq!(residue(&t), a);
            assert_eq!(t.pow(8), WittElem::one(&ctx));
        }
        let x = WittElem::from_coeffs(&ctx, &[5, 7]).unwrap();
        assert!(residue(&x.scale(3)).is_zero());
        assert_eq!(residue(&WittElem::one(&ctx)), FqElem::one(&ctx));
    }

    #[test]
    fn teichmuller_is_multiplicative_and_frobenius_compatible() {
        for &(p, f) in &[(2, 2), (2, 3), (3, 2), (5, 1)] {
            let ctx = PrimeContext::new(p, f, 8).unwrap();
            let units: Vec<_> = FqElem::all(&ctx).into_iter().filter(|a| !a.is_zero()).collect();
            for a in &units {
                let ta = teichmuller_lift(a).unwrap();
                assert_eq!(ta.pow(p), teichmuller_lift(&a.frobenius()).unwrap());
                for b in &units {
                    let tb = teichmuller_lift(b).unwrap();
                    assert_eq!(teichmuller_lift(&(a * b)).unwrap(), &ta * &tb);
                }
            }
        }
    }

    #[test]
    fn conway_table_is_irreducible() {
        for (p, f, poly) in CONWAY {
            assert!(is_irreducible_mod_p(poly, *p), "p={p} f={f}");
        }
        assert!(!is_irreducible_mod_p(&[1, 0, 1], 2));
        assert_eq!(PrimeContext::with_polynomial(2, &[1, 0, 1], 3), Err(PadicError::Reducible));
    }

    #[test]
    fn binomials() {
        let ctx = PrimeContext::new(5, 2, 6).unwrap();
        let k = WittElem::from_coeffs(&ctx, &[3, 2]).unwrap();
        assert_eq!(k.binomial(0), WittElem::one(&ctx));
        assert_eq!(k.binomial(1), k);
        // binom(7, 3) = 35
        assert_eq!(WittElem::from_int(&ctx, 7).binomial(3), WittElem::from_int(&ctx, 35));
        // binom(-1, 4) = 1
        assert_eq!(WittElem::from_int(&ctx, -1).binomial(4), WittElem::one(&ctx));
    }

    #[test]
    fn pth_root_inverts_frobenius() {
        let ctx = PrimeContext::new(3, 3, 2).unwrap();
        for a in FqElem::all(&ctx) {
            assert_eq!(a.pth_root().frobenius(), a);
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_witt(ctx: Arc<PrimeContext>) -> impl Strategy<Value = WittElem> {
        let m = ctx.modulus();
        proptest::collection::vec(0..m, ctx.f()).prop_map(move |c| WittElem::from_coeffs(&ctx, &c).unwrap())
    }

    proptest! {
        #[test]
        fn ring_axioms((p, f, m) in prop_oneof![Just((2u64, 2usize, 16u32)), Just((3, 2, 7)), Just((5, 3, 4)), Just((2, 3, 10))],
                       seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let ctx = PrimeContext::new(p, f, m).unwrap();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut draw = || {
                let c: Vec<u64> = (0..f).map(|_| rng.gen_range(0..ctx.modulus())).collect();
                WittElem::from_coeffs(&ctx, &c).unwrap()
            };
            let (a, b, c) = (draw(), draw(), draw());
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a - &b) + &b, a);
        }

        #[test]
        fn residue_is_a_ring_map(a in arb_witt(PrimeContext::new(3, 2, 5).unwrap()),
                                 b in arb_witt(PrimeContext::new(3, 2, 5).unwrap())) {
            prop_assert_eq!((&a * &b).residue(), &a.residue() * &b.residue());
            prop_assert_eq!((&a + &b).residue(), &a.residue() + &b.residue());
        }
    }
}
