//! Totally ramified extensions of `W/p^M` represented by an integral basis
//! with distinct valuations.
//!
//! A [`Layer`] of absolute ramification index `n` has a `W`-basis
//! `B_0 = 1, B_1, .., B_{n-1}` whose valuations are a permutation of
//! `0..n`. The valuation of `sum c_k B_k` is then `min(n * v_p(c_k) + v(B_k))`
//! and the graded piece of valuation `v` is spanned by `p^(v / n) B_k` for the
//! unique `k` with `v(B_k) = v mod n`. Layers are built either as an
//! Eisenstein extension of `W` or as a Kummer extension `(1 + X)^p = a` of a
//! parent layer, and an element is always a flat vector of `n * f` residues.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{precision, Error, Result};
use crate::linalg::WMatrix;
use crate::padic::{FqElem, PrimeContext, WittElem};

type Table = Vec<Vec<(usize, Vec<u64>)>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerKind {
    /// `W[X]/(E(X))` for a monic Eisenstein polynomial with integer coefficients.
    Eisenstein { poly: Vec<i64> },
    /// `P[X]/((1 + X)^p - a)` with `v_P(a - 1) = defect` prime to `p`.
    Kummer { defect: usize },
}

pub struct Layer {
    ctx: Arc<PrimeContext>,
    parent: Option<Arc<Layer>>,
    kind: LayerKind,
    rank: usize,
    n: usize,
    pos_val: Vec<usize>,
    by_val: Vec<usize>,
    table: Table,
    digits: u32,
    /// Exponents `k_i` with relative basis element `e_i = X^i / Pi_parent^{k_i}`.
    denominators: Vec<usize>,
    uniformizer: Vec<u64>,
    uniformizer_pows: Vec<Vec<u64>>,
    theta_inv: Vec<u64>,
    theta_digits: u32,
}

impl fmt::Debug for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Layer")
            .field("kind", &self.kind)
            .field("rank", &self.rank)
            .field("n", &self.n)
            .field("digits", &self.digits)
            .finish()
    }
}

impl Layer {
    /// `W[X]/(E(X))` for monic Eisenstein `E` given by integer coefficients, low to high.
    pub fn eisenstein(ctx: &Arc<PrimeContext>, poly: &[i64]) -> Result<Arc<Layer>> {
        let e = poly.len() - 1;
        let p = ctx.p() as i64;
        let ok = poly[e] == 1
            && poly[..e].iter().all(|c| c % p == 0)
            && poly[0] % (p * p) != 0;
        if !ok {
            return Err(Error::InvalidSpec(format!("{poly:?} is not a monic Eisenstein polynomial")));
        }
        let f = ctx.f();
        let m = ctx.modulus();
        let coeff = |c: i64| -> u64 { (c as i128).rem_euclid(m as i128) as u64 };
        // powers[k] = X^k reduced, as integer vectors of length e
        let mut powers: Vec<Vec<u64>> = Vec::with_capacity(2 * e);
        for k in 0..e {
            let mut v = vec![0; e];
            v[k] = 1 % m;
            powers.push(v);
        }
        let top: Vec<u64> = poly[..e].iter().map(|&c| coeff(-c)).collect();
        for k in e..(2 * e).max(e + 1) {
            let prev = &powers[k - 1];
            let mut v = vec![0; e];
            v[1..e].copy_from_slice(&prev[..e - 1]);
            let carry = prev[e - 1];
            for i in 0..e {
                v[i] = (v[i] + PrimeContext::mulmod(carry, top[i], m)) % m;
            }
            powers.push(v);
        }
        let mut table = vec![Vec::new(); e * e];
        for i in 0..e {
            for j in 0..e {
                table[i * e + j] = powers[i + j]
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(k, &c)| {
                        let mut w = vec![0; f];
                        w[0] = c;
                        (k, w)
                    })
                    .collect();
            }
        }
        let uniformizer = {
            let v = &powers[1];
            let mut out = vec![0; e * f];
            for k in 0..e {
                out[k * f] = v[k];
            }
            out
        };
        let layer = Layer {
            ctx: ctx.clone(),
            parent: None,
            kind: LayerKind::Eisenstein { poly: poly.to_vec() },
            rank: e,
            n: e,
            pos_val: (0..e).collect(),
            by_val: (0..e).collect(),
            table,
            digits: ctx.precision(),
            denominators: vec![0; e],
            uniformizer,
            uniformizer_pows: Vec::new(),
            theta_inv: Vec::new(),
            theta_digits: 0,
        };
        layer.finish()
    }

    /// The Kummer extension `(1 + X)^p = a` of `parent`, with `v(a - 1)` prime to `p`
    /// and below `p n / (p - 1)`.
    pub fn kummer(parent: &Arc<Layer>, a: &Elem) -> Result<Arc<Layer>> {
        if !Arc::ptr_eq(&a.layer, parent) {
            return Err(Error::Inconsistent("Kummer constant lives in a different layer".into()));
        }
        let ctx = parent.ctx.clone();
        let p = ctx.p() as usize;
        let pn = parent.n;
        let one = Elem::one(parent);
        let d = (a - &one).valuation()?;
        if d % p == 0 || d * (p - 1) >= p * pn {
            return Err(Error::DegenerateExtension(format!(
                "Kummer defect valuation {d} does not give a totally ramified step"
            )));
        }
        // X^k for k <= 2p - 2 as coefficient vectors over the parent
        let mut xpow: Vec<Vec<Elem>> = Vec::with_capacity(2 * p - 1);
        for k in 0..p {
            xpow.push((0..p).map(|l| if l == k { one.clone() } else { Elem::zero(parent) }).collect());
        }
        let mut xp: Vec<Elem> = vec![a - &one];
        for l in 1..p {
            xp.push(Elem::from_int(parent, -(binomial(p, l) as i64)));
        }
        for k in p..2 * p - 1 {
            let prev = if k == p { None } else { Some(xpow[k - 1].clone()) };
            let row = match prev {
                None => xp.clone(),
                Some(prev) => {
                    let mut row: Vec<Elem> = vec![Elem::zero(parent)];
                    row.extend(prev[..p - 1].iter().cloned());
                    for l in 0..p {
                        row[l] = &row[l] + &(&prev[p - 1] * &xp[l]);
                    }
                    row
                }
            };
            xpow.push(row);
        }
        let k: Vec<usize> = (0..p).map(|i| i * d / p).collect();
        let r: Vec<usize> = (0..p).map(|i| i * d % p).collect();
        let pi = Elem::uniformizer(parent);
        // s[i][j][l]: e_i e_j = sum_l s[i][j][l] e_l
        let mut digits = parent.digits;
        let mut s: Vec<Vec<Vec<Elem>>> = vec![vec![Vec::new(); p]; p];
        for i in 0..p {
            for j in i..p {
                let mut row = Vec::with_capacity(p);
                for l in 0..p {
                    let c = &xpow[i + j][l];
                    let shift = k[l] as i64 - k[i] as i64 - k[j] as i64;
                    let v = if c.is_zero() {
                        Elem::zero(parent)
                    } else if shift >= 0 {
                        c * &pi.pow(shift as u64)
                    } else {
                        c.div_uniformizer_pow((-shift) as usize)?
                    };
                    digits = digits.min(v.digits);
                    row.push(v);
                }
                s[i][j] = row.clone();
                s[j][i] = row;
            }
        }
        let n = p * pn;
        let f = ctx.f();
        let mut pos_val = vec![0; n];
        for i in 0..p {
            for q in 0..pn {
                pos_val[i * pn + q] = p * parent.pos_val[q] + r[i];
            }
        }
        let mut by_val = vec![usize::MAX; n];
        for (idx, &v) in pos_val.iter().enumerate() {
            by_val[v] = idx;
        }
        debug_assert!(by_val.iter().all(|&x| x != usize::MAX));
        let basis_products: Vec<Vec<u64>> = (0..pn * pn)
            .map(|qq| {
                let mut v = vec![0; pn * f];
                for (idx, c) in &parent.table[qq] {
                    v[idx * f..(idx + 1) * f].copy_from_slice(c);
                }
                v
            })
            .collect();
        let mut table: Table = vec![Vec::new(); n * n];
        for i in 0..p {
            for j in i..p {
                for q in 0..pn {
                    for q2 in 0..pn {
                        let a_idx = i * pn + q;
                        let b_idx = j * pn + q2;
                        if i == j && q2 < q {
                            continue;
                        }
                        let bb = &basis_products[q * pn + q2];
                        let mut entry = Vec::new();
                        for l in 0..p {
                            let sl = &s[i][j][l];
                            if sl.is_zero() {
                                continue;
                            }
                            let prod = parent.mul_raw(&sl.coords, bb);
                            for t in 0..pn {
                                let c = &prod[t * f..(t + 1) * f];
                                if c.iter().any(|&x| x != 0) {
                                    entry.push((l * pn + t, c.to_vec()));
                                }
                            }
                        }
                        table[b_idx * n + a_idx] = entry.clone();
                        table[a_idx * n + b_idx] = entry;
                    }
                }
            }
        }
        let uniformizer = {
            let mut v = vec![0; n * f];
            v[by_val[1] * f] = 1;
            v
        };
        let layer = Layer {
            ctx,
            parent: Some(parent.clone()),
            kind: LayerKind::Kummer { defect: d },
            rank: p,
            n,
            pos_val,
            by_val,
            table,
            digits,
            denominators: k,
            uniformizer,
            uniformizer_pows: Vec::new(),
            theta_inv: Vec::new(),
            theta_digits: 0,
        };
        layer.finish()
    }

    fn finish(mut self) -> Result<Arc<Layer>> {
        let f = self.ctx.f();
        let n = self.n;
        let mut pows = Vec::with_capacity(n + 1);
        let mut one = vec![0; n * f];
        one[0] = 1;
        pows.push(one);
        for k in 1..=n {
            let next = self.mul_raw(&pows[k - 1], &self.uniformizer);
            pows.push(next);
        }
        // Pi^n = p * theta with theta a unit
        let p = self.ctx.p();
        let pin = pows[n].clone();
        if pin.iter().any(|c| c % p != 0) {
            return Err(Error::Inconsistent("uniformizer has the wrong valuation".into()));
        }
        let theta: Vec<u64> = pin.iter().map(|c| c / p).collect();
        let theta_digits = self.digits.saturating_sub(1);
        if theta_digits == 0 {
            return Err(precision("no digits left for the uniformizer normalization"));
        }
        self.uniformizer_pows = pows[..n].to_vec();
        let layer = Arc::new(self);
        let (inv_coords, inv_digits) = {
            let theta_elem = Elem { layer: layer.clone(), coords: theta, digits: theta_digits };
            let inv = theta_elem.inverse()?;
            (inv.coords, inv.digits)
        };
        let mut layer = Arc::try_unwrap(layer).map_err(|_| Error::Inconsistent("layer still shared".into()))?;
        layer.theta_inv = inv_coords;
        layer.theta_digits = inv_digits;
        Ok(Arc::new(layer))
    }

    pub fn ctx(&self) -> &Arc<PrimeContext> {
        &self.ctx
    }

    pub fn parent(&self) -> Option<&Arc<Layer>> {
        self.parent.as_ref()
    }

    pub fn kind(&self) -> &LayerKind {
        &self.kind
    }

    /// Degree over the parent (over `W` for an Eisenstein layer).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Absolute ramification index over `W`, equal to the `W`-rank.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Valuation of the basis element `B_k`.
    pub fn basis_valuation(&self, k: usize) -> usize {
        self.pos_val[k]
    }

    /// Index of the basis element of valuation `v mod n`.
    pub fn basis_index_of(&self, v: usize) -> usize {
        self.by_val[v % self.n]
    }

    /// The exponents `k_i` of the relative basis `e_i = X^i / Pi_parent^{k_i}`.
    pub fn denominators(&self) -> &[usize] {
        &self.denominators
    }

    pub(crate) fn mul_raw(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let f = self.ctx.f();
        let n = self.n;
        let m = self.ctx.modulus();
        let nz = |v: &[u64]| -> Vec<usize> {
            (0..n).filter(|&i| v[i * f..(i + 1) * f].iter().any(|&x| x != 0)).collect()
        };
        let na = nz(a);
        let nb = nz(b);
        let mut out = vec![0; n * f];
        if f == 1 {
            for &i in &na {
                for &j in &nb {
                    let prod = PrimeContext::mulmod(a[i], b[j], m);
                    for (k, s) in &self.table[i * n + j] {
                        let t = out[*k] + PrimeContext::mulmod(prod, s[0], m);
                        out[*k] = if t >= m { t - m } else { t };
                    }
                }
            }
            return out;
        }
        for &i in &na {
            for &j in &nb {
                let prod = self.ctx.raw_mul(&a[i * f..(i + 1) * f], &b[j * f..(j + 1) * f], m);
                for (k, s) in &self.table[i * n + j] {
                    self.ctx.raw_mul_acc(&mut out[k * f..(k + 1) * f], &prod, s, m);
                }
            }
        }
        out
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// An element of a [`Layer`], reliable modulo `p^digits` in every coordinate.
#[derive(Clone)]
pub struct Elem {
    layer: Arc<Layer>,
    coords: Vec<u64>,
    digits: u32,
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Elem(n={}, digits={}, {:?})", self.layer.n, self.digits, self.coords)
    }
}

impl Elem {
    pub fn zero(layer: &Arc<Layer>) -> Elem {
        Elem { layer: layer.clone(), coords: vec![0; layer.n * layer.ctx.f()], digits: layer.digits }
    }

    pub fn one(layer: &Arc<Layer>) -> Elem {
        Self::basis(layer, 0)
    }

    pub fn from_int(layer: &Arc<Layer>, k: i64) -> Elem {
        Self::from_witt(layer, &WittElem::from_int(&layer.ctx, k))
    }

    pub fn from_witt(layer: &Arc<Layer>, w: &WittElem) -> Elem {
        let mut e = Self::zero(layer);
        e.coords[..layer.ctx.f()].copy_from_slice(w.coeffs());
        e
    }

    pub fn basis(layer: &Arc<Layer>, k: usize) -> Elem {
        let mut e = Self::zero(layer);
        e.coords[k * layer.ctx.f()] = 1;
        e
    }

    /// The layer's uniformizer (the Eisenstein root, or the basis element of valuation 1).
    pub fn uniformizer(layer: &Arc<Layer>) -> Elem {
        Elem { layer: layer.clone(), coords: layer.uniformizer.clone(), digits: layer.digits }
    }

    pub fn from_coords(layer: &Arc<Layer>, coords: Vec<u64>, digits: u32) -> Elem {
        assert_eq!(coords.len(), layer.n * layer.ctx.f());
        Elem { layer: layer.clone(), coords, digits: digits.min(layer.digits) }
    }

    pub fn layer(&self) -> &Arc<Layer> {
        &self.layer
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Every valuation below the horizon is determined exactly.
    pub fn horizon(&self) -> usize {
        self.layer.n * self.digits as usize
    }

    pub fn with_digits(mut self, digits: u32) -> Elem {
        self.digits = self.digits.min(digits);
        self
    }

    /// `W`-coordinate `k`.
    pub fn coord(&self, k: usize) -> WittElem {
        let f = self.layer.ctx.f();
        WittElem::from_raw(&self.layer.ctx, self.coords[k * f..(k + 1) * f].to_vec())
    }

    fn reliable_modulus(&self) -> u64 {
        self.layer.ctx.p_pow(self.digits)
    }

    pub fn is_zero(&self) -> bool {
        let pk = self.reliable_modulus();
        self.coords.iter().all(|c| c % pk == 0)
    }

    /// Equality to the common precision of both operands.
    pub fn agrees_with(&self, other: &Elem) -> bool {
        (self - other).is_zero()
    }

    /// Exact valuation, or `None` when the element vanishes to the horizon.
    pub fn valuation_opt(&self) -> Option<usize> {
        let f = self.layer.ctx.f();
        let p = self.layer.ctx.p();
        let pk = self.reliable_modulus();
        let mut best: Option<usize> = None;
        for k in 0..self.layer.n {
            let mut vp: Option<usize> = None;
            for &c in &self.coords[k * f..(k + 1) * f] {
                let mut c = c % pk;
                if c == 0 {
                    continue;
                }
                let mut v = 0;
                while c.is_multiple_of(p) {
                    c /= p;
                    v += 1;
                }
                vp = Some(vp.map_or(v, |x: usize| x.min(v)));
            }
            if let Some(vp) = vp {
                let val = self.layer.n * vp + self.layer.pos_val[k];
                best = Some(best.map_or(val, |b| b.min(val)));
            }
        }
        best
    }

    pub fn valuation(&self) -> Result<usize> {
        self.valuation_opt()
            .ok_or_else(|| precision(format!("element vanishes to horizon {}", self.horizon())))
    }

    /// Valuation and the residue of `self / xi_v`, where `xi_v = p^(v / n) B_k`
    /// is the graded reference element of valuation `v`.
    pub fn leading_residue(&self) -> Result<(usize, FqElem)> {
        let v = self.valuation()?;
        Ok((v, self.graded_residue(v)))
    }

    /// Residue of `self / xi_v` for a given `v <= valuation`; zero when the
    /// valuation exceeds `v`.
    pub fn graded_residue(&self, v: usize) -> FqElem {
        let ctx = &self.layer.ctx;
        let f = ctx.f();
        let k = self.layer.by_val[v % self.layer.n];
        let q = (v / self.layer.n) as u32;
        let pq = ctx.p_pow(q);
        let c: Vec<u64> = self.coords[k * f..(k + 1) * f].iter().map(|&x| (x / pq) % ctx.p()).collect();
        FqElem::from_raw(ctx, c)
    }

    /// Residue of `self / other` for two elements of equal valuation.
    pub fn residue_ratio(&self, other: &Elem) -> Result<FqElem> {
        let (va, ra) = self.leading_residue()?;
        let (vb, rb) = other.leading_residue()?;
        if va != vb {
            return Err(Error::Inconsistent(format!("valuations differ: {va} vs {vb}")));
        }
        Ok(&ra * &rb.inverse()?)
    }

    pub fn scale_witt(&self, w: &WittElem) -> Elem {
        let ctx = &self.layer.ctx;
        let f = ctx.f();
        let m = ctx.modulus();
        let mut coords = self.coords.clone();
        for chunk in coords.chunks_mut(f) {
            let prod = ctx.raw_mul(chunk, w.coeffs(), m);
            chunk.copy_from_slice(&prod);
        }
        Elem { layer: self.layer.clone(), coords, digits: self.digits }
    }

    pub fn scale_int(&self, k: i64) -> Elem {
        self.scale_witt(&WittElem::from_int(&self.layer.ctx, k))
    }

    pub fn pow(&self, mut e: u64) -> Elem {
        let mut result = Elem::one(&self.layer).with_digits(self.digits);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Exact division by `p^q`.
    pub fn div_p_pow(&self, q: u32) -> Result<Elem> {
        if q == 0 {
            return Ok(self.clone());
        }
        if self.digits <= q {
            return Err(precision(format!("dividing by p^{q} with {} digits", self.digits)));
        }
        let ctx = &self.layer.ctx;
        let pq = ctx.p_pow(q);
        if self.coords.iter().any(|c| c % pq != 0) {
            return Err(Error::NotDivisible(format!("by p^{q}")));
        }
        Ok(Elem {
            layer: self.layer.clone(),
            coords: self.coords.iter().map(|c| c / pq).collect(),
            digits: self.digits - q,
        })
    }

    /// Exact division by `Pi^k` for the layer uniformizer `Pi`.
    pub fn div_uniformizer_pow(&self, k: usize) -> Result<Elem> {
        if k == 0 {
            return Ok(self.clone());
        }
        let n = self.layer.n;
        let q = k.div_ceil(n);
        let j = q * n - k;
        let shifted = if j == 0 {
            self.clone()
        } else {
            self * &Elem {
                layer: self.layer.clone(),
                coords: self.layer.uniformizer_pows[j].clone(),
                digits: self.layer.digits,
            }
        };
        let divided = shifted.div_p_pow(q as u32)?;
        let theta_inv = Elem {
            layer: self.layer.clone(),
            coords: self.layer.theta_inv.clone(),
            digits: self.layer.theta_digits,
        };
        Ok(&divided * &theta_inv.pow(q as u64))
    }

    /// Blockwise division by `Pi_parent^k`, valid whenever the quotient is integral.
    pub fn div_parent_uniformizer_pow(&self, k: usize) -> Result<Elem> {
        let parent = self
            .layer
            .parent
            .as_ref()
            .ok_or_else(|| Error::Inconsistent("bottom layer has no parent field".into()))?;
        let chunk = parent.n * parent.ctx.f();
        let mut coords = Vec::with_capacity(self.coords.len());
        let mut digits = self.digits;
        for block in self.coords.chunks(chunk) {
            let e = Elem { layer: parent.clone(), coords: block.to_vec(), digits: self.digits };
            let d = e.div_uniformizer_pow(k)?;
            digits = digits.min(d.digits);
            coords.extend(d.coords);
        }
        Ok(Elem { layer: self.layer.clone(), coords, digits })
    }

    /// Inverse of a unit by Newton iteration.
    pub fn inverse(&self) -> Result<Elem> {
        if self.valuation()? != 0 {
            return Err(Error::NotAUnit);
        }
        let ctx = &self.layer.ctx;
        let w0 = WittElem::from_raw(ctx, self.coords[..ctx.f()].to_vec()).inverse()?;
        let one = Elem::one(&self.layer);
        let mut x = Elem::from_witt(&self.layer, &w0);
        for _ in 0..64 {
            let err = &one - &(self * &x);
            if err.is_zero() {
                return Ok(x.with_digits(self.digits));
            }
            x = &x + &(&x * &err);
        }
        Err(Error::Inconsistent("Newton inversion did not converge".into()))
    }

    /// Exact quotient `self / other`.
    pub fn div_exact(&self, other: &Elem) -> Result<Elem> {
        let v = other.valuation()?;
        let unit = other.div_uniformizer_pow(v)?;
        let num = self.div_uniformizer_pow(v)?;
        Ok(&num * &unit.inverse()?)
    }

    /// Image under the inclusion into `child`, whose parent must be this layer.
    pub fn embed(&self, child: &Arc<Layer>) -> Result<Elem> {
        match &child.parent {
            Some(parent) if Arc::ptr_eq(parent, &self.layer) => {
                let mut coords = vec![0; child.n * child.ctx.f()];
                coords[..self.coords.len()].copy_from_slice(&self.coords);
                Ok(Elem { layer: child.clone(), coords, digits: self.digits.min(child.digits) })
            }
            _ => Err(Error::Inconsistent("embedding into a layer that is not a child".into())),
        }
    }

    /// The element as an element of the parent layer, if it lies there.
    pub fn restrict(&self) -> Result<Elem> {
        let parent = self
            .layer
            .parent
            .as_ref()
            .ok_or_else(|| Error::Inconsistent("bottom layer has no parent field".into()))?;
        let chunk = parent.n * parent.ctx.f();
        let pk = self.reliable_modulus();
        if self.coords[chunk..].iter().any(|c| c % pk != 0) {
            return Err(Error::Inconsistent("element does not lie in the parent field".into()));
        }
        Ok(Elem { layer: parent.clone(), coords: self.coords[..chunk].to_vec(), digits: self.digits })
    }

    fn combine(&self, other: &Elem, sub: bool) -> Elem {
        assert!(Arc::ptr_eq(&self.layer, &other.layer), "elements of different layers");
        let ctx = &self.layer.ctx;
        let mut coords = self.coords.clone();
        if sub {
            ctx.raw_sub_assign(&mut coords, &other.coords, ctx.modulus());
        } else {
            ctx.raw_add_assign(&mut coords, &other.coords, ctx.modulus());
        }
        Elem { layer: self.layer.clone(), coords, digits: self.digits.min(other.digits) }
    }
}

impl Add for &Elem {
    type Output = Elem;
    fn add(self, rhs: &Elem) -> Elem {
        self.combine(rhs, false)
    }
}

impl Sub for &Elem {
    type Output = Elem;
    fn sub(self, rhs: &Elem) -> Elem {
        self.combine(rhs, true)
    }
}

impl Neg for &Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        &Elem::zero(&self.layer) - self
    }
}

impl Mul for &Elem {
    type Output = Elem;
    fn mul(self, rhs: &Elem) -> Elem {
        assert!(Arc::ptr_eq(&self.layer, &rhs.layer), "elements of different layers");
        Elem {
            layer: self.layer.clone(),
            coords: self.layer.mul_raw(&self.coords, &rhs.coords),
            digits: self.digits.min(rhs.digits).min(self.layer.digits),
        }
    }
}

/// A `W`-linear field automorphism, stored as the matrix of its action on the basis.
#[derive(Clone, Debug)]
pub struct Automorphism {
    layer: Arc<Layer>,
    matrix: WMatrix,
}

impl Automorphism {
    pub fn identity(layer: &Arc<Layer>) -> Automorphism {
        Automorphism { layer: layer.clone(), matrix: WMatrix::identity(&layer.ctx, layer.n) }
    }

    /// From the images of the basis elements `B_0 .. B_{n-1}`.
    pub fn from_images(layer: &Arc<Layer>, images: &[Elem]) -> Automorphism {
        let digits = images.iter().map(|e| e.digits).min().unwrap_or(layer.digits);
        let cols: Vec<Vec<u64>> = images.iter().map(|e| e.coords.clone()).collect();
        Automorphism { layer: layer.clone(), matrix: WMatrix::from_columns(&layer.ctx, &cols, digits) }
    }

    pub fn from_matrix(layer: &Arc<Layer>, matrix: WMatrix) -> Automorphism {
        Automorphism { layer: layer.clone(), matrix }
    }

    pub fn matrix(&self) -> &WMatrix {
        &self.matrix
    }

    pub fn layer(&self) -> &Arc<Layer> {
        &self.layer
    }

    pub fn apply(&self, a: &Elem) -> Elem {
        apply_matrix(&self.matrix, a)
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism { layer: self.layer.clone(), matrix: self.matrix.mul(&other.matrix) }
    }

    pub fn pow(&self, k: u64) -> Automorphism {
        Automorphism { layer: self.layer.clone(), matrix: self.matrix.pow(k) }
    }
}

/// Applies a `W`-linear operator, given by its matrix in the layer basis.
pub fn apply_matrix(matrix: &WMatrix, a: &Elem) -> Elem {
    Elem {
        layer: a.layer.clone(),
        coords: matrix.apply(&a.coords),
        digits: a.digits.min(matrix.digits()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclotomic(p: u64, f: usize, precision: u32) -> Arc<Layer> {
        let ctx = PrimeContext::new(p, f, precision).unwrap();
        // Phi_p(1 + X)
        let poly: Vec<i64> = (0..p as usize).map(|j| binomial(p as usize, j + 1) as i64).collect();
        Layer::eisenstein(&ctx, &poly).unwrap()
    }

    #[test]
    fn cyclotomic_root_is_a_root_of_unity() {
        let k = cyclotomic(5, 1, 8);
        let zeta = &Elem::one(&k) + &Elem::uniformizer(&k);
        assert!(zeta.pow(5).agrees_with(&Elem::one(&k)));
        assert_eq!((&zeta - &Elem::one(&k)).valuation().unwrap(), 1);
    }

    #[test]
    fn uniformizer_division_round_trips() {
        let k = cyclotomic(3, 2, 10);
        let pi = Elem::uniformizer(&k);
        let a = &Elem::from_int(&k, 7) + &pi;
        for s in 0..7 {
            let b = &a * &pi.pow(s);
            let back = b.div_uniformizer_pow(s as usize).unwrap();
            assert!(back.agrees_with(&a), "s = {s}");
            assert_eq!(b.valuation().unwrap(), s as usize);
        }
    }

    #[test]
    fn kummer_layer_basis_valuations_are_a_permutation() {
        let k = cyclotomic(3, 1, 12);
        let pi = Elem::uniformizer(&k);
        let a = &Elem::one(&k) + &pi;
        let l = Layer::kummer(&k, &a).unwrap();
        let mut vals: Vec<usize> = (0..l.n()).map(|i| l.basis_valuation(i)).collect();
        vals.sort();
        assert_eq!(vals, (0..6).collect::<Vec<_>>());
        // X = e_1 * pi^{k_1} satisfies (1 + X)^p = a
        let x = &Elem::basis(&l, k.n()) * &pi.embed(&l).unwrap().pow(l.denominators()[1] as u64);
        let lhs = (&Elem::one(&l) + &x).pow(3);
        assert!(lhs.agrees_with(&a.embed(&l).unwrap()));
        assert_eq!(x.valuation().unwrap(), 1);
    }

    #[test]
    fn units_invert() {
        let k = cyclotomic(3, 2, 8);
        let pi = Elem::uniformizer(&k);
        let u = &(&Elem::from_int(&k, 2) + &pi.scale_int(5)) + &pi.pow(3);
        let inv = u.inverse().unwrap();
        assert!((&u * &inv).agrees_with(&Elem::one(&k)));
        assert_eq!(pi.inverse().unwrap_err(), Error::NotAUnit);
    }
}
