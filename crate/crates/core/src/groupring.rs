//! The group rings `(W/p^M)[G]` and `F_q[G]` for `G = <gamma, sigma> = C_p x C_p`.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::binomial;
use crate::linalg::WMatrix;
use crate::padic::{inverse_mod, FqElem, PrimeContext, WittElem};

/// Coefficient rings usable in a group ring.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync {
    fn ctx(&self) -> &Arc<PrimeContext>;
    fn from_int_in(ctx: &Arc<PrimeContext>, n: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;

    /// `self (self - 1) .. (self - i + 1) / i!` for `i < p`.
    fn binomial(&self, i: usize) -> Self {
        let ctx = self.ctx().clone();
        let mut acc = Self::from_int_in(&ctx, 1);
        let mut fact: u64 = 1;
        for j in 0..i {
            acc = acc.mul(&self.sub(&Self::from_int_in(&ctx, j as i64)));
            fact = fact * (j as u64 + 1) % ctx.p_pow(ctx.precision());
        }
        let inv = inverse_mod(fact, ctx.modulus()).expect("i! is a unit for i < p");
        acc.mul(&Self::from_int_in(&ctx, inv as i64))
    }
}

impl Coeff for WittElem {
    fn ctx(&self) -> &Arc<PrimeContext> {
        WittElem::ctx(self)
    }
    fn from_int_in(ctx: &Arc<PrimeContext>, n: i64) -> Self {
        WittElem::from_int(ctx, n)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        WittElem::is_zero(self)
    }
}

impl Coeff for FqElem {
    fn ctx(&self) -> &Arc<PrimeContext> {
        FqElem::ctx(self)
    }
    fn from_int_in(ctx: &Arc<PrimeContext>, n: i64) -> Self {
        FqElem::from_int(ctx, n)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        FqElem::is_zero(self)
    }
}

/// `sum c_{ij} gamma^i sigma^j`, coefficient of `gamma^i sigma^j` at index `i p + j`.
#[derive(Clone, PartialEq, Debug)]
pub struct GroupRingElem<C: Coeff> {
    p: usize,
    coeffs: Vec<C>,
}

impl<C: Coeff> GroupRingElem<C> {
    pub fn zero(ctx: &Arc<PrimeContext>) -> Self {
        let p = ctx.p() as usize;
        GroupRingElem { p, coeffs: vec![C::from_int_in(ctx, 0); p * p] }
    }

    pub fn scalar(c: &C) -> Self {
        let mut x = Self::zero(c.ctx());
        x.coeffs[0] = c.clone();
        x
    }

    pub fn one(ctx: &Arc<PrimeContext>) -> Self {
        Self::scalar(&C::from_int_in(ctx, 1))
    }

    /// `gamma^i sigma^j` (exponents taken mod `p`).
    pub fn monomial(ctx: &Arc<PrimeContext>, i: usize, j: usize) -> Self {
        let mut x = Self::zero(ctx);
        let p = x.p;
        x.coeffs[(i % p) * p + j % p] = C::from_int_in(ctx, 1);
        x
    }

    pub fn gamma(ctx: &Arc<PrimeContext>) -> Self {
        Self::monomial(ctx, 1, 0)
    }

    pub fn sigma(ctx: &Arc<PrimeContext>) -> Self {
        Self::monomial(ctx, 0, 1)
    }

    pub fn from_coeffs(ctx: &Arc<PrimeContext>, coeffs: Vec<C>) -> Result<Self> {
        let p = ctx.p() as usize;
        if coeffs.len() != p * p {
            return Err(Error::Inconsistent(format!("expected {} coefficients", p * p)));
        }
        Ok(GroupRingElem { p, coeffs })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn ctx(&self) -> &Arc<PrimeContext> {
        self.coeffs[0].ctx()
    }

    /// Coefficient of `gamma^i sigma^j`.
    pub fn coeff(&self, i: usize, j: usize) -> &C {
        &self.coeffs[i * self.p + j]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        GroupRingElem { p: self.p, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GroupRingElem { p: self.p, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        GroupRingElem { p: self.p, coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.p;
        let mut out = Self::zero(self.ctx());
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let (i1, j1) = (a / p, a % p);
            for (b, cb) in other.coeffs.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let (i2, j2) = (b / p, b % p);
                let idx = ((i1 + i2) % p) * p + (j1 + j2) % p;
                out.coeffs[idx] = out.coeffs[idx].add(&ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = Self::one(self.ctx());
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

    /// Sum of the coefficients.
    pub fn augmentation(&self) -> C {
        self.coeffs.iter().fold(C::from_int_in(self.ctx(), 0), |acc, c| acc.add(c))
    }

    /// Coordinates `d_{ij}` in the basis `(gamma - 1)^i (sigma - 1)^j`, index `i p + j`.
    pub fn augmentation_coords(&self) -> Vec<C> {
        let p = self.p;
        let ctx = self.ctx().clone();
        let mut out = vec![C::from_int_in(&ctx, 0); p * p];
        for a in 0..p {
            for b in 0..p {
                let c = &self.coeffs[a * p + b];
                if c.is_zero() {
                    continue;
                }
                for i in 0..=a {
                    for j in 0..=b {
                        let k = (binomial(a, i) * binomial(b, j)) as i64;
                        out[i * p + j] = out[i * p + j].add(&c.mul(&C::from_int_in(&ctx, k)));
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`GroupRingElem::augmentation_coords`].
    pub fn from_augmentation_coords(ctx: &Arc<PrimeContext>, d: &[C]) -> Self {
        let p = ctx.p() as usize;
        let mut out = Self::zero(ctx);
        for i in 0..p {
            for j in 0..p {
                let c = &d[i * p + j];
                if c.is_zero() {
                    continue;
                }
                for a in 0..=i {
                    for b in 0..=j {
                        let sign = if (i - a + j - b) % 2 == 0 { 1 } else { -1 };
                        let k = sign * (binomial(i, a) * binomial(j, b)) as i64;
                        out.coeffs[a * p + b] = out.coeffs[a * p + b].add(&c.mul(&C::from_int_in(ctx, k)));
                    }
                }
            }
        }
        out
    }
}

impl GroupRingElem<WittElem> {
    pub fn reduce_mod_p(&self) -> GroupRingElem<FqElem> {
        GroupRingElem { p: self.p, coeffs: self.coeffs.iter().map(|c| c.residue()).collect() }
    }

    /// True when every coefficient is divisible by `p^k`.
    pub fn divisible_by_p_pow(&self, k: u32) -> bool {
        self.coeffs.iter().all(|c| c.div_p_pow(k).is_some())
    }

    /// Equality modulo `p^k`.
    pub fn congruent(&self, other: &Self, k: u32) -> bool {
        self.sub(other).divisible_by_p_pow(k)
    }

    /// The operator on a `W`-lattice given the matrices of `gamma` and `sigma`.
    pub fn operator(&self, gamma: &WMatrix, sigma: &WMatrix) -> WMatrix {
        let p = self.p;
        let ctx = gamma.ctx().clone();
        let n = gamma.rows();
        let mut sigma_pows = vec![WMatrix::identity(&ctx, n).with_digits(sigma.digits())];
        for j in 1..p {
            sigma_pows.push(sigma_pows[j - 1].mul(sigma));
        }
        let mut total = WMatrix::zeros(&ctx, n, n).with_digits(gamma.digits().min(sigma.digits()));
        let mut gamma_pow = WMatrix::identity(&ctx, n).with_digits(gamma.digits());
        for i in 0..p {
            let mut inner = WMatrix::zeros(&ctx, n, n);
            let mut any = false;
            for (j, sp) in sigma_pows.iter().enumerate() {
                let c = self.coeff(i, j);
                if !c.is_zero() {
                    inner = inner.add(&sp.scale(c));
                    any = true;
                }
            }
            if any {
                total = total.add(&gamma_pow.mul(&inner));
            }
            gamma_pow = gamma_pow.mul(gamma);
        }
        total
    }
}

/// `x^[kappa] = sum_{i < p} binom(kappa, i) (x - 1)^i` for `x` of augmentation 1.
pub fn trunc_exp<C: Coeff>(x: &GroupRingElem<C>, kappa: &C) -> GroupRingElem<C> {
    let ctx = x.ctx().clone();
    let one = GroupRingElem::<C>::one(&ctx);
    let y = x.sub(&one);
    let mut acc = GroupRingElem::zero(&ctx);
    let mut pw = one;
    for i in 0..x.p() {
        acc = acc.add(&pw.scale(&kappa.binomial(i)));
        pw = pw.mul(&y);
    }
    acc
}

/// `Theta = gamma sigma^[omega]`.
pub fn theta<C: Coeff>(omega: &C) -> GroupRingElem<C> {
    let ctx = omega.ctx().clone();
    GroupRingElem::gamma(&ctx).mul(&trunc_exp(&GroupRingElem::sigma(&ctx), omega))
}

/// Membership in `(sigma - 1)^p W[sigma] = p (sigma - 1) W[sigma]` for an element of `W[sigma]`.
pub fn in_sigma_minus_one_pow_p(x: &GroupRingElem<WittElem>) -> bool {
    let p = x.p();
    let only_sigma = (1..p).all(|i| (0..p).all(|j| x.coeff(i, j).is_zero()));
    if !only_sigma {
        return false;
    }
    let d = x.augmentation_coords();
    d[0].is_zero() && (0..p).all(|j| d[j].div_p_pow(1).is_some())
}

/// The units `u(sigma)` and `w(Theta)` with
/// `(Theta - 1)^p = [u(sigma)(sigma - 1) - w(Theta)(Theta - 1)] p`.
pub fn theta_power_units(omega: &WittElem) -> Result<(GroupRingElem<WittElem>, GroupRingElem<WittElem>)> {
    let ctx = omega.ctx().clone();
    if ctx.precision() < 2 {
        return Err(Error::PrecisionTooLow(ctx.precision()));
    }
    if omega.residue().in_prime_field() {
        return Err(Error::NotAUnit);
    }
    let p = ctx.p() as usize;
    let th = theta(omega);
    // Theta^p - 1 = (sigma^[omega])^p - 1 lies in p (sigma - 1) W[sigma]
    let diff = th.pow(p as u64).sub(&GroupRingElem::one(&ctx));
    if !in_sigma_minus_one_pow_p(&diff) {
        return Err(Error::Inconsistent("Theta^p - 1 is not in p (sigma - 1) W[sigma]".into()));
    }
    let d = diff.augmentation_coords();
    let mut u_coords = vec![WittElem::zero(&ctx); p * p];
    for j in 1..p {
        u_coords[j - 1] = d[j].div_p_pow(1).expect("checked divisible");
    }
    let u_sigma = GroupRingElem::from_augmentation_coords(&ctx, &u_coords);
    let one = GroupRingElem::one(&ctx);
    let t = th.sub(&one);
    let mut w_theta = GroupRingElem::zero(&ctx);
    let mut pw = one;
    for s in 1..p {
        let c = WittElem::from_int(&ctx, (binomial(p, s) / p as u64) as i64);
        w_theta = w_theta.add(&pw.scale(&c));
        pw = pw.mul(&t);
    }
    if !u_sigma.augmentation().is_unit() || !w_theta.augmentation().is_unit() {
        return Err(Error::NotAUnit);
    }
    Ok((u_sigma, w_theta))
}

/// Canonical representative in `(1 + A) / (1 + A^p)` over `F_q`: drop all
/// terms of total degree `>= p` in the basis `(gamma - 1)^i (sigma - 1)^j`.
pub fn truncate_augmentation(x: &GroupRingElem<FqElem>) -> GroupRingElem<FqElem> {
    let p = x.p();
    let ctx = x.ctx().clone();
    let mut d = x.augmentation_coords();
    for i in 0..p {
        for j in 0..p {
            if i + j >= p {
                d[i * p + j] = FqElem::zero(&ctx);
            }
        }
    }
    GroupRingElem::from_augmentation_coords(&ctx, &d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::teichmuller_lift;

    type W = GroupRingElem<WittElem>;

    #[test]
    fn trunc_exp_basic_values() {
        let ctx = PrimeContext::new(3, 2, 6).unwrap();
        let s = W::sigma(&ctx);
        assert_eq!(trunc_exp(&s, &WittElem::one(&ctx)), s);
        assert_eq!(trunc_exp(&s, &WittElem::zero(&ctx)), W::one(&ctx));
        let k = WittElem::from_coeffs(&ctx, &[4, 7]).unwrap();
        let y = s.sub(&W::one(&ctx));
        let half = WittElem::from_int(&ctx, 2).inverse().unwrap();
        let expected = W::one(&ctx)
            .add(&y.scale(&k))
            .add(&y.mul(&y).scale(&(&(&k * &(&k - &WittElem::one(&ctx))) * &half)));
        assert_eq!(trunc_exp(&s, &k), expected);
    }

    #[test]
    fn theta_values() {
        let ctx = PrimeContext::new(2, 2, 5).unwrap();
        assert_eq!(theta(&WittElem::zero(&ctx)), W::gamma(&ctx));
        let w = teichmuller_lift(&FqElem::generator(&ctx)).unwrap();
        let g = W::gamma(&ctx);
        let gs = W::monomial(&ctx, 1, 1);
        assert_eq!(theta(&w), g.add(&gs.scale(&w)).sub(&g.scale(&w)));
        let ctx3 = PrimeContext::new(3, 2, 5).unwrap();
        let w3 = teichmuller_lift(&FqElem::generator(&ctx3)).unwrap();
        assert_eq!(theta(&w3).reduce_mod_p().pow(3), GroupRingElem::one(&ctx3));
    }

    #[test]
    fn augmentation_coords_round_trip() {
        let ctx = PrimeContext::new(5, 1, 4).unwrap();
        let coeffs: Vec<WittElem> = (0..25).map(|k| WittElem::from_int(&ctx, k * 7 + 3)).collect();
        let x = W::from_coeffs(&ctx, coeffs).unwrap();
        let d = x.augmentation_coords();
        assert_eq!(W::from_augmentation_coords(&ctx, &d), x);
        assert_eq!(d[0], x.augmentation());
    }

    #[test]
    fn theta_power_unit_preconditions() {
        let ctx = PrimeContext::new(3, 2, 1).unwrap();
        let w = teichmuller_lift(&FqElem::generator(&ctx)).unwrap();
        assert_eq!(theta_power_units(&w).unwrap_err(), Error::PrecisionTooLow(1));
        let ctx = PrimeContext::new(3, 2, 4).unwrap();
        assert_eq!(theta_power_units(&WittElem::from_int(&ctx, 2)).unwrap_err(), Error::NotAUnit);
    }

    #[test]
    fn theta_power_unit_residues() {
        for p in [2u64, 3] {
            let ctx = PrimeContext::new(p, 2, 6).unwrap();
            let w = teichmuller_lift(&FqElem::generator(&ctx)).unwrap();
            let (u, _) = theta_power_units(&w).unwrap();
            let expect = (&w - &w.pow(p)).residue();
            assert_eq!(u.augmentation().residue(), expect);
            if p == 2 {
                // u(sigma) is the single scalar omega - omega^2 mod 2
                assert_eq!(u.reduce_mod_p(), GroupRingElem::scalar(&expect));
            } else {
                // (omega - omega^3)(1 - 2^{-1}(sigma - 1)) mod 3
                let ctxp = u.ctx().clone();
                let mut d = vec![FqElem::zero(&ctxp); 9];
                d[0] = expect.clone();
                d[1] = expect.clone();
                let target = GroupRingElem::from_augmentation_coords(&ctxp, &d);
                assert_eq!(u.reduce_mod_p(), target);
            }
        }
    }
}
