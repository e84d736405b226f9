//! The explicit tower `W ⊂ K ⊂ L ⊂ N` of a one-break `C_p x C_p` extension.
//!
//! `K = W[pi]/(Phi_p(1 + pi^m))` contains `zeta = 1 + pi^m` and has
//! `e_K = m (p - 1)`. `L = K(x)` with `x^p = 1 + beta`, `beta = pi^(pm - b)`,
//! and `N = L(Y)` where `Y = W / r` for the Kummer generator
//! `W^p = (1 + beta)^[omega^p] (1 + tau)` after stripping `p`-th powers over `L`.
//! `sigma` fixes `L` and sends `Y` to `zeta Y`; `gamma` sends `x` to `zeta x` and
//! fixes `W`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{binomial, Automorphism, Elem, Layer};
use crate::padic::{gcd, teichmuller_lift, FqElem, PrimeContext, WittElem};

/// How the construction's `omega` is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaChoice {
    /// The class of the generator of the defining polynomial.
    Generator,
    /// Explicit coefficients in the power basis of `F_q`.
    Coeffs(Vec<u64>),
}

/// Construction parameters of a tower.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionSpec {
    pub p: u64,
    pub f: usize,
    pub m: usize,
    pub b: usize,
    pub t: usize,
    pub omega: OmegaChoice,
    /// Defining polynomial of `F_q` (low to high); the Conway table when absent.
    pub poly: Option<Vec<u64>>,
    /// Valuation horizon in `v_N` units; the default policy when absent.
    pub horizon: Option<usize>,
}

impl ExtensionSpec {
    pub fn new(p: u64, f: usize, m: usize, b: usize, t: usize) -> Self {
        ExtensionSpec { p, f, m, b, t, omega: OmegaChoice::Generator, poly: None, horizon: None }
    }

    pub fn e_k(&self) -> usize {
        self.m * (self.p as usize - 1)
    }

    /// `p^2 e_K`, the absolute ramification index of `N` over `W`.
    pub fn n(&self) -> usize {
        let p = self.p as usize;
        p * p * self.e_k()
    }

    pub fn default_horizon(&self) -> usize {
        let p = self.p as usize;
        4 * self.n() + 2 * p * self.b
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or_else(|| self.default_horizon())
    }

    /// Coefficient exponent `M` for a given horizon: `ceil(H / n) + 3` guard digits.
    pub fn coefficient_precision(&self, horizon: usize) -> u32 {
        (horizon.div_ceil(self.n()) + 3) as u32
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidSpec(msg));
        if !crate::padic::is_prime(self.p) {
            return invalid(format!("p = {} is not prime", self.p));
        }
        if self.f == 0 {
            return invalid("f must be at least 1".into());
        }
        let p = self.p as usize;
        if self.m == 0 || gcd(self.m as u64, self.p) != 1 {
            return invalid(format!("tame index m = {} must be positive and prime to p", self.m));
        }
        if self.b == 0 || self.b >= p * self.m {
            return invalid(format!("b = {} must satisfy 0 < b < {}", self.b, p * self.m));
        }
        if self.b.is_multiple_of(p) {
            return invalid(format!("b = {} is divisible by p", self.b));
        }
        if self.t != 0 && (self.t >= self.b || self.t.is_multiple_of(p)) {
            return invalid(format!("t = {} must be 0 or prime to p with 0 < t < b", self.t));
        }
        if self.horizon == Some(0) {
            return invalid("precision horizon must be positive".into());
        }
        Ok(())
    }

    pub fn context(&self, precision: u32) -> Result<Arc<PrimeContext>> {
        let ctx = match &self.poly {
            Some(poly) => {
                if poly.len() != self.f + 1 {
                    return Err(Error::InvalidSpec(format!(
                        "defining polynomial has degree {}, expected f = {}",
                        poly.len().saturating_sub(1),
                        self.f
                    )));
                }
                PrimeContext::with_polynomial(self.p, poly, precision)
            }
            None => PrimeContext::new(self.p, self.f, precision),
        };
        ctx.map_err(|e| match e {
            crate::padic::PadicError::PrecisionOverflow { .. } => Error::InsufficientPrecision(e.to_string()),
            other => Error::InvalidSpec(other.to_string()),
        })
    }

    /// The residue `omega`, checked to lie outside `F_p`.
    pub fn omega_residue(&self, ctx: &Arc<PrimeContext>) -> Result<FqElem> {
        let omega = match &self.omega {
            OmegaChoice::Generator => FqElem::generator(ctx),
            OmegaChoice::Coeffs(c) => {
                FqElem::from_coeffs(ctx, c).map_err(|e| Error::InvalidSpec(e.to_string()))?
            }
        };
        if omega.is_zero() || omega.in_prime_field() {
            return Err(Error::InvalidSpec(format!("omega = {omega} must lie outside F_{}", self.p)));
        }
        Ok(omega)
    }
}

/// `Phi_p(1 + X^m)`, coefficients low to high.
pub fn cyclotomic_eisenstein(p: usize, m: usize) -> Vec<i64> {
    let mut poly = vec![0i64; m * (p - 1) + 1];
    for j in 0..p {
        poly[m * j] = binomial(p, j + 1) as i64;
    }
    poly
}

/// `(1 + a)^[kappa] = sum_{i < p} binom(kappa, i) a^i`.
pub fn truncated_power(a: &Elem, kappa: &WittElem) -> Elem {
    let p = a.layer().ctx().p() as usize;
    let mut acc = Elem::zero(a.layer());
    let mut pw = Elem::one(a.layer());
    for i in 0..p {
        acc = &acc + &pw.scale_witt(&kappa.binomial(i));
        pw = &pw * a;
    }
    acc
}

/// Result of stripping `p`-th powers from a principal unit: `u = r^p * unit`.
#[derive(Debug, Clone)]
pub struct KummerReduction {
    pub r: Elem,
    pub unit: Elem,
    /// `v(unit - 1)`: prime to `p`, or equal to `p n / (p - 1)`.
    pub defect: usize,
}

/// Divides a principal unit by `p`-th powers until `v(u - 1)` is prime to `p`
/// or reaches `p n / (p - 1)`.
pub fn kummer_reduce(u: &Elem) -> Result<KummerReduction> {
    let layer = u.layer().clone();
    let ctx = layer.ctx().clone();
    let p = ctx.p() as usize;
    let n = layer.n();
    let one = Elem::one(&layer);
    let pi = Elem::uniformizer(&layer);
    let mut unit = u.clone();
    let mut r = one.clone();
    if (&unit - &one).valuation_opt() == Some(0) {
        return Err(Error::Inconsistent("Kummer reduction needs a principal unit".into()));
    }
    loop {
        let w = &unit - &one;
        let d = match w.valuation_opt() {
            Some(d) => d,
            None => {
                return Err(Error::DegenerateExtension(format!(
                    "unit is a p-th power to the horizon {}",
                    w.horizon()
                )))
            }
        };
        if d % p != 0 || d * (p - 1) == p * n {
            return Ok(KummerReduction { r, unit, defect: d });
        }
        if d * (p - 1) > p * n {
            return Err(Error::DegenerateExtension(format!(
                "unit is congruent to 1 beyond valuation {} and is a p-th power",
                p * n / (p - 1)
            )));
        }
        let s = d / p;
        let a = w.residue_ratio(&pi.pow((p * s) as u64))?;
        let c = teichmuller_lift(&a.pth_root())?;
        let step = &one + &pi.pow(s as u64).scale_witt(&c);
        unit = &unit * &step.pow(p as u64).inverse()?;
        r = &r * &step;
    }
}

/// A constructed tower with its automorphisms and distinguished elements.
#[derive(Debug, Clone)]
pub struct Tower {
    pub spec: ExtensionSpec,
    pub horizon: usize,
    pub ctx: Arc<PrimeContext>,
    pub omega: FqElem,
    pub k: Arc<Layer>,
    pub l: Arc<Layer>,
    pub n: Arc<Layer>,
    /// Uniformizer of `K`.
    pub pi_k: Elem,
    /// `zeta_p` in `K`.
    pub zeta: Elem,
    pub beta: Elem,
    pub tau: Option<Elem>,
    /// The Kummer unit `(1 + beta)^[omega^p] (1 + tau)` in `K`.
    pub kummer_unit: Elem,
    /// `X = x - 1` in `L`.
    pub x: Elem,
    /// `r` in `L` with `kummer_unit = r^p u'`.
    pub r: Elem,
    /// `u'` in `L`, the defect unit of `N / L`.
    pub u_prime: Elem,
    /// `Z = Y - 1` in `N`.
    pub z: Elem,
    pub gamma_l: Automorphism,
    pub sigma: Automorphism,
    pub gamma: Automorphism,
    /// `(zeta - 1) / Z`, of valuation `b`.
    pub rho0: Elem,
}

/// Builds the tower at the spec's horizon.
pub fn construct(spec: &ExtensionSpec) -> Result<Tower> {
    construct_at(spec, spec.horizon())
}

/// Builds the tower at an explicit valuation horizon (in `v_N` units).
pub fn construct_at(spec: &ExtensionSpec, horizon: usize) -> Result<Tower> {
    spec.validate()?;
    let p = spec.p as usize;
    let (m, b, t) = (spec.m, spec.b, spec.t);
    let ctx = spec.context(spec.coefficient_precision(horizon))?;
    let omega = spec.omega_residue(&ctx)?;

    let k = Layer::eisenstein(&ctx, &cyclotomic_eisenstein(p, m))?;
    let pi = Elem::uniformizer(&k);
    let one_k = Elem::one(&k);
    let zeta = &one_k + &pi.pow(m as u64);
    let beta = pi.pow((p * m - b) as u64);
    let tau = (t > 0).then(|| pi.pow((p * m - t) as u64));

    let l = Layer::kummer(&k, &(&one_k + &beta))?;
    let one_l = Elem::one(&l);
    let x = &Elem::basis(&l, k.n()) * &pi.embed(&l)?.pow(l.denominators()[1] as u64);
    let zeta_l = zeta.embed(&l)?;
    let gamma_x = &(&zeta_l * &(&one_l + &x)) - &one_l;
    let mut images = Vec::with_capacity(l.n());
    for i in 0..p {
        let gi = gamma_x.pow(i as u64).div_parent_uniformizer_pow(l.denominators()[i])?;
        for q in 0..k.n() {
            images.push(&gi * &Elem::basis(&l, q));
        }
    }
    let gamma_l = Automorphism::from_images(&l, &images);

    let kappa = teichmuller_lift(&omega)?.pow(p as u64);
    let mut kummer_unit = truncated_power(&beta, &kappa);
    if let Some(tau) = &tau {
        kummer_unit = &kummer_unit * &(&one_k + tau);
    }
    let red = kummer_reduce(&kummer_unit.embed(&l)?)?;
    let expected = p * p * m - b;
    if red.defect != expected {
        return Err(Error::DegenerateExtension(format!(
            "defect of the second Kummer step is {}, expected {expected}",
            red.defect
        )));
    }

    let nl = Layer::kummer(&l, &red.unit)?;
    let one_n = Elem::one(&nl);
    let pi_l = Elem::uniformizer(&l);
    let z = &Elem::basis(&nl, l.n()) * &pi_l.embed(&nl)?.pow(nl.denominators()[1] as u64);
    let zeta_n = zeta_l.embed(&nl)?;

    let sigma_z = &(&zeta_n * &(&one_n + &z)) - &one_n;
    let mut images = Vec::with_capacity(nl.n());
    for i in 0..p {
        let si = sigma_z.pow(i as u64).div_parent_uniformizer_pow(nl.denominators()[i])?;
        for q in 0..l.n() {
            images.push(&si * &Elem::basis(&nl, q));
        }
    }
    let sigma = Automorphism::from_images(&nl, &images);

    let ratio = red.r.div_exact(&gamma_l.apply(&red.r))?;
    let gamma_z = &(&(&one_n + &z) * &ratio.embed(&nl)?) - &one_n;
    let c_inv = gamma_l.apply(&pi_l).div_exact(&pi_l)?.inverse()?;
    let mut images = Vec::with_capacity(nl.n());
    for i in 0..p {
        let ki = nl.denominators()[i];
        let gi = &gamma_z.pow(i as u64).div_parent_uniformizer_pow(ki)? * &c_inv.pow(ki as u64).embed(&nl)?;
        for q in 0..l.n() {
            images.push(&gi * &gamma_l.apply(&Elem::basis(&l, q)).embed(&nl)?);
        }
    }
    let gamma = Automorphism::from_images(&nl, &images);

    // guard digits stay internal: exported data is known only to the horizon
    let known = horizon.div_ceil(nl.n()).max(1) as u32;
    let truncate = |a: &Automorphism| Automorphism::from_matrix(&nl, a.matrix().clone().with_digits(known));
    let (sigma, gamma) = (truncate(&sigma), truncate(&gamma));

    let rho0 = (&zeta_n - &one_n).div_exact(&z)?.with_digits(known);
    let v = rho0.valuation()?;
    if v != b {
        return Err(Error::Inconsistent(format!("v_N(rho0) = {v}, expected {b}")));
    }

    Ok(Tower {
        spec: spec.clone(),
        horizon,
        ctx,
        omega,
        k,
        l,
        n: nl,
        pi_k: pi,
        zeta,
        beta,
        tau,
        kummer_unit,
        x,
        r: red.r,
        u_prime: red.unit,
        z,
        gamma_l,
        sigma,
        gamma,
        rho0,
    })
}

/// Outcome of a computation run under the precision policy.
#[derive(Debug, Clone)]
pub struct Retried<T> {
    pub value: T,
    pub horizon: usize,
    pub attempts: usize,
}

/// Runs `f` on a tower at the spec's horizon; on `InsufficientPrecision`,
/// doubles the horizon and retries once.
pub fn with_precision_retry<T>(
    spec: &ExtensionSpec,
    f: impl Fn(&Tower) -> Result<T>,
) -> Result<Retried<T>> {
    spec.validate()?;
    let mut horizon = spec.horizon();
    let mut attempts = 0;
    loop {
        attempts += 1;
        let result = construct_at(spec, horizon).and_then(|tower| f(&tower));
        match result {
            Err(Error::InsufficientPrecision(_)) if attempts == 1 => horizon *= 2,
            Err(e) => return Err(e),
            Ok(value) => return Ok(Retried { value, horizon, attempts }),
        }
    }
}

impl Tower {
    pub fn p(&self) -> usize {
        self.spec.p as usize
    }

    pub fn e_k(&self) -> usize {
        self.spec.e_k()
    }

    pub fn b(&self) -> usize {
        self.spec.b
    }

    /// Lifts an element of `K` or `L` into `N`.
    pub fn to_n(&self, a: &Elem) -> Result<Elem> {
        if Arc::ptr_eq(a.layer(), &self.n) {
            return Ok(a.clone());
        }
        if Arc::ptr_eq(a.layer(), &self.l) {
            return a.embed(&self.n);
        }
        if Arc::ptr_eq(a.layer(), &self.k) {
            return a.embed(&self.l)?.embed(&self.n);
        }
        Err(Error::Inconsistent("element does not belong to this tower".into()))
    }

    /// `Y = 1 + Z`, the Kummer generator of `N / L`.
    pub fn y(&self) -> Elem {
        &Elem::one(&self.n) + &self.z
    }

    /// All `p^2` automorphisms `gamma^i sigma^j`, indexed `i * p + j`.
    pub fn group(&self) -> Vec<Automorphism> {
        let p = self.p();
        let mut out = Vec::with_capacity(p * p);
        let mut gi = Automorphism::identity(&self.n);
        for _ in 0..p {
            let mut g = gi.clone();
            for _ in 0..p {
                out.push(g.clone());
                g = g.compose(&self.sigma);
            }
            gi = gi.compose(&self.gamma);
        }
        out
    }

    /// `Norm_{N/K}(a)` as an element of `K`.
    pub fn norm_to_k(&self, a: &Elem) -> Result<Elem> {
        let mut acc = Elem::one(&self.n);
        for g in self.group() {
            acc = &acc * &g.apply(a);
        }
        acc.restrict()?.restrict()
    }

    /// `v_N(a)` computed independently as `v_K(Norm_{N/K}(a))`.
    pub fn valuation_by_norm(&self, a: &Elem) -> Result<usize> {
        self.norm_to_k(a)?.valuation()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eisenstein_polynomials() {
        assert_eq!(cyclotomic_eisenstein(3, 1), vec![3, 3, 1]);
        assert_eq!(cyclotomic_eisenstein(3, 2), vec![3, 0, 3, 0, 1]);
        assert_eq!(cyclotomic_eisenstein(2, 3), vec![2, 0, 0, 1]);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = [
            ExtensionSpec::new(3, 2, 1, 3, 0),
            ExtensionSpec::new(3, 2, 1, 4, 0),
            ExtensionSpec::new(3, 2, 3, 2, 0),
            ExtensionSpec::new(3, 2, 1, 2, 2),
            ExtensionSpec::new(4, 2, 1, 1, 0),
            ExtensionSpec::new(3, 1, 1, 2, 0),
        ];
        for spec in &bad {
            assert!(matches!(construct(spec), Err(Error::InvalidSpec(_))), "{spec:?}");
        }
        let mut spec = ExtensionSpec::new(2, 2, 1, 1, 0);
        spec.omega = OmegaChoice::Coeffs(vec![1, 0]);
        assert!(matches!(construct(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn smallest_tower_valuations() {
        let tower = construct(&ExtensionSpec::new(2, 2, 1, 1, 0)).unwrap();
        let one = Elem::one(&tower.n);
        assert_eq!((&tower.to_n(&tower.zeta).unwrap() - &one).valuation().unwrap(), 4);
        assert_eq!(tower.z.valuation().unwrap(), 3);
        assert_eq!(tower.rho0.valuation().unwrap(), 1);
    }

    #[test]
    fn kummer_reduce_cases() {
        let tower = construct(&ExtensionSpec::new(3, 2, 1, 2, 0)).unwrap();
        let l = &tower.l;
        let pi = Elem::uniformizer(l);
        let one = Elem::one(l);
        let u = &one + &pi;
        let fixed = kummer_reduce(&u).unwrap();
        assert_eq!(fixed.defect, 1);
        assert!(fixed.r.agrees_with(&one));
        assert!(fixed.unit.agrees_with(&u));
        let cube = (&one + &pi).pow(3);
        assert!(matches!(kummer_reduce(&cube), Err(Error::DegenerateExtension(_))));
    }
}
