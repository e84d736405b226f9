//! The refined break `b_*`: brute force on a constructed tower, closed form,
//! realizable values, and the `PGL_2(F_p)` action on `omega`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{apply_matrix, Elem};
use crate::groupring::{theta, GroupRingElem};
use crate::linalg::WMatrix;
use crate::padic::{gcd, is_prime, teichmuller_lift, FqElem, WittElem};
use crate::tower::Tower;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "MRR")]
    Mrr,
    #[serde(rename = "NMRR")]
    Nmrr,
    #[serde(rename = "ORDINARY")]
    Ordinary,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Mrr => "MRR",
            Classification::Nmrr => "NMRR",
            Classification::Ordinary => "ORDINARY",
        }
    }
}

/// MRR when `b_* = pb`; NMRR when `(p - 1 + 1/p) b < b_* < pb`.
pub fn classify(b: usize, b_star: usize, p: usize) -> Classification {
    if b_star == p * b {
        Classification::Mrr
    } else if b_star < p * b && p * b_star > (p * p - p + 1) * b {
        Classification::Nmrr
    } else {
        Classification::Ordinary
    }
}

fn check_break(b: usize, e_k: usize, p: usize) -> Result<()> {
    if !is_prime(p as u64) {
        return Err(Error::InvalidSpec(format!("p = {p} is not prime")));
    }
    if e_k == 0 {
        return Err(Error::InvalidSpec("e_K must be positive".into()));
    }
    if b == 0 || b * (p - 1) >= p * e_k || b.is_multiple_of(p) {
        return Err(Error::InvalidSpec(format!(
            "b = {b} must be prime to p with 0 < b < p e_K / (p - 1) for e_K = {e_k}"
        )));
    }
    Ok(())
}

/// `pb - max{(p^2 - 1) b - p^2 e_K, pt - b, 0}`.
pub fn second_break_formula(b: usize, t: usize, e_k: usize, p: usize) -> Result<usize> {
    check_break(b, e_k, p)?;
    if t != 0 && (t >= b || t.is_multiple_of(p)) {
        return Err(Error::InvalidSpec(format!("t = {t} must be 0 or prime to p with 0 < t < b")));
    }
    let (b, t, e_k, p) = (b as i64, t as i64, e_k as i64, p as i64);
    let drop = ((p * p - 1) * b - p * p * e_k).max(p * t - b).max(0);
    Ok((p * b - drop) as usize)
}

/// `U = pb - max{(p^2 - 1) b - p^2 e_K, 0}`, the largest realizable `b_*`.
pub fn realizable_upper(b: usize, e_k: usize, p: usize) -> Result<usize> {
    check_break(b, e_k, p)?;
    let over = ((p * p - 1) * b).saturating_sub(p * p * e_k);
    Ok(p * b - over)
}

/// All `n` with `b < n <= U` and either `n = U`, or `n = b mod p` and `n != (1 + p) b mod p^2`.
pub fn enumerate_realizable(b: usize, e_k: usize, p: usize) -> Result<Vec<usize>> {
    let upper = realizable_upper(b, e_k, p)?;
    let p2 = p * p;
    Ok((b + 1..=upper)
        .filter(|&n| n == upper || (n % p == b % p && n % p2 != ((1 + p) * b) % p2))
        .collect())
}

/// The congruence conditions every `b_* < U` must satisfy; `U` itself is exempt.
pub fn congruence_law_holds(b: usize, b_star: usize, e_k: usize, p: usize) -> bool {
    realizable_upper(b, e_k, p).is_ok_and(|u| b_star == u)
        || (b_star % p == b % p && b_star % (p * p) != ((1 + p) * b) % (p * p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `b_* = pb`
    Max,
    /// `b_* = b + p(b - t)`
    Twist,
    /// `b_* = b + p(p e_K - (p - 1) b)`
    Ramification,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Max => "max",
            Region::Twist => "twist",
            Region::Ramification => "ramification",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub b: usize,
    pub t: usize,
    pub b_star: usize,
    pub region: Region,
}

/// The formula value of `b_*` with its region label for every valid
/// `(b, t)` with `b <= b_max`. Ties go to `max`, then `twist`.
pub fn region_grid(e_k: usize, p: usize, b_max: usize) -> Vec<RegionPoint> {
    let mut out = Vec::new();
    for b in 1..=b_max {
        if check_break(b, e_k, p).is_err() {
            continue;
        }
        for t in std::iter::once(0).chain((1..b).filter(|t| t % p != 0)) {
            let Ok(b_star) = second_break_formula(b, t, e_k, p) else {
                continue;
            };
            let (bi, ti, ei, pi) = (b as i64, t as i64, e_k as i64, p as i64);
            let ram = (pi * pi - 1) * bi - pi * pi * ei;
            let twist = pi * ti - bi;
            let region = if ram <= 0 && twist <= 0 {
                Region::Max
            } else if twist >= ram {
                Region::Twist
            } else {
                Region::Ramification
            };
            out.push(RegionPoint { b, t, b_star, region });
        }
    }
    out
}

/// An invertible 2x2 matrix over `F_p`, rows `[[a, b], [c, d]]`.
pub type Mat2 = [[u64; 2]; 2];

pub fn mat2_mul(x: &Mat2, y: &Mat2, p: u64) -> Mat2 {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (x[i][0] * y[0][j] + x[i][1] * y[1][j]) % p;
        }
    }
    out
}

pub fn mat2_det(x: &Mat2, p: u64) -> u64 {
    (x[0][0] * x[1][1] % p + p - x[0][1] * x[1][0] % p) % p
}

/// All of `GL_2(F_p)`.
pub fn gl2(p: u64) -> Vec<Mat2> {
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    let m = [[a, b], [c, d]];
                    if mat2_det(&m, p) != 0 {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// `(a omega + b) / (c omega + d)`.
pub fn mobius_transform(omega: &FqElem, m: &Mat2) -> Result<FqElem> {
    let ctx = omega.ctx();
    let p = ctx.p();
    if mat2_det(m, p) == 0 {
        return Err(Error::SingularMatrix);
    }
    let k = |x: u64| FqElem::from_int(ctx, x as i64);
    let num = &(&k(m[0][0]) * omega) + &k(m[0][1]);
    let den = &(&k(m[1][0]) * omega) + &k(m[1][1]);
    let inv = den
        .inverse()
        .map_err(|_| Error::InvalidSpec(format!("omega = {omega} lies in F_{p}")))?;
    Ok(&num * &inv)
}

/// The `PGL_2(F_p)` orbit of `omega`, sorted by coefficient vector.
pub fn orbit_pgl2(omega: &FqElem) -> Result<Vec<FqElem>> {
    if omega.in_prime_field() {
        return Err(Error::InvalidSpec(format!("omega = {omega} lies in F_{}", omega.ctx().p())));
    }
    let mut out: Vec<FqElem> = gl2(omega.ctx().p())
        .iter()
        .map(|m| mobius_transform(omega, m))
        .collect::<Result<_>>()?;
    out.sort_by_key(|x| x.index());
    out.dedup();
    Ok(out)
}

/// Matrices of `gamma^a sigma^b` and `gamma^c sigma^d` for `m = [[a, b], [c, d]]`.
pub fn changed_generators(tower: &Tower, m: &Mat2) -> (WMatrix, WMatrix) {
    let g = tower.gamma.matrix();
    let s = tower.sigma.matrix();
    let new_gamma = g.pow(m[0][0]).mul(&s.pow(m[0][1]));
    let new_sigma = g.pow(m[1][0]).mul(&s.pow(m[1][1]));
    (new_gamma, new_sigma)
}

fn minus_one(a: &WMatrix) -> WMatrix {
    a.sub(&WMatrix::identity(a.ctx(), a.rows()))
}

/// The residue `omega_{gamma,sigma}` of `(gamma - 1) rho / (sigma - 1) rho`,
/// checked to satisfy `v((gamma - 1) rho - [omega] (sigma - 1) rho) > v((sigma - 1) rho)`
/// and to lie outside `F_p`.
pub fn detect_omega(rho: &Elem, gamma: &WMatrix, sigma: &WMatrix) -> Result<FqElem> {
    let a = apply_matrix(&minus_one(gamma), rho);
    let s = apply_matrix(&minus_one(sigma), rho);
    let (vs, rs) = s.leading_residue()?;
    let va = a.valuation()?;
    if va < vs {
        return Err(Error::Inconsistent(format!("v((gamma - 1) rho) = {va} < v((sigma - 1) rho) = {vs}")));
    }
    let omega = &a.graded_residue(vs) * &rs.inverse()?;
    if omega.in_prime_field() {
        return Err(Error::Inconsistent(format!("omega_(gamma,sigma) = {omega} lies in the prime field")));
    }
    let check = &a - &s.scale_witt(&teichmuller_lift(&omega)?);
    if check.valuation_opt().is_some_and(|v| v <= vs) {
        return Err(Error::Inconsistent("leading terms did not cancel".into()));
    }
    if check.valuation_opt().is_none() && check.horizon() <= vs + 1 {
        return Err(crate::error::precision("cannot confirm the cancellation of leading terms"));
    }
    Ok(omega)
}

/// `v((Theta - 1) rho) - v(rho)` for `Theta = gamma sigma^[omega]`.
pub fn refined_jump(rho: &Elem, gamma: &WMatrix, sigma: &WMatrix, omega: &WittElem) -> Result<usize> {
    let th = theta(omega).operator(gamma, sigma);
    let image = apply_matrix(&minus_one(&th), rho);
    let v = image.valuation()?;
    Ok(v - rho.valuation()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakReport {
    pub b: usize,
    pub omega_detected: FqElem,
    pub orbit: Vec<FqElem>,
    pub b_star: usize,
    pub classification: Classification,
}

/// Detected `omega_{gamma,sigma}` and `b_*` for the given generators and `rho`.
pub fn break_for(rho: &Elem, gamma: &WMatrix, sigma: &WMatrix) -> Result<(FqElem, usize)> {
    let omega_gs = detect_omega(rho, gamma, sigma)?;
    let omega = teichmuller_lift(&(-&omega_gs))?;
    Ok((omega_gs, refined_jump(rho, gamma, sigma, &omega)?))
}

/// Brute-force `b_*` on the tower with `rho = rho0` and the construction's generators.
pub fn second_break_oracle(tower: &Tower) -> Result<BreakReport> {
    let (omega_detected, b_star) = break_for(&tower.rho0, tower.gamma.matrix(), tower.sigma.matrix())?;
    let b = tower.b();
    Ok(BreakReport {
        b,
        orbit: orbit_pgl2(&omega_detected)?,
        omega_detected,
        b_star,
        classification: classify(b, b_star, tower.p()),
    })
}

/// `pi_K^k rho0 (1 + c Pi_N^j)` with `c` a random Teichmüller unit and `j >= 1`.
pub fn resample_rho<R: Rng>(tower: &Tower, k: usize, j: usize, rng: &mut R) -> Result<Elem> {
    let ctx = &tower.ctx;
    let units: Vec<FqElem> = FqElem::all(ctx).into_iter().filter(|x| !x.is_zero()).collect();
    let c = teichmuller_lift(&units[rng.gen_range(0..units.len())])?;
    let one = Elem::one(&tower.n);
    let pert = &one + &Elem::uniformizer(&tower.n).pow(j as u64).scale_witt(&c);
    let shift = tower.to_n(&tower.pi_k.pow(k as u64))?;
    Ok(&(&tower.rho0 * &shift) * &pert)
}

/// A uniformly random element of `GL_2(F_p)`.
pub fn random_gl2<R: Rng>(p: u64, rng: &mut R) -> Mat2 {
    loop {
        let m = [[rng.gen_range(0..p), rng.gen_range(0..p)], [rng.gen_range(0..p), rng.gen_range(0..p)]];
        if mat2_det(&m, p) != 0 {
            return m;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicityReport {
    pub b_star: usize,
    /// `b_*` recomputed for each resampled `rho`.
    pub resampled: Vec<usize>,
    /// `(matrix, b_*, omega matches the Möbius law)` for each generator change.
    pub generator_changes: Vec<(Mat2, usize, bool)>,
}

impl CanonicityReport {
    pub fn all_agree(&self) -> bool {
        self.resampled.iter().all(|&x| x == self.b_star)
            && self.generator_changes.iter().all(|(_, x, ok)| *x == self.b_star && *ok)
    }
}

/// Recomputes `b_*` for resampled `rho` and random changes of generators.
pub fn canonicity_check<R: Rng>(
    tower: &Tower,
    resamples: usize,
    changes: usize,
    rng: &mut R,
) -> Result<CanonicityReport> {
    let g = tower.gamma.matrix();
    let s = tower.sigma.matrix();
    let (omega0, b_star) = break_for(&tower.rho0, g, s)?;
    let mut resampled = Vec::with_capacity(resamples);
    for i in 0..resamples {
        let rho = resample_rho(tower, i % 2, 1 + rng.gen_range(0..tower.n.n()), rng)?;
        resampled.push(break_for(&rho, g, s)?.1);
    }
    let p = tower.spec.p;
    let mut generator_changes = Vec::with_capacity(changes);
    for _ in 0..changes {
        let m = random_gl2(p, rng);
        let (g2, s2) = changed_generators(tower, &m);
        let (omega, b2) = break_for(&tower.rho0, &g2, &s2)?;
        let ok = omega == mobius_transform(&omega0, &m)?;
        generator_changes.push((m, b2, ok));
    }
    Ok(CanonicityReport { b_star, resampled, generator_changes })
}

/// `b < b_* <= U <= pb` together with the congruence law.
pub fn break_is_admissible(b: usize, b_star: usize, e_k: usize, p: usize) -> bool {
    realizable_upper(b, e_k, p).is_ok_and(|u| b < b_star && b_star <= u && u <= p * b)
        && congruence_law_holds(b, b_star, e_k, p)
}

/// Zero when `p b_* - b < p^2 e_K` holds for every realizable `b_*`; otherwise
/// the number of violations.
pub fn ramification_bound_violations(b: usize, e_k: usize, p: usize) -> Result<usize> {
    Ok(enumerate_realizable(b, e_k, p)?
        .into_iter()
        .filter(|&n| p * n - b >= p * p * e_k)
        .count())
}

/// Valid `b` for given `(e_K, p)`.
pub fn valid_breaks(e_k: usize, p: usize) -> Vec<usize> {
    (1..)
        .take_while(|b| b * (p - 1) < p * e_k)
        .filter(|b| gcd(*b as u64, p as u64) == 1)
        .collect()
}

/// Image of `a` under the group ring element `x`.
pub fn group_ring_image(tower: &Tower, x: &GroupRingElem<WittElem>, a: &Elem) -> Elem {
    apply_matrix(&x.operator(tower.gamma.matrix(), tower.sigma.matrix()), a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrimeContext;

    #[test]
    fn formula_examples() {
        assert_eq!(second_break_formula(2, 1, 2, 3).unwrap(), 5);
        assert_eq!(second_break_formula(5, 4, 4, 3).unwrap(), 8);
        assert_eq!(second_break_formula(1, 0, 1, 2).unwrap(), 2);
        assert!(second_break_formula(3, 0, 2, 3).is_err());
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_realizable(2, 2, 3).unwrap(), vec![5, 6]);
        assert_eq!(enumerate_realizable(5, 4, 3).unwrap(), vec![8, 11]);
        assert_eq!(enumerate_realizable(1, 2, 3).unwrap(), vec![3]);
        assert_eq!(enumerate_realizable(1, 1, 2).unwrap(), vec![2]);
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify(2, 6, 3), Classification::Mrr);
        assert_eq!(classify(2, 5, 3), Classification::Nmrr);
        assert_eq!(classify(5, 11, 3), Classification::Ordinary);
        assert_eq!(classify(5, 8, 3), Classification::Ordinary);
    }

    #[test]
    fn region_examples() {
        let grid = region_grid(2, 3, 2);
        assert!(grid.contains(&RegionPoint { b: 2, t: 0, b_star: 6, region: Region::Max }));
        assert!(grid.contains(&RegionPoint { b: 2, t: 1, b_star: 5, region: Region::Twist }));
    }

    #[test]
    fn mobius_basics() {
        let ctx = PrimeContext::new(2, 2, 1).unwrap();
        let u = FqElem::generator(&ctx);
        assert_eq!(mobius_transform(&u, &[[1, 0], [0, 1]]).unwrap(), u);
        assert_eq!(mobius_transform(&u, &[[1, 1], [0, 1]]).unwrap(), &u + &FqElem::one(&ctx));
        assert_eq!(mobius_transform(&u, &[[1, 1], [1, 1]]), Err(Error::SingularMatrix));
        assert_eq!(orbit_pgl2(&u).unwrap(), vec![u.clone(), &u + &FqElem::one(&ctx)]);
    }

    #[test]
    fn mobius_group_law_over_f4() {
        let ctx = PrimeContext::new(2, 2, 1).unwrap();
        let u = FqElem::generator(&ctx);
        for w in [u.clone(), &u + &FqElem::one(&ctx)] {
            for m1 in gl2(2) {
                for m2 in gl2(2) {
                    let lhs = mobius_transform(&mobius_transform(&w, &m1).unwrap(), &m2).unwrap();
                    let rhs = mobius_transform(&w, &mat2_mul(&m2, &m1, 2)).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}
