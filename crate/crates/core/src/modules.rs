//! Galois module structure of the ideals `P_N^r`: the closed forms for `a_p`
//! and for the MRR decomposition, and a rank oracle on a constructed tower.

use serde::{Deserialize, Serialize};

use crate::breaks::{detect_omega, enumerate_realizable, Classification};
use crate::error::{precision, Error, Result};
use crate::field::{apply_matrix, Elem};
use crate::groupring::{theta, GroupRingElem};
use crate::linalg::{jordan_from_ranks, unipotent_ranks, FqMatrix, WMatrix};
use crate::padic::{is_prime, teichmuller_lift, WittElem};
use crate::tower::Tower;

/// `ceil(a / b)` for `b > 0`.
pub fn ceil_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

fn check_params(b: usize, e_k: usize, p: usize) -> Result<()> {
    if !is_prime(p as u64) || e_k == 0 || b == 0 || b.is_multiple_of(p) || b * (p - 1) >= p * e_k {
        return Err(Error::InvalidSpec(format!("(b, e_K, p) = ({b}, {e_k}, {p}) is not a valid break")));
    }
    Ok(())
}

/// Closed form for `a_p = dim (Theta - 1)^{p-1} P_N^r / p P_N^r`.
pub fn ap_formula(r: i64, b: usize, b_star: usize, e_k: usize, p: usize) -> Result<i64> {
    check_params(b, e_k, p)?;
    if !enumerate_realizable(b, e_k, p)?.contains(&b_star) {
        return Err(Error::InvalidSpec(format!("b_* = {b_star} is not realizable for b = {b}")));
    }
    let (bi, si, ei, pi) = (b as i64, b_star as i64, e_k as i64, p as i64);
    let head = pi * ei + ceil_div(r, pi) - ceil_div(r - bi, pi) - bi;
    let tail = if p * b_star < (p * p - p + 1) * b {
        if (si - bi) % pi != 0 {
            return Err(Error::InvalidSpec(format!("(b_* - b) / p is not integral for b_* = {b_star}")));
        }
        (si - bi) / pi
    } else {
        bi + ceil_div(r - pi * bi, pi * pi) - ceil_div(r + (pi - 1) * bi, pi * pi)
    };
    Ok(head - tail)
}

/// Multiplicities `m_s` of the ideals `I_s`, `0 <= s < p^2`, in the MRR decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrrDecomposition {
    pub m: Vec<i64>,
}

impl MrrDecomposition {
    pub fn total(&self) -> i64 {
        self.m.iter().sum()
    }

    /// `(s, m_s)` for the nonzero multiplicities.
    pub fn nonzero(&self) -> Vec<(usize, i64)> {
        self.m.iter().enumerate().filter(|(_, &x)| x != 0).map(|(s, &x)| (s, x)).collect()
    }
}

pub fn mrr_multiplicities(r: i64, b: usize, e_k: usize, p: usize) -> Result<MrrDecomposition> {
    check_params(b, e_k, p)?;
    if (p * p - 1) * b >= p * p * e_k {
        return Err(Error::InvalidSpec(format!(
            "maximal refined ramification needs (p^2 - 1) b < p^2 e_K, got b = {b}, e_K = {e_k}"
        )));
    }
    let (bi, ei, p2) = (b as i64, e_k as i64, (p * p) as i64);
    let mut m: Vec<i64> = (0..p2 - 1)
        .map(|s| ceil_div(r - (s + 1) * bi, p2) - ceil_div(r - (s + 2) * bi, p2))
        .collect();
    m.push(ei - bi + ceil_div(r, p2) - ceil_div(r - bi, p2));
    Ok(MrrDecomposition { m })
}

/// The lattice and ideal generators of `I_s` with `s = i_s p + j_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealBasis {
    pub s: usize,
    pub i_s: usize,
    pub j_s: usize,
    /// `p_multiple[i p + j]`: whether the lattice generator is `p phi_(i,j)`
    /// rather than `phi_(i,j) = (Theta - 1)^i (sigma - 1)^j`.
    pub p_multiple: Vec<bool>,
    /// Exponents `(i, j)` of `(Theta - 1)^i (sigma - 1)^j` in `<p, .., ..>`.
    pub generators: [(usize, usize); 2],
}

pub fn ideal_basis(s: usize, p: usize) -> Result<IdealBasis> {
    if s >= p * p {
        return Err(Error::InvalidSpec(format!("ideal index {s} must be below p^2 = {}", p * p)));
    }
    let (i_s, j_s) = (s / p, s % p);
    Ok(IdealBasis {
        s,
        i_s,
        j_s,
        p_multiple: (0..p * p).map(|k| k <= s).collect(),
        generators: [(i_s, j_s + 1), (i_s + 1, 0)],
    })
}

/// Jordan type `(a_1 .. a_p)` of an `F_q[Theta]`-module.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JordanType {
    pub a: Vec<usize>,
    /// `rank (Theta - 1)^i` for `i = 0..=p`.
    pub ranks: Vec<usize>,
}

impl JordanType {
    pub fn of(t: &FqMatrix, p: usize) -> Result<JordanType> {
        let mut ranks = unipotent_ranks(t, p);
        let a = jordan_from_ranks(&ranks, p)?;
        ranks.truncate(p + 1);
        Ok(JordanType { a, ranks })
    }

    /// Jordan type with the given block counts.
    pub fn from_blocks(a: Vec<usize>) -> JordanType {
        let p = a.len();
        let ranks = (0..=p).map(|i| a.iter().enumerate().map(|(k, &x)| (k + 1).saturating_sub(i) * x).sum()).collect();
        JordanType { a, ranks }
    }

    pub fn a_p(&self) -> usize {
        *self.a.last().unwrap_or(&0)
    }

    /// `sum i a_i`.
    pub fn dimension(&self) -> usize {
        self.a.iter().enumerate().map(|(i, &x)| (i + 1) * x).sum()
    }
}

/// `Theta = gamma sigma^[omega]` with `omega = -omega_{gamma,sigma}` as an
/// operator on `N`, together with the group ring element.
pub fn theta_operator(tower: &Tower) -> Result<(GroupRingElem<WittElem>, WMatrix)> {
    let g = tower.gamma.matrix();
    let s = tower.sigma.matrix();
    let omega_gs = detect_omega(&tower.rho0, g, s)?;
    let omega = teichmuller_lift(&(-&omega_gs))?;
    let th = theta(&omega);
    let op = th.operator(g, s);
    Ok((th, op))
}

/// Jordan type of `Theta` on `P_N^r / p P_N^r`, `r` taken mod `p^2 e_K`.
pub fn jordan_oracle(tower: &Tower, r: i64) -> Result<JordanType> {
    let (_, op) = theta_operator(tower)?;
    jordan_of_operator(tower, &op, r)
}

/// Jordan type of a `W`-linear operator preserving every ideal, on `P_N^r / p P_N^r`.
pub fn jordan_of_operator(tower: &Tower, op: &WMatrix, r: i64) -> Result<JordanType> {
    let n = tower.n.n();
    let r = r.rem_euclid(n as i64) as usize;
    // P^r has W-basis p^{e_k} B_k with e_k = 1 exactly when v(B_k) < r
    let exps: Vec<u32> = (0..n).map(|k| u32::from(tower.n.basis_valuation(k) < r)).collect();
    if op.digits() < 2 {
        return Err(precision("operator known to fewer than 2 digits"));
    }
    let scaled = op.rescale(&exps)?;
    JordanType::of(&scaled.reduce_mod_p(), tower.p())
}

/// Left multiplication by `x` on `W[G]` in the monomial basis `gamma^i sigma^j`.
fn left_multiplication(x: &GroupRingElem<WittElem>) -> WMatrix {
    let ctx = x.ctx().clone();
    let p = x.p();
    let cols: Vec<Vec<u64>> = (0..p * p)
        .map(|k| {
            let prod = x.mul(&GroupRingElem::monomial(&ctx, k / p, k % p));
            prod.coeffs().iter().flat_map(|c| c.coeffs().to_vec()).collect()
        })
        .collect();
    WMatrix::from_columns(&ctx, &cols, ctx.precision())
}

/// Jordan type of `Theta` on `I_s / p I_s`.
pub fn ideal_jordan_type(th: &GroupRingElem<WittElem>, s: usize) -> Result<JordanType> {
    let ctx = th.ctx().clone();
    let p = th.p();
    let basis = ideal_basis(s, p)?;
    let one = GroupRingElem::one(&ctx);
    let t = th.sub(&one);
    let y = GroupRingElem::sigma(&ctx).sub(&one);
    let cols: Vec<Vec<u64>> = (0..p * p)
        .map(|k| {
            let phi = t.pow((k / p) as u64).mul(&y.pow((k % p) as u64));
            phi.coeffs().iter().flat_map(|c| c.coeffs().to_vec()).collect()
        })
        .collect();
    let phi = WMatrix::from_columns(&ctx, &cols, ctx.precision());
    let op = phi.inverse()?.mul(&left_multiplication(th)).mul(&phi);
    let exps: Vec<u32> = basis.p_multiple.iter().map(|&b| u32::from(b)).collect();
    let scaled = op.rescale(&exps)?;
    JordanType::of(&scaled.reduce_mod_p(), p)
}

/// `dim (Theta - 1)^{p-1} I_s / p I_s` as tabulated by range of `s`.
pub fn expected_ideal_ap(s: usize, p: usize) -> usize {
    if s < p {
        p - 1
    } else if s + p < p * p {
        if s % p == p - 1 {
            p - 1
        } else {
            p - 2
        }
    } else if s + 1 < p * p {
        p - 1
    } else {
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrrConsistency {
    pub r: i64,
    pub multiplicities: MrrDecomposition,
    /// Jordan type of `sum m_s I_s` modulo `p`.
    pub predicted: JordanType,
    pub oracle: JordanType,
    /// `a_p(I_s)` for `s = 0 .. p^2 - 1`.
    pub ideal_ap: Vec<usize>,
    pub table_matches: bool,
}

impl MrrConsistency {
    pub fn matches(&self) -> bool {
        self.predicted == self.oracle && self.table_matches
    }
}

/// Compares the oracle Jordan type of `P_N^r` with the one predicted by the
/// MRR decomposition.
pub fn mrr_consistency(tower: &Tower, r: i64) -> Result<MrrConsistency> {
    let p = tower.p();
    let report = crate::breaks::second_break_oracle(tower)?;
    if report.classification != Classification::Mrr {
        return Err(Error::InvalidSpec("tower does not have maximal refined ramification".into()));
    }
    let r = r.rem_euclid(tower.n.n() as i64);
    let multiplicities = mrr_multiplicities(r, tower.b(), tower.e_k(), p)?;
    let (th, op) = theta_operator(tower)?;
    let oracle = jordan_of_operator(tower, &op, r)?;
    let mut predicted = vec![0usize; p];
    let mut ideal_ap = Vec::with_capacity(p * p);
    let mut table_matches = true;
    for s in 0..p * p {
        let jt = ideal_jordan_type(&th, s)?;
        ideal_ap.push(jt.a_p());
        table_matches &= jt.a_p() == expected_ideal_ap(s, p);
        let ms = multiplicities.m[s];
        if ms < 0 {
            return Err(Error::Inconsistent(format!("negative multiplicity m_{s} = {ms}")));
        }
        for (acc, x) in predicted.iter_mut().zip(&jt.a) {
            *acc += ms as usize * x;
        }
    }
    Ok(MrrConsistency {
        r,
        multiplicities,
        predicted: JordanType::from_blocks(predicted),
        oracle,
        ideal_ap,
        table_matches,
    })
}

/// `v_N((Theta - 1)^i (sigma - 1)^j rho)` for `0 <= i, j < p`, indexed `i p + j`.
pub fn filtration_valuations(tower: &Tower, rho: &Elem) -> Result<Vec<usize>> {
    let p = tower.p();
    let (_, op) = theta_operator(tower)?;
    let id = WMatrix::identity(&tower.ctx, tower.n.n());
    let t = op.sub(&id);
    let y = tower.sigma.matrix().sub(&id);
    let mut out = Vec::with_capacity(p * p);
    let mut row = rho.clone();
    for _ in 0..p {
        let mut x = row.clone();
        for _ in 0..p {
            out.push(x.valuation()?);
            x = apply_matrix(&y, &x);
        }
        row = apply_matrix(&t, &row);
    }
    Ok(out)
}
