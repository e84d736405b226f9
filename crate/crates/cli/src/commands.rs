//! The subcommands. Each returns the rendered body plus notes for stderr.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use refram::breaks::{
    break_is_admissible, canonicity_check, enumerate_realizable, ramification_bound_violations, region_grid,
    second_break_formula, second_break_oracle, valid_breaks, BreakReport, Classification, RegionPoint,
};
use refram::modules::{ap_formula, jordan_oracle, mrr_consistency, JordanType, MrrConsistency};
use refram::padic::gcd;
use refram::tower::{with_precision_retry, ExtensionSpec, Retried, Tower};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub body: String,
    /// Diagnostics for stderr.
    pub notes: Vec<String>,
    /// Set when a check failed; maps to exit code 1.
    pub failed: bool,
}

fn retry_note<T>(spec: &ExtensionSpec, r: &Retried<T>) -> Vec<String> {
    if r.attempts > 1 {
        vec![format!("horizon {} was insufficient; succeeded at horizon {}", spec.horizon(), r.horizon)]
    } else {
        Vec::new()
    }
}

fn to_json<T: Serialize>(x: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(x)? + "\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreakJson {
    pub b: usize,
    pub omega: String,
    pub orbit: Vec<String>,
    pub b_star_oracle: usize,
    pub b_star_formula: usize,
    pub classification: Classification,
    pub agree: bool,
}

pub fn cmd_break(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = cfg.extension_spec()?;
    let formula = second_break_formula(spec.b, spec.t, spec.e_k(), spec.p as usize)?;
    let run = with_precision_retry(&spec, second_break_oracle)?;
    let rep: &BreakReport = &run.value;
    let out = BreakJson {
        b: rep.b,
        omega: rep.omega_detected.to_string(),
        orbit: rep.orbit.iter().map(|x| x.to_string()).collect(),
        b_star_oracle: rep.b_star,
        b_star_formula: formula,
        classification: rep.classification,
        agree: rep.b_star == formula,
    };
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out)?,
        Format::Csv => format!(
            "b,t,omega,b_star_oracle,b_star_formula,classification,agree\n{},{},{},{},{},{},{}\n",
            out.b,
            spec.t,
            out.omega,
            out.b_star_oracle,
            out.b_star_formula,
            out.classification.as_str(),
            out.agree
        ),
        Format::Text => format!(
            "b = {}, t = {}\nomega = {}\norbit = {{{}}}\nb_* = {} (oracle), {} (formula)\nclassification = {}\n",
            out.b,
            spec.t,
            out.omega,
            out.orbit.join(", "),
            out.b_star_oracle,
            out.b_star_formula,
            out.classification.as_str()
        ),
    };
    Ok(Output { body, notes: retry_note(&spec, &run), failed: !out.agree })
}

pub fn cmd_enumerate(cfg: &RunConfig) -> Result<Output, CliError> {
    let values = enumerate_realizable(cfg.require_b()?, cfg.closed_form_e_k(), cfg.p as usize)?;
    let body = match cfg.format.unwrap_or(Format::Text) {
        Format::Json => to_json(&values)?,
        Format::Csv => std::iter::once("b_star".to_string())
            .chain(values.iter().map(|n| n.to_string()))
            .map(|l| l + "\n")
            .collect(),
        Format::Text => values.iter().map(|n| format!("{n}\n")).collect(),
    };
    Ok(Output { body, ..Output::default() })
}

pub fn cmd_region(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.p as usize;
    let e_k = cfg.closed_form_e_k();
    let points: Vec<RegionPoint> = region_grid(e_k, p, cfg.b_max.unwrap_or(p * e_k));
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&points)?,
        Format::Csv => std::iter::once("b,t,b_star,region".to_string())
            .chain(points.iter().map(|x| format!("{},{},{},{}", x.b, x.t, x.b_star, x.region.as_str())))
            .map(|l| l + "\n")
            .collect(),
        Format::Text => points
            .iter()
            .map(|x| format!("b={:<3} t={:<3} b_*={:<4} {}\n", x.b, x.t, x.b_star, x.region.as_str()))
            .collect(),
    };
    Ok(Output { body, ..Output::default() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecJson {
    pub p: u64,
    pub f: usize,
    pub m: usize,
    pub b: usize,
    pub t: usize,
    #[serde(rename = "eK")]
    pub e_k: usize,
    pub b_star: usize,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModuleJson {
    pub spec: SpecJson,
    pub r: i64,
    pub jordan: Vec<usize>,
    pub ap_formula: i64,
    pub mrr_multiplicities: Option<Vec<i64>>,
    pub note: Option<String>,
    #[serde(rename = "match")]
    pub matches: bool,
}

struct ModuleRun {
    report: BreakReport,
    jordan: JordanType,
    mrr: Option<MrrConsistency>,
}

fn module_run(tower: &Tower, r: i64) -> refram::Result<ModuleRun> {
    let report = second_break_oracle(tower)?;
    let jordan = jordan_oracle(tower, r)?;
    let mrr = if report.classification == Classification::Mrr { Some(mrr_consistency(tower, r)?) } else { None };
    Ok(ModuleRun { report, jordan, mrr })
}

pub fn cmd_modules(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = cfg.extension_spec()?;
    spec.validate()?;
    let n = spec.n() as i64;
    let r = cfg.r.rem_euclid(n);
    let run = with_precision_retry(&spec, |tw| module_run(tw, r))?;
    let ModuleRun { report, jordan, mrr } = &run.value;
    let p = spec.p as usize;
    let formula = ap_formula(r, spec.b, report.b_star, spec.e_k(), p)?;
    let mrr_ok = mrr.as_ref().is_none_or(|c| c.matches());
    let out = ModuleJson {
        spec: SpecJson {
            p: spec.p,
            f: spec.f,
            m: spec.m,
            b: spec.b,
            t: spec.t,
            e_k: spec.e_k(),
            b_star: report.b_star,
            classification: report.classification,
        },
        r,
        jordan: jordan.a.clone(),
        ap_formula: formula,
        mrr_multiplicities: mrr.as_ref().map(|c| c.multiplicities.m.clone()),
        note: mrr.is_none().then(|| {
            format!("{} tower: the ideal decomposition needs b_* = pb", report.classification.as_str())
        }),
        matches: jordan.a_p() as i64 == formula && mrr_ok,
    };
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let js: Vec<String> = out.jordan.iter().map(|x| x.to_string()).collect();
            format!(
                "p,f,m,b,t,b_star,r,jordan,ap_formula,match\n{},{},{},{},{},{},{},{},{},{}\n",
                spec.p,
                spec.f,
                spec.m,
                spec.b,
                spec.t,
                report.b_star,
                r,
                js.join(" "),
                formula,
                out.matches
            )
        }
        Format::Text => {
            let mut s = format!(
                "b_* = {} ({})\nr = {r}\njordan = {:?}\na_p = {} (formula {formula})\n",
                report.b_star,
                report.classification.as_str(),
                out.jordan,
                jordan.a_p()
            );
            match &out.mrr_multiplicities {
                Some(m) => s += &format!("mrr multiplicities = {m:?}\n"),
                None => s += &format!("note: {}\n", out.note.as_deref().unwrap_or_default()),
            }
            s += &format!("match = {}\n", out.matches);
            s
        }
    };
    Ok(Output { body, notes: retry_note(&spec, &run), failed: !out.matches })
}

/// Outcome of all checks on one grid cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseResult {
    pub p: u64,
    pub m: usize,
    pub b: usize,
    pub t: usize,
    pub b_star_oracle: Option<usize>,
    pub b_star_formula: usize,
    /// `(agreeing, total)` over `r in 0..p^2 e_K`.
    pub ap: (usize, usize),
    pub mrr: (usize, usize),
    pub admissible: bool,
    pub bound: bool,
    pub canonical: bool,
    pub error: Option<String>,
    pub pass: bool,
}

impl CaseResult {
    fn line(&self) -> String {
        let oracle = self.b_star_oracle.map_or("-".to_string(), |x| x.to_string());
        let mut s = format!(
            "p={} m={} b={:<2} t={:<2} b_*={:>2}/{:<2} a_p {:>3}/{:<3} mrr {:>3}/{:<3} congruence {} bound {} canonical {} {}",
            self.p,
            self.m,
            self.b,
            self.t,
            oracle,
            self.b_star_formula,
            self.ap.0,
            self.ap.1,
            self.mrr.0,
            self.mrr.1,
            ok(self.admissible),
            ok(self.bound),
            ok(self.canonical),
            if self.pass { "PASS" } else { "FAIL" }
        );
        if let Some(e) = &self.error {
            s += &format!(" ({e})");
        }
        s
    }
}

fn ok(x: bool) -> &'static str {
    if x {
        "ok"
    } else {
        "no"
    }
}

/// Every constructible `(p, m, b, t)` in the grid, in canonical order.
pub fn verify_grid(cfg: &RunConfig) -> Vec<ExtensionSpec> {
    let mut out = Vec::new();
    for &p in &cfg.primes {
        if !refram::padic::is_prime(p) {
            continue;
        }
        for &m in &cfg.ms {
            if m == 0 || gcd(m as u64, p) != 1 {
                continue;
            }
            let e_k = m * (p as usize - 1);
            for b in valid_breaks(e_k, p as usize) {
                if cfg.b_max.is_some_and(|mx| b > mx) {
                    continue;
                }
                for t in std::iter::once(0).chain((1..b).filter(|t| t % p as usize != 0)) {
                    let mut spec = ExtensionSpec::new(p, cfg.f, m, b, t);
                    spec.horizon = cfg.precision;
                    out.push(spec);
                }
            }
        }
    }
    out
}

fn verify_case(spec: &ExtensionSpec, cfg: &RunConfig, index: u64) -> CaseResult {
    let p = spec.p as usize;
    let e_k = spec.e_k();
    let fault = usize::from(cfg.inject_fault);
    let b_star_formula = second_break_formula(spec.b, spec.t, e_k, p).map_or(0, |x| x + fault);
    let mut res = CaseResult {
        p: spec.p,
        m: spec.m,
        b: spec.b,
        t: spec.t,
        b_star_oracle: None,
        b_star_formula,
        ap: (0, 0),
        mrr: (0, 0),
        admissible: false,
        bound: ramification_bound_violations(spec.b, e_k, p).is_ok_and(|v| v == 0),
        canonical: false,
        error: None,
        pass: false,
    };
    let run = with_precision_retry(spec, |tw| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index));
        let rep = second_break_oracle(tw)?;
        let canon = canonicity_check(tw, cfg.resamples, cfg.changes, &mut rng)?;
        let n = tw.n.n();
        let mut ap = (0, n);
        let mut mrr = (0, 0);
        for r in 0..n as i64 {
            let jt = jordan_oracle(tw, r)?;
            let formula = ap_formula(r, spec.b, rep.b_star, e_k, p)?;
            if jt.a_p() as i64 == formula && jt.dimension() == n {
                ap.0 += 1;
            }
            if rep.classification == Classification::Mrr {
                mrr.1 += 1;
                let c = mrr_consistency(tw, r)?;
                if c.matches() && c.multiplicities.total() == e_k as i64 {
                    mrr.0 += 1;
                }
            }
        }
        Ok((rep, canon.all_agree(), ap, mrr))
    });
    match run {
        Ok(Retried { value: (rep, canonical, ap, mrr), .. }) => {
            res.b_star_oracle = Some(rep.b_star);
            res.admissible = break_is_admissible(spec.b, rep.b_star, e_k, p);
            res.canonical = canonical;
            res.ap = ap;
            res.mrr = mrr;
            res.pass = rep.b_star == res.b_star_formula
                && res.admissible
                && res.bound
                && canonical
                && ap.0 == ap.1
                && mrr.0 == mrr.1;
        }
        Err(e) => res.error = Some(e.to_string()),
    }
    res
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifySummary {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub results: Vec<CaseResult>,
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let grid = verify_grid(cfg);
    let results: Vec<CaseResult> =
        grid.par_iter().enumerate().map(|(i, spec)| verify_case(spec, cfg, i as u64)).collect();
    let passed = results.iter().filter(|r| r.pass).count();
    let summary = VerifySummary { cases: results.len(), passed, failed: results.len() - passed, results };
    let body = match cfg.format.unwrap_or(Format::Text) {
        Format::Json => to_json(&summary)?,
        Format::Csv => std::iter::once(
            "p,m,b,t,b_star_oracle,b_star_formula,ap_ok,ap_total,mrr_ok,mrr_total,congruence,bound,canonical,pass"
                .to_string(),
        )
        .chain(summary.results.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.p,
                r.m,
                r.b,
                r.t,
                r.b_star_oracle.map_or(String::new(), |x| x.to_string()),
                r.b_star_formula,
                r.ap.0,
                r.ap.1,
                r.mrr.0,
                r.mrr.1,
                r.admissible,
                r.bound,
                r.canonical,
                r.pass
            )
        }))
        .map(|l| l + "\n")
        .collect(),
        Format::Text => {
            let mut s: String = summary.results.iter().map(|r| r.line() + "\n").collect();
            if summary.cases == 0 {
                s += "0 cases\n";
            } else {
                let noun = if summary.cases == 1 { "case" } else { "cases" };
                s += &format!("{} {noun}, {} passed, {} failed\n", summary.cases, summary.passed, summary.failed);
            }
            s
        }
    };
    Ok(Output { body, notes: Vec::new(), failed: summary.failed > 0 })
}
