//! Verification suites: exact identities and statistical cross-checks with a
//! pass/fail line per check.

use std::fmt::Write;

use floquet_core::circuit::{standard_orderings, Boundary, FloquetModel, OrderingKind};
use floquet_core::moments::{
    fourth_moment_exact, second_moment_deviation, second_moment_exact, sff2_from_channel,
    FloquetPattern,
};
use floquet_core::perm::CycleType;
use floquet_core::rng::derive_stream;
use floquet_core::spectra::{sff_mc, SffEstimate};
use floquet_core::weingarten::{asymptotic_check, parse_table, solve_table, to_f64};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::report::{fmt_f64, Z_THRESHOLD};
use crate::run::CliError;

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Weingarten,
    Moments,
    Ordering,
    Asymptotics,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Weingarten => "weingarten",
            Suite::Moments => "moments",
            Suite::Ordering => "ordering",
            Suite::Asymptotics => "asymptotics",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            suite,
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// CSV with columns `suite,check,status,detail`.
pub fn checks_to_csv(checks: &[Check]) -> String {
    let mut out = String::from("suite,check,status,detail\n");
    for c in checks {
        let status = if c.passed { "pass" } else { "fail" };
        let _ = writeln!(out, "{},{},{},\"{}\"", c.suite, c.name, status, c.detail.replace('"', "'"));
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub workers: usize,
    pub n_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            workers: 1,
            n_samples: 4000,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<Check>, CliError> {
    match suite {
        Suite::Weingarten => weingarten_suite(),
        Suite::Moments => moments_suite(),
        Suite::Ordering => ordering_suite(opts),
        Suite::Asymptotics => asymptotics_suite(),
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Recursion residuals, level-2 closed forms and text round trip.
pub fn weingarten_suite() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for (q, max_p) in [(4usize, 4usize), (6, 4)] {
        let table = solve_table(q, max_p)?;
        let residuals = table.recursion_residuals();
        let nonzero = residuals.iter().filter(|r| !r.residual.is_zero()).count();
        checks.push(Check::new(
            "weingarten",
            format!("residuals_q{q}_p{max_p}"),
            nonzero == 0 && !residuals.is_empty(),
            format!("{} equations, {nonzero} nonzero", residuals.len()),
        ));
        let qi = q as i64;
        let w11 = table.get(&CycleType::ones(2))?.clone();
        let w2 = table.get(&CycleType::new(vec![2])?)?.clone();
        let ok = w11 == rat(1, qi * qi - 1) && w2 == rat(-1, qi * (qi * qi - 1));
        checks.push(Check::new(
            "weingarten",
            format!("level2_q{q}"),
            ok,
            format!("Wg(1,1)={w11} Wg(2)={w2}"),
        ));
        let w1 = table.get(&CycleType::ones(1))?.clone();
        checks.push(Check::new(
            "weingarten",
            format!("level1_q{q}"),
            w1 == rat(1, qi),
            format!("Wg(1)={w1}"),
        ));
        let back = parse_table(&table.to_text())?;
        checks.push(Check::new(
            "weingarten",
            format!("text_round_trip_q{q}"),
            back == table,
            String::new(),
        ));
    }
    Ok(checks)
}

/// The circuits on which the second-moment identity is checked: brickwork,
/// staircase and three random orderings at `q = 2, L = 3` for both boundaries
/// (periodic brickwork needs even `L` and uses `L = 4`), plus the 2D `L = 2`
/// brickwork lattice.
pub fn second_moment_cases() -> Result<Vec<(String, FloquetModel)>, CliError> {
    let mut out = Vec::new();
    for boundary in [Boundary::Open, Boundary::Periodic] {
        let mut kinds = vec![(OrderingKind::Brickwork, 0u64), (OrderingKind::Staircase, 0)];
        kinds.extend((1..=3).map(|s| (OrderingKind::Random, s)));
        for (kind, s) in kinds {
            let l = if kind == OrderingKind::Brickwork && boundary == Boundary::Periodic { 4 } else { 3 };
            let spec = standard_orderings(kind, 1, l, 2, boundary, derive_stream(s, 0))?;
            out.push((format!("{kind:?}_{boundary}_L{l}_s{s}").to_lowercase(), FloquetModel::Circuit(spec)));
        }
    }
    for boundary in [Boundary::Open, Boundary::Periodic] {
        let spec = standard_orderings(OrderingKind::Brickwork, 2, 2, 2, boundary, derive_stream(0, 0))?;
        out.push((format!("brickwork_2d_{boundary}_L2"), FloquetModel::Circuit(spec)));
    }
    Ok(out)
}

/// Fourth-moment index patterns on `L = 2` (`N = q²`), each with a label.
/// Indices are below 4 so the same pattern exists for every `q ≥ 2`.
pub fn fourth_moment_patterns() -> Vec<(&'static str, FloquetPattern)> {
    vec![
        ("diagonal_distinct", FloquetPattern::fourth([0, 0, 1, 1], [0, 0, 1, 1])),
        ("diagonal_offdiag", FloquetPattern::fourth([0, 1, 2, 3], [0, 1, 2, 3])),
        ("crossed", FloquetPattern::fourth([0, 1, 2, 3], [2, 3, 0, 1])),
        ("coincident", FloquetPattern::fourth([0, 0, 0, 0], [0, 0, 0, 0])),
        ("neither_cols_swapped", FloquetPattern::fourth([0, 0, 1, 1], [0, 1, 1, 0])),
        ("neither_rows_swapped", FloquetPattern::fourth([0, 2, 1, 3], [1, 2, 0, 3])),
    ]
}

/// `ε(q) = |exact − RMT pairing value|` for every pattern at `q`, on the
/// one-bond `L = 2` open chain.
pub fn fourth_moment_epsilons(q: usize) -> Result<Vec<(&'static str, f64)>, CliError> {
    let spec = standard_orderings(OrderingKind::Brickwork, 1, 2, q, Boundary::Open, derive_stream(0, 0))?;
    let model = FloquetModel::Circuit(spec);
    let n = q * q;
    fourth_moment_patterns()
        .into_iter()
        .map(|(label, p)| {
            let exact = fourth_moment_exact(&model, &p)?;
            Ok((label, (exact - p.rmt_target(n)).abs()))
        })
        .collect()
}

/// Exact second-moment identity, `⟨|Tr U|²⟩ = 1`, and the decrease of the
/// fourth-moment deviation from `q = 2` to `q = 3`.
pub fn moments_suite() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for (label, model) in second_moment_cases()? {
        let n = model.hilbert_dim()?;
        let dev = second_moment_deviation(&second_moment_exact(&model)?, n);
        checks.push(Check::new(
            "moments",
            format!("second_moment_{label}"),
            dev <= EXACT_TOL,
            format!("max deviation {}", fmt_f64(dev)),
        ));
        let k1 = sff2_from_channel(&model)?;
        checks.push(Check::new(
            "moments",
            format!("sff1_{label}"),
            (k1 - 1.0).abs() <= EXACT_TOL,
            format!("K(1)={}", fmt_f64(k1)),
        ));
    }
    let e2 = fourth_moment_epsilons(2)?;
    let e3 = fourth_moment_epsilons(3)?;
    for ((label, a), (_, b)) in e2.iter().zip(&e3) {
        checks.push(Check::new(
            "moments",
            format!("fourth_moment_{label}"),
            b < a,
            format!("eps(2)={} eps(3)={}", fmt_f64(*a), fmt_f64(*b)),
        ));
    }
    Ok(checks)
}

/// `K(t)` estimates for brickwork, staircase and one random ordering at
/// `q = 3, L = 3`, open chain. Ordering `k` draws from master seed `seed + k`.
pub fn ordering_estimates(
    t_list: &[i64],
    opts: &VerifyOptions,
) -> Result<Vec<(&'static str, Vec<SffEstimate>)>, CliError> {
    let kinds = [
        ("brickwork", OrderingKind::Brickwork),
        ("staircase", OrderingKind::Staircase),
        ("random", OrderingKind::Random),
    ];
    kinds
        .iter()
        .enumerate()
        .map(|(k, (label, kind))| {
            let spec = standard_orderings(*kind, 1, 3, 3, Boundary::Open, derive_stream(opts.seed, 0))?;
            let est = sff_mc(
                &FloquetModel::Circuit(spec),
                t_list,
                opts.n_samples,
                opts.seed.wrapping_add(k as u64),
                opts.workers,
            )?;
            Ok((*label, est))
        })
        .collect()
}

/// `|a − b| / sqrt(σ_a² + σ_b²)`.
pub fn combined_z(a: &SffEstimate, b: &SffEstimate) -> f64 {
    floquet_core::stats::z_score(a.mean, b.mean, a.stderr.hypot(b.stderr))
}

/// Pairwise agreement of `K(t)` across orderings within combined `5σ`.
pub fn ordering_suite(opts: &VerifyOptions) -> Result<Vec<Check>, CliError> {
    let est = ordering_estimates(&[1, 2, 3], opts)?;
    let mut checks = Vec::new();
    for i in 0..est.len() {
        for j in i + 1..est.len() {
            for (a, b) in est[i].1.iter().zip(&est[j].1) {
                let z = combined_z(a, b);
                checks.push(Check::new(
                    "ordering",
                    format!("{}_vs_{}_t{}", est[i].0, est[j].0, a.t),
                    z.abs() <= Z_THRESHOLD,
                    format!("K={} vs {} z={}", fmt_f64(a.mean), fmt_f64(b.mean), fmt_f64(z)),
                ));
            }
        }
    }
    Ok(checks)
}

/// `|q^p·Wg([1^p]) − 1|` at `q = 8, 16, 32` for `p = 2, 3`.
pub fn asymptotic_residuals(p: usize) -> Result<Vec<(usize, f64)>, CliError> {
    let points = asymptotic_check(&CycleType::ones(p), &[8, 16, 32])?;
    Ok(points
        .into_iter()
        .map(|pt| (pt.q, to_f64(&(pt.scaled - BigRational::one())).abs()))
        .collect())
}

/// Residuals shrink by at least 3 per doubling of `q`.
pub fn asymptotics_suite() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for p in [2usize, 3] {
        let r = asymptotic_residuals(p)?;
        for w in r.windows(2) {
            let ratio = w[0].1 / w[1].1;
            checks.push(Check::new(
                "asymptotics",
                format!("p{p}_q{}_to_q{}", w[0].0, w[1].0),
                ratio >= 3.0,
                format!("residuals {} -> {} ratio {}", fmt_f64(w[0].1), fmt_f64(w[1].1), fmt_f64(ratio)),
            ));
        }
    }
    Ok(checks)
}
