//! Exact Weingarten calculus for the unitary group `U(q)`.
//!
//! The Weingarten function depends only on the cycle type of its argument, so
//! a [`WeingartenTable`] stores one exact rational per integer partition. The
//! table is built level by level from the two linear recursions the function
//! satisfies; at each level every available equation is assembled and the
//! over-determined system is solved exactly, which also checks that the
//! equations are mutually consistent.
//!
//! Values are only produced for `p ≤ q`.

mod linsolve;
mod text;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::perm::{all_permutations, compose, cycle_type, inverse, partitions_unchecked, CycleType};
use crate::rng::{cue_sample, derive_stream};
use crate::stats::{par_map_ordered, ComplexEstimate};
use crate::{Error, Result, C64};

pub use linsolve::{solve_exact, SolveFailure};
pub use text::{parse_table, TABLE_HEADER_PREFIX};

/// Largest moment order accepted by [`haar_moment`]; the double sum runs over `S_p × S_p`.
pub const MAX_MOMENT_ORDER: usize = 6;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Lossy conversion to `f64` for reporting.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact Weingarten values `Wg(ct)` for fixed `q` and every partition of total `1..=max_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeingartenTable {
    q: usize,
    max_p: usize,
    values: HashMap<CycleType, BigRational>,
}

/// One linear equation over Weingarten values of a single level.
#[derive(Debug, Clone)]
struct Equation {
    label: String,
    coeffs: Vec<(CycleType, BigRational)>,
    rhs: BigRational,
}

fn push_coeff(coeffs: &mut Vec<(CycleType, BigRational)>, ct: CycleType, c: BigRational) {
    if let Some(slot) = coeffs.iter_mut().find(|(k, _)| *k == ct) {
        slot.1 += c;
    } else {
        coeffs.push((ct, c));
    }
}

/// Equations whose unknowns are the partitions of `level`.
///
/// `lower` supplies values of level `level − 1` (the empty partition is 1).
fn level_equations(q: usize, level: usize, lower: &dyn Fn(&CycleType) -> BigRational) -> Vec<Equation> {
    let qr = rat(q as i64);
    let mut eqs = Vec::new();

    // q V[c ∪ {1}] + Σ_s c_s V[c with c_s → c_s + 1] = V[c]   for c ⊢ level − 1
    let below = if level == 1 {
        vec![CycleType::empty()]
    } else {
        partitions_unchecked(level - 1)
    };
    for c in below {
        let parts = c.parts();
        let mut coeffs = Vec::new();
        let mut grown = parts.to_vec();
        grown.push(1);
        push_coeff(&mut coeffs, CycleType::from_parts(grown), qr.clone());
        for s in 0..parts.len() {
            let mut bumped = parts.to_vec();
            bumped[s] += 1;
            push_coeff(&mut coeffs, CycleType::from_parts(bumped), rat(parts[s] as i64));
        }
        eqs.push(Equation {
            label: format!("add-one[{c}]"),
            rhs: lower(&c),
            coeffs,
        });
    }

    // q V[c] + Σ_{k=1}^{d−1} V[(d−k, k, rest)] + Σ_{o ∈ rest} o V[(d+o, rest∖o)] = 0
    // for c ⊢ level and every position holding a part d ≥ 2
    for c in partitions_unchecked(level) {
        let parts = c.parts();
        for s in 0..parts.len() {
            let d = parts[s];
            if d < 2 {
                continue;
            }
            let rest: Vec<usize> = parts
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != s)
                .map(|(_, &v)| v)
                .collect();
            let mut coeffs = Vec::new();
            push_coeff(&mut coeffs, c.clone(), qr.clone());
            for k in 1..d {
                let mut split = rest.clone();
                split.push(d - k);
                split.push(k);
                push_coeff(&mut coeffs, CycleType::from_parts(split), BigRational::one());
            }
            for o in 0..rest.len() {
                let mut joined: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != o)
                    .map(|(_, &v)| v)
                    .collect();
                joined.push(d + rest[o]);
                push_coeff(&mut coeffs, CycleType::from_parts(joined), rat(rest[o] as i64));
            }
            eqs.push(Equation {
                label: format!("split-join[{c}; part {}={d}]", s + 1),
                rhs: BigRational::zero(),
                coeffs,
            });
        }
    }
    eqs
}

/// Exact residual of one recursion equation in a solved table.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionResidual {
    pub level: usize,
    pub equation: String,
    pub residual: BigRational,
}

/// Builds the table for `U(q)` up to moment order `max_p`; requires `1 ≤ max_p ≤ q`.
pub fn solve_table(q: usize, max_p: usize) -> Result<WeingartenTable> {
    if max_p == 0 {
        return Err(Error::Domain("max_p must be >= 1".into()));
    }
    if max_p > q {
        return Err(Error::Domain(format!(
            "max_p={max_p} > q={q}: extrapolation to p>q not supported"
        )));
    }
    if max_p > crate::perm::MAX_PARTITION_SIZE {
        return Err(Error::Domain(format!(
            "max_p={max_p} exceeds {}",
            crate::perm::MAX_PARTITION_SIZE
        )));
    }
    let mut values: HashMap<CycleType, BigRational> = HashMap::new();
    for level in 1..=max_p {
        let unknowns = partitions_unchecked(level);
        let index: HashMap<&CycleType, usize> =
            unknowns.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let lower = |c: &CycleType| {
            if c.is_empty() {
                BigRational::one()
            } else {
                values[c].clone()
            }
        };
        let eqs = level_equations(q, level, &lower);
        let mut a = Vec::with_capacity(eqs.len());
        let mut b = Vec::with_capacity(eqs.len());
        for eq in &eqs {
            let mut row = vec![BigRational::zero(); unknowns.len()];
            for (ct, c) in &eq.coeffs {
                row[index[ct]] += c;
            }
            a.push(row);
            b.push(eq.rhs.clone());
        }
        let solution = solve_exact(a, b, unknowns.len()).map_err(|f| match f {
            SolveFailure::Inconsistent { equation } => Error::Invariant(format!(
                "level {level}: recursion equation {} is inconsistent",
                eqs[equation].label
            )),
            SolveFailure::Underdetermined { rank, unknowns } => Error::Invariant(format!(
                "level {level}: recursion system has rank {rank} < {unknowns}"
            )),
        })?;
        values.extend(unknowns.into_iter().zip(solution));
    }
    Ok(WeingartenTable { q, max_p, values })
}

impl WeingartenTable {
    pub(crate) fn from_parts(q: usize, max_p: usize, values: HashMap<CycleType, BigRational>) -> Self {
        WeingartenTable { q, max_p, values }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn max_p(&self) -> usize {
        self.max_p
    }

    /// Exact value for a cycle type; the order of parts is irrelevant.
    pub fn get(&self, ct: &CycleType) -> Result<&BigRational> {
        if ct.total() == 0 || ct.total() > self.max_p {
            return Err(Error::Domain(format!(
                "cycle type [{ct}] has total {} outside 1..={}",
                ct.total(),
                self.max_p
            )));
        }
        self.values
            .get(ct)
            .ok_or_else(|| Error::Invariant(format!("table is missing [{ct}]")))
    }

    /// Entries in canonical order: by level, then reverse-lexicographic.
    pub fn entries(&self) -> Vec<(CycleType, BigRational)> {
        (1..=self.max_p)
            .flat_map(partitions_unchecked)
            .map(|c| {
                let v = self.values[&c].clone();
                (c, v)
            })
            .collect()
    }

    /// Residual of every recursion equation at every level, evaluated exactly.
    pub fn recursion_residuals(&self) -> Vec<RecursionResidual> {
        let mut out = Vec::new();
        for level in 1..=self.max_p {
            let lower = |c: &CycleType| {
                if c.is_empty() {
                    BigRational::one()
                } else {
                    self.values[c].clone()
                }
            };
            for eq in level_equations(self.q, level, &lower) {
                let mut lhs = BigRational::zero();
                for (ct, c) in &eq.coeffs {
                    lhs += c * &self.values[ct];
                }
                out.push(RecursionResidual {
                    level,
                    equation: eq.label,
                    residual: lhs - eq.rhs,
                });
            }
        }
        out
    }

    /// True when every recursion residual is exactly zero.
    pub fn satisfies_recursions(&self) -> bool {
        self.recursion_residuals().iter().all(|r| r.residual.is_zero())
    }

    /// Versioned text form: a header line, then `parts value` per partition.
    pub fn to_text(&self) -> String {
        let mut s = format!("{TABLE_HEADER_PREFIX} q={} max_p={}\n", self.q, self.max_p);
        for (ct, v) in self.entries() {
            s.push_str(&format!("{ct} {}/{}\n", v.numer(), v.denom()));
        }
        s
    }
}

/// `Wg(ct)` from a table, as an owned exact value.
pub fn wg(table: &WeingartenTable, ct: &CycleType) -> Result<BigRational> {
    table.get(ct).cloned()
}

/// Index tuples of a Haar moment `⟨U_{i₁j₁}…U_{i_pj_p} U†_{j'₁i'₁}…U†_{j'_{p'}i'_{p'}}⟩`.
///
/// Indices are 1-based. The conjugated factors may number `p' ≠ p`, in
/// which case the moment vanishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentPattern {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub rows_conj: Vec<usize>,
    pub cols_conj: Vec<usize>,
}

impl MomentPattern {
    pub fn new(
        rows: Vec<usize>,
        cols: Vec<usize>,
        rows_conj: Vec<usize>,
        cols_conj: Vec<usize>,
    ) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::SizeMismatch {
                left: rows.len(),
                right: cols.len(),
            });
        }
        if rows_conj.len() != cols_conj.len() {
            return Err(Error::SizeMismatch {
                left: rows_conj.len(),
                right: cols_conj.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::Domain("moment pattern needs p >= 1".into()));
        }
        Ok(MomentPattern {
            rows,
            cols,
            rows_conj,
            cols_conj,
        })
    }

    /// Pattern for `∏ U_{i_k j_k} · conj(U_{i_k j_k})` (`i' = i`, `j' = j`).
    pub fn diagonal(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        Self::new(rows.clone(), cols.clone(), rows, cols)
    }

    pub fn p(&self) -> usize {
        self.rows.len()
    }

    pub fn p_conj(&self) -> usize {
        self.rows_conj.len()
    }

    fn check_range(&self, q: usize) -> Result<()> {
        let all = self
            .rows
            .iter()
            .chain(&self.cols)
            .chain(&self.rows_conj)
            .chain(&self.cols_conj);
        for &i in all {
            if i == 0 || i > q {
                return Err(Error::IndexOutOfRange(format!("index {i} outside 1..={q}")));
            }
        }
        Ok(())
    }

    /// The product of matrix entries this pattern names, for one matrix.
    pub fn evaluate(&self, u: &nalgebra::DMatrix<C64>) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (&i, &j) in self.rows.iter().zip(&self.cols) {
            acc *= u[(i - 1, j - 1)];
        }
        for (&i, &j) in self.rows_conj.iter().zip(&self.cols_conj) {
            acc *= u[(i - 1, j - 1)].conj();
        }
        acc
    }
}

/// Permutations σ (0-based) with `left[k] = right[σ(k)]` for all `k`.
fn matching_permutations(left: &[usize], right: &[usize]) -> Vec<crate::perm::Permutation> {
    all_permutations(left.len())
        .into_iter()
        .filter(|s| (0..left.len()).all(|k| left[k] == right[s.images()[k] - 1]))
        .collect()
}

/// Exact Haar average of the pattern over `U(q)`:
/// `Σ_{σ,τ ∈ S_p} Wg(τ⁻¹σ) ∏_k δ(i_k, i'_{σ(k)}) δ(j_k, j'_{τ(k)})`.
pub fn haar_moment(table: &WeingartenTable, pat: &MomentPattern) -> Result<BigRational> {
    pat.check_range(table.q())?;
    if pat.p() != pat.p_conj() {
        return Ok(BigRational::zero());
    }
    let p = pat.p();
    if p > table.max_p() || p > MAX_MOMENT_ORDER {
        return Err(Error::Domain(format!(
            "moment order {p} exceeds table max_p={} (ceiling {MAX_MOMENT_ORDER})",
            table.max_p()
        )));
    }
    let sigmas = matching_permutations(&pat.rows, &pat.rows_conj);
    let taus = matching_permutations(&pat.cols, &pat.cols_conj);
    let mut by_type: HashMap<CycleType, i64> = HashMap::new();
    for t in &taus {
        let t_inv = inverse(t);
        for s in &sigmas {
            let rel = compose(&t_inv, s)?;
            *by_type.entry(cycle_type(&rel)).or_insert(0) += 1;
        }
    }
    let mut total = BigRational::zero();
    for (ct, count) in by_type {
        total += rat(count) * table.get(&ct)?;
    }
    Ok(total)
}

/// Monte Carlo estimate of the same Haar average from `n_samples` CUE(q) draws.
pub fn haar_moment_mc(
    q: usize,
    pat: &MomentPattern,
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<ComplexEstimate> {
    pat.check_range(q)?;
    if n_samples < 2 {
        return Err(Error::Domain("n_samples must be >= 2".into()));
    }
    let values = par_map_ordered(n_samples, workers, |s| {
        let u = cue_sample(q, derive_stream(master_seed, s as u64))?;
        Ok(pat.evaluate(u.matrix()))
    })?;
    ComplexEstimate::from_samples(&values)
}

/// `q^{2p−m} · Wg(ct)` at one `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticPoint {
    pub q: usize,
    pub scaled: BigRational,
}

/// Scaled Weingarten values `q^{2p−m}·Wg(ct)` across `q_list`.
///
/// The scaled value tends to a finite nonzero constant as `q` grows; for
/// `ct = [1,…,1]` it is `1 + O(q⁻²)`.
pub fn asymptotic_check(ct: &CycleType, q_list: &[usize]) -> Result<Vec<AsymptoticPoint>> {
    let p = ct.total();
    if p == 0 {
        return Err(Error::Domain("cycle type must be non-empty".into()));
    }
    let exponent = 2 * p - ct.len();
    q_list
        .iter()
        .map(|&q| {
            if q < p {
                return Err(Error::Domain(format!("q={q} < p={p}")));
            }
            let table = solve_table(q, p)?;
            let scale = BigRational::from_integer(BigInt::from(q).pow(exponent as u32));
            Ok(AsymptoticPoint {
                q,
                scaled: scale * table.get(ct)?,
            })
        })
        .collect()
}
