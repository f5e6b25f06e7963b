//! `wg-table v1` text format.
//!
//! ```text
//! wg-table v1 q=3 max_p=2
//! 1 1/3
//! 2 -1/24
//! 1,1 1/8
//! ```
//!
//! One line per partition, levels ascending, partitions in reverse
//! lexicographic order within a level. Values are reduced fractions with a
//! positive denominator.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::WeingartenTable;
use crate::perm::{partitions_unchecked, CycleType, MAX_PARTITION_SIZE};
use crate::{Error, Result};

pub const TABLE_HEADER_PREFIX: &str = "wg-table v1";

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_key(field: &str, key: &str, line: usize) -> Result<usize> {
    let value = field
        .strip_prefix(key)
        .and_then(|f| f.strip_prefix('='))
        .ok_or_else(|| perr(line, format!("expected `{key}=<n>`, got `{field}`")))?;
    if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
        return Err(perr(line, format!("`{key}` must be a decimal integer")));
    }
    value
        .parse()
        .map_err(|_| perr(line, format!("`{key}` out of range")))
}

fn parse_int(s: &str, line: usize) -> Result<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(perr(line, format!("bad integer `{s}`")));
    }
    s.parse().map_err(|_| perr(line, format!("bad integer `{s}`")))
}

/// Parses and validates a serialized table, including the recursion check.
pub fn parse_table(text: &str) -> Result<WeingartenTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let rest = header
        .strip_prefix(TABLE_HEADER_PREFIX)
        .ok_or_else(|| perr(1, format!("header must start with `{TABLE_HEADER_PREFIX}`")))?;
    let fields: Vec<&str> = rest.split_whitespace().collect();
    if fields.len() != 2 || !rest.starts_with(' ') {
        return Err(perr(1, "header must be `wg-table v1 q=<q> max_p=<p>`"));
    }
    let q = parse_key(fields[0], "q", 1)?;
    let max_p = parse_key(fields[1], "max_p", 1)?;
    if max_p == 0 || max_p > q || max_p > MAX_PARTITION_SIZE {
        return Err(perr(1, format!("max_p={max_p} must lie in 1..=min(q, {MAX_PARTITION_SIZE})")));
    }

    let expected: Vec<CycleType> = (1..=max_p).flat_map(partitions_unchecked).collect();
    let mut values = HashMap::with_capacity(expected.len());
    let mut want = expected.iter();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let next = want
            .next()
            .ok_or_else(|| perr(lineno, "more entries than partitions"))?;
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| perr(lineno, "expected `<parts> <num>/<den>`"))?;
        let parts = key
            .split(',')
            .map(|p| {
                if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(perr(lineno, format!("bad part `{p}`")));
                }
                p.parse::<usize>()
                    .map_err(|_| perr(lineno, format!("bad part `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if parts.as_slice() != next.parts() {
            return Err(perr(lineno, format!("expected partition `{next}`, got `{key}`")));
        }
        let (num, den) = value
            .split_once('/')
            .ok_or_else(|| perr(lineno, "value must be `<num>/<den>`"))?;
        let num = parse_int(num, lineno)?;
        let den = parse_int(den, lineno)?;
        if !den.is_positive() {
            return Err(perr(lineno, "denominator must be positive"));
        }
        if !num.gcd(&den).is_one() {
            return Err(perr(lineno, "fraction not in lowest terms"));
        }
        values.insert(next.clone(), BigRational::new_raw(num, den));
    }
    if let Some(missing) = want.next() {
        return Err(perr(text.lines().count() + 1, format!("missing partition `{missing}`")));
    }
    let table = WeingartenTable::from_parts(q, max_p, values);
    if let Some(bad) = table
        .recursion_residuals()
        .into_iter()
        .find(|r| !num_traits::Zero::is_zero(&r.residual))
    {
        return Err(Error::Invariant(format!(
            "level {} equation {} has residual {}",
            bad.level, bad.equation, bad.residual
        )));
    }
    Ok(table)
}
