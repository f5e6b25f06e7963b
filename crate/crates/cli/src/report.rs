//! Result rows and their CSV rendering.

use std::fmt::Write;

use floquet_core::stats::z_score;

/// Bound on `|z|` for a row to count as agreeing with its prediction.
pub const Z_THRESHOLD: f64 = 5.0;

/// A named parameter column value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Int(i64),
    Real(f64),
}

/// One estimate with its parameters, predictions and z-score.
///
/// `z_score` is taken against the first prediction when that prediction exists.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub quantity: &'static str,
    pub params: Vec<(&'static str, Param)>,
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub predictions: Vec<(&'static str, Option<f64>)>,
    pub z_score: Option<f64>,
}

impl ResultRow {
    pub fn new(
        experiment: &str,
        quantity: &'static str,
        params: Vec<(&'static str, Param)>,
        estimate: f64,
        stderr: f64,
        n_samples: usize,
        predictions: Vec<(&'static str, Option<f64>)>,
    ) -> Self {
        let z = predictions
            .first()
            .and_then(|(_, p)| *p)
            .map(|p| z_score(estimate, p, stderr));
        ResultRow {
            experiment: experiment.to_string(),
            quantity,
            params,
            estimate,
            stderr,
            n_samples,
            predictions,
            z_score: z,
        }
    }

    /// Same row with the z-score suppressed (prediction shown for reference only).
    pub fn without_z(mut self) -> Self {
        self.z_score = None;
        self
    }

    pub fn passes(&self) -> bool {
        self.z_score.is_none_or(|z| z.abs() <= Z_THRESHOLD)
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_param(p: Param) -> String {
    match p {
        Param::Int(i) => i.to_string(),
        Param::Real(x) => fmt_f64(x),
    }
}

/// CSV with columns `<params>,mean,stderr,n,<predictions>,z`; missing values are empty.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let Some(first) = rows.first() else {
        return out;
    };
    let mut header: Vec<&str> = first.params.iter().map(|(k, _)| *k).collect();
    header.extend(["mean", "stderr", "n"]);
    header.extend(first.predictions.iter().map(|(k, _)| *k));
    header.push("z");
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut cells: Vec<String> = row.params.iter().map(|(_, p)| fmt_param(*p)).collect();
        cells.push(fmt_f64(row.estimate));
        cells.push(fmt_f64(row.stderr));
        cells.push(row.n_samples.to_string());
        cells.extend(row.predictions.iter().map(|(_, p)| p.map(fmt_f64).unwrap_or_default()));
        cells.push(row.z_score.map(fmt_f64).unwrap_or_default());
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}
