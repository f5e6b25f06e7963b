//! Config-driven experiment runs and their output files.

use std::fs;
use std::path::{Path, PathBuf};

use floquet_core::circuit::{validate, FloquetModel, Violation};
use floquet_core::spectra::{
    cue_r2bar_bin_average, cue_sff, noninteracting_sff, r2bar_estimate, sample_spectra,
    sff_from_spectra, sigma_r2bar_bin_average, DEFAULT_BINS,
};
use floquet_core::weingarten::{parse_table, solve_table};

use crate::config::{parse_circuit_spec, ConfigError, ExperimentConfig};
use crate::plot::{line_chart, Series};
use crate::report::{to_csv, Param, ResultRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] floquet_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for invariant or numerical failures, 2 for anything caused by the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(floquet_core::Error::Invariant(_) | floquet_core::Error::Numeric(_)) => 1,
            _ => 2,
        }
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub plot: bool,
}

impl RunOptions {
    pub fn seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(cfg.master_seed)
    }

    /// Flag (or its environment default), then config, then 1.
    pub fn workers(&self, cfg: &ExperimentConfig) -> usize {
        self.workers.or(cfg.workers).unwrap_or(1).max(1)
    }

    pub fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Rows of a run together with the files written for it.
#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<ResultRow>,
    pub csv: String,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passes())
    }
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

/// Closed-form `K(t)` where one applies: CUE and noninteracting at every `t`;
/// circuits at `t = 0` (`N²`) and `|t| = 1` (exactly 1 for every valid circuit).
pub fn sff_prediction(model: &FloquetModel, t: i64) -> Option<f64> {
    match model {
        FloquetModel::SingleCue { dim } => Some(cue_sff(*dim, t)),
        FloquetModel::Noninteracting { local_dim, sites } => {
            Some(noninteracting_sff(*local_dim, *sites, t))
        }
        FloquetModel::Circuit(spec) => match t {
            0 => spec.hilbert_dim().map(|n| (n * n) as f64),
            1 | -1 => Some(1.0),
            _ => None,
        },
    }
}

/// One `K(t)` row per entry of `t_list`.
pub fn sff_rows(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ResultRow>, CliError> {
    let model = cfg.model()?;
    let spectra = sample_spectra(&model, cfg.n_samples, opts.seed(cfg), opts.workers(cfg))?;
    let estimates = sff_from_spectra(&spectra, &cfg.t_list)?;
    Ok(estimates
        .iter()
        .map(|e| {
            ResultRow::new(
                &cfg.experiment,
                "sff",
                vec![("t", Param::Int(e.t))],
                e.mean,
                e.stderr,
                e.n_samples,
                vec![("prediction", sff_prediction(&model, e.t))],
            )
        })
        .collect())
}

/// Writes `<experiment>_sff.csv`.
pub fn run_sff(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let rows = sff_rows(cfg, opts)?;
    let csv = to_csv(&rows);
    let path = opts.out_dir(cfg).join(format!("{}_sff.csv", cfg.experiment));
    write_output(&path, &csv)?;
    Ok(Report {
        rows,
        csv,
        files: vec![path],
    })
}

/// One row per histogram bin of the off-diagonal pair density, with bin-averaged
/// CUE and sigma-model predictions. Only `single_cue` rows carry a z-score; the
/// sigma-model value is absent in the two bins touching `Δφ = 0`.
pub fn r2_rows(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ResultRow>, CliError> {
    let model = cfg.model()?;
    let n = model.hilbert_dim()?;
    let spectra = sample_spectra(&model, cfg.n_samples, opts.seed(cfg), opts.workers(cfg))?;
    let hist = r2bar_estimate(&spectra, cfg.bins.unwrap_or(DEFAULT_BINS), false)?;
    let score = matches!(model, FloquetModel::SingleCue { .. });
    let mut rows = Vec::with_capacity(hist.bins());
    for k in 0..hist.bins() {
        let (lo, hi) = (hist.bin_edges[k], hist.bin_edges[k + 1]);
        let row = ResultRow::new(
            &cfg.experiment,
            "r2bar",
            vec![("bin", Param::Int(k as i64)), ("lo", Param::Real(lo)), ("hi", Param::Real(hi))],
            hist.densities[k],
            hist.stderrs[k],
            hist.n_samples,
            vec![
                ("cue_prediction", Some(cue_r2bar_bin_average(n, lo, hi)?)),
                ("sigma_prediction", sigma_r2bar_bin_average(n, lo, hi).ok()),
            ],
        );
        rows.push(if score { row } else { row.without_z() });
    }
    Ok(rows)
}

/// Writes `<experiment>_r2.csv`, and `<experiment>_r2.svg` when plotting.
pub fn run_r2(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let rows = r2_rows(cfg, opts)?;
    let csv = to_csv(&rows);
    let dir = opts.out_dir(cfg);
    let path = dir.join(format!("{}_r2.csv", cfg.experiment));
    write_output(&path, &csv)?;
    let mut files = vec![path];
    if opts.plot {
        let svg = r2_plot(&cfg.experiment, &rows);
        let path = dir.join(format!("{}_r2.svg", cfg.experiment));
        write_output(&path, &svg)?;
        files.push(path);
    }
    Ok(Report { rows, csv, files })
}

fn r2_plot(experiment: &str, rows: &[ResultRow]) -> String {
    let centre = |r: &ResultRow| match (r.params[1].1, r.params[2].1) {
        (Param::Real(a), Param::Real(b)) => 0.5 * (a + b),
        _ => f64::NAN,
    };
    let pred = |r: &ResultRow, k: usize| r.predictions[k].1.unwrap_or(f64::NAN);
    let series = [
        Series {
            label: "estimate",
            color: "black",
            points: rows.iter().map(|r| (centre(r), r.estimate)).collect(),
        },
        Series {
            label: "CUE",
            color: "steelblue",
            points: rows.iter().map(|r| (centre(r), pred(r, 0))).collect(),
        },
        Series {
            label: "sigma model",
            color: "firebrick",
            points: rows.iter().map(|r| (centre(r), pred(r, 1))).collect(),
        },
    ];
    line_chart(experiment, "level separation", "R2 density", &series)
}

/// Solves and serialises a Weingarten table; writes it to `out` when given.
pub fn run_wg_table(q: usize, max_p: usize, out: Option<&Path>) -> Result<String, CliError> {
    let table = solve_table(q, max_p)?;
    let text = table.to_text();
    if parse_table(&text)? != table {
        return Err(floquet_core::Error::Invariant("table text does not round-trip".into()).into());
    }
    if let Some(path) = out {
        write_output(path, &text)?;
    }
    Ok(text)
}

/// Parses a circuit description and lists its structural violations.
pub fn validate_circuit(text: &str) -> Result<Vec<Violation>, CliError> {
    let spec = parse_circuit_spec(text)?;
    Ok(validate(&spec))
}
