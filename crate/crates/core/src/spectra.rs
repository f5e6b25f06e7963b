//! Quasi-energy spectra, spectral form factors and two-level correlations.
//!
//! Estimators work on eigenphase samples. The closed forms below are the CUE
//! results, the quadratic sigma-model results and the noninteracting
//! product law; predictions with a pole at `Δφ = 0` exclude the `δ(Δφ)`
//! self-term and reject `Δφ = 0` instead of special-casing it.

use std::f64::consts::PI;

use nalgebra::linalg::Schur;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::circuit::FloquetModel;
use crate::rng::{cue_sample, derive_stream, SeedSpec, UnitaryMatrix};
use crate::stats::{par_map_ordered, Estimate};
use crate::{Error, Result, C64};

const TWO_PI: f64 = 2.0 * PI;

/// Default histogram resolution on `(0, 2π)`.
pub const DEFAULT_BINS: usize = 64;

/// Eigenphases of one Floquet operator, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiEnergySpectrum {
    pub phases: Vec<f64>,
}

impl QuasiEnergySpectrum {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(bad) = phases.iter().find(|p| !(0.0..TWO_PI).contains(*p)) {
            return Err(Error::Domain(format!("phase {bad} outside [0, 2π)")));
        }
        Ok(QuasiEnergySpectrum { phases })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TWO_PI);
    // rem_euclid can round up to exactly 2π
    if w >= TWO_PI {
        0.0
    } else {
        w
    }
}

/// Eigenvalue arguments of `u`, wrapped to `[0, 2π)`.
pub fn eigenphases(u: &UnitaryMatrix) -> Result<QuasiEnergySpectrum> {
    let n = u.dim();
    let schur = Schur::try_new(u.matrix().clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numeric("Schur form not triangular".into()))?;
    let sum: C64 = eig.iter().sum();
    let gap = (sum - u.trace()).norm();
    if gap > 1e-8 * n as f64 {
        return Err(Error::Numeric(format!("eigenvalue sum misses trace by {gap:e}")));
    }
    Ok(QuasiEnergySpectrum {
        phases: eig.iter().map(|z| wrap_phase(z.arg())).collect(),
    })
}

/// `|Σ_j e^{iθ_j t}|²` for one spectrum.
pub fn sff_exact(spectrum: &QuasiEnergySpectrum, t: i64) -> f64 {
    let tf = t as f64;
    let (re, im) = spectrum
        .phases
        .iter()
        .fold((0.0, 0.0), |(re, im), &th| (re + (th * tf).cos(), im + (th * tf).sin()));
    re * re + im * im
}

/// `|Tr U^t|²` by repeated multiplication; negative `t` uses `U†`.
pub fn sff_matrix_power(u: &UnitaryMatrix, t: i64) -> f64 {
    let base = if t < 0 {
        u.matrix().adjoint()
    } else {
        u.matrix().clone()
    };
    let n = u.dim();
    let mut acc = nalgebra::DMatrix::<C64>::identity(n, n);
    for _ in 0..t.unsigned_abs() {
        acc = &acc * &base;
    }
    acc.trace().norm_sqr()
}

/// Ensemble estimate of `K(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SffEstimate {
    pub t: i64,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Eigenphases of `n_samples` realisations; sample `s` uses stream `(master_seed, s)`.
pub fn sample_spectra(
    model: &FloquetModel,
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<QuasiEnergySpectrum>> {
    // surface configuration errors before spawning work
    model.layout()?;
    par_map_ordered(n_samples, workers, |s| {
        sample_spectrum(model, derive_stream(master_seed, s as u64))
    })
}

/// Eigenphases of one realisation. Noninteracting spectra are built from the
/// single-site factors: the phases of `w¹ ⊗ ⋯ ⊗ wᴸ` are the sums
/// `θ¹_{a₁} + ⋯ + θᴸ_{a_L}`, listed in flat index order.
pub fn sample_spectrum(model: &FloquetModel, seed: SeedSpec) -> Result<QuasiEnergySpectrum> {
    match model {
        FloquetModel::Noninteracting { local_dim, sites } => {
            model.layout()?;
            let mut phases = vec![0.0];
            for s in 0..*sites {
                let w = cue_sample(*local_dim, seed.substream(s as u64))?;
                let site = eigenphases(&w)?;
                phases = phases
                    .iter()
                    .flat_map(|&a| site.phases.iter().map(move |&b| wrap_phase(a + b)))
                    .collect();
            }
            Ok(QuasiEnergySpectrum { phases })
        }
        _ => eigenphases(&model.sample(seed)?),
    }
}

/// `K(t)` estimates from precomputed spectra.
pub fn sff_from_spectra(spectra: &[QuasiEnergySpectrum], t_list: &[i64]) -> Result<Vec<SffEstimate>> {
    t_list
        .iter()
        .map(|&t| {
            let xs: Vec<f64> = spectra.iter().map(|s| sff_exact(s, t)).collect();
            let e = Estimate::from_samples(&xs)?;
            Ok(SffEstimate {
                t,
                mean: e.mean,
                stderr: e.stderr,
                n_samples: e.n,
            })
        })
        .collect()
}

/// Monte Carlo `K(t)` over an ensemble; independent of `workers`.
pub fn sff_mc(
    model: &FloquetModel,
    t_list: &[i64],
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<SffEstimate>> {
    if n_samples < 2 {
        return Err(Error::Domain("n_samples must be >= 2".into()));
    }
    let spectra = sample_spectra(model, n_samples, master_seed, workers)?;
    sff_from_spectra(&spectra, t_list)
}

/// Histogram estimate of the spectrum-averaged two-level correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct R2Histogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    /// Standard error per bin; zero when only one spectrum was supplied.
    pub stderrs: Vec<f64>,
    pub include_diagonal: bool,
    pub n_samples: usize,
}

impl R2Histogram {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_width(&self) -> f64 {
        TWO_PI / self.bins() as f64
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        0.5 * (self.bin_edges[k] + self.bin_edges[k + 1])
    }
}

fn pair_bin_counts(spectrum: &QuasiEnergySpectrum, bins: usize, include_diagonal: bool) -> Vec<f64> {
    let w = TWO_PI / bins as f64;
    let mut counts = vec![0.0; bins];
    for (i, &a) in spectrum.phases.iter().enumerate() {
        for (j, &b) in spectrum.phases.iter().enumerate() {
            if i == j && !include_diagonal {
                continue;
            }
            let d = wrap_phase(a - b);
            let k = ((d / w) as usize).min(bins - 1);
            counts[k] += 1.0;
        }
    }
    counts
}

/// Histogram of ordered pair differences `(θ_i − θ_j) mod 2π` normalised by
/// `2π · bin_width · n_spectra`. Without the diagonal this targets
/// `R̄₂(Δφ)` minus its `δ(Δφ)` self-term.
pub fn r2bar_estimate(
    spectra: &[QuasiEnergySpectrum],
    bins: usize,
    include_diagonal: bool,
) -> Result<R2Histogram> {
    if spectra.is_empty() {
        return Err(Error::Domain("no spectra supplied".into()));
    }
    if bins == 0 {
        return Err(Error::Domain("bins must be >= 1".into()));
    }
    let w = TWO_PI / bins as f64;
    let norm = TWO_PI * w;
    let per_sample: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| pair_bin_counts(s, bins, include_diagonal))
        .collect();
    let n = spectra.len();
    let mut densities = Vec::with_capacity(bins);
    let mut stderrs = Vec::with_capacity(bins);
    for k in 0..bins {
        let xs: Vec<f64> = per_sample.iter().map(|c| c[k] / norm).collect();
        if n >= 2 {
            let e = Estimate::from_samples(&xs)?;
            densities.push(e.mean);
            stderrs.push(e.stderr);
        } else {
            densities.push(xs[0]);
            stderrs.push(0.0);
        }
    }
    Ok(R2Histogram {
        bin_edges: (0..=bins).map(|k| k as f64 * w).collect(),
        densities,
        stderrs,
        include_diagonal,
        n_samples: n,
    })
}

/// `K(t)` rebuilt from the binned off-diagonal pair density:
/// `2π Σ_bins ∫_bin R̄₂ e^{−iΔφ t} + N`, with `R̄₂` taken constant in each
/// bin. Evaluated per spectrum so the result carries its own error.
pub fn r2_fourier_sff(spectra: &[QuasiEnergySpectrum], bins: usize, t: i64) -> Result<Estimate> {
    if bins == 0 {
        return Err(Error::Domain("bins must be >= 1".into()));
    }
    let w = TWO_PI / bins as f64;
    let tf = t as f64;
    // bin average of cos(Δφ t); the sine part cancels between ±Δφ pairs
    let kernel: Vec<f64> = (0..bins)
        .map(|k| {
            let (a, b) = (k as f64 * w, (k + 1) as f64 * w);
            if t == 0 {
                1.0
            } else {
                ((tf * b).sin() - (tf * a).sin()) / (tf * w)
            }
        })
        .collect();
    let xs: Vec<f64> = spectra
        .iter()
        .map(|s| {
            let counts = pair_bin_counts(s, bins, false);
            let off: f64 = counts.iter().zip(&kernel).map(|(c, k)| c * k).sum();
            off + s.len() as f64
        })
        .collect();
    Estimate::from_samples(&xs)
}

fn check_separation(dphi: f64) -> Result<()> {
    if !(dphi > 0.0 && dphi < TWO_PI) {
        return Err(Error::Domain(format!("Δφ={dphi} outside (0, 2π)")));
    }
    Ok(())
}

/// CUE `R̄₂(Δφ) = −sin²(NΔφ/2) / (4π² sin²(Δφ/2)) + N²/4π²`, self-term excluded.
pub fn cue_r2bar(n: usize, dphi: f64) -> Result<f64> {
    check_separation(dphi)?;
    let nf = n as f64;
    let s = (0.5 * dphi).sin();
    let sn = (0.5 * nf * dphi).sin();
    Ok(-(sn * sn) / (s * s) / (4.0 * PI * PI) + nf * nf / (4.0 * PI * PI))
}

/// Exact average of [`cue_r2bar`] over `[a, b] ⊂ [0, 2π]`, using the Fejér
/// expansion `sin²(Nx/2)/sin²(x/2) = N + 2 Σ_{k<N} (N−k) cos kx`.
pub fn cue_r2bar_bin_average(n: usize, a: f64, b: f64) -> Result<f64> {
    if !(0.0 <= a && a < b && b <= TWO_PI) {
        return Err(Error::Domain(format!("bin [{a}, {b}] outside [0, 2π]")));
    }
    let nf = n as f64;
    let mut fejer = nf * (b - a);
    for k in 1..n {
        let kf = k as f64;
        fejer += 2.0 * (nf - kf) * ((kf * b).sin() - (kf * a).sin()) / kf;
    }
    Ok((nf * nf - fejer / (b - a)) / (4.0 * PI * PI))
}

/// Scaled connected CUE correlation `−(sin πε / πε)²`.
pub fn cue_r2_connected_scaled(eps: f64) -> Result<f64> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::Domain(format!("ε={eps} must be finite and nonzero")));
    }
    let x = PI * eps;
    Ok(-(x.sin() / x).powi(2))
}

/// CUE form factor `min(|t|, N) + N² δ_{t,0}`.
pub fn cue_sff(n: usize, t: i64) -> f64 {
    if t == 0 {
        (n * n) as f64
    } else {
        (t.unsigned_abs() as f64).min(n as f64)
    }
}

/// Noninteracting form factor: product of `L` single-site CUE(q) factors.
pub fn noninteracting_sff(local_dim: usize, sites: usize, t: i64) -> f64 {
    cue_sff(local_dim, t).powi(sites as i32)
}

/// Sigma-model correlator `C = x/(1−x)²` with `x = αβ`.
pub fn sigma_correlator(x: C64) -> Result<C64> {
    if x.norm() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("|x|={} exceeds 1", x.norm())));
    }
    let one = C64::new(1.0, 0.0);
    if (one - x).norm() == 0.0 {
        return Err(Error::Domain("pole at x = 1".into()));
    }
    Ok(x / ((one - x) * (one - x)))
}

/// Taylor coefficients `c_0..=c_order` of `numer(x)/denom(x)` by exact series division.
pub fn series_quotient(numer: &[BigRational], denom: &[BigRational], order: usize) -> Result<Vec<BigRational>> {
    let d0 = denom
        .first()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| Error::Domain("denominator must have a nonzero constant term".into()))?;
    let mut c: Vec<BigRational> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut acc = numer.get(n).cloned().unwrap_or_else(BigRational::zero);
        for k in 1..=n.min(denom.len().saturating_sub(1)) {
            acc -= &denom[k] * &c[n - k];
        }
        c.push(acc / d0);
    }
    Ok(c)
}

/// Series coefficients of `x/(1−x)²` through `x^order`.
pub fn sigma_correlator_series(order: usize) -> Vec<BigRational> {
    let r = |v: i64| BigRational::from_integer(BigInt::from(v));
    series_quotient(&[r(0), r(1)], &[r(1), r(-2), r(1)], order).expect("constant term is 1")
}

/// Quadratic sigma-model `R̄₂(Δφ) = −1/(8π² sin²(Δφ/2)) + N²/4π²`.
pub fn sigma_r2bar(n: usize, dphi: f64) -> Result<f64> {
    check_separation(dphi)?;
    let s = (0.5 * dphi).sin();
    let nf = n as f64;
    Ok(-1.0 / (8.0 * PI * PI * s * s) + nf * nf / (4.0 * PI * PI))
}

/// Exact average of [`sigma_r2bar`] over `[a, b] ⊂ (0, 2π)`, from
/// `∫ dx / sin²(x/2) = −2 cot(x/2)`.
pub fn sigma_r2bar_bin_average(n: usize, a: f64, b: f64) -> Result<f64> {
    if !(0.0 < a && a < b && b < TWO_PI) {
        return Err(Error::Domain(format!("bin [{a}, {b}] must lie inside (0, 2π)")));
    }
    let cot = |x: f64| (0.5 * x).cos() / (0.5 * x).sin();
    let integral = 2.0 * (cot(a) - cot(b));
    let nf = n as f64;
    Ok(nf * nf / (4.0 * PI * PI) - integral / (b - a) / (8.0 * PI * PI))
}

/// `cue_r2bar − sigma_r2bar = −(sin²(NΔφ/2) − 1/2) / (4π² sin²(Δφ/2))`.
pub fn oscillatory_remainder(n: usize, dphi: f64) -> Result<f64> {
    check_separation(dphi)?;
    let s = (0.5 * dphi).sin();
    let sn = (0.5 * n as f64 * dphi).sin();
    Ok(-(sn * sn - 0.5) / (4.0 * PI * PI * s * s))
}
