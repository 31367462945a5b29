//! Experiment drivers: the circulant damped-cosine study, best-approximation errors, the
//! GSIS-vs-bandlimited model comparison, and CSV ingestion of signal datasets.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GsisError, Result};
use crate::graph::{build_circulant, ShiftSet};
use crate::krylov::{DegeneratePolicy, KrylovChain};
use crate::linalg::{max_abs, mix_seed};
use crate::sampling::{reconstruct_krylov, subset_sampler, uniform_noise, KrylovOptions, SamplingScheme};
use crate::spaces::GeneratorFamily;
use crate::spectral::{check_len, SpectralDecomposition};

/// Added to relative errors before taking `log₁₀`.
pub const LOG_FLOOR: f64 = 1e-6;

/// `A e^{−λ|i−c|} cos(ω|i−c|)` with `c = ⌊N/2⌋`.
pub fn damped_cosine_signal(n: usize, amp: f64, decay: f64, freq: f64) -> DVector<f64> {
    let center = (n / 2) as f64;
    DVector::from_fn(n, |i, _| {
        let r = (i as f64 - center).abs();
        amp * (-decay * r).exp() * (freq * r).cos()
    })
}

/// `{c − P, …, c + P}` reduced mod `N`, `c = ⌊N/2⌋`.
pub fn symmetric_window(n: usize, p: usize) -> Vec<usize> {
    let center = n / 2;
    let set: BTreeSet<usize> =
        (0..=2 * p).map(|k| (center + n * (p / n + 1) + k - p) % n).collect();
    set.into_iter().collect()
}

fn log_error(raw: f64) -> f64 {
    (raw + LOG_FLOOR).log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Graph order.
    pub n: usize,
    /// Circulant generators.
    pub q: Vec<usize>,
    pub amp: f64,
    pub decay: f64,
    pub freq: f64,
    /// Noise half-width.
    pub sigma: f64,
    pub trials: usize,
    /// Half-widths `P` of the sampling windows.
    pub p_values: Vec<usize>,
    /// Krylov levels `n` to report.
    pub levels: Vec<usize>,
    pub seed: u64,
    pub delta: f64,
}

impl ExperimentConfig {
    /// The damped-cosine study on `C(100, {1, 3})` with `λ = 1/4`, `ω = 2π/5`, `σ = 0.1` and
    /// 100 trials over `P ∈ 1..=45`, `n ∈ 1..=18`.
    pub fn circulant_default() -> Self {
        Self {
            n: 100,
            q: vec![1, 3],
            amp: 1.0,
            decay: 0.25,
            freq: 2.0 * std::f64::consts::PI / 5.0,
            sigma: 0.1,
            trials: 100,
            p_values: (1..=45).collect(),
            levels: (1..=18).collect(),
            seed: 0,
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(GsisError::InvalidParameter(msg.into()));
        if self.n == 0 {
            return bad("graph order must be positive");
        }
        if self.p_values.is_empty() || self.levels.is_empty() {
            return bad("sampling and level ranges must be nonempty");
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return bad("noise level must be finite and ≥ 0");
        }
        if self.trials == 0 {
            return bad("at least one trial is required");
        }
        if !(self.delta >= 0.0) {
            return bad("delta must be ≥ 0");
        }
        if ![self.amp, self.decay, self.freq].iter().all(|v| v.is_finite()) || self.amp == 0.0 {
            return bad("signal parameters must be finite with nonzero amplitude");
        }
        Ok(())
    }
}

/// Errors indexed as `[level][p][trial]` (raw) or `[level][p]` (aggregates).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsTable {
    pub levels: Vec<usize>,
    pub p_values: Vec<usize>,
    /// Mean over trials of `log₁₀(relative ∞-error + 1e−6)`.
    pub re_log: Vec<Vec<f64>>,
    pub se_log: Vec<Vec<f64>>,
    /// Mean raw relative ∞-errors.
    pub re_raw: Vec<Vec<f64>>,
    pub se_raw: Vec<Vec<f64>>,
    pub re_trials: Vec<Vec<Vec<f64>>>,
    pub se_trials: Vec<Vec<Vec<f64>>>,
}

impl MetricsTable {
    pub fn cell(&self, level: usize, p: usize) -> Option<(usize, usize)> {
        let i = self.levels.iter().position(|&v| v == level)?;
        let j = self.p_values.iter().position(|&v| v == p)?;
        Some((i, j))
    }

    /// Rows `n,P,metric,value` for `re_log`, `se_log`, `re_raw`, `se_raw`.
    pub fn write_tidy_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "P", "metric", "value"])?;
        for (i, level) in self.levels.iter().enumerate() {
            for (j, p) in self.p_values.iter().enumerate() {
                for (name, grid) in [
                    ("re_log", &self.re_log),
                    ("se_log", &self.se_log),
                    ("re_raw", &self.re_raw),
                    ("se_raw", &self.se_raw),
                ] {
                    w.write_record([
                        level.to_string(),
                        p.to_string(),
                        name.to_string(),
                        format!("{:.12e}", grid[i][j]),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `metrics.csv` and `summary.json` into `dir`.
    pub fn write_outputs(&self, config: &ExperimentConfig, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_tidy_csv(File::create(dir.join("metrics.csv"))?)?;
        let summary = serde_json::json!({
            "config": config,
            "levels": self.levels,
            "p_values": self.p_values,
            "re_log": self.re_log,
            "se_log": self.se_log,
            "re_raw": self.re_raw,
            "se_raw": self.se_raw,
        });
        let mut f = File::create(dir.join("summary.json"))?;
        serde_json::to_writer_pretty(&mut f, &summary)?;
        writeln!(f)?;
        Ok(())
    }
}

/// Samples the damped cosine on `W_P`, adds uniform noise and runs the Krylov reconstructor
/// from `δ_{⌊N/2⌋}`. Each `(P, trial)` pair is one seeded run whose per-level estimates give
/// `x_{n,W_P}` for every requested `n`.
pub fn run_circulant_experiment(config: &ExperimentConfig) -> Result<MetricsTable> {
    config.validate()?;
    let (_, shifts) = build_circulant(config.n, &config.q)?;
    let x0 = damped_cosine_signal(config.n, config.amp, config.decay, config.freq);
    let x0_peak = max_abs(&x0);
    let family = GeneratorFamily::deltas(config.n, &[config.n / 2])?;
    let top_level = *config.levels.iter().max().expect("validated");

    let jobs: Vec<(usize, usize)> = (0..config.p_values.len())
        .flat_map(|j| (0..config.trials).map(move |t| (j, t)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(j, t)| {
            let p = config.p_values[j];
            let scheme = subset_sampler(&symmetric_window(config.n, p), config.n)?;
            let clean = scheme.sample(&x0)?;
            let seed = mix_seed(&[config.seed, p as u64, t as u64]);
            let y = &clean + uniform_noise(clean.len(), config.sigma, seed)?;
            let options = KrylovOptions {
                delta: config.delta,
                max_level: Some(top_level),
                policy: DegeneratePolicy::Drop,
                record_levels: true,
            };
            let result = reconstruct_krylov(&shifts, &family, &scheme, &y, &options)?;
            let clean_peak = max_abs(&clean);
            let errors: Vec<(f64, f64)> = config
                .levels
                .iter()
                .map(|&level| {
                    let xn = &result.level_signals[level.min(result.level_signals.len() - 1)];
                    let diff = xn - &x0;
                    let re = max_abs(&diff) / x0_peak;
                    let se = max_abs(&(scheme.matrix() * &diff)) / clean_peak;
                    (re, se)
                })
                .collect();
            Ok(errors)
        })
        .collect::<Result<Vec<_>>>()?;

    let (nl, np, nt) = (config.levels.len(), config.p_values.len(), config.trials);
    let mut re_trials = vec![vec![vec![0.0; nt]; np]; nl];
    let mut se_trials = re_trials.clone();
    for (&(j, t), errors) in jobs.iter().zip(&runs) {
        for (i, &(re, se)) in errors.iter().enumerate() {
            re_trials[i][j][t] = re;
            se_trials[i][j][t] = se;
        }
    }
    let mean = |v: &[f64], f: fn(f64) -> f64| v.iter().map(|&x| f(x)).sum::<f64>() / v.len() as f64;
    let grid = |trials: &Vec<Vec<Vec<f64>>>, f: fn(f64) -> f64| -> Vec<Vec<f64>> {
        trials.iter().map(|row| row.iter().map(|cell| mean(cell, f)).collect()).collect()
    };
    Ok(MetricsTable {
        levels: config.levels.clone(),
        p_values: config.p_values.clone(),
        re_log: grid(&re_trials, log_error),
        se_log: grid(&se_trials, log_error),
        re_raw: grid(&re_trials, |x| x),
        se_raw: grid(&se_trials, |x| x),
        re_trials,
        se_trials,
    })
}

/// Upper bounds on `E_n = inf_{x ∈ H_n(Φ)} ‖x₀ − x‖_∞ / ‖x₀‖_∞` for `n = 0..=max_level`.
///
/// Each level starts from the ℓ₂ projection and runs Lawson's reweighted least squares for the
/// minimax fit; the best iterate is kept. `H_{n−1} ⊂ H_n`, so the bound carried over from the
/// previous level also applies and the sequence is nonincreasing.
pub fn approximation_error(
    shifts: &ShiftSet,
    family: &GeneratorFamily,
    x0: &DVector<f64>,
    max_level: usize,
) -> Result<Vec<f64>> {
    check_len(shifts.order(), x0.len())?;
    let peak = max_abs(x0);
    if peak == 0.0 {
        return Err(GsisError::ZeroSignal);
    }
    let mut chain = KrylovChain::new(shifts.shifts(), family.generators(), None, DegeneratePolicy::Error)?;
    let mut errors = Vec::with_capacity(max_level + 1);
    let mut best_so_far = f64::INFINITY;
    for level in 0..=max_level {
        if level > 0 {
            chain.extend()?;
        }
        let e = minimax_fit(&chain.basis_matrix(), x0) / peak;
        best_so_far = best_so_far.min(e);
        errors.push(best_so_far);
    }
    Ok(errors)
}

/// `min_c ‖x − Q c‖_∞` (upper bound) for `Q` with orthonormal columns.
fn minimax_fit(q: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    if q.ncols() == 0 {
        return max_abs(x);
    }
    let mut best = max_abs(&(x - q * q.tr_mul(x)));
    let n = x.len();
    let mut weights = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..500 {
        let sqrt_w = weights.map(f64::sqrt);
        let mut wq = q.clone();
        for (r, s) in sqrt_w.iter().enumerate() {
            wq.row_mut(r).scale_mut(*s);
        }
        let wx = x.component_mul(&sqrt_w);
        let Ok(c) = wq.svd(true, true).solve(&wx, 1e-13) else { break };
        let residual = x - q * c;
        let err = max_abs(&residual);
        best = best.min(err);
        let updated = weights.zip_map(&residual, |w, r| w * r.abs());
        let total = updated.sum();
        if total <= 0.0 || !total.is_finite() {
            break;
        }
        let next = updated / total;
        if (&next - &weights).norm() < 1e-14 {
            break;
        }
        weights = next;
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GeneratorRule {
    /// Deltas at the `k` vertices with the largest dataset-average magnitude.
    Nonadaptive { k: usize },
    /// Deltas at the `k` largest-magnitude vertices of each signal.
    Adaptive { k: usize },
    /// Deltas at fixed vertices.
    Fixed { vertices: Vec<usize> },
}

fn top_k(values: &DVector<f64>, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub levels: Vec<usize>,
    /// Mean `‖x − x_{K;n}‖_∞` over the dataset.
    pub f_k: Vec<f64>,
    /// Mean `‖x − x_{B;n}‖_∞` over the dataset.
    pub f_b: Vec<f64>,
    /// `[signal][level]`.
    pub per_signal_k: Vec<Vec<f64>>,
    pub per_signal_b: Vec<Vec<f64>>,
    pub dims: Vec<Vec<usize>>,
}

/// Compares GSIS models (Krylov reconstruction with `A = I`) against lowest-frequency
/// bandlimited spaces of equal dimension. Frequencies are taken in the column order of
/// `decomp`, which sorts them by increasing eigenvalue of its first shift.
pub fn run_model_comparison(
    shifts: &ShiftSet,
    decomp: &SpectralDecomposition,
    dataset: &[DVector<f64>],
    rule: &GeneratorRule,
    levels: &[usize],
) -> Result<ModelComparison> {
    let n = shifts.order();
    check_len(n, decomp.order())?;
    if levels.is_empty() {
        return Err(GsisError::Empty("level range"));
    }
    for x in dataset {
        check_len(n, x.len())?;
    }
    let k = match rule {
        GeneratorRule::Nonadaptive { k } | GeneratorRule::Adaptive { k } => *k,
        GeneratorRule::Fixed { vertices } => vertices.len(),
    };
    if k == 0 || k > n {
        return Err(GsisError::InvalidParameter(format!("generator count must be in 1..={n}, got {k}")));
    }
    let shared = match rule {
        GeneratorRule::Nonadaptive { .. } if !dataset.is_empty() => {
            let avg = dataset.iter().fold(DVector::zeros(n), |acc, x| acc + x) / dataset.len() as f64;
            Some(top_k(&avg, k))
        }
        GeneratorRule::Fixed { vertices } => Some(vertices.clone()),
        _ => None,
    };
    let top_level = *levels.iter().max().expect("nonempty");
    let scheme = SamplingScheme::custom(DMatrix::identity(n, n));

    let per_signal = dataset
        .par_iter()
        .map(|x| {
            let vertices = shared.clone().unwrap_or_else(|| top_k(x, k));
            let family = GeneratorFamily::deltas(n, &vertices)?;
            let options = KrylovOptions {
                max_level: Some(top_level),
                record_levels: true,
                ..KrylovOptions::default()
            };
            let r = reconstruct_krylov(shifts, &family, &scheme, x, &options)?;
            let mut fk = Vec::with_capacity(levels.len());
            let mut fb = Vec::with_capacity(levels.len());
            let mut dims = Vec::with_capacity(levels.len());
            for &level in levels {
                let idx = level.min(r.level_signals.len() - 1);
                fk.push(max_abs(&(x - &r.level_signals[idx])));
                let dim = r.dims_trace[idx.min(r.dims_trace.len() - 1)];
                let low = decomp.u().columns(0, dim);
                fb.push(max_abs(&(x - &low * low.tr_mul(x))));
                dims.push(dim);
            }
            Ok((fk, fb, dims))
        })
        .collect::<Result<Vec<_>>>()?;

    let count = dataset.len().max(1) as f64;
    let average = |sel: &dyn Fn(&(Vec<f64>, Vec<f64>, Vec<usize>)) -> &Vec<f64>| -> Vec<f64> {
        (0..levels.len())
            .map(|i| per_signal.iter().map(|s| sel(s)[i]).sum::<f64>() / count)
            .collect()
    };
    Ok(ModelComparison {
        levels: levels.to_vec(),
        f_k: average(&|s| &s.0),
        f_b: average(&|s| &s.1),
        per_signal_k: per_signal.iter().map(|s| s.0.clone()).collect(),
        per_signal_b: per_signal.iter().map(|s| s.1.clone()).collect(),
        dims: per_signal.iter().map(|s| s.2.clone()).collect(),
    })
}

/// Reads one signal per CSV row. Header labels that are all integers must be a permutation of
/// `0..N` and place each column at that vertex; any other header maps columns to vertices in
/// order and must have exactly `N` entries.
pub fn ingest_signals_csv(path: &Path, n: usize) -> Result<Vec<DVector<f64>>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.is_empty() {
        return Ok(Vec::new());
    }
    let labels: Vec<String> = header.iter().map(str::to_string).collect();
    if labels.len() != n {
        return Err(GsisError::InvalidParameter(format!(
            "header has {} vertex columns, graph has {n} vertices",
            labels.len()
        )));
    }
    let placement: Vec<usize> = match labels.iter().map(|l| l.parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>() {
        Ok(ids) => {
            let distinct: BTreeSet<usize> = ids.iter().copied().collect();
            if distinct.len() != n || ids.iter().any(|&v| v >= n) {
                let missing: Vec<usize> = (0..n).filter(|v| !distinct.contains(v)).collect();
                return Err(GsisError::InvalidParameter(format!("missing vertices in header: {missing:?}")));
            }
            ids
        }
        Err(_) => (0..n).collect(),
    };
    let mut signals = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != n {
            return Err(GsisError::CsvCell {
                row: row + 1,
                column: format!("{} fields", record.len()),
                message: format!("expected {n} fields"),
            });
        }
        let mut x = DVector::zeros(n);
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| GsisError::CsvCell {
                row: row + 1,
                column: labels[col].clone(),
                message: format!("not a number: {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(GsisError::CsvCell {
                    row: row + 1,
                    column: labels[col].clone(),
                    message: format!("non-finite value {cell:?}"),
                });
            }
            x[placement[col]] = value;
        }
        signals.push(x);
    }
    Ok(signals)
}

/// Shared-ownership decomposition for a single shift, ordered by increasing eigenvalue.
pub fn single_shift_decomposition(shifts: &ShiftSet) -> Result<Arc<SpectralDecomposition>> {
    crate::spectral::diagonalize_simultaneously(shifts, &crate::spectral::DiagonalizeOptions::default())
        .map(Arc::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_standard_shift, Graph, ShiftKind};
    use approx::assert_relative_eq;

    #[test]
    fn damped_cosine_examples() {
        let x = damped_cosine_signal(100, 1.0, 0.25, 2.0 * std::f64::consts::PI / 5.0);
        assert_eq!(x[50], 1.0);
        assert_relative_eq!(x[45], (-1.25f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(x[55], (-1.25f64).exp(), epsilon = 1e-12);
        let flat = damped_cosine_signal(7, 2.0, 0.0, 0.0);
        assert!(flat.iter().all(|&v| v == 2.0));
        let spike = damped_cosine_signal(11, 1.0, 50.0, 0.3);
        assert_eq!(spike[5], 1.0);
        assert!(spike.iter().enumerate().all(|(i, v)| i == 5 || v.abs() < 1e-20));
    }

    #[test]
    fn window_wraps_and_deduplicates() {
        assert_eq!(symmetric_window(100, 16).len(), 33);
        assert_eq!(symmetric_window(100, 16)[0], 34);
        assert_eq!(symmetric_window(10, 7), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn approximation_error_on_path() {
        let g = Arc::new(Graph::path(3).unwrap());
        let set = ShiftSet::single(build_standard_shift(&g, ShiftKind::Laplacian).unwrap());
        let fam = GeneratorFamily::deltas(3, &[1]).unwrap();
        let x0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let e = approximation_error(&set, &fam, &x0, 2).unwrap();
        // H_1 = span{(0,1,0), (1,0,1)}; grid over a(1,0,1) + b(0,1,0)
        let mut grid_best = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let (a, b) = (-1.0 + i as f64 / 200.0, -1.0 + j as f64 / 200.0);
                grid_best = grid_best.min((1.0 - a).abs().max(b.abs()).max(a.abs()));
            }
        }
        assert_relative_eq!(e[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(e[1], grid_best, epsilon = 1e-6);
        assert_relative_eq!(e[2], 0.5, epsilon = 1e-6);
        let inside = approximation_error(&set, &fam, &DVector::from_vec(vec![0.0, 3.0, 0.0]), 0).unwrap();
        assert!(inside[0] < 1e-12);
        assert!(approximation_error(&set, &fam, &DVector::zeros(3), 1).is_err());
    }

    #[test]
    fn experiment_is_deterministic() {
        let config = ExperimentConfig {
            trials: 3,
            p_values: vec![4, 10],
            levels: vec![1, 2, 5],
            ..ExperimentConfig::circulant_default()
        };
        let a = run_circulant_experiment(&config).unwrap();
        let b = run_circulant_experiment(&config).unwrap();
        assert_eq!(a, b);
        assert!(a.re_log.iter().flatten().all(|&v| v >= -6.0 && v.is_finite()));
        let mut buf = Vec::new();
        a.write_tidy_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 * 2 * 4);
        let bad = ExperimentConfig { trials: 0, ..config };
        assert!(run_circulant_experiment(&bad).is_err());
    }

    #[test]
    fn model_comparison_examples() {
        let g = Arc::new(Graph::cycle(8).unwrap());
        let set = ShiftSet::single(build_standard_shift(&g, ShiftKind::NormalizedLaplacian).unwrap());
        let d = single_shift_decomposition(&set).unwrap();
        let mut x = DVector::zeros(8);
        x[2] = 4.0;
        x[6] = -1.0;
        let cmp = run_model_comparison(&set, &d, &[x.clone()], &GeneratorRule::Adaptive { k: 2 }, &[0, 1, 7]).unwrap();
        assert!(cmp.f_k[0] < 1e-12);
        assert!(cmp.f_b[2] < 1e-10 || cmp.dims[0][2] < 8);
        let full = run_model_comparison(&set, &d, &[x], &GeneratorRule::Fixed { vertices: (0..8).collect() }, &[0]).unwrap();
        assert_eq!(full.dims[0][0], 8);
        assert!(full.f_b[0] < 1e-10);
        assert!(run_model_comparison(&set, &d, &[DVector::zeros(3)], &GeneratorRule::Adaptive { k: 1 }, &[0]).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, body: &str| {
            let p = dir.path().join(name);
            File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
            p
        };
        let ok = write("ok.csv", "0,1,2\n1,2,3\n");
        assert_eq!(ingest_signals_csv(&ok, 3).unwrap(), vec![DVector::from_vec(vec![1.0, 2.0, 3.0])]);
        let permuted = write("perm.csv", "2,0,1\n1,2,3\n");
        assert_eq!(ingest_signals_csv(&permuted, 3).unwrap()[0], DVector::from_vec(vec![2.0, 3.0, 1.0]));
        let named = write("named.csv", "ATL,ORD,DFW\n1,2,3\n");
        assert_eq!(ingest_signals_csv(&named, 3).unwrap().len(), 1);
        let empty = write("empty.csv", "");
        assert!(ingest_signals_csv(&empty, 3).unwrap().is_empty());
        let nan = write("nan.csv", "a,b,c\n1,NaN,3\n");
        match ingest_signals_csv(&nan, 3) {
            Err(GsisError::CsvCell { row, column, .. }) => assert_eq!((row, column.as_str()), (1, "b")),
            other => panic!("unexpected {other:?}"),
        }
        let missing = write("missing.csv", "0,1,1\n1,2,3\n");
        assert!(ingest_signals_csv(&missing, 3).is_err());
        assert!(ingest_signals_csv(&ok, 4).is_err());
    }
}
