// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Monte-Carlo experiments: recovery-rate sweeps, concentration and event
//! audits, and signal-strength scans.
//!
//! Trial `t` of a cell always uses seed `base_seed + t`. Trials run on the
//! current rayon pool and are reduced in trial order, so every aggregate is
//! bit-identical regardless of the worker count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::combinatorics::binomial_f64;
use crate::hypergraph::{sample_hsbm, vertex_mask, HsbmParams};
use crate::linalg::eig_sym;
use crate::partition::{compare_partitions, Partition, PartitionComparison};
use crate::recovery::{
    counting_condition, counting_from_adjacency, epsilon_window, recover_with, EpsilonWindow, IterationTrace,
    RecoverOptions, Regime,
};
use crate::spectral::{
    concentration_bound, distance_between, eigenvalue_deviation, expected_adjacency, expected_spectrum,
    projector_from_eigensystem, projector_perturbation_bound,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Spectral,
    Counting,
    Both,
}

impl Algorithm {
    pub fn spectral(self) -> bool {
        matches!(self, Algorithm::Spectral | Algorithm::Both)
    }

    pub fn counting(self) -> bool {
        matches!(self, Algorithm::Counting | Algorithm::Both)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Algorithm::Spectral),
            "counting" => Ok(Algorithm::Counting),
            "both" => Ok(Algorithm::Both),
            other => Err(Error::param(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Spectral => "spectral",
            Algorithm::Counting => "counting",
            Algorithm::Both => "both",
        })
    }
}

/// Optional per-trial measurements beyond recovery itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricSet {
    /// `||A - E[A]||_2` against its bound, plus the per-eigenvalue Weyl check.
    pub concentration: bool,
    /// Distances between `P_k(A)` and `P_k(E[A])` against their bounds.
    /// Implies `concentration`.
    pub projector: bool,
}

impl MetricSet {
    pub fn all() -> Self {
        MetricSet {
            concentration: true,
            projector: true,
        }
    }
}

/// Cartesian grid over model parameters, visited with `n` outermost and `q`
/// innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub d: Vec<usize>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl Grid {
    pub fn single(n: usize, k: usize, d: usize, p: f64, q: f64) -> Self {
        Grid {
            n: vec![n],
            k: vec![k],
            d: vec![d],
            p: vec![p],
            q: vec![q],
        }
    }

    pub fn len(&self) -> usize {
        self.n.len() * self.k.len() * self.d.len() * self.p.len() * self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> Vec<(usize, usize, usize, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &n in &self.n {
            for &k in &self.k {
                for &d in &self.d {
                    for &p in &self.p {
                        for &q in &self.q {
                            out.push((n, k, d, p, q));
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub grid: Grid,
    pub trials: usize,
    pub base_seed: u64,
    pub algorithm: Algorithm,
    pub metrics: MetricSet,
}

/// Machine-readable reason a grid cell cannot be sampled.
pub fn skip_reason(n: usize, k: usize, d: usize, p: f64, q: f64) -> Option<&'static str> {
    if n == 0 || k == 0 {
        Some("empty_model")
    } else if !n.is_multiple_of(k) {
        Some("n_not_divisible_by_k")
    } else if d < 2 {
        Some("d_below_2")
    } else if d > n / k {
        Some("d_exceeds_s")
    } else if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        Some("probability_out_of_range")
    } else if q > p {
        Some("q_exceeds_p")
    } else {
        None
    }
}

/// Measurements from one concentration trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationTrial {
    pub seed: u64,
    /// `||A - E[A]||_2`.
    pub norm: f64,
    /// `norm / (6 d sqrt(d C(n, d-1)))`.
    pub ratio: f64,
    /// `max_i |lambda_i(A) - lambda_i(E[A])|`.
    pub weyl_deviation: f64,
    pub projector: Option<ProjectorTrial>,
}

impl ConcentrationTrial {
    pub fn within_bound(&self) -> bool {
        self.ratio <= 1.0
    }

    pub fn weyl_holds(&self) -> bool {
        // both sides come from separate eigensolves; allow rounding
        self.weyl_deviation <= self.norm * (1.0 + 1e-9) + 1e-9
    }
}

/// `P_k(A)` versus `P_k(E[A])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorTrial {
    pub spectral: f64,
    pub frobenius: f64,
    /// `||A - E[A]||_2 / (gap - 2 ||A - E[A]||_2)`, absent when not positive.
    pub spectral_bound: Option<f64>,
    pub frobenius_bound: Option<f64>,
}

impl ProjectorTrial {
    pub fn within_bounds(&self) -> Option<bool> {
        Some(self.spectral <= self.spectral_bound? && self.frobenius <= self.frobenius_bound?)
    }

    pub fn frobenius_within_rank_factor(&self, k: usize) -> bool {
        self.frobenius <= (2.0 * k as f64).sqrt() * self.spectral + 1e-12
    }
}

#[derive(Debug, Clone)]
pub struct SpectralOutcome {
    pub comparison: PartitionComparison,
    pub traces: Vec<IterationTrace>,
}

/// Everything measured on one sampled instance.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: u64,
    pub edge_count: usize,
    pub spectral: Option<SpectralOutcome>,
    pub counting: Option<PartitionComparison>,
    pub concentration: Option<ConcentrationTrial>,
    pub elapsed_ms: f64,
}

/// Runs one trial on `params` (its seed selects the draw).
pub fn run_trial(params: &HsbmParams, algorithm: Algorithm, metrics: MetricSet) -> Result<TrialOutcome> {
    let start = Instant::now();
    let (h, truth) = sample_hsbm(params)?;
    let needs_adjacency = algorithm.counting() || metrics.concentration || metrics.projector;
    let adjacency = needs_adjacency.then(|| h.adjacency_matrix());

    let spectral = if algorithm.spectral() {
        let opts = RecoverOptions {
            truth: Some(&truth),
            ..Default::default()
        };
        let res = recover_with(&h, params.k, params.s, &opts)?;
        Some(SpectralOutcome {
            comparison: PartitionComparison {
                exact: res.exact.unwrap_or(false),
                misclassified: res.misclassified.unwrap_or(params.n),
            },
            traces: res.traces,
        })
    } else {
        None
    };

    let counting = match (&adjacency, algorithm.counting()) {
        (Some(a), true) => Some(compare_partitions(&counting_from_adjacency(a, params.s)?, &truth)?),
        _ => None,
    };

    let concentration = match &adjacency {
        Some(a) if metrics.concentration || metrics.projector => {
            Some(measure_concentration(params, a, metrics.projector)?)
        }
        _ => None,
    };

    Ok(TrialOutcome {
        seed: params.seed,
        edge_count: h.edge_count(),
        spectral,
        counting,
        concentration,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn measure_concentration(
    params: &HsbmParams,
    a: &crate::linalg::SymmetricMatrix,
    with_projector: bool,
) -> Result<ConcentrationTrial> {
    let ea = expected_adjacency(params);
    let diff = a.sub(&ea)?;
    let norm = eig_sym(&diff)?.spectral_radius();
    let bound = concentration_bound(params.n, params.d);
    let es_a = eig_sym(a)?;
    let es_ea = eig_sym(&ea)?;
    let weyl_deviation = eigenvalue_deviation(&es_a, &es_ea);
    let projector = if with_projector {
        let pa = projector_from_eigensystem(&es_a, params.k)?;
        let pe = projector_from_eigensystem(&es_ea, params.k)?;
        let dist = distance_between(&pa, &pe);
        let bounds = projector_perturbation_bound(expected_spectrum(params).gap, norm, params.k);
        Some(ProjectorTrial {
            spectral: dist.spectral,
            frobenius: dist.frobenius,
            spectral_bound: bounds.map(|b| b.0),
            frobenius_bound: bounds.map(|b| b.1),
        })
    } else {
        None
    };
    Ok(ConcentrationTrial {
        seed: params.seed,
        norm,
        ratio: norm / bound,
        weyl_deviation,
        projector,
    })
}

/// Runs trials `0..trials` of one parameter point in parallel, returned in
/// trial order.
pub fn run_trials(
    params: &HsbmParams,
    trials: usize,
    algorithm: Algorithm,
    metrics: MetricSet,
) -> Result<Vec<TrialOutcome>> {
    params.validate()?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(&params.with_seed(params.seed.wrapping_add(t)), algorithm, metrics))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryStats {
    pub exact_rate: f64,
    pub mean_misclassified: f64,
}

impl RecoveryStats {
    fn from_comparisons(cmps: &[PartitionComparison]) -> Self {
        let t = cmps.len().max(1) as f64;
        RecoveryStats {
            exact_rate: cmps.iter().filter(|c| c.exact).count() as f64 / t,
            mean_misclassified: cmps.iter().map(|c| c.misclassified as f64).sum::<f64>() / t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationStats {
    pub bound: f64,
    pub mean_norm: f64,
    pub max_norm: f64,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub violations: usize,
    pub weyl_violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorStats {
    pub mean_spectral: f64,
    pub mean_frobenius: f64,
    /// Mean of distance / bound over trials where the bound exists.
    pub mean_spectral_ratio: Option<f64>,
    pub mean_frobenius_ratio: Option<f64>,
    /// Trials where the bound exists and is exceeded.
    pub violations: usize,
    /// Trials where the measured perturbation closes the eigengap.
    pub unbounded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    pub mean_ms: f64,
    pub max_ms: f64,
}

/// Aggregated metrics of one grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub trials: usize,
    pub skipped: Option<&'static str>,
    pub spectral: Option<RecoveryStats>,
    pub counting: Option<RecoveryStats>,
    pub concentration: Option<ConcentrationStats>,
    pub projector: Option<ProjectorStats>,
    pub window: Option<EpsilonWindow>,
    pub counting_condition: Option<bool>,
    pub timing: Option<TimingStats>,
    /// Traces of the first trial's spectral run.
    pub first_traces: Option<Vec<IterationTrace>>,
}

impl CellResult {
    fn skipped(n: usize, k: usize, d: usize, p: f64, q: f64, trials: usize, reason: &'static str) -> Self {
        CellResult {
            n,
            k,
            d,
            p,
            q,
            trials,
            skipped: Some(reason),
            spectral: None,
            counting: None,
            concentration: None,
            projector: None,
            window: None,
            counting_condition: None,
            timing: None,
            first_traces: None,
        }
    }

    pub fn s(&self) -> Option<usize> {
        (self.k > 0).then(|| self.n / self.k)
    }
}

/// Reduces trial outcomes of one cell in trial order.
pub fn aggregate(params: &HsbmParams, outcomes: &[TrialOutcome]) -> CellResult {
    let t = outcomes.len().max(1) as f64;
    let spectral_cmps: Vec<PartitionComparison> = outcomes
        .iter()
        .filter_map(|o| o.spectral.as_ref().map(|s| s.comparison))
        .collect();
    let counting_cmps: Vec<PartitionComparison> = outcomes.iter().filter_map(|o| o.counting).collect();
    let conc: Vec<&ConcentrationTrial> = outcomes.iter().filter_map(|o| o.concentration.as_ref()).collect();
    let proj: Vec<&ProjectorTrial> = conc.iter().filter_map(|c| c.projector.as_ref()).collect();

    let concentration = (!conc.is_empty()).then(|| {
        let c = conc.len() as f64;
        ConcentrationStats {
            bound: concentration_bound(params.n, params.d),
            mean_norm: conc.iter().map(|x| x.norm).sum::<f64>() / c,
            max_norm: conc.iter().fold(0.0, |m, x| m.max(x.norm)),
            mean_ratio: conc.iter().map(|x| x.ratio).sum::<f64>() / c,
            max_ratio: conc.iter().fold(0.0, |m, x| m.max(x.ratio)),
            violations: conc.iter().filter(|x| !x.within_bound()).count(),
            weyl_violations: conc.iter().filter(|x| !x.weyl_holds()).count(),
        }
    });

    let projector = (!proj.is_empty()).then(|| {
        let c = proj.len() as f64;
        let ratios: Vec<(f64, f64)> = proj
            .iter()
            .filter_map(|x| Some((x.spectral / x.spectral_bound?, x.frobenius / x.frobenius_bound?)))
            .collect();
        let mean = |f: fn(&(f64, f64)) -> f64| {
            (!ratios.is_empty()).then(|| ratios.iter().map(f).sum::<f64>() / ratios.len() as f64)
        };
        ProjectorStats {
            mean_spectral: proj.iter().map(|x| x.spectral).sum::<f64>() / c,
            mean_frobenius: proj.iter().map(|x| x.frobenius).sum::<f64>() / c,
            mean_spectral_ratio: mean(|r| r.0),
            mean_frobenius_ratio: mean(|r| r.1),
            violations: proj.iter().filter(|x| x.within_bounds() == Some(false)).count(),
            unbounded: proj.iter().filter(|x| x.spectral_bound.is_none()).count(),
        }
    });

    CellResult {
        n: params.n,
        k: params.k,
        d: params.d,
        p: params.p,
        q: params.q,
        trials: outcomes.len(),
        skipped: None,
        spectral: (!spectral_cmps.is_empty()).then(|| RecoveryStats::from_comparisons(&spectral_cmps)),
        counting: (!counting_cmps.is_empty()).then(|| RecoveryStats::from_comparisons(&counting_cmps)),
        concentration,
        projector,
        window: Some(epsilon_window(params, Regime::Dense)),
        counting_condition: Some(counting_condition(params)),
        timing: Some(TimingStats {
            mean_ms: outcomes.iter().map(|o| o.elapsed_ms).sum::<f64>() / t,
            max_ms: outcomes.iter().fold(0.0, |m, o| m.max(o.elapsed_ms)),
        }),
        first_traces: outcomes
            .first()
            .and_then(|o| o.spectral.as_ref().map(|s| s.traces.clone())),
    }
}

/// Runs every grid cell; cells violating the model constraints are reported
/// as skipped rather than failing the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CellResult>> {
    if spec.trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    let mut out = Vec::with_capacity(spec.grid.len());
    for (n, k, d, p, q) in spec.grid.cells() {
        if let Some(reason) = skip_reason(n, k, d, p, q) {
            out.push(CellResult::skipped(n, k, d, p, q, spec.trials, reason));
            continue;
        }
        let params = HsbmParams::new(n, k, d, p, q, spec.base_seed)?;
        let outcomes = run_trials(&params, spec.trials, spec.algorithm, spec.metrics)?;
        out.push(aggregate(&params, &outcomes));
    }
    Ok(out)
}

fn opt_f64(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn opt_display<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// Column order of the sweep CSV. Timing columns come last and are dropped
/// with `include_timing = false`.
pub const SWEEP_COLUMNS: &[&str] = &[
    "n",
    "k",
    "s",
    "d",
    "p",
    "q",
    "trials",
    "status",
    "skip_reason",
    "spectral_exact_rate",
    "spectral_mean_misclassified",
    "counting_exact_rate",
    "counting_mean_misclassified",
    "norm_mean",
    "norm_max",
    "concentration_bound",
    "bound_ratio_mean",
    "bound_ratio_max",
    "concentration_violations",
    "weyl_violations",
    "projector_spectral_mean",
    "projector_frobenius_mean",
    "projector_spectral_bound_ratio_mean",
    "projector_frobenius_bound_ratio_mean",
    "projector_bound_violations",
    "projector_bound_unavailable",
    "eps_lower",
    "eps_upper",
    "eps_feasible",
    "counting_condition",
];

pub const TIMING_COLUMNS: &[&str] = &["time_ms_mean", "time_ms_max"];

pub fn write_sweep_csv(cells: &[CellResult], w: impl Write, include_timing: bool) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = SWEEP_COLUMNS.to_vec();
    if include_timing {
        header.extend_from_slice(TIMING_COLUMNS);
    }
    wtr.write_record(&header)?;
    for c in cells {
        let mut row = vec![
            c.n.to_string(),
            c.k.to_string(),
            opt_display(c.s()),
            c.d.to_string(),
            c.p.to_string(),
            c.q.to_string(),
            c.trials.to_string(),
            if c.skipped.is_some() { "skipped" } else { "ok" }.to_string(),
            c.skipped.unwrap_or("").to_string(),
            opt_f64(c.spectral.map(|s| s.exact_rate)),
            opt_f64(c.spectral.map(|s| s.mean_misclassified)),
            opt_f64(c.counting.map(|s| s.exact_rate)),
            opt_f64(c.counting.map(|s| s.mean_misclassified)),
            opt_f64(c.concentration.map(|s| s.mean_norm)),
            opt_f64(c.concentration.map(|s| s.max_norm)),
            opt_f64(c.concentration.map(|s| s.bound)),
            opt_f64(c.concentration.map(|s| s.mean_ratio)),
            opt_f64(c.concentration.map(|s| s.max_ratio)),
            opt_display(c.concentration.map(|s| s.violations)),
            opt_display(c.concentration.map(|s| s.weyl_violations)),
            opt_f64(c.projector.map(|s| s.mean_spectral)),
            opt_f64(c.projector.map(|s| s.mean_frobenius)),
            opt_f64(c.projector.and_then(|s| s.mean_spectral_ratio)),
            opt_f64(c.projector.and_then(|s| s.mean_frobenius_ratio)),
            opt_display(c.projector.map(|s| s.violations)),
            opt_display(c.projector.map(|s| s.unbounded)),
            opt_f64(c.window.filter(|w| w.denominator > 0.0).map(|w| w.lower)),
            opt_f64(c.window.map(|w| w.upper)),
            opt_display(c.window.map(|w| w.feasible)),
            opt_display(c.counting_condition),
        ];
        if include_timing {
            row.push(opt_f64(c.timing.map(|t| t.mean_ms)));
            row.push(opt_f64(c.timing.map(|t| t.max_ms)));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Per-trial recovery and concentration measurements, one row per trial.
pub fn write_trials_csv(outcomes: &[TrialOutcome], w: impl Write, include_timing: bool) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec![
        "seed",
        "edges",
        "spectral_exact",
        "spectral_misclassified",
        "counting_exact",
        "counting_misclassified",
        "norm",
        "bound_ratio",
        "weyl_deviation",
        "projector_spectral",
        "projector_frobenius",
        "projector_spectral_bound",
        "projector_frobenius_bound",
    ];
    if include_timing {
        header.push("time_ms");
    }
    wtr.write_record(&header)?;
    for o in outcomes {
        let proj = o.concentration.and_then(|c| c.projector);
        let mut row = vec![
            o.seed.to_string(),
            o.edge_count.to_string(),
            opt_display(o.spectral.as_ref().map(|s| s.comparison.exact)),
            opt_display(o.spectral.as_ref().map(|s| s.comparison.misclassified)),
            opt_display(o.counting.map(|c| c.exact)),
            opt_display(o.counting.map(|c| c.misclassified)),
            opt_f64(o.concentration.map(|c| c.norm)),
            opt_f64(o.concentration.map(|c| c.ratio)),
            opt_f64(o.concentration.map(|c| c.weyl_deviation)),
            opt_f64(proj.map(|p| p.spectral)),
            opt_f64(proj.map(|p| p.frobenius)),
            opt_f64(proj.and_then(|p| p.spectral_bound)),
            opt_f64(proj.and_then(|p| p.frobenius_bound)),
        ];
        if include_timing {
            row.push(o.elapsed_ms.to_string());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Summary of `||A - E[A]||_2` against its high-probability bound.
#[derive(Debug, Clone)]
pub struct ConcentrationAudit {
    pub params: HsbmParams,
    pub trials: Vec<ConcentrationTrial>,
    pub stats: ConcentrationStats,
    pub projector: Option<ProjectorStats>,
}

impl ConcentrationAudit {
    pub fn violations(&self) -> usize {
        self.stats.violations
    }
}

pub fn concentration_audit(params: &HsbmParams, trials: usize) -> Result<ConcentrationAudit> {
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    let outcomes = run_trials(params, trials, Algorithm::Counting, MetricSet::all())?;
    let cell = aggregate(params, &outcomes);
    Ok(ConcentrationAudit {
        params: *params,
        trials: outcomes.iter().filter_map(|o| o.concentration).collect(),
        stats: cell.concentration.expect("concentration measured"),
        projector: cell.projector,
    })
}

pub fn write_concentration_csv(audit: &ConcentrationAudit, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "kind",
        "n",
        "k",
        "d",
        "p",
        "q",
        "trials",
        "bound",
        "mean_ratio",
        "max_ratio",
        "violations",
        "weyl_violations",
        "projector_violations",
        "projector_bound_unavailable",
    ])?;
    let p = &audit.params;
    wtr.write_record([
        "concentration".to_string(),
        p.n.to_string(),
        p.k.to_string(),
        p.d.to_string(),
        p.p.to_string(),
        p.q.to_string(),
        audit.trials.len().to_string(),
        audit.stats.bound.to_string(),
        audit.stats.mean_ratio.to_string(),
        audit.stats.max_ratio.to_string(),
        audit.stats.violations.to_string(),
        audit.stats.weyl_violations.to_string(),
        opt_display(audit.projector.map(|x| x.violations)),
        opt_display(audit.projector.map(|x| x.unbounded)),
    ])?;
    wtr.flush()?;
    Ok(())
}

/// Which cluster subsets `J` get a spectral-event check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralFamily {
    /// All `2^k - 1` non-empty subsets; only allowed for `k <= 12`.
    Full,
    /// The nested sets `{t, .., k}` met by delete-and-repeat.
    Suffixes,
}

pub const FULL_FAMILY_MAX_K: usize = 12;

/// Outcome of the spectral and degree events on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTrial {
    pub seed: u64,
    pub degree_pairs: usize,
    pub degree_violations: usize,
    pub spectral_checked: usize,
    pub spectral_violations: usize,
    /// Largest `||B - E[B]||_2 / bound` over the audited subsets.
    pub spectral_max_ratio: f64,
}

impl EventTrial {
    pub fn all_hold(&self) -> bool {
        self.degree_violations == 0 && self.spectral_violations == 0
    }
}

#[derive(Debug, Clone)]
pub struct EventAudit {
    pub params: HsbmParams,
    pub eps: f64,
    pub family: SpectralFamily,
    pub trials: Vec<EventTrial>,
    /// `exp(-eps^2 C(s-1, d-1))`, the per-pair failure bound.
    pub degree_budget: f64,
    /// `2^k e^{-s} + n k exp(-eps^2 C(s-1, d-1))`.
    pub joint_budget: f64,
}

impl EventAudit {
    pub fn joint_hold_frequency(&self) -> f64 {
        self.trials.iter().filter(|t| t.all_hold()).count() as f64 / self.trials.len().max(1) as f64
    }

    pub fn degree_pairs(&self) -> usize {
        self.trials.iter().map(|t| t.degree_pairs).sum()
    }

    pub fn degree_violations(&self) -> usize {
        self.trials.iter().map(|t| t.degree_violations).sum()
    }

    pub fn degree_violation_frequency(&self) -> f64 {
        self.degree_violations() as f64 / self.degree_pairs().max(1) as f64
    }

    pub fn spectral_violations(&self) -> usize {
        self.trials.iter().map(|t| t.spectral_violations).sum()
    }
}

/// Degree events: `N_{u,C_i} >= (p - eps) C(s, d-1)` for members and
/// `N_{u,C_i} <= (q + eps) C(s, d-1)` otherwise, over every vertex and
/// cluster. Spectral events: `||B - E[B]||_2 <= 6d sqrt(d C(m, d-1))` for the
/// sub-hypergraph induced by each audited cluster subset, `m` its size.
pub fn event_audit(params: &HsbmParams, trials: usize, eps: f64, family: SpectralFamily) -> Result<EventAudit> {
    params.validate()?;
    if family == SpectralFamily::Full && params.k > FULL_FAMILY_MAX_K {
        return Err(Error::param(format!(
            "full spectral-event family needs k <= {FULL_FAMILY_MAX_K}, got k = {}",
            params.k
        )));
    }
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    let trial_results = (0..trials as u64)
        .into_par_iter()
        .map(|t| event_trial(&params.with_seed(params.seed.wrapping_add(t)), eps, family))
        .collect::<Result<Vec<_>>>()?;
    let degree_budget = (-eps * eps * binomial_f64(params.s as u64 - 1, params.d as u64 - 1)).exp();
    let joint_budget =
        2f64.powi(params.k as i32) * (-(params.s as f64)).exp() + (params.n * params.k) as f64 * degree_budget;
    Ok(EventAudit {
        params: *params,
        eps,
        family,
        trials: trial_results,
        degree_budget,
        joint_budget,
    })
}

fn cluster_subsets(k: usize, family: SpectralFamily) -> Vec<Vec<usize>> {
    match family {
        SpectralFamily::Full => (1u32..1 << k)
            .map(|mask| (0..k).filter(|&i| mask & (1 << i) != 0).collect())
            .collect(),
        SpectralFamily::Suffixes => (0..k).map(|t| (t..k).collect()).collect(),
    }
}

fn event_trial(params: &HsbmParams, eps: f64, family: SpectralFamily) -> Result<EventTrial> {
    let (h, truth) = sample_hsbm(params)?;
    let clusters = truth.clusters();
    let scale = binomial_f64(params.s as u64, params.d as u64 - 1);
    let member_floor = (params.p - eps) * scale;
    let outsider_cap = (params.q + eps) * scale;

    let mut degree_violations = 0;
    for (i, cluster) in clusters.iter().enumerate() {
        let counts = h.incident_counts(&vertex_mask(params.n, cluster));
        for (u, &c) in counts.iter().enumerate() {
            let ok = if truth.label(u) == i {
                c as f64 >= member_floor
            } else {
                c as f64 <= outsider_cap
            };
            if !ok {
                degree_violations += 1;
            }
        }
    }

    let mut spectral_checked = 0;
    let mut spectral_violations = 0;
    let mut spectral_max_ratio = 0.0f64;
    for subset in cluster_subsets(params.k, family) {
        let keep: Vec<usize> = subset.iter().flat_map(|&i| clusters[i].iter().copied()).collect();
        let (sub, map) = h.induced_subhypergraph(&keep)?;
        let sub_params = HsbmParams::new(keep.len(), subset.len(), params.d, params.p, params.q, params.seed)?;
        let sub_truth = truth.restrict(&map)?;
        let expected = crate::spectral::expected_adjacency_for(&sub_truth, &sub_params);
        let norm = eig_sym(&sub.adjacency_matrix().sub(&expected)?)?.spectral_radius();
        let ratio = norm / concentration_bound(keep.len(), params.d);
        spectral_max_ratio = spectral_max_ratio.max(ratio);
        spectral_checked += 1;
        if ratio > 1.0 {
            spectral_violations += 1;
        }
    }

    Ok(EventTrial {
        seed: params.seed,
        degree_pairs: params.n * params.k,
        degree_violations,
        spectral_checked,
        spectral_violations,
        spectral_max_ratio,
    })
}

pub fn write_event_csv(audit: &EventAudit, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "kind",
        "n",
        "k",
        "d",
        "p",
        "q",
        "eps",
        "family",
        "trials",
        "joint_hold_frequency",
        "joint_budget",
        "degree_pairs",
        "degree_violations",
        "degree_violation_frequency",
        "degree_budget",
        "spectral_checked",
        "spectral_violations",
    ])?;
    let p = &audit.params;
    wtr.write_record([
        "events".to_string(),
        p.n.to_string(),
        p.k.to_string(),
        p.d.to_string(),
        p.p.to_string(),
        p.q.to_string(),
        audit.eps.to_string(),
        match audit.family {
            SpectralFamily::Full => "full",
            SpectralFamily::Suffixes => "suffixes",
        }
        .to_string(),
        audit.trials.len().to_string(),
        audit.joint_hold_frequency().to_string(),
        audit.joint_budget.to_string(),
        audit.degree_pairs().to_string(),
        audit.degree_violations().to_string(),
        audit.degree_violation_frequency().to_string(),
        audit.degree_budget.to_string(),
        audit
            .trials
            .iter()
            .map(|t| t.spectral_checked)
            .sum::<usize>()
            .to_string(),
        audit.spectral_violations().to_string(),
    ])?;
    wtr.flush()?;
    Ok(())
}

/// One signal strength of a [`threshold_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub p: f64,
    pub q: f64,
    pub spectral_rate: f64,
    pub counting_rate: f64,
    pub counting_condition: bool,
    pub dense_window_feasible: bool,
}

/// Recovery rates of both algorithms as `p - q` varies with `q` fixed at
/// `base.q`. All points share seeds `base.seed + t`, so edges at a smaller
/// gap are a subset of those at a larger one.
pub fn threshold_scan(base: &HsbmParams, gaps: &[f64], trials: usize) -> Result<Vec<ThresholdPoint>> {
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    gaps.iter()
        .map(|&gap| {
            let params = base.with_pq(base.q + gap, base.q);
            params.validate()?;
            let outcomes = run_trials(&params, trials, Algorithm::Both, MetricSet::default())?;
            let cell = aggregate(&params, &outcomes);
            Ok(ThresholdPoint {
                p: params.p,
                q: params.q,
                spectral_rate: cell.spectral.map_or(0.0, |s| s.exact_rate),
                counting_rate: cell.counting.map_or(0.0, |s| s.exact_rate),
                counting_condition: counting_condition(&params),
                dense_window_feasible: epsilon_window(&params, Regime::Dense).feasible,
            })
        })
        .collect()
}

pub fn write_threshold_csv(points: &[ThresholdPoint], w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "p",
        "q",
        "gap",
        "spectral_rate",
        "counting_rate",
        "counting_condition",
        "dense_window_feasible",
    ])?;
    for pt in points {
        wtr.write_record([
            pt.p.to_string(),
            pt.q.to_string(),
            (pt.p - pt.q).to_string(),
            pt.spectral_rate.to_string(),
            pt.counting_rate.to_string(),
            pt.counting_condition.to_string(),
            pt.dense_window_feasible.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Ground truth of the contiguous layout, exposed for callers that sample
/// through [`run_trial`] and need to inspect traces.
pub fn ground_truth(params: &HsbmParams) -> Partition {
    Partition::contiguous(params.k, params.s)
}
