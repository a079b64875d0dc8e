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

//! Iterated spectral projection with hyperedge-count refinement, the pairwise
//! counting baseline, and the epsilon-window diagnostic.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::combinatorics::binomial_f64;
use crate::hypergraph::{vertex_mask, HsbmParams, UniformHypergraph};
use crate::linalg::{eig_sym, SymmetricMatrix};
use crate::partition::{compare_partitions, Partition};
use crate::spectral::{concentration_bound, projector_from_eigensystem, sparse_concentration_bound, Projector};
use crate::{Error, Result};

/// Orders `(score, vertex)` pairs by score descending, then vertex ascending.
fn by_score_then_index<T: PartialOrd>(a: &(T, usize), b: &(T, usize)) -> std::cmp::Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

/// `W_v`: `v` plus the `s - 1` largest off-diagonal entries of column `v`,
/// ties to the lower index. Returned in ascending order.
pub fn candidate_set(p: &Projector, v: usize, s: usize) -> Vec<usize> {
    let col = p.matrix().column(v);
    let mut others: Vec<(f64, usize)> = (0..p.n()).filter(|&u| u != v).map(|u| (col[u], u)).collect();
    let take = s.saturating_sub(1).min(others.len());
    if take < others.len() {
        others.select_nth_unstable_by(take, by_score_then_index);
    }
    let mut w: Vec<usize> = others[..take].iter().map(|&(_, u)| u).collect();
    w.push(v);
    w.sort_unstable();
    w
}

/// The column whose candidate set has the largest projected indicator norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub column: usize,
    pub set: Vec<usize>,
    pub norm: f64,
}

/// Relative slack under which two candidate norms count as tied. Exactly
/// tied norms in exact arithmetic come out of the eigensolver a few ulps
/// apart, and the tie rule should still see them as equal.
pub const NORM_TIE_TOLERANCE: f64 = 1e-12;

/// Scans every column; ties (within [`NORM_TIE_TOLERANCE`]) go to the
/// smallest column index.
pub fn best_candidate(p: &Projector, s: usize) -> Candidate {
    let scored: Vec<(f64, Vec<usize>)> = (0..p.n())
        .map(|v| {
            let set = candidate_set(p, v, s);
            (p.indicator_norm(&set), set)
        })
        .collect();
    let top = scored.iter().fold(f64::NEG_INFINITY, |m, (norm, _)| m.max(*norm));
    let column = scored
        .iter()
        .position(|(norm, _)| *norm >= top - NORM_TIE_TOLERANCE * top.abs())
        .expect("projector has at least one column");
    let (norm, set) = scored.into_iter().nth(column).expect("in range");
    Candidate { column, set, norm }
}

/// Output of [`refine_cluster`].
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    /// The `s` vertices with the largest `N_{v,W}`, ascending.
    pub cluster: Vec<usize>,
    /// `N_{v,W}` for every vertex.
    pub counts: Vec<usize>,
}

/// Keeps the `s` vertices with the most hyperedges reaching into `W`.
pub fn refine_cluster(h: &UniformHypergraph, w: &[usize], s: usize) -> Refinement {
    let counts = h.incident_counts(&vertex_mask(h.n(), w));
    let mut ranked: Vec<(usize, usize)> = counts.iter().enumerate().map(|(v, &c)| (c, v)).collect();
    ranked.sort_by(by_score_then_index);
    let mut cluster: Vec<usize> = ranked.iter().take(s).map(|&(_, v)| v).collect();
    cluster.sort_unstable();
    Refinement { cluster, counts }
}

/// Record of one delete-and-repeat round. Vertex ids are those of the input
/// hypergraph.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    /// Original ids of the vertices still present at the start of the round.
    pub vertices: Vec<usize>,
    pub rank: usize,
    /// `None` for the final round, which takes the last `s` vertices as is.
    pub column: Option<usize>,
    pub candidate: Vec<usize>,
    /// `||P 1_W||_2`.
    pub candidate_norm: Option<f64>,
    /// `lambda_rank - lambda_{rank+1}` of the current adjacency matrix.
    pub eigen_gap: Option<f64>,
    /// Set when `eigen_gap <= 0`; recovery continues on the computed projector.
    pub gap_anomaly: bool,
    /// `N_{v,W}` aligned with `vertices`; empty for the final round.
    pub counts: Vec<usize>,
    pub recovered: Vec<usize>,
    /// Ground-truth cluster overlapping `W` the most, with `|W ∩ C|`.
    pub matched_cluster: Option<usize>,
    pub overlap: Option<usize>,
    pub recovered_is_cluster: Option<bool>,
}

impl IterationTrace {
    /// Smallest `N_{v,W}` among the recovered vertices and largest among the
    /// rest, when counts were computed.
    pub fn count_threshold(&self) -> Option<(usize, usize)> {
        if self.counts.is_empty() {
            return None;
        }
        let chosen = vertex_mask_sparse(&self.vertices, &self.recovered);
        let mut min_in = usize::MAX;
        let mut max_out = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if chosen[i] {
                min_in = min_in.min(c);
            } else {
                max_out = max_out.max(c);
            }
        }
        Some((min_in, max_out))
    }

    /// `N_{v,W}` split into members and non-members of ground-truth cluster
    /// `label`: `(min over members, max over non-members)`.
    pub fn count_separation(&self, truth: &Partition, label: usize) -> Option<(usize, usize)> {
        if self.counts.is_empty() {
            return None;
        }
        let mut min_in = usize::MAX;
        let mut max_out = 0;
        for (&v, &c) in self.vertices.iter().zip(&self.counts) {
            if truth.label(v) == label {
                min_in = min_in.min(c);
            } else {
                max_out = max_out.max(c);
            }
        }
        Some((min_in, max_out))
    }

    /// One `key=value` record; vertex ids are written 1-based.
    pub fn to_record(&self) -> String {
        fn ids(v: &[usize]) -> String {
            let mut out = String::new();
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{}", x + 1).unwrap();
            }
            out
        }
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "NA".to_string(), |x| x.to_string())
        }
        let (min_in, max_out) = self.count_threshold().unzip();
        format!(
            "iteration={} remaining={} rank={} column={} norm={} gap={} anomaly={} overlap={} n_min_selected={} n_max_rejected={} exact={} candidate={} recovered={}",
            self.iteration + 1,
            self.vertices.len(),
            self.rank,
            opt(self.column.map(|c| c + 1)),
            opt(self.candidate_norm.map(|x| format!("{x:.12e}"))),
            opt(self.eigen_gap.map(|x| format!("{x:.12e}"))),
            self.gap_anomaly,
            opt(self.overlap),
            opt(min_in),
            opt(max_out),
            opt(self.recovered_is_cluster),
            ids(&self.candidate),
            ids(&self.recovered),
        )
    }
}

fn vertex_mask_sparse(vertices: &[usize], members: &[usize]) -> Vec<bool> {
    // both lists ascending
    let mut out = vec![false; vertices.len()];
    let mut j = 0;
    for (i, &v) in vertices.iter().enumerate() {
        while j < members.len() && members[j] < v {
            j += 1;
        }
        out[i] = j < members.len() && members[j] == v;
    }
    out
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub partition: Partition,
    pub traces: Vec<IterationTrace>,
    /// Set when a ground truth was supplied.
    pub exact: Option<bool>,
    pub misclassified: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RecoverOptions<'a> {
    /// Projector rank for every round instead of the remaining cluster count.
    pub rank: Option<usize>,
    pub truth: Option<&'a Partition>,
}

/// Iterated spectral projection with the default options.
pub fn recover(h: &UniformHypergraph, k: usize, s: usize) -> Result<RecoveryResult> {
    recover_with(h, k, s, &RecoverOptions::default())
}

/// Each round rebuilds the adjacency matrix of the surviving sub-hypergraph,
/// projects onto its top eigenvectors (rank = clusters left), picks the best
/// candidate column, refines it by hyperedge counts and deletes the result.
/// The last `s` vertices form the final cluster without further work.
pub fn recover_with(h: &UniformHypergraph, k: usize, s: usize, opts: &RecoverOptions<'_>) -> Result<RecoveryResult> {
    let n = h.n();
    if k == 0 || s == 0 || n != k * s {
        return Err(Error::param(format!("n = {n} is not k * s = {k} * {s}")));
    }
    if let Some(truth) = opts.truth {
        if truth.n() != n {
            return Err(Error::Dimension(truth.n(), n));
        }
    }
    if opts.rank == Some(0) {
        return Err(Error::param("projector rank must be positive"));
    }

    let mut current = h.clone();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut traces = Vec::with_capacity(k);

    for iteration in 0..k {
        let remaining = k - iteration;
        let trace = if remaining == 1 {
            IterationTrace {
                iteration,
                vertices: ids.clone(),
                rank: 1,
                column: None,
                candidate: ids.clone(),
                candidate_norm: None,
                eigen_gap: None,
                gap_anomaly: false,
                counts: Vec::new(),
                recovered: ids.clone(),
                matched_cluster: None,
                overlap: None,
                recovered_is_cluster: None,
            }
        } else {
            let rank = opts.rank.unwrap_or(remaining).min(current.n());
            let es = eig_sym(&current.adjacency_matrix())?;
            let eigen_gap = (rank < current.n()).then(|| es.values()[rank - 1] - es.values()[rank]);
            let projector = projector_from_eigensystem(&es, rank)?;
            let cand = best_candidate(&projector, s);
            let refined = refine_cluster(&current, &cand.set, s);
            let to_orig = |local: &[usize]| local.iter().map(|&v| ids[v]).collect::<Vec<_>>();
            IterationTrace {
                iteration,
                vertices: ids.clone(),
                rank,
                column: Some(ids[cand.column]),
                candidate: to_orig(&cand.set),
                candidate_norm: Some(cand.norm),
                eigen_gap,
                gap_anomaly: eigen_gap.is_some_and(|g| g <= 0.0),
                counts: refined.counts,
                recovered: to_orig(&refined.cluster),
                matched_cluster: None,
                overlap: None,
                recovered_is_cluster: None,
            }
        };
        let mut trace = trace;
        if let Some(truth) = opts.truth {
            annotate(&mut trace, truth);
        }

        let recovered_mask = vertex_mask(n, &trace.recovered);
        let keep_local: Vec<usize> = (0..ids.len()).filter(|&i| !recovered_mask[ids[i]]).collect();
        clusters.push(trace.recovered.clone());
        traces.push(trace);
        if !keep_local.is_empty() {
            current = restrict(&current, &keep_local);
            ids = keep_local.iter().map(|&i| ids[i]).collect();
        }
    }

    let partition = Partition::from_clusters(n, &clusters)?;
    let (exact, misclassified) = match opts.truth {
        Some(truth) => {
            let cmp = compare_partitions(&partition, truth)?;
            (Some(cmp.exact), Some(cmp.misclassified))
        }
        None => (None, None),
    };
    Ok(RecoveryResult {
        partition,
        traces,
        exact,
        misclassified,
    })
}

fn restrict(h: &UniformHypergraph, keep: &[usize]) -> UniformHypergraph {
    match h.induced_subhypergraph(keep) {
        Ok((sub, _)) => sub,
        // fewer vertices than the uniformity: no edge survives
        Err(_) => UniformHypergraph::from_canonical(keep.len(), h.d(), Vec::new()),
    }
}

fn annotate(trace: &mut IterationTrace, truth: &Partition) {
    let mut overlap = vec![0usize; truth.k()];
    for &v in &trace.candidate {
        overlap[truth.label(v)] += 1;
    }
    // first maximum, i.e. lowest label on ties
    let (label, &best) = overlap
        .iter()
        .enumerate()
        .fold((0, &0), |acc, (i, c)| if c > acc.1 { (i, c) } else { acc });
    trace.matched_cluster = Some(label);
    trace.overlap = Some(best);
    let first = truth.label(trace.recovered[0]);
    let size = truth.cluster_sizes()[first];
    trace.recovered_is_cluster =
        Some(trace.recovered.len() == size && trace.recovered.iter().all(|&v| truth.label(v) == first));
}

/// Pairwise counting baseline. Vertices are visited in ascending order; each
/// still unassigned vertex takes the `s - 1` unassigned vertices sharing the
/// most hyperedges with it (ties to the lower index) as its cluster.
pub fn counting_recover(h: &UniformHypergraph, s: usize) -> Result<Partition> {
    let n = h.n();
    if s == 0 || !n.is_multiple_of(s) {
        return Err(Error::param(format!("n = {n} is not divisible by s = {s}")));
    }
    let a = h.adjacency_matrix();
    counting_from_adjacency(&a, s)
}

pub(crate) fn counting_from_adjacency(a: &SymmetricMatrix, s: usize) -> Result<Partition> {
    let n = a.n();
    let mut assigned = vec![false; n];
    let mut clusters = Vec::with_capacity(n / s.max(1));
    for v in 0..n {
        if assigned[v] {
            continue;
        }
        let col = a.column(v);
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&u| u != v && !assigned[u])
            .map(|u| (col[u], u))
            .collect();
        let take = (s - 1).min(others.len());
        if take < others.len() {
            others.select_nth_unstable_by(take, by_score_then_index);
        }
        let mut cluster: Vec<usize> = others[..take].iter().map(|&(_, u)| u).collect();
        cluster.push(v);
        cluster.sort_unstable();
        for &u in &cluster {
            assigned[u] = true;
        }
        clusters.push(cluster);
    }
    Partition::from_clusters(n, &clusters)
}

/// Whether the pairwise-count separation condition
/// `C(s-2,d-2)(p-q) > sqrt(6 C(n-2,d-2) log n)` holds.
pub fn counting_condition(params: &HsbmParams) -> bool {
    let lhs = params.within_excess();
    let rhs = (6.0 * binomial_f64(params.n as u64 - 2, params.d as u64 - 2) * (params.n as f64).ln()).sqrt();
    lhs > rhs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Dense,
    Sparse,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Regime::Dense),
            "sparse" => Ok(Regime::Sparse),
            other => Err(Error::param(format!("unknown regime {other:?}"))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Dense => "dense",
            Regime::Sparse => "sparse",
        })
    }
}

/// Range of analysis parameters `eps` under which the correctness argument
/// applies. Purely diagnostic: recovery never takes `eps` as input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonWindow {
    pub lower: f64,
    pub upper: f64,
    /// Denominator of the lower bound; the window is empty unless positive.
    pub denominator: f64,
    pub feasible: bool,
    pub regime: Regime,
}

impl EpsilonWindow {
    pub fn contains(&self, eps: f64) -> bool {
        self.feasible
            && match self.regime {
                Regime::Dense => self.lower <= eps && eps <= self.upper,
                Regime::Sparse => self.lower < eps && eps < self.upper,
            }
    }
}

/// Dense: `b / (C(s-2,d-2)(p-q)s - 2b) <= eps <= min(1/12, (p-q)/(32d))` with
/// `b = 6d sqrt(d C(n,d-1))`.
///
/// Sparse: `b = 2d sqrt(n^(d-1) p)`, the lower bound is the larger of
/// `b / (C(s-2,d-2)(p-q)s - 2b)` and `sqrt(3 ln n / C(s-1,d-1))`, and the
/// upper bound is `(p-q)/(32d)`, both strict.
pub fn epsilon_window(params: &HsbmParams, regime: Regime) -> EpsilonWindow {
    let (n, s, d) = (params.n, params.s, params.d);
    let signal = params.within_excess() * s as f64;
    let separation_cap = (params.p - params.q) / (32.0 * d as f64);
    match regime {
        Regime::Dense => {
            let b = concentration_bound(n, d);
            let denominator = signal - 2.0 * b;
            let lower = b / denominator;
            let upper = separation_cap.min(1.0 / 12.0);
            EpsilonWindow {
                lower,
                upper,
                denominator,
                feasible: denominator > 0.0 && lower <= upper,
                regime,
            }
        }
        Regime::Sparse => {
            let b = sparse_concentration_bound(n, d, params.p);
            let denominator = signal - 2.0 * b;
            let degree_floor = (3.0 * (n as f64).ln() / binomial_f64(s as u64 - 1, d as u64 - 1)).sqrt();
            let lower = (b / denominator).max(degree_floor);
            EpsilonWindow {
                lower,
                upper: separation_cap,
                denominator,
                feasible: denominator > 0.0 && lower < separation_cap,
                regime,
            }
        }
    }
}

/// Checks the deterministic first-round hypotheses on a trace at analysis
/// parameter `eps`: `||P 1_W|| >= (1 - 2eps) sqrt(s)`, `|W ∩ C| >= (1 - 6eps) s`,
/// and counts separated as `N >= (p - 16 d eps) C(s, d-1)` on `C` versus
/// `N <= (q + 16 d eps) C(s, d-1)` off it with the first threshold above the
/// second. Returns `None` when the trace lacks the data.
pub fn first_round_hypotheses(
    trace: &IterationTrace,
    truth: &Partition,
    params: &HsbmParams,
    eps: f64,
) -> Option<bool> {
    let s = params.s as f64;
    let norm = trace.candidate_norm?;
    let overlap = trace.overlap? as f64;
    let label = trace.matched_cluster?;
    let (min_in, max_out) = trace.count_separation(truth, label)?;
    let scale = binomial_f64(params.s as u64, params.d as u64 - 1);
    let drift = 16.0 * params.d as f64 * eps;
    let member_floor = (params.p - drift) * scale;
    let outsider_cap = (params.q + drift) * scale;
    Some(
        norm >= (1.0 - 2.0 * eps) * s.sqrt()
            && overlap >= (1.0 - 6.0 * eps) * s
            && member_floor > outsider_cap
            && min_in as f64 >= member_floor
            && max_out as f64 <= outsider_cap,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::sample_hsbm;
    use crate::spectral::{dominant_projector, expected_adjacency};

    fn exact_projector(k: usize, s: usize) -> Projector {
        let params = HsbmParams::new(k * s, k, 2, 0.9, 0.1, 0).unwrap();
        dominant_projector(&expected_adjacency(&params), k).unwrap()
    }

    #[test]
    fn candidate_from_exact_projector_is_the_cluster() {
        let p = exact_projector(3, 4);
        assert_eq!(candidate_set(&p, 5, 4), vec![4, 5, 6, 7]);
        assert_eq!(candidate_set(&p, 5, 1), vec![5]);
        let best = best_candidate(&p, 4);
        assert_eq!(best.column, 0);
        assert_eq!(best.set, vec![0, 1, 2, 3]);
        assert!((best.norm - 2.0).abs() < 1e-9);

        // the incidence matrix over s itself, built without an eigensolve
        let y = Partition::contiguous(3, 4).incidence_matrix().scale(0.25);
        let exact = Projector::from_matrix_unchecked(y, 3);
        let best = best_candidate(&exact, 4);
        assert_eq!((best.column, best.set), (0, vec![0, 1, 2, 3]));
        assert_eq!(best.norm, 2.0);
    }

    #[test]
    fn candidate_ties_prefer_low_indices() {
        // column 2 entries: 0.5 at vertices 0, 3, 4; 0.1 at vertex 1
        let m = SymmetricMatrix::from_fn(5, |i, j| match (i.min(j), i.max(j)) {
            (0, 2) | (2, 3) | (2, 4) => 0.5,
            (1, 2) => 0.1,
            (a, b) if a == b => 1.0,
            _ => 0.0,
        });
        let p = Projector::from_matrix_unchecked(m, 1);
        // brute force: rank others by (value desc, index asc) and take two
        assert_eq!(candidate_set(&p, 2, 3), vec![0, 2, 3]);
        assert_eq!(candidate_set(&p, 2, 4), vec![0, 2, 3, 4]);
    }

    #[test]
    fn single_vertex_instance() {
        let p = dominant_projector(&SymmetricMatrix::zeros(1), 1).unwrap();
        let best = best_candidate(&p, 1);
        assert_eq!((best.column, best.set), (0, vec![0]));
    }

    #[test]
    fn refine_noiseless() {
        let params = HsbmParams::new(12, 3, 3, 1.0, 0.0, 0).unwrap();
        let (h, _) = sample_hsbm(&params).unwrap();
        let r = refine_cluster(&h, &[4, 5, 6, 7], 4);
        assert_eq!(r.cluster, vec![4, 5, 6, 7]);
        assert_eq!(r.counts[5], 3);
        assert_eq!(r.counts[0], 0);
    }

    #[test]
    fn refine_without_signal_is_deterministic() {
        let params = HsbmParams::new(12, 3, 3, 0.4, 0.4, 8).unwrap();
        let (h, _) = sample_hsbm(&params).unwrap();
        let a = refine_cluster(&h, &[0, 1, 2, 3], 4);
        let b = refine_cluster(&h, &[0, 1, 2, 3], 4);
        assert_eq!(a, b);
        assert_eq!(a.cluster.len(), 4);
    }

    #[test]
    fn recover_noiseless_and_single_cluster() {
        let params = HsbmParams::new(12, 3, 3, 1.0, 0.0, 0).unwrap();
        let (h, truth) = sample_hsbm(&params).unwrap();
        let opts = RecoverOptions {
            truth: Some(&truth),
            ..Default::default()
        };
        let res = recover_with(&h, 3, 4, &opts).unwrap();
        assert_eq!(res.exact, Some(true));
        assert_eq!(res.traces.len(), 3);
        assert!(res.traces.iter().all(|t| t.recovered.len() == 4));

        let one = HsbmParams::new(6, 1, 3, 0.5, 0.5, 0).unwrap();
        let (h1, _) = sample_hsbm(&one).unwrap();
        let res1 = recover(&h1, 1, 6).unwrap();
        assert_eq!(res1.partition.labels(), &[0; 6]);
        assert_eq!(res1.traces.len(), 1);
        assert!(res1.traces[0].column.is_none());
        assert!(recover(&h1, 4, 2).is_err());
    }

    #[test]
    fn recover_is_deterministic() {
        let params = HsbmParams::new(30, 3, 3, 0.5, 0.2, 4).unwrap();
        let (h, _) = sample_hsbm(&params).unwrap();
        let a = recover(&h, 3, 10).unwrap();
        let b = recover(&h, 3, 10).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.traces, b.traces);
    }

    #[test]
    fn counting_examples() {
        let params = HsbmParams::new(12, 3, 3, 1.0, 0.0, 0).unwrap();
        let (h, truth) = sample_hsbm(&params).unwrap();
        assert_eq!(counting_recover(&h, 4).unwrap(), truth);
        assert!(counting_recover(&h, 5).is_err());

        // d = 2: counts are plain adjacency, so a noiseless graph is split
        // into its connected cliques
        let graph = HsbmParams::new(12, 3, 2, 1.0, 0.0, 2).unwrap();
        let (g, truth) = sample_hsbm(&graph).unwrap();
        assert_eq!(counting_recover(&g, 4).unwrap(), truth);
    }

    #[test]
    fn counting_condition_examples() {
        assert!(counting_condition(&HsbmParams::new(400, 2, 3, 0.9, 0.05, 0).unwrap()));
        assert!(!counting_condition(&HsbmParams::new(150, 3, 3, 0.6, 0.05, 0).unwrap()));
    }

    #[test]
    fn epsilon_window_dense_examples() {
        let none = epsilon_window(&HsbmParams::new(60, 2, 3, 0.3, 0.3, 0).unwrap(), Regime::Dense);
        assert!(none.denominator < 0.0 && !none.feasible);
        let desk = epsilon_window(&HsbmParams::new(150, 3, 3, 0.6, 0.05, 0).unwrap(), Regime::Dense);
        assert!(!desk.feasible);
        assert!(!desk.contains(0.01));
    }

    #[test]
    fn epsilon_window_sparse() {
        let w = epsilon_window(&HsbmParams::new(1000, 2, 2, 0.5, 0.1, 0).unwrap(), Regime::Sparse);
        // b = 4 sqrt(500); denominator = 0.4 * 500 - 8 sqrt(500)
        let b = 4.0 * 500f64.sqrt();
        let spectral = b / (200.0 - 2.0 * b);
        let floor = (3.0 * 1000f64.ln() / 499.0).sqrt();
        assert!((w.lower - spectral.max(floor)).abs() < 1e-12);
        assert!((w.upper - 0.4 / 64.0).abs() < 1e-15);
        assert!(!w.feasible);
        assert_eq!("sparse".parse::<Regime>().unwrap(), Regime::Sparse);
        assert!("medium".parse::<Regime>().is_err());
    }
}
