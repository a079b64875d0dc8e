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

//! Model parameters, the uniform hypergraph type and seeded HSBM sampling.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{binomial_f64, KSubsets};
use crate::linalg::SymmetricMatrix;
use crate::partition::Partition;
use crate::{Error, Result};

/// Parameters of a `d`-uniform hypergraph stochastic block model with `k`
/// equal clusters of size `s = n / k`, plus the seed of one draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsbmParams {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

impl HsbmParams {
    pub fn new(n: usize, k: usize, d: usize, p: f64, q: f64, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be positive"));
        }
        if n == 0 {
            return Err(Error::param("n must be positive"));
        }
        if !n.is_multiple_of(k) {
            return Err(Error::param(format!("n = {n} is not divisible by k = {k}")));
        }
        let params = HsbmParams {
            n,
            k,
            s: n / k,
            d,
            p,
            q,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks every invariant. `q == p` is accepted (diagnostic sampling);
    /// use [`is_planted`](Self::is_planted) to require a signal.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.s == 0 || self.n != self.k * self.s {
            return Err(Error::param(format!(
                "n = {} must equal k * s = {} * {}",
                self.n, self.k, self.s
            )));
        }
        if self.d < 2 {
            return Err(Error::param(format!("uniformity d = {} must be at least 2", self.d)));
        }
        if self.d > self.s {
            return Err(Error::param(format!(
                "uniformity d = {} exceeds cluster size s = {}",
                self.d, self.s
            )));
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.q > self.p {
            return Err(Error::param(format!("q = {} exceeds p = {}", self.q, self.p)));
        }
        Ok(())
    }

    pub fn is_planted(&self) -> bool {
        self.q < self.p
    }

    pub fn with_seed(self, seed: u64) -> Self {
        HsbmParams { seed, ..self }
    }

    pub fn with_pq(self, p: f64, q: f64) -> Self {
        HsbmParams { p, q, ..self }
    }

    /// Signal term `C(s-2, d-2) (p - q)` shared by the closed forms.
    pub(crate) fn within_excess(&self) -> f64 {
        binomial_f64(self.s as u64 - 2, self.d as u64 - 2) * (self.p - self.q)
    }

    /// Background term `C(n-2, d-2) q`.
    pub(crate) fn background(&self) -> f64 {
        binomial_f64(self.n as u64 - 2, self.d as u64 - 2) * self.q
    }
}

/// A `d`-uniform hypergraph on vertices `0..n`.
///
/// Edges are kept as one flat buffer of strictly ascending `d`-tuples in
/// lexicographic order, which also serves as the membership index (binary
/// search). The per-vertex incidence lists are built on first use.
#[derive(Debug, Clone)]
pub struct UniformHypergraph {
    n: usize,
    d: usize,
    edges: Vec<u32>,
    incidence: OnceLock<Vec<Vec<u32>>>,
}

impl PartialEq for UniformHypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.edges == other.edges
    }
}

impl Eq for UniformHypergraph {}

impl UniformHypergraph {
    /// Validates and canonicalises the edge list: each edge is sorted, edges
    /// are sorted lexicographically, and repeated vertices, out-of-range ids
    /// or duplicate edges are rejected.
    pub fn new(n: usize, d: usize, edges: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("uniformity must be positive"));
        }
        if n > u32::MAX as usize {
            return Err(Error::param("too many vertices"));
        }
        let mut tuples: Vec<Vec<u32>> = Vec::new();
        for mut e in edges {
            if e.len() != d {
                return Err(Error::param(format!("edge {e:?} does not have {d} vertices")));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("edge {e:?} repeats a vertex")));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::param(format!("vertex {v} out of range 0..{n}")));
            }
            tuples.push(e.into_iter().map(|v| v as u32).collect());
        }
        tuples.sort_unstable();
        if let Some(w) = tuples.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::param(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self::from_canonical(n, d, tuples.concat()))
    }

    /// Caller guarantees canonical form.
    pub(crate) fn from_canonical(n: usize, d: usize, edges: Vec<u32>) -> Self {
        debug_assert!(d > 0 && edges.len().is_multiple_of(d));
        UniformHypergraph {
            n,
            d,
            edges,
            incidence: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len() / self.d
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        &self.edges[i * self.d..(i + 1) * self.d]
    }

    /// Edges in lexicographic order, each strictly ascending.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.edges.chunks_exact(self.d)
    }

    pub fn contains_edge(&self, vertices: &[usize]) -> bool {
        if vertices.len() != self.d {
            return false;
        }
        let mut key: Vec<u32> = vertices.iter().map(|&v| v as u32).collect();
        key.sort_unstable();
        let (mut lo, mut hi) = (0, self.edge_count());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.edge(mid).cmp(&key[..]) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Edge ids containing each vertex.
    pub fn incidence(&self) -> &[Vec<u32>] {
        self.incidence.get_or_init(|| {
            let mut inc = vec![Vec::new(); self.n];
            for (i, e) in self.edges().enumerate() {
                for &v in e {
                    inc[v as usize].push(i as u32);
                }
            }
            inc
        })
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence()[v].len()
    }

    /// `A[i][j]` = number of edges containing both `i` and `j`; zero diagonal.
    pub fn adjacency_matrix(&self) -> SymmetricMatrix {
        let n = self.n;
        let mut counts = vec![0u32; n * n];
        for e in self.edges() {
            for (a, &i) in e.iter().enumerate() {
                for &j in &e[a + 1..] {
                    counts[i as usize * n + j as usize] += 1;
                }
            }
        }
        SymmetricMatrix::from_fn(n, |i, j| f64::from(counts[i * n + j]))
    }

    /// `N_{u,W}`: edges containing `u` whose other `d - 1` vertices all lie in
    /// `W`. `u` itself may or may not belong to `W`.
    pub fn incident_count(&self, u: usize, w: &[bool]) -> usize {
        self.incidence()[u]
            .iter()
            .filter(|&&ei| self.edge(ei as usize).iter().all(|&x| x as usize == u || w[x as usize]))
            .count()
    }

    /// `N_{v,W}` for every vertex in one pass over the edges.
    ///
    /// For an edge with `c` vertices in `W`, a member `v` qualifies iff the
    /// remaining `d - 1` vertices are all in `W`, i.e. `c - [v in W] = d - 1`.
    pub fn incident_counts(&self, w: &[bool]) -> Vec<usize> {
        let mut out = vec![0usize; self.n];
        for e in self.edges() {
            let c = e.iter().filter(|&&x| w[x as usize]).count();
            if c + 1 < self.d {
                continue;
            }
            for &v in e {
                if c - usize::from(w[v as usize]) == self.d - 1 {
                    out[v as usize] += 1;
                }
            }
        }
        out
    }

    /// Keeps the edges lying entirely inside `keep` and relabels the kept
    /// vertices `0..keep.len()` in ascending order. Returns the new hypergraph
    /// and the map from new ids to ids in `self`.
    pub fn induced_subhypergraph(&self, keep: &[usize]) -> Result<(UniformHypergraph, Vec<usize>)> {
        let mut index = vec![u32::MAX; self.n];
        let mut map: Vec<usize> = keep.to_vec();
        map.sort_unstable();
        map.dedup();
        if map.len() < self.d {
            return Err(Error::Degenerate(format!(
                "cannot induce on {} vertices with uniformity {}",
                map.len(),
                self.d
            )));
        }
        if let Some(&v) = map.iter().find(|&&v| v >= self.n) {
            return Err(Error::param(format!("vertex {v} out of range 0..{}", self.n)));
        }
        for (new, &old) in map.iter().enumerate() {
            index[old] = new as u32;
        }
        let mut edges = Vec::new();
        for e in self.edges() {
            if e.iter().all(|&x| index[x as usize] != u32::MAX) {
                // monotone relabel keeps tuples ascending and order lexicographic
                edges.extend(e.iter().map(|&x| index[x as usize]));
            }
        }
        Ok((Self::from_canonical(map.len(), self.d, edges), map))
    }
}

/// Membership mask for `w` over `0..n`.
pub fn vertex_mask(n: usize, w: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in w {
        mask[v] = true;
    }
    mask
}

/// Samples one HSBM instance with the contiguous ground truth layout.
pub fn sample_hsbm(params: &HsbmParams) -> Result<(UniformHypergraph, Partition)> {
    params.validate()?;
    let truth = Partition::contiguous(params.k, params.s);
    let h = sample_with_partition(params, &truth)?;
    Ok((h, truth))
}

/// Samples with an arbitrary equal-size ground truth.
///
/// Every `d`-subset of `0..n` is visited in lexicographic order and consumes
/// exactly one uniform variate from a ChaCha8 stream seeded with
/// `params.seed`; the subset is kept when the variate falls below `p`
/// (all vertices share a cluster) or `q` (otherwise). The draw is therefore a
/// pure function of the parameters, and two parameter settings with the same
/// seed share their random numbers. With `q = 0` and `p` in `{0, 1}` the
/// outcome does not depend on the variates, and the within-cluster subsets
/// are listed directly.
pub fn sample_with_partition(params: &HsbmParams, truth: &Partition) -> Result<UniformHypergraph> {
    params.validate()?;
    if truth.n() != params.n || truth.k() != params.k || truth.equal_size() != Some(params.s) {
        return Err(Error::param("ground truth does not match n, k and s of the parameters"));
    }
    if params.q == 0.0 && (params.p == 0.0 || params.p == 1.0) {
        return Ok(planted_only(params, truth));
    }
    Ok(sample_by_enumeration(params, truth))
}

fn planted_only(params: &HsbmParams, truth: &Partition) -> UniformHypergraph {
    let mut rows: Vec<Vec<u32>> = Vec::new();
    if params.p == 1.0 {
        for members in truth.clusters() {
            KSubsets::new(members.len(), params.d).for_each(|idx| {
                rows.push(idx.iter().map(|&i| members[i] as u32).collect());
            });
        }
        rows.sort_unstable();
    }
    UniformHypergraph::from_canonical(params.n, params.d, rows.concat())
}

fn sample_by_enumeration(params: &HsbmParams, truth: &Partition) -> UniformHypergraph {
    let labels = truth.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut edges = Vec::new();
    KSubsets::new(params.n, params.d).for_each(|subset| {
        let u: f64 = rng.gen();
        let first = labels[subset[0]];
        let within = subset[1..].iter().all(|&v| labels[v] == first);
        let prob = if within { params.p } else { params.q };
        if u < prob {
            edges.extend(subset.iter().map(|&v| v as u32));
        }
    });
    UniformHypergraph::from_canonical(params.n, params.d, edges)
}
