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

//! Vertex-to-cluster assignments and permutation-invariant comparison.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::SymmetricMatrix;
use crate::{Error, Result};

/// Assignment of `n` vertices to clusters `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Checks that every label is below `k` and every cluster is non-empty.
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self> {
        let mut used = vec![false; k];
        for (v, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::param(format!("vertex {v} has label {l}, expected < {k}")));
            }
            used[l] = true;
        }
        if let Some(empty) = used.iter().position(|u| !u) {
            return Err(Error::param(format!("cluster {empty} is empty")));
        }
        Ok(Partition { labels, k })
    }

    /// Builds a partition from disjoint clusters covering `0..n`. Cluster `i`
    /// of the input becomes label `i`.
    pub fn from_clusters(n: usize, clusters: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (i, cluster) in clusters.iter().enumerate() {
            for &v in cluster {
                if v >= n {
                    return Err(Error::param(format!("vertex {v} out of range 0..{n}")));
                }
                if labels[v] != usize::MAX {
                    return Err(Error::param(format!("vertex {v} assigned twice")));
                }
                labels[v] = i;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::param(format!("vertex {v} is unassigned")));
        }
        Partition::from_labels(labels, clusters.len())
    }

    /// Contiguous blocks: vertices `0..s` in cluster 0, `s..2s` in cluster 1, ...
    pub fn contiguous(k: usize, s: usize) -> Self {
        Partition {
            labels: (0..k * s).map(|v| v / s).collect(),
            k,
        }
    }

    /// Equal-size clusters over a seeded random vertex order. Used to check
    /// that nothing downstream depends on the contiguous layout.
    pub fn shuffled(k: usize, s: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..k * s).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut labels = vec![0; k * s];
        for (pos, &v) in order.iter().enumerate() {
            labels[v] = pos / s;
        }
        Partition { labels, k }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Members of each cluster in ascending vertex order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &l) in self.labels.iter().enumerate() {
            out[l].push(v);
        }
        out
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// `Some(s)` when every cluster has exactly `s` vertices.
    pub fn equal_size(&self) -> Option<usize> {
        let sizes = self.cluster_sizes();
        let s = sizes[0];
        sizes.iter().all(|&x| x == s).then_some(s)
    }

    /// Restriction to `keep` (ascending ids), relabelled so the surviving
    /// clusters are numbered `0..` in order of first appearance.
    pub fn restrict(&self, keep: &[usize]) -> Result<Partition> {
        let mut remap = vec![usize::MAX; self.k];
        let mut next = 0;
        let mut labels = Vec::with_capacity(keep.len());
        for &v in keep {
            let l = self.labels[v];
            if remap[l] == usize::MAX {
                remap[l] = next;
                next += 1;
            }
            labels.push(remap[l]);
        }
        Partition::from_labels(labels, next)
    }

    /// Cluster incidence matrix: `Y[u][v] = 1` iff `u` and `v` share a cluster
    /// (including `u = v`).
    pub fn incidence_matrix(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(
            self.n(),
            |u, v| {
                if self.labels[u] == self.labels[v] {
                    1.0
                } else {
                    0.0
                }
            },
        )
    }
}

/// Outcome of [`compare_partitions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionComparison {
    /// Identical up to relabelling of clusters.
    pub exact: bool,
    /// Minimum number of vertices whose label disagrees, over all relabellings.
    pub misclassified: usize,
}

/// Compares two partitions of the same vertex set up to cluster relabelling.
pub fn compare_partitions(a: &Partition, b: &Partition) -> Result<PartitionComparison> {
    if a.n() != b.n() {
        return Err(Error::Dimension(a.n(), b.n()));
    }
    let overlap = overlap_matrix(a, b);
    let matched = max_weight_assignment(&overlap);
    let misclassified = a.n() - matched;
    Ok(PartitionComparison {
        exact: majority_map_is_bijective(a, b, &overlap),
        misclassified,
    })
}

/// `overlap[i][j] = |a_i ∩ b_j|`.
pub fn overlap_matrix(a: &Partition, b: &Partition) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; b.k()]; a.k()];
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        m[la][lb] += 1;
    }
    m
}

fn majority_map_is_bijective(a: &Partition, b: &Partition, overlap: &[Vec<usize>]) -> bool {
    if a.k() != b.k() {
        return false;
    }
    let a_sizes = a.cluster_sizes();
    let mut hit = vec![false; b.k()];
    for (i, row) in overlap.iter().enumerate() {
        let Some(j) = row.iter().position(|&c| c == a_sizes[i]) else {
            return false;
        };
        if hit[j] {
            return false;
        }
        hit[j] = true;
    }
    true
}

/// Maximum total weight of a one-to-one matching between rows and columns
/// (Hungarian algorithm on the negated, square-padded matrix).
pub fn max_weight_assignment(weights: &[Vec<usize>]) -> usize {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let size = rows.max(cols);
    if size == 0 {
        return 0;
    }
    let max_w = weights.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| -> i64 {
        let w = if i < rows && j < cols { weights[i][j] as i64 } else { 0 };
        max_w - w
    };

    // e-maxx formulation, 1-indexed with a sentinel column 0.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; size + 1];
    let mut v = vec![0i64; size + 1];
    let mut p = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for i in 1..=size {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=size {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=size)
        .filter(|&j| p[j] >= 1 && p[j] - 1 < rows && j - 1 < cols)
        .map(|j| weights[p[j] - 1][j - 1])
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for perm in permutations(k - 1) {
            for pos in 0..=perm.len() {
                let mut p = perm.clone();
                p.insert(pos, k - 1);
                out.push(p);
            }
        }
        out
    }

    /// Disagreements minimised over every relabelling of `b`.
    fn brute_force_misclassified(a: &[usize], b: &[usize], k: usize) -> usize {
        permutations(k)
            .iter()
            .map(|perm| a.iter().zip(b).filter(|(&x, &y)| perm[y] != x).count())
            .min()
            .unwrap()
    }

    #[test]
    fn identical_and_relabelled() {
        let a = Partition::contiguous(3, 4);
        assert_eq!(
            compare_partitions(&a, &a).unwrap(),
            PartitionComparison {
                exact: true,
                misclassified: 0
            }
        );
        let relabelled: Vec<usize> = a.labels().iter().map(|&l| (l + 1) % 3).collect();
        let b = Partition::from_labels(relabelled, 3).unwrap();
        assert_eq!(
            compare_partitions(&a, &b).unwrap(),
            PartitionComparison {
                exact: true,
                misclassified: 0
            }
        );
    }

    #[test]
    fn one_swap_costs_two() {
        let a = Partition::contiguous(2, 3);
        let b = Partition::from_labels(vec![0, 0, 1, 0, 1, 1], 2).unwrap();
        let cmp = compare_partitions(&a, &b).unwrap();
        assert!(!cmp.exact);
        assert_eq!(cmp.misclassified, 2);
        assert_eq!(brute_force_misclassified(a.labels(), b.labels(), 2), 2);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let a = Partition::contiguous(2, 3);
        let b = Partition::contiguous(2, 2);
        assert!(matches!(compare_partitions(&a, &b), Err(Error::Dimension(6, 4))));
    }

    #[test]
    fn from_clusters_validates_cover() {
        assert!(Partition::from_clusters(4, &[vec![0, 1], vec![2]]).is_err());
        assert!(Partition::from_clusters(3, &[vec![0, 1], vec![1, 2]]).is_err());
        let p = Partition::from_clusters(4, &[vec![2, 3], vec![0, 1]]).unwrap();
        assert_eq!(p.labels(), &[1, 1, 0, 0]);
    }

    #[test]
    fn shuffled_layout_has_equal_sizes() {
        let p = Partition::shuffled(4, 5, 11);
        assert_eq!(p.equal_size(), Some(5));
        assert_ne!(p, Partition::contiguous(4, 5));
    }

    proptest! {
        #[test]
        fn hungarian_matches_brute_force(
            k in 1usize..=4,
            raw_a in proptest::collection::vec(0usize..4, 12),
            raw_b in proptest::collection::vec(0usize..4, 12),
        ) {
            let a: Vec<usize> = raw_a.iter().map(|&l| l % k).collect();
            let b: Vec<usize> = raw_b.iter().map(|&l| l % k).collect();
            // labels may leave clusters empty; compare through raw overlap
            let pa = Partition { labels: a.clone(), k };
            let pb = Partition { labels: b.clone(), k };
            let cmp = compare_partitions(&pa, &pb).unwrap();
            prop_assert_eq!(cmp.misclassified, brute_force_misclassified(&a, &b, k));
            if cmp.exact {
                prop_assert_eq!(cmp.misclassified, 0);
            }
        }
    }
}
