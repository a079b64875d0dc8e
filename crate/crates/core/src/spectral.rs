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

//! Dominant eigenspace projectors, spectral norms and the closed-form
//! expected adjacency matrix of the planted model.

use crate::combinatorics::binomial_f64;
use crate::hypergraph::HsbmParams;
use crate::linalg::{eig_sym, EigenSystem, SymmetricMatrix};
use crate::partition::Partition;
use crate::{Error, Result};

/// Orthogonal projector onto the span of the top `rank` eigenvectors.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: SymmetricMatrix,
    rank: usize,
}

impl Projector {
    #[cfg(test)]
    pub(crate) fn from_matrix_unchecked(matrix: SymmetricMatrix, rank: usize) -> Self {
        Projector { matrix, rank }
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    /// `max |P^2 - P|`.
    pub fn idempotence_error(&self) -> f64 {
        self.matrix.square().max_abs_diff(&self.matrix).expect("same dimension")
    }

    /// `||P 1_W||_2`.
    pub fn indicator_norm(&self, w: &[usize]) -> f64 {
        let mut acc = vec![0.0; self.n()];
        for &v in w {
            for (a, x) in acc.iter_mut().zip(self.matrix.column(v)) {
                *a += x;
            }
        }
        crate::linalg::l2_norm(&acc)
    }
}

/// Projector onto the eigenvectors of the `r` largest eigenvalues of `x`.
/// Ties at position `r` are resolved by the eigensolver's stable ordering.
pub fn dominant_projector(x: &SymmetricMatrix, r: usize) -> Result<Projector> {
    let es = eig_sym(x)?;
    projector_from_eigensystem(&es, r)
}

/// Same as [`dominant_projector`] for an already computed decomposition.
pub fn projector_from_eigensystem(es: &EigenSystem, r: usize) -> Result<Projector> {
    let n = es.n();
    if r == 0 || r > n {
        return Err(Error::param(format!("projector rank {r} outside 1..={n}")));
    }
    let matrix = SymmetricMatrix::from_outer_products(n, (0..r).map(|i| (1.0, es.vector(i))));
    Ok(Projector { matrix, rank: r })
}

/// `max_i |lambda_i(x)|`.
pub fn spectral_norm(x: &SymmetricMatrix) -> Result<f64> {
    Ok(eig_sym(x)?.spectral_radius())
}

/// Power-iteration lower bound on the spectral norm, for cross-checks on
/// large matrices.
pub fn spectral_norm_estimate(x: &SymmetricMatrix) -> f64 {
    x.power_norm_estimate(10_000, 1e-12)
}

/// `E[A]` under the contiguous ground truth of `params`.
pub fn expected_adjacency(params: &HsbmParams) -> SymmetricMatrix {
    expected_adjacency_for(&Partition::contiguous(params.k, params.s), params)
}

/// `E[A]` for an arbitrary equal-size layout: off-diagonal entries are
/// `C(s-2,d-2)(p-q) + C(n-2,d-2) q` within a cluster and `C(n-2,d-2) q`
/// across clusters.
pub fn expected_adjacency_for(truth: &Partition, params: &HsbmParams) -> SymmetricMatrix {
    let within = params.within_excess() + params.background();
    let across = params.background();
    SymmetricMatrix::from_fn(truth.n(), |i, j| {
        if i == j {
            0.0
        } else if truth.label(i) == truth.label(j) {
            within
        } else {
            across
        }
    })
}

/// The three eigenvalue levels of `E[A]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSummary {
    pub lambda1: f64,
    /// Shared by `lambda_2..lambda_k`; meaningful only when `k >= 2`.
    pub lambda_mid: f64,
    /// Shared by `lambda_{k+1}..lambda_n`.
    pub lambda_tail: f64,
    /// `lambda_k - lambda_{k+1}`.
    pub gap: f64,
    pub mid_multiplicity: usize,
    pub tail_multiplicity: usize,
}

impl SpectrumSummary {
    /// All `n` eigenvalues, non-increasing for planted parameters.
    pub fn eigenvalues(&self) -> Vec<f64> {
        std::iter::once(self.lambda1)
            .chain(std::iter::repeat_n(self.lambda_mid, self.mid_multiplicity))
            .chain(std::iter::repeat_n(self.lambda_tail, self.tail_multiplicity))
            .collect()
    }
}

pub fn expected_spectrum(params: &HsbmParams) -> SpectrumSummary {
    let signal = params.within_excess();
    let background = params.background();
    let (n, s, k) = (params.n as f64, params.s as f64, params.k);
    let lambda1 = signal * (s - 1.0) + background * (n - 1.0);
    let lambda_mid = signal * (s - 1.0) - background;
    let lambda_tail = -signal - background;
    let lambda_k = if k >= 2 { lambda_mid } else { lambda1 };
    SpectrumSummary {
        lambda1,
        lambda_mid,
        lambda_tail,
        gap: lambda_k - lambda_tail,
        mid_multiplicity: k - 1,
        tail_multiplicity: params.n - k,
    }
}

/// `6 d sqrt(d C(n, d-1))`, the high-probability bound on `||A - E[A]||_2`.
pub fn concentration_bound(n: usize, d: usize) -> f64 {
    let d_f = d as f64;
    6.0 * d_f * (d_f * binomial_f64(n as u64, d as u64 - 1)).sqrt()
}

/// `2 d sqrt(n^(d-1) p)`, the sparse-regime counterpart.
pub fn sparse_concentration_bound(n: usize, d: usize, p: f64) -> f64 {
    2.0 * d as f64 * ((n as f64).powi(d as i32 - 1) * p).sqrt()
}

/// Norms of `P_r(xa) - P_r(xb)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorDistance {
    pub spectral: f64,
    pub frobenius: f64,
}

pub fn projector_distance(xa: &SymmetricMatrix, xb: &SymmetricMatrix, r: usize) -> Result<ProjectorDistance> {
    if xa.n() != xb.n() {
        return Err(Error::Dimension(xa.n(), xb.n()));
    }
    let pa = dominant_projector(xa, r)?;
    let pb = dominant_projector(xb, r)?;
    Ok(distance_between(&pa, &pb))
}

pub fn distance_between(pa: &Projector, pb: &Projector) -> ProjectorDistance {
    let diff = pa.matrix().sub(pb.matrix()).expect("same dimension");
    ProjectorDistance {
        spectral: spectral_norm(&diff).expect("finite projector"),
        frobenius: diff.frobenius_norm(),
    }
}

/// Perturbation bounds for `P_k(A)` against `P_k(E[A])` given the measured
/// `||A - E[A]||_2`: with `beta - alpha = gap - 2 ||A - E[A]||_2` the
/// spectral distance is at most `||A - E[A]||_2 / (beta - alpha)` and the
/// Frobenius distance at most `sqrt(2k)` times that. `None` when the
/// perturbation closes the gap.
pub fn projector_perturbation_bound(gap: f64, perturbation: f64, k: usize) -> Option<(f64, f64)> {
    let separation = gap - 2.0 * perturbation;
    if separation <= 0.0 {
        return None;
    }
    let spectral = perturbation / separation;
    Some((spectral, (2.0 * k as f64).sqrt() * spectral))
}

/// `max_i |lambda_i(a) - lambda_i(b)|` over sorted spectra.
pub fn eigenvalue_deviation(a: &EigenSystem, b: &EigenSystem) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::sample_hsbm;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize, k: usize, d: usize, p: f64, q: f64) -> HsbmParams {
        HsbmParams::new(n, k, d, p, q, 0).unwrap()
    }

    fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymmetricMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn expected_adjacency_examples() {
        let ea = expected_adjacency(&params(6, 2, 3, 1.0, 0.0));
        assert_eq!(ea.get(0, 1), 1.0);
        assert_eq!(ea.get(0, 3), 0.0);
        assert_eq!(ea.get(2, 2), 0.0);

        let flat = expected_adjacency(&params(12, 3, 3, 0.4, 0.4));
        // C(10, 1) * 0.4
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j { 0.0 } else { 4.0 };
                assert!((flat.get(i, j) - expect).abs() < 1e-12);
            }
        }

        let graph = expected_adjacency(&params(8, 2, 2, 0.7, 0.2));
        assert!((graph.get(0, 3) - 0.7).abs() < 1e-15);
        assert!((graph.get(0, 4) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn expected_spectrum_small_noiseless() {
        let p = params(6, 2, 3, 1.0, 0.0);
        let spec = expected_spectrum(&p);
        assert_eq!((spec.lambda1, spec.lambda_mid, spec.lambda_tail), (2.0, 2.0, -1.0));
        let es = eig_sym(&expected_adjacency(&p)).unwrap();
        let expect = [2.0, 2.0, -1.0, -1.0, -1.0, -1.0];
        for (a, b) in es.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_spectrum_single_cluster() {
        let p = params(9, 1, 3, 0.6, 0.2);
        let spec = expected_spectrum(&p);
        assert_eq!(spec.mid_multiplicity, 0);
        let es = eig_sym(&expected_adjacency(&p)).unwrap();
        // single cluster: every off-diagonal entry is C(7,1) * 0.6
        assert!((spec.lambda1 - 4.2 * 8.0).abs() < 1e-12);
        assert!((es.values()[0] - spec.lambda1).abs() < 1e-10);
        for &l in &es.values()[1..] {
            assert!((l - spec.lambda_tail).abs() < 1e-10);
        }
    }

    #[test]
    fn no_signal_collapses_mid_and_tail() {
        let spec = expected_spectrum(&params(12, 3, 3, 0.3, 0.3));
        assert!((spec.lambda_mid - spec.lambda_tail).abs() < 1e-12);
        assert!((spec.lambda_tail + 3.0).abs() < 1e-12);
        assert!(spec.gap.abs() < 1e-12);
    }

    #[test]
    fn projector_examples() {
        let x = random_symmetric(6, 1);
        let full = dominant_projector(&x, 6).unwrap();
        assert!(full.matrix().max_abs_diff(&SymmetricMatrix::identity(6)).unwrap() < 1e-12);

        let v = [0.5, -0.5, 0.5, 0.5];
        let vvt = SymmetricMatrix::from_outer_products(4, [(1.0, &v[..])]);
        let p = dominant_projector(&vvt, 1).unwrap();
        assert!(p.matrix().max_abs_diff(&vvt).unwrap() < 1e-12);

        assert!(dominant_projector(&x, 0).is_err());
        assert!(dominant_projector(&x, 7).is_err());
    }

    #[test]
    fn planted_projector_is_scaled_incidence() {
        let p = params(12, 3, 3, 0.7, 0.2);
        let proj = dominant_projector(&expected_adjacency(&p), 3).unwrap();
        let target = Partition::contiguous(3, 4).incidence_matrix().scale(0.25);
        assert!(proj.matrix().max_abs_diff(&target).unwrap() <= 1e-8);
    }

    #[test]
    fn norms() {
        assert_eq!(spectral_norm(&SymmetricMatrix::diagonal(&[3.0, -5.0])).unwrap(), 5.0);
        assert_eq!(spectral_norm(&SymmetricMatrix::zeros(4)).unwrap(), 0.0);
    }

    #[test]
    fn sampled_deviation_below_concentration_bound() {
        let base = HsbmParams::new(60, 2, 3, 0.5, 0.1, 0).unwrap();
        let ea = expected_adjacency(&base);
        let bound = concentration_bound(60, 3);
        assert!((bound - 18.0 * (3.0f64 * 1770.0).sqrt()).abs() < 1e-9);
        for seed in 0..100 {
            let (h, _) = sample_hsbm(&base.with_seed(seed)).unwrap();
            let dev = spectral_norm(&h.adjacency_matrix().sub(&ea).unwrap()).unwrap();
            assert!(dev <= bound, "seed {seed}: {dev} > {bound}");
        }
    }

    #[test]
    fn identical_inputs_have_zero_distance() {
        let x = random_symmetric(8, 4);
        let dist = projector_distance(&x, &x, 3).unwrap();
        assert_eq!(
            dist,
            ProjectorDistance {
                spectral: 0.0,
                frobenius: 0.0
            }
        );
        assert!(projector_distance(&x, &random_symmetric(7, 4), 3).is_err());
    }

    #[test]
    fn sampled_projector_within_perturbation_bound() {
        let base = HsbmParams::new(60, 2, 3, 0.9, 0.05, 0).unwrap();
        let ea = expected_adjacency(&base);
        let gap = expected_spectrum(&base).gap;
        for seed in 0..10 {
            let (h, _) = sample_hsbm(&base.with_seed(seed)).unwrap();
            let a = h.adjacency_matrix();
            let dev = spectral_norm(&a.sub(&ea).unwrap()).unwrap();
            let (bound2, boundf) = projector_perturbation_bound(gap, dev, 2).unwrap();
            let dist = projector_distance(&a, &ea, 2).unwrap();
            assert!(dist.spectral <= bound2 && dist.frobenius <= boundf);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn projector_invariants(n in 1usize..20, seed in any::<u64>(), r_frac in 0.0f64..1.0) {
            let r = 1 + ((n - 1) as f64 * r_frac) as usize;
            let proj = dominant_projector(&random_symmetric(n, seed), r).unwrap();
            prop_assert!(proj.idempotence_error() <= 1e-8);
            prop_assert!((proj.matrix().trace() - r as f64).abs() <= 1e-8);
            let es = eig_sym(proj.matrix()).unwrap();
            for (i, &l) in es.values().iter().enumerate() {
                let target = if i < r { 1.0 } else { 0.0 };
                prop_assert!((l - target).abs() <= 1e-8);
            }
        }

        #[test]
        fn frobenius_within_sqrt_2r_of_spectral(n in 2usize..16, seed in any::<u64>(), r_frac in 0.0f64..1.0) {
            let r = 1 + ((n - 1) as f64 * r_frac) as usize;
            let dist = projector_distance(&random_symmetric(n, seed), &random_symmetric(n, !seed), r).unwrap();
            prop_assert!(dist.frobenius <= (2.0 * r as f64).sqrt() * dist.spectral + 1e-10);
        }

        #[test]
        fn gap_is_signal_times_s(k in 2usize..5, s in 3usize..12, d in 2usize..4, p in 0.2f64..1.0, frac in 0.0f64..1.0) {
            let prm = HsbmParams::new(k * s, k, d.min(s), p, p * frac, 0).unwrap();
            let spec = expected_spectrum(&prm);
            let expect = binomial_f64(s as u64 - 2, prm.d as u64 - 2) * (prm.p - prm.q) * s as f64;
            prop_assert!((spec.gap - expect).abs() <= 1e-9 * expect.max(1.0));
        }
    }
}
