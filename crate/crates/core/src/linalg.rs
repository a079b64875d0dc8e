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

//! Dense symmetric matrices and a deterministic symmetric eigensolver.
//!
//! The eigensolver is Householder tridiagonalization followed by the
//! implicit-shift QL iteration (the EISPACK `tred2`/`tql2` pair as laid out in
//! JAMA). No randomness and no data-dependent pivoting, so identical input
//! always yields bit-identical output.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::{Error, Result};

/// Dense real symmetric `n x n` matrix, row-major. Writes go through [`set`]
/// and [`add`], which mirror across the diagonal, so symmetry is exact.
///
/// [`set`]: SymmetricMatrix::set
/// [`add`]: SymmetricMatrix::add
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Fills the upper triangle from `f(i, j)` with `i <= j` and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Takes the upper triangle of a row-major square buffer and mirrors it.
    pub fn from_upper(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(data.len(), n * n));
        }
        Ok(Self::from_fn(n, |i, j| data[i * n + j]))
    }

    /// `sum_i w_i v_i v_i^T` over the given vectors.
    pub fn from_outer_products<'a>(n: usize, terms: impl IntoIterator<Item = (f64, &'a [f64])>) -> Self {
        let mut m = Self::zeros(n);
        for (w, v) in terms {
            for i in 0..n {
                let wi = w * v[i];
                if wi == 0.0 {
                    continue;
                }
                for j in i..n {
                    m.data[i * n + j] += wi * v[j];
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                m.data[j * n + i] = m.data[i * n + j];
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    /// Adds `delta` to entries `(i, j)` and `(j, i)` (once when `i == j`).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, delta: f64) {
        self.data[i * self.n + j] += delta;
        if i != j {
            self.data[j * self.n + i] += delta;
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Column `j`, which equals row `j` by symmetry.
    pub fn column(&self, j: usize) -> &[f64] {
        self.row(j)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add_matrix(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, factor: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    fn zip_with(&self, other: &SymmetricMatrix, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(self.n, other.n));
        }
        Ok(SymmetricMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match dimension");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Row-major `self * other`. The product of two symmetric matrices is not
    /// symmetric in general, hence the plain buffer.
    pub fn product(&self, other: &SymmetricMatrix) -> Result<Vec<f64>> {
        if self.n != other.n {
            return Err(Error::Dimension(self.n, other.n));
        }
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * self`, which is symmetric.
    pub fn square(&self) -> SymmetricMatrix {
        let full = self.product(self).expect("same dimension");
        SymmetricMatrix::from_fn(self.n, |i, j| full[i * self.n + j])
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn principal_submatrix(&self, idx: &[usize]) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    /// Row-major CSV in full-precision scientific notation.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let mut line = String::new();
        for i in 0..self.n {
            line.clear();
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                write!(line, "{x:.17e}").expect("write to String");
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Lower bound on the spectral norm from power iteration: `max ||X x||`
    /// over the unit iterates. Converges to `max |lambda_i|` when the top
    /// eigenvalue magnitude is isolated; stops once successive estimates agree
    /// to `rel_tol`.
    pub fn power_norm_estimate(&self, max_iter: usize, rel_tol: f64) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        // deterministic start with a small index-dependent tilt so it is not
        // orthogonal to structured eigenvectors such as the all-ones vector
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 + 1.0).sqrt() * 1e-3).collect();
        normalize(&mut x);
        let mut best = 0.0f64;
        let mut prev = 0.0f64;
        for _ in 0..max_iter {
            // two steps per round: X^2 shares eigenvectors with X and its
            // dominant eigenvalue is never split by sign
            let mut y = self.mul_vec(&x);
            let norm = l2_norm(&y);
            best = best.max(norm);
            if norm == 0.0 {
                break;
            }
            y.iter_mut().for_each(|v| *v /= norm);
            let mut z = self.mul_vec(&y);
            let norm2 = l2_norm(&z);
            best = best.max(norm2);
            if norm2 == 0.0 {
                break;
            }
            z.iter_mut().for_each(|v| *v /= norm2);
            x = z;
            if (best - prev).abs() <= rel_tol * best {
                break;
            }
            prev = best;
        }
        best
    }
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let norm = l2_norm(x);
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Eigenvalues in non-increasing order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<f64>,
    // eigenvector i occupies vectors[i * n..(i + 1) * n]
    vectors: Vec<f64>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.vectors[i * n..(i + 1) * n]
    }

    /// `max |V^T V - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let dot: f64 = self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.n();
        SymmetricMatrix::from_outer_products(n, (0..n).map(|i| (self.values[i], self.vector(i))))
    }

    /// `max_i |lambda_i|`.
    pub fn spectral_radius(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            _ => 0.0,
        }
    }
}

/// Full eigendecomposition of a symmetric matrix.
pub fn eig_sym(x: &SymmetricMatrix) -> Result<EigenSystem> {
    if !x.is_finite() {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let n = x.n();
    if n == 0 {
        return Ok(EigenSystem {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    // stable sort on (value desc, index asc)
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &col in &order {
        vectors.extend((0..n).map(|row| v[row][col]));
    }
    Ok(EigenSystem { values, vectors })
}

/// Householder reduction to symmetric tridiagonal form. On return `d` holds
/// the diagonal, `e[1..]` the subdiagonal and `v` the accumulated transform.
fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);

    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal form, accumulating
/// rotations into `v`. Eigenvalues land in `d` (unsorted).
fn tridiagonal_ql(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let max_sweeps = 64 * n.max(1);
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::Numeric(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in &mut d[l + 2..] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        let h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymmetricMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn check_invariants(x: &SymmetricMatrix, es: &EigenSystem) {
        assert!(es.orthogonality_error() <= 1e-10, "orth {}", es.orthogonality_error());
        let recon = es.reconstruct().max_abs_diff(x).unwrap();
        assert!(recon <= 1e-8 * x.max_abs().max(1.0), "recon {recon}");
        assert!(es.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let es = eig_sym(&SymmetricMatrix::identity(7)).unwrap();
        assert!(es.values().iter().all(|&l| (l - 1.0).abs() < 1e-14));
        check_invariants(&SymmetricMatrix::identity(7), &es);
    }

    #[test]
    fn diagonal_matrix() {
        let x = SymmetricMatrix::diagonal(&[1.0, 3.0, -2.0]);
        let es = eig_sym(&x).unwrap();
        assert_eq!(es.values(), &[3.0, 1.0, -2.0]);
        for (i, expect) in [1usize, 0, 2].iter().enumerate() {
            let v = es.vector(i);
            assert!((v[*expect].abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn trivial_sizes() {
        assert_eq!(eig_sym(&SymmetricMatrix::zeros(0)).unwrap().n(), 0);
        let es = eig_sym(&SymmetricMatrix::diagonal(&[-4.5])).unwrap();
        assert_eq!(es.values(), &[-4.5]);
        assert_eq!(es.vector(0), &[1.0]);
    }

    #[test]
    fn rejects_non_finite() {
        let mut x = SymmetricMatrix::zeros(3);
        x.set(0, 2, f64::NAN);
        assert!(matches!(eig_sym(&x), Err(Error::Numeric(_))));
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[a, b], [b, c]] has eigenvalues (a+c)/2 +- sqrt(((a-c)/2)^2 + b^2)
        let (a, b, c) = (2.0, -3.0, 0.5);
        let x = SymmetricMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => a,
            (1, 1) => c,
            _ => b,
        });
        let mid = (a + c) / 2.0;
        let rad = (((a - c) / 2.0f64).powi(2) + b * b).sqrt();
        let es = eig_sym(&x).unwrap();
        assert!((es.values()[0] - (mid + rad)).abs() < 1e-13);
        assert!((es.values()[1] - (mid - rad)).abs() < 1e-13);
    }

    #[test]
    fn deterministic() {
        let x = random_symmetric(40, 3);
        let a = eig_sym(&x).unwrap();
        let b = eig_sym(&x).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn power_iteration_is_a_tight_lower_bound() {
        for seed in 0..5 {
            let x = random_symmetric(50, seed);
            let exact = eig_sym(&x).unwrap().spectral_radius();
            let est = x.power_norm_estimate(20_000, 1e-13);
            assert!(est <= exact * (1.0 + 1e-12));
            assert!((exact - est) / exact < 1e-6, "seed {seed}: {est} vs {exact}");
        }
    }

    #[test]
    fn csv_export_round_trips_values() {
        let x = SymmetricMatrix::from_fn(2, |i, j| (i + 2 * j) as f64 / 3.0);
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<f64> = text
            .lines()
            .flat_map(|l| l.split(',').map(|t| t.parse::<f64>().unwrap()))
            .collect();
        assert_eq!(parsed, x.as_slice());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn decomposition_invariants(n in 1usize..30, seed in any::<u64>(), scale in 1e-3f64..1e3) {
            let x = random_symmetric(n, seed).scale(scale);
            let es = eig_sym(&x).unwrap();
            check_invariants(&x, &es);
        }

        #[test]
        fn repeated_eigenvalues(k in 1usize..6, m in 1usize..6, seed in any::<u64>()) {
            // Q diag(2 I_k, -1 I_m) Q^T with Q from a random orthonormal basis
            let n = k + m;
            let basis = eig_sym(&random_symmetric(n, seed)).unwrap();
            let x = SymmetricMatrix::from_outer_products(
                n,
                (0..n).map(|i| (if i < k { 2.0 } else { -1.0 }, basis.vector(i))),
            );
            let es = eig_sym(&x).unwrap();
            for (i, &l) in es.values().iter().enumerate() {
                let expect = if i < k { 2.0 } else { -1.0 };
                prop_assert!((l - expect).abs() < 1e-10);
            }
            check_invariants(&x, &es);
        }
    }
}
