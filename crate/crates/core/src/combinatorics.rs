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

//! Binomial coefficients and lexicographic enumeration of k-subsets.

/// Exact binomial coefficient in 128-bit arithmetic, `None` on overflow.
///
/// Uses the running product `C(n, i+1) = C(n, i) * (n - i) / (i + 1)`, which
/// stays integral at every step.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        let num = u128::from(n - i);
        // divide out the gcd first so the intermediate product overflows late
        let den = u128::from(i + 1);
        let g = gcd(acc, den);
        let (a, d) = (acc / g, den / g);
        acc = a.checked_mul(num / d)?;
        // `d` divides `num` because `acc * num / den` is integral and
        // gcd(a, d) = 1.
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Binomial coefficient as `f64`. Exact integer arithmetic is used whenever
/// the value fits in 128 bits; beyond that the product is formed in floating
/// point.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    match binomial(n, k) {
        Some(v) => v as f64,
        None => {
            let k = k.min(n - k);
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
    }
}

/// `C(n, k)` for signed arguments, zero whenever `k < 0` or `k > n`.
///
/// Handy for closed forms such as `C(s - 2, d - 2)` where the arguments are
/// differences of sizes.
pub fn binomial_signed(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        0.0
    } else {
        binomial_f64(n as u64, k as u64)
    }
}

/// Lexicographic walk over all `k`-element subsets of `0..n`.
///
/// The current subset is exposed as a strictly ascending slice; `advance`
/// moves to the successor in place, so enumeration allocates once.
#[derive(Debug, Clone)]
pub struct KSubsets {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl KSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        KSubsets {
            n,
            current: (0..k).collect(),
            done: k > n,
        }
    }

    /// The subset under the cursor, or `None` once enumeration is exhausted.
    pub fn current(&self) -> Option<&[usize]> {
        if self.done {
            None
        } else {
            Some(&self.current)
        }
    }

    /// Step to the lexicographic successor. Returns `false` when there is none.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        let k = self.current.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.current[i] < self.n - k + i {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                return true;
            }
        }
        self.done = true;
        false
    }

    /// Calls `f` on every subset in lexicographic order.
    pub fn for_each(mut self, mut f: impl FnMut(&[usize])) {
        while let Some(subset) = self.current() {
            f(subset);
            self.advance();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pascal(n: u64, k: u64) -> u128 {
        let mut row = vec![1u128];
        for _ in 0..n {
            let mut next = vec![1u128; row.len() + 1];
            for j in 1..row.len() {
                next[j] = row[j - 1] + row[j];
            }
            row = next;
        }
        row.get(k as usize).copied().unwrap_or(0)
    }

    #[test]
    fn binomial_matches_pascal_triangle() {
        for n in 0..60 {
            for k in 0..=n + 1 {
                assert_eq!(binomial(n, k), Some(pascal(n, k)), "C({n},{k})");
            }
        }
    }

    #[test]
    fn binomial_large_values() {
        // C(2000, 6) fits comfortably; C(2000, 7) overflows u64 but not u128.
        let c = binomial(2000, 7).unwrap();
        assert!(c > u128::from(u64::MAX));
        assert_eq!(binomial(2000, 6).unwrap() * 1994 / 7, c);
        assert!(binomial(1000, 500).is_none());
        let approx = binomial_f64(1000, 500);
        assert!(approx.is_finite() && approx > 1e298);
    }

    #[test]
    fn signed_binomial_edges() {
        assert_eq!(binomial_signed(1, 1), 1.0);
        assert_eq!(binomial_signed(3, 0), 1.0);
        assert_eq!(binomial_signed(-1, 0), 0.0);
        assert_eq!(binomial_signed(2, 3), 0.0);
    }

    #[test]
    fn subsets_are_lexicographic_and_complete() {
        for n in 0..9 {
            for k in 0..=n + 1 {
                let mut seen: Vec<Vec<usize>> = Vec::new();
                KSubsets::new(n, k).for_each(|s| seen.push(s.to_vec()));
                assert_eq!(seen.len() as u128, binomial(n as u64, k as u64).unwrap());
                for w in seen.windows(2) {
                    assert!(w[0] < w[1]);
                }
                for s in &seen {
                    assert!(s.windows(2).all(|p| p[0] < p[1]));
                    assert!(s.iter().all(|&v| v < n));
                }
            }
        }
    }
}
