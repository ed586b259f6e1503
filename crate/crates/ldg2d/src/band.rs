//! Banded linear algebra kernels for 5-point-stencil systems.
//!
//! Two factorizations cover everything the solvers need: LU with partial
//! pivoting for Newton and bordered-system solves, and a symmetric
//! unpivoted LDL^T whose pivot signs give the inertia of a shifted
//! Hessian (spectrum slicing for the smallest eigenvalue).

use crate::error::Error;
use crate::Result;

/// General banded matrix in LAPACK `dgbtrf` layout.
///
/// Entry `(i, j)` lives at `data[j * ldab + kl + ku + i - j]`; the top `kl`
/// rows of each column are fill space for pivoting.
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    pub fn reset(&mut self) {
        self.data.fill(0.0);
    }

    #[inline]
    fn off(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.kl >= j && j + self.ku + self.kl >= i);
        j * self.ldab + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let o = self.off(i, j);
        self.data[o] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let o = self.off(i, j);
        self.data[o] = v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.off(i, j)]
    }

    /// Factor in place with partial pivoting. Returns the pivot order.
    pub fn lu_factor(&mut self) -> Result<Vec<usize>> {
        let n = self.n;
        let (kl, ku, ldab) = (self.kl, self.ku, self.ldab);
        let kv = kl + ku; // superdiagonals including fill
        let mut ipiv = vec![0usize; n];

        for j in 0..n {
            // Pivot search in column j, rows j..=j+kl.
            let i_end = (j + kl).min(n - 1);
            let mut piv_row = j;
            let mut piv_val = self.data[j * ldab + kv].abs();
            for i in (j + 1)..=i_end {
                let v = self.data[j * ldab + kv + i - j].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = i;
                }
            }
            ipiv[j] = piv_row;
            if piv_val < f64::MIN_POSITIVE * 1e4 {
                return Err(Error::SingularLinearization {
                    pivot: piv_val,
                    row: j,
                });
            }
            let j_end = (j + kv).min(n - 1);
            if piv_row != j {
                // Swap rows j and piv_row across columns j..=j_end.
                for c in j..=j_end {
                    let oa = c * ldab + kv + j - c;
                    let ob = c * ldab + kv + piv_row - c;
                    self.data.swap(oa, ob);
                }
            }
            let pivot = self.data[j * ldab + kv];
            // Multipliers.
            for i in (j + 1)..=i_end {
                self.data[j * ldab + kv + i - j] /= pivot;
            }
            // Trailing update.
            for c in (j + 1)..=j_end {
                let ujc = self.data[c * ldab + kv + j - c];
                if ujc != 0.0 {
                    for i in (j + 1)..=i_end {
                        self.data[c * ldab + kv + i - c] -= self.data[j * ldab + kv + i - j] * ujc;
                    }
                }
            }
        }
        Ok(ipiv)
    }

    /// Solve `A x = b` in place using a previous `lu_factor` result.
    pub fn lu_solve(&self, ipiv: &[usize], b: &mut [f64]) {
        let n = self.n;
        let (kl, ldab) = (self.kl, self.ldab);
        let kv = kl + self.ku;
        // L (unit lower, with row interchanges).
        for j in 0..n {
            let p = ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                let i_end = (j + kl).min(n - 1);
                for i in (j + 1)..=i_end {
                    b[i] -= self.data[j * ldab + kv + i - j] * bj;
                }
            }
        }
        // U back substitution.
        for j in (0..n).rev() {
            let x = b[j] / self.data[j * ldab + kv];
            b[j] = x;
            if x != 0.0 {
                let i_start = j.saturating_sub(kv);
                for i in i_start..j {
                    b[i] -= self.data[j * ldab + kv + i - j] * x;
                }
            }
        }
    }
}

/// Symmetric banded matrix, lower triangle only.
///
/// Entry `(i, j)` with `j <= i <= j + kl` lives at `data[j * (kl + 1) + i - j]`.
pub struct SymBandMatrix {
    pub n: usize,
    pub kl: usize,
    data: Vec<f64>,
}

pub struct LdltFactor {
    n: usize,
    kl: usize,
    data: Vec<f64>,
    /// Number of strictly negative pivots.
    pub negatives: usize,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, kl: usize) -> Self {
        Self {
            n,
            kl,
            data: vec![0.0; (kl + 1) * n],
        }
    }

    pub fn reset(&mut self) {
        self.data.fill(0.0);
    }

    /// Accumulate into entry `(i, j)`; only the lower triangle is stored,
    /// so callers pass each symmetric pair once with `i >= j`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i >= j && i - j <= self.kl);
        self.data[j * (self.kl + 1) + (i - j)] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * (self.kl + 1) + (i - j)]
    }

    /// Unpivoted LDL^T. Fails on a pivot too close to zero, which callers
    /// handle by nudging the spectral shift.
    pub fn ldlt(&self) -> Result<LdltFactor> {
        let n = self.n;
        let kl = self.kl;
        let mut a = self.data.clone();
        let mut negatives = 0usize;
        for j in 0..n {
            let d = a[j * (kl + 1)];
            if d.abs() < 1e-300 {
                return Err(Error::SingularLinearization { pivot: d, row: j });
            }
            if d < 0.0 {
                negatives += 1;
            }
            let i_end = (j + kl).min(n - 1);
            // Scale column j to multipliers, then update the trailing
            // triangle with A(i,c) -= L(i,j) d L(c,j).
            for i in (j + 1)..=i_end {
                a[j * (kl + 1) + (i - j)] /= d;
            }
            for c in (j + 1)..=i_end {
                let s = d * a[j * (kl + 1) + (c - j)];
                if s != 0.0 {
                    for i in c..=i_end {
                        a[c * (kl + 1) + (i - c)] -= a[j * (kl + 1) + (i - j)] * s;
                    }
                }
            }
        }
        Ok(LdltFactor {
            n,
            kl,
            data: a,
            negatives,
        })
    }
}

impl LdltFactor {
    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl) = (self.n, self.kl);
        for j in 0..n {
            let bj = b[j];
            if bj != 0.0 {
                let i_end = (j + kl).min(n - 1);
                for i in (j + 1)..=i_end {
                    b[i] -= self.data[j * (kl + 1) + (i - j)] * bj;
                }
            }
        }
        for j in 0..n {
            b[j] /= self.data[j * (kl + 1)];
        }
        for j in (0..n).rev() {
            let i_end = (j + kl).min(n - 1);
            let mut s = b[j];
            for i in (j + 1)..=i_end {
                s -= self.data[j * (kl + 1) + (i - j)] * b[i];
            }
            b[j] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for j in 0..n {
            let p = (j..n)
                .max_by(|&r, &s| m[r][j].abs().partial_cmp(&m[s][j].abs()).unwrap())
                .unwrap();
            m.swap(j, p);
            x.swap(j, p);
            for i in (j + 1)..n {
                let f = m[i][j] / m[j][j];
                for c in j..n {
                    m[i][c] -= f * m[j][c];
                }
                x[i] -= f * x[j];
            }
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for c in (j + 1)..n {
                s -= m[j][c] * x[c];
            }
            x[j] = s / m[j][j];
        }
        x
    }

    fn random_banded(
        n: usize,
        kl: usize,
        ku: usize,
        seed: &mut u64,
    ) -> (BandMatrix, Vec<Vec<f64>>) {
        let mut next = || {
            *seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((*seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n - 1) {
                let v = next() + if i == j { 3.0 } else { 0.0 };
                band.set(i, j, v);
                dense[i][j] = v;
            }
        }
        (band, dense)
    }

    #[test]
    fn lu_matches_dense_gaussian_elimination() {
        let mut seed = 42u64;
        for &(n, kl, ku) in &[(7usize, 2usize, 1usize), (25, 3, 3), (40, 5, 2)] {
            let (mut band, dense) = random_banded(n, kl, ku, &mut seed);
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let ipiv = band.lu_factor().unwrap();
            let mut x = b.clone();
            band.lu_solve(&ipiv, &mut x);
            let xd = dense_solve(&dense, &b);
            for i in 0..n {
                assert!(
                    (x[i] - xd[i]).abs() < 1e-10,
                    "n={n} i={i}: {} vs {}",
                    x[i],
                    xd[i]
                );
            }
        }
    }

    #[test]
    fn ldlt_inertia_counts_eigenvalues_below_shift() {
        // 1D Dirichlet Laplacian: eigenvalues 4 sin^2(k pi / (2(n+1))), k = 1..n.
        let n = 30;
        let h2 = 1.0;
        let eigs: Vec<f64> = (1..=n)
            .map(|k| {
                4.0 / h2
                    * (k as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0)))
                        .sin()
                        .powi(2)
            })
            .collect();
        for &shift in &[0.5, 1.1, 2.3, 3.5] {
            let mut m = SymBandMatrix::zeros(n, 1);
            for i in 0..n {
                m.add(i, i, 2.0 / h2 - shift);
                if i + 1 < n {
                    m.add(i + 1, i, -1.0 / h2);
                }
            }
            let f = m.ldlt().unwrap();
            let expected = eigs.iter().filter(|&&e| e < shift).count();
            assert_eq!(f.negatives, expected, "shift={shift}");
        }
    }

    #[test]
    fn ldlt_solve_matches_lu() {
        let mut seed = 7u64;
        let n = 20;
        let kl = 3;
        // Symmetric positive definite banded matrix.
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut sym = SymBandMatrix::zeros(n, kl);
        let mut gen_entries = vec![];
        for j in 0..n {
            for i in j..=(j + kl).min(n - 1) {
                let v = if i == j { 5.0 + next() } else { next() };
                gen_entries.push((i, j, v));
                sym.add(i, j, v);
            }
        }
        let mut band = BandMatrix::zeros(n, kl, kl);
        for &(i, j, v) in &gen_entries {
            band.set(i, j, v);
            if i != j {
                band.set(j, i, v);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let f = sym.ldlt().unwrap();
        assert_eq!(f.negatives, 0);
        let mut x1 = b.clone();
        f.solve(&mut x1);
        let ipiv = band.lu_factor().unwrap();
        let mut x2 = b.clone();
        band.lu_solve(&ipiv, &mut x2);
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() < 1e-11);
        }
    }
}
