//! Banded LU factorization with partial pivoting.
//!
//! The beam tangent matrix couples only neighbouring nodes, so in the
//! free-DOF numbering it is banded with half-bandwidth 5. Dense
//! factorization would dominate the solve time at fine meshes; a banded
//! factorization keeps each Newton iteration linear in the node count.
//!
//! Storage follows the LAPACK band convention: entry `(i, j)` of an
//! `n x n` matrix with `kl` sub- and `ku` superdiagonals lives at
//! `data[j * ldab + kl + ku + i - j]` with `ldab = 2 kl + ku + 1`. The
//! extra `kl` rows absorb fill-in from row pivoting.

/// Square banded matrix in LAPACK band storage.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    /// Zero matrix of size `n` with `kl` sub- and `ku` superdiagonals.
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0);
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    fn in_band(&self, row: usize, col: usize) -> bool {
        row + self.ku >= col && col + self.kl >= row
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.n && col < self.n);
        col * self.ldab + self.kl + self.ku + row - col
    }

    /// Adds `value` to entry `(row, col)`; the entry must lie in the band.
    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(self.in_band(row, col), "({row},{col}) outside band");
        let i = self.idx(row, col);
        self.data[i] += value;
    }

    pub fn reset(&mut self) {
        self.data.fill(0.0);
    }

    /// Factors the matrix in place and solves `A x = rhs`, overwriting
    /// `rhs` with the solution. Returns `false` when a zero pivot makes the
    /// matrix numerically singular; `rhs` is garbage in that case.
    ///
    /// Unblocked gbtrf/gbtrs: for each column, pick the largest-magnitude
    /// pivot among the `kl` rows below the diagonal, swap rows inside the
    /// band, and eliminate. Fill-in stays within `kl + ku` superdiagonals.
    pub fn solve_in_place(&mut self, rhs: &mut [f64]) -> bool {
        assert_eq!(rhs.len(), self.n);
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let ab = &mut self.data;
        let mut pivots = vec![0usize; n];

        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // Pivot search down column j: rows j..=j+km.
            let mut jp = 0;
            let mut best = ab[j * ldab + kv].abs();
            for i in 1..=km {
                let v = ab[j * ldab + kv + i].abs();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            pivots[j] = j + jp;
            let pivot = ab[j * ldab + kv + jp];
            if pivot == 0.0 {
                return false;
            }
            let ju = (j + ku + kl).min(n - 1);
            if jp != 0 {
                for col in j..=ju {
                    let a = col * ldab + kv + j - col;
                    ab.swap(a, a + jp);
                }
            }
            let diag = ab[j * ldab + kv];
            for i in 1..=km {
                let m = ab[j * ldab + kv + i] / diag;
                ab[j * ldab + kv + i] = m;
                if m != 0.0 {
                    for col in (j + 1)..=ju {
                        let base = col * ldab + kv + j - col;
                        ab[base + i] -= m * ab[base];
                    }
                }
            }
        }

        // Forward substitution with the recorded row swaps.
        for j in 0..n {
            let p = pivots[j];
            if p != j {
                rhs.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let bj = rhs[j];
            if bj != 0.0 {
                for i in 1..=km {
                    rhs[j + i] -= ab[j * ldab + kv + i] * bj;
                }
            }
        }
        // Back substitution through the filled upper triangle.
        for j in (0..n).rev() {
            let x = rhs[j] / ab[j * ldab + kv];
            rhs[j] = x;
            if x != 0.0 {
                let top = j.saturating_sub(kv);
                for i in top..j {
                    rhs[i] -= ab[j * ldab + kv + i - j] * x;
                }
            }
        }
        true
    }
}
