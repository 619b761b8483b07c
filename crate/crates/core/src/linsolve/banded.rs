//! Band LU with partial pivoting, in the spirit of LAPACK `gbtrf`/`gbtrs`.

use alloc::vec;
use alloc::vec::Vec;

use super::{max_abs_entry, PIVOT_TOLERANCE};
use crate::error::{Error, Result};
use crate::fdops::LinearSystem;

/// Row `r` holds columns `r − kl ..= r + kl + ku`; the extra `kl`
/// superdiagonals absorb fill from row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    dim: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn factorize(system: &LinearSystem) -> Result<Self> {
        let dim = system.dimension();
        let (mut kl, mut ku) = (0usize, 0usize);
        for &(r, c, _) in system.entries() {
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            dim,
            kl,
            ku,
            width,
            band: vec![0.0; dim * width],
            piv: Vec::with_capacity(dim),
        };
        for &(r, c, v) in system.entries() {
            let k = lu.slot(r, c);
            lu.band[k] += v;
        }
        let threshold = PIVOT_TOLERANCE * max_abs_entry(system);
        lu.eliminate(threshold)?;
        Ok(lu)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        r * self.width + (c + self.kl - r)
    }

    fn eliminate(&mut self, threshold: f64) -> Result<()> {
        let n = self.dim;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.band[self.slot(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.band[self.slot(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > threshold) {
                return Err(Error::SingularSystem {
                    index: k,
                    pivot: best,
                });
            }
            self.piv.push(p);
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.slot(k, c), self.slot(p, c));
                    self.band.swap(a, b);
                }
            }
            let pivot = self.band[self.slot(k, k)];
            for r in k + 1..=last_row {
                let s = self.slot(r, k);
                let l = self.band[s] / pivot;
                self.band[s] = l;
                if l == 0.0 {
                    continue;
                }
                for c in k + 1..=last_col {
                    let kc = self.band[self.slot(k, c)];
                    let rc = self.slot(r, c);
                    self.band[rc] -= l * kc;
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let last_row = (k + self.kl).min(n - 1);
            let xk = x[k];
            for r in k + 1..=last_row {
                x[r] -= self.band[self.slot(r, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let mut s = x[k];
            for c in k + 1..=last_col {
                s -= self.band[self.slot(k, c)] * x[c];
            }
            x[k] = s / self.band[self.slot(k, k)];
        }
        x
    }
}
