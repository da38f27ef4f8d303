//! Sparse `L D L^T` factorization with a minimum-degree pivot order.
//!
//! The elimination graph is kept explicitly: each uneliminated row holds its
//! current off-diagonal entries sorted by column. Eliminating pivot `p` adds
//! the Schur update `-a_ip a_pj / d_p` to every pair of its neighbours. On
//! forests no fill is ever created.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// A pivot below this fraction of its original diagonal counts as zero.
const PIVOT_RATIO: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Step {
    pivot: usize,
    d: f64,
    /// `(i, l_ip)` for the rows updated by this pivot.
    column: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Ldl {
    n: usize,
    steps: Vec<Step>,
}

/// Merges `row` (minus column `skip`) with `scale * update` (minus column
/// `own`), both sorted.
fn merge_update(
    row: &[(usize, f64)],
    skip: usize,
    update: &[(usize, f64)],
    own: usize,
    scale: f64,
) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(row.len() + update.len());
    let mut a = row.iter().filter(|e| e.0 != skip).peekable();
    let mut b = update.iter().filter(|e| e.0 != own).peekable();
    loop {
        match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(&&x), None) => {
                out.push(x);
                a.next();
            }
            (None, Some(&&y)) => {
                out.push((y.0, scale * y.1));
                b.next();
            }
            (Some(&&x), Some(&&y)) => {
                if x.0 < y.0 {
                    out.push(x);
                    a.next();
                } else if y.0 < x.0 {
                    out.push((y.0, scale * y.1));
                    b.next();
                } else {
                    out.push((x.0, x.1 + scale * y.1));
                    a.next();
                    b.next();
                }
            }
        }
    }
    out
}

impl Ldl {
    /// Factors `diag - off`, where `off` holds the (nonnegative) magnitudes of
    /// the off-diagonal entries. Returns `Ok(None)` once the factor would
    /// hold more than `max_fill` off-diagonal entries.
    pub(crate) fn factor(diag: &[f64], off: &[Vec<(usize, f64)>], max_fill: usize) -> Result<Option<Self>> {
        let n = diag.len();
        let mut d = diag.to_vec();
        let mut rows: Vec<Vec<(usize, f64)>> =
            off.iter().map(|r| r.iter().map(|&(j, w)| (j, -w)).collect()).collect();
        let mut done = vec![false; n];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).map(|i| Reverse((rows[i].len(), i))).collect();
        let mut steps = Vec::with_capacity(n);
        let mut fill = 0usize;

        while let Some(Reverse((deg, p))) = heap.pop() {
            if done[p] || deg != rows[p].len() {
                continue;
            }
            let dp = d[p];
            if !(dp > PIVOT_RATIO * diag[p].abs()) || !dp.is_finite() {
                return Err(Error::SingularSystem);
            }
            done[p] = true;
            let nb = std::mem::take(&mut rows[p]);
            fill += nb.len();
            if fill > max_fill {
                return Ok(None);
            }
            for &(i, a_ip) in &nb {
                let scale = -a_ip / dp;
                rows[i] = merge_update(&rows[i], p, &nb, i, scale);
                d[i] -= a_ip * a_ip / dp;
                heap.push(Reverse((rows[i].len(), i)));
            }
            let column = nb.iter().map(|&(i, a)| (i, a / dp)).collect();
            steps.push(Step { pivot: p, d: dp, column });
        }
        Ok(Some(Ldl { n, steps }))
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(rhs.len(), self.n);
        let mut y = rhs.to_vec();
        for s in &self.steps {
            let yp = y[s.pivot];
            for &(i, l) in &s.column {
                y[i] -= l * yp;
            }
        }
        for s in &self.steps {
            y[s.pivot] /= s.d;
        }
        for s in self.steps.iter().rev() {
            let mut acc = y[s.pivot];
            for &(i, l) in &s.column {
                acc -= l * y[i];
            }
            y[s.pivot] = acc;
        }
        y
    }

    #[cfg(test)]
    pub(crate) fn nonzeros(&self) -> usize {
        self.steps.iter().map(|s| s.column.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(diag: &[f64], off: &[Vec<(usize, f64)>], x: &[f64]) -> Vec<f64> {
        (0..diag.len())
            .map(|i| diag[i] * x[i] - off[i].iter().map(|&(j, w)| w * x[j]).sum::<f64>())
            .collect()
    }

    fn grid(k: usize) -> (Vec<f64>, Vec<Vec<(usize, f64)>>) {
        let n = k * k;
        let mut off = vec![Vec::new(); n];
        for r in 0..k {
            for c in 0..k {
                let i = r * k + c;
                if c + 1 < k {
                    off[i].push((i + 1, 1.0));
                    off[i + 1].push((i, 1.0));
                }
                if r + 1 < k {
                    off[i].push((i + k, 1.0));
                    off[i + k].push((i, 1.0));
                }
            }
        }
        for row in off.iter_mut() {
            row.sort_by_key(|e| e.0);
        }
        (vec![4.0; n], off)
    }

    #[test]
    fn grid_solve() {
        let (diag, off) = grid(12);
        let f = Ldl::factor(&diag, &off, usize::MAX).unwrap().unwrap();
        let x: Vec<f64> = (0..diag.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let b = dense_apply(&diag, &off, &x);
        let y = f.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn path_has_no_fill() {
        let n = 100;
        let mut off = vec![Vec::new(); n];
        for i in 0..n - 1 {
            off[i].push((i + 1, 1.0));
            off[i + 1].push((i, 1.0));
        }
        let mut diag = vec![2.0; n];
        diag[0] = 1.5;
        let f = Ldl::factor(&diag, &off, usize::MAX).unwrap().unwrap();
        assert_eq!(f.nonzeros(), n - 1);
    }

    #[test]
    fn fill_budget() {
        let (diag, off) = grid(12);
        assert!(Ldl::factor(&diag, &off, 200).unwrap().is_none());
    }

    #[test]
    fn singular_pivot() {
        let off = vec![vec![(1, 1.0)], vec![(0, 1.0)]];
        assert!(matches!(Ldl::factor(&[1.0, 1.0], &off, usize::MAX), Err(Error::SingularSystem)));
    }

    #[test]
    fn merge_drops_pivot_and_self() {
        let row = [(0, 1.0), (2, 1.0), (5, 1.0)];
        let update = [(1, 2.0), (2, 2.0), (3, 2.0)];
        let m = merge_update(&row, 2, &update, 1, 0.5);
        assert_eq!(m, vec![(0, 1.0), (2, 1.0), (3, 1.0), (5, 1.0)]);
    }
}
