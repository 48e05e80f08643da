//! Sparse LU factorization of simplex bases with product-form updates.
//!
//! The factorization is right-looking Gaussian elimination. Pivot columns are
//! taken in order of fewest remaining nonzeros and the pivot row is the
//! shortest row passing a relative threshold test, so singleton columns
//! (slacks, artificials) are eliminated without fill.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;

/// Rows and basis positions left without a pivot.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub rows: Vec<usize>,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LuFactors {
    m: usize,
    piv_row: Vec<usize>,
    piv_pos: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
}

/// Factorizes the `m x m` matrix whose column `p` is `columns[p]`
/// (row indices and values).
pub(crate) fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<LuFactors, Singular> {
    debug_assert_eq!(columns.len(), m);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (p, col) in columns.iter().enumerate() {
        for &(i, v) in col {
            if v != 0.0 {
                rows[i].push((p, v));
                col_rows[p].push(i);
            }
        }
    }
    let mut col_count: Vec<usize> = col_rows.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..m).map(|p| Reverse((col_count[p], p))).collect();
    let mut row_active = vec![true; m];
    let mut col_done = vec![false; m];
    let mut slot = vec![usize::MAX; m];
    let mut skipped = Vec::new();

    let mut f = LuFactors {
        m,
        l_start: vec![0],
        u_start: vec![0],
        ..Default::default()
    };

    let mut cands: Vec<(usize, f64)> = Vec::new();
    while let Some(Reverse((count, c))) = heap.pop() {
        if col_done[c] || count != col_count[c] {
            continue;
        }
        cands.clear();
        for &i in &col_rows[c] {
            if row_active[i] {
                if let Some(&(_, v)) = rows[i].iter().find(|(cc, _)| *cc == c) {
                    cands.push((i, v));
                }
            }
        }
        let max_abs = cands.iter().fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
        col_done[c] = true;
        if max_abs < SINGULAR_TOL {
            skipped.push(c);
            continue;
        }
        let (r, pivot) = cands
            .iter()
            .filter(|(_, v)| v.abs() >= PIVOT_THRESHOLD * max_abs)
            .min_by(|a, b| {
                rows[a.0]
                    .len()
                    .cmp(&rows[b.0].len())
                    .then(b.1.abs().total_cmp(&a.1.abs()))
                    .then(a.0.cmp(&b.0))
            })
            .copied()
            .expect("threshold admits the largest entry");

        let pivot_row = std::mem::take(&mut rows[r]);
        for &(i, v) in &cands {
            if i == r {
                continue;
            }
            let l = v / pivot;
            for (k, &(cc, _)) in rows[i].iter().enumerate() {
                slot[cc] = k;
            }
            for &(cc, vr) in &pivot_row {
                if cc == c {
                    continue;
                }
                if slot[cc] != usize::MAX {
                    rows[i][slot[cc]].1 -= l * vr;
                } else {
                    slot[cc] = rows[i].len();
                    rows[i].push((cc, -l * vr));
                    col_rows[cc].push(i);
                    col_count[cc] += 1;
                    heap.push(Reverse((col_count[cc], cc)));
                }
            }
            for &(cc, _) in &rows[i] {
                slot[cc] = usize::MAX;
            }
            if let Some(k) = rows[i].iter().position(|(cc, _)| *cc == c) {
                rows[i].swap_remove(k);
            }
            if l != 0.0 {
                f.l_idx.push(i);
                f.l_val.push(l);
            }
        }
        f.l_start.push(f.l_idx.len());

        row_active[r] = false;
        for &(cc, v) in &pivot_row {
            if cc == c {
                continue;
            }
            f.u_idx.push(cc);
            f.u_val.push(v);
            if !col_done[cc] {
                col_count[cc] -= 1;
                heap.push(Reverse((col_count[cc], cc)));
            }
        }
        f.u_start.push(f.u_idx.len());
        f.u_diag.push(pivot);
        f.piv_row.push(r);
        f.piv_pos.push(c);
    }

    if f.piv_row.len() < m {
        return Err(Singular {
            rows: (0..m).filter(|&i| row_active[i]).collect(),
            positions: skipped,
        });
    }
    Ok(f)
}

impl LuFactors {
    /// Solves `B x = b` in place: `rhs` is indexed by rows on entry and the
    /// solution is written to `out`, indexed by basis positions.
    pub(crate) fn solve(&self, rhs: &mut [f64], out: &mut [f64]) {
        for k in 0..self.m {
            let br = rhs[self.piv_row[k]];
            if br != 0.0 {
                for t in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_idx[t]] -= self.l_val[t] * br;
                }
            }
        }
        for k in (0..self.m).rev() {
            let mut v = rhs[self.piv_row[k]];
            for t in self.u_start[k]..self.u_start[k + 1] {
                v -= self.u_val[t] * out[self.u_idx[t]];
            }
            out[self.piv_pos[k]] = v / self.u_diag[k];
        }
    }

    /// Solves `B^T y = c`: `c` is indexed by basis positions (and is
    /// overwritten), `out` receives `y` indexed by rows.
    pub(crate) fn solve_transpose(&self, c: &mut [f64], out: &mut [f64]) {
        for k in 0..self.m {
            let z = c[self.piv_pos[k]] / self.u_diag[k];
            out[self.piv_row[k]] = z;
            if z != 0.0 {
                for t in self.u_start[k]..self.u_start[k + 1] {
                    c[self.u_idx[t]] -= self.u_val[t] * z;
                }
            }
        }
        for k in (0..self.m).rev() {
            let mut acc = 0.0;
            for t in self.l_start[k]..self.l_start[k + 1] {
                acc += self.l_val[t] * out[self.l_idx[t]];
            }
            out[self.piv_row[k]] -= acc;
        }
    }
}

/// Product-form update `B_new = B E` where `E` is the identity with column
/// `pos` replaced by `alpha = B^{-1} a_q`.
#[derive(Debug, Clone)]
pub(crate) struct Eta {
    pub pos: usize,
    pub pivot: f64,
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl Eta {
    pub(crate) fn from_dense(pos: usize, alpha: &[f64]) -> Self {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > 1e-14 {
                idx.push(i);
                val.push(a);
            }
        }
        Eta {
            pos,
            pivot: alpha[pos],
            idx,
            val,
        }
    }

    pub(crate) fn apply(&self, v: &mut [f64]) {
        let vp = v[self.pos] / self.pivot;
        v[self.pos] = vp;
        if vp != 0.0 {
            for (i, a) in self.idx.iter().zip(&self.val) {
                v[*i] -= a * vp;
            }
        }
    }

    pub(crate) fn apply_transpose(&self, c: &mut [f64]) {
        let mut s = c[self.pos];
        for (i, a) in self.idx.iter().zip(&self.val) {
            s -= a * c[*i];
        }
        c[self.pos] = s / self.pivot;
    }
}
