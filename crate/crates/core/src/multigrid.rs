//! Galerkin geometric multigrid V-cycle used as a conjugate gradient
//! preconditioner.
//!
//! Each level holds a symmetric 9-point operator on a square node grid.
//! Nodes with zero diagonal are inactive (fixed values, or coarse nodes
//! whose fine counterpart is fixed). Prolongation is bilinear interpolation
//! restricted to active nodes and coarse operators are `P^T A P`, so every
//! level stays symmetric positive definite. Forward Gauss-Seidel before and
//! backward Gauss-Seidel after the coarse correction keep the cycle
//! symmetric.

/// Symmetric 9-point operator `(A x)_k = diag_k x_k - sum couplings`.
/// `e[k]` couples `k` and `k + 1`, `n[k]` couples `k` and `k + side`,
/// `ne[k]` couples `k` and `k + side + 1`, `nw[k]` couples `k` and
/// `k + side - 1`.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    side: usize,
    diag: Vec<f64>,
    e: Vec<f64>,
    n: Vec<f64>,
    ne: Vec<f64>,
    nw: Vec<f64>,
}

const COARSEST_SIDE: usize = 17;

impl Stencil {
    pub(crate) fn five_point(side: usize, diag: &[f64], cx: &[f64], cy: &[f64]) -> Stencil {
        let len = side * side;
        Stencil {
            side,
            diag: diag.to_vec(),
            e: cx.to_vec(),
            n: cy.to_vec(),
            ne: vec![0.0; len],
            nw: vec![0.0; len],
        }
    }

    fn len(&self) -> usize {
        self.side * self.side
    }

    /// Sum of couplings times `x` around node `(i, j)`.
    #[inline]
    fn neighbors(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        let s = self.side;
        let k = j * s + i;
        let mut v = 0.0;
        if i + 1 < s {
            v += self.e[k] * x[k + 1];
        }
        if i > 0 {
            v += self.e[k - 1] * x[k - 1];
        }
        if j + 1 < s {
            v += self.n[k] * x[k + s];
            if i + 1 < s {
                v += self.ne[k] * x[k + s + 1];
            }
            if i > 0 {
                v += self.nw[k] * x[k + s - 1];
            }
        }
        if j > 0 {
            v += self.n[k - s] * x[k - s];
            if i > 0 {
                v += self.ne[k - s - 1] * x[k - s - 1];
            }
            if i + 1 < s {
                v += self.nw[k - s + 1] * x[k - s + 1];
            }
        }
        v
    }

    /// Same as [`Self::neighbors`] for `0 < i, j < side - 1`.
    #[inline]
    fn neighbors_inner(&self, k: usize, x: &[f64]) -> f64 {
        let s = self.side;
        self.e[k] * x[k + 1]
            + self.e[k - 1] * x[k - 1]
            + self.n[k] * x[k + s]
            + self.n[k - s] * x[k - s]
            + self.ne[k] * x[k + s + 1]
            + self.ne[k - s - 1] * x[k - s - 1]
            + self.nw[k] * x[k + s - 1]
            + self.nw[k - s + 1] * x[k - s + 1]
    }

    #[inline]
    fn relax(&self, i: usize, j: usize, b: &[f64], x: &mut [f64]) {
        let k = j * self.side + i;
        let d = self.diag[k];
        if d != 0.0 {
            let nb = if i > 0 && j > 0 && i + 1 < self.side && j + 1 < self.side {
                self.neighbors_inner(k, x)
            } else {
                self.neighbors(i, j, x)
            };
            x[k] = (b[k] + nb) / d;
        }
    }

    fn gauss_seidel_forward(&self, b: &[f64], x: &mut [f64]) {
        for j in 0..self.side {
            for i in 0..self.side {
                self.relax(i, j, b, x);
            }
        }
    }

    fn gauss_seidel_backward(&self, b: &[f64], x: &mut [f64]) {
        for j in (0..self.side).rev() {
            for i in (0..self.side).rev() {
                self.relax(i, j, b, x);
            }
        }
    }

    /// `b - A x` on active nodes, zero elsewhere.
    fn residual(&self, b: &[f64], x: &[f64], out: &mut [f64]) {
        let s = self.side;
        for j in 0..s {
            for i in 0..s {
                let k = j * s + i;
                let d = self.diag[k];
                out[k] = if d == 0.0 {
                    0.0
                } else {
                    let nb = if i > 0 && j > 0 && i + 1 < s && j + 1 < s {
                        self.neighbors_inner(k, x)
                    } else {
                        self.neighbors(i, j, x)
                    };
                    b[k] - d * x[k] + nb
                };
            }
        }
    }

    fn coarse_side(&self) -> usize {
        (self.side - 1) / 2 + 1
    }

    /// Coarse parents of fine index `i` along one axis with weights.
    fn parents(i: usize) -> ([(usize, f64); 2], usize) {
        if i.is_multiple_of(2) {
            ([(i / 2, 1.0), (0, 0.0)], 1)
        } else {
            ([(i / 2, 0.5), (i / 2 + 1, 0.5)], 2)
        }
    }

    /// Calls `f(coarse_index, weight)` for each active parent of active fine
    /// node `(i, j)`.
    #[inline]
    fn for_parents(coarse: &Stencil, i: usize, j: usize, mut f: impl FnMut(usize, f64)) {
        let cs = coarse.side;
        let (pi, ni) = Self::parents(i);
        let (pj, nj) = Self::parents(j);
        for &(cj, wj) in &pj[..nj] {
            for &(ci, wi) in &pi[..ni] {
                let c = cj * cs + ci;
                if coarse.diag[c] != 0.0 {
                    f(c, wi * wj);
                }
            }
        }
    }

    /// `P^T A P` with bilinear `P` restricted to active nodes.
    fn galerkin(&self) -> Stencil {
        let s = self.side;
        let cs = self.coarse_side();
        let clen = cs * cs;
        // a coarse node is active iff its coincident fine node is
        let mut active = vec![false; clen];
        for cj in 0..cs {
            for ci in 0..cs {
                active[cj * cs + ci] = self.diag[2 * cj * s + 2 * ci] != 0.0;
            }
        }
        // full 3x3 block per coarse row, offset index (dj + 1) * 3 + (di + 1)
        let mut full = vec![0.0; clen * 9];
        let marker = Stencil {
            side: cs,
            diag: active.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect(),
            e: Vec::new(),
            n: Vec::new(),
            ne: Vec::new(),
            nw: Vec::new(),
        };
        let mut parents_i: Vec<(usize, f64)> = Vec::with_capacity(4);
        let mut parents_j: Vec<(usize, f64)> = Vec::with_capacity(4);
        for j in 0..s {
            for i in 0..s {
                let k = j * s + i;
                if self.diag[k] == 0.0 {
                    continue;
                }
                parents_i.clear();
                Self::for_parents(&marker, i, j, |c, w| parents_i.push((c, w)));
                if parents_i.is_empty() {
                    continue;
                }
                // row k of A: diagonal and the eight couplings
                let mut entries: [(usize, usize, f64); 9] = [(0, 0, 0.0); 9];
                let mut m = 0;
                entries[m] = (i, j, self.diag[k]);
                m += 1;
                let mut push = |ii: usize, jj: usize, c: f64| {
                    if c != 0.0 {
                        entries[m] = (ii, jj, -c);
                        m += 1;
                    }
                };
                if i + 1 < s {
                    push(i + 1, j, self.e[k]);
                }
                if i > 0 {
                    push(i - 1, j, self.e[k - 1]);
                }
                if j + 1 < s {
                    push(i, j + 1, self.n[k]);
                    if i + 1 < s {
                        push(i + 1, j + 1, self.ne[k]);
                    }
                    if i > 0 {
                        push(i - 1, j + 1, self.nw[k]);
                    }
                }
                if j > 0 {
                    push(i, j - 1, self.n[k - s]);
                    if i > 0 {
                        push(i - 1, j - 1, self.ne[k - s - 1]);
                    }
                    if i + 1 < s {
                        push(i + 1, j - 1, self.nw[k - s + 1]);
                    }
                }
                for &(ii, jj, a) in &entries[..m] {
                    if self.diag[jj * s + ii] == 0.0 {
                        continue;
                    }
                    parents_j.clear();
                    Self::for_parents(&marker, ii, jj, |c, w| parents_j.push((c, w)));
                    for &(ci, wi) in &parents_i {
                        let (ri, rj) = (ci % cs, ci / cs);
                        for &(cj, wj) in &parents_j {
                            let (qi, qj) = (cj % cs, cj / cs);
                            let di = qi as isize - ri as isize + 1;
                            let dj = qj as isize - rj as isize + 1;
                            full[ci * 9 + (dj * 3 + di) as usize] += wi * a * wj;
                        }
                    }
                }
            }
        }
        let mut out = Stencil {
            side: cs,
            diag: vec![0.0; clen],
            e: vec![0.0; clen],
            n: vec![0.0; clen],
            ne: vec![0.0; clen],
            nw: vec![0.0; clen],
        };
        for c in 0..clen {
            let f = &full[c * 9..c * 9 + 9];
            out.diag[c] = f[4];
            out.e[c] = -f[5];
            out.n[c] = -f[7];
            out.ne[c] = -f[8];
            out.nw[c] = -f[6];
        }
        out
    }

    fn restrict(&self, coarse: &Stencil, r: &[f64], rc: &mut [f64]) {
        rc.iter_mut().for_each(|v| *v = 0.0);
        let s = self.side;
        for j in 0..s {
            for i in 0..s {
                let k = j * s + i;
                if self.diag[k] != 0.0 && r[k] != 0.0 {
                    let v = r[k];
                    Self::for_parents(coarse, i, j, |c, w| rc[c] += w * v);
                }
            }
        }
    }

    fn prolong_add(&self, coarse: &Stencil, ec: &[f64], x: &mut [f64]) {
        let s = self.side;
        for j in 0..s {
            for i in 0..s {
                let k = j * s + i;
                if self.diag[k] != 0.0 {
                    let mut v = 0.0;
                    Self::for_parents(coarse, i, j, |c, w| v += w * ec[c]);
                    x[k] += v;
                }
            }
        }
    }

    fn to_dense(&self) -> (Vec<usize>, Vec<f64>) {
        let idx: Vec<usize> = (0..self.len()).filter(|&k| self.diag[k] != 0.0).collect();
        let m = idx.len();
        let mut pos = vec![usize::MAX; self.len()];
        for (p, &k) in idx.iter().enumerate() {
            pos[k] = p;
        }
        let mut a = vec![0.0; m * m];
        let s = self.side;
        for (p, &k) in idx.iter().enumerate() {
            a[p * m + p] = self.diag[k];
            let (i, j) = (k % s, k / s);
            let mut couple = |other: usize, c: f64| {
                let q = pos[other];
                if q != usize::MAX && c != 0.0 {
                    a[p * m + q] = -c;
                    a[q * m + p] = -c;
                }
            };
            if i + 1 < s {
                couple(k + 1, self.e[k]);
            }
            if j + 1 < s {
                couple(k + s, self.n[k]);
                if i + 1 < s {
                    couple(k + s + 1, self.ne[k]);
                }
                if i > 0 {
                    couple(k + s - 1, self.nw[k]);
                }
            }
        }
        (idx, a)
    }
}

/// Dense Cholesky factor of the coarsest operator.
#[derive(Debug, Clone)]
struct Coarsest {
    idx: Vec<usize>,
    l: Vec<f64>,
}

impl Coarsest {
    fn new(st: &Stencil) -> Coarsest {
        let (idx, mut a) = st.to_dense();
        let m = idx.len();
        for j in 0..m {
            let mut d = a[j * m + j];
            for k in 0..j {
                d -= a[j * m + k] * a[j * m + k];
            }
            let d = d.max(f64::MIN_POSITIVE).sqrt();
            a[j * m + j] = d;
            for i in j + 1..m {
                let mut v = a[i * m + j];
                for k in 0..j {
                    v -= a[i * m + k] * a[j * m + k];
                }
                a[i * m + j] = v / d;
            }
        }
        Coarsest { idx, l: a }
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let m = self.idx.len();
        let l = &self.l;
        let mut y: Vec<f64> = self.idx.iter().map(|&k| b[k]).collect();
        for i in 0..m {
            let mut v = y[i];
            for k in 0..i {
                v -= l[i * m + k] * y[k];
            }
            y[i] = v / l[i * m + i];
        }
        for i in (0..m).rev() {
            let mut v = y[i];
            for k in i + 1..m {
                v -= l[k * m + i] * y[k];
            }
            y[i] = v / l[i * m + i];
        }
        x.iter_mut().for_each(|v| *v = 0.0);
        for (p, &k) in self.idx.iter().enumerate() {
            x[k] = y[p];
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Multigrid {
    levels: Vec<Stencil>,
    coarsest: Coarsest,
}

impl Multigrid {
    pub(crate) fn new(fine: Stencil) -> Multigrid {
        let mut levels = vec![fine];
        while levels.last().unwrap().side > COARSEST_SIDE
            && (levels.last().unwrap().side - 1) % 2 == 0
        {
            let next = levels.last().unwrap().galerkin();
            levels.push(next);
        }
        let coarsest = Coarsest::new(levels.last().unwrap());
        Multigrid { levels, coarsest }
    }

    /// One symmetric V(1,1) cycle from a zero initial guess.
    pub(crate) fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.cycle(0, r, z);
    }

    fn cycle(&self, level: usize, b: &[f64], x: &mut [f64]) {
        if level + 1 == self.levels.len() {
            self.coarsest.solve(b, x);
            return;
        }
        let st = &self.levels[level];
        let coarse = &self.levels[level + 1];
        x.iter_mut().for_each(|v| *v = 0.0);
        st.gauss_seidel_forward(b, x);
        let mut res = vec![0.0; st.len()];
        st.residual(b, x, &mut res);
        let mut rc = vec![0.0; coarse.len()];
        st.restrict(coarse, &res, &mut rc);
        let mut ec = vec![0.0; coarse.len()];
        self.cycle(level + 1, &rc, &mut ec);
        st.prolong_add(coarse, &ec, x);
        st.gauss_seidel_backward(b, x);
    }

    #[cfg(test)]
    fn level(&self, l: usize) -> &Stencil {
        &self.levels[l]
    }
}
