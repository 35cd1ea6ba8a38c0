//! Offset-diagonal operator storage with interaction-picture phases.
//!
//! Every operator entering the master-equation right-hand side (ladder,
//! collective spin, Pauli, and Hamiltonian coupling terms) has nonzero
//! entries on only a handful of diagonals `(row, row + offset)`. Storing
//! those diagonals keeps each operator/state product at O(dim^2) with
//! contiguous column access (states are column-major), instead of an
//! O(dim^3) dense product.
//!
//! The interaction picture enters through per-entry phases: conjugating by
//! `exp(i D t)` (with `D` the real frame diagonal) multiplies the entry at
//! `(i, i + o)` by `exp(i (D_i - D_{i+o}) t)`. Each stored entry carries that
//! frequency, so the picture change is exact for any frame diagonal; diagonals
//! whose frequencies are all zero skip the phase evaluation entirely.

use num_complex::Complex64;

use crate::linalg::CMatrix;

/// One stored diagonal. Entry `k` sits at `(row0 + k, row0 + k + offset)`.
pub(crate) struct RotatingDiag {
    pub offset: isize,
    pub row0: usize,
    pub values: Vec<Complex64>,
    /// Frame frequency per entry; `exp(i freq t)` multiplies the value.
    pub freqs: Vec<f64>,
    /// True when every `freq` is exactly zero.
    pub is_static: bool,
}

impl RotatingDiag {
    /// Materialize `coeff * exp(i freq t) * value` for every entry.
    fn weights(&self, t: f64, coeff: Complex64, out: &mut Vec<Complex64>) {
        out.clear();
        if self.is_static || t == 0.0 {
            out.extend(self.values.iter().map(|v| v * coeff));
        } else {
            out.extend(
                self.values
                    .iter()
                    .zip(&self.freqs)
                    .map(|(v, &f)| v * coeff * Complex64::from_polar(1.0, f * t)),
            );
        }
    }
}

/// A sparse operator as a list of rotating diagonals.
pub(crate) struct RotOp {
    pub dim: usize,
    pub diags: Vec<RotatingDiag>,
    weight_buf: std::cell::RefCell<Vec<Complex64>>,
}

impl RotOp {
    /// Extract the nonzero diagonals of `m`, attaching the
    /// interaction-picture frequency `frame[i] - frame[i + o]` to each entry
    /// (the phase picked up under conjugation by `exp(i diag(frame) t)`).
    ///
    /// Passing an all-zero frame makes the operator static (plain lab-frame
    /// evaluation). Subtracting the frame from the Hamiltonian itself is the
    /// caller's business.
    pub fn from_dense(m: &CMatrix, frame: &[f64]) -> Self {
        let dim = m.nrows();
        let mut diags = Vec::new();
        for offset in -(dim as isize - 1)..=(dim as isize - 1) {
            let row0 = offset.min(0).unsigned_abs();
            let len = dim - offset.unsigned_abs();
            let mut first_nonzero = None;
            let mut last_nonzero = 0usize;
            for k in 0..len {
                let i = row0 + k;
                let j = (i as isize + offset) as usize;
                if m[(i, j)] != Complex64::new(0.0, 0.0) {
                    first_nonzero.get_or_insert(k);
                    last_nonzero = k;
                }
            }
            let Some(first) = first_nonzero else {
                continue;
            };
            let row0 = row0 + first;
            let len = last_nonzero - first + 1;
            let mut values = Vec::with_capacity(len);
            let mut freqs = Vec::with_capacity(len);
            for k in 0..len {
                let i = row0 + k;
                let j = (i as isize + offset) as usize;
                values.push(m[(i, j)]);
                freqs.push(frame[i] - frame[j]);
            }
            let is_static = freqs.iter().all(|&f| f == 0.0);
            diags.push(RotatingDiag {
                offset,
                row0,
                values,
                freqs,
                is_static,
            });
        }
        RotOp {
            dim,
            diags,
            weight_buf: std::cell::RefCell::new(Vec::new()),
        }
    }

    /// `out += coeff * A(t) * x`
    pub fn apply_left(&self, t: f64, coeff: Complex64, x: &CMatrix, out: &mut CMatrix) {
        let dim = self.dim;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        let mut w = self.weight_buf.borrow_mut();
        for diag in &self.diags {
            diag.weights(t, coeff, &mut w);
            let len = w.len();
            let r0 = diag.row0;
            let x0 = (r0 as isize + diag.offset) as usize;
            for col in 0..dim {
                let xc = &xs[col * dim + x0..col * dim + x0 + len];
                let oc = &mut os[col * dim + r0..col * dim + r0 + len];
                for ((o, &wk), &xk) in oc.iter_mut().zip(w.iter()).zip(xc.iter()) {
                    *o += wk * xk;
                }
            }
        }
    }

    /// `out += coeff * x * A(t)`
    pub fn apply_right(&self, t: f64, coeff: Complex64, x: &CMatrix, out: &mut CMatrix) {
        let dim = self.dim;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        let mut w = self.weight_buf.borrow_mut();
        for diag in &self.diags {
            diag.weights(t, coeff, &mut w);
            let r0 = diag.row0;
            // entry k couples source column (r0 + k) to target column (r0 + k + offset)
            for (k, &wk) in w.iter().enumerate() {
                let src = r0 + k;
                let dst = (src as isize + diag.offset) as usize;
                let xc = &xs[src * dim..(src + 1) * dim];
                let oc = &mut os[dst * dim..(dst + 1) * dim];
                for (o, &xk) in oc.iter_mut().zip(xc.iter()) {
                    *o += wk * xk;
                }
            }
        }
    }

    /// `out += coeff * x * A(t)†`
    pub fn apply_right_dagger(&self, t: f64, coeff: Complex64, x: &CMatrix, out: &mut CMatrix) {
        let dim = self.dim;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        let mut w = self.weight_buf.borrow_mut();
        for diag in &self.diags {
            // weights get conjugated below; feed coeff† so only A is daggered
            diag.weights(t, coeff.conj(), &mut w);
            let r0 = diag.row0;
            // A†[(r0+k+offset, r0+k)] = conj(w_k): source column (r0+k+offset),
            // target column (r0+k)
            for (k, &wk) in w.iter().enumerate() {
                let dst = r0 + k;
                let src = (dst as isize + diag.offset) as usize;
                let wc = wk.conj();
                let xc = &xs[src * dim..(src + 1) * dim];
                let oc = &mut os[dst * dim..(dst + 1) * dim];
                for (o, &xk) in oc.iter_mut().zip(xc.iter()) {
                    *o += wc * xk;
                }
            }
        }
    }

    /// Dense matrix of the operator at time `t` (test support).
    #[cfg(test)]
    pub fn to_dense(&self, t: f64) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        let mut w = Vec::new();
        for diag in &self.diags {
            diag.weights(t, Complex64::new(1.0, 0.0), &mut w);
            for (k, &wk) in w.iter().enumerate() {
                let i = diag.row0 + k;
                let j = (i as isize + diag.offset) as usize;
                m[(i, j)] += wk;
            }
        }
        m
    }
}
