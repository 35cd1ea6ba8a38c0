//! Prepared master-equation generator.
//!
//! The right-hand side is evaluated matrix-free: only operator/state products
//! appear, never a dim^2 x dim^2 superoperator. Each operator is stored in
//! offset-diagonal form ([`RotOp`]), and the integration runs in the
//! interaction picture of the Hamiltonian's diagonal `D = diag(H)`:
//!
//! ```text
//! rho(t) = exp(-i D t) rho_tilde(t) exp(i D t)
//! ```
//!
//! The picture change is exact — every stored entry carries its phase
//! frequency `D_i - D_j` — and removes the fast bare-energy phases from the
//! integrated variable, so the step size is set by couplings and decay rates
//! instead of by `omega * n_max`. All dissipator channels used here are
//! phase-covariant, which the per-entry phase bookkeeping handles without
//! special cases.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::OperatorMatrix;
use crate::linalg::{self, CMatrix};

use super::dia::RotOp;
use super::dopri5::RhsEval;

pub(crate) struct PreparedCollapse {
    rate: f64,
    op: RotOp,
    /// `L†L` in the same representation.
    norm: RotOp,
}

pub(crate) struct PreparedGenerator {
    dim: usize,
    frame: Vec<f64>,
    has_frame: bool,
    ham: RotOp,
    collapse: Vec<PreparedCollapse>,
    scratch: RefCell<CMatrix>,
}

/// `A† A` for a sparse `A`, skipping the dense product.
fn sparse_ata(a: &CMatrix) -> CMatrix {
    let dim = a.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    let mut row_entries: Vec<(usize, Complex64)> = Vec::new();
    for i in 0..dim {
        row_entries.clear();
        for j in 0..dim {
            let v = a[(i, j)];
            if v != Complex64::new(0.0, 0.0) {
                row_entries.push((j, v));
            }
        }
        for &(j1, v1) in &row_entries {
            for &(j2, v2) in &row_entries {
                out[(j1, j2)] += v1.conj() * v2;
            }
        }
    }
    out
}

impl PreparedGenerator {
    pub fn new(
        hamiltonian: &OperatorMatrix,
        collapse_ops: &[(f64, CMatrix)],
        use_frame: bool,
    ) -> Result<Self> {
        let h = hamiltonian.entries();
        let dim = h.nrows();
        let herm = linalg::herm_deviation(h);
        if herm > 1e-9 * (1.0 + linalg::max_abs(h)) {
            return Err(Error::InvalidArgument(format!(
                "Hamiltonian is not Hermitian (deviation {herm:.3e})"
            )));
        }
        let frame: Vec<f64> = if use_frame {
            (0..dim).map(|i| h[(i, i)].re).collect()
        } else {
            vec![0.0; dim]
        };
        let has_frame = use_frame && frame.iter().any(|&d| d != 0.0);
        // the stepped variable is exp(iDt) rho exp(-iDt), so the Hamiltonian
        // loses its diagonal; the collapse operators keep theirs
        let mut h_rest = h.clone();
        for i in 0..dim {
            h_rest[(i, i)] -= Complex64::new(frame[i], 0.0);
        }
        let ham = RotOp::from_dense(&h_rest, &frame);
        let collapse = collapse_ops
            .iter()
            .filter(|(rate, _)| *rate != 0.0)
            .map(|(rate, l)| PreparedCollapse {
                rate: *rate,
                op: RotOp::from_dense(l, &frame),
                norm: RotOp::from_dense(&sparse_ata(l), &frame),
            })
            .collect();
        Ok(PreparedGenerator {
            dim,
            frame,
            has_frame,
            ham,
            collapse,
            scratch: RefCell::new(CMatrix::zeros(dim, dim)),
        })
    }

    /// Map the integrated (interaction-picture) state back to the lab frame
    /// at time `t`.
    pub fn to_lab_frame(&self, t: f64, y: &CMatrix) -> CMatrix {
        if !self.has_frame || t == 0.0 {
            return y.clone();
        }
        let phases: Vec<Complex64> = self
            .frame
            .iter()
            .map(|&d| Complex64::from_polar(1.0, -d * t))
            .collect();
        let mut out = y.clone();
        let os = out.as_mut_slice();
        for j in 0..self.dim {
            let pj = phases[j].conj();
            let col = &mut os[j * self.dim..(j + 1) * self.dim];
            for (v, pi) in col.iter_mut().zip(phases.iter()) {
                *v *= pi * pj;
            }
        }
        out
    }
}

impl RhsEval for PreparedGenerator {
    fn eval(&self, t: f64, y: &CMatrix, out: &mut CMatrix) {
        const ONE: Complex64 = Complex64::new(1.0, 0.0);
        const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);
        const PLUS_I: Complex64 = Complex64::new(0.0, 1.0);
        out.fill(Complex64::new(0.0, 0.0));
        // -i [H(t), y]
        self.ham.apply_left(t, MINUS_I, y, out);
        self.ham.apply_right(t, PLUS_I, y, out);
        // (rate/2) (2 L y L† - L†L y - y L†L) per channel
        let mut scratch = self.scratch.borrow_mut();
        for ch in &self.collapse {
            let half = Complex64::new(-0.5 * ch.rate, 0.0);
            scratch.fill(Complex64::new(0.0, 0.0));
            ch.op.apply_left(t, ONE, y, &mut scratch);
            ch.op
                .apply_right_dagger(t, Complex64::new(ch.rate, 0.0), &scratch, out);
            ch.norm.apply_left(t, half, y, out);
            ch.norm.apply_right(t, half, y, out);
        }
    }
}
