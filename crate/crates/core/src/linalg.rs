//! Dense complex linear algebra helpers.
//!
//! All matrices are `nalgebra::DMatrix<Complex64>`. Matrix functions of
//! Hermitian or anti-Hermitian arguments go through a full eigendecomposition
//! (no series truncation); positivity checks use a shifted Cholesky
//! factorization with an eigendecomposition fallback so the common case stays
//! cheap.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-norm deviation from Hermiticity, `max |M - M†|`.
pub fn herm_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Replace `m` by its Hermitian part `(m + m†)/2`.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        let d = m[(j, j)];
        m[(j, j)] = c(d.re);
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub struct HermitianEig {
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

pub fn eigh(m: &CMatrix) -> HermitianEig {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    HermitianEig { values, vectors }
}

/// `V f(Λ) V†` for Hermitian `m = V Λ V†`.
pub fn func_hermitian(m: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let eig = eigh(m);
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for k in 0..n {
        let fk = f(eig.values[k]);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    &scaled * eig.vectors.adjoint()
}

/// Exact exponential of an anti-Hermitian generator `g` (so the result is
/// unitary). `g` is validated against `tol` in max norm.
pub fn expm_antihermitian(g: &CMatrix, tol: f64) -> CMatrix {
    let n = g.nrows();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((g[(i, j)] + g[(j, i)].conj()).norm());
        }
    }
    assert!(
        dev <= tol.max(1e-12 * max_abs(g)),
        "generator is not anti-Hermitian (deviation {dev:.3e})"
    );
    // g = i a with a Hermitian, so exp(g) = V exp(i λ) V†.
    let a = g.map(|z| -I * z);
    func_hermitian(&a, |lambda| (I * lambda).exp())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).values[0]
}

/// Hermitian Cholesky feasibility: true iff `m` is positive definite.
///
/// Hand-rolled because a complex-field Cholesky that takes complex square
/// roots cannot signal indefiniteness; this one fails on any non-positive
/// real pivot. Only the lower triangle is read.
fn hermitian_positive_definite(m: &CMatrix) -> bool {
    let n = m.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if !(pivot > 0.0) {
            return false;
        }
        let root = pivot.sqrt();
        l[(j, j)] = c(root);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / root;
        }
    }
    true
}

/// Check `min eig(m) >= -floor` for Hermitian `m`.
///
/// Fast path: Cholesky of `m + floor I` succeeding proves the bound. On
/// failure the exact minimum eigenvalue decides, and is returned in the
/// error for diagnostics.
pub fn min_eigenvalue_at_least(m: &CMatrix, floor: f64) -> std::result::Result<(), f64> {
    let n = m.nrows();
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] += c(floor);
    }
    if hermitian_positive_definite(&shifted) {
        return Ok(());
    }
    let min = min_eigenvalue(m);
    if min >= -floor {
        Ok(())
    } else {
        Err(min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn test_hermitian(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(i as f64 - 1.3);
            if i + 1 < n {
                m[(i, i + 1)] = Complex64::new(0.4, -0.2);
                m[(i + 1, i)] = Complex64::new(0.4, 0.2);
            }
        }
        m
    }

    #[test]
    fn eigh_reconstructs() {
        let m = test_hermitian(8);
        let eig = eigh(&m);
        let lam = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            8,
            eig.values.iter().map(|&v| c(v)),
        ));
        let recon = &eig.vectors * lam * eig.vectors.adjoint();
        assert!(max_abs(&(&recon - &m)) < 1e-12);
        for k in 1..eig.values.len() {
            assert!(eig.values[k] >= eig.values[k - 1]);
        }
    }

    #[test]
    fn expm_antihermitian_is_unitary() {
        let m = test_hermitian(6);
        let g = m.map(|z| I * z); // i * Hermitian is anti-Hermitian
        let u = expm_antihermitian(&g, 1e-12);
        let id = &u * u.adjoint();
        let eye = CMatrix::identity(6, 6);
        assert!(max_abs(&(&id - &eye)) < 1e-12);
    }

    #[test]
    fn func_hermitian_exp_matches_series_small() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(0.1);
        m[(1, 0)] = c(0.1);
        let e = func_hermitian(&m, |l| c(l.exp()));
        // exp([[0,x],[x,0]]) = [[cosh x, sinh x], [sinh x, cosh x]]
        assert_relative_eq!(e[(0, 0)].re, 0.1f64.cosh(), max_relative = 1e-14);
        assert_relative_eq!(e[(0, 1)].re, 0.1f64.sinh(), max_relative = 1e-14);
    }

    #[test]
    fn psd_check_fast_and_fallback() {
        let m = test_hermitian(10);
        let psd = &m * m.adjoint();
        assert!(min_eigenvalue_at_least(&psd, 1e-10).is_ok());
        let mut neg = psd.clone();
        neg[(0, 0)] -= c(1.0e3);
        let err = min_eigenvalue_at_least(&neg, 1e-8).unwrap_err();
        assert!(err < 0.0);
    }
}
