//! Dense complex linear-algebra kernels.
//!
//! Everything here works on `nalgebra` dynamic matrices of `Complex64`. The
//! eigen-solvers return the top eigenpair only; callers in this crate never
//! need the full spectrum except for gap checks.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance used when checking that a matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Largest acceptable `sigma_2 / sigma_1` for a matrix treated as rank one.
pub const RANK1_TOL: f64 = 1e-8;
/// Relative spectral gap below which the top eigenvalue counts as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-10;

const POWER_MAX_ITER: usize = 10_000;
const POWER_TOL: f64 = 1e-12;

/// An eigenvalue with a unit-norm eigenvector.
///
/// The vector follows a fixed phase convention: its entry of largest
/// magnitude is real and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: CVector,
}

/// Result of [`reduced_max_eigvec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEigen {
    /// `C * y`, an eigenvector of `alpha I_N + C B C^H` (not normalized).
    pub x_star: CVector,
    pub lambda: f64,
    /// Set when the top eigenvalue of the reduced matrix is not simple.
    pub degenerate: bool,
    /// Set when `lambda < alpha` and `K < N`: the top eigenvalue of the full
    /// `N x N` matrix is then `alpha` on the null space of `C^H` and `x_star`
    /// is only the best vector inside the range of `C`.
    pub below_null_space: bool,
}

/// Rank-one factorization `H = d1 * u1 * v1^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Svd {
    pub d1: f64,
    pub u1: CVector,
    pub v1: CVector,
    /// `sigma_2 / sigma_1` measured on the input.
    pub ratio: f64,
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rotates `v` so its largest-magnitude entry is real and non-negative.
pub fn normalize_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let rot = v[best].conj() / best_mag;
        v.iter_mut().for_each(|z| *z *= rot);
        v[best] = c(v[best].re, 0.0);
    }
}

fn unit(mut v: CVector) -> CVector {
    let n = v.norm();
    if n > 0.0 {
        v.unscale_mut(n);
    }
    normalize_phase(&mut v);
    v
}

fn require_square(a: &CMatrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::validation(format!(
            "{what}: expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Err(Error::validation(format!("{what}: empty matrix")));
    }
    Ok(a.nrows())
}

/// Largest Hermitian asymmetry relative to the largest entry magnitude.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

pub fn check_hermitian(a: &CMatrix, what: &str) -> Result<()> {
    require_square(a, what)?;
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_TOL {
        return Err(Error::validation(format!(
            "{what}: matrix is not Hermitian (relative defect {defect:.3e})"
        )));
    }
    Ok(())
}

fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Full Hermitian eigendecomposition, eigenvalues sorted in descending order.
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(a, "hermitian_eigen")?;
    let n = a.nrows();
    let eig = SymmetricEigen::try_new(hermitian_part(a), f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("Hermitian eigensolver did not converge", 0))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// Algebraically largest eigenvalue of a Hermitian matrix and its eigenvector.
pub fn hermitian_max_eigenpair(a: &CMatrix) -> Result<EigenPair> {
    let (values, vectors) = hermitian_eigen(a)?;
    Ok(EigenPair {
        value: values[0],
        vector: unit(vectors.column(0).into_owned()),
    })
}

struct GeneralTop {
    pair: EigenPair,
    gap: f64,
}

/// Eigenpair with the largest real part of a general square matrix.
///
/// Uses a complex Schur form and back-substitution on the triangular
/// factor; falls back to power iteration if the QR sweep fails.
pub fn general_max_eigenpair(a: &CMatrix) -> Result<EigenPair> {
    general_top(a).map(|t| t.pair)
}

fn general_top(a: &CMatrix) -> Result<GeneralTop> {
    let n = require_square(a, "general_max_eigenpair")?;
    if n == 1 {
        return Ok(GeneralTop {
            pair: EigenPair {
                value: a[(0, 0)].re,
                vector: CVector::from_element(1, c(1.0, 0.0)),
            },
            gap: f64::INFINITY,
        });
    }
    match Schur::try_new(a.clone(), f64::EPSILON, POWER_MAX_ITER) {
        Some(schur) => {
            let (q, t) = schur.unpack();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| t[(j, j)].re.total_cmp(&t[(i, i)].re));
            let top = order[0];
            let lambda = t[(top, top)];
            let scale = t.norm().max(f64::MIN_POSITIVE);

            // Solve (T - lambda I) z = 0 with z[top] = 1 and z[j] = 0 for j > top.
            let mut z = CVector::zeros(n);
            z[top] = c(1.0, 0.0);
            for j in (0..top).rev() {
                let mut s = c(0.0, 0.0);
                for l in (j + 1)..=top {
                    s += t[(j, l)] * z[l];
                }
                let mut denom = t[(j, j)] - lambda;
                if denom.norm() < f64::EPSILON * scale {
                    denom = c(f64::EPSILON * scale, 0.0);
                }
                z[j] = -s / denom;
            }
            let r0 = lambda.re;
            let r1 = t[(order[1], order[1])].re;
            let gap = (r0 - r1) / r0.abs().max(f64::MIN_POSITIVE);
            Ok(GeneralTop {
                pair: EigenPair {
                    value: r0,
                    vector: unit(q * z),
                },
                gap,
            })
        }
        None => power_iteration(a).map(|pair| GeneralTop {
            pair,
            gap: f64::NAN,
        }),
    }
}

fn power_iteration(a: &CMatrix) -> Result<EigenPair> {
    let n = a.nrows();
    let norm_a = a.norm().max(f64::MIN_POSITIVE);
    let mut x = CVector::from_element(n, c(1.0 / (n as f64).sqrt(), 0.0));
    for iter in 1..=POWER_MAX_ITER {
        let y = a * &x;
        let lambda = x.dotc(&y);
        let residual = (&y - &x * lambda).norm();
        if residual <= POWER_TOL * norm_a {
            return Ok(EigenPair {
                value: lambda.re,
                vector: unit(x),
            });
        }
        let ny = y.norm();
        if ny == 0.0 {
            return Ok(EigenPair {
                value: 0.0,
                vector: unit(x),
            });
        }
        x = y.unscale(ny);
        if iter == POWER_MAX_ITER {
            break;
        }
    }
    Err(Error::numerical(
        "power iteration did not converge",
        POWER_MAX_ITER,
    ))
}

/// Top eigenpair of the Hermitian-definite pencil `A x = lambda B x`.
///
/// Reduces through the Cholesky factor `B = L L^H`. The returned vector is
/// normalized to unit 2-norm.
pub fn hermitian_pencil_max_eigenpair(a: &CMatrix, b: &CMatrix) -> Result<EigenPair> {
    check_hermitian(a, "pencil A")?;
    check_hermitian(b, "pencil B")?;
    if a.shape() != b.shape() {
        return Err(Error::validation("pencil matrices differ in shape"));
    }
    let n = a.nrows();
    let chol = pd_cholesky(b, "pencil B")?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&CMatrix::identity(n, n))
        .ok_or_else(|| Error::numerical("singular Cholesky factor", 0))?;
    let reduced = &l_inv * a * l_inv.adjoint();
    let top = hermitian_max_eigenpair(&hermitian_part(&reduced))?;
    Ok(EigenPair {
        value: top.value,
        vector: unit(l_inv.adjoint() * top.vector),
    })
}

/// Rank-one SVD of a numerically rank-one matrix.
pub fn rank1_svd(h: &CMatrix) -> Result<Rank1Svd> {
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(Error::validation("rank1_svd: empty matrix"));
    }
    let svd = h.clone().svd(true, false);
    let mut sv: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
    sv.sort_by(|x, y| y.1.total_cmp(&x.1));
    let (i1, d1) = sv[0];
    if d1 == 0.0 {
        return Err(Error::validation(
            "rank1_svd: zero matrix has no rank-one factor",
        ));
    }
    let ratio = sv.get(1).map_or(0.0, |s| s.1 / d1);
    if ratio > RANK1_TOL {
        return Err(Error::validation(format!(
            "rank1_svd: matrix is not rank one (sigma2/sigma1 = {ratio:.3e})"
        )));
    }
    let u = svd
        .u
        .ok_or_else(|| Error::numerical("SVD did not return left vectors", 0))?;
    let u1 = unit(u.column(i1).into_owned());
    let v1 = (h.adjoint() * &u1).unscale(d1);
    Ok(Rank1Svd { d1, u1, v1, ratio })
}

/// `(Q + w w^H)^{-1}` from a precomputed `Q^{-1}` by the matrix inversion lemma.
pub fn smw_inverse(q_inv: &CMatrix, w: &CVector) -> Result<CMatrix> {
    let k = require_square(q_inv, "smw_inverse")?;
    if w.len() != k {
        return Err(Error::validation(format!(
            "smw_inverse: w has length {}, expected {k}",
            w.len()
        )));
    }
    let qw = q_inv * w;
    let denom = 1.0 + w.dotc(&qw).re;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::numerical(
            format!("1 + w^H Q^-1 w = {denom:.3e} is not positive"),
            0,
        ));
    }
    let mut s = q_inv - (&qw * qw.adjoint()).unscale(denom);
    // Restore exact Hermitian symmetry lost to rounding.
    s = hermitian_part(&s);
    Ok(s)
}

/// Cholesky factor of the Hermitian part of `a`, refusing matrices that are
/// not positive definite. The complex factorization alone would accept a
/// negative pivot through a complex square root.
fn pd_cholesky(a: &CMatrix, what: &str) -> Result<nalgebra::Cholesky<Complex64, nalgebra::Dyn>> {
    let not_pd = || Error::validation(format!("{what}: matrix is not positive definite"));
    let chol = hermitian_part(a).cholesky().ok_or_else(not_pd)?;
    let pivots_ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|z| z.re > 0.0 && z.re.is_finite() && z.im.abs() <= 1e-12 * z.re);
    if pivots_ok {
        Ok(chol)
    } else {
        Err(not_pd())
    }
}

/// Natural log-determinant of a Hermitian positive-definite matrix.
pub fn hermitian_logdet(a: &CMatrix) -> Result<f64> {
    require_square(a, "hermitian_logdet")?;
    let chol = pd_cholesky(a, "hermitian_logdet")?;
    Ok(chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|z| 2.0 * z.re.ln())
        .sum())
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn hermitian_inverse(a: &CMatrix) -> Result<CMatrix> {
    require_square(a, "hermitian_inverse")?;
    let chol = pd_cholesky(a, "hermitian_inverse")?;
    Ok(hermitian_part(&chol.inverse()))
}

/// Inverse of a general square matrix.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    require_square(a, "inverse")?;
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("matrix is singular", 0))
}

/// Top eigenvector of `alpha I_N + C B C^H` through the `K x K` matrix
/// `alpha I_K + B C^H C`.
///
/// If `y` is an eigenvector of the small matrix with eigenvalue `lambda`,
/// then `C y` is an eigenvector of the large one with the same eigenvalue.
/// The two matrices share their nonzero `B`-dependent spectrum, so the top
/// eigenpair of the small matrix yields the top eigenpair of the large one
/// whenever `lambda >= alpha`.
pub fn reduced_max_eigvec(alpha: f64, b: &CMatrix, c_mat: &CMatrix) -> Result<ReducedEigen> {
    let k = require_square(b, "reduced_max_eigvec B")?;
    if c_mat.ncols() != k {
        return Err(Error::validation(format!(
            "reduced_max_eigvec: C has {} columns, B is {k}x{k}",
            c_mat.ncols()
        )));
    }
    let n = c_mat.nrows();
    let gram = c_mat.adjoint() * c_mat;
    let y_mat = CMatrix::identity(k, k).scale(alpha) + b * gram;
    let top = general_top(&y_mat)?;
    let x_star = c_mat * &top.pair.vector;
    if x_star.norm() == 0.0 {
        return Err(Error::numerical(
            "reduced eigenvector lies in the null space of C",
            0,
        ));
    }
    let lambda = top.pair.value;
    Ok(ReducedEigen {
        x_star,
        lambda,
        degenerate: top.gap < DEGENERATE_GAP,
        below_null_space: k < n && lambda < alpha,
    })
}
