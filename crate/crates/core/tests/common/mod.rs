//! Independent reference computations for the integration tests.
//!
//! Nothing here calls into the library's numerics: eigenproblems use a
//! cyclic Jacobi sweep on the real embedding, inverses use Gauss-Jordan
//! elimination and products are explicit loops.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type CMat = DMatrix<Complex64>;
pub type CVec = nalgebra::DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cgauss<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im) / 2f64.sqrt()
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cgauss(rng))
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| cgauss(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let a = random_matrix(n, n, rng);
    let h = mul(&a, &adjoint(&a));
    CMat::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5)
}

/// Positive definite with eigenvalues bounded away from zero.
pub fn random_pd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let mut h = random_hermitian(n, rng);
    for i in 0..n {
        h[(i, i)] += c(0.5, 0.0);
    }
    h
}

pub fn adjoint(a: &CMat) -> CMat {
    CMat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn mul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = c(0.0, 0.0);
            for k in 0..a.ncols() {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

pub fn mul_vec(a: &CMat, x: &CVec) -> CVec {
    let xm = CMat::from_column_slice(x.len(), 1, x.as_slice());
    let r = mul(a, &xm);
    CVec::from_column_slice(r.as_slice())
}

pub fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vnorm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn identity(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// `H_d + H_br diag(coeffs) H_ru` entry by entry.
pub fn triple_product(h_d: &CMat, h_br: &CMat, coeffs: &CVec, h_ru: &CMat) -> CMat {
    let (m, k) = (h_d.nrows(), h_d.ncols());
    let mut out = h_d.clone();
    for i in 0..m {
        for j in 0..k {
            for n in 0..coeffs.len() {
                out[(i, j)] += h_br[(i, n)] * coeffs[n] * h_ru[(n, j)];
            }
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_inverse(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[(x, col)].norm().partial_cmp(&m[(y, col)].norm()).unwrap())
            .unwrap();
        assert!(m[(piv, col)].norm() > 0.0, "singular matrix");
        m.swap_rows(col, piv);
        inv.swap_rows(col, piv);
        let p = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[(r, col)];
                for j in 0..n {
                    let (mv, iv) = (m[(col, j)], inv[(col, j)]);
                    m[(r, j)] -= f * mv;
                    inv[(r, j)] -= f * iv;
                }
            }
        }
    }
    inv
}

/// Determinant by Gaussian elimination.
pub fn gauss_det(a: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut m = a.clone();
    let mut det = c(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[(x, col)].norm().partial_cmp(&m[(y, col)].norm()).unwrap())
            .unwrap();
        if m[(piv, col)].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        if piv != col {
            m.swap_rows(col, piv);
            det = -det;
        }
        let p = m[(col, col)];
        det *= p;
        for r in col + 1..n {
            let f = m[(r, col)] / p;
            for j in col..n {
                let v = m[(col, j)];
                m[(r, j)] -= f * v;
            }
        }
    }
    det
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix; returns
/// eigenvalues and column eigenvectors (unsorted).
pub fn jacobi_symmetric(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let scale: f64 = m.iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = cs * mkp - sn * mkq;
                    m[(k, q)] = sn * mkp + cs * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = cs * mpk - sn * mqk;
                    m[(q, k)] = sn * mpk + cs * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// Eigenvalues (descending) and the top eigenvector of a Hermitian matrix
/// through its real embedding `[[Re, -Im], [Im, Re]]`, where every
/// eigenvalue appears twice.
pub fn hermitian_oracle(a: &CMat) -> (Vec<f64>, CVec) {
    let n = a.nrows();
    let emb = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let (vals, vecs) = jacobi_symmetric(&emb);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&x, &y| vals[y].partial_cmp(&vals[x]).unwrap());
    let spectrum: Vec<f64> = order.iter().step_by(2).map(|&i| vals[i]).collect();
    let top = order[0];
    let v = CVec::from_fn(n, |i, _| c(vecs[(i, top)], vecs[(i + n, top)]));
    let nv = vnorm(&v);
    (spectrum, v.map(|z| z / nv))
}

/// `|<a, b>| / (|a| |b|)`: 1 when the vectors agree up to a complex scalar.
pub fn alignment(a: &CVec, b: &CVec) -> f64 {
    inner(a, b).norm() / (vnorm(a) * vnorm(b))
}

pub fn oracle_sum_rate(h: &CMat, s2: f64) -> f64 {
    let (vals, _) = hermitian_oracle(&mul(&adjoint(h), h));
    vals.iter().map(|l| (1.0 + l.max(0.0) / s2).log2()).sum()
}

/// Post-ZF SNR from the row norms of the pseudo-inverse.
pub fn oracle_zf_rate(h: &CMat, s2: f64) -> f64 {
    let pinv = mul(&gauss_inverse(&mul(&adjoint(h), h)), &adjoint(h));
    (0..h.ncols())
        .map(|k| {
            let row: f64 = (0..h.nrows()).map(|m| pinv[(k, m)].norm_sqr()).sum();
            (1.0 + 1.0 / (s2 * row)).log2()
        })
        .sum()
}

pub fn regularized_gram(h: &CMat, s2: f64) -> CMat {
    let mut g = mul(&adjoint(h), h);
    for i in 0..g.nrows() {
        g[(i, i)] += c(s2, 0.0);
    }
    g
}

pub fn oracle_mmse_rate(h: &CMat, s2: f64) -> f64 {
    let inv = gauss_inverse(&regularized_gram(h, s2));
    (0..h.ncols()).map(|k| -(s2 * inv[(k, k)].re).log2()).sum()
}

pub fn oracle_mse_tot(h: &CMat, s2: f64) -> f64 {
    let inv = gauss_inverse(&regularized_gram(h, s2));
    (0..h.ncols()).map(|k| s2 * inv[(k, k)].re).sum()
}

/// Monte Carlo total MSE of the explicit MMSE combiner with unit-power
/// QPSK symbols and circular Gaussian noise of power `s2`.
pub fn simulated_mse_tot<R: Rng + ?Sized>(h: &CMat, s2: f64, draws: usize, rng: &mut R) -> f64 {
    let (m, k) = (h.nrows(), h.ncols());
    let wh = mul(&gauss_inverse(&regularized_gram(h, s2)), &adjoint(h));
    let mut total = 0.0;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..draws {
        let s = CVec::from_fn(k, |_, _| {
            c(
                if rng.random::<bool>() { amp } else { -amp },
                if rng.random::<bool>() { amp } else { -amp },
            )
        });
        let mut y = mul_vec(h, &s);
        for i in 0..m {
            y[i] += cgauss(rng) * s2.sqrt();
        }
        let est = mul_vec(&wh, &y);
        total += (0..k).map(|i| (est[i] - s[i]).norm_sqr()).sum::<f64>();
    }
    total / draws as f64
}

/// Orthonormal complement of the unit vector `u` by Gram-Schmidt against
/// the standard basis, as an `M x (M-1)` matrix.
pub fn orthonormal_complement(u: &CVec) -> CMat {
    let m = u.len();
    let mut basis: Vec<CVec> = vec![u.clone()];
    for e in 0..m {
        let mut v = CVec::from_fn(m, |i, _| if i == e { c(1.0, 0.0) } else { c(0.0, 0.0) });
        for _ in 0..2 {
            for b in &basis {
                let p = inner(b, &v);
                v -= b * p;
            }
        }
        let nv = vnorm(&v);
        if nv > 1e-8 {
            basis.push(v / c(nv, 0.0));
        }
        if basis.len() == m {
            break;
        }
    }
    let cols: Vec<CVec> = basis.into_iter().skip(1).collect();
    CMat::from_columns(&cols)
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky_lower(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        assert!(d > 0.0, "matrix is not positive definite");
        let d = d.sqrt();
        l[(j, j)] = c(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    l
}

/// Top eigenpair of the pencil `z1 x = lambda z2 x` with `z2` positive
/// definite, via the symmetric reduction `L^-1 z1 L^-H`.
pub fn pencil_oracle(z1: &CMat, z2: &CMat) -> (f64, CVec) {
    let l_inv = gauss_inverse(&cholesky_lower(z2));
    let reduced = mul(&mul(&l_inv, z1), &adjoint(&l_inv));
    let sym = CMat::from_fn(reduced.nrows(), reduced.ncols(), |i, j| {
        (reduced[(i, j)] + reduced[(j, i)].conj()) * 0.5
    });
    let (spec, y) = hermitian_oracle(&sym);
    (spec[0], mul_vec(&adjoint(&l_inv), &y))
}

pub fn rayleigh(a: &CMat, x: &CVec) -> f64 {
    inner(x, &mul_vec(a, x)).re / inner(x, x).re
}

/// Property-test settings; failures are reported inline rather than
/// persisted to regression files.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases: n,
        failure_persistence: None,
        ..Default::default()
    }
}
