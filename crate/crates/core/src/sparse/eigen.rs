//! Dense eigenvalue solvers.
//!
//! Nonsymmetric: balancing, Householder reduction to upper Hessenberg form,
//! then the Francis double-shift QR iteration. Symmetric: Householder
//! tridiagonalization followed by implicit QL with Wilkinson-type shifts.
//! Only eigenvalues are computed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::scalar::Scalar;
use crate::sparse::DenseMatrix;

/// Default dimension cap for dense spectral work.
pub const DENSE_EIGEN_CAP: usize = 2000;

/// All eigenvalues of a square matrix. Errors above `cap` or if the QR
/// iteration does not converge within `100 * dim` sweeps.
pub fn dense_eigenvalues(m: &DenseMatrix, cap: usize) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Usage("eigenvalues of a non-square matrix".into()));
    }
    if m.nrows() > cap {
        return Err(Error::Capacity(format!(
            "dense eigensolve of order {} exceeds cap {cap}",
            m.nrows()
        )));
    }
    let pairs = general_eigenvalues(m.nrows(), m.values().to_vec())?;
    Ok(pairs
        .into_iter()
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// Eigenvalues of a row-major `n x n` array in any [`Scalar`] precision,
/// returned as `(re, im)` pairs.
pub fn general_eigenvalues<T: Scalar>(n: usize, mut a: Vec<T>) -> Result<Vec<(T, T)>> {
    assert_eq!(a.len(), n * n);
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    balance(n, &mut a);
    hessenberg(n, &mut a);
    hqr(n, &mut a)
}

fn balance<T: Scalar>(n: usize, a: &mut [T]) {
    const RADIX: f64 = 2.0;
    let sqrdx = T::from_f64(RADIX * RADIX);
    let radix = T::from_f64(RADIX);
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].abs();
                    r += a[i * n + j].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::from_f64(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 0..n {
                        a[i * n + j] *= g;
                    }
                    for j in 0..n {
                        a[j * n + i] *= f;
                    }
                }
            }
        }
    }
}

fn hessenberg<T: Scalar>(n: usize, a: &mut [T]) {
    if n < 3 {
        return;
    }
    let mut ort = vec![T::zero(); n];
    for m in 1..n - 1 {
        let mut scale = T::zero();
        for i in m..n {
            scale += a[i * n + m - 1].abs();
        }
        if scale == T::zero() {
            continue;
        }
        let mut h = T::zero();
        for i in (m..n).rev() {
            ort[i] = a[i * n + m - 1] / scale;
            h += ort[i] * ort[i];
        }
        let g = if ort[m] > T::zero() { -h.sqrt() } else { h.sqrt() };
        h -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = T::zero();
            for i in (m..n).rev() {
                f += ort[i] * a[i * n + j];
            }
            f /= h;
            for i in m..n {
                a[i * n + j] -= f * ort[i];
            }
        }
        for i in 0..n {
            let mut f = T::zero();
            for j in (m..n).rev() {
                f += ort[j] * a[i * n + j];
            }
            f /= h;
            for j in m..n {
                a[i * n + j] -= f * ort[j];
            }
        }
        a[m * n + m - 1] = scale * g;
        for i in m + 1..n {
            a[i * n + m - 1] = T::zero();
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
fn hqr<T: Scalar>(n: usize, a: &mut [T]) -> Result<Vec<(T, T)>> {
    let zero = T::zero();
    let at = |a: &[T], i: usize, j: usize| a[i * n + j];
    let mut wr = vec![zero; n];
    let mut wi = vec![zero; n];
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut anorm = zero;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += at(a, i, j).abs();
        }
    }
    let max_total = 100 * n.max(1);
    let mut total = 0usize;
    let mut nn = n as isize - 1;
    let mut t = zero;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // look for a single small subdiagonal element
            let mut l = nu;
            while l >= 1 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == zero {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() + s == s {
                    a[l * n + l - 1] = zero;
                    break;
                }
                l -= 1;
            }
            let mut x = at(a, nu, nu);
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = zero;
                nn -= 1;
                break;
            }
            let mut y = at(a, nu - 1, nu - 1);
            let mut w = at(a, nu, nu - 1) * at(a, nu - 1, nu);
            if l == nu - 1 {
                let p = T::from_f64(0.5) * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= zero {
                    z = p + T::copysign_of(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != zero {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = zero;
                    wi[nu] = zero;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            total += 1;
            if total > max_total {
                return Err(Error::Numerical(format!(
                    "Hessenberg QR did not converge within {max_total} sweeps"
                )));
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[i * n + i] -= x;
                }
                let s = at(a, nu, nu - 1).abs() + at(a, nu - 1, nu - 2).abs();
                x = T::from_f64(0.75) * s;
                y = x;
                w = T::from_f64(-0.4375) * s * s;
            }
            its += 1;
            // look for two consecutive small subdiagonal elements
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = at(a, m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at(a, m + 1, m) + at(a, m, m + 1);
                q = at(a, m + 1, m + 1) - z - rr - ss;
                r = at(a, m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i * n + i - 2] = zero;
                if i != m + 2 {
                    a[i * n + i - 3] = zero;
                }
            }
            // double QR step on rows l..=nu and columns m..=nu
            let mut k = m;
            while k < nu {
                if k != m {
                    p = at(a, k, k - 1);
                    q = at(a, k + 1, k - 1);
                    r = zero;
                    if k != nu - 1 {
                        r = at(a, k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != zero {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = T::copysign_of((p * p + q * q + r * r).sqrt(), p);
                if s != zero {
                    if k == m {
                        if l != m {
                            a[k * n + k - 1] = -at(a, k, k - 1);
                        }
                    } else {
                        a[k * n + k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = at(a, k, j) + q * at(a, k + 1, j);
                        if k != nu - 1 {
                            p += r * at(a, k + 2, j);
                            a[(k + 2) * n + j] -= p * z;
                        }
                        a[(k + 1) * n + j] -= p * y;
                        a[k * n + j] -= p * x;
                    }
                    let mmin = nu.min(k + 3);
                    for i in l..=mmin {
                        p = x * at(a, i, k) + y * at(a, i, k + 1);
                        if k != nu - 1 {
                            p += z * at(a, i, k + 2);
                            a[i * n + k + 2] -= p * r;
                        }
                        a[i * n + k + 1] -= p * q;
                        a[i * n + k] -= p;
                    }
                }
                k += 1;
            }
            if !a.iter().all(|v| v.is_finite()) {
                return Err(Error::Numerical("non-finite value in QR sweep".into()));
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

/// Eigenvalues of a symmetric matrix in ascending order. Only the lower
/// triangle is read.
pub fn symmetric_eigenvalues(m: &DenseMatrix, cap: usize) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Usage("symmetric eigenvalues of a non-square matrix".into()));
    }
    if n > cap {
        return Err(Error::Capacity(format!(
            "symmetric eigensolve of order {n} exceeds cap {cap}"
        )));
    }
    let mut a = m.clone().into_values();
    let (mut d, mut e) = tridiagonalize(n, &mut a);
    tql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.total_cmp(y));
    Ok(d)
}

fn tridiagonalize(n: usize, a: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                let mut h = 0.0;
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in j + 1..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
    }
    for i in 0..n {
        d[i] = a[i * n + i];
    }
    (d, e)
}

fn tql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical("symmetric QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::scalar::DoubleDouble;

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let m = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ])
        .unwrap();
        let ev = sorted_re(dense_eigenvalues(&m, DENSE_EIGEN_CAP).unwrap());
        for (k, l) in ev.iter().enumerate() {
            assert!((l.re - (k + 1) as f64).abs() < 1e-12 && l.im.abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let ev = sorted_re(dense_eigenvalues(&m, DENSE_EIGEN_CAP).unwrap());
        let mut ims: Vec<f64> = ev.iter().map(|l| l.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
        assert!(ev.iter().all(|l| l.re.abs() < 1e-12));
    }

    #[test]
    fn companion_double_root() {
        // x^2 - x + 1/4
        let m = DenseMatrix::from_rows(&[vec![1.0, -0.25], vec![1.0, 0.0]]).unwrap();
        let ev = dense_eigenvalues(&m, DENSE_EIGEN_CAP).unwrap();
        assert!(ev.iter().all(|l| (l - Complex64::new(0.5, 0.0)).norm() < 1e-6));
    }

    #[test]
    fn cap_is_enforced() {
        let m = DenseMatrix::identity(5);
        assert!(matches!(dense_eigenvalues(&m, 4), Err(Error::Capacity(_))));
        assert!(matches!(symmetric_eigenvalues(&m, 4), Err(Error::Capacity(_))));
    }

    #[test]
    fn larger_nonsymmetric_backward_error() {
        // upper-triangular plus a coupling; exact spectrum known from the triangle
        let n = 12;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = (i as f64) - 3.5;
            for j in i + 1..n {
                m[(i, j)] = ((i * 7 + j * 3) % 5) as f64 - 2.0;
            }
        }
        let mut ev: Vec<f64> = dense_eigenvalues(&m, DENSE_EIGEN_CAP)
            .unwrap()
            .into_iter()
            .map(|l| l.re)
            .collect();
        ev.sort_by(f64::total_cmp);
        for (k, l) in ev.iter().enumerate() {
            assert!((l - (k as f64 - 3.5)).abs() < 1e-9, "{l}");
        }
    }

    #[test]
    fn symmetric_tridiagonal_spectrum() {
        // tridiag(-1, 2, -1): 2 - 2 cos(k pi / (n + 1))
        let n = 9;
        let t = crate::sparse::CsrMatrix::tridiag(-1.0, 2.0, -1.0, n, 1.0)
            .unwrap()
            .to_dense();
        let ev = symmetric_eigenvalues(&t, DENSE_EIGEN_CAP).unwrap();
        for (k, l) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((l - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn extended_precision_resolves_jordan_block() {
        // 3x3 Jordan block at 1, hidden by a similarity transform
        let j = [1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0];
        let s = [2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        let sd = DenseMatrix::from_row_major(3, 3, s.to_vec()).unwrap();
        let jd = DenseMatrix::from_row_major(3, 3, j.to_vec()).unwrap();
        let sinv = sd.solve(&DenseMatrix::identity(3)).unwrap();
        let m = sd.matmul(&jd).matmul(&sinv);
        let dd: Vec<DoubleDouble> = m.values().iter().map(|&v| DoubleDouble::from_f64(v)).collect();
        let ev = general_eigenvalues(3, dd).unwrap();
        // the f64 input already carries ~1e-16 error, so the cube-root
        // spread is ~5e-6 at best; extended precision must not make it worse
        for (re, im) in ev {
            let d = ((re.to_f64() - 1.0).powi(2) + im.to_f64().powi(2)).sqrt();
            assert!(d < 1e-4, "{d}");
        }
    }
}
