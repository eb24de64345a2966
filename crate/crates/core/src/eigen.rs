//! Dense nonsymmetric eigenvalues for small matrices.
//!
//! The pipeline is the classical one: Parlett-Reinsch balancing, reduction to
//! upper Hessenberg form by stabilized elementary similarity transforms, then
//! the Francis double-shift QR iteration with exceptional shifts. Only
//! eigenvalues are computed; the transforms are not accumulated.
//!
//! The matrices this crate feeds in are companion matrices of side below ~10,
//! so an in-repo solver is both small and fast; no external linear algebra
//! backend is involved.

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Eigenvalues of a square matrix as `(re, im)` pairs, in deflation order.
pub fn eigenvalues(m: &Mat) -> Result<Vec<(f64, f64)>> {
    assert_eq!(m.rows(), m.cols(), "matrix must be square");
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a);
    hqr(&mut a)
}

/// Diagonal similarity scaling that roughly equalizes row and column norms.
fn balance(a: &mut Mat) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                let mut c_scaled = c;
                while c_scaled < g {
                    f *= RADIX;
                    c_scaled *= sqrdx;
                }
                g = r * RADIX;
                while c_scaled > g {
                    f /= RADIX;
                    c_scaled /= sqrdx;
                }
                if (c_scaled + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

/// Reduction to upper Hessenberg form by pivoted elimination similarities.
fn hessenberg(a: &mut Mat) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    for m in 1..(n - 1) {
        let mut x = 0.0f64;
        let mut piv = m;
        for j in m..n {
            if a[(j, m - 1)].abs() > x.abs() {
                x = a[(j, m - 1)];
                piv = j;
            }
        }
        if piv != m {
            for j in (m - 1)..n {
                let tmp = a[(piv, j)];
                a[(piv, j)] = a[(m, j)];
                a[(m, j)] = tmp;
            }
            for j in 0..n {
                let tmp = a[(j, piv)];
                a[(j, piv)] = a[(j, m)];
                a[(j, m)] = tmp;
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[(i, m - 1)];
                if y != 0.0 {
                    y /= x;
                    a[(i, m - 1)] = 0.0;
                    for j in m..n {
                        let delta = y * a[(m, j)];
                        a[(i, j)] -= delta;
                    }
                    for j in 0..n {
                        let delta = y * a[(j, i)];
                        a[(j, m)] += delta;
                    }
                }
            }
        }
    }
    // The elimination leaves exact zeros below the subdiagonal; make that
    // explicit so hqr sees a clean Hessenberg matrix.
    for i in 2..n {
        for j in 0..(i - 1) {
            a[(i, j)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn hqr(a: &mut Mat) -> Result<Vec<(f64, f64)>> {
    let n = a.rows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let cap = 100 * n;
    let mut sweeps = 0usize;

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }

    let mut t = 0.0;
    let mut active: isize = n as isize - 1;
    while active >= 0 {
        let nn = active as usize;
        let mut its = 0u32;
        loop {
            // Look for a negligible subdiagonal entry, scanning upward.
            let mut l = 0usize;
            let mut ll = nn;
            while ll >= 1 {
                let mut s = a[(ll - 1, ll - 1)].abs() + a[(ll, ll)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(ll, ll - 1)].abs() <= f64::EPSILON * s {
                    a[(ll, ll - 1)] = 0.0;
                    l = ll;
                    break;
                }
                ll -= 1;
            }

            let mut x = a[(nn, nn)];
            if l == nn {
                // One real eigenvalue deflates.
                wr[nn] = x + t;
                wi[nn] = 0.0;
                active = nn as isize - 1;
                break;
            }

            let mut y = a[(nn - 1, nn - 1)];
            let mut w = a[(nn, nn - 1)] * a[(nn - 1, nn)];
            if l == nn - 1 {
                // A trailing 2x2 block deflates to a real or conjugate pair.
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(if p == 0.0 { 1.0 } else { p });
                    wr[nn - 1] = x + z;
                    wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn] = z;
                    wi[nn - 1] = -z;
                }
                active = nn as isize - 2;
                break;
            }

            // No deflation: run one double-shift sweep over rows l..=nn.
            sweeps += 1;
            if sweeps > cap {
                return Err(Error::NoConvergence(cap));
            }
            if its == 10 || its == 20 {
                // Exceptional shift to break symmetric stalls.
                t += x;
                for i in 0..=nn {
                    a[(i, i)] -= x;
                }
                let s = a[(nn, nn - 1)].abs() + a[(nn - 1, nn - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let mut p;
            let mut q;
            let mut r;
            let mut m = nn - 2;
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }

            for k in m..nn {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nn - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r)
                    .sqrt()
                    .copysign(if p == 0.0 { 1.0 } else { p });
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut scratch = a[(k, j)] + q * a[(k + 1, j)];
                        if k != nn - 1 {
                            scratch += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= scratch * z;
                        }
                        a[(k + 1, j)] -= scratch * y;
                        a[(k, j)] -= scratch * x;
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        let mut scratch = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k != nn - 1 {
                            scratch += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= scratch * r;
                        }
                        a[(i, k + 1)] -= scratch * q;
                        a[(i, k)] -= scratch;
                    }
                }
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_real(mut vals: Vec<(f64, f64)>) -> Vec<f64> {
        for &(re, im) in &vals {
            assert!(
                im.abs() < 1e-9 * (1.0 + re.abs()),
                "unexpected imaginary part"
            );
        }
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        vals.into_iter().map(|(re, _)| re).collect()
    }

    #[test]
    fn eigenvalues_1x1() {
        let m = Mat::from_rows(vec![vec![4.25]]);
        assert_eq!(eigenvalues(&m).unwrap(), vec![(4.25, 0.0)]);
    }

    #[test]
    fn eigenvalues_diag_2x2() {
        let m = Mat::from_rows(vec![vec![2.0, 1.0], vec![0.0, -3.0]]);
        let vals = sorted_real(eigenvalues(&m).unwrap());
        assert!((vals[0] + 3.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn companion_of_cubic_with_roots_1_2_3() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = Mat::from_rows(vec![
            vec![0.0, 0.0, 6.0],
            vec![1.0, 0.0, -11.0],
            vec![0.0, 1.0, 6.0],
        ]);
        let vals = sorted_real(eigenvalues(&m).unwrap());
        for (got, want) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
        }
    }

    #[test]
    fn rotation_matrix_has_conjugate_pair() {
        let m = Mat::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        let mut vals = eigenvalues(&m).unwrap();
        vals.sort_by(|a, b| a.1.total_cmp(&b.1));
        assert!((vals[0].1 + 1.0).abs() < 1e-12);
        assert!((vals[1].1 - 1.0).abs() < 1e-12);
        assert!(vals[0].0.abs() < 1e-12 && vals[1].0.abs() < 1e-12);
    }

    #[test]
    fn dense_5x5_with_known_spectrum() {
        // Similarity transform of diag(1..5) by a fixed unit lower matrix L:
        // A = L D L^{-1} keeps the spectrum {1,2,3,4,5}.
        let n = 5;
        let mut l = Mat::identity(n);
        let mut entries = 0.1;
        for i in 1..n {
            for j in 0..i {
                l[(i, j)] = entries;
                entries = -entries * 0.7;
            }
        }
        let mut d = Mat::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = (i + 1) as f64;
        }
        // L^{-1} by forward substitution against the identity.
        let mut linv = Mat::identity(n);
        for col in 0..n {
            for i in 0..n {
                let mut s = linv[(i, col)];
                for j in 0..i {
                    s -= l[(i, j)] * linv[(j, col)];
                }
                linv[(i, col)] = s;
            }
        }
        let a = l.matmul(&d).matmul(&linv);
        let vals = sorted_real(eigenvalues(&a).unwrap());
        for (got, want) in vals.iter().zip([1.0, 2.0, 3.0, 4.0, 5.0]) {
            assert!((got - want).abs() < 1e-8, "got {got}, want {want}");
        }
    }
}
