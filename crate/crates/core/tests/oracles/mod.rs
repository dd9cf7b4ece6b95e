//! Reference computations that share no numerics with the library.
//!
//! Matrices are plain row-major `Vec<Vec<Complex64>>`; only the containers
//! of the library are read, never its eigen or SVD routines.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use starframe::{AlgElement, ModuleOperator, ModuleVector};

pub type Dense = Vec<Vec<Complex64>>;

pub fn dense(m: &DMatrix<Complex64>) -> Dense {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    let mut out = vec![vec![Complex64::new(0.0, 0.0); m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            for j in 0..m {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &Dense) -> Dense {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| a.iter().map(|r| r[j].conj()).collect())
        .collect()
}

/// Max absolute entry; cheap scale for tolerances.
pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn sub_scaled(y: &Dense, mu: f64, x: &Dense) -> Dense {
    y.iter()
        .zip(x)
        .map(|(ry, rx)| ry.iter().zip(rx).map(|(a, b)| a - b * mu).collect())
        .collect()
}

/// Plain Cholesky on `M + shift I`; true when every pivot is positive.
pub fn cholesky_ok(m: &Dense, shift: f64) -> bool {
    let n = m.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let d = m[j][j].re + shift - l[j][..j].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        let dj = d.sqrt();
        l[j][j] = Complex64::new(dj, 0.0);
        for i in j + 1..n {
            let s: Complex64 =
                m[i][j] - (0..j).map(|k| l[i][k] * l[j][k].conj()).sum::<Complex64>();
            l[i][j] = s / dj;
        }
    }
    true
}

/// `sup { μ >= 0 : μ T T^* ⪯ S S^* }` by bisection on a shifted Cholesky test.
pub fn pencil_bisect(t: &ModuleOperator, s: &ModuleOperator) -> f64 {
    let tf = dense(&t.flatten());
    let sf = dense(&s.flatten());
    let x = mul(&tf, &adjoint(&tf));
    let y = mul(&sf, &adjoint(&sf));
    let sx = max_abs(&x);
    if sx == 0.0 {
        return f64::INFINITY;
    }
    let sy = max_abs(&y);
    let psd = |mu: f64| {
        cholesky_ok(
            &sub_scaled(&y, mu, &x),
            1e-13 * (sy + mu * sx) * y.len() as f64,
        )
    };
    let mut lo = 0.0;
    let mut hi = (sy / sx).max(1e-300);
    while psd(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Characteristic polynomial coefficients `c_0..c_n` (monic, `c_n = 1`).
pub fn charpoly(a: &Dense) -> Vec<Complex64> {
    let n = a.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut c = vec![zero; n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut m = vec![vec![zero; n]; n];
    for k in 1..=n {
        let mut am = mul(a, &m);
        for (i, row) in am.iter_mut().enumerate() {
            row[i] += c[n + 1 - k];
        }
        m = am;
        let tr: Complex64 = (0..n).map(|i| mul_row_col(a, &m, i)).sum();
        c[n - k] = -tr / k as f64;
    }
    c
}

fn mul_row_col(a: &Dense, b: &Dense, i: usize) -> Complex64 {
    (0..a.len()).map(|l| a[i][l] * b[l][i]).sum()
}

/// Roots of a monic polynomial by simultaneous Weierstrass iteration.
pub fn durand_kerner(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0 + c[..n].iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    let eval = |x: Complex64| {
        c.iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * x + ci)
    };
    for _ in 0..2000 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                den = Complex64::new(1e-14, 0.0);
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-15 * radius {
            break;
        }
    }
    z
}

/// Blockwise eigenvalues of `a`.
pub fn spectrum(a: &AlgElement) -> Vec<Complex64> {
    a.blocks()
        .iter()
        .flat_map(|b| durand_kerner(&charpoly(&dense(b))))
        .collect()
}

/// `||a||` as the square root of the largest eigenvalue of `a^* a`.
pub fn norm(a: &AlgElement) -> f64 {
    a.blocks()
        .iter()
        .map(|b| {
            let d = dense(b);
            let g = mul(&adjoint(&d), &d);
            durand_kerner(&charpoly(&g))
                .iter()
                .fold(0.0_f64, |m, z| m.max(z.re))
                .max(0.0)
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Greedy matching distance between two multisets of complex numbers.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, p| {
                if p.1 < acc.1 {
                    p
                } else {
                    acc
                }
            });
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// `sum_j <f, d_j><d_j, f>` term by term.
pub fn direct_quadratic(f: &ModuleVector, ds: &[ModuleVector]) -> AlgElement {
    let mut acc = AlgElement::zero(f.spec());
    for d in ds {
        let x = f.inner(d).unwrap();
        acc = &acc + &(&x * &x.adjoint());
    }
    acc
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ar, ac, br, bc) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ac * bc]; ar * br];
    for p in 0..ar {
        for r in 0..ac {
            for q in 0..br {
                for s in 0..bc {
                    out[p * br + q][r * bc + s] = a[p][r] * b[q][s];
                }
            }
        }
    }
    out
}

pub fn dense_distance(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}
