//! Dense complex linear algebra used by the propagator and steady-state
//! solver: Kronecker products, LU factorization with partial pivoting and
//! the scaling-and-squaring Padé matrix exponential.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    Array2::from_diag_elem(n, ONE)
}

/// Kronecker product `a ⊗ b` (first factor is the most significant index).
pub fn kron(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Maximum absolute column sum.
pub fn one_norm(a: &ArrayView2<C64>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &ArrayView2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max |A - A^†|
pub fn hermiticity_error(a: &ArrayView2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn adjoint(a: &ArrayView2<C64>) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

/// `y = A x` for a row-major dense matrix.
pub fn matvec_into(a: &ArrayView2<C64>, x: &ArrayView1<C64>, y: &mut [C64]) {
    debug_assert_eq!(a.ncols(), x.len());
    debug_assert_eq!(a.nrows(), y.len());
    let xs = x.as_slice().expect("contiguous vector");
    match a.as_slice() {
        Some(data) => {
            let n = a.ncols();
            for (yi, row) in y.iter_mut().zip(data.chunks_exact(n)) {
                let mut re = 0.0;
                let mut im = 0.0;
                for (aij, xj) in row.iter().zip(xs) {
                    re += aij.re * xj.re - aij.im * xj.im;
                    im += aij.re * xj.im + aij.im * xj.re;
                }
                *yi = C64::new(re, im);
            }
        }
        None => {
            for (yi, row) in y.iter_mut().zip(a.rows()) {
                *yi = row.dot(x);
            }
        }
    }
}

/// LU factorization `P A = L U` with partial pivoting, stored in place.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(mut a: CMatrix) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if !a.is_standard_layout() {
            a = a.as_standard_layout().to_owned();
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = max_abs(&a.view()).max(f64::MIN_POSITIVE);
        let data = a.as_slice_mut().expect("standard layout");
        for k in 0..n {
            let mut piv = k;
            let mut best = data[k * n + k].norm();
            for i in (k + 1)..n {
                let v = data[i * n + k].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best <= scale * 1e-300 || !best.is_finite() {
                return Err(Error::Singular);
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    data.swap(k * n + j, piv * n + j);
                }
            }
            let (upper, lower) = data.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..(k + 1) * n];
            let inv = ONE / pivot_row[k];
            for row in lower.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l == ZERO {
                    continue;
                }
                for (r, p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *r -= l * *p;
                }
            }
        }
        Ok(Lu { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Smallest |U_kk| relative to the largest; a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> f64 {
        let d: Vec<f64> = self.lu.diag().iter().map(|z| z.norm()).collect();
        let hi = d.iter().cloned().fold(0.0, f64::max);
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    pub fn solve_vec(&self, b: &ArrayView1<C64>) -> CVector {
        let n = self.dim();
        let lu = self.lu.as_slice().expect("standard layout");
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &lu[i * n..i * n + i];
            let mut s = x[i];
            for (l, xj) in row.iter().zip(&x[..i]) {
                s -= *l * *xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = &lu[i * n..(i + 1) * n];
            let mut s = x[i];
            for (u, xj) in row[i + 1..].iter().zip(&x[i + 1..]) {
                s -= *u * *xj;
            }
            x[i] = s / row[i];
        }
        Array1::from(x)
    }

    /// Solve `A X = B` for a matrix right-hand side.
    pub fn solve_mat(&self, b: &ArrayView2<C64>) -> CMatrix {
        let n = self.dim();
        let m = b.ncols();
        let lu = self.lu.as_slice().expect("standard layout");
        let mut x = Array2::<C64>::zeros((n, m));
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).assign(&b.row(p));
        }
        let xs = x.as_slice_mut().expect("standard layout");
        for i in 1..n {
            let (done, rest) = xs.split_at_mut(i * m);
            let xi = &mut rest[..m];
            for k in 0..i {
                let l = lu[i * n + k];
                if l == ZERO {
                    continue;
                }
                let xk = &done[k * m..(k + 1) * m];
                for (a, bk) in xi.iter_mut().zip(xk) {
                    *a -= l * *bk;
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = xs.split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            for k in (i + 1)..n {
                let u = lu[i * n + k];
                if u == ZERO {
                    continue;
                }
                let xk = &tail[(k - i - 1) * m..(k - i) * m];
                for (a, bk) in xi.iter_mut().zip(xk) {
                    *a -= u * *bk;
                }
            }
            let inv = ONE / lu[i * n + i];
            for a in xi.iter_mut() {
                *a *= inv;
            }
        }
        x
    }
}

// Padé coefficients and 1-norm thresholds for degrees 3, 5, 7, 9 and 13
// (Higham, SIAM J. Matrix Anal. Appl. 26, 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn scaled_sum(terms: &[(&CMatrix, f64)], n: usize) -> CMatrix {
    let mut out = Array2::<C64>::zeros((n, n));
    for (m, c) in terms {
        out.scaled_add(real(*c), *m);
    }
    out
}

fn add_identity(m: &mut CMatrix, c: f64) {
    for d in m.diag_mut() {
        *d += c;
    }
}

/// Matrix exponential of a general complex matrix by scaling and squaring
/// with a degree-3..13 diagonal Padé approximant.
pub fn expm(a: &ArrayView2<C64>) -> Result<CMatrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = one_norm(a);
    if norm == 0.0 {
        return Ok(identity(n));
    }
    let a = a.to_owned();
    let a2 = a.dot(&a);

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let mut powers = vec![identity(n), a2.clone()];
            while powers.len() * 2 <= m {
                let next = powers.last().unwrap().dot(&a2);
                powers.push(next);
            }
            let odd: Vec<(&CMatrix, f64)> = powers
                .iter()
                .enumerate()
                .map(|(k, p)| (p, coeffs[2 * k + 1]))
                .collect();
            let even: Vec<(&CMatrix, f64)> = powers
                .iter()
                .enumerate()
                .map(|(k, p)| (p, coeffs[2 * k]))
                .collect();
            let u = a.dot(&scaled_sum(&odd, n));
            let v = scaled_sum(&even, n);
            return pade_quotient(&u, &v);
        }
    }

    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let scale = 0.5_f64.powi(s);
    let a1 = &a * real(scale);
    let a2 = &a2 * real(scale * scale);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = &PADE13;

    let inner_u = scaled_sum(&[(&a6, b[13]), (&a4, b[11]), (&a2, b[9])], n);
    let mut w = a6.dot(&inner_u);
    w.scaled_add(real(b[7]), &a6);
    w.scaled_add(real(b[5]), &a4);
    w.scaled_add(real(b[3]), &a2);
    add_identity(&mut w, b[1]);
    let u = a1.dot(&w);

    let inner_v = scaled_sum(&[(&a6, b[12]), (&a4, b[10]), (&a2, b[8])], n);
    let mut v = a6.dot(&inner_v);
    v.scaled_add(real(b[6]), &a6);
    v.scaled_add(real(b[4]), &a4);
    v.scaled_add(real(b[2]), &a2);
    add_identity(&mut v, b[0]);

    let mut r = pade_quotient(&u, &v)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

fn pade_quotient(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let p = v + u;
    let q = v - u;
    let lu = Lu::factor(q)?;
    Ok(lu.solve_mat(&p.view()))
}
