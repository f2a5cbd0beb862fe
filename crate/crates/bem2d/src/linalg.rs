//! Dense linear algebra for the boundary element systems.
//!
//! Everything here is deterministic and allocation-simple: row-major dense
//! matrices, LU with partial pivoting plus a 1-norm condition estimate for
//! complex systems, Cholesky and a cyclic Jacobi eigensolver for the real
//! symmetric Gram matrices, and the discrete inf-sup constant
//! `beta = sigma_min(L^{-1} A L^{-T})` where `G = L L^T` is the energy Gram
//! matrix.  For large systems the smallest singular value is found by power
//! iteration on the inverse, reusing the LU and Cholesky factors; small
//! systems use the dense eigensolver on a Hermitian product.

use num_complex::Complex64;

use crate::error::Error;

/// Systems with a condition-number estimate below this are treated as
/// numerically singular.
pub const TOL_SINGULAR: f64 = 1e-12;

/// Largest relative residual accepted from a direct solve.
pub const TOL_RESIDUAL: f64 = 1e-10;

/// Dense complex matrix, row major.
#[derive(Clone, Debug)]
pub struct CMat {
    n: usize,
    a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> CMat {
        CMat {
            n,
            a: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> CMat {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] += v;
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.a[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Largest column sum of absolute values.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Dense real matrix, row major.
#[derive(Clone, Debug)]
pub struct RMat {
    n: usize,
    a: Vec<f64>,
}

impl RMat {
    pub fn zeros(n: usize) -> RMat {
        RMat {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> RMat {
        let mut m = RMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn matvec_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.a[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).map(|(&a, b)| b * a).sum()
            })
            .collect()
    }
}

/// LU factorization with partial pivoting.
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
    singular: bool,
}

impl Lu {
    pub fn factor(a: &CMat) -> Lu {
        let n = a.n;
        let mut lu = a.a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for i in k + 1..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                for j in k + 1..n {
                    let upd = m * lu[k * n + j];
                    lu[i * n + j] -= upd;
                }
            }
        }
        Lu {
            n,
            lu,
            piv,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert!(!self.singular, "solve on singular factorization");
        let n = self.n;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solve `A^H x = b` with the same factorization.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert!(!self.singular, "solve on singular factorization");
        let n = self.n;
        // A = P^T L U, so A^H = U^H L^H P and x = P^T L^{-H} U^{-H} b.
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[j * n + i].conj() * x[j];
            }
            x[i] = s / self.lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i].conj() * x[j];
            }
            x[i] = s;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, &p) in self.piv.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }
}

/// Estimate `1 / (||A||_1 ||A^{-1}||_1)` from an LU factorization, by the
/// classic iterative 1-norm estimator driven by solves with `A` and `A^H`.
pub fn rcond_estimate(a: &CMat, lu: &Lu) -> f64 {
    if lu.is_singular() {
        return 0.0;
    }
    let n = a.n;
    if n == 0 {
        return 1.0;
    }
    let norm_a = a.norm_one();
    if norm_a == 0.0 {
        return 0.0;
    }
    let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
    let mut est = 0.0f64;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&x);
        let y1: f64 = y.iter().map(|v| v.norm()).sum();
        est = est.max(y1);
        let xi: Vec<Complex64> = y
            .iter()
            .map(|v| {
                if v.norm() == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    v / v.norm()
                }
            })
            .collect();
        let z = lu.solve_adjoint(&xi);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, 0.0), |acc, it| if it.1 > acc.1 { it } else { acc });
        let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
        if zmax <= zx || j == last_j {
            break;
        }
        last_j = j;
        x = vec![Complex64::new(0.0, 0.0); n];
        x[j] = Complex64::new(1.0, 0.0);
    }
    if est == 0.0 {
        return 0.0;
    }
    1.0 / (norm_a * est)
}

/// Outcome of a direct solve, with the diagnostics used by the adaptive loop.
pub struct SolveReport {
    pub x: Vec<Complex64>,
    pub rcond: f64,
    pub residual_rel: f64,
    /// True when the condition estimate and the residual are both acceptable.
    pub solvable: bool,
}

/// Factor, solve and judge a linear system in one call.
pub fn lu_solve(a: &CMat, b: &[Complex64]) -> SolveReport {
    let lu = Lu::factor(a);
    if lu.is_singular() {
        return SolveReport {
            x: vec![Complex64::new(0.0, 0.0); a.n],
            rcond: 0.0,
            residual_rel: f64::INFINITY,
            solvable: false,
        };
    }
    let rcond = rcond_estimate(a, &lu);
    let x = lu.solve(b);
    let r = a.matvec(&x);
    let mut rmax = 0.0f64;
    let mut bmax = 0.0f64;
    for i in 0..a.n {
        rmax = rmax.max((r[i] - b[i]).norm());
        bmax = bmax.max(b[i].norm());
    }
    let residual_rel = if bmax == 0.0 { rmax } else { rmax / bmax };
    let solvable = rcond >= TOL_SINGULAR && residual_rel <= TOL_RESIDUAL;
    SolveReport {
        x,
        rcond,
        residual_rel,
        solvable,
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &RMat) -> Result<Cholesky, Error> {
        let n = a.n;
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a.at(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::Numerical(format!(
                            "matrix not positive definite at pivot {i}"
                        )));
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_at(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// `L x` for complex `x`.
    pub fn apply_l(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..=i).map(|j| x[j] * self.l[i * n + j]).sum())
            .collect()
    }

    /// `L^T x` for complex `x`.
    pub fn apply_lt(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| (i..n).map(|j| x[j] * self.l[j * n + i]).sum())
            .collect()
    }

    /// Solve `L y = x`.
    pub fn solve_l(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y = x.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= y[j] * self.l[i * n + j];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    /// Solve `L^T y = x`.
    pub fn solve_lt(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y = x.to_vec();
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= y[j] * self.l[j * n + i];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

/// Eigenvalues (ascending) of a real symmetric matrix by cyclic Jacobi
/// rotations.  Only values are returned; vectors are not needed here.
pub fn sym_eigenvalues(a: &RMat) -> Vec<f64> {
    let n = a.n;
    let mut m = a.a.clone();
    let frob: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q].abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}

/// Smallest eigenvalue of a Hermitian matrix, via the real symmetric
/// embedding `[[Re, -Im], [Im, Re]]` whose spectrum repeats each eigenvalue
/// twice.
pub fn hermitian_min_eigenvalue(a: &CMat) -> f64 {
    let n = a.n;
    let e = RMat::from_fn(2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let v = a.at(ii, jj);
        match (bi, bj) {
            (0, 0) | (1, 1) => v.re,
            (0, 1) => -v.im,
            (1, 0) => v.im,
            _ => unreachable!(),
        }
    });
    sym_eigenvalues(&e)[0]
}

/// Above this size the inf-sup constant switches from the dense eigensolver
/// to inverse power iteration.
const INF_SUP_DENSE_LIMIT: usize = 128;

/// Discrete inf-sup constant of `A` with respect to the energy Gram matrix
/// `G = L L^T`: the smallest singular value of `C = L^{-1} A L^{-T}`.
/// Returns 0 when `A` is numerically singular.
pub fn inf_sup_beta(a: &CMat, gram: &Cholesky) -> f64 {
    assert_eq!(a.n, gram.n);
    let n = a.n;
    if n == 0 {
        return 0.0;
    }
    if n <= INF_SUP_DENSE_LIMIT {
        inf_sup_beta_dense(a, gram)
    } else {
        inf_sup_beta_iterative(a, gram)
    }
}

fn form_congruence(a: &CMat, gram: &Cholesky) -> CMat {
    // C = L^{-1} A L^{-T}: solve L X = A column-wise, then transpose-solve.
    let n = a.n;
    let mut c = CMat::zeros(n);
    for j in 0..n {
        let col: Vec<Complex64> = (0..n).map(|i| a.at(i, j)).collect();
        let col = gram.solve_l(&col);
        for i in 0..n {
            c.set(i, j, col[i]);
        }
    }
    // right-multiplying by L^{-T} solves L C_row^T = row for each row
    for i in 0..n {
        let row: Vec<Complex64> = (0..n).map(|j| c.at(i, j)).collect();
        let row = gram.solve_l(&row);
        for j in 0..n {
            c.set(i, j, row[j]);
        }
    }
    c
}

fn inf_sup_beta_dense(a: &CMat, gram: &Cholesky) -> f64 {
    let n = a.n;
    let c = form_congruence(a, gram);
    let cc = CMat::from_fn(n, |i, j| {
        (0..n).map(|k| c.at(k, i).conj() * c.at(k, j)).sum()
    });
    let lam = hermitian_min_eigenvalue(&cc);
    lam.max(0.0).sqrt()
}

fn inf_sup_beta_iterative(a: &CMat, gram: &Cholesky) -> f64 {
    let n = a.n;
    let lu = Lu::factor(a);
    if lu.is_singular() {
        return 0.0;
    }
    if rcond_estimate(a, &lu) < 1e-14 {
        return 0.0;
    }
    // Power iteration on (C^H C)^{-1} = C^{-1} C^{-H} with
    // C^{-1} x = L^T A^{-1} L x and C^{-H} x = L^T A^{-H} L x.
    let mut v = vec![Complex64::new(1.0, 0.0); n];
    let nv = (n as f64).sqrt();
    for vi in v.iter_mut() {
        *vi /= nv;
    }
    let mut lambda = 0.0f64;
    for _ in 0..300 {
        let w = gram.apply_lt(&lu.solve_adjoint(&gram.apply_l(&v)));
        let u = gram.apply_lt(&lu.solve(&gram.apply_l(&w)));
        let rq: f64 = v.iter().zip(&u).map(|(a, b)| (a.conj() * b).re).sum();
        let norm: f64 = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / norm;
        }
        let change = (rq - lambda).abs();
        lambda = rq;
        if change <= 1e-9 * lambda.abs().max(1e-300) {
            break;
        }
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    (1.0 / lambda).sqrt()
}

/// Energy norm `sqrt(c^H G c)` of a coefficient vector for a real symmetric
/// positive semidefinite Gram matrix.  The quadratic form is real up to
/// roundoff; a small imaginary part is discarded.
pub fn energy_norm(gram: &RMat, c: &[Complex64]) -> f64 {
    let y = gram.matvec_complex(c);
    let s: Complex64 = c.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
    debug_assert!(
        s.im.abs() <= 1e-8 * s.re.abs().max(1e-300),
        "energy form has imaginary part {} vs {}",
        s.im,
        s.re
    );
    s.re.max(0.0).sqrt()
}
