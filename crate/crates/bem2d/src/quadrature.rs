//! Quadrature rules on the reference interval `[0, 1]`.
//!
//! Two rule families cover everything the assembly needs:
//!
//! * [`gauss_legendre`] — classical Gauss–Legendre rules, exact for
//!   polynomials of degree `2n - 1` against the weight `1`;
//! * [`gauss_log`] — Gauss rules for the logarithmic weight `-ln(t)` on
//!   `(0, 1)`, exact for polynomials of degree `2n - 1` against that weight.
//!
//! The log-weight rules are built from the known modified moments of
//! `-ln(t)` against shifted Legendre polynomials via the modified Chebyshev
//! algorithm, followed by a Golub–Welsch eigenvalue step.  That combination
//! is numerically stable for this weight up to well beyond the orders used
//! here.
//!
//! Rules are cached after first construction; lookups are cheap enough for
//! per-element-pair use.

use std::sync::OnceLock;

/// Nodes and weights of a quadrature rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// Apply the rule to `f` on `[0, 1]`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Apply the rule affinely mapped to `[a, b]`.
    pub fn integrate_on(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        len * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(a + len * x))
            .sum::<f64>()
    }
}

pub const MAX_GAUSS_ORDER: usize = 64;
pub const MAX_LOG_ORDER: usize = 32;

/// Gauss–Legendre rule with `n` points on `[0, 1]`.
///
/// Panics if `n` is zero or exceeds [`MAX_GAUSS_ORDER`].
pub fn gauss_legendre(n: usize) -> &'static QuadRule {
    assert!(
        (1..=MAX_GAUSS_ORDER).contains(&n),
        "Gauss-Legendre order {n} outside 1..={MAX_GAUSS_ORDER}"
    );
    static CACHE: OnceLock<Vec<QuadRule>> = OnceLock::new();
    let all = CACHE.get_or_init(|| (1..=MAX_GAUSS_ORDER).map(build_gauss_legendre).collect());
    &all[n - 1]
}

/// Gauss rule with `n` points for the weight `-ln(t)` on `(0, 1)`:
/// `sum_j w_j f(x_j) ~ int_0^1 f(t) (-ln t) dt`.
///
/// Panics if `n` is zero or exceeds [`MAX_LOG_ORDER`].
pub fn gauss_log(n: usize) -> &'static QuadRule {
    assert!(
        (1..=MAX_LOG_ORDER).contains(&n),
        "log-weight order {n} outside 1..={MAX_LOG_ORDER}"
    );
    static CACHE: OnceLock<Vec<QuadRule>> = OnceLock::new();
    let all = CACHE.get_or_init(|| (1..=MAX_LOG_ORDER).map(build_gauss_log).collect());
    &all[n - 1]
}

// --------------------------------------------------------------------------
// Gauss-Legendre construction: Newton iteration on the Legendre polynomial
// with the classical Chebyshev-based initial guess.

fn build_gauss_legendre(n: usize) -> QuadRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Initial guess for the i-th root of P_n on [-1, 1] (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map from [-1, 1] to [0, 1]; store ascending.
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    QuadRule { nodes, weights }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

// --------------------------------------------------------------------------
// Log-weight construction.
//
// Modified moments of -ln(t) against *monic* shifted Legendre polynomials
// pi_k on [0, 1]:
//
//   int_0^1 pi_k(t) (-ln t) dt = (-1)^k / (k (k+1)) * (k!)^2 / (2k)!   (k >= 1),
//   and 1 for k = 0.
//
// The monic shifted Legendre recurrence is
//   pi_{k+1} = (t - 1/2) pi_k - b_k pi_{k-1},   b_k = k^2 / (4 (4k^2 - 1)).
//
// The modified Chebyshev algorithm turns these into the Jacobi recurrence
// coefficients of the log weight; Golub-Welsch (symmetric tridiagonal QL)
// then yields nodes and weights.

fn build_gauss_log(n: usize) -> QuadRule {
    let m = 2 * n;
    // Modified moments nu_0 .. nu_{2n-1}.
    let mut nu = vec![0.0f64; m];
    nu[0] = 1.0;
    let mut ratio = 1.0f64; // (k!)^2 / (2k)!
    for k in 1..m {
        let kf = k as f64;
        ratio *= kf / (2.0 * kf - 1.0) / 2.0;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        nu[k] = sign / (kf * (kf + 1.0)) * ratio;
    }
    // Auxiliary (shifted Legendre) recurrence coefficients.
    let a = vec![0.5f64; m];
    let mut b = vec![0.0f64; m];
    for k in 1..m {
        let kf = k as f64;
        b[k] = kf * kf / (4.0 * (4.0 * kf * kf - 1.0));
    }

    // Modified Chebyshev algorithm (sigma rows indexed by target degree).
    let mut alpha = vec![0.0f64; n];
    let mut beta = vec![0.0f64; n];
    let mut sig_prev = vec![0.0f64; m]; // sigma_{-1, *}
    let mut sig = nu.clone(); // sigma_{0, *}
    alpha[0] = a[0] + nu[1] / nu[0];
    beta[0] = nu[0];
    for k in 1..n {
        let mut sig_next = vec![0.0f64; m];
        for l in k..(m - k) {
            sig_next[l] = sig[l + 1] - (alpha[k - 1] - a[l]) * sig[l] - beta[k - 1] * sig_prev[l]
                + b[l] * sig[l - 1];
        }
        alpha[k] = a[k] + sig_next[k + 1] / sig_next[k] - sig[k] / sig[k - 1];
        beta[k] = sig_next[k] / sig[k - 1];
        sig_prev = sig;
        sig = sig_next;
    }

    // Golub-Welsch: eigen-decomposition of the symmetric tridiagonal Jacobi
    // matrix (diagonal alpha, off-diagonal sqrt(beta_k)).
    let mut diag = alpha;
    let mut off = vec![0.0f64; n];
    for k in 1..n {
        off[k - 1] = beta[k].sqrt();
    }
    let mut first_components = vec![0.0f64; n * n];
    for i in 0..n {
        first_components[i * n + i] = 1.0;
    }
    tql2(&mut diag, &mut off, &mut first_components, n);

    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let q0 = first_components[j]; // first row of eigenvector j
            (diag[j], beta[0] * q0 * q0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    QuadRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Symmetric tridiagonal QL with implicit shifts (EISPACK `tql2`).
///
/// `d` holds the diagonal, `e` the off-diagonal in `e[0..n-1]`; `z` is an
/// `n x n` row-major matrix whose columns accumulate the eigenvectors (pass
/// the identity to obtain them).  On return `d` holds eigenvalues.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) {
    if n == 1 {
        return;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Look for a small off-diagonal element.
            let mut m = l;
            while m < n - 1 {
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
            assert!(iter <= 50, "tql2 failed to converge");
            // Form the implicit shift.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if r == 0.0 {
                // A rotation degenerated; re-examine the block.
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}
