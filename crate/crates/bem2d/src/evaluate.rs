//! Pointwise evaluation of single-layer potentials on the curve, plus the
//! Chebyshev interpolation used to differentiate residuals elementwise.
//!
//! Evaluation points always lie on the curve, so the source integrals are
//! singular or nearly singular.  Three one-dimensional rules mirror the
//! pairwise assembly plans: the element containing the point splits at the
//! point and peels the logarithm off with a log-weight rule, nearby elements
//! use a geometrically graded subdivision toward the end closest to the
//! point, and distant elements use plain Gauss rules.

use num_complex::Complex64;

use crate::assembly::QuadConfig;
use crate::error::Error;
use crate::geometry::Point2;
use crate::mesh::Mesh;
use crate::quadrature::{gauss_legendre, gauss_log};
use crate::special::Kernel;

/// Grading parameters shared with the pairwise assembly plans.
const GRADE_RATIO: f64 = 0.1;
const GRADE_CELLS: usize = 6;
const FAR_RATIO: f64 = 4.0;
const FAR_ORDER: usize = 6;

/// Density sampled at `(element, local coordinate)`.
pub type DensityFn<'f> = &'f (dyn Fn(usize, f64) -> Complex64 + 'f);

#[derive(Clone, Copy)]
struct EvalQP {
    sigma: f64,
    w: f64,
    pos: Point2,
    jac: f64,
}

/// Evaluates `(V psi)(x)` for curve points `x` given by element and local
/// coordinate.
pub struct LayerEvaluator<'a> {
    mesh: &'a Mesh,
    kernel: Kernel,
    quad: QuadConfig,
    regular_pts: Vec<Vec<EvalQP>>,
    far_pts: Vec<Vec<EvalQP>>,
    samples: Vec<[Point2; 5]>,
}

impl<'a> LayerEvaluator<'a> {
    pub fn new(mesh: &'a Mesh, k: f64, quad: QuadConfig) -> Result<LayerEvaluator<'a>, Error> {
        quad.validate()?;
        if k < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "wave number must be nonnegative, got {k}"
            )));
        }
        let mut ev = LayerEvaluator {
            mesh,
            kernel: Kernel::new(k),
            quad,
            regular_pts: Vec::new(),
            far_pts: Vec::new(),
            samples: Vec::new(),
        };
        for e in 0..mesh.len() {
            ev.regular_pts.push(ev.rule_points(e, quad.regular));
            ev.far_pts.push(ev.rule_points(e, FAR_ORDER));
            ev.samples.push([
                ev.qp(e, 0.0, 0.0).pos,
                ev.qp(e, 0.25, 0.0).pos,
                ev.qp(e, 0.5, 0.0).pos,
                ev.qp(e, 0.75, 0.0).pos,
                ev.qp(e, 1.0, 0.0).pos,
            ]);
        }
        Ok(ev)
    }

    fn qp(&self, e: usize, sigma: f64, w: f64) -> EvalQP {
        let el = self.mesh.element(e);
        let dt = el.t1 - el.t0;
        let t = el.t0 + sigma * dt;
        let seg = self.mesh.curve().segment(el.seg);
        EvalQP {
            sigma,
            w,
            pos: seg.position(t),
            jac: dt * seg.speed(t),
        }
    }

    fn rule_points(&self, e: usize, order: usize) -> Vec<EvalQP> {
        let rule = gauss_legendre(order);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| self.qp(e, x, w))
            .collect()
    }

    pub fn position(&self, e: usize, sigma: f64) -> Point2 {
        self.qp(e, sigma, 0.0).pos
    }

    pub fn normal(&self, e: usize, sigma: f64) -> Point2 {
        let el = self.mesh.element(e);
        let t = el.t0 + sigma * (el.t1 - el.t0);
        self.mesh.curve().normal(el.seg, t)
    }

    /// Single-layer value at local coordinate `at_sigma` of element
    /// `at_elem`, for the density sampled by `dens`.
    pub fn eval(&self, at_elem: usize, at_sigma: f64, dens: DensityFn) -> Complex64 {
        let x = self.position(at_elem, at_sigma);
        let n = self.mesh.len();
        let closed = self.mesh.curve().is_closed();
        let mut total = Complex64::new(0.0, 0.0);
        for b in 0..n {
            if b == at_elem {
                total += self.self_part(b, at_sigma, x, dens);
                continue;
            }
            // index adjacency along the curve, with wraparound when closed
            let touching = b + 1 == at_elem
                || at_elem + 1 == b
                || (closed && n > 2 && (b == 0 && at_elem == n - 1 || at_elem == 0 && b == n - 1));
            let d = self.samples[b]
                .iter()
                .map(|p| p.dist(x))
                .fold(f64::INFINITY, f64::min);
            let h = self.mesh.h(b);
            if touching || d <= h {
                let toward_one = if b + 1 == at_elem || (closed && at_elem == 0 && b == n - 1) {
                    true
                } else if at_elem + 1 == b || (closed && b == 0 && at_elem == n - 1) {
                    false
                } else {
                    // grade toward the end of b closest to x
                    self.samples[b][4].dist(x) < self.samples[b][0].dist(x)
                };
                total += self.graded_part(b, toward_one, x, dens);
            } else {
                let pts = if d / h >= FAR_RATIO {
                    &self.far_pts[b]
                } else {
                    &self.regular_pts[b]
                };
                for q in pts {
                    let r = q.pos.dist(x);
                    total += self.kernel.value(r) * dens(b, q.sigma) * (q.w * q.jac);
                }
            }
        }
        total
    }

    /// Contribution of the element containing the point: split there, then
    /// separate the parameter logarithm on each side.
    fn self_part(&self, e: usize, s: f64, x: Point2, dens: DensityFn) -> Complex64 {
        let rule = gauss_legendre(self.quad.regular);
        let log_rule = gauss_log(self.quad.log);
        let mut total = Complex64::new(0.0, 0.0);
        for (len, dir) in [(s, -1.0), (1.0 - s, 1.0)] {
            if len < 1e-14 {
                continue;
            }
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                let q = self.qp(e, s + dir * u * len, 0.0);
                let r = q.pos.dist(x);
                // kernel with ln u removed; r/u stays bounded away from zero
                let val = self.kernel.log_coeff(r) * (r / u).ln() + self.kernel.smooth(r);
                total += val * dens(e, q.sigma) * (w * q.jac * len);
            }
            for (&u, &w) in log_rule.nodes.iter().zip(&log_rule.weights) {
                let q = self.qp(e, s + dir * u * len, 0.0);
                let r = q.pos.dist(x);
                // the rule integrates against (-ln u); the integrand has +ln u
                total -= self.kernel.log_coeff(r) * dens(e, q.sigma) * (w * q.jac * len);
            }
        }
        total
    }

    fn graded_part(&self, e: usize, toward_one: bool, x: Point2, dens: DensityFn) -> Complex64 {
        let q = GRADE_RATIO;
        let mut cuts = [0.0f64; GRADE_CELLS + 1];
        for (j, c) in cuts.iter_mut().enumerate().take(GRADE_CELLS) {
            *c = 1.0 - q.powi(j as i32);
        }
        cuts[GRADE_CELLS] = 1.0;
        let rule = gauss_legendre(self.quad.near);
        let mut total = Complex64::new(0.0, 0.0);
        for c in 0..GRADE_CELLS {
            let (a, b) = (cuts[c], cuts[c + 1]);
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                let sraw = a + u * (b - a);
                let sigma = if toward_one { sraw } else { 1.0 - sraw };
                let p = self.qp(e, sigma, 0.0);
                let r = p.pos.dist(x);
                total += self.kernel.value(r) * dens(e, sigma) * (w * (b - a) * p.jac);
            }
        }
        total
    }
}

/// Integrate a pointwise curve function over one element against arclength,
/// with cells graded toward both ends.  Single-layer potentials have
/// integrable endpoint kinks of the form `u ln u`; the grading resolves them
/// to roughly the accuracy of the pointwise values themselves.
pub fn integrate_element_graded(
    mesh: &Mesh,
    e: usize,
    order: usize,
    f: &dyn Fn(f64) -> Complex64,
) -> Complex64 {
    let mut cuts: Vec<f64> = Vec::with_capacity(2 * GRADE_CELLS + 1);
    let mut p = 0.5;
    cuts.push(0.0);
    for _ in 1..GRADE_CELLS {
        p *= GRADE_RATIO;
    }
    for _ in 0..GRADE_CELLS {
        cuts.push(p);
        p /= GRADE_RATIO;
    }
    // mirror onto the right half
    for j in (0..GRADE_CELLS).rev() {
        cuts.push(1.0 - cuts[j]);
    }
    let el = mesh.element(e);
    let dt = el.t1 - el.t0;
    let seg = mesh.curve().segment(el.seg);
    let rule = gauss_legendre(order);
    let mut total = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (&x, &wq) in rule.nodes.iter().zip(&rule.weights) {
            let sigma = a + x * (b - a);
            let jac = dt * seg.speed(el.t0 + sigma * dt);
            total += f(sigma) * (wq * (b - a) * jac);
        }
    }
    total
}

/// First-kind Chebyshev points mapped to `(0, 1)`, in ascending order.
pub fn chebyshev_nodes_unit(m: usize) -> Vec<f64> {
    assert!(m >= 1);
    (0..m)
        .map(|j| {
            let jj = (m - 1 - j) as f64;
            0.5 * (1.0 + ((2.0 * jj + 1.0) * std::f64::consts::PI / (2.0 * m as f64)).cos())
        })
        .collect()
}

/// A truncated Chebyshev expansion on an element's unit interval.
#[derive(Clone, Debug)]
pub struct ChebSeries {
    /// `c[0] + sum_k c[k] T_k`; the constant term is stored unscaled.
    coeffs: Vec<Complex64>,
}

impl ChebSeries {
    /// Interpolate values given at `chebyshev_nodes_unit(values.len())`.
    pub fn fit(values: &[Complex64]) -> ChebSeries {
        let m = values.len();
        assert!(m >= 1);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..m {
                // node j of the standard (descending) ordering holds the
                // last-to-first entry of the ascending value slice
                let theta = (2.0 * j as f64 + 1.0) * std::f64::consts::PI / (2.0 * m as f64);
                s += values[m - 1 - j] * (k as f64 * theta).cos();
            }
            *ck = s * (2.0 / m as f64);
        }
        coeffs[0] *= 0.5;
        ChebSeries { coeffs }
    }

    pub fn eval_unit(&self, sigma: f64) -> Complex64 {
        let xi = 2.0 * sigma - 1.0;
        let m = self.coeffs.len();
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for k in (1..m).rev() {
            let b = self.coeffs[k] + b1 * (2.0 * xi) - b2;
            b2 = b1;
            b1 = b;
        }
        self.coeffs[0] + b1 * xi - b2
    }

    /// Derivative with respect to the unit coordinate (includes the factor
    /// from mapping `[-1, 1]` onto `[0, 1]`).
    pub fn derivative_unit(&self) -> ChebSeries {
        let m = self.coeffs.len();
        if m <= 1 {
            return ChebSeries {
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        // work in the convention with a doubled constant term
        let mut a = self.coeffs.clone();
        a[0] *= 2.0;
        let mut d = vec![Complex64::new(0.0, 0.0); m];
        d[m - 1] = Complex64::new(0.0, 0.0);
        if m >= 2 {
            d[m - 2] = a[m - 1] * (2.0 * (m - 1) as f64);
        }
        for k in (0..m.saturating_sub(2)).rev() {
            d[k] = d[k + 2] + a[k + 1] * (2.0 * (k + 1) as f64);
        }
        d[0] *= 0.5;
        // chain rule: d/dsigma = 2 d/dxi
        for c in d.iter_mut() {
            *c *= 2.0;
        }
        ChebSeries { coeffs: d }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCurve;
    use crate::mesh::Mesh;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn chebyshev_nodes_ascending_interior() {
        let n = chebyshev_nodes_unit(8);
        for w in n.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(n[0] > 0.0 && n[7] < 1.0);
    }

    #[test]
    fn chebyshev_interpolates_polynomials_exactly() {
        let m = 8;
        let nodes = chebyshev_nodes_unit(m);
        let f = |s: f64| 3.0 * s * s * s - 2.0 * s + 1.0;
        let fp = |s: f64| 9.0 * s * s - 2.0;
        let vals: Vec<Complex64> = nodes.iter().map(|&s| c(f(s))).collect();
        let series = ChebSeries::fit(&vals);
        let deriv = series.derivative_unit();
        for &s in &[0.0, 0.17, 0.5, 0.83, 1.0] {
            assert_relative_eq!(series.eval_unit(s).re, f(s), max_relative = 1e-13);
            assert_relative_eq!(deriv.eval_unit(s).re, fp(s), max_relative = 1e-12);
        }
    }

    #[test]
    fn chebyshev_differentiates_smooth_function() {
        let m = 12;
        let nodes = chebyshev_nodes_unit(m);
        let vals: Vec<Complex64> = nodes.iter().map(|&s| c((3.0 * s).sin())).collect();
        let deriv = ChebSeries::fit(&vals).derivative_unit();
        for &s in &[0.1, 0.35, 0.6, 0.9] {
            assert_relative_eq!(
                deriv.eval_unit(s).re,
                3.0 * (3.0 * s).cos(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn constant_density_on_circle_gives_known_value() {
        // the single layer of the density one on a circle of radius rho is
        // the constant -rho ln rho at wave number zero
        let mut mesh = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap()));
        for _ in 0..2 {
            mesh = mesh.uniform_refine();
        }
        let ev = LayerEvaluator::new(&mesh, 0.0, QuadConfig::default()).unwrap();
        let ones = |_: usize, _: f64| c(1.0);
        for &(e, s) in &[(0usize, 0.5f64), (3, 0.25), (9, 0.77), (15, 0.031)] {
            let got = ev.eval(e, s, &ones);
            assert_relative_eq!(got.re, 0.34657359027997265, max_relative = 1e-9);
            assert!(got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_density_on_circle_wave_number_one() {
        let mut mesh = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap()));
        for _ in 0..2 {
            mesh = mesh.uniform_refine();
        }
        let ev = LayerEvaluator::new(&mesh, 1.0, QuadConfig::default()).unwrap();
        let ones = |_: usize, _: f64| c(1.0);
        let got = ev.eval(5, 0.4, &ones);
        assert_relative_eq!(got.re, 0.36013410056892506, max_relative = 1e-9);
        assert_relative_eq!(got.im, 0.38057021669483549, max_relative = 1e-9);
    }

    #[test]
    fn constant_density_on_slit_reference() {
        // frozen value of the single layer of the density one on the default
        // slit, evaluated at x = (0.1, 0)
        let mut mesh = Mesh::initial(Arc::new(BoundaryCurve::slit().unwrap()));
        for _ in 0..3 {
            mesh = mesh.uniform_refine();
        }
        // x = 0.1 lies at global parameter t = 0.7, element 5 of 8, sigma 0.6
        let e = mesh.find_element(0, 0.7).unwrap();
        let el = mesh.element(e);
        let sigma = (0.7 - el.t0) / (el.t1 - el.t0);
        let ev = LayerEvaluator::new(&mesh, 0.0, QuadConfig::default()).unwrap();
        let got = ev.eval(e, sigma, &|_, _| c(1.0));
        assert_relative_eq!(got.re, 0.18334740819931903, max_relative = 1e-10);
        assert!(got.im.abs() < 1e-15);
    }

    #[test]
    fn evaluation_consistent_with_row_of_galerkin_matrix() {
        // integrating the evaluator over an element must reproduce the
        // assembled matrix row applied to the density
        use crate::assembly::assemble_single_layer;
        let mesh = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap())).uniform_refine();
        let k = 1.0;
        let quad = QuadConfig::default();
        let a = assemble_single_layer(&mesh, k, quad).unwrap();
        let phi: Vec<Complex64> = (0..mesh.len())
            .map(|i| Complex64::new(1.0 + 0.3 * i as f64, -0.2 * i as f64))
            .collect();
        let ev = LayerEvaluator::new(&mesh, k, quad).unwrap();
        let dens = |e: usize, _: f64| phi[e];
        for i in [0usize, 3] {
            // the potential has endpoint kinks, so the outer rule is graded
            let integral =
                integrate_element_graded(&mesh, i, 12, &|sigma| ev.eval(i, sigma, &dens));
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..mesh.len() {
                row += a.at(i, j) * phi[j];
            }
            assert_relative_eq!(integral.re, row.re, max_relative = 1e-9);
            assert_relative_eq!(integral.im, row.im, max_relative = 1e-9);
        }
    }
}
