//! Galerkin assembly of the boundary integral operators.
//!
//! Matrix entries are double integrals of the fundamental solution against
//! basis factors.  Each element pair gets one of three quadrature plans:
//!
//! * **identical** — the kernel is split into `log_coeff(r) ln r + smooth(r)`
//!   and the parameter-space logarithm is peeled off: the regular part uses a
//!   tensor Gauss rule with different orders per axis (their nodes interlace,
//!   so the diagonal is never sampled), while the `ln|s-t|` part is folded
//!   onto the diagonal and integrated with a dedicated log-weight rule;
//! * **graded** — touching or nearly touching pairs use a tensor Gauss rule
//!   on a 4-cell geometric subdivision of each element, graded toward the
//!   point where the elements meet;
//! * **tensor** — well separated pairs use a plain tensor Gauss rule, with a
//!   reduced order once the distance exceeds four element sizes.
//!
//! The single layer on piecewise constants and the hypersingular form on
//! nodal linears are assembled in one sweep over element pairs; the
//! hypersingular form is reduced to single-layer integrals by integration by
//! parts (arclength derivatives of the nodal basis plus a wave-number term
//! with normal-vector factors), so no kernel derivatives are ever needed.

use num_complex::Complex64;

use crate::error::Error;
use crate::geometry::Point2;
use crate::linalg::{CMat, RMat};
use crate::mesh::Mesh;
use crate::quadrature::{gauss_legendre, gauss_log};
use crate::space::S1Layout;
use crate::special::Kernel;

/// Quadrature orders used by assembly and evaluation.
#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    /// Tensor order for regular pairs and for smooth one-dimensional work.
    pub regular: usize,
    /// Per-cell order for the graded plans of touching and near pairs.
    pub near: usize,
    /// Order of the log-weight rule on the element diagonal.
    pub log: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            regular: 8,
            near: 12,
            log: 10,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("quadrature order {what}")));
        if self.regular < 2 || self.regular + 1 > 64 {
            return bad("`regular` must be in 2..=63");
        }
        if self.near < 2 || self.near > 64 {
            return bad("`near` must be in 2..=64");
        }
        if self.log < 1 || self.log > 32 {
            return bad("`log` must be in 1..=32");
        }
        Ok(())
    }
}

/// Geometric grading ratio of the near-pair subdivision.
const GRADE_RATIO: f64 = 0.1;
/// Number of graded cells per element.  The smallest cell then has size
/// `GRADE_RATIO^(GRADE_CELLS-1) = 1e-5` of the element, which caps the
/// unresolved corner mass of a log singularity near `1e-11` relative.
const GRADE_CELLS: usize = 6;
/// Distance-to-size ratio beyond which the reduced tensor order is enough.
const FAR_RATIO: f64 = 4.0;
/// Tensor order for very distant pairs.
const FAR_ORDER: usize = 6;

/// A quadrature point on an element with cached geometry data.
#[derive(Clone, Copy)]
struct QP {
    /// Local coordinate in `[0, 1]` along the element.
    sigma: f64,
    /// Weight, including all interval scalings.
    w: f64,
    pos: Point2,
    /// `|d pos / d sigma|`, the parameter-to-arclength factor.
    jac: f64,
    normal: Point2,
}

/// Basis factor attached to one element pair integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairFactor {
    /// Constant one: plain single-layer entry for piecewise constants.
    One,
    /// `hat_a(s) hat_b(t) (n(s) . n(t))`: the wave-number term of the
    /// hypersingular form.  `*_right` selects the hat that rises toward the
    /// right end of the element.
    HatNormal { a_right: bool, b_right: bool },
}

impl PairFactor {
    #[inline]
    fn eval(self, qa: &QP, qb: &QP) -> f64 {
        match self {
            PairFactor::One => 1.0,
            PairFactor::HatNormal { a_right, b_right } => {
                let ha = if a_right { qa.sigma } else { 1.0 - qa.sigma };
                let hb = if b_right { qb.sigma } else { 1.0 - qb.sigma };
                ha * hb * qa.normal.dot(qb.normal)
            }
        }
    }
}

enum Plan {
    Graded {
        a_toward_one: bool,
        b_toward_one: bool,
    },
    Tensor {
        order: usize,
    },
}

/// Pairwise integrator over the elements of one mesh.
pub struct Assembler<'a> {
    mesh: &'a Mesh,
    kernel: Kernel,
    quad: QuadConfig,
    centers: Vec<Point2>,
    ends: Vec<(Point2, Point2)>,
    samples: Vec<[Point2; 5]>,
}

impl<'a> Assembler<'a> {
    pub fn new(mesh: &'a Mesh, k: f64, quad: QuadConfig) -> Result<Assembler<'a>, Error> {
        quad.validate()?;
        if k < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "wave number must be nonnegative, got {k}"
            )));
        }
        let curve = mesh.curve();
        let pos = |e: usize, sigma: f64| {
            let el = mesh.element(e);
            curve
                .segment(el.seg)
                .position(el.t0 + sigma * (el.t1 - el.t0))
        };
        let centers = (0..mesh.len()).map(|e| pos(e, 0.5)).collect();
        let ends = (0..mesh.len()).map(|e| (pos(e, 0.0), pos(e, 1.0))).collect();
        let samples = (0..mesh.len())
            .map(|e| [pos(e, 0.0), pos(e, 0.25), pos(e, 0.5), pos(e, 0.75), pos(e, 1.0)])
            .collect();
        Ok(Assembler {
            mesh,
            kernel: Kernel::new(k),
            quad,
            centers,
            ends,
            samples,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    fn qp(&self, e: usize, sigma: f64, w: f64) -> QP {
        let el = self.mesh.element(e);
        let dt = el.t1 - el.t0;
        let t = el.t0 + sigma * dt;
        let seg = self.mesh.curve().segment(el.seg);
        QP {
            sigma,
            w,
            pos: seg.position(t),
            jac: dt * seg.speed(t),
            normal: self.mesh.curve().normal(el.seg, t),
        }
    }

    fn full_points(&self, e: usize, order: usize) -> Vec<QP> {
        let rule = gauss_legendre(order);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| self.qp(e, x, w))
            .collect()
    }

    /// Quadrature points on a 4-cell geometric subdivision graded toward one
    /// end of the element.
    fn graded_points(&self, e: usize, toward_one: bool) -> Vec<QP> {
        let q = GRADE_RATIO;
        // cell widths shrink geometrically toward the graded end:
        // boundaries 0, 1-q, 1-q^2, ..., 1
        let mut cuts = [0.0; GRADE_CELLS + 1];
        for (j, c) in cuts.iter_mut().enumerate().take(GRADE_CELLS) {
            *c = 1.0 - q.powi(j as i32);
        }
        cuts[GRADE_CELLS] = 1.0;
        let rule = gauss_legendre(self.quad.near);
        let mut out = Vec::with_capacity(GRADE_CELLS * self.quad.near);
        for c in 0..GRADE_CELLS {
            let (a, b) = (cuts[c], cuts[c + 1]);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = a + x * (b - a);
                let sigma = if toward_one { s } else { 1.0 - s };
                out.push(self.qp(e, sigma, w * (b - a)));
            }
        }
        out
    }

    /// Minimum distance between two elements, as a cheap but safe estimate.
    fn distance(&self, a: usize, b: usize) -> f64 {
        let lower = self.centers[a].dist(self.centers[b])
            - 0.5 * (self.mesh.h(a) + self.mesh.h(b));
        let size = self.mesh.h(a).max(self.mesh.h(b));
        if lower >= size {
            return lower.max(0.0);
        }
        let mut d = f64::INFINITY;
        for pa in &self.samples[a] {
            for pb in &self.samples[b] {
                d = d.min(pa.dist(*pb));
            }
        }
        d
    }

    fn classify(&self, a: usize, b: usize) -> Plan {
        debug_assert!(a < b);
        let n = self.mesh.len();
        let closed = self.mesh.curve().is_closed();
        if b == a + 1 {
            return Plan::Graded {
                a_toward_one: true,
                b_toward_one: false,
            };
        }
        if closed && a == 0 && b == n - 1 {
            return Plan::Graded {
                a_toward_one: false,
                b_toward_one: true,
            };
        }
        let size = self.mesh.h(a).max(self.mesh.h(b));
        let d = self.distance(a, b);
        if d <= size {
            // grade each element toward the end closest to the other one
            let closest_end = |e: usize, other: usize| {
                let (p0, p1) = self.ends[e];
                let d0 = self.samples[other]
                    .iter()
                    .map(|p| p.dist(p0))
                    .fold(f64::INFINITY, f64::min);
                let d1 = self.samples[other]
                    .iter()
                    .map(|p| p.dist(p1))
                    .fold(f64::INFINITY, f64::min);
                d1 < d0
            };
            Plan::Graded {
                a_toward_one: closest_end(a, b),
                b_toward_one: closest_end(b, a),
            }
        } else {
            Plan::Tensor {
                order: if d / size >= FAR_RATIO {
                    FAR_ORDER
                } else {
                    self.quad.regular
                },
            }
        }
    }

    /// All requested factor integrals for the ordered element pair `(a, b)`.
    /// The kernel is symmetric, so `(b, a)` values are the same with the
    /// factor roles swapped.
    pub fn pair_integrals(&self, a: usize, b: usize, factors: &[PairFactor]) -> Vec<Complex64> {
        if a == b {
            return self.identical_integrals(a, factors);
        }
        let (lo, hi, swapped) = if a < b { (a, b, false) } else { (b, a, true) };
        let plan = self.classify(lo, hi);
        let (pa, pb) = match plan {
            Plan::Graded {
                a_toward_one,
                b_toward_one,
            } => (
                self.graded_points(lo, a_toward_one),
                self.graded_points(hi, b_toward_one),
            ),
            Plan::Tensor { order } => (self.full_points(lo, order), self.full_points(hi, order)),
        };
        if swapped {
            self.cross_sum(&pb, &pa, factors)
        } else {
            self.cross_sum(&pa, &pb, factors)
        }
    }

    fn cross_sum(&self, pa: &[QP], pb: &[QP], factors: &[PairFactor]) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); factors.len()];
        for qa in pa {
            for qb in pb {
                let r = qa.pos.dist(qb.pos);
                let kv = self.kernel.value(r) * (qa.w * qb.w * qa.jac * qb.jac);
                for (s, f) in acc.iter_mut().zip(factors) {
                    *s += kv * f.eval(qa, qb);
                }
            }
        }
        acc
    }

    fn identical_integrals(&self, e: usize, factors: &[PairFactor]) -> Vec<Complex64> {
        let n = self.quad.regular;
        // Regular part: kernel minus its parameter-space log.  The two axes
        // use orders n and n+1 whose nodes interlace, so sigma != tau at
        // every sample and the integrand stays finite.
        let pa = self.full_points(e, n);
        let pb = self.full_points(e, n + 1);
        let mut acc = vec![Complex64::new(0.0, 0.0); factors.len()];
        for qa in &pa {
            for qb in &pb {
                let r = qa.pos.dist(qb.pos);
                let ds = (qa.sigma - qb.sigma).abs();
                let smoothed = self.kernel.log_coeff(r) * (r / ds).ln() + self.kernel.smooth(r);
                let kv = smoothed * (qa.w * qb.w * qa.jac * qb.jac);
                for (s, f) in acc.iter_mut().zip(factors) {
                    *s += kv * f.eval(qa, qb);
                }
            }
        }
        // Diagonal log part: integrate g(sigma, tau) ln|sigma - tau| by
        // folding onto the diagonal offset u = |sigma - tau| and using the
        // log-weight rule in u.
        let log_rule = gauss_log(self.quad.log);
        let inner = gauss_legendre(self.quad.regular);
        let mut acc3 = vec![0.0f64; factors.len()];
        for (&u, &wu) in log_rule.nodes.iter().zip(&log_rule.weights) {
            let span = 1.0 - u;
            for (&x, &wx) in inner.nodes.iter().zip(&inner.weights) {
                let tau = x * span;
                let w = wu * wx * span;
                for (s1, s2) in [(tau + u, tau), (tau, tau + u)] {
                    let qa = self.qp(e, s1, 1.0);
                    let qb = self.qp(e, s2, 1.0);
                    let r = qa.pos.dist(qb.pos);
                    let g = self.kernel.log_coeff(r) * qa.jac * qb.jac;
                    for (s, f) in acc3.iter_mut().zip(factors) {
                        *s += w * g * f.eval(&qa, &qb);
                    }
                }
            }
        }
        // the rule integrates against (-ln u), while the integrand carries ln u
        for (s, extra) in acc.iter_mut().zip(&acc3) {
            *s -= extra;
        }
        acc
    }
}

fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            pairs.push((a, b));
        }
    }
    pairs
}

fn pairwise_values(
    asm: &Assembler,
    factors: &[PairFactor],
) -> Vec<((usize, usize), Vec<Complex64>)> {
    let pairs = pair_list(asm.mesh.len());
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        pairs
            .into_par_iter()
            .map(|(a, b)| ((a, b), asm.pair_integrals(a, b, factors)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        pairs
            .into_iter()
            .map(|(a, b)| ((a, b), asm.pair_integrals(a, b, factors)))
            .collect()
    }
}

/// Galerkin matrix of the single-layer operator on piecewise constants.
pub fn assemble_single_layer(mesh: &Mesh, k: f64, quad: QuadConfig) -> Result<CMat, Error> {
    let asm = Assembler::new(mesh, k, quad)?;
    let n = mesh.len();
    let mut a_mat = CMat::zeros(n);
    for ((a, b), vals) in pairwise_values(&asm, &[PairFactor::One]) {
        a_mat.set(a, b, vals[0]);
        a_mat.set(b, a, vals[0]);
    }
    Ok(a_mat)
}

/// Single-layer matrix at wave number zero, as the real symmetric matrix
/// that defines the energy inner product of the weakly singular problem.
pub fn single_layer_energy_gram(mesh: &Mesh, quad: QuadConfig) -> Result<RMat, Error> {
    let v0 = assemble_single_layer(mesh, 0.0, quad)?;
    let n = v0.n();
    Ok(RMat::from_fn(n, |i, j| v0.at(i, j).re))
}

/// Byproducts of one assembly sweep for the hypersingular equation.
pub struct HypersingularMatrices {
    /// Single-layer matrix on piecewise constants (reused by evaluation).
    pub v_p0: CMat,
    /// Hypersingular Galerkin matrix on the nodal space, without any
    /// rank-one stabilization.
    pub w: CMat,
}

/// Assemble the hypersingular form on the nodal linear space through its
/// single-layer representation: derivative terms ride on the piecewise
/// constant single-layer matrix, and for positive wave numbers the extra
/// normal-vector term is integrated pairwise alongside it.
pub fn assemble_hypersingular(
    mesh: &Mesh,
    k: f64,
    quad: QuadConfig,
) -> Result<HypersingularMatrices, Error> {
    let asm = Assembler::new(mesh, k, quad)?;
    let layout = S1Layout::new(mesh);
    let n = mesh.len();
    let m = layout.num_dofs();
    let with_wave = k > 0.0;
    let mut factors = vec![PairFactor::One];
    if with_wave {
        for &a_right in &[false, true] {
            for &b_right in &[false, true] {
                factors.push(PairFactor::HatNormal { a_right, b_right });
            }
        }
    }
    let values = pairwise_values(&asm, &factors);

    let mut v_p0 = CMat::zeros(n);
    let mut w = CMat::zeros(m);
    // arclength derivative of the hat rising toward the right end is +1/h,
    // of the falling one -1/h
    let deriv = |e: usize, right: bool| {
        if right {
            1.0 / mesh.h(e)
        } else {
            -1.0 / mesh.h(e)
        }
    };
    let k2 = k * k;
    for ((a, b), vals) in values {
        v_p0.set(a, b, vals[0]);
        v_p0.set(b, a, vals[0]);
        let (la, ra) = layout.elem_nodes(a);
        let (lb, rb) = layout.elem_nodes(b);
        let nodes_a = [(la, false), (ra, true)];
        let nodes_b = [(lb, false), (rb, true)];
        for (ia, &(na, ra_side)) in nodes_a.iter().enumerate() {
            let da = layout.dof_of_node(na);
            for (ib, &(nb, rb_side)) in nodes_b.iter().enumerate() {
                let db = layout.dof_of_node(nb);
                let (Some(da), Some(db)) = (da, db) else {
                    continue;
                };
                // integration-by-parts term
                let mut contrib = vals[0] * (deriv(a, ra_side) * deriv(b, rb_side));
                if with_wave {
                    // wave term; symmetrize the two numerically distinct
                    // off-diagonal values of the identical plan
                    let v_ab = vals[1 + 2 * ia + ib];
                    let v_ba = vals[1 + 2 * ib + ia];
                    let wave = if a == b {
                        0.5 * (v_ab + v_ba)
                    } else {
                        v_ab
                    };
                    contrib -= wave * k2;
                }
                w.add_to(da, db, contrib);
                if a != b {
                    w.add_to(db, da, contrib);
                }
            }
        }
    }
    Ok(HypersingularMatrices { v_p0, w })
}

/// Add the rank-one stabilization `m m^T` built from the hat masses.
pub fn add_stabilization(w: &mut CMat, masses: &[f64]) {
    let n = w.n();
    assert_eq!(masses.len(), n);
    for i in 0..n {
        for j in 0..n {
            w.add_to(i, j, Complex64::new(masses[i] * masses[j], 0.0));
        }
    }
}

/// Energy Gram matrix of the hypersingular problem: the wave-number-zero
/// hypersingular matrix, stabilized on closed curves where constants would
/// otherwise be in its kernel.
pub fn hypersingular_energy_gram(mesh: &Mesh, quad: QuadConfig) -> Result<RMat, Error> {
    let parts = assemble_hypersingular(mesh, 0.0, quad)?;
    let mut w = parts.w;
    if mesh.curve().is_closed() {
        let masses = S1Layout::new(mesh).mass_vector(mesh);
        add_stabilization(&mut w, &masses);
    }
    let n = w.n();
    Ok(RMat::from_fn(n, |i, j| w.at(i, j).re))
}

/// Load vector for piecewise constants: element integrals of the datum,
/// which is passed the point and the unit normal.
pub fn assemble_rhs_p0(
    mesh: &Mesh,
    quad: QuadConfig,
    f: &dyn Fn(Point2, Point2) -> Complex64,
) -> Vec<Complex64> {
    let rule = gauss_legendre(quad.regular);
    (0..mesh.len())
        .map(|e| {
            let el = mesh.element(e);
            let dt = el.t1 - el.t0;
            let seg = mesh.curve().segment(el.seg);
            let mut s = Complex64::new(0.0, 0.0);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let t = el.t0 + x * dt;
                let jac = dt * seg.speed(t);
                s += f(seg.position(t), mesh.curve().normal(el.seg, t)) * (w * jac);
            }
            s
        })
        .collect()
}

/// Load vector for the nodal linear space: hat-weighted integrals.
pub fn assemble_rhs_s1(
    mesh: &Mesh,
    quad: QuadConfig,
    f: &dyn Fn(Point2, Point2) -> Complex64,
) -> Vec<Complex64> {
    let layout = S1Layout::new(mesh);
    let rule = gauss_legendre(quad.regular);
    let mut b = vec![Complex64::new(0.0, 0.0); layout.num_dofs()];
    for e in 0..mesh.len() {
        let el = mesh.element(e);
        let dt = el.t1 - el.t0;
        let seg = mesh.curve().segment(el.seg);
        let (nl, nr) = layout.elem_nodes(e);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = el.t0 + x * dt;
            let jac = dt * seg.speed(t);
            let fv = f(seg.position(t), mesh.curve().normal(el.seg, t)) * (w * jac);
            if let Some(d) = layout.dof_of_node(nl) {
                b[d] += fv * (1.0 - x);
            }
            if let Some(d) = layout.dof_of_node(nr) {
                b[d] += fv * x;
            }
        }
    }
    b
}
