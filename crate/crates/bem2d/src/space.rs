//! Discrete trial spaces on a mesh.
//!
//! Two spaces are used: piecewise constants (one degree of freedom per
//! element) for the weakly singular equation, and continuous piecewise
//! linears on the mesh nodes for the hypersingular equation.  On open curves
//! the linear space is pinned to zero at the two curve endpoints, so only
//! interior nodes carry degrees of freedom.
//!
//! Both segment kinds (lines and circular arcs) have constant parameter
//! speed, so "linear in the element parameter" coincides with "linear in
//! arclength" and the arclength derivative of a nodal function is piecewise
//! constant with value `(right - left) / h` per element.

use num_complex::Complex64;

use crate::mesh::Mesh;
use crate::quadrature::gauss_legendre;

/// Number of piecewise-constant degrees of freedom.
pub fn p0_dim(mesh: &Mesh) -> usize {
    mesh.len()
}

/// Nodal layout of the continuous piecewise-linear space on a mesh.
///
/// Node `j` (for `j < #elements`) is the left endpoint of element `j`; on an
/// open curve there is an extra node at the right end of the last element.
#[derive(Clone, Copy, Debug)]
pub struct S1Layout {
    n_elems: usize,
    closed: bool,
}

impl S1Layout {
    pub fn new(mesh: &Mesh) -> S1Layout {
        S1Layout {
            n_elems: mesh.len(),
            closed: mesh.curve().is_closed(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        if self.closed {
            self.n_elems
        } else {
            self.n_elems + 1
        }
    }

    /// Degrees of freedom: all nodes on a closed curve, interior nodes on an
    /// open one.
    pub fn num_dofs(&self) -> usize {
        if self.closed {
            self.n_elems
        } else {
            self.n_elems.saturating_sub(1)
        }
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        if self.closed {
            Some(node)
        } else if node == 0 || node == self.n_elems {
            None
        } else {
            Some(node - 1)
        }
    }

    pub fn node_of_dof(&self, dof: usize) -> usize {
        if self.closed {
            dof
        } else {
            dof + 1
        }
    }

    /// Nodes at the two ends of element `e`, in curve order.
    pub fn elem_nodes(&self, e: usize) -> (usize, usize) {
        let right = if self.closed {
            (e + 1) % self.n_elems
        } else {
            e + 1
        };
        (e, right)
    }

    /// Parameter location `(seg, t)` of a node.
    pub fn node_param(&self, mesh: &Mesh, node: usize) -> (usize, f64) {
        if node < self.n_elems {
            let e = mesh.element(node);
            (e.seg, e.t0)
        } else {
            let e = mesh.element(self.n_elems - 1);
            (e.seg, e.t1)
        }
    }

    /// Nodal values (including pinned endpoint zeros) from dof coefficients.
    pub fn node_values(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.num_dofs());
        (0..self.num_nodes())
            .map(|n| {
                self.dof_of_node(n)
                    .map(|d| coeffs[d])
                    .unwrap_or(Complex64::new(0.0, 0.0))
            })
            .collect()
    }

    /// Value of the nodal function at local coordinate `sigma` of element `e`.
    pub fn value_on_elem(&self, coeffs: &[Complex64], e: usize, sigma: f64) -> Complex64 {
        let (nl, nr) = self.elem_nodes(e);
        let vl = self
            .dof_of_node(nl)
            .map(|d| coeffs[d])
            .unwrap_or(Complex64::new(0.0, 0.0));
        let vr = self
            .dof_of_node(nr)
            .map(|d| coeffs[d])
            .unwrap_or(Complex64::new(0.0, 0.0));
        vl * (1.0 - sigma) + vr * sigma
    }

    /// Arclength derivative as a piecewise-constant coefficient vector.
    pub fn derivative_p0(&self, mesh: &Mesh, coeffs: &[Complex64]) -> Vec<Complex64> {
        let nv = self.node_values(coeffs);
        (0..self.n_elems)
            .map(|e| {
                let (nl, nr) = self.elem_nodes(e);
                (nv[nr] - nv[nl]) / mesh.h(e)
            })
            .collect()
    }

    /// Integrals of the hat functions, one per degree of freedom.
    pub fn mass_vector(&self, mesh: &Mesh) -> Vec<f64> {
        let rule = gauss_legendre(4);
        let mut m = vec![0.0f64; self.num_dofs()];
        for e in 0..self.n_elems {
            let el = mesh.element(e);
            let dt = el.t1 - el.t0;
            let (nl, nr) = self.elem_nodes(e);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let t = el.t0 + x * dt;
                let jac = dt * mesh.curve().segment(el.seg).speed(t);
                if let Some(d) = self.dof_of_node(nl) {
                    m[d] += w * (1.0 - x) * jac;
                }
                if let Some(d) = self.dof_of_node(nr) {
                    m[d] += w * x * jac;
                }
            }
        }
        m
    }
}

/// Carry a piecewise-constant coefficient vector to a finer mesh.
pub fn prolong_p0(coarse: &Mesh, fine: &Mesh, coeffs: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(coeffs.len(), coarse.len());
    debug_assert!(fine.is_refinement_of(coarse));
    (0..fine.len())
        .map(|i| {
            let e = fine.element(i);
            let parent = coarse
                .find_element(e.seg, e.midpoint_param())
                .expect("fine element without parent");
            coeffs[parent]
        })
        .collect()
}

/// Carry a nodal coefficient vector to a finer mesh by interpolation.
pub fn prolong_s1(coarse: &Mesh, fine: &Mesh, coeffs: &[Complex64]) -> Vec<Complex64> {
    let cl = S1Layout::new(coarse);
    let fl = S1Layout::new(fine);
    assert_eq!(coeffs.len(), cl.num_dofs());
    debug_assert!(fine.is_refinement_of(coarse));
    (0..fl.num_dofs())
        .map(|dof| {
            let node = fl.node_of_dof(dof);
            let (seg, t) = fl.node_param(fine, node);
            let e = coarse
                .find_element(seg, t)
                .expect("fine node outside coarse mesh");
            let el = coarse.element(e);
            let sigma = (t - el.t0) / (el.t1 - el.t0);
            cl.value_on_elem(coeffs, e, sigma)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCurve;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn layout_closed_vs_open() {
        let circ = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap()));
        let l = S1Layout::new(&circ);
        assert_eq!(l.num_nodes(), 4);
        assert_eq!(l.num_dofs(), 4);
        assert_eq!(l.elem_nodes(3), (3, 0));

        let slit = Mesh::initial(Arc::new(BoundaryCurve::slit().unwrap())).uniform_refine();
        let l = S1Layout::new(&slit);
        assert_eq!(l.num_nodes(), 3);
        assert_eq!(l.num_dofs(), 1);
        assert_eq!(l.dof_of_node(0), None);
        assert_eq!(l.dof_of_node(1), Some(0));
        assert_eq!(l.dof_of_node(2), None);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let circ = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap())).uniform_refine();
        let l = S1Layout::new(&circ);
        let ones = vec![c(1.0); l.num_dofs()];
        for d in l.derivative_p0(&circ, &ones) {
            assert_eq!(d, c(0.0));
        }
    }

    #[test]
    fn derivative_matches_slope() {
        // single interior hat on a three-element slit mesh
        let mut m = Mesh::initial(Arc::new(BoundaryCurve::slit().unwrap()));
        m = m.uniform_refine().uniform_refine(); // 4 elements
        let l = S1Layout::new(&m);
        assert_eq!(l.num_dofs(), 3);
        let mut coeffs = vec![c(0.0); 3];
        coeffs[1] = c(1.0); // hat at the middle node
        let d = l.derivative_p0(&m, &coeffs);
        let h = m.h(0);
        assert_relative_eq!(d[1].re, 1.0 / h, max_relative = 1e-13);
        assert_relative_eq!(d[2].re, -1.0 / h, max_relative = 1e-13);
        assert_eq!(d[0], c(0.0));
        assert_eq!(d[3], c(0.0));
    }

    #[test]
    fn mass_vector_sums_to_length_minus_end_hats() {
        // closed curve: hats partition unity, so masses sum to the perimeter
        let circ = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap())).uniform_refine();
        let l = S1Layout::new(&circ);
        let m = l.mass_vector(&circ);
        let total: f64 = m.iter().sum();
        assert_relative_eq!(total, circ.curve().total_arclength(), max_relative = 1e-12);

        // open curve: the two pinned end half-hats are missing
        let slit = {
            let mut s = Mesh::initial(Arc::new(BoundaryCurve::slit().unwrap()));
            for _ in 0..2 {
                s = s.uniform_refine();
            }
            s
        };
        let l = S1Layout::new(&slit);
        let m = l.mass_vector(&slit);
        let total: f64 = m.iter().sum();
        let h = slit.h(0);
        assert_relative_eq!(
            total,
            slit.curve().total_arclength() - h,
            max_relative = 1e-12
        );
    }

    #[test]
    fn p0_prolongation_preserves_values() {
        let coarse = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap())).uniform_refine();
        let fine = coarse.refine(&[1, 4]).unwrap();
        let coeffs: Vec<Complex64> = (0..coarse.len()).map(|i| c(i as f64)).collect();
        let fc = prolong_p0(&coarse, &fine, &coeffs);
        for i in 0..fine.len() {
            let e = fine.element(i);
            let parent = coarse.find_element(e.seg, e.midpoint_param()).unwrap();
            assert_eq!(fc[i], coeffs[parent]);
        }
    }

    #[test]
    fn s1_prolongation_interpolates() {
        let coarse = {
            let mut m = Mesh::initial(Arc::new(BoundaryCurve::slit().unwrap()));
            for _ in 0..2 {
                m = m.uniform_refine();
            }
            m
        };
        let fine = coarse.uniform_refine();
        let cl = S1Layout::new(&coarse);
        let fl = S1Layout::new(&fine);
        let coeffs: Vec<Complex64> = (0..cl.num_dofs()).map(|i| c((i * i) as f64)).collect();
        let fc = prolong_s1(&coarse, &fine, &coeffs);
        // prolonged function agrees with the coarse one at many sample points
        for e in 0..fine.len() {
            for &sigma in &[0.25, 0.5, 0.75] {
                let el = fine.element(e);
                let t = el.t0 + sigma * (el.t1 - el.t0);
                let ce = coarse.find_element(el.seg, t).unwrap();
                let cel = coarse.element(ce);
                let cs = (t - cel.t0) / (cel.t1 - cel.t0);
                let a = fl.value_on_elem(&fc, e, sigma);
                let b = cl.value_on_elem(&coeffs, ce, cs);
                assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
            }
        }
        // endpoints stay pinned
        assert_eq!(fl.num_dofs(), 2 * cl.num_dofs() + 1);
    }

    #[test]
    fn closed_curve_prolongation_wraps() {
        let coarse = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap()));
        let fine = coarse.uniform_refine();
        let cl = S1Layout::new(&coarse);
        let coeffs: Vec<Complex64> = (0..cl.num_dofs()).map(|i| c(1.0 + i as f64)).collect();
        let fc = prolong_s1(&coarse, &fine, &coeffs);
        // new midpoint nodes average their neighbors (uniform bisection)
        let fl = S1Layout::new(&fine);
        for e in 0..coarse.len() {
            let (nl, nr) = cl.elem_nodes(e);
            let mid_node = 2 * e + 1;
            let want = 0.5 * (coeffs[nl] + coeffs[nr]);
            let got = fc[fl.dof_of_node(mid_node).unwrap()];
            assert_relative_eq!(got.re, want.re, max_relative = 1e-13);
        }
    }
}
