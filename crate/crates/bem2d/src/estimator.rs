//! Residual-driven error indicators.
//!
//! Both equations use weighted integrals of a pointwise residual over each
//! element `T`:
//!
//! * weakly singular: `eta(T)^2 = h(T) * int_T |d/ds (V phi - f)|^2 ds`,
//! * hypersingular:  `eta(T)^2 = h(T) * int_T |f - W u|^2 ds`,
//!
//! where the hypersingular residual is evaluated through the single layer:
//! `(W u)(x) = -d/ds (V u')(x) - k^2 n(x) . (V [u n])(x)`.  Pointwise
//! arclength derivatives come from an elementwise Chebyshev interpolant of
//! the single-layer values, so no kernel derivatives or principal values are
//! ever needed.  The interpolation points and the indicator quadrature nodes
//! are all interior to the element, away from the nodal kinks of the
//! residual.

use num_complex::Complex64;

use crate::assembly::QuadConfig;
use crate::error::Error;
use crate::evaluate::{chebyshev_nodes_unit, ChebSeries, LayerEvaluator};
use crate::mesh::Mesh;
use crate::problem::DataFn;
use crate::quadrature::gauss_legendre;
use crate::space::S1Layout;

/// Gauss nodes per element for the indicator integral; the residual is
/// interpolated at two more Chebyshev points than this.
pub const EST_POINTS: usize = 6;

/// Squared indicators for the weakly singular equation, one per element.
pub fn weakly_singular_indicators(
    mesh: &Mesh,
    k: f64,
    quad: QuadConfig,
    phi: &[Complex64],
    data: &DataFn,
) -> Result<Vec<f64>, Error> {
    assert_eq!(phi.len(), mesh.len());
    let ev = LayerEvaluator::new(mesh, k, quad)?;
    let dens = |e: usize, _: f64| phi[e];
    let cheb = chebyshev_nodes_unit(EST_POINTS + 2);
    let gl = gauss_legendre(EST_POINTS);
    let mut out = Vec::with_capacity(mesh.len());
    for e in 0..mesh.len() {
        let vals: Vec<Complex64> = cheb
            .iter()
            .map(|&s| {
                let x = ev.position(e, s);
                let n = ev.normal(e, s);
                ev.eval(e, s, &dens) - data(x, n)
            })
            .collect();
        let deriv = ChebSeries::fit(&vals).derivative_unit();
        let el = mesh.element(e);
        let dt = el.t1 - el.t0;
        let seg = mesh.curve().segment(el.seg);
        let mut sum = 0.0;
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let jac = dt * seg.speed(el.t0 + x * dt);
            // |d/ds r|^2 ds = |d/dsigma r|^2 / jac dsigma
            sum += w * deriv.eval_unit(x).norm_sqr() / jac;
        }
        out.push(mesh.h(e) * sum);
    }
    Ok(out)
}

/// Squared indicators for the hypersingular equation, one per element.
pub fn hypersingular_indicators(
    mesh: &Mesh,
    k: f64,
    quad: QuadConfig,
    u: &[Complex64],
    data: &DataFn,
) -> Result<Vec<f64>, Error> {
    let layout = S1Layout::new(mesh);
    assert_eq!(u.len(), layout.num_dofs());
    let ev = LayerEvaluator::new(mesh, k, quad)?;
    let uprime = layout.derivative_p0(mesh, u);
    let dens_prime = |e: usize, _: f64| uprime[e];
    let cheb = chebyshev_nodes_unit(EST_POINTS + 2);
    let gl = gauss_legendre(EST_POINTS);
    let k2 = k * k;
    let mut out = Vec::with_capacity(mesh.len());
    for e in 0..mesh.len() {
        // single layer of the density derivative, interpolated elementwise
        let vals: Vec<Complex64> = cheb.iter().map(|&s| ev.eval(e, s, &dens_prime)).collect();
        let deriv = ChebSeries::fit(&vals).derivative_unit();
        let el = mesh.element(e);
        let dt = el.t1 - el.t0;
        let seg = mesh.curve().segment(el.seg);
        let mut sum = 0.0;
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let jac = dt * seg.speed(el.t0 + x * dt);
            let pos = ev.position(e, x);
            let nrm = ev.normal(e, x);
            let mut wu = -deriv.eval_unit(x) / jac;
            if k > 0.0 {
                let vx = ev.eval(e, x, &|b, tau| {
                    layout.value_on_elem(u, b, tau) * ev.normal(b, tau).x
                });
                let vy = ev.eval(e, x, &|b, tau| {
                    layout.value_on_elem(u, b, tau) * ev.normal(b, tau).y
                });
                wu -= (vx * nrm.x + vy * nrm.y) * k2;
            }
            let rho = data(pos, nrm) - wu;
            sum += w * rho.norm_sqr() * jac;
        }
        out.push(mesh.h(e) * sum);
    }
    Ok(out)
}

/// Total estimate from squared indicators.
pub fn total_estimate(indicators_sq: &[f64]) -> f64 {
    indicators_sq.iter().sum::<f64>().sqrt()
}

/// Diagnostic ratio `|| h^{1/2} d/ds V psi || / || psi ||_V` used to watch
/// the inverse-type estimate that the analysis needs.  The numerator reuses
/// the weakly singular indicator machinery with zero data.
pub fn inverse_estimate_ratio(
    mesh: &Mesh,
    k: f64,
    quad: QuadConfig,
    psi: &[Complex64],
) -> Result<f64, Error> {
    use crate::assembly::single_layer_energy_gram;
    use crate::linalg::energy_norm;
    use crate::problem::DataFn;
    use std::sync::Arc;

    let zero: DataFn = Arc::new(|_, _| Complex64::new(0.0, 0.0));
    let ind = weakly_singular_indicators(mesh, k, quad, psi, &zero)?;
    let num = total_estimate(&ind);
    let gram = single_layer_energy_gram(mesh, quad)?;
    let den = energy_norm(&gram, psi);
    if den == 0.0 {
        return Err(Error::Numerical("zero density in inverse estimate".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_rhs_p0, assemble_single_layer};
    use crate::geometry::BoundaryCurve;
    use crate::linalg::lu_solve;
    use crate::problem::Problem;
    use std::sync::Arc;

    fn solve_weakly_singular(mesh: &Mesh, p: &Problem) -> Vec<Complex64> {
        let quad = QuadConfig::default();
        let a = assemble_single_layer(mesh, p.k, quad).unwrap();
        let pdata = p.data.clone();
        let b = assemble_rhs_p0(mesh, quad, &move |x, n| pdata(x, n));
        let rep = lu_solve(&a, &b);
        assert!(rep.solvable);
        rep.x
    }

    #[test]
    fn constant_data_on_circle_gives_tiny_estimate() {
        // with constant data on a circle the exact density is constant and
        // lies in the discrete space, so the residual is quadrature noise
        let mut mesh = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap()));
        for _ in 0..2 {
            mesh = mesh.uniform_refine();
        }
        let p = Problem::sound_soft_plane_wave(0.0, (1.0, 0.0)).unwrap();
        let phi = solve_weakly_singular(&mesh, &p);
        let ind = weakly_singular_indicators(&mesh, p.k, QuadConfig::default(), &phi, &p.data)
            .unwrap();
        assert_eq!(ind.len(), mesh.len());
        assert!(ind.iter().all(|&v| v >= 0.0));
        let eta = total_estimate(&ind);
        assert!(eta < 1e-6, "estimate {eta} not small");
    }

    #[test]
    fn estimate_decreases_under_uniform_refinement() {
        let p = Problem::sound_soft_plane_wave(1.0, (-1.0, 1.0)).unwrap();
        let mut mesh = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap()));
        for _ in 0..2 {
            mesh = mesh.uniform_refine();
        }
        let mut last = f64::INFINITY;
        for _ in 0..3 {
            let phi = solve_weakly_singular(&mesh, &p);
            let ind =
                weakly_singular_indicators(&mesh, p.k, QuadConfig::default(), &phi, &p.data)
                    .unwrap();
            let eta = total_estimate(&ind);
            assert!(eta < 0.7 * last, "eta {eta} vs previous {last}");
            last = eta;
            mesh = mesh.uniform_refine();
        }
    }

    #[test]
    fn hypersingular_estimate_on_slit_decreases() {
        use crate::assembly::{assemble_hypersingular, assemble_rhs_s1};
        let p = Problem::custom(
            crate::problem::EquationKind::Hypersingular,
            0.0,
            Arc::new(|_, _| Complex64::new(1.0, 0.0)),
        )
        .unwrap();
        let mut mesh = Mesh::initial(Arc::new(BoundaryCurve::slit().unwrap()));
        for _ in 0..2 {
            mesh = mesh.uniform_refine();
        }
        let quad = QuadConfig::default();
        let mut last = f64::INFINITY;
        for _ in 0..3 {
            let parts = assemble_hypersingular(&mesh, p.k, quad).unwrap();
            let pdata = p.data.clone();
            let b = assemble_rhs_s1(&mesh, quad, &move |x, n| pdata(x, n));
            let rep = lu_solve(&parts.w, &b);
            assert!(rep.solvable);
            let ind = hypersingular_indicators(&mesh, p.k, quad, &rep.x, &p.data).unwrap();
            let eta = total_estimate(&ind);
            assert!(eta.is_finite() && eta > 0.0);
            assert!(eta < last);
            last = eta;
            mesh = mesh.uniform_refine();
        }
    }

    #[test]
    fn inverse_ratio_finite_and_positive() {
        let mut mesh = Mesh::initial(Arc::new(BoundaryCurve::circle(1.0).unwrap()));
        mesh = mesh.uniform_refine();
        let psi: Vec<Complex64> = (0..mesh.len())
            .map(|i| Complex64::new(1.0 + (i as f64 * 1.7).sin(), (i as f64 * 0.9).cos()))
            .collect();
        let r = inverse_estimate_ratio(&mesh, 0.0, QuadConfig::default(), &psi).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }
}
