//! The adaptive solve–estimate–mark–refine loop and its diagnostics.
//!
//! Each iteration assembles the Galerkin system on the current mesh and
//! judges its conditioning.  If the system is numerically singular the
//! previous estimate and solution are carried, the iteration is flagged, and
//! the mesh is refined uniformly; otherwise the element indicators drive one
//! of three marking strategies (uniform, bulk-chasing, bulk-chasing expanded
//! by the same number of largest elements) and the marked elements are
//! bisected.  The loop stops once the dof count reaches the target.
//!
//! Post-processing helpers fit convergence rates to the recorded history,
//! compute stability/reduction/reliability-style pair diagnostics between
//! consecutive levels, and attach energy-norm errors against solutions on
//! uniformly refined reference meshes.

use std::sync::Arc;

use num_complex::Complex64;

use crate::assembly::{
    add_stabilization, assemble_hypersingular, assemble_rhs_p0, assemble_rhs_s1,
    assemble_single_layer, hypersingular_energy_gram, single_layer_energy_gram, QuadConfig,
};
use crate::error::Error;
use crate::estimator::{hypersingular_indicators, weakly_singular_indicators};
use crate::geometry::BoundaryCurve;
use crate::linalg::{energy_norm, inf_sup_beta, lu_solve, CMat, Cholesky, RMat, SolveReport};
use crate::marking::{doerfler_mark, expand_mark};
use crate::mesh::Mesh;
use crate::problem::{EquationKind, Problem};
use crate::space::{prolong_p0, prolong_s1, S1Layout};

/// How elements are selected for refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marking {
    /// Refine every element.
    Uniform,
    /// Minimal bulk-chasing set for the configured `theta`.
    Doerfler,
    /// Bulk-chasing set plus equally many largest elements.
    DoerflerExpanded,
}

/// Loop controls.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveParams {
    pub marking: Marking,
    pub theta: f64,
    /// Stop once the dof count of a solved level reaches this.
    pub max_dofs: usize,
    /// Hard cap on iterations, as a safety net.
    pub max_levels: usize,
    pub quad: QuadConfig,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        AdaptiveParams {
            marking: Marking::DoerflerExpanded,
            theta: 0.4,
            max_dofs: 2048,
            max_levels: 96,
            quad: QuadConfig::default(),
        }
    }
}

impl AdaptiveParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must be in (0, 1], got {}",
                self.theta
            )));
        }
        if self.max_dofs == 0 {
            return Err(Error::InvalidParameter("max_dofs must be positive".into()));
        }
        if self.max_levels == 0 {
            return Err(Error::InvalidParameter("max_levels must be positive".into()));
        }
        self.quad.validate()
    }
}

/// One row of the convergence history.
#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub ell: usize,
    pub n_dofs: usize,
    pub eta: f64,
    pub eta_sq: f64,
    pub rcond: f64,
    pub beta: f64,
    pub marked: usize,
    /// True when the system was judged numerically singular and the level
    /// carried the previous estimate while refining uniformly.
    pub step_i: bool,
    /// Energy-norm distance to a reference solution, when attached.
    pub energy_error: Option<f64>,
}

/// Mesh, solution and indicators of one level (absent on flagged levels).
#[derive(Clone)]
pub struct LevelData {
    pub mesh: Mesh,
    pub solution: Option<Vec<Complex64>>,
    pub indicators: Option<Vec<f64>>,
}

#[derive(Clone)]
pub struct RunResult {
    pub records: Vec<IterationRecord>,
    pub levels: Vec<LevelData>,
}

impl RunResult {
    /// The leading levels whose dof count stays at or below `max_dofs`;
    /// useful for running the pairwise diagnostics at an affordable size.
    pub fn truncated(&self, max_dofs: usize) -> RunResult {
        let keep = self
            .records
            .iter()
            .take_while(|r| r.n_dofs <= max_dofs)
            .count();
        RunResult {
            records: self.records[..keep].to_vec(),
            levels: self.levels[..keep].to_vec(),
        }
    }
}

/// Degrees of freedom the equation uses on a mesh.
pub fn dof_count(equation: EquationKind, mesh: &Mesh) -> usize {
    match equation {
        EquationKind::WeaklySingular => mesh.len(),
        EquationKind::Hypersingular => S1Layout::new(mesh).num_dofs(),
    }
}

/// Assemble the Galerkin matrix of the problem on a mesh.  For the
/// hypersingular equation on a closed curve at wave number zero this
/// includes the rank-one stabilization that removes the constant kernel.
pub fn assemble_system(problem: &Problem, mesh: &Mesh, quad: QuadConfig) -> Result<CMat, Error> {
    match problem.equation {
        EquationKind::WeaklySingular => assemble_single_layer(mesh, problem.k, quad),
        EquationKind::Hypersingular => {
            let parts = assemble_hypersingular(mesh, problem.k, quad)?;
            let mut w = parts.w;
            if mesh.curve().is_closed() && problem.k == 0.0 {
                let masses = S1Layout::new(mesh).mass_vector(mesh);
                add_stabilization(&mut w, &masses);
            }
            Ok(w)
        }
    }
}

/// Load vector of the problem on a mesh.
pub fn assemble_load(problem: &Problem, mesh: &Mesh, quad: QuadConfig) -> Vec<Complex64> {
    let data = problem.data.clone();
    let f = move |x, n| data(x, n);
    match problem.equation {
        EquationKind::WeaklySingular => assemble_rhs_p0(mesh, quad, &f),
        EquationKind::Hypersingular => assemble_rhs_s1(mesh, quad, &f),
    }
}

/// Energy Gram matrix of the equation's natural norm on a mesh.
pub fn energy_gram(equation: EquationKind, mesh: &Mesh, quad: QuadConfig) -> Result<RMat, Error> {
    match equation {
        EquationKind::WeaklySingular => single_layer_energy_gram(mesh, quad),
        EquationKind::Hypersingular => hypersingular_energy_gram(mesh, quad),
    }
}

/// Squared element indicators of the residual estimator.
pub fn indicators_for(
    problem: &Problem,
    mesh: &Mesh,
    quad: QuadConfig,
    solution: &[Complex64],
) -> Result<Vec<f64>, Error> {
    match problem.equation {
        EquationKind::WeaklySingular => {
            weakly_singular_indicators(mesh, problem.k, quad, solution, &problem.data)
        }
        EquationKind::Hypersingular => {
            hypersingular_indicators(mesh, problem.k, quad, solution, &problem.data)
        }
    }
}

/// Carry a coefficient vector from a coarse mesh to a refinement of it.
pub fn prolong_solution(
    equation: EquationKind,
    coarse: &Mesh,
    fine: &Mesh,
    coeffs: &[Complex64],
) -> Vec<Complex64> {
    match equation {
        EquationKind::WeaklySingular => prolong_p0(coarse, fine, coeffs),
        EquationKind::Hypersingular => prolong_s1(coarse, fine, coeffs),
    }
}

/// Direct solve of the problem on one mesh.
pub fn solve_on_mesh(
    problem: &Problem,
    mesh: &Mesh,
    quad: QuadConfig,
) -> Result<SolveReport, Error> {
    let a = assemble_system(problem, mesh, quad)?;
    let b = assemble_load(problem, mesh, quad);
    Ok(lu_solve(&a, &b))
}

/// Run the adaptive loop from the coarsest mesh of the curve.
pub fn run_adaptive(
    problem: &Problem,
    curve: Arc<BoundaryCurve>,
    params: &AdaptiveParams,
) -> Result<RunResult, Error> {
    params.validate()?;
    let quad = params.quad;
    let mut mesh = Mesh::initial(curve);
    // the nodal space needs at least one interior node on open curves
    while dof_count(problem.equation, &mesh) == 0 {
        mesh = mesh.uniform_refine();
    }
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut levels: Vec<LevelData> = Vec::new();
    let mut eta_prev = 1.0f64;
    for ell in 0..params.max_levels {
        let n = dof_count(problem.equation, &mesh);
        let a = assemble_system(problem, &mesh, quad)?;
        let b = assemble_load(problem, &mesh, quad);
        let report = lu_solve(&a, &b);
        if !report.solvable {
            records.push(IterationRecord {
                ell,
                n_dofs: n,
                eta: eta_prev,
                eta_sq: eta_prev * eta_prev,
                rcond: report.rcond,
                beta: 0.0,
                marked: mesh.len(),
                step_i: true,
                energy_error: None,
            });
            levels.push(LevelData {
                mesh: mesh.clone(),
                solution: None,
                indicators: None,
            });
            if n >= params.max_dofs {
                break;
            }
            mesh = mesh.uniform_refine();
            continue;
        }
        let gram = match (problem.equation, problem.k == 0.0) {
            // at wave number zero the system matrix is the energy Gram matrix
            (_, true) => RMat::from_fn(a.n(), |i, j| a.at(i, j).re),
            (eq, false) => energy_gram(eq, &mesh, quad)?,
        };
        let chol = Cholesky::factor(&gram)?;
        let beta = inf_sup_beta(&a, &chol);
        let indicators = indicators_for(problem, &mesh, quad, &report.x)?;
        let eta_sq: f64 = indicators.iter().sum();
        let eta = eta_sq.sqrt();
        let marked_set = match params.marking {
            Marking::Uniform => (0..mesh.len()).collect::<Vec<_>>(),
            Marking::Doerfler => doerfler_mark(&indicators, params.theta),
            Marking::DoerflerExpanded => {
                let base = doerfler_mark(&indicators, params.theta);
                let h: Vec<f64> = (0..mesh.len()).map(|i| mesh.h(i)).collect();
                expand_mark(&h, &base)
            }
        };
        records.push(IterationRecord {
            ell,
            n_dofs: n,
            eta,
            eta_sq,
            rcond: report.rcond,
            beta,
            marked: marked_set.len(),
            step_i: false,
            energy_error: None,
        });
        levels.push(LevelData {
            mesh: mesh.clone(),
            solution: Some(report.x),
            indicators: Some(indicators),
        });
        eta_prev = eta;
        if n >= params.max_dofs || marked_set.is_empty() {
            break;
        }
        mesh = mesh.refine(&marked_set)?;
    }
    Ok(RunResult { records, levels })
}

/// Least-squares decay rate of the estimate against the dof count:
/// the negated slope of `ln eta` over `ln N`, using solved records only.
pub fn empirical_rate(records: &[IterationRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| !r.step_i && r.eta > 0.0)
        .map(|r| ((r.n_dofs as f64).ln(), r.eta.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let var: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-(cov / var))
}

/// Geometric-decay fit `eta_m <= C q^(m-l) eta_l` over the tail of the
/// solved records.
#[derive(Clone, Copy, Debug)]
pub struct LinearFit {
    pub c_lin: f64,
    pub q_lin: f64,
}

pub fn linear_convergence_fit(records: &[IterationRecord]) -> Option<LinearFit> {
    let etas: Vec<f64> = records
        .iter()
        .filter(|r| !r.step_i && r.eta > 0.0)
        .map(|r| r.eta)
        .collect();
    let count = etas.len();
    if count < 2 {
        return None;
    }
    let tail_len = count.min(6.max(count / 2));
    let tail = &etas[count - tail_len..];
    let mut q: f64 = 0.0;
    for w in tail.windows(2) {
        q = q.max(w[1] / w[0]);
    }
    let mut c: f64 = 0.0;
    for l in 0..tail.len() {
        for m in l..tail.len() {
            c = c.max(tail[m] / (tail[l] * q.powi((m - l) as i32)));
        }
    }
    Some(LinearFit { c_lin: c, q_lin: q })
}

/// Pairwise diagnostics between consecutive solved levels, mirroring the
/// stability, reduction and discrete-reliability properties an estimator
/// needs for optimal adaptivity.
#[derive(Clone, Debug, Default)]
pub struct AxiomDiagnostics {
    /// `|eta_fine(common) - eta_coarse(common)| / ||delta||` per pair.
    pub stability: Vec<f64>,
    /// `(x, y, d)` per pair: squared coarse estimate on refined elements,
    /// squared fine estimate on new elements, squared energy distance.
    pub reduction_triples: Vec<(f64, f64, f64)>,
    /// Fitted reduction constants: `y <= q x + c d` with the pinned rule
    /// `c = max y/d`, `q = max (y - c/2 d)+ / x`.
    pub reduction_q: f64,
    pub reduction_c: f64,
    /// `beta_fine * ||delta|| / eta_coarse(patch of refined)` per pair.
    pub discrete_reliability: Vec<f64>,
}

pub fn axiom_diagnostics(
    run: &RunResult,
    problem: &Problem,
    quad: QuadConfig,
) -> Result<AxiomDiagnostics, Error> {
    let mut out = AxiomDiagnostics::default();
    for pair in run.levels.windows(2).zip(run.records.windows(2)) {
        let ([coarse, fine], [_, rec_fine]) = pair else {
            continue;
        };
        let (Some(sol_c), Some(ind_c), Some(sol_f), Some(ind_f)) = (
            coarse.solution.as_ref(),
            coarse.indicators.as_ref(),
            fine.solution.as_ref(),
            fine.indicators.as_ref(),
        ) else {
            continue;
        };
        let carried = prolong_solution(problem.equation, &coarse.mesh, &fine.mesh, sol_c);
        let diff: Vec<Complex64> = sol_f
            .iter()
            .zip(&carried)
            .map(|(a, b)| a - b)
            .collect();
        let gram_f = energy_gram(problem.equation, &fine.mesh, quad)?;
        let delta = energy_norm(&gram_f, &diff);

        let common_f = fine.mesh.elements_also_in(&coarse.mesh);
        let common_c = coarse.mesh.elements_also_in(&fine.mesh);
        let eta_f_common = common_f.iter().map(|&i| ind_f[i]).sum::<f64>().sqrt();
        let eta_c_common = common_c.iter().map(|&i| ind_c[i]).sum::<f64>().sqrt();
        if delta > 1e-14 {
            out.stability
                .push((eta_f_common - eta_c_common).abs() / delta);
        }

        let refined = coarse.mesh.elements_not_in(&fine.mesh);
        let new_elems = fine.mesh.elements_not_in(&coarse.mesh);
        let x: f64 = refined.iter().map(|&i| ind_c[i]).sum();
        let y: f64 = new_elems.iter().map(|&i| ind_f[i]).sum();
        out.reduction_triples.push((x, y, delta * delta));

        let patch = coarse.mesh.patch(&refined);
        let eta_patch = patch.iter().map(|&i| ind_c[i]).sum::<f64>().sqrt();
        if eta_patch > 1e-14 {
            out.discrete_reliability
                .push(rec_fine.beta * delta / eta_patch);
        }
    }
    let mut c: f64 = 0.0;
    for &(_, y, d) in &out.reduction_triples {
        if d > 1e-28 {
            c = c.max(y / d);
        }
    }
    let mut q: f64 = 0.0;
    for &(x, y, d) in &out.reduction_triples {
        if x > 1e-28 {
            q = q.max(((y - 0.5 * c * d).max(0.0)) / x);
        }
    }
    out.reduction_c = c;
    out.reduction_q = q;
    Ok(out)
}

/// Solve on `extra_levels`-times uniformly refined reference meshes and
/// store the energy distance to each solved level's solution.
pub fn attach_reference_errors(
    run: &mut RunResult,
    problem: &Problem,
    quad: QuadConfig,
    extra_levels: usize,
) -> Result<(), Error> {
    for idx in 0..run.levels.len() {
        let Some(sol) = run.levels[idx].solution.clone() else {
            continue;
        };
        let mut ref_mesh = run.levels[idx].mesh.clone();
        for _ in 0..extra_levels {
            ref_mesh = ref_mesh.uniform_refine();
        }
        let report = solve_on_mesh(problem, &ref_mesh, quad)?;
        if !report.solvable {
            continue;
        }
        let carried = prolong_solution(problem.equation, &run.levels[idx].mesh, &ref_mesh, &sol);
        let diff: Vec<Complex64> = report
            .x
            .iter()
            .zip(&carried)
            .map(|(a, b)| a - b)
            .collect();
        let gram = energy_gram(problem.equation, &ref_mesh, quad)?;
        run.records[idx].energy_error = Some(energy_norm(&gram, &diff));
    }
    Ok(())
}
