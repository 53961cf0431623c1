//! Analytic center of a spectrahedron: maximize `log det P` over the affine
//! slice of the PSD cone with an equality-constrained damped Newton method,
//! plus a phase-1 routine that finds a strictly feasible starting point (or
//! certifies that none exists).

use crate::error::{Error, Result};
use crate::maxent::{phi, EntropyValue};
use crate::spectra::Spectrahedron;
use crate::symlin::{min_eigenvalue, smat, svec, SVec, SymMatrix};
use nalgebra::{Cholesky, DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Newton-decrement termination threshold.
    pub tol: f64,
    pub max_iter: usize,
    /// 0 silent, 1 per-iteration progress on stderr.
    pub verbosity: u8,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 200, verbosity: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct CenterResult {
    pub center: SymMatrix,
    pub entropy: EntropyValue,
    /// Coefficients mu with `((N+1)/2) (P*)^{-1} = sum_k mu_k A_k`.
    pub dual_multipliers: DVector<f64>,
    pub iterations: usize,
    pub stationarity_residual: f64,
    pub feasibility_residual: f64,
    /// `log det P` at each accepted iterate (nondecreasing).
    pub objective_trace: Vec<f64>,
}

/// Workspace for slice projections: constraint rows and a factorization of
/// their Gram matrix.
struct SliceProjector {
    rows: DMatrix<f64>,
    gram_chol: Cholesky<f64, nalgebra::Dyn>,
}

impl SliceProjector {
    fn new(s: &Spectrahedron) -> Result<Self> {
        let rows = s.operator_a().rows;
        let gram = &rows * rows.transpose();
        let gram_chol = Cholesky::new(gram)
            .ok_or(Error::RankDeficient { rank: 0, m: s.num_constraints() })?;
        Ok(SliceProjector { rows, gram_chol })
    }

    /// Nearest point (svec coordinates) on the affine slice `Av = b`.
    fn project(&self, v: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let resid = b - &self.rows * v;
        v + self.rows.transpose() * self.gram_chol.solve(&resid)
    }

    /// Min-norm solution of `Av = b`.
    fn min_norm(&self, b: &DVector<f64>) -> DVector<f64> {
        self.rows.transpose() * self.gram_chol.solve(b)
    }
}

fn log_det_from_chol(chol: &Cholesky<f64, nalgebra::Dyn>, n: usize) -> f64 {
    let l = chol.l_dirty();
    (0..n).map(|i| 2.0 * l[(i, i)].ln()).sum()
}

/// One Newton solve starting from a given strictly feasible point.
/// Internal engine behind both `analytic_center` and the phase-1 path.
pub fn analytic_center_from(
    s: &Spectrahedron,
    p0: &SymMatrix,
    opts: &SolverOptions,
) -> Result<CenterResult> {
    let n = s.dim();
    let m = s.num_constraints();
    let proj = SliceProjector::new(s)?;
    let a_dense: Vec<DMatrix<f64>> = s.constraints().iter().map(|a| a.to_dense()).collect();

    let mut v = proj.project(&svec(p0).coords(), s.rhs());
    let mut p = smat(&SVec::from_coords(n, &v)?);
    let mut chol = Cholesky::new(p.to_dense()).ok_or(Error::NotStrictlyFeasible)?;
    let mut log_det = log_det_from_chol(&chol, n);
    let mut trace = vec![log_det];
    let mut nu = DVector::zeros(m);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let pd = p.to_dense();

        // Schur system S nu = b with S_ij = tr(A_i P A_j P).
        let y: Vec<DMatrix<f64>> = a_dense.iter().map(|a| a * &pd).collect();
        let mut schur = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let t = y[i].iter().zip(y[j].transpose().iter()).map(|(a, b)| a * b).sum();
                schur[(i, j)] = t;
                schur[(j, i)] = t;
            }
        }
        let schur_chol =
            Cholesky::new(schur).ok_or(Error::RankDeficient { rank: 0, m })?;
        nu = schur_chol.solve(s.rhs());

        // Newton step: Delta = P - P M P, M = sum nu_k A_k.
        let mut mmat = DMatrix::zeros(n, n);
        for k in 0..m {
            mmat += &a_dense[k] * nu[k];
        }
        let delta_dense = &pd - &pd * &mmat * &pd;
        let delta = SymMatrix::from_dense_symmetrize(&delta_dense);

        // decrement^2 = tr((P^{-1} Delta)^2), computed without forming P^{-1}
        // explicitly: E = P^{-1} Delta via two triangular solves.
        let e = chol.solve(&delta.to_dense());
        let dec_sq: f64 = e.iter().zip(e.transpose().iter()).map(|(a, b)| a * b).sum();
        let dec = dec_sq.max(0.0).sqrt();
        if opts.verbosity > 0 {
            eprintln!("iter {iter}: log det = {log_det:.12e}, decrement = {dec:.3e}");
        }
        if dec <= opts.tol {
            converged = true;
            break;
        }

        // Backtracking line search; pure PD guard once inside the quadratic
        // convergence region where Armijo gains fall below roundoff.
        let armijo_active = dec > 1e-6;
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-16 {
            let cand = p.axpy(t, &delta)?;
            if let Some(c) = Cholesky::new(cand.to_dense()) {
                let ld = log_det_from_chol(&c, n);
                let ok = if armijo_active {
                    ld >= log_det + 0.01 * t * dec_sq
                } else {
                    ld.is_finite()
                };
                if ok {
                    p = cand;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::LineSearchStalled(t));
        }

        // Re-project onto the slice to keep feasibility error from drifting.
        v = proj.project(&svec(&p).coords(), s.rhs());
        p = smat(&SVec::from_coords(n, &v)?);
        chol = Cholesky::new(p.to_dense()).ok_or(Error::NotStrictlyFeasible)?;
        log_det = log_det_from_chol(&chol, n);
        trace.push(log_det);
    }

    if !converged {
        return Err(Error::MaxIterationsExceeded(opts.max_iter));
    }

    let entropy = phi(&p)?;
    let dual_multipliers = &nu * ((n as f64 + 1.0) / 2.0);
    let stationarity_residual = stationarity_check(s, &p)?;
    let feasibility_residual = s.feasibility_residual(&p)?;
    Ok(CenterResult {
        center: p,
        entropy,
        dual_multipliers,
        iterations,
        stationarity_residual,
        feasibility_residual,
        objective_trace: trace,
    })
}

/// Analytic center `P* = argmax_{P in S} log det P`, starting from a phase-1
/// feasible point.
pub fn analytic_center(s: &Spectrahedron, opts: &SolverOptions) -> Result<CenterResult> {
    let p0 = find_strictly_feasible(s)?;
    analytic_center_from(s, &p0, opts)
}

/// Returns a strictly feasible point of `S`, or certifies that the slice
/// misses the cone (`Infeasible`) / only touches its boundary
/// (`NotStrictlyFeasible`).
///
/// Method: the min-norm slice point, if PD, is returned directly. Otherwise
/// follow the shifted family `S_tau = {Q >= 0 : tr(A_k Q) = b_k + tau tr(A_k)}`:
/// `P_mn + tau I` is strictly feasible for large tau, and the analytic center
/// of each `S_tau` has slack `lambda_min` that lets tau shrink geometrically.
/// If tau stalls above zero the original slice is infeasible; if tau reaches
/// zero with vanishing slack the slice is tangent to the cone.
pub fn find_strictly_feasible(s: &Spectrahedron) -> Result<SymMatrix> {
    let n = s.dim();
    let proj = SliceProjector::new(s)?;
    let p_mn = smat(&SVec::from_coords(n, &proj.min_norm(s.rhs()))?);
    let scale = 1.0 + p_mn.fro_norm();
    let lam = min_eigenvalue(&p_mn);
    if lam > 1e-10 * scale {
        return Ok(p_mn);
    }

    let mut tau = (-lam) * 1.5 + 0.1 * scale;
    let mut q = p_mn.axpy(tau, &SymMatrix::identity(n))?;
    let phase1_opts = SolverOptions { tol: 1e-8, max_iter: 200, verbosity: 0 };

    for _ in 0..200 {
        let shifted = shifted_instance(s, tau)?;
        let result = analytic_center_from(&shifted, &q, &phase1_opts)?;
        let qc = result.center;
        let mu = min_eigenvalue(&qc);
        if tau < mu {
            // q_c - tau I is strictly feasible for the original slice.
            let cand = qc.axpy(-tau, &SymMatrix::identity(n))?;
            if min_eigenvalue(&cand) > 1e-12 * (1.0 + cand.fro_norm()) {
                return Ok(cand);
            }
        }
        let step = 0.5 * mu;
        if step <= 1e-12 * (1.0 + tau) {
            return if tau > 1e-8 * scale {
                Err(Error::Infeasible)
            } else {
                Err(Error::NotStrictlyFeasible)
            };
        }
        q = qc.axpy(-step, &SymMatrix::identity(n))?;
        tau -= step;
    }
    // tau kept shrinking but never cleared zero within the iteration budget:
    // the slice grazes the cone too closely to certify either way.
    Err(Error::NotStrictlyFeasible)
}

fn shifted_instance(s: &Spectrahedron, tau: f64) -> Result<Spectrahedron> {
    let mut rhs = s.rhs().clone();
    for (k, a) in s.constraints().iter().enumerate() {
        rhs[k] += tau * a.trace();
    }
    Spectrahedron::new(s.dim(), s.constraints().to_vec(), rhs, None)
}

/// Relative norm of the projection of `P^{-1}` onto the slice's tangent
/// directions (svec coordinates); zero exactly when P is the analytic center.
pub fn stationarity_check(s: &Spectrahedron, p: &SymMatrix) -> Result<f64> {
    let pinv = crate::symlin::pd_inverse(p)?;
    let g = svec(&pinv).coords();
    let proj = SliceProjector::new(s)?;
    // component of g orthogonal to the constraint rows
    let tangential = &g - proj.rows.transpose() * proj.gram_chol.solve(&(&proj.rows * &g));
    Ok(tangential.norm() / g.norm())
}
