//! Volume formulas and applicability conditions: the closed-form
//! approximation `((N+1)/4pi)^{m/2} sqrt(det(AA^T)/det(BB^T)) e^{phi(P*)}`,
//! the exact one-constraint volume, the asymptotic formula for the multi-way
//! Birkhoff spectrahedron, and the well-roundedness conditions (A1-A3, A3',
//! and the headline condition) that govern when the approximation
//! carries a relative-error guarantee.

use crate::center::CenterResult;
use crate::error::{Error, Result};
use crate::maxent::log_multivariate_gamma;
use crate::spectra::{ConjugatedOperatorB, Spectrahedron};
use crate::symlin::{
    frobenius_inner, log_det_pd, sym_eigen, MeasureConvention, SymMatrix,
};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

/// Absolute constant in the A3 well-roundedness condition.
pub const GAMMA_TECHNICAL: f64 = 1e5;
/// Absolute constant in the headline applicability condition.
pub const GAMMA_MAIN: f64 = 32e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Formula,
    ExactOneConstraint,
    AsymptoticFamily,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FormulaComponents {
    /// `(m/2) log((N+1)/(4 pi))`
    pub m_half_log_term: f64,
    /// `(1/2) log det(A A^T)` with Gram entries `tr(A_i A_j)`
    pub half_log_det_aat: f64,
    /// `(1/2) log det(B B^T)` with Gram entries `tr(Z_i Z_j)`
    pub half_log_det_bbt: f64,
    /// `phi(P*)`
    pub phi_star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeReport {
    /// natural log of the volume, in the report's measure convention
    pub log_volume: f64,
    pub components: Option<FormulaComponents>,
    pub convention: MeasureConvention,
    pub method: VolumeMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

impl VolumeReport {
    pub fn log10_volume(&self) -> f64 {
        self.log_volume / std::f64::consts::LN_10
    }

    /// Linear-scale volume when it fits in an f64.
    pub fn linear_volume(&self) -> Option<f64> {
        if self.log_volume.abs() < 700.0 {
            Some(self.log_volume.exp())
        } else {
            None
        }
    }
}

/// `q(t) = (1/(N+1)) tr(Z(t)^2)` with `Z(t) = sum_k t_k Z_k`; evaluated both
/// as the trace of the squared combination and as the quadratic form
/// `t^T BB^T t / (N+1)`, which must agree to 1e-10 relative.
pub fn q_form(b: &ConjugatedOperatorB, t: &DVector<f64>) -> Result<f64> {
    let m = b.z_matrices().len();
    if t.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: t.len() });
    }
    let n = b.center.dim() as f64;
    let mut zt = SymMatrix::zeros(b.center.dim());
    for (k, z) in b.z_matrices().iter().enumerate() {
        zt = zt.axpy(t[k], z)?;
    }
    let trace_form = frobenius_inner(&zt, &zt)? / (n + 1.0);
    let quad_form = (t.transpose() * b.gram() * t)[(0, 0)] / (n + 1.0);
    let scale = trace_form.abs().max(quad_form.abs());
    if (trace_form - quad_form).abs() > 1e-10 * (1.0 + scale) {
        return Err(Error::InvalidInput(format!(
            "q(t) evaluations disagree: {trace_form} vs {quad_form}"
        )));
    }
    Ok(quad_form)
}

/// Optimal A1 constant: `lambda = lambda_min(BB^T)/(N+1)`.
pub fn compute_lambda(b: &ConjugatedOperatorB) -> f64 {
    let gram = b.gram();
    let eigs = nalgebra::SymmetricEigen::new(gram).eigenvalues;
    let n = b.center.dim() as f64;
    eigs.iter().fold(f64::INFINITY, |a, &x| a.min(x)) / (n + 1.0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaBound {
    /// spectral upper bound `2 sqrt(lambda_max(BB^T)) / (N+1)` (always valid,
    /// generally loose)
    pub bound: f64,
    /// exact A2 constant, available in closed form only for m = 1:
    /// `2 lambda_max(|Z_1|) / (N+1)`
    pub exact_m1: Option<f64>,
}

/// Upper bound for the A2 constant theta.
pub fn compute_theta_bound(b: &ConjugatedOperatorB) -> ThetaBound {
    let n = b.center.dim() as f64;
    let gram = b.gram();
    let eigs = nalgebra::SymmetricEigen::new(gram).eigenvalues;
    let lam_max = eigs.iter().fold(0.0_f64, |a, &x| a.max(x));
    let bound = 2.0 * lam_max.max(0.0).sqrt() / (n + 1.0);
    let exact_m1 = if b.z_matrices().len() == 1 {
        let (vals, _) = sym_eigen(&b.z_matrices()[0]);
        let rho = vals.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
        Some(2.0 * rho / (n + 1.0))
    } else {
        None
    };
    ThetaBound { bound, exact_m1 }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub theta: ThetaBound,
    pub epsilon_requested: f64,
    pub gamma_technical: f64,
    pub gamma_main: f64,
    /// The headline condition requires epsilon <= 1/e.
    pub main_condition_applicable: bool,
    /// `eps^2 / log^3(1/eps) >= 32e5 m^3 log N / N` (headline form)
    pub main_condition_satisfied: bool,
    /// `lambda >= 1e5 theta^2 eps^-2 m (m + log(1/eps))^2 log(N/eps)` (A3,
    /// evaluated with the conservative spectral theta bound)
    pub a3_satisfied: bool,
    /// `eps^2 (N+1) >= 4e5 m (m + log(1/eps))^2 log(N/eps)` (A3')
    pub a3_prime_satisfied: bool,
    /// smallest epsilon in (0, 1/2] passing A3' at this (N, m), if any
    pub min_epsilon_feasible: Option<f64>,
}

fn a3_prime_holds(n: f64, m: f64, eps: f64) -> bool {
    let le = (1.0 / eps).ln();
    eps * eps * (n + 1.0) >= 4.0 * GAMMA_TECHNICAL * m * (m + le).powi(2) * (n / eps).ln()
}

/// Evaluates all three applicability conditions at a solved center.
/// Accepts `0 < epsilon <= 1/2`; the headline condition additionally needs
/// `epsilon <= 1/e` and is marked inapplicable (and unsatisfied) above that.
pub fn check_conditions(
    s: &Spectrahedron,
    center: &CenterResult,
    epsilon: f64,
) -> Result<ConditionReport> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::EpsilonOutOfRange(format!(
            "need 0 < epsilon <= 1/2, got {epsilon}"
        )));
    }
    let n = s.dim();
    let m = s.num_constraints();
    let nf = n as f64;
    let mf = m as f64;
    let b = s.build_b(&center.center)?;
    let lambda = compute_lambda(&b);
    let theta = compute_theta_bound(&b);

    let le = (1.0 / epsilon).ln();
    let main_condition_applicable = epsilon <= (-1.0_f64).exp();
    let main_condition_satisfied = main_condition_applicable
        && epsilon * epsilon / le.powi(3) >= GAMMA_MAIN * mf.powi(3) * nf.ln() / nf;

    let a3_rhs = GAMMA_TECHNICAL * theta.bound * theta.bound / (epsilon * epsilon)
        * mf
        * (mf + le).powi(2)
        * (nf / epsilon).ln();
    let a3_satisfied = lambda >= a3_rhs;
    let a3_prime_satisfied = a3_prime_holds(nf, mf, epsilon);

    // A3' is monotone in epsilon on (0, 1/2]: bisect for the smallest passing value.
    let min_epsilon_feasible = if a3_prime_holds(nf, mf, 0.5) {
        let (mut lo, mut hi) = (1e-12, 0.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if a3_prime_holds(nf, mf, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    } else {
        None
    };

    Ok(ConditionReport {
        n,
        m,
        lambda,
        theta,
        epsilon_requested: epsilon,
        gamma_technical: GAMMA_TECHNICAL,
        gamma_main: GAMMA_MAIN,
        main_condition_applicable,
        main_condition_satisfied,
        a3_satisfied,
        a3_prime_satisfied,
        min_epsilon_feasible,
    })
}

/// Smallest N at which the main condition `eps^2/log^3(1/eps) >= 32e5 m^3 log N / N`
/// holds for a fixed target epsilon.
pub fn min_n_for_main_condition(m: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= (-1.0_f64).exp()) {
        return Err(Error::EpsilonOutOfRange(format!(
            "need 0 < epsilon <= 1/e, got {epsilon}"
        )));
    }
    let le = (1.0 / epsilon).ln();
    let target = GAMMA_MAIN * (m as f64).powi(3) * le.powi(3) / (epsilon * epsilon);
    // find N with N / log N >= target (monotone for N >= e)
    let holds = |n: f64| n / n.ln() >= target;
    let (mut lo, mut hi) = (3.0_f64, 1e60_f64);
    if holds(lo) {
        return Ok(lo);
    }
    for _ in 0..300 {
        let mid = ((lo.ln() + hi.ln()) / 2.0).exp();
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Threshold N above which the two-constraint family's epsilon schedule
/// `eps(N) = 10^3 log^{3/2}(N+1) / (N+1)^{1/2}` satisfies both `eps <= 1/2`
/// and A3' with m = 2. The schedule clears roughly N ~ 10^11; the guarantee
/// is never activatable at desk scale.
pub fn rank_one_schedule_threshold() -> f64 {
    let eps = |n: f64| 1e3 * (n + 1.0).ln().powf(1.5) / (n + 1.0).sqrt();
    let holds = |n: f64| {
        let e = eps(n);
        e <= 0.5 && a3_prime_holds(n, 2.0, e)
    };
    let (mut lo, mut hi) = (1e3_f64, 1e14_f64);
    debug_assert!(!holds(lo) && holds(hi));
    for _ in 0..200 {
        let mid = ((lo.ln() + hi.ln()) / 2.0).exp();
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn half_log_det_gram(gram: &DMatrix<f64>) -> Result<f64> {
    let m = gram.nrows();
    let chol = nalgebra::Cholesky::new(gram.clone())
        .ok_or(Error::RankDeficient { rank: 0, m })?;
    let l = chol.l();
    Ok((0..m).map(|i| l[(i, i)].ln()).sum())
}

/// The closed-form approximation
/// `log vol(S) ~ (m/2) log((N+1)/(4 pi)) + (1/2) log det(AA^T)
///              - (1/2) log det(BB^T) + phi(P*)`,
/// shifted into the requested measure convention.
pub fn approx_log_volume(
    s: &Spectrahedron,
    center: &CenterResult,
    convention: MeasureConvention,
) -> Result<VolumeReport> {
    let n = s.dim();
    let m = s.num_constraints() as f64;
    let m_half_log_term =
        m / 2.0 * ((n as f64 + 1.0) / (4.0 * std::f64::consts::PI)).ln();
    let half_log_det_aat = half_log_det_gram(&s.operator_a().gram())?;
    let half_log_det_bbt = half_log_det_gram(&s.build_b(&center.center)?.gram())?;
    let phi_star = center.entropy.value;
    let log_volume = m_half_log_term + half_log_det_aat - half_log_det_bbt + phi_star
        + convention.log_offset(n);
    Ok(VolumeReport {
        log_volume,
        components: Some(FormulaComponents {
            m_half_log_term,
            half_log_det_aat,
            half_log_det_bbt,
            phi_star,
        }),
        convention,
        method: VolumeMethod::Formula,
        caveat: None,
    })
}

/// Exact volume of `{P >= 0 : tr(AP) = 1}` for PD A:
/// `Gamma_N((N+1)/2) ||A||_F det(A)^{-(N+1)/2} / (binom(N+1,2) - 1)!`.
pub fn exact_log_volume_one_constraint(
    a: &SymMatrix,
    convention: MeasureConvention,
) -> Result<VolumeReport> {
    let n = a.dim();
    let nf = n as f64;
    let k = nf * (nf + 1.0) / 2.0;
    let log_volume = log_multivariate_gamma(n, (nf + 1.0) / 2.0)?
        + a.fro_norm().ln()
        - (nf + 1.0) / 2.0 * log_det_pd(a)?
        - ln_gamma(k)
        + convention.log_offset(n);
    Ok(VolumeReport {
        log_volume,
        components: None,
        convention,
        method: VolumeMethod::ExactOneConstraint,
        caveat: None,
    })
}

/// Asymptotic volume of the multi-way Birkhoff spectrahedron on (R^n)^{x k}:
/// `((N+1)/4pi)^{m/2} (N/n)^m (2en/(N(N+1)))^{N(N+1)/2} Gamma_N((N+1)/2)`
/// with `N = n^k`, `m = k binom(n+1,2) - k + 1`, evaluated in log space.
pub fn asymptotic_log_volume_scp(
    n: usize,
    k: usize,
    convention: MeasureConvention,
) -> Result<VolumeReport> {
    if n < 2 || k < 2 {
        return Err(Error::InvalidInput(format!(
            "need n >= 2 and k >= 2, got n = {n}, k = {k}"
        )));
    }
    let big_n = (n as u64).checked_pow(k as u32).ok_or(Error::SizeBudgetExceeded(usize::MAX))?
        as usize;
    let m = k * n * (n + 1) / 2 - k + 1;
    let nf = big_n as f64;
    let mf = m as f64;

    let m_half_log_term = mf / 2.0 * ((nf + 1.0) / (4.0 * std::f64::consts::PI)).ln();
    // sqrt(det(AA^T)/det(BB^T)) = (N/n)^m since B = A / n^{k-1}
    let gram_ratio = mf * (nf / n as f64).ln();
    // phi at P* = I/n^{k-1}
    let phi_star = log_multivariate_gamma(big_n, (nf + 1.0) / 2.0)?
        - nf * (nf + 1.0) / 2.0 * ((nf + 1.0) / (2.0 * std::f64::consts::E)).ln()
        - (nf + 1.0) / 2.0 * nf * (k as f64 - 1.0) * (n as f64).ln();
    let log_volume = m_half_log_term + gram_ratio + phi_star + convention.log_offset(big_n);
    let caveat = if k < 7 {
        Some("asymptotic guarantee holds only for k >= 7; value is the bare formula".into())
    } else {
        None
    };
    Ok(VolumeReport {
        log_volume,
        components: Some(FormulaComponents {
            m_half_log_term,
            half_log_det_aat: gram_ratio, // ratio carried on the AA^T side
            half_log_det_bbt: 0.0,
            phi_star,
        }),
        convention,
        method: VolumeMethod::AsymptoticFamily,
        caveat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::{analytic_center, SolverOptions};
    use crate::symlin::svec;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn spectraplex(a: SymMatrix) -> Spectrahedron {
        Spectrahedron::new(a.dim(), vec![a], DVector::from_element(1, 1.0), None).unwrap()
    }

    fn random_feasible_instance(n: usize, m: usize, seed: u64) -> Spectrahedron {
        // first constraint is the trace, so the slice is compact and the
        // analytic center exists
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut constraints = vec![SymMatrix::identity(n)];
        constraints
            .extend((1..m).map(|_| SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))));
        let p = SymMatrix::identity(n).scale(0.5);
        let rhs = DVector::from_iterator(
            m,
            constraints.iter().map(|a| frobenius_inner(a, &p).unwrap()),
        );
        Spectrahedron::new(n, constraints, rhs, None).unwrap()
    }

    #[test]
    fn q_form_examples() {
        let n = 4;
        let s = spectraplex(SymMatrix::identity(n));
        let pstar = SymMatrix::identity(n).scale(1.0 / n as f64);
        let b = s.build_b(&pstar).unwrap();
        assert_eq!(q_form(&b, &DVector::zeros(1)).unwrap(), 0.0);
        let v = q_form(&b, &DVector::from_element(1, 1.0)).unwrap();
        let expect = 1.0 / (n as f64 * (n as f64 + 1.0));
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn q_form_dual_agreement_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for trial in 0..20 {
            let s = random_feasible_instance(5, 3, 100 + trial);
            let p = SymMatrix::identity(5).scale(0.5);
            let b = s.build_b(&p).unwrap();
            let t = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
            // q_form itself errors if the two formulas disagree beyond 1e-10
            let v = q_form(&b, &t).unwrap();
            assert!(v >= 0.0);
            // A1 with the optimal lambda
            let lambda = compute_lambda(&b);
            assert!(v + 1e-12 >= lambda * t.norm_squared());
        }
    }

    #[test]
    fn lambda_theta_examples() {
        let n = 6;
        let s = spectraplex(SymMatrix::identity(n));
        let pstar = SymMatrix::identity(n).scale(1.0 / n as f64);
        let b = s.build_b(&pstar).unwrap();
        let lam = compute_lambda(&b);
        assert!((lam - 1.0 / (n as f64 * (n as f64 + 1.0))).abs() < 1e-14);

        let th = compute_theta_bound(&b);
        // exact theta for m=1: |Z_1| = I/N
        let exact = th.exact_m1.unwrap();
        assert!((exact - 2.0 / (n as f64 * (n as f64 + 1.0))).abs() < 1e-14);
        assert!(th.bound >= exact - 1e-15);

        // orthonormalized instance: lambda = 1/(N+1), bound = 2/(N+1)
        let s2 = s.orthonormalize(&pstar).unwrap();
        let b2 = s2.build_b(&pstar).unwrap();
        assert!((compute_lambda(&b2) - 1.0 / (n as f64 + 1.0)).abs() < 1e-12);
        assert!((compute_theta_bound(&b2).bound - 2.0 / (n as f64 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn theta_exact_attained_at_top_eigenvector() {
        // (2/(N+1)) |x^T Z_1 x| = theta at the top eigenvector of |Z_1|
        let a = SymMatrix::from_diagonal(&[1.0, 2.0, 5.0]);
        let s = spectraplex(a.clone());
        let pstar = crate::symlin::pd_inverse(&a.scale(3.0)).unwrap();
        let b = s.build_b(&pstar).unwrap();
        let th = compute_theta_bound(&b).exact_m1.unwrap();
        let (vals, vecs) = sym_eigen(&b.z_matrices()[0]);
        let (mut best, mut idx) = (0.0, 0);
        for (i, &v) in vals.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                idx = i;
            }
        }
        let x = vecs.column(idx).into_owned();
        let q = (x.transpose() * b.z_matrices()[0].to_dense() * &x)[(0, 0)];
        assert!((2.0 / 4.0 * q.abs() - th).abs() < 1e-13);
    }

    #[test]
    fn exact_volume_two_dim() {
        let r = exact_log_volume_one_constraint(
            &SymMatrix::identity(2),
            MeasureConvention::Entrywise,
        )
        .unwrap();
        assert!((r.log_volume - (PI * 2.0_f64.sqrt() / 4.0).ln()).abs() < 1e-13);
        let rf = exact_log_volume_one_constraint(
            &SymMatrix::identity(2),
            MeasureConvention::Frobenius,
        )
        .unwrap();
        // isometric-coordinate slice is a disk of radius 1/sqrt(2): area pi/2
        assert!((rf.log_volume - (PI / 2.0).ln()).abs() < 1e-13);
    }

    #[test]
    fn exact_volume_homogeneity() {
        // A -> cA scales the volume by c^{1 - N(N+1)/2}
        let n = 4;
        let a = SymMatrix::from_diagonal(&[1.0, 2.0, 0.5, 1.5]);
        let c = 2.7;
        let v1 = exact_log_volume_one_constraint(&a, MeasureConvention::Entrywise)
            .unwrap()
            .log_volume;
        let v2 = exact_log_volume_one_constraint(&a.scale(c), MeasureConvention::Entrywise)
            .unwrap()
            .log_volume;
        let expect = (1.0 - (n * (n + 1)) as f64 / 2.0) * c.ln();
        assert!((v2 - v1 - expect).abs() < 1e-12);
    }

    #[test]
    fn approx_reduces_to_spectraplex_closed_form() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 5;
        let q = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = SymMatrix::from_dense_symmetrize(&(q.transpose() * &q + DMatrix::identity(n, n)));
        let s = spectraplex(a.clone());
        let center = analytic_center(&s, &SolverOptions::default()).unwrap();
        let report =
            approx_log_volume(&s, &center, MeasureConvention::Entrywise).unwrap();

        // assembled closed form: Gamma_N ||A||_F det(A)^{-(N+1)/2}
        //   (2e/(N(N+1)))^{N(N+1)/2} sqrt(N(N+1)/(4 pi))
        let nf = n as f64;
        let expect = log_multivariate_gamma(n, (nf + 1.0) / 2.0).unwrap()
            + a.fro_norm().ln()
            - (nf + 1.0) / 2.0 * log_det_pd(&a).unwrap()
            + nf * (nf + 1.0) / 2.0
                * (2.0 * std::f64::consts::E / (nf * (nf + 1.0))).ln()
            + 0.5 * (nf * (nf + 1.0) / (4.0 * PI)).ln();
        assert!(
            (report.log_volume - expect).abs() < 1e-8,
            "{} vs {expect}",
            report.log_volume
        );
    }

    #[test]
    fn stirling_ratio_bracket() {
        // approx / exact = K! / (sqrt(2 pi K) (K/e)^K) in (1, 1 + 1/(6K)]
        for n in [2usize, 5, 10, 30] {
            let a = SymMatrix::identity(n);
            let s = spectraplex(a.clone());
            let center = analytic_center(&s, &SolverOptions::default()).unwrap();
            for conv in [MeasureConvention::Entrywise, MeasureConvention::Frobenius] {
                let approx = approx_log_volume(&s, &center, conv).unwrap().log_volume;
                let exact = exact_log_volume_one_constraint(&a, conv).unwrap().log_volume;
                let ratio = (approx - exact).exp();
                let k = (n * (n + 1) / 2) as f64;
                assert!(
                    ratio >= 1.0 - 1e-9 && ratio <= 1.0 + 1.0 / (6.0 * k),
                    "n = {n}: ratio {ratio}"
                );
            }
        }
    }

    #[test]
    fn conditions_small_n_fail() {
        let s = random_feasible_instance(10, 2, 7);
        let center = analytic_center(&s, &SolverOptions::default()).unwrap();
        let r = check_conditions(&s, &center, 0.1).unwrap();
        assert!(!r.main_condition_satisfied);
        assert!(!r.a3_satisfied);
        assert!(!r.a3_prime_satisfied);
        assert!(r.min_epsilon_feasible.is_none());
        assert!(r.lambda > 0.0 && r.theta.bound > 0.0);
    }

    #[test]
    fn epsilon_range_enforced() {
        let s = spectraplex(SymMatrix::identity(3));
        let center = analytic_center(&s, &SolverOptions::default()).unwrap();
        // boundary e^{-1} accepted and applicable
        let r = check_conditions(&s, &center, (-1.0_f64).exp()).unwrap();
        assert!(r.main_condition_applicable);
        // between e^{-1} and 1/2: accepted, headline condition inapplicable
        let r = check_conditions(&s, &center, 0.4).unwrap();
        assert!(!r.main_condition_applicable && !r.main_condition_satisfied);
        // outside (0, 1/2]: rejected
        assert!(matches!(
            check_conditions(&s, &center, 0.6),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(check_conditions(&s, &center, 0.0).is_err());
    }

    #[test]
    fn schedule_threshold_near_1e11() {
        let t = rank_one_schedule_threshold();
        assert!(
            t >= 1e10 && t <= 1e12,
            "threshold {t:e} outside a factor of 10 of 1e11"
        );
    }

    #[test]
    fn min_n_inversion_consistent() {
        let eps = 0.1;
        let n = min_n_for_main_condition(2, eps).unwrap();
        let le = (1.0 / eps).ln();
        let holds =
            |x: f64| eps * eps / le.powi(3) >= GAMMA_MAIN * 8.0 * x.ln() / x;
        assert!(holds(n * 1.001));
        assert!(!holds(n * 0.5));
    }

    #[test]
    fn scp_formula_term_example() {
        // n=2, k=3: m = 3*3 - 3 + 1 = 7 and the Gram ratio term is 7 log 4
        let r =
            asymptotic_log_volume_scp(2, 3, MeasureConvention::Entrywise).unwrap();
        let comp = r.components.unwrap();
        assert!((comp.half_log_det_aat - 7.0 * 4.0_f64.ln()).abs() < 1e-12);
        assert!(r.caveat.is_some());
        assert!(asymptotic_log_volume_scp(2, 7, MeasureConvention::Entrywise)
            .unwrap()
            .caveat
            .is_none());
        assert!(asymptotic_log_volume_scp(1, 3, MeasureConvention::Entrywise).is_err());
    }

    #[test]
    fn representation_invariance_quick() {
        let s = random_feasible_instance(5, 3, 77);
        let center = analytic_center(&s, &SolverOptions::default()).unwrap();
        let base = approx_log_volume(&s, &center, MeasureConvention::Frobenius)
            .unwrap()
            .log_volume;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(78);
        let c = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0))
            + DMatrix::<f64>::identity(3, 3) * 2.0;
        let s2 = s.recombine(&c).unwrap();
        let center2 = analytic_center(&s2, &SolverOptions::default()).unwrap();
        let v2 = approx_log_volume(&s2, &center2, MeasureConvention::Frobenius)
            .unwrap()
            .log_volume;
        assert!((base - v2).abs() < 1e-8, "{base} vs {v2}");
        let _ = svec(&center.center);
    }
}
