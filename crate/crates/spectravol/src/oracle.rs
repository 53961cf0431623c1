//! Desk-scale Monte Carlo ground truth: certified bounding boxes for the
//! affine slice, rejection-sampling volume estimates (always in the
//! Frobenius/isometric-coordinate measure, since sampling happens in svec
//! coordinates), and a hit-and-run walker for uniform feasible samples.

use crate::center::{analytic_center, find_strictly_feasible, SolverOptions};
use crate::error::{Error, Result};
use crate::spectra::Spectrahedron;
use crate::symlin::{
    min_eigenvalue, pd_sqrt, smat, svec, MeasureConvention, SVec, SymMatrix,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Rejection sampling is guarded to slice dimensions where the acceptance
/// ratio stays workable.
pub const MAX_REJECTION_DIM: usize = 12;

/// Fixed number of independently seeded sample blocks; the estimate is
/// identical for any worker-thread count because block RNGs depend only on
/// the user seed and the block index.
const SEED_BLOCKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MCMethod {
    Rejection,
    HitAndRunUniformityCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct MCEstimate {
    pub log_volume: f64,
    pub std_error_log: f64,
    pub samples_total: u64,
    pub samples_accepted: u64,
    pub method: MCMethod,
    pub seed: u64,
    /// always Frobenius: the sampler lives in isometric coordinates
    pub convention: MeasureConvention,
}

/// Per-coordinate intervals `[lo_i, hi_i]` such that every feasible P lies in
/// `P0 + sum c_i basis_i` with `c` in the box.
///
/// Certificate: the analytic center's dual multipliers give a PD matrix
/// `W = sum mu_k A_k` in the constraint row span, so `tr(WP)` is constant on
/// the slice; conjugating each direction by `W^{-1/2}` turns that trace
/// constraint into eigenvalue bounds on each coordinate.
pub fn bounding_box(
    s: &Spectrahedron,
    p0: &SymMatrix,
    basis: &[DVector<f64>],
) -> Result<Vec<(f64, f64)>> {
    let center = analytic_center(s, &SolverOptions::default()).map_err(|e| match e {
        Error::MaxIterationsExceeded(_) | Error::LineSearchStalled(_) => {
            Error::UnboundedSuspected
        }
        other => other,
    })?;
    let mut w = SymMatrix::zeros(s.dim());
    for (k, a) in s.constraints().iter().enumerate() {
        w = w.axpy(center.dual_multipliers[k], a)?;
    }
    let s_b = center.dual_multipliers.dot(s.rhs());
    if min_eigenvalue(&w) <= 0.0 || s_b <= 0.0 {
        return Err(Error::UnboundedSuspected);
    }
    let w_inv_sqrt = {
        let sq = pd_sqrt(&w)?;
        crate::symlin::pd_inverse(&sq)?
    };
    let wd = w_inv_sqrt.to_dense();

    let mut out = Vec::with_capacity(basis.len());
    for v in basis {
        let vi = smat(&SVec::from_coords(s.dim(), v)?);
        let conj = SymMatrix::from_dense_symmetrize(&(&wd * vi.to_dense() * &wd));
        let (eigs, _) = crate::symlin::sym_eigen(&conj);
        let lo_eig = eigs.iter().fold(f64::INFINITY, |a, &x| a.min(x));
        let hi_eig = eigs.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x));
        // coordinate of P is tr(P V_i) - tr(P0 V_i)
        let offset = svec(p0).coords().dot(v);
        out.push((s_b * lo_eig - offset, s_b * hi_eig - offset));
    }
    Ok(out)
}

fn worker_count() -> usize {
    let hw = std::thread::available_parallelism().map(|c| c.get()).unwrap_or(1);
    match std::env::var("SPECTRAVOL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(t) if t >= 1 => t.min(SEED_BLOCKS),
        _ => hw.min(SEED_BLOCKS),
    }
}

/// Uniform rejection sampling over the certified bounding box:
/// `log vol = log(box volume) + log(acceptance ratio)`. Deterministic per
/// seed for any thread count.
pub fn mc_volume_rejection(s: &Spectrahedron, samples: u64, seed: u64) -> Result<MCEstimate> {
    let n = s.dim();
    let l = crate::symlin::packed_len(n);
    let m = s.num_constraints();
    let d = l - m;
    if d > MAX_REJECTION_DIM {
        return Err(Error::SliceDimensionTooLarge(d, MAX_REJECTION_DIM));
    }
    let p0 = match find_strictly_feasible(s) {
        Ok(p) => p,
        Err(Error::Infeasible) | Err(Error::NotStrictlyFeasible) => {
            return Err(Error::ZeroAcceptances)
        }
        Err(e) => return Err(e),
    };
    let basis = s.slice_basis()?;
    let box_ = bounding_box(s, &p0, &basis)?;
    let log_box_volume: f64 = box_.iter().map(|&(lo, hi)| (hi - lo).ln()).sum();

    // Flatten the reconstruction map: column j holds basis_j, plus p0.
    let p0_coords = svec(&p0).coords();
    let basis_mat = DMatrix::from_columns(&basis.iter().cloned().collect::<Vec<_>>());

    let block_sizes: Vec<u64> = {
        let base = samples / SEED_BLOCKS as u64;
        let extra = (samples % SEED_BLOCKS as u64) as usize;
        (0..SEED_BLOCKS).map(|j| base + u64::from(j < extra)).collect()
    };

    let run_block = |j: usize| -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(j as u64 + 1)));
        let mut coords = DVector::zeros(d);
        let mut accepted = 0u64;
        let jitter = 1e-10;
        for _ in 0..block_sizes[j] {
            for (i, &(lo, hi)) in box_.iter().enumerate() {
                coords[i] = rng.gen_range(lo..=hi);
            }
            let v = &p0_coords + &basis_mat * &coords;
            let p = smat(&SVec::from_coords(n, &v).expect("dimension fixed"));
            let mut dense = p.to_dense();
            for i in 0..n {
                dense[(i, i)] += jitter;
            }
            if nalgebra::Cholesky::new(dense).is_some() {
                accepted += 1;
            }
        }
        accepted
    };

    let workers = worker_count();
    let accepted: u64 = if workers <= 1 {
        (0..SEED_BLOCKS).map(run_block).sum()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..SEED_BLOCKS)
                .collect::<Vec<_>>()
                .chunks(SEED_BLOCKS.div_ceil(workers))
                .map(|chunk| {
                    let chunk = chunk.to_vec();
                    let run = &run_block;
                    scope.spawn(move || chunk.into_iter().map(run).sum::<u64>())
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
        })
    };

    if accepted == 0 {
        return Err(Error::ZeroAcceptances);
    }
    let p_acc = accepted as f64 / samples as f64;
    Ok(MCEstimate {
        log_volume: log_box_volume + p_acc.ln(),
        std_error_log: ((1.0 - p_acc) / (p_acc * samples as f64)).sqrt(),
        samples_total: samples,
        samples_accepted: accepted,
        method: MCMethod::Rejection,
        seed,
        convention: MeasureConvention::Frobenius,
    })
}

/// Hit-and-run walk on the slice: uniform direction in the tangent span,
/// chord endpoints by bisection on `lambda_min(P + tV) = 0`, uniform point on
/// the chord. Returns every `thin`-th state after `burn_in` steps.
pub fn hit_and_run_samples(
    s: &Spectrahedron,
    p0: &SymMatrix,
    count: usize,
    seed: u64,
) -> Result<Vec<SymMatrix>> {
    hit_and_run_with(s, p0, count, seed, 1000, 10)
}

pub fn hit_and_run_with(
    s: &Spectrahedron,
    p0: &SymMatrix,
    count: usize,
    seed: u64,
    burn_in: usize,
    thin: usize,
) -> Result<Vec<SymMatrix>> {
    let n = s.dim();
    if min_eigenvalue(p0) <= 0.0 || !s.is_on_slice(p0) {
        return Err(Error::NotStrictlyFeasible);
    }
    let basis = s.slice_basis()?;
    let d = basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();

    let mut current = svec(p0).coords();
    let scale = 1.0 + p0.fro_norm();
    let mut out = Vec::with_capacity(count);
    let total_steps = burn_in + count * thin;
    use rand::distributions::Distribution;

    for step in 0..total_steps {
        // random unit direction in the tangent span
        let mut dir = DVector::zeros(current.len());
        for b in &basis {
            let g: f64 = normal.sample(&mut rng);
            dir += b * g;
        }
        let nrm = dir.norm();
        if nrm < 1e-14 * d as f64 {
            continue;
        }
        dir /= nrm;

        let lam_at = |t: f64| -> f64 {
            let v = &current + &dir * t;
            min_eigenvalue(&smat(&SVec::from_coords(n, &v).expect("dimension fixed")))
        };
        let t_plus = chord_endpoint(&lam_at, scale)?;
        let t_minus = -chord_endpoint(&|t: f64| lam_at(-t), scale)?;
        let t = rng.gen_range(t_minus..t_plus);
        current += &dir * t;

        if step >= burn_in && (step - burn_in) % thin == thin - 1 {
            out.push(smat(&SVec::from_coords(n, &current).expect("dimension fixed")));
        }
    }
    Ok(out)
}

/// Largest `t >= 0` with `lambda_min(P + t V) >= 0`, via doubling then 60
/// bisection rounds to tolerance 1e-10 in t.
fn chord_endpoint(lam_at: &dyn Fn(f64) -> f64, scale: f64) -> Result<f64> {
    let mut hi = 0.125 * scale;
    let mut guard = 0;
    while lam_at(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::UnboundedSuspected);
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if lam_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    if lo == 0.0 && lam_at(lo) < -1e-8 * scale {
        return Err(Error::ChordSearchFailed);
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_spectraplex;
    use crate::volume::exact_log_volume_one_constraint;
    use std::f64::consts::PI;

    fn spectraplex_eye(n: usize) -> Spectrahedron {
        make_spectraplex(&SymMatrix::identity(n)).unwrap()
    }

    #[test]
    fn bounding_box_disk() {
        let s = spectraplex_eye(2);
        let p0 = find_strictly_feasible(&s).unwrap();
        let basis = s.slice_basis().unwrap();
        let box_ = bounding_box(&s, &p0, &basis).unwrap();
        assert_eq!(box_.len(), 2);
        for &(lo, hi) in &box_ {
            assert!(lo >= -0.7072 && hi <= 0.7072, "[{lo}, {hi}]");
            assert!(hi - lo > 1.0); // the disk of radius 1/sqrt(2) fits
        }
    }

    #[test]
    fn bounding_box_trace_bound() {
        // ||P||_F <= tr(P) = 1 on the spectraplex: box side at most 2
        let s = spectraplex_eye(3);
        let p0 = find_strictly_feasible(&s).unwrap();
        let basis = s.slice_basis().unwrap();
        for (lo, hi) in bounding_box(&s, &p0, &basis).unwrap() {
            assert!(hi - lo <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn bounding_box_contains_walk() {
        let s = spectraplex_eye(3);
        let p0 = find_strictly_feasible(&s).unwrap();
        let basis = s.slice_basis().unwrap();
        let box_ = bounding_box(&s, &p0, &basis).unwrap();
        let p0c = svec(&p0).coords();
        for p in hit_and_run_with(&s, &p0, 200, 5, 200, 2).unwrap() {
            let rel = svec(&p).coords() - &p0c;
            for (i, b) in basis.iter().enumerate() {
                let c = b.dot(&rel);
                assert!(
                    c >= box_[i].0 - 1e-8 && c <= box_[i].1 + 1e-8,
                    "coordinate {i} = {c} outside [{}, {}]",
                    box_[i].0,
                    box_[i].1
                );
            }
        }
    }

    #[test]
    fn rejection_matches_disk_area() {
        let s = spectraplex_eye(2);
        let est = mc_volume_rejection(&s, 1_000_000, 7).unwrap();
        let expect = (PI / 2.0).ln();
        assert!(
            (est.log_volume - expect).abs() <= 3.0 * est.std_error_log,
            "{} vs {expect} (se {})",
            est.log_volume,
            est.std_error_log
        );
        // and the exact formula in the frobenius convention agrees
        let exact = exact_log_volume_one_constraint(
            &SymMatrix::identity(2),
            MeasureConvention::Frobenius,
        )
        .unwrap()
        .log_volume;
        assert!((est.log_volume - exact).abs() <= 3.0 * est.std_error_log);
    }

    #[test]
    fn rejection_deterministic_and_thread_invariant() {
        let s = spectraplex_eye(2);
        let a = mc_volume_rejection(&s, 100_000, 3).unwrap();
        let b = mc_volume_rejection(&s, 100_000, 3).unwrap();
        assert_eq!(a.log_volume, b.log_volume);
        assert_eq!(a.samples_accepted, b.samples_accepted);
        std::env::set_var("SPECTRAVOL_THREADS", "1");
        let c = mc_volume_rejection(&s, 100_000, 3).unwrap();
        std::env::remove_var("SPECTRAVOL_THREADS");
        assert_eq!(a.samples_accepted, c.samples_accepted);
    }

    #[test]
    fn rejection_guards() {
        // slice dimension too large
        let s = spectraplex_eye(5);
        assert!(matches!(
            mc_volume_rejection(&s, 1000, 1),
            Err(Error::SliceDimensionTooLarge(14, MAX_REJECTION_DIM))
        ));
        // infeasible instance
        let bad = Spectrahedron::new(
            2,
            vec![SymMatrix::identity(2)],
            DVector::from_element(1, -1.0),
            None,
        )
        .unwrap();
        assert!(matches!(mc_volume_rejection(&bad, 1000, 1), Err(Error::ZeroAcceptances)));
    }

    #[test]
    fn unbiased_across_seeds() {
        let s = spectraplex_eye(2);
        let expect = (PI / 2.0).ln();
        let mut estimates = Vec::new();
        for seed in 0..30u64 {
            estimates.push(mc_volume_rejection(&s, 100_000, seed).unwrap().log_volume);
        }
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        let var = estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (estimates.len() as f64 - 1.0);
        let se_mean = (var / estimates.len() as f64).sqrt();
        assert!(
            (mean - expect).abs() <= 2.0 * se_mean,
            "mean {mean} vs {expect} (se {se_mean})"
        );
    }

    #[test]
    fn hit_and_run_feasible_and_centered() {
        let s = spectraplex_eye(2);
        let p0 = find_strictly_feasible(&s).unwrap();
        let samples = hit_and_run_samples(&s, &p0, 2000, 9).unwrap();
        assert_eq!(samples.len(), 2000);
        let mut mean = SymMatrix::zeros(2);
        for p in &samples {
            assert!(s.feasibility_residual(p).unwrap() < 1e-9);
            assert!(min_eigenvalue(p) > -1e-8);
            mean = mean.add(p).unwrap();
        }
        mean = mean.scale(1.0 / samples.len() as f64);
        // symmetric target: mean is I/2, sampling error ~ 1/sqrt(n_eff)
        let target = SymMatrix::identity(2).scale(0.5);
        assert!(
            mean.sub(&target).unwrap().fro_norm() < 0.05,
            "mean {:?}",
            mean
        );
    }

    #[test]
    fn chord_endpoints_on_boundary() {
        let s = spectraplex_eye(3);
        let p0 = find_strictly_feasible(&s).unwrap();
        let basis = s.slice_basis().unwrap();
        let current = svec(&p0).coords();
        let n = 3;
        for b in basis.iter().take(3) {
            let lam_at = |t: f64| {
                let v = &current + b * t;
                min_eigenvalue(&smat(&SVec::from_coords(n, &v).unwrap()))
            };
            let t = chord_endpoint(&lam_at, 1.0).unwrap();
            let lam = lam_at(t);
            assert!(lam.abs() < 1e-8, "endpoint lambda_min = {lam}");
        }
    }

    #[test]
    fn hit_and_run_rejects_bad_start() {
        let s = spectraplex_eye(3);
        let off_slice = SymMatrix::identity(3); // trace 3 != 1
        assert!(hit_and_run_samples(&s, &off_slice, 1, 0).is_err());
    }
}
