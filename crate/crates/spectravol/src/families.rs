//! Instance generators for the worked spectrahedron families, each with its
//! closed-form analytic center: the spectraplex, the PD-plus-rank-one pair,
//! block-diagonal trace constraints, the multi-way Birkhoff spectrahedron on
//! (R^n)^{x k}, and central sections of the spectraplex.

use crate::error::{Error, Result};
use crate::spectra::Spectrahedron;
use crate::symlin::{pd_inverse, SymMatrix};
use nalgebra::DVector;

/// Dense-storage budget for tensor-product instances.
pub const SCP_SIZE_BUDGET: usize = 4096;

/// `{P >= 0 : tr(AP) = 1}` for PD A.
pub fn make_spectraplex(a: &SymMatrix) -> Result<Spectrahedron> {
    crate::symlin::log_det_pd(a)?; // PD check
    Ok(Spectrahedron::new(
        a.dim(),
        vec![a.clone()],
        DVector::from_element(1, 1.0),
        None,
    )?
    .with_name("spectraplex"))
}

/// Closed-form center of the spectraplex: `(N A)^{-1}`.
pub fn spectraplex_center(a: &SymMatrix) -> Result<SymMatrix> {
    pd_inverse(&a.scale(a.dim() as f64))
}

/// `{P >= 0 : tr(AP) = 1, v^T P v = 1}` for PD A and `xi = v^T A^{-1} v > 1`.
pub fn make_rank_one(a: &SymMatrix, v: &DVector<f64>) -> Result<Spectrahedron> {
    let xi = rank_one_xi(a, v)?;
    if xi <= 1.0 {
        return Err(Error::XiOutOfRange(xi));
    }
    Ok(Spectrahedron::new(
        a.dim(),
        vec![a.clone(), SymMatrix::rank_one(v)],
        DVector::from_vec(vec![1.0, 1.0]),
        None,
    )?
    .with_name("rank_one"))
}

pub fn rank_one_xi(a: &SymMatrix, v: &DVector<f64>) -> Result<f64> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: v.len() });
    }
    let ainv = pd_inverse(a)?;
    Ok((v.transpose() * ainv.to_dense() * v)[(0, 0)])
}

/// Closed-form center `(a A + b v v^T)^{-1}` with
/// `a = (N-1) xi / (xi - 1)`, `b = (xi - N) / (xi - 1)`.
pub fn rank_one_center(a: &SymMatrix, v: &DVector<f64>) -> Result<SymMatrix> {
    let n = a.dim() as f64;
    let xi = rank_one_xi(a, v)?;
    if xi <= 1.0 {
        return Err(Error::XiOutOfRange(xi));
    }
    let ca = (n - 1.0) * xi / (xi - 1.0);
    let cb = (xi - n) / (xi - 1.0);
    let inner = a.scale(ca).axpy(cb, &SymMatrix::rank_one(v))?;
    pd_inverse(&inner)
}

/// `{P >= 0 on R^{2N} : tr(P_11 block) = alpha, tr(P_22 block) = beta}`.
pub fn make_diag_blocks(alpha: f64, beta: f64, n: usize) -> Result<Spectrahedron> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "block traces must be positive, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let m1 = SymMatrix::from_fn(2 * n, |i, j| if i == j && i < n { 1.0 } else { 0.0 });
    let m2 = SymMatrix::from_fn(2 * n, |i, j| if i == j && i >= n { 1.0 } else { 0.0 });
    Ok(Spectrahedron::new(2 * n, vec![m1, m2], DVector::from_vec(vec![alpha, beta]), None)?
        .with_name("diag_blocks"))
}

/// Closed-form center `(1/N) diag(alpha I_N, beta I_N)`.
pub fn diag_blocks_center(alpha: f64, beta: f64, n: usize) -> SymMatrix {
    SymMatrix::from_fn(2 * n, |i, j| {
        if i != j {
            0.0
        } else if i < n {
            alpha / n as f64
        } else {
            beta / n as f64
        }
    })
}

/// Row index of the tensor basis element `kappa` in `(R^n)^{x k}`, with
/// axis 1 as the slowest-varying (leftmost) Kronecker factor.
fn tensor_index(kappa: &[usize], n: usize) -> usize {
    kappa.iter().fold(0, |acc, &x| acc * n + x)
}

/// The multi-way Birkhoff spectrahedron: PSD matrices on `(R^n)^{x k}` with
/// trace n and every univariant partial trace equal to `I_n`. Constraints:
/// for each axis i and `alpha <= alpha'` (dropping `(i, n, n)`), the
/// symmetrized slice-matching matrix with right-hand side
/// `delta_{alpha,alpha'}`, plus the trace constraint `tr(P I/n) = 1`.
pub fn make_scp(n: usize, k: usize) -> Result<Spectrahedron> {
    if n < 2 || k < 2 {
        return Err(Error::InvalidInput(format!(
            "need n >= 2 and k >= 2, got n = {n}, k = {k}"
        )));
    }
    let big_n = n.checked_pow(k as u32).ok_or(Error::SizeBudgetExceeded(usize::MAX))?;
    if big_n > SCP_SIZE_BUDGET {
        return Err(Error::SizeBudgetExceeded(big_n));
    }

    let mut constraints = Vec::new();
    let mut rhs = Vec::new();

    // trace constraint A_0 = I / n, b_0 = 1
    constraints.push(SymMatrix::identity(big_n).scale(1.0 / n as f64));
    rhs.push(1.0);

    let mut kappa = vec![0usize; k];
    for i in 0..k {
        for alpha in 0..n {
            for alpha_p in alpha..n {
                if alpha == n - 1 && alpha_p == n - 1 {
                    continue; // redundant given the trace constraint
                }
                let mut a = SymMatrix::zeros(big_n);
                // enumerate kappa with kappa_i = alpha; kappa' differs only
                // in axis i where it equals alpha'
                kappa.iter_mut().for_each(|x| *x = 0);
                loop {
                    kappa[i] = alpha;
                    let r = tensor_index(&kappa, n);
                    kappa[i] = alpha_p;
                    let rp = tensor_index(&kappa, n);
                    let w = if r == rp { 1.0 } else { 0.5 };
                    a.set(r, rp, w);
                    // advance the k-1 free axes
                    let mut axis = k;
                    let mut carried = true;
                    while carried && axis > 0 {
                        axis -= 1;
                        if axis == i {
                            continue;
                        }
                        kappa[axis] += 1;
                        if kappa[axis] == n {
                            kappa[axis] = 0;
                        } else {
                            carried = false;
                        }
                    }
                    if carried {
                        break;
                    }
                }
                constraints.push(a);
                rhs.push(if alpha == alpha_p { 1.0 } else { 0.0 });
            }
        }
    }
    let m = constraints.len();
    debug_assert_eq!(m, k * n * (n + 1) / 2 - k + 1);
    Ok(
        Spectrahedron::new(big_n, constraints, DVector::from_vec(rhs), None)?
            .with_name(format!("scp_{n}_{k}")),
    )
}

/// Closed-form center `I / n^{k-1}`.
pub fn scp_center(n: usize, k: usize) -> SymMatrix {
    let big_n = n.pow(k as u32);
    SymMatrix::identity(big_n).scale(1.0 / n.pow(k as u32 - 1) as f64)
}

/// Partial trace over all axes except `i` (1-based? no: 0-based axis) of a
/// symmetric matrix on `(R^n)^{x k}`: the n x n matrix with entries
/// `S[alpha, alpha'] = sum over kappa agreeing off axis i of X[kappa, kappa']`.
/// On elementary tensors `A_1 x ... x A_k` it yields `prod_{j != i} tr(A_j) * A_i`.
pub fn partial_trace(x: &SymMatrix, n: usize, i: usize) -> Result<SymMatrix> {
    let big_n = x.dim();
    let mut k = 0usize;
    let mut acc = 1usize;
    while acc < big_n {
        acc *= n;
        k += 1;
    }
    if acc != big_n || k == 0 {
        return Err(Error::InvalidInput(format!(
            "dimension {big_n} is not a power of {n}"
        )));
    }
    if i >= k {
        return Err(Error::InvalidInput(format!("axis {i} out of range for k = {k}")));
    }
    let mut out = SymMatrix::zeros(n);
    let mut kappa = vec![0usize; k];
    for alpha in 0..n {
        for alpha_p in alpha..n {
            let mut sum = 0.0;
            kappa.iter_mut().for_each(|v| *v = 0);
            loop {
                kappa[i] = alpha;
                let r = tensor_index(&kappa, n);
                kappa[i] = alpha_p;
                let rp = tensor_index(&kappa, n);
                sum += x.get(r, rp);
                let mut axis = k;
                let mut carried = true;
                while carried && axis > 0 {
                    axis -= 1;
                    if axis == i {
                        continue;
                    }
                    kappa[axis] += 1;
                    if kappa[axis] == n {
                        kappa[axis] = 0;
                    } else {
                        carried = false;
                    }
                }
                if carried {
                    break;
                }
            }
            out.set(alpha, alpha_p, sum);
        }
    }
    Ok(out)
}

/// Central section of the spectraplex:
/// `{P >= 0 : tr(P) = 1, tr(MP) = tr(M)/N}` for M not collinear with I.
pub fn make_central_section(m: &SymMatrix) -> Result<Spectrahedron> {
    let n = m.dim();
    let mean = m.trace() / n as f64;
    let centered = m.axpy(-mean, &SymMatrix::identity(n))?;
    if centered.fro_norm() <= 1e-10 * m.fro_norm().max(1.0) {
        return Err(Error::MCollinearWithIdentity);
    }
    Ok(Spectrahedron::new(
        n,
        vec![SymMatrix::identity(n), m.clone()],
        DVector::from_vec(vec![1.0, mean]),
        None,
    )?
    .with_name("central_section"))
}

/// The analytic center of every central section is `I / N`.
pub fn central_section_center(n: usize) -> SymMatrix {
    SymMatrix::identity(n).scale(1.0 / n as f64)
}
