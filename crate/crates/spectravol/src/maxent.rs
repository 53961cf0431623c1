//! Maximum-entropy machinery: the multivariate gamma function, the entropy
//! function `phi`, and the Wishart distribution that maximizes differential
//! entropy over PSD(N) for a fixed mean (density, sampler, and duality
//! diagnostics).

use crate::error::{Error, Result};
use crate::spectra::Spectrahedron;
use crate::symlin::{
    frobenius_inner, log_det_pd, min_eigenvalue, pd_inverse, pd_sqrt, MeasureConvention,
    SymMatrix, PSD_TOL,
};
use nalgebra::{DMatrix, DVector};
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

/// `log Gamma_n(a) = (n(n-1)/4) log pi + sum_{j=1}^{n} log Gamma(a - (j-1)/2)`,
/// defined for `a > (n-1)/2`.
pub fn log_multivariate_gamma(n: usize, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    if a <= (n as f64 - 1.0) / 2.0 {
        return Err(Error::GammaPole { n, a });
    }
    let mut acc = (n * (n - 1)) as f64 / 4.0 * std::f64::consts::PI.ln();
    for j in 1..=n {
        acc += ln_gamma(a - (j as f64 - 1.0) / 2.0);
    }
    Ok(acc)
}

/// Value of the entropy function at a specific PD matrix.
#[derive(Debug, Clone, Copy)]
pub struct EntropyValue {
    /// nats
    pub value: f64,
    pub n: usize,
}

/// `phi(P) = log Gamma_N((N+1)/2) - (N(N+1)/2) log((N+1)/(2e))
///           + ((N+1)/2) log det P`,
/// the maximum differential entropy over distributions on PSD(N) with mean P.
pub fn phi(p: &SymMatrix) -> Result<EntropyValue> {
    let n = p.dim();
    let nf = n as f64;
    let value = log_multivariate_gamma(n, (nf + 1.0) / 2.0)?
        - nf * (nf + 1.0) / 2.0 * ((nf + 1.0) / (2.0 * std::f64::consts::E)).ln()
        + (nf + 1.0) / 2.0 * log_det_pd(p)?;
    Ok(EntropyValue { value, n })
}

/// `grad phi(P) = ((N+1)/2) P^{-1}`.
pub fn phi_gradient(p: &SymMatrix) -> Result<SymMatrix> {
    let n = p.dim() as f64;
    Ok(pd_inverse(p)?.scale((n + 1.0) / 2.0))
}

/// The entropy-maximizing Wishart distribution with mean P* and N+1 degrees
/// of freedom: `X = sqrt(P*) (G G^T / (N+1)) sqrt(P*)` for a standard-Gaussian
/// N x (N+1) matrix G.
#[derive(Debug, Clone)]
pub struct WishartMaxEnt {
    center: SymMatrix,
    sqrt_center: SymMatrix,
    /// `Y* = ((N+1)/2) (P*)^{-1}`, the natural parameter.
    natural_param: SymMatrix,
    log_norm: f64,
}

impl WishartMaxEnt {
    pub fn new(center: SymMatrix) -> Result<Self> {
        let n = center.dim() as f64;
        let natural_param = pd_inverse(&center)?.scale((n + 1.0) / 2.0);
        let sqrt_center = pd_sqrt(&center)?;
        // log of the partition function's inverse contribution:
        // ((N+1)/2) log det Y* - log Gamma_N((N+1)/2)
        let log_norm = (n + 1.0) / 2.0 * log_det_pd(&natural_param)?
            - log_multivariate_gamma(center.dim(), (n + 1.0) / 2.0)?;
        Ok(WishartMaxEnt { center, sqrt_center, natural_param, log_norm })
    }

    pub fn center(&self) -> &SymMatrix {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn degrees(&self) -> usize {
        self.center.dim() + 1
    }

    pub fn natural_param(&self) -> &SymMatrix {
        &self.natural_param
    }

    /// Deterministic-per-seed sampler using the G G^T construction.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<SymMatrix> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
        let sq = self.sqrt_center.to_dense();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let g = DMatrix::from_fn(n, n + 1, |_, _| normal.sample(&mut rng));
            let w = &g * g.transpose() / (n as f64 + 1.0);
            let x = &sq * w * &sq;
            out.push(SymMatrix::from_dense_symmetrize(&x));
        }
        out
    }

    /// `log f*(Q) = -tr(Y* Q) + ((N+1)/2) log det Y* - log Gamma_N((N+1)/2)`,
    /// shifted by the measure-convention constant when densities are taken
    /// with respect to Lebesgue measure in isometric coordinates.
    pub fn log_density(&self, q: &SymMatrix, convention: MeasureConvention) -> Result<f64> {
        let lam = min_eigenvalue(q);
        if lam < -PSD_TOL * (1.0 + q.fro_norm()) {
            return Err(Error::NotPsd { min_eig: lam });
        }
        let raw = -frobenius_inner(&self.natural_param, q)? + self.log_norm;
        Ok(raw - convention.log_offset(self.dim()))
    }
}

#[derive(Debug, Clone)]
pub struct DualityReport {
    /// max over sampled feasible P of |tr((P*)^{-1} P) - N|
    pub trace_identity_residual: f64,
    /// |dual objective at Y* minus phi(P*)|
    pub dual_gap: f64,
    /// projection of grad phi(P*) onto the slice tangent (relative)
    pub stationarity_residual: f64,
    pub samples_used: usize,
}

/// Checks the duality characterization of the analytic center at `pstar`:
/// the trace identity `tr((P*)^{-1} P) = N` on the slice, the zero gap
/// between the dual objective and `phi(P*)`, and stationarity of `phi`.
pub fn verify_duality(s: &Spectrahedron, pstar: &SymMatrix) -> Result<DualityReport> {
    let n = s.dim();
    let nf = n as f64;
    let pinv = pd_inverse(pstar)?;

    // Feasible samples: tangent perturbations of P*, shrunk until PD.
    let basis = s.slice_basis()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let uniform = rand::distributions::Uniform::new(-1.0_f64, 1.0);
    let samples_used = 50;
    let mut trace_identity_residual = 0.0_f64;
    for _ in 0..samples_used {
        let mut coords = DVector::zeros(basis.len());
        for c in coords.iter_mut() {
            *c = uniform.sample(&mut rng);
        }
        let mut t = 0.25 * pstar.fro_norm() / (1.0 + coords.norm());
        let p = loop {
            let cand = s.point_from_slice_coords(pstar, &basis, &(&coords * t))?;
            if min_eigenvalue(&cand) > 1e-8 * (1.0 + cand.fro_norm()) {
                break cand;
            }
            t *= 0.5;
            if t < 1e-14 {
                break pstar.clone();
            }
        };
        let r = (frobenius_inner(&pinv, &p)? - nf).abs();
        trace_identity_residual = trace_identity_residual.max(r);
    }

    // Dual objective tr(Y* P*) + log Gamma_N - ((N+1)/2) log det Y* vs phi(P*).
    let y = pinv.scale((nf + 1.0) / 2.0);
    let dual_obj = frobenius_inner(&y, pstar)?
        + log_multivariate_gamma(n, (nf + 1.0) / 2.0)?
        - (nf + 1.0) / 2.0 * log_det_pd(&y)?;
    let dual_gap = (dual_obj - phi(pstar)?.value).abs();

    let stationarity_residual = crate::center::stationarity_check(s, pstar)?;
    Ok(DualityReport { trace_identity_residual, dual_gap, stationarity_residual, samples_used })
}
