//! Spectrahedron representation: constraint systems `tr(A_k P) = b_k` over the
//! PSD cone, validation, the constraint operator and its conjugated form, and
//! the representation change that makes the conjugated Gram matrix the
//! identity.

use crate::error::{Error, Result};
use crate::symlin::{packed_len, pd_sqrt, smat, svec, SVec, SymMatrix};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Absolute symmetry tolerance for matrices read from instance files.
pub const FILE_SYMMETRY_TOL: f64 = 1e-12;

/// Singular values below this fraction of the largest are treated as rank
/// deficiency during orthonormalization.
pub const RANK_TOL: f64 = 1e-12;

/// `S = {P >= 0 : tr(A_k P) = b_k}` with `1 <= m < N(N+1)/2`.
#[derive(Debug, Clone)]
pub struct Spectrahedron {
    n: usize,
    constraints: Vec<SymMatrix>,
    rhs: DVector<f64>,
    name: Option<String>,
}

impl Spectrahedron {
    pub fn new(
        n: usize,
        constraints: Vec<SymMatrix>,
        rhs: DVector<f64>,
        name: Option<String>,
    ) -> Result<Self> {
        let m = constraints.len();
        if m == 0 || m >= packed_len(n) {
            return Err(Error::InvalidInput(format!(
                "need 1 <= m < N(N+1)/2 = {}, got m = {m}",
                packed_len(n)
            )));
        }
        if rhs.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: rhs.len() });
        }
        for a in &constraints {
            if a.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: a.dim() });
            }
            if !a.is_finite() {
                return Err(Error::InvalidInput("non-finite constraint entry".into()));
            }
        }
        if rhs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite right-hand side".into()));
        }
        Ok(Spectrahedron { n, constraints, rhs, name })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[SymMatrix] {
        &self.constraints
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// `(tr(A_1 X), ..., tr(A_m X))`.
    pub fn apply_a(&self, x: &SymMatrix) -> Result<DVector<f64>> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.dim() });
        }
        let xv = svec(x);
        let mut out = DVector::zeros(self.constraints.len());
        for (k, a) in self.constraints.iter().enumerate() {
            out[k] = svec(a).dot(&xv)?;
        }
        Ok(out)
    }

    /// Whether X satisfies the equality constraints within the standard
    /// tolerance `1e-8 * (1 + ||b||)`.
    pub fn is_on_slice(&self, x: &SymMatrix) -> bool {
        match self.apply_a(x) {
            Ok(v) => (v - &self.rhs).norm() <= 1e-8 * (1.0 + self.rhs.norm()),
            Err(_) => false,
        }
    }

    /// Residual `||A(X) - b||`.
    pub fn feasibility_residual(&self, x: &SymMatrix) -> Result<f64> {
        Ok((self.apply_a(x)? - &self.rhs).norm())
    }

    pub fn operator_a(&self) -> ConstraintOperatorA {
        let l = packed_len(self.n);
        let m = self.constraints.len();
        let mut rows = DMatrix::zeros(m, l);
        for (k, a) in self.constraints.iter().enumerate() {
            rows.row_mut(k).copy_from(&svec(a).coords().transpose());
        }
        ConstraintOperatorA { rows }
    }

    /// Conjugated operator at a PD point: rows are `svec(sqrt(P) A_k sqrt(P))`.
    pub fn build_b(&self, pstar: &SymMatrix) -> Result<ConjugatedOperatorB> {
        let s = pd_sqrt(pstar)?;
        // pd_sqrt accepts PSD; the conjugated operator needs strict definiteness.
        crate::symlin::log_det_pd(pstar)?;
        let sd = s.to_dense();
        let l = packed_len(self.n);
        let m = self.constraints.len();
        let mut rows = DMatrix::zeros(m, l);
        let mut zs = Vec::with_capacity(m);
        for (k, a) in self.constraints.iter().enumerate() {
            let z = SymMatrix::from_dense_symmetrize(&(&sd * a.to_dense() * &sd));
            rows.row_mut(k).copy_from(&svec(&z).coords().transpose());
            zs.push(z);
        }
        Ok(ConjugatedOperatorB { center: pstar.clone(), rows, z_mats: zs })
    }

    /// Structural report: constraint rank, dimension bookkeeping, and
    /// strict-feasibility evidence from the phase-1 solve.
    pub fn validate(&self) -> ValidationReport {
        let m = self.constraints.len();
        let ambient = packed_len(self.n);
        let rank = self.operator_a().rank();
        let rank_ok = rank == m;
        let feasibility = if rank_ok {
            match crate::center::find_strictly_feasible(self) {
                Ok(_) => FeasibilityEvidence::StrictlyFeasible,
                Err(Error::Infeasible) => FeasibilityEvidence::Infeasible,
                Err(Error::NotStrictlyFeasible) => FeasibilityEvidence::BoundaryOnly,
                Err(e) => FeasibilityEvidence::Unknown(e.to_string()),
            }
        } else {
            FeasibilityEvidence::Unknown("rank-deficient constraints".into())
        };
        ValidationReport { n: self.n, m, ambient_dim: ambient, rank, rank_ok, feasibility }
    }

    /// Replaces constraints by `A' = CA, b' = Cb` for invertible m x m C.
    /// The feasible set is unchanged.
    pub fn recombine(&self, c: &DMatrix<f64>) -> Result<Spectrahedron> {
        let m = self.constraints.len();
        if c.nrows() != m || c.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: c.nrows() });
        }
        let mut new_constraints = Vec::with_capacity(m);
        for i in 0..m {
            let mut acc = SymMatrix::zeros(self.n);
            for j in 0..m {
                acc = acc.axpy(c[(i, j)], &self.constraints[j])?;
            }
            new_constraints.push(acc);
        }
        let new_rhs = c * &self.rhs;
        Spectrahedron::new(self.n, new_constraints, new_rhs, self.name.clone())
    }

    /// Rewrites the constraint system so that the conjugated operator at the
    /// analytic center `pstar` satisfies `B' B'^T = I_m`, via the thin SVD
    /// `B = U D V^T` and the change of basis `C = D^{-1} U^T`.
    pub fn orthonormalize(&self, pstar: &SymMatrix) -> Result<Spectrahedron> {
        let b = self.build_b(pstar)?;
        let svd = b.rows.clone().svd(true, false);
        let u = svd.u.as_ref().expect("svd requested u");
        let sv = &svd.singular_values;
        let sigma_max = sv.iter().fold(0.0_f64, |a, &x| a.max(x));
        let m = self.constraints.len();
        let mut rank = 0;
        for &s in sv.iter() {
            if s > RANK_TOL * sigma_max {
                rank += 1;
            }
        }
        if rank < m {
            return Err(Error::RankDeficient { rank, m });
        }
        // C = D^{-1} U^T
        let mut c = u.transpose();
        for i in 0..m {
            let s = sv[i];
            for j in 0..m {
                c[(i, j)] /= s;
            }
        }
        self.recombine(&c)
    }

    /// Orthonormal basis of `ker(A)` in svec coordinates: `d = N(N+1)/2 - m`
    /// vectors; any feasible point plus their span stays on the affine slice.
    pub fn slice_basis(&self) -> Result<Vec<DVector<f64>>> {
        let a = self.operator_a();
        let m = self.constraints.len();
        let l = packed_len(self.n);
        // Orthonormalize the constraint rows first.
        let svd = a.rows.clone().svd(false, true);
        let vt = svd.v_t.as_ref().expect("svd requested v_t");
        let sv = &svd.singular_values;
        let sigma_max = sv.iter().fold(0.0_f64, |x, &y| x.max(y));
        let mut span: Vec<DVector<f64>> = Vec::with_capacity(l);
        let mut rank = 0;
        for i in 0..sv.len() {
            if sv[i] > RANK_TOL * sigma_max {
                span.push(vt.row(i).transpose());
                rank += 1;
            }
        }
        if rank < m {
            return Err(Error::RankDeficient { rank, m });
        }
        // Extend to a full orthonormal basis by Gram-Schmidt over coordinate
        // vectors; the added vectors span the orthogonal complement = ker(A).
        let mut kernel: Vec<DVector<f64>> = Vec::with_capacity(l - m);
        for i in 0..l {
            if span.len() == l {
                break;
            }
            let mut v = DVector::zeros(l);
            v[i] = 1.0;
            for _pass in 0..2 {
                for u in &span {
                    let c = u.dot(&v);
                    v -= u * c;
                }
            }
            let nrm = v.norm();
            if nrm > 1e-8 {
                let v = v / nrm;
                span.push(v.clone());
                kernel.push(v);
            }
        }
        if kernel.len() != l - m {
            return Err(Error::RankDeficient { rank: m + kernel.len(), m: l });
        }
        Ok(kernel)
    }

    /// Reconstructs the symmetric matrix `P0 + sum_i c_i * basis_i` from slice
    /// coordinates.
    pub fn point_from_slice_coords(
        &self,
        p0: &SymMatrix,
        basis: &[DVector<f64>],
        coords: &DVector<f64>,
    ) -> Result<SymMatrix> {
        if coords.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: coords.len() });
        }
        let mut v = svec(p0).coords();
        for (i, b) in basis.iter().enumerate() {
            v += b * coords[i];
        }
        Ok(smat(&SVec::from_coords(self.n, &v)?))
    }

    // ----- file format -----

    pub fn from_json_str(s: &str) -> Result<Spectrahedron> {
        let raw: InstanceJson = serde_json::from_str(s)
            .map_err(|e| Error::InvalidInput(format!("instance parse error: {e}")))?;
        raw.into_spectrahedron()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&InstanceJson::from_spectrahedron(self))
            .expect("instance serialization cannot fail")
    }

    pub fn from_file(path: &std::path::Path) -> Result<Spectrahedron> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&s)
    }

    pub fn to_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
    }
}

/// Stacked svec rows of the constraint matrices: applying to `svec(X)` yields
/// `(tr(A_1 X), ..., tr(A_m X))`.
#[derive(Debug, Clone)]
pub struct ConstraintOperatorA {
    pub rows: DMatrix<f64>,
}

impl ConstraintOperatorA {
    pub fn apply(&self, x: &SymMatrix) -> DVector<f64> {
        &self.rows * svec(x).coords()
    }

    /// Gram matrix with entries `tr(A_i A_j)`.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.rows * self.rows.transpose()
    }

    pub fn rank(&self) -> usize {
        let svd = self.rows.clone().svd(false, false);
        let sigma_max = svd.singular_values.iter().fold(0.0_f64, |a, &x| a.max(x));
        if sigma_max == 0.0 {
            return 0;
        }
        svd.singular_values.iter().filter(|&&s| s > RANK_TOL * sigma_max).count()
    }
}

/// Constraint operator conjugated by the square root of a PD point:
/// rows are `svec(Z_k)` with `Z_k = sqrt(P) A_k sqrt(P)`.
#[derive(Debug, Clone)]
pub struct ConjugatedOperatorB {
    pub center: SymMatrix,
    pub rows: DMatrix<f64>,
    z_mats: Vec<SymMatrix>,
}

impl ConjugatedOperatorB {
    /// Gram matrix with entries `tr(Z_i Z_j)`.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.rows * self.rows.transpose()
    }

    pub fn z_matrices(&self) -> &[SymMatrix] {
        &self.z_mats
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FeasibilityEvidence {
    StrictlyFeasible,
    Infeasible,
    BoundaryOnly,
    Unknown(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub m: usize,
    pub ambient_dim: usize,
    pub rank: usize,
    pub rank_ok: bool,
    pub feasibility: FeasibilityEvidence,
}

impl ValidationReport {
    pub fn is_usable(&self) -> bool {
        self.rank_ok && self.feasibility == FeasibilityEvidence::StrictlyFeasible
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintJson {
    matrix: Vec<Vec<f64>>,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    constraints: Vec<ConstraintJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl InstanceJson {
    fn into_spectrahedron(self) -> Result<Spectrahedron> {
        let n = self.n;
        let mut constraints = Vec::with_capacity(self.constraints.len());
        let mut rhs = DVector::zeros(self.constraints.len());
        for (k, c) in self.constraints.iter().enumerate() {
            if c.matrix.len() != n || c.matrix.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput(format!(
                    "constraint {k}: matrix is not {n} x {n}"
                )));
            }
            let dense = DMatrix::from_fn(n, n, |i, j| c.matrix[i][j]);
            constraints.push(SymMatrix::from_dense(&dense, FILE_SYMMETRY_TOL)?);
            rhs[k] = c.b;
        }
        Spectrahedron::new(n, constraints, rhs, self.name)
    }

    fn from_spectrahedron(s: &Spectrahedron) -> InstanceJson {
        let n = s.n;
        InstanceJson {
            n,
            constraints: s
                .constraints
                .iter()
                .zip(s.rhs.iter())
                .map(|(a, &b)| ConstraintJson {
                    matrix: (0..n)
                        .map(|i| (0..n).map(|j| a.get(i, j)).collect())
                        .collect(),
                    b,
                })
                .collect(),
            name: s.name.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symlin::frobenius_inner;
    use rand::{Rng, SeedableRng};

    fn spectraplex_eye(n: usize) -> Spectrahedron {
        Spectrahedron::new(
            n,
            vec![SymMatrix::identity(n)],
            DVector::from_element(1, 1.0),
            None,
        )
        .unwrap()
    }

    fn random_instance(n: usize, m: usize, seed: u64) -> Spectrahedron {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let constraints: Vec<SymMatrix> = (0..m)
            .map(|_| SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        // rhs chosen so that a PD point is feasible
        let p = SymMatrix::identity(n).scale(0.3);
        let mut rhs = DVector::zeros(m);
        for (k, a) in constraints.iter().enumerate() {
            rhs[k] = frobenius_inner(a, &p).unwrap();
        }
        Spectrahedron::new(n, constraints, rhs, None).unwrap()
    }

    #[test]
    fn apply_a_examples() {
        let s = spectraplex_eye(4);
        let v = s.apply_a(&SymMatrix::identity(4).scale(0.25)).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        let z = s.apply_a(&SymMatrix::zeros(4)).unwrap();
        assert_eq!(z[0], 0.0);
    }

    #[test]
    fn apply_a_is_linear() {
        let s = random_instance(4, 3, 5);
        let x = SymMatrix::from_fn(4, |i, j| (i + 2 * j) as f64);
        let y = SymMatrix::from_fn(4, |i, j| (i as f64) - (j as f64) * 0.5);
        let lhs = s.apply_a(&x.axpy(2.5, &y).unwrap()).unwrap();
        let rhs = s.apply_a(&x).unwrap() + s.apply_a(&y).unwrap() * 2.5;
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn validate_flags_duplicates() {
        let a = SymMatrix::identity(3);
        let s = Spectrahedron::new(
            3,
            vec![a.clone(), a],
            DVector::from_vec(vec![1.0, 1.0]),
            None,
        )
        .unwrap();
        let r = s.validate();
        assert!(!r.rank_ok);
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn validate_spectraplex() {
        let r = spectraplex_eye(3).validate();
        assert!(r.rank_ok && r.m == 1);
        assert_eq!(r.feasibility, FeasibilityEvidence::StrictlyFeasible);
    }

    #[test]
    fn build_b_gram_examples() {
        let n = 5;
        let s = spectraplex_eye(n);
        // at P = I/N the single Gram entry is tr((I/N)^2) = 1/N
        let b = s.build_b(&SymMatrix::identity(n).scale(1.0 / n as f64)).unwrap();
        let g = b.gram();
        assert!((g[(0, 0)] - 1.0 / n as f64).abs() < 1e-12);
        // at P = I the conjugated rows equal the constraint rows
        let b = s.build_b(&SymMatrix::identity(n)).unwrap();
        assert!((&b.rows - s.operator_a().rows).norm() < 1e-12);
    }

    #[test]
    fn gram_matches_traces() {
        let s = random_instance(5, 3, 9);
        let p = SymMatrix::identity(5).scale(0.7);
        let b = s.build_b(&p).unwrap();
        let g = b.gram();
        for i in 0..3 {
            for j in 0..3 {
                let tr = frobenius_inner(&b.z_matrices()[i], &b.z_matrices()[j]).unwrap();
                assert!((g[(i, j)] - tr).abs() < 1e-12 * (1.0 + tr.abs()));
            }
        }
    }

    #[test]
    fn orthonormalize_identity_gram() {
        let s = random_instance(5, 3, 11);
        let p = SymMatrix::identity(5).scale(0.4);
        let s2 = s.orthonormalize(&p).unwrap();
        let g = s2.build_b(&p).unwrap().gram();
        assert!((&g - DMatrix::<f64>::identity(3, 3)).norm() < 1e-10);
        // idempotent up to orthogonal mixing
        let s3 = s2.orthonormalize(&p).unwrap();
        let g3 = s3.build_b(&p).unwrap().gram();
        assert!((&g3 - DMatrix::<f64>::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn recombination_preserves_gram_ratio() {
        let s = random_instance(5, 3, 13);
        let p = SymMatrix::identity(5).scale(0.4);
        let ratio = |inst: &Spectrahedron| {
            let ga = inst.operator_a().gram();
            let gb = inst.build_b(&p).unwrap().gram();
            ga.determinant() / gb.determinant()
        };
        let r0 = ratio(&s);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let c = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0))
            + DMatrix::<f64>::identity(3, 3) * 2.0;
        let r1 = ratio(&s.recombine(&c).unwrap());
        assert!((r0 - r1).abs() < 1e-8 * r0.abs());
        let r2 = ratio(&s.orthonormalize(&p).unwrap());
        assert!((r0 - r2).abs() < 1e-8 * r0.abs());
    }

    #[test]
    fn slice_basis_orthonormal_and_in_kernel() {
        let s = random_instance(4, 3, 17);
        let basis = s.slice_basis().unwrap();
        assert_eq!(basis.len(), 10 - 3);
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let d = u.dot(v);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
            let img = &s.operator_a().rows * u;
            assert!(img.norm() < 1e-10);
        }
    }

    #[test]
    fn slice_basis_codim_one_kernel() {
        // m = binom(3,2)... for n=2: L = 3, take m = 2 -> kernel dim 1
        let s = random_instance(2, 2, 19);
        assert_eq!(s.slice_basis().unwrap().len(), 1);
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        let s = random_instance(3, 2, 23).with_name("roundtrip");
        let text = s.to_json_string();
        let back = Spectrahedron::from_json_str(&text).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.num_constraints(), 2);
        assert_eq!(back.name(), Some("roundtrip"));
        assert!((back.rhs() - s.rhs()).norm() < 1e-15);

        let bad = r#"{"n":2,"constraints":[{"matrix":[[1.0,0.5],[0.4,1.0]],"b":1.0}]}"#;
        assert!(Spectrahedron::from_json_str(bad).is_err());
    }

    #[test]
    fn m_out_of_range_rejected() {
        let err = Spectrahedron::new(
            2,
            vec![SymMatrix::identity(2); 3],
            DVector::from_vec(vec![1.0; 3]),
            None,
        );
        assert!(err.is_err());
    }
}
