//! Kraus and Choi forms of the molecule's channel and the complementary
//! channel to the environment obtained from a minimal Stinespring dilation.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ptm::{pauli, ModelParams, Op2, PauliTransferMatrix};

/// Choi eigenvalues above this count toward the environment dimension.
pub const KRAUS_THRESHOLD: f64 = 1e-10;
/// Negative Choi eigenvalues beyond this are reported as a non-CP map.
pub const NON_CP_TOLERANCE: f64 = 1e-6;
pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;

/// `J = Σ_ij |i⟩⟨j| ⊗ T(|i⟩⟨j|)`, input factor first. Trace 2 for a
/// trace-preserving map.
pub fn ptm_to_choi(ptm: &PauliTransferMatrix) -> Matrix4<C64> {
    let mut j = Matrix4::<C64>::zeros();
    for r in 0..2 {
        for c in 0..2 {
            let mut e = Op2::zeros();
            e[(r, c)] = C64::from(1.0);
            let out = crate::ptm::apply_ptm(ptm, &e);
            j += e.kronecker(&out);
        }
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<Op2>,
}

impl KrausSet {
    pub fn new(operators: Vec<Op2>) -> Result<Self> {
        let set = Self { operators };
        let defect = set.completeness_defect();
        if defect > COMPLETENESS_TOLERANCE || set.operators.is_empty() {
            return Err(Error::IncompleteKraus { defect });
        }
        Ok(set)
    }

    pub fn operators(&self) -> &[Op2] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Max-entry deviation of `Σ K†K` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(Op2::zeros(), |acc, k| acc + k.adjoint() * k);
        (sum - Op2::identity())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, op: &Op2) -> Op2 {
        self.operators
            .iter()
            .fold(Op2::zeros(), |acc, k| acc + k * op * k.adjoint())
    }

    /// `T_kj = Tr(σ_k Φ(σ_j)) / 2`.
    pub fn to_ptm(&self) -> PauliTransferMatrix {
        let mut m = Matrix4::zeros();
        for j in 0..4 {
            let out = self.apply(&pauli(j));
            for k in 0..4 {
                m[(k, j)] = 0.5 * (pauli(k) * out).trace().re;
            }
        }
        PauliTransferMatrix(m)
    }

    /// Superoperator on row-stacked `vec(ρ)`: `Σ K ⊗ K̄`.
    pub fn superoperator(&self) -> Matrix4<C64> {
        self.operators.iter().fold(Matrix4::zeros(), |acc, k| {
            acc + k.kronecker(&k.map(|c| c.conj()))
        })
    }
}

fn canonical_phase(v: &mut [C64; 4]) {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if let Some(pivot) = v.iter().find(|c| c.norm() >= max - 1e-12) {
        let phase = pivot.conj() / pivot.norm();
        for c in v.iter_mut() {
            *c *= phase;
        }
    }
}

fn lexicographic(a: &[C64; 4], b: &[C64; 4]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Eigendecomposition of the Choi matrix into Kraus operators, largest
/// eigenvalue first, each eigenvector rotated so its largest entry is real
/// and positive.
pub fn choi_to_kraus(choi: &Matrix4<C64>) -> Result<KrausSet> {
    let herm = (choi + choi.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut pairs: Vec<(f64, [C64; 4])> = Vec::new();
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -NON_CP_TOLERANCE {
            return Err(Error::NonCp { eigenvalue: lambda });
        }
        if lambda <= KRAUS_THRESHOLD {
            continue;
        }
        let col = eig.eigenvectors.column(idx);
        let mut v = [col[0], col[1], col[2], col[3]];
        canonical_phase(&mut v);
        pairs.push((lambda, v));
    }
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= 1e-12 {
            lexicographic(&a.1, &b.1)
        } else {
            b.0.total_cmp(&a.0)
        }
    });
    let ops = pairs
        .into_iter()
        .map(|(lambda, v)| {
            let s = C64::from(lambda.sqrt());
            // vec index (input i, output a) -> i*2 + a, so K[a][i] = v[i*2+a]
            Matrix2::new(v[0] * s, v[2] * s, v[1] * s, v[3] * s)
        })
        .collect();
    KrausSet::new(ops)
}

pub fn kraus_from_ptm(ptm: &PauliTransferMatrix) -> Result<KrausSet> {
    choi_to_kraus(&ptm_to_choi(ptm))
}

/// Stinespring isometry `V: C² → C² ⊗ C^{d_E}`, `V|ψ⟩ = Σ_k K_k|ψ⟩ ⊗ |k⟩`.
/// Row index is `a * d_E + k` for system output `a` and environment `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementaryChannel {
    isometry: DMatrix<C64>,
    env_dim: usize,
}

impl ComplementaryChannel {
    pub fn from_kraus(kraus: &KrausSet) -> Self {
        let d = kraus.len();
        let mut v = DMatrix::<C64>::zeros(2 * d, 2);
        for (k, op) in kraus.operators().iter().enumerate() {
            for a in 0..2 {
                for i in 0..2 {
                    v[(a * d + k, i)] = op[(a, i)];
                }
            }
        }
        Self {
            isometry: v,
            env_dim: d,
        }
    }

    /// Minimal dilation of the channel with this transfer matrix.
    pub fn from_ptm(ptm: &PauliTransferMatrix) -> Result<Self> {
        Ok(Self::from_kraus(&kraus_from_ptm(ptm)?))
    }

    /// Dilation of `T(t)` for the model.
    pub fn for_model(params: &ModelParams, t: f64) -> Result<Self> {
        Self::from_ptm(&crate::ptm::propagator_closed_form(params, t))
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn isometry(&self) -> &DMatrix<C64> {
        &self.isometry
    }

    /// Max-entry deviation of `V†V` from the identity.
    pub fn isometry_defect(&self) -> f64 {
        let g = self.isometry.adjoint() * &self.isometry;
        (g - DMatrix::identity(2, 2))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    fn dilate(&self, op: &Op2) -> DMatrix<C64> {
        let a = DMatrix::from_fn(2, 2, |r, c| op[(r, c)]);
        &self.isometry * a * self.isometry.adjoint()
    }

    /// Environment output `Tr_M[V A V†]` for any qubit operator `A` (linear).
    pub fn apply(&self, op: &Op2) -> DMatrix<C64> {
        let d = self.env_dim;
        let full = self.dilate(op);
        DMatrix::from_fn(d, d, |k, l| full[(k, l)] + full[(d + k, d + l)])
    }

    /// Molecule output `Tr_E[V A V†]`; equals the direct channel.
    pub fn apply_direct(&self, op: &Op2) -> Op2 {
        let d = self.env_dim;
        let full = self.dilate(op);
        let mut out = Op2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                out[(a, b)] = (0..d).map(|k| full[(a * d + k, b * d + k)]).sum();
            }
        }
        out
    }

    /// Re-dilate through an environment isometry `U: C^{d_E} → C^{d'}`,
    /// giving `V' = (I ⊗ U) V`. Information measures on the environment are
    /// unchanged by this.
    pub fn redilate(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.ncols() != self.env_dim {
            return Err(Error::DimensionMismatch(format!(
                "isometry has {} columns, environment dimension is {}",
                u.ncols(),
                self.env_dim
            )));
        }
        let gram = u.adjoint() * u;
        let defect = (gram - DMatrix::identity(self.env_dim, self.env_dim))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if defect > COMPLETENESS_TOLERANCE {
            return Err(Error::DimensionMismatch(format!(
                "U is not an isometry (defect {defect:e})"
            )));
        }
        let d_new = u.nrows();
        let mut lift = DMatrix::<C64>::zeros(2 * d_new, 2 * self.env_dim);
        for a in 0..2 {
            lift.view_mut((a * d_new, a * self.env_dim), (d_new, self.env_dim))
                .copy_from(u);
        }
        Ok(Self {
            isometry: lift * &self.isometry,
            env_dim: d_new,
        })
    }
}
