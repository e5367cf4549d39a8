//! Information kept by the molecule and leaked to the environment.
//!
//! Entropies are in bits. `χ̂(P, T)` is the Holevo quantity of the uniform
//! ensemble `{T(P^j)/Tr P^j}`, and its complementary counterpart uses the
//! environment output of a minimal dilation of the same channel.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::channels::ComplementaryChannel;
use crate::error::{Error, Result};
use crate::families::{
    check_backward_condition, check_forward_condition, integrate_family, BlochDirection, Condition,
};
use crate::histories::{
    consistency_check, decoherence_functional, Decomposition, HistoryFamily, CONSISTENCY_TOLERANCE,
};
use crate::ptm::{
    apply_ptm, pauli, propagator_closed_form, sigma_dot, BlochState, ModelParams, Op2,
};

/// Step for the one-sided slope of `χ̂_Q` at `t = 0`.
pub const SLOPE_STEP: f64 = 1e-6;

const MUB_TOLERANCE: f64 = 1e-10;

fn to_dmatrix(op: &Op2) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |r, c| op[(r, c)])
}

/// `H₂(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Von Neumann entropy in bits of a Hermitian matrix (the Hermitian part is
/// used). Slightly negative eigenvalues from rounding are clipped to zero.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> f64 {
    let herm = (rho + rho.adjoint()) * C64::from(0.5);
    let ev: Vec<f64> = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .map(|&e| e.max(0.0))
        .collect();
    shannon_entropy(&ev)
}

pub fn von_neumann_entropy2(rho: &Op2) -> f64 {
    von_neumann_entropy(&to_dmatrix(rho))
}

/// Holevo quantity `S(Σ p ρ) − Σ p S(ρ)` in bits.
pub fn holevo_chi(ensemble: &[(f64, DMatrix<C64>)]) -> Result<f64> {
    let Some((_, first)) = ensemble.first() else {
        return Err(Error::InvalidDistribution("empty ensemble".into()));
    };
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if ensemble.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    let shape = first.shape();
    if ensemble.iter().any(|(_, r)| r.shape() != shape) {
        return Err(Error::DimensionMismatch(
            "ensemble states differ in dimension".into(),
        ));
    }
    let mut mix = DMatrix::zeros(shape.0, shape.1);
    let mut avg = 0.0;
    for (p, rho) in ensemble {
        mix += rho * C64::from(*p);
        avg += p * von_neumann_entropy(rho);
    }
    Ok((von_neumann_entropy(&mix) - avg).max(0.0))
}

/// A decomposition used as a source of classical input labels with the
/// uniform prior `1/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputEnsemble {
    pub decomposition: Decomposition,
    pub label: String,
}

impl InputEnsemble {
    pub fn new(decomposition: Decomposition, label: impl Into<String>) -> Self {
        Self {
            decomposition,
            label: label.into(),
        }
    }

    pub fn from_direction(dir: &BlochDirection, label: impl Into<String>) -> Self {
        Self::new(dir.decomposition(), label)
    }

    /// Chirality basis.
    pub fn x() -> Self {
        Self::from_direction(&BlochDirection::x(), "X")
    }

    /// Parity basis.
    pub fn z() -> Self {
        Self::from_direction(&BlochDirection::z(), "Z")
    }

    pub fn prior(&self) -> f64 {
        1.0 / self.decomposition.len() as f64
    }

    /// Normalized inputs `P^j / Tr P^j`.
    pub fn states(&self) -> Vec<Op2> {
        self.decomposition
            .projectors()
            .iter()
            .map(|p| p / p.trace())
            .collect()
    }
}

/// Information about `P1` still in the molecule after `T(t)`.
pub fn chi_hat_direct(p1: &InputEnsemble, params: &ModelParams, t: f64) -> Result<f64> {
    let tm = propagator_closed_form(params, t);
    let prior = p1.prior();
    let ensemble: Vec<_> = p1
        .states()
        .iter()
        .map(|s| (prior, to_dmatrix(&apply_ptm(&tm, s))))
        .collect();
    holevo_chi(&ensemble)
}

/// Information about `P1` carried off by the environment up to `t`.
pub fn chi_hat_complementary(p1: &InputEnsemble, params: &ModelParams, t: f64) -> Result<f64> {
    chi_hat_with(p1, &ComplementaryChannel::for_model(params, t)?)
}

fn chi_hat_with(p1: &InputEnsemble, comp: &ComplementaryChannel) -> Result<f64> {
    let prior = p1.prior();
    let ensemble: Vec<_> = p1.states().iter().map(|s| (prior, comp.apply(s))).collect();
    holevo_chi(&ensemble)
}

/// `χ̂` for the environment output of an explicit dilation.
pub fn chi_hat_for_dilation(p1: &InputEnsemble, comp: &ComplementaryChannel) -> Result<f64> {
    chi_hat_with(p1, comp)
}

/// Shannon mutual information `H(P_1 : P_f)` between the first and last
/// times of a consistent family.
pub fn mutual_information_family(family: &HistoryFamily, initial: &BlochState) -> Result<f64> {
    mutual_information_between(family, initial, 0, family.len() - 1)
}

/// `H(P_i : P_j)` for two times of a consistent family.
pub fn mutual_information_between(
    family: &HistoryFamily,
    initial: &BlochState,
    i: usize,
    j: usize,
) -> Result<f64> {
    if i >= family.len() || j >= family.len() {
        return Err(Error::DimensionMismatch(format!(
            "family has {} times",
            family.len()
        )));
    }
    let d = decoherence_functional(family, initial)?;
    let report = consistency_check(&d, CONSISTENCY_TOLERANCE);
    if !report.passed {
        return Err(Error::NotConsistent {
            max_off_diagonal: report.max_off_diagonal,
            tol: CONSISTENCY_TOLERANCE,
        });
    }
    let r = d.radices();
    let (ri, rj) = (r[i], r[j]);
    let mut joint = vec![0.0; ri * rj];
    for (k, w) in report.weights.iter().enumerate() {
        let l = d.label(k);
        joint[l[i] * rj + l[j]] += w;
    }
    let pi: Vec<f64> = (0..ri)
        .map(|a| (0..rj).map(|b| joint[a * rj + b]).sum())
        .collect();
    let pj: Vec<f64> = (0..rj)
        .map(|b| (0..ri).map(|a| joint[a * rj + b]).sum())
        .collect();
    Ok((shannon_entropy(&pi) + shannon_entropy(&pj) - shannon_entropy(&joint)).max(0.0))
}

/// `|H(P_1 : P_m) − χ̂(P_1, T(t))|` for bases `p1` at 0 and `pm` at `t`.
/// Refuses pairs that do not satisfy the forward condition, the only case
/// in which the two are equal.
pub fn verify_forward_identity(
    p1: &BlochDirection,
    pm: &BlochDirection,
    params: &ModelParams,
    t: f64,
) -> Result<f64> {
    let decomps = [p1.decomposition(), pm.decomposition()];
    let times = [0.0, t];
    let check = check_forward_condition(&decomps, params, &times)?;
    if !check.holds {
        return Err(Error::ForwardConditionViolated {
            residual: check.max_residual,
        });
    }
    let family = HistoryFamily::new(*params, times.to_vec(), decomps.to_vec())?;
    let mi = mutual_information_family(&family, &BlochState::maximally_mixed())?;
    let chi = chi_hat_direct(&InputEnsemble::from_direction(p1, "P1"), params, t)?;
    Ok((mi - chi).abs())
}

/// [`verify_forward_identity`] with the basis at `t` produced by the
/// forward family equations from `p1`.
pub fn verify_forward_identity_along_family(
    p1: &BlochDirection,
    params: &ModelParams,
    t: f64,
) -> Result<f64> {
    if t == 0.0 {
        return verify_forward_identity(p1, p1, params, 0.0);
    }
    let fam = integrate_family(p1, params, Condition::Forward, &[0.0, t])?;
    verify_forward_identity(p1, &fam.samples[1].direction, params, t)
}

/// Backward analog: for bases satisfying the backward condition, compare
/// `H(P_1 : P_m)` with `χ̂(P_m, T†(t))`, the Holevo quantity of the later
/// basis sent back through the adjoint channel (itself a channel here because
/// `T` is unital). Experimental: no closed statement of this identity is
/// relied on elsewhere.
pub fn experimental_backward_identity(
    p1: &BlochDirection,
    pm: &BlochDirection,
    params: &ModelParams,
    t: f64,
) -> Result<f64> {
    let decomps = [p1.decomposition(), pm.decomposition()];
    let times = [0.0, t];
    let check = check_backward_condition(&decomps, params, &times)?;
    if !check.holds {
        return Err(Error::ForwardConditionViolated {
            residual: check.max_residual,
        });
    }
    let family = HistoryFamily::new(*params, times.to_vec(), decomps.to_vec())?;
    let mi = mutual_information_family(&family, &BlochState::maximally_mixed())?;
    let adj = propagator_closed_form(params, t).adjoint();
    let input = InputEnsemble::from_direction(pm, "Pm");
    let ensemble: Vec<_> = input
        .states()
        .iter()
        .map(|s| (input.prior(), to_dmatrix(&apply_ptm(&adj, s))))
        .collect();
    Ok((mi - holevo_chi(&ensemble)?).abs())
}

/// Largest `| |⟨i|j⟩|² − 1/2 |` over rank-one elements of two qubit bases.
pub fn mub_deviation(a: &Decomposition, b: &Decomposition) -> f64 {
    let mut dev = 0.0f64;
    for p in a.projectors() {
        for q in b.projectors() {
            // for rank-one projectors Tr(PQ) = |⟨p|q⟩|²
            dev = dev.max(((p * q).trace().re - 0.5).abs());
        }
    }
    dev
}

/// Slack `log d − χ̂(P1, T(t)) − χ̂(P1', T^c(t))` of the tradeoff bound for
/// mutually unbiased bases.
pub fn mub_bound_check(
    p1: &InputEnsemble,
    p1_prime: &InputEnsemble,
    params: &ModelParams,
    t: f64,
) -> Result<f64> {
    let (a, b) = (&p1.decomposition, &p1_prime.decomposition);
    if a.len() != 2 || b.len() != 2 {
        return Err(Error::NotMutuallyUnbiased {
            deviation: f64::INFINITY,
        });
    }
    let deviation = mub_deviation(a, b);
    if deviation > MUB_TOLERANCE {
        return Err(Error::NotMutuallyUnbiased { deviation });
    }
    Ok(1.0 - chi_hat_direct(p1, params, t)? - chi_hat_complementary(p1_prime, params, t)?)
}

/// Which side of the dilation an information measure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Direct,
    Complementary,
}

/// Quadratic-entropy measure `χ̂_Q(W) = ½ Tr[(T(σ_W))²]` with `σ_W = n·σ`
/// for the diameter `w`, or its complementary counterpart.
pub fn chi_q(w: &BlochDirection, params: &ModelParams, t: f64, side: Side) -> Result<f64> {
    let sigma = sigma_dot(&w.unit_vector());
    let out = match side {
        Side::Direct => to_dmatrix(&apply_ptm(&propagator_closed_form(params, t), &sigma)),
        Side::Complementary => ComplementaryChannel::for_model(params, t)?.apply(&sigma),
    };
    Ok(0.5 * (&out * &out).trace().re)
}

/// Slope of `χ̂_Q` at `t = 0`, as the central difference about `h`:
/// `(f(2h) − f(0)) / 2h`.
pub fn chi_q_slope(w: &BlochDirection, params: &ModelParams, side: Side) -> Result<f64> {
    let h = SLOPE_STEP;
    Ok((chi_q(w, params, 2.0 * h, side)? - chi_q(w, params, 0.0, side)?) / (2.0 * h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoRow {
    pub t: f64,
    pub chi_x_direct: f64,
    pub chi_z_direct: f64,
    pub chi_x_comp: f64,
    pub chi_z_comp: f64,
    /// `χ̂(Z, T) + χ̂(X, T^c)`, bounded by one bit.
    pub sum_zx: f64,
    pub chiq_x_direct: f64,
    pub chiq_z_direct: f64,
    pub chiq_x_comp: f64,
    pub chiq_z_comp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoReport {
    pub params: ModelParams,
    pub rows: Vec<InfoRow>,
}

impl InfoReport {
    pub fn column(&self, f: impl Fn(&InfoRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub const CSV_HEADER: &'static str =
        "t,chi_X_direct,chi_Z_direct,chi_X_comp,chi_Z_comp,sum_ZX,chiQ_X_direct,chiQ_Z_direct,chiQ_X_comp,chiQ_Z_comp";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.t,
                r.chi_x_direct,
                r.chi_z_direct,
                r.chi_x_comp,
                r.chi_z_comp,
                r.sum_zx,
                r.chiq_x_direct,
                r.chiq_z_direct,
                r.chiq_x_comp,
                r.chiq_z_comp
            ));
        }
        out
    }
}

fn info_row(params: &ModelParams, t: f64) -> Result<InfoRow> {
    let tm = propagator_closed_form(params, t);
    let comp = ComplementaryChannel::for_model(params, t)?;
    let (x, z) = (InputEnsemble::x(), InputEnsemble::z());
    let direct = |e: &InputEnsemble| -> Result<f64> {
        let ens: Vec<_> = e
            .states()
            .iter()
            .map(|s| (e.prior(), to_dmatrix(&apply_ptm(&tm, s))))
            .collect();
        holevo_chi(&ens)
    };
    let quad_direct = |n: &Op2| {
        let o = apply_ptm(&tm, n);
        0.5 * (o * o).trace().re
    };
    let quad_comp = |n: &Op2| {
        let o = comp.apply(n);
        0.5 * (&o * &o).trace().re
    };
    let chi_z_direct = direct(&z)?;
    let chi_x_comp = chi_hat_with(&x, &comp)?;
    Ok(InfoRow {
        t,
        chi_x_direct: direct(&x)?,
        chi_z_direct,
        chi_x_comp,
        chi_z_comp: chi_hat_with(&z, &comp)?,
        sum_zx: chi_z_direct + chi_x_comp,
        chiq_x_direct: quad_direct(&pauli(1)),
        chiq_z_direct: quad_direct(&pauli(3)),
        chiq_x_comp: quad_comp(&pauli(1)),
        chiq_z_comp: quad_comp(&pauli(3)),
    })
}

/// Information measures for the X and Z bases on a time grid, evaluated in
/// parallel.
pub fn info_report(params: &ModelParams, grid: &[f64]) -> Result<InfoReport> {
    let rows = grid
        .par_iter()
        .map(|&t| info_row(params, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(InfoReport {
        params: *params,
        rows,
    })
}
