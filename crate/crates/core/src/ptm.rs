//! Dynamics of the two-level molecule as 4×4 Pauli transfer matrices.
//!
//! Operators on the qubit are expanded as `ρ = Σ_j ρ_j σ_j` in the basis
//! `(I, X, Y, Z)`; a superoperator `T` acts on the coefficient column vector.
//! Units have ħ = 1, so `omega` is both the level splitting and the bare
//! tunneling (precession) frequency.

use std::fmt;

use nalgebra::{Matrix2, Matrix4, Vector3, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ode::{Integrator, OdeOptions};

pub type Op2 = Matrix2<C64>;

/// Planck's constant in the model's units.
pub const HBAR: f64 = 1.0;

/// `|ξ| t` below which the hyperbolic/trigonometric pair switches to a series.
const SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub gamma: f64,
    /// Correlation time. Only used to warn about intervals that are too short
    /// to be physically meaningful.
    pub tau_c: f64,
}

impl ModelParams {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        Self::with_tau_c(omega, gamma, 0.0)
    }

    pub fn with_tau_c(omega: f64, gamma: f64, tau_c: f64) -> Result<Self> {
        let p = Self {
            omega,
            gamma,
            tau_c,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("gamma", self.gamma),
            ("tau_c", self.tau_c),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }

    /// `γ² − ω²`; its sign selects the dynamical regime.
    pub fn discriminant(&self) -> f64 {
        (self.gamma - self.omega) * (self.gamma + self.omega)
    }

    pub fn regime(&self) -> Regime {
        let scale = self.gamma.max(self.omega);
        if (self.gamma - self.omega).abs() <= 1e-12 * scale || scale == 0.0 {
            Regime::Critical
        } else if self.gamma > self.omega {
            Regime::Overdamped
        } else {
            Regime::Underdamped
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// γ > ω: strong decoherence, real decay rates.
    Overdamped,
    /// γ = ω: the phase transition.
    Critical,
    /// γ < ω: weak decoherence, damped oscillation at η = √(ω² − γ²).
    Underdamped,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Overdamped => "overdamped",
            Regime::Critical => "critical",
            Regime::Underdamped => "underdamped",
        })
    }
}

/// Pauli matrix `σ_k` with `k = 0..4` for `(I, X, Y, Z)`.
pub fn pauli(k: usize) -> Op2 {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match k {
        0 => Matrix2::new(o, z, z, o),
        1 => Matrix2::new(z, o, o, z),
        2 => Matrix2::new(z, -i, i, z),
        3 => Matrix2::new(o, z, z, -o),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// Complex coefficients `c_j = Tr(σ_j A) / 2` so that `A = Σ c_j σ_j`.
pub fn pauli_coefficients(op: &Op2) -> [C64; 4] {
    let mut c = [C64::new(0.0, 0.0); 4];
    for (j, cj) in c.iter_mut().enumerate() {
        *cj = (pauli(j) * op).trace() * 0.5;
    }
    c
}

pub fn from_pauli_coefficients(c: &[C64; 4]) -> Op2 {
    (0..4).fold(Op2::zeros(), |acc, k| acc + pauli(k) * c[k])
}

/// `n·σ` for a real 3-vector.
pub fn sigma_dot(n: &Vector3<f64>) -> Op2 {
    pauli(1) * C64::from(n[0]) + pauli(2) * C64::from(n[1]) + pauli(3) * C64::from(n[2])
}

/// Real 4×4 superoperator matrix in the `(I, X, Y, Z)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTransferMatrix(pub Matrix4<f64>);

impl PauliTransferMatrix {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self(self.0 * other.0)
    }

    /// Adjoint under the Frobenius inner product. The Pauli basis is
    /// orthogonal with uniform norm, so this is the transpose.
    pub fn adjoint(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        (self.0[(0, 0)] - 1.0).abs() <= tol && (1..4).all(|j| self.0[(0, j)].abs() <= tol)
    }

    /// Lower-right 3×3 block acting on Bloch vectors (the map is unital for
    /// this model so the block fully describes the action on states).
    pub fn bloch_block(&self) -> nalgebra::Matrix3<f64> {
        self.0.fixed_view::<3, 3>(1, 1).into_owned()
    }

    pub fn apply_state(&self, state: &BlochState) -> BlochState {
        BlochState {
            coeffs: self.0 * state.coeffs,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).amax()
    }

    /// Row-major CSV, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..4 {
            let row: Vec<String> = (0..4).map(|c| format!("{}", self.0[(r, c)])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut m = Matrix4::zeros();
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "expected 4 rows, got {}",
                rows.len()
            )));
        }
        for (r, line) in rows.iter().enumerate() {
            let vals: Vec<&str> = line.split(',').collect();
            if vals.len() != 4 {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has {} columns",
                    vals.len()
                )));
            }
            for (c, v) in vals.iter().enumerate() {
                m[(r, c)] = v
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidConfig(format!("bad matrix entry `{v}`: {e}")))?;
            }
        }
        Ok(Self(m))
    }
}

/// Density operator stored as Pauli coefficients `(ρ_0, ρ_x, ρ_y, ρ_z)`, so
/// `ρ_0 = 1/2` for unit trace and the Bloch vector is `2 (ρ_x, ρ_y, ρ_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub coeffs: Vector4<f64>,
}

impl BlochState {
    pub fn maximally_mixed() -> Self {
        Self::from_bloch_vector(Vector3::zeros())
    }

    pub fn from_bloch_vector(r: Vector3<f64>) -> Self {
        Self {
            coeffs: Vector4::new(0.5, 0.5 * r[0], 0.5 * r[1], 0.5 * r[2]),
        }
    }

    /// Hermitian part of `rho` expanded in the Pauli basis.
    pub fn from_density(rho: &Op2) -> Self {
        let c = pauli_coefficients(rho);
        Self {
            coeffs: Vector4::new(c[0].re, c[1].re, c[2].re, c[3].re),
        }
    }

    pub fn bloch_vector(&self) -> Vector3<f64> {
        Vector3::new(
            2.0 * self.coeffs[1],
            2.0 * self.coeffs[2],
            2.0 * self.coeffs[3],
        )
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.coeffs[0]
    }

    /// Length of the Bloch vector: 1 for pure states, 0 for `I/2`.
    pub fn radius(&self) -> f64 {
        self.bloch_vector().norm()
    }

    pub fn density(&self) -> Op2 {
        let c = self.coeffs.map(C64::from);
        from_pauli_coefficients(&[c[0], c[1], c[2], c[3]])
    }
}

/// Generator `S` of `T(t) = exp(tS)`.
pub fn generator(params: &ModelParams) -> PauliTransferMatrix {
    let w = params.omega;
    let g = params.gamma;
    #[rustfmt::skip]
    let s = Matrix4::new(
        0.0, 0.0, 0.0,       0.0,
        0.0, 0.0, -w,        0.0,
        0.0, w,   -2.0 * g,  0.0,
        0.0, 0.0, 0.0,       -2.0 * g,
    );
    PauliTransferMatrix(s)
}

/// `e^{-γt} cosh(ξt)` and `e^{-γt} sinh(ξt)/ξ` for `ξ² = disc`, continued to
/// `cos`/`sin` for negative `disc`. Uses a series when `|ξ|t` is tiny and
/// separated exponentials when the hyperbolic functions would overflow.
pub(crate) fn damped_pair(gamma: f64, omega: f64, t: f64) -> (f64, f64) {
    let disc = (gamma - omega) * (gamma + omega);
    let decay = (-gamma * t).exp();
    let (c, sh) = oscillator_pair(disc, t);
    if disc > 0.0 {
        let xi = disc.sqrt();
        if xi * t > 30.0 {
            // e^{(ξ-γ)t} with ξ - γ = -ω²/(γ+ξ) written without cancellation
            let slow = (-omega * omega / (gamma + xi) * t).exp();
            let fast = (-(gamma + xi) * t).exp();
            return (0.5 * (slow + fast), 0.5 * (slow - fast) / xi);
        }
    }
    (decay * c, decay * sh)
}

/// `(cosh ξt, sinh(ξt)/ξ)` with `ξ² = disc` (trigonometric for `disc < 0`).
pub(crate) fn oscillator_pair(disc: f64, t: f64) -> (f64, f64) {
    let s = disc * t * t;
    if s.abs().sqrt() < SERIES_THRESHOLD {
        let c = 1.0 + s / 2.0 + s * s / 24.0 + s * s * s / 720.0;
        let sh = t * (1.0 + s / 6.0 + s * s / 120.0 + s * s * s / 5040.0);
        (c, sh)
    } else if disc > 0.0 {
        let xi = disc.sqrt();
        ((xi * t).cosh(), (xi * t).sinh() / xi)
    } else {
        let eta = (-disc).sqrt();
        ((eta * t).cos(), (eta * t).sin() / eta)
    }
}

/// Closed-form `T(t)` in all three regimes.
pub fn propagator_closed_form(params: &ModelParams, t: f64) -> PauliTransferMatrix {
    let g = params.gamma;
    let w = params.omega;
    let (ec, esh) = damped_pair(g, w, t);
    let a = ec + g * esh;
    let b = w * esh;
    let c = ec - g * esh;
    let zz = (-2.0 * g * t).exp();
    #[rustfmt::skip]
    let m = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, a,   -b,  0.0,
        0.0, b,   c,   0.0,
        0.0, 0.0, 0.0, zz,
    );
    PauliTransferMatrix(m)
}

/// `T(t)` by adaptive integration of `dT/dt = S T` from the identity.
pub fn propagator_numeric(params: &ModelParams, t: f64) -> Result<PauliTransferMatrix> {
    propagator_numeric_with(params, t, OdeOptions::default().with_tolerance(1e-13))
}

pub fn propagator_numeric_with(
    params: &ModelParams,
    t: f64,
    opts: OdeOptions,
) -> Result<PauliTransferMatrix> {
    let s = generator(params).0;
    let rhs = move |_t: f64, y: &[f64; 16]| {
        let m = Matrix4::from_column_slice(y);
        let d = s * m;
        let mut out = [0.0; 16];
        out.copy_from_slice(d.as_slice());
        out
    };
    let mut y0 = [0.0; 16];
    y0.copy_from_slice(Matrix4::<f64>::identity().as_slice());
    let y = Integrator::new(rhs, opts).advance(0.0, y0, t)?;
    Ok(PauliTransferMatrix(Matrix4::from_column_slice(&y)))
}

/// Matrix exponential by scaling and squaring with a diagonal [6/6] Padé
/// approximant. After scaling `‖A‖₁ ≤ 1/2` the truncation error is below
/// 1e-17, far under what the closed-form checks need.
pub fn expm(a: &Matrix4<f64>) -> Matrix4<f64> {
    const Q: usize = 6;
    let norm = (0..4)
        .map(|c| (0..4).map(|r| a[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);

    // c_k = (2q-k)! q! / ((2q)! k! (q-k)!)
    let mut coeff = 1.0;
    let mut numer = Matrix4::identity();
    let mut denom = Matrix4::identity();
    let mut power = Matrix4::identity();
    for k in 1..=Q {
        coeff *= (Q - k + 1) as f64 / (k * (2 * Q - k + 1)) as f64;
        power *= scaled;
        numer += power * coeff;
        denom += power * if k % 2 == 0 { coeff } else { -coeff };
    }
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for ‖A‖ ≤ 1/2");
    for _ in 0..squarings {
        r = r * r;
    }
    r
}

/// `exp(tS)` through [`expm`].
pub fn propagator_expm(params: &ModelParams, t: f64) -> PauliTransferMatrix {
    PauliTransferMatrix(expm(&(generator(params).0 * t)))
}

/// Apply a transfer matrix to an arbitrary (possibly non-Hermitian) operator
/// by extending it linearly over complex Pauli coefficients.
pub fn apply_ptm(ptm: &PauliTransferMatrix, op: &Op2) -> Op2 {
    let c = pauli_coefficients(op);
    let mut out = [C64::new(0.0, 0.0); 4];
    for (k, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|j| c[j] * ptm.0[(k, j)]).sum();
    }
    from_pauli_coefficients(&out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub lambdas: [C64; 4],
    /// ξ when γ ≥ ω, otherwise η; see [`EigenSystem::xi`] for the complex form.
    pub xi_or_eta: f64,
    pub left_vectors: [[C64; 4]; 4],
    pub right_vectors: [[C64; 4]; 4],
    pub regime: Regime,
}

impl EigenSystem {
    /// ξ as a complex number (`iη` in the underdamped regime).
    pub fn xi(&self) -> C64 {
        match self.regime {
            Regime::Underdamped => C64::new(0.0, self.xi_or_eta),
            _ => C64::new(self.xi_or_eta, 0.0),
        }
    }
}

/// Eigenvalues `(0, −γ+ξ, −γ−ξ, −2γ)` of the generator with the unnormalized
/// left and right eigenvectors of the oscillating block.
///
/// The block vectors are paired with the eigenvalue they actually satisfy:
/// `(γ+ξ, ω)` is the right vector of `−γ+ξ`, `(γ−ξ, ω)` that of `−γ−ξ`.
pub fn eigen_system(params: &ModelParams) -> EigenSystem {
    let g = params.gamma;
    let w = params.omega;
    let regime = params.regime();
    let disc = params.discriminant();
    let zero = C64::new(0.0, 0.0);

    let (xi, xi_or_eta, l2, l3) = match regime {
        Regime::Underdamped => {
            let eta = (-disc).sqrt();
            (
                C64::new(0.0, eta),
                eta,
                C64::new(-g, eta),
                C64::new(-g, -eta),
            )
        }
        Regime::Critical => (zero, 0.0, C64::from(-g), C64::from(-g)),
        Regime::Overdamped => {
            let xi = disc.sqrt();
            // -γ + ξ = -ω²/(γ + ξ) avoids cancellation when γ ≫ ω
            (
                C64::from(xi),
                xi,
                C64::from(-w * w / (g + xi)),
                C64::from(-g - xi),
            )
        }
    };

    let gc = C64::from(g);
    let wc = C64::from(w);
    let block_vec = |p: C64, q: C64| [zero, p, q, zero];
    let mut right2 = block_vec(gc + xi, wc);
    let mut left2 = block_vec(-gc - xi, wc);
    let mut right3 = block_vec(gc - xi, wc);
    let mut left3 = block_vec(xi - gc, wc);
    // ω = 0 makes one of the pairs vanish; (−ω, λ) and (ω, λ) are the same
    // eigenvectors up to scale and stay nonzero there.
    let tiny = |v: &[C64; 4]| v.iter().map(|c| c.norm_sqr()).sum::<f64>() < 1e-300;
    if tiny(&right2) {
        right2 = block_vec(-wc, l2);
        left2 = block_vec(wc, l2);
    }
    if tiny(&right3) {
        right3 = block_vec(-wc, l3);
        left3 = block_vec(wc, l3);
    }

    let e1 = [C64::from(1.0), zero, zero, zero];
    let e4 = [zero, zero, zero, C64::from(1.0)];
    EigenSystem {
        lambdas: [zero, l2, l3, C64::from(-2.0 * g)],
        xi_or_eta,
        left_vectors: [e1, left2, left3, e4],
        right_vectors: [e1, right2, right3, e4],
        regime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(omega: f64, gamma: f64) -> ModelParams {
        ModelParams::new(omega, gamma).unwrap()
    }

    #[test]
    fn params_reject_negative() {
        assert!(ModelParams::new(1.0, -0.1).is_err());
        assert!(ModelParams::new(-1.0, 0.1).is_err());
        assert!(ModelParams::with_tau_c(1.0, 0.1, -1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn generator_examples() {
        assert_eq!(generator(&p(0.0, 0.0)).0, Matrix4::zeros());
        let s = generator(&p(0.8, 2.0)).0;
        assert_eq!(s[(1, 2)], -0.8);
        assert_eq!(s[(2, 1)], 0.8);
        assert_eq!(s[(2, 2)], -4.0);
        assert_eq!(s[(3, 3)], -4.0);
    }

    #[test]
    fn free_precession_is_rotation() {
        let params = p(1.0, 0.0);
        let t = PI / 2.0;
        let m = propagator_closed_form(&params, t).0;
        assert!(m[(1, 1)].abs() < 1e-15 && m[(2, 2)].abs() < 1e-15);
        assert!((m[(2, 1)] - 1.0).abs() < 1e-15 && (m[(1, 2)] + 1.0).abs() < 1e-15);
        let via_expm = propagator_expm(&params, t);
        assert!(via_expm.max_abs_diff(&PauliTransferMatrix(m)) < 1e-13);
    }

    #[test]
    fn identity_at_zero() {
        for params in [p(0.8, 2.0), p(1.0, 1.0), p(20.0, 1.0)] {
            let m = propagator_closed_form(&params, 0.0);
            assert_eq!(m.0, Matrix4::identity());
            assert_eq!(
                propagator_numeric(&params, 0.0).unwrap().0,
                Matrix4::identity()
            );
        }
    }

    #[test]
    fn overdamped_a_coefficient() {
        let params = p(0.8, 2.0);
        let xi: f64 = (4.0f64 - 0.64).sqrt();
        assert!((xi - 1.833030).abs() < 1e-6);
        let a = xi.cosh() + 2.0 / xi * xi.sinh();
        assert!((a - 6.530304).abs() < 1e-6);
        let m = propagator_closed_form(&params, 1.0).0;
        assert!((m[(1, 1)] - (-2.0f64).exp() * a).abs() < 1e-14);
        assert!(propagator_expm(&params, 1.0).max_abs_diff(&PauliTransferMatrix(m)) < 1e-12);
    }

    #[test]
    fn critical_form() {
        let params = p(1.0, 1.0);
        let m = propagator_closed_form(&params, 2.0).0;
        let e = (-2.0f64).exp();
        assert!((m[(1, 1)] - 3.0 * e).abs() < 1e-14);
        assert!((m[(2, 1)] - 2.0 * e).abs() < 1e-14);
        assert!((m[(1, 2)] + 2.0 * e).abs() < 1e-14);
        assert!((m[(2, 2)] + e).abs() < 1e-14);
        let num = propagator_numeric(&params, 2.0).unwrap();
        assert!(num.max_abs_diff(&PauliTransferMatrix(m)) < 1e-10);
    }

    #[test]
    fn series_branch_is_continuous_across_critical_point() {
        let t = 1.7;
        let crit = propagator_closed_form(&p(1.0, 1.0), t);
        for eps in [1e-12, 1e-10, 1e-9, -1e-9, -1e-12] {
            let near = propagator_closed_form(&p(1.0, 1.0 + eps), t);
            assert!(near.max_abs_diff(&crit) < 1e-8, "eps {eps}");
            assert!(near.max_abs_diff(&propagator_expm(&p(1.0, 1.0 + eps), t)) < 1e-12);
        }
    }

    #[test]
    fn z_decays_exactly() {
        let params = p(0.8, 2.0);
        let t = 0.37;
        let out = apply_ptm(&propagator_closed_form(&params, t), &pauli(3));
        let expected = pauli(3) * C64::from((-2.0 * 2.0 * t).exp());
        assert!((out - expected).norm() < 1e-15);
    }

    #[test]
    fn large_decoherence_does_not_overflow() {
        let params = p(176.0, 9e9);
        let m = propagator_closed_form(&params, 1e-3);
        assert!(m.0.iter().all(|v| v.is_finite()));
        // dressed-x relaxation e^{λ₂ t}, λ₂ ≈ -ω²/2γ
        let slow = (-176.0f64 * 176.0 / 1.8e10 * 1e-3).exp();
        assert!((m.entry(1, 1) - slow).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_overdamped() {
        let es = eigen_system(&p(0.8, 2.0));
        assert_eq!(es.regime, Regime::Overdamped);
        assert!((es.xi_or_eta - 1.833030).abs() < 1e-6);
        assert!((es.lambdas[1].re + 0.166970).abs() < 1e-6);
        assert!((es.lambdas[2].re + 3.833030).abs() < 1e-6);
        assert_eq!(es.lambdas[3].re, -4.0);
    }

    #[test]
    fn eigenvalues_critical_and_underdamped() {
        let es = eigen_system(&p(1.3, 1.3));
        assert_eq!(es.regime, Regime::Critical);
        assert_eq!(es.lambdas[1], es.lambdas[2]);
        assert_eq!(es.lambdas[1].re, -1.3);

        let es = eigen_system(&p(20.0, 1.0));
        assert_eq!(es.regime, Regime::Underdamped);
        assert!((es.lambdas[1].im - 399f64.sqrt()).abs() < 1e-12);
        assert!((es.lambdas[1].im - 19.974984).abs() < 1e-6);
        assert_eq!(es.lambdas[2], es.lambdas[1].conj());
    }

    #[test]
    fn eigenvectors_with_zero_omega() {
        let params = p(0.0, 1.5);
        let es = eigen_system(&params);
        let s = generator(&params).0.map(C64::from);
        for k in 0..4 {
            let w = nalgebra::Vector4::from(es.right_vectors[k]);
            assert!(w.norm() > 0.0);
            assert!((s * w - w * es.lambdas[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let m = propagator_closed_form(&p(0.8, 2.0), 0.3);
        let back = PauliTransferMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back, m);
        assert!(PauliTransferMatrix::from_csv("1,2\n").is_err());
    }

    #[test]
    fn bloch_state_density_round_trip() {
        let s = BlochState::from_bloch_vector(Vector3::new(0.3, -0.2, 0.5));
        let rho = s.density();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert_eq!(BlochState::from_density(&rho), s);
    }
}
