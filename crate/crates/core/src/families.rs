//! Consistent families of a single qubit: diameters of the Bloch sphere that
//! move so that each time's basis is mapped into the next one by the
//! dynamics (forward condition) or by its adjoint (backward condition).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::histories::Decomposition;
use crate::ode::{Integrator, OdeOptions};
use crate::ptm::{
    apply_ptm, generator, oscillator_pair, pauli, propagator_closed_form, sigma_dot, ModelParams,
    Op2, Regime,
};

/// Frobenius residual below which a basis step counts as satisfying the
/// forward (or backward) condition.
pub const FORWARD_TOLERANCE: f64 = 1e-8;

/// Magnitude of `tan φ` or `tan θ` treated as a pole of the tangent form.
pub const TANGENT_POLE: f64 = 1e12;

/// A diameter of the Bloch sphere given by the polar angles of one end.
///
/// `phi` is kept unwrapped so that winding is visible; `theta` is whatever
/// the caller or integrator produced. [`BlochDirection::canonical`] picks the
/// end with `θ ∈ [0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDirection {
    pub theta: f64,
    pub phi: f64,
}

impl BlochDirection {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn x() -> Self {
        Self::new(FRAC_PI_2, 0.0)
    }

    pub fn y() -> Self {
        Self::new(FRAC_PI_2, FRAC_PI_2)
    }

    /// Direction of a nonzero vector.
    pub fn from_vector(n: &Vector3<f64>) -> Result<Self> {
        let r = n.norm();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParams(format!(
                "cannot take direction of {n:?}"
            )));
        }
        let theta = (n[2] / r).clamp(-1.0, 1.0).acos();
        let phi = n[1].atan2(n[0]);
        Ok(Self { theta, phi })
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// The same diameter described from the end with `θ ∈ [0, π/2]`.
    pub fn canonical(&self) -> Self {
        let theta = self.theta.rem_euclid(2.0 * PI);
        let (theta, phi) = if theta > PI {
            (2.0 * PI - theta, self.phi + PI)
        } else {
            (theta, self.phi)
        };
        if theta > FRAC_PI_2 {
            Self::new(PI - theta, phi + PI)
        } else {
            Self::new(theta, phi)
        }
    }

    /// `φ` reduced to `(−π, π]`.
    pub fn wrapped_phi(&self) -> f64 {
        let w = self.phi.rem_euclid(2.0 * PI);
        if w > PI {
            w - 2.0 * PI
        } else {
            w
        }
    }

    /// Projector `(I + n·σ)/2` onto the end of the diameter.
    pub fn projector(&self) -> Op2 {
        (pauli(0) + sigma_dot(&self.unit_vector())) * C64::from(0.5)
    }

    /// The two-element decomposition `{P, I − P}`.
    pub fn decomposition(&self) -> Decomposition {
        Decomposition::from_direction(self)
    }
}

/// Which sufficient consistency condition a family satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    Forward,
    Backward,
}

impl Condition {
    /// `+1` for forward, `−1` for backward: the backward equations are the
    /// forward ones with `γ → −γ`.
    pub fn sign(self) -> f64 {
        match self {
            Condition::Forward => 1.0,
            Condition::Backward => -1.0,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Forward => "forward",
            Condition::Backward => "backward",
        })
    }
}

/// `(dθ/dt, dφ/dt)` of a family's diameter.
pub fn drift(dir: &BlochDirection, params: &ModelParams, condition: Condition) -> (f64, f64) {
    let g = condition.sign() * params.gamma;
    let cp = dir.phi.cos();
    let dtheta = g * (2.0 * dir.theta).sin() * cp * cp;
    let dphi = params.omega - g * (2.0 * dir.phi).sin();
    (dtheta, dphi)
}

fn rhs(params: ModelParams, condition: Condition) -> impl FnMut(f64, &[f64; 2]) -> [f64; 2] {
    move |_t, y| {
        let (dt, dp) = drift(&BlochDirection::new(y[0], y[1]), &params, condition);
        [dt, dp]
    }
}

fn ode_options() -> OdeOptions {
    OdeOptions::default().with_tolerance(1e-12)
}

/// Advance a diameter by `dt` under the family equations.
pub fn family_ode_step(
    state: &BlochDirection,
    params: &ModelParams,
    condition: Condition,
    dt: f64,
) -> Result<BlochDirection> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!(
            "step dt = {dt} must be positive"
        )));
    }
    let y = Integrator::new(rhs(*params, condition), ode_options()).advance(
        0.0,
        [state.theta, state.phi],
        dt,
    )?;
    Ok(BlochDirection::new(y[0], y[1]))
}

/// Instantaneous flip rate `κ = γ(1 − sin²θ cos²φ) = γ(1 − n_x²)`.
pub fn transition_rate(dir: &BlochDirection, params: &ModelParams) -> f64 {
    let nx = dir.theta.sin() * dir.phi.cos();
    params.gamma * (1.0 - nx * nx)
}

/// The same rate written as `−½ n·S̄·n` with `S̄` the Bloch block of the
/// generator.
pub fn transition_rate_from_generator(dir: &BlochDirection, params: &ModelParams) -> f64 {
    let n = dir.unit_vector();
    let s = generator(params).bloch_block();
    -0.5 * n.dot(&(s * n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilySample {
    pub t: f64,
    pub direction: BlochDirection,
    pub kappa: f64,
}

/// A family's diameter sampled on an increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyTrajectory {
    pub condition: Condition,
    pub samples: Vec<FamilySample>,
    pub params: ModelParams,
}

impl FamilyTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn directions(&self) -> Vec<BlochDirection> {
        self.samples.iter().map(|s| s.direction).collect()
    }

    pub fn decompositions(&self) -> Vec<Decomposition> {
        self.samples
            .iter()
            .map(|s| s.direction.decomposition())
            .collect()
    }

    pub fn start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Diameter at an arbitrary time inside the grid by cubic Hermite
    /// interpolation, using the exact drift at the nodes.
    pub fn direction_at(&self, t: f64) -> BlochDirection {
        let s = &self.samples;
        if s.len() == 1 || t <= s[0].t {
            return s[0].direction;
        }
        if t >= s[s.len() - 1].t {
            return s[s.len() - 1].direction;
        }
        let i = s.partition_point(|x| x.t <= t) - 1;
        let (a, b) = (&s[i], &s[i + 1]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        let (da_t, da_p) = drift(&a.direction, &self.params, self.condition);
        let (db_t, db_p) = drift(&b.direction, &self.params, self.condition);
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let herm =
            |ya: f64, da: f64, yb: f64, db: f64| h00 * ya + h10 * h * da + h01 * yb + h11 * h * db;
        BlochDirection::new(
            herm(a.direction.theta, da_t, b.direction.theta, db_t),
            herm(a.direction.phi, da_p, b.direction.phi, db_p),
        )
    }

    pub fn kappa_at(&self, t: f64) -> f64 {
        transition_rate(&self.direction_at(t), &self.params)
    }

    /// CSV with columns `t,theta,phi,kappa`; angles describe the canonical
    /// end of the diameter, `phi` unwrapped.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,theta,phi,kappa\n");
        for s in &self.samples {
            let c = s.direction.canonical();
            out.push_str(&format!("{},{},{},{}\n", s.t, c.theta, c.phi, s.kappa));
        }
        out
    }
}

/// Integrate a family from `times[0]` through every later time.
pub fn integrate_family(
    initial: &BlochDirection,
    params: &ModelParams,
    condition: Condition,
    times: &[f64],
) -> Result<FamilyTrajectory> {
    if times.is_empty() {
        return Err(Error::InvalidParams("empty time grid".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams(
            "family times must be strictly increasing".into(),
        ));
    }
    let ys = Integrator::new(rhs(*params, condition), ode_options())
        .grid([initial.theta, initial.phi], times)?;
    let samples = times
        .iter()
        .zip(ys)
        .map(|(&t, y)| {
            let direction = BlochDirection::new(y[0], y[1]);
            FamilySample {
                t,
                direction,
                kappa: transition_rate(&direction, params),
            }
        })
        .collect();
    Ok(FamilyTrajectory {
        condition,
        samples,
        params: *params,
    })
}

/// Uniform grid of `points` times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

/// Integrated family in the tangent parameterization `μ = tan φ`,
/// `ν = tan θ`. Fails with [`Error::TangentBranch`] if `φ` reaches a pole of
/// the tangent inside `[0, t]`, in which case [`family_ode_step`] should be
/// used instead.
pub fn family_closed_form(
    initial: &BlochDirection,
    params: &ModelParams,
    condition: Condition,
    t: f64,
) -> Result<BlochDirection> {
    if t < 0.0 {
        return Err(Error::InvalidParams(format!("t = {t} must be >= 0")));
    }
    let (cp, ct) = (initial.phi.cos(), initial.theta.cos());
    if cp.abs() < 1.0 / TANGENT_POLE || ct.abs() < 1.0 / TANGENT_POLE {
        return Err(Error::TangentBranch { t: 0.0 });
    }
    let s = condition.sign();
    let g = params.gamma;
    let w = params.omega;
    let mu0 = initial.phi.tan();
    let nu0 = initial.theta.tan();
    let disc = params.discriminant();
    let k = s * g - w * mu0;

    if let Some(pole) = first_zero(disc, k) {
        if pole <= t {
            return Err(Error::TangentBranch { t });
        }
    }

    let (c, sh) = oscillator_pair(disc, t);
    let denom = c + k * sh;
    let mu = mu0 + (w - s * 2.0 * g * mu0 + w * mu0 * mu0) * sh / denom;
    let q = 1.0 + mu0 * mu0;
    let arg = 1.0
        + s * 2.0 * g * sh * c * (1.0 - mu0 * mu0) / q
        + 2.0 * g * sh * sh * (g - s * 2.0 * w * mu0 / q);
    let nu = nu0 * (s * g * t).exp() * arg.max(0.0).sqrt();
    if !mu.is_finite() || !nu.is_finite() || mu.abs() > TANGENT_POLE || nu.abs() > TANGENT_POLE {
        return Err(Error::TangentBranch { t });
    }

    // Recover continuous angles: φ moves off its initial branch only through
    // a pole, which was excluded above.
    let branch = (initial.phi / PI).round() * PI;
    let phi = branch + mu.atan();
    let theta_branch = (initial.theta / PI).round() * PI;
    let theta = theta_branch + nu.atan();
    Ok(BlochDirection::new(theta, phi))
}

/// First `s > 0` with `cosh(ξs) + k sinh(ξs)/ξ = 0`, continued to the
/// trigonometric and critical cases.
fn first_zero(disc: f64, k: f64) -> Option<f64> {
    let scale = disc.abs().sqrt();
    if scale <= 1e-12 * k.abs().max(1e-300) || disc == 0.0 {
        return (k < 0.0).then(|| -1.0 / k);
    }
    if disc > 0.0 {
        let xi = scale;
        (k < 0.0 && xi < -k).then(|| (xi / -k).atanh() / xi)
    } else {
        let eta = scale;
        let delta = (k / eta).atan();
        Some((FRAC_PI_2 + delta) / eta)
    }
}

/// Kind of a stationary equatorial family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StationaryKind {
    /// Dressed chirality basis, approaching the x axis for `γ ≫ ω`.
    DressedX,
    /// Approaching the y axis for `γ ≫ ω`.
    DressedY,
    /// The two coalesce at the critical point.
    Coalesced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquatorialRoot {
    /// Azimuth of the diameter, `θ = π/2`.
    pub phi: f64,
    /// Condition under which this diameter does not move.
    pub condition: Condition,
    pub kind: StationaryKind,
    pub rate: f64,
}

impl EquatorialRoot {
    pub fn direction(&self) -> BlochDirection {
        BlochDirection::new(FRAC_PI_2, self.phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySet {
    /// The z family `θ = 0`, present for all parameters.
    pub z_family: BlochDirection,
    pub kappa_z: f64,
    pub equatorial: Vec<EquatorialRoot>,
    pub kappa_x: Option<f64>,
    pub kappa_y: Option<f64>,
}

/// Stationary families: the z axis and, for `γ ≥ ω > 0`, the equatorial
/// roots of `sin 2φ = ±ω/γ`. Roots of the `+` equation are fixed under the
/// forward equations, roots of the `−` equation under the backward ones.
pub fn stationary_families(params: &ModelParams) -> StationarySet {
    let g = params.gamma;
    let w = params.omega;
    let mut set = StationarySet {
        z_family: BlochDirection::z(),
        kappa_z: g,
        equatorial: Vec::new(),
        kappa_x: None,
        kappa_y: None,
    };
    // with no decoherence every diameter is stationary; nothing to single out
    if g == 0.0 {
        return set;
    }
    let root = |phi, condition, kind, rate| EquatorialRoot {
        phi,
        condition,
        kind,
        rate,
    };
    match params.regime() {
        Regime::Underdamped => {}
        Regime::Critical => {
            let r = g / 2.0;
            set.kappa_x = Some(r);
            set.kappa_y = Some(r);
            set.equatorial = vec![
                root(PI / 4.0, Condition::Forward, StationaryKind::Coalesced, r),
                root(-PI / 4.0, Condition::Backward, StationaryKind::Coalesced, r),
            ];
        }
        Regime::Overdamped => {
            let xi = params.discriminant().sqrt();
            let a = 0.5 * (w / g).asin();
            let kx = w * w / (2.0 * (g + xi));
            let ky = 0.5 * (g + xi);
            set.kappa_x = Some(kx);
            set.kappa_y = Some(ky);
            set.equatorial = vec![
                root(a, Condition::Forward, StationaryKind::DressedX, kx),
                root(
                    FRAC_PI_2 - a,
                    Condition::Forward,
                    StationaryKind::DressedY,
                    ky,
                ),
                root(-a, Condition::Backward, StationaryKind::DressedX, kx),
                root(
                    a - FRAC_PI_2,
                    Condition::Backward,
                    StationaryKind::DressedY,
                    ky,
                ),
            ];
        }
    }
    set
}

/// Qualitative behavior of the families for given parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeReport {
    /// `γ < ω`: diameters rotate at `η = √(ω² − γ²)`; the x basis recurs
    /// (stroboscopically) after `π/η`.
    Underdamped {
        eta: f64,
        period: f64,
    },
    Critical {
        gamma: f64,
    },
    /// `γ > ω`: the oscillating block decays at `γ − ξ` and `γ + ξ`.
    Overdamped {
        slow_rate: f64,
        fast_rate: f64,
    },
}

impl RegimeReport {
    pub fn regime(&self) -> Regime {
        match self {
            RegimeReport::Underdamped { .. } => Regime::Underdamped,
            RegimeReport::Critical { .. } => Regime::Critical,
            RegimeReport::Overdamped { .. } => Regime::Overdamped,
        }
    }
}

pub fn classify_regime(params: &ModelParams) -> RegimeReport {
    let g = params.gamma;
    let w = params.omega;
    match params.regime() {
        Regime::Underdamped => {
            let eta = (-params.discriminant()).sqrt();
            RegimeReport::Underdamped {
                eta,
                period: PI / eta,
            }
        }
        Regime::Critical => RegimeReport::Critical { gamma: g },
        Regime::Overdamped => {
            let xi = params.discriminant().sqrt();
            RegimeReport::Overdamped {
                slow_rate: w * w / (g + xi),
                fast_rate: g + xi,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    /// Residual for each consecutive pair of times.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub holds: bool,
}

fn frobenius(op: &Op2) -> f64 {
    op.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of the part of `x` outside `span{P_β}` for orthogonal
/// projectors `P_β`.
fn span_residual(x: &Op2, span: &Decomposition) -> f64 {
    let mut rest = *x;
    for p in span.projectors() {
        let weight = (p * x).trace() / p.trace();
        rest -= p * weight;
    }
    frobenius(&rest)
}

fn check_condition(
    decomps: &[Decomposition],
    params: &ModelParams,
    times: &[f64],
    condition: Condition,
) -> Result<ConditionCheck> {
    if decomps.len() < 2 {
        return Err(Error::InvalidParams(
            "need at least two decompositions".into(),
        ));
    }
    if decomps.len() != times.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} decompositions but {} times",
            decomps.len(),
            times.len()
        )));
    }
    let mut residuals = Vec::with_capacity(decomps.len() - 1);
    for m in 0..decomps.len() - 1 {
        let dt = times[m + 1] - times[m];
        if dt < 0.0 {
            return Err(Error::InvalidParams("times must be non-decreasing".into()));
        }
        let t = propagator_closed_form(params, dt);
        let r = match condition {
            Condition::Forward => decomps[m]
                .projectors()
                .iter()
                .map(|p| span_residual(&apply_ptm(&t, p), &decomps[m + 1]))
                .fold(0.0, f64::max),
            Condition::Backward => {
                let adj = t.adjoint();
                decomps[m + 1]
                    .projectors()
                    .iter()
                    .map(|p| span_residual(&apply_ptm(&adj, p), &decomps[m]))
                    .fold(0.0, f64::max)
            }
        };
        residuals.push(r);
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(ConditionCheck {
        condition,
        residuals,
        max_residual,
        holds: max_residual < FORWARD_TOLERANCE,
    })
}

/// Whether `T_{m+1,m}` maps each projector at `t_m` into the span of the
/// decomposition at `t_{m+1}`.
pub fn check_forward_condition(
    decomps: &[Decomposition],
    params: &ModelParams,
    times: &[f64],
) -> Result<ConditionCheck> {
    check_condition(decomps, params, times, Condition::Forward)
}

/// Same test with the adjoint map carrying `t_{m+1}` back to `t_m`.
pub fn check_backward_condition(
    decomps: &[Decomposition],
    params: &ModelParams,
    times: &[f64],
) -> Result<ConditionCheck> {
    check_condition(decomps, params, times, Condition::Backward)
}
