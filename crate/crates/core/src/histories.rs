//! Multi-time histories of the molecule: the decoherence functional in its
//! reduced form (environment traced out and folded into `T`), consistency
//! tests, and Markov structure of the resulting probabilities.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::families::{BlochDirection, FamilyTrajectory};
use crate::ptm::{apply_ptm, pauli, propagator_closed_form, BlochState, ModelParams, Op2};

/// Largest number of times accepted by [`decoherence_functional`].
pub const MAX_TIMES: usize = 10;

/// Default absolute tolerance on off-diagonal entries.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

const PROJECTOR_TOLERANCE: f64 = 1e-12;

fn max_abs(op: &Op2) -> f64 {
    op.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Orthogonal projectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    projectors: Vec<Op2>,
}

impl Decomposition {
    pub fn new(projectors: Vec<Op2>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidDecomposition("no projectors".into()));
        }
        let mut sum = Op2::zeros();
        for (i, p) in projectors.iter().enumerate() {
            if max_abs(&(p * p - p)) > PROJECTOR_TOLERANCE {
                return Err(Error::InvalidDecomposition(format!(
                    "element {i} is not idempotent"
                )));
            }
            if max_abs(&(p.adjoint() - p)) > PROJECTOR_TOLERANCE {
                return Err(Error::InvalidDecomposition(format!(
                    "element {i} is not Hermitian"
                )));
            }
            sum += p;
        }
        if max_abs(&(sum - pauli(0))) > PROJECTOR_TOLERANCE {
            return Err(Error::InvalidDecomposition(
                "projectors do not sum to I".into(),
            ));
        }
        Ok(Self { projectors })
    }

    /// `{P, I − P}` for the diameter `dir`; the complement is formed by
    /// subtraction so the sum is exact.
    pub fn from_direction(dir: &BlochDirection) -> Self {
        let p = dir.projector();
        Self {
            projectors: vec![p, pauli(0) - p],
        }
    }

    /// The single-element decomposition `{I}`.
    pub fn trivial() -> Self {
        Self {
            projectors: vec![pauli(0)],
        }
    }

    pub fn projectors(&self) -> &[Op2] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

/// Decompositions at an ordered list of times.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFamily {
    times: Vec<f64>,
    decompositions: Vec<Decomposition>,
    params: ModelParams,
}

impl HistoryFamily {
    /// Times must be non-decreasing; equal times mean no evolution between
    /// the two decompositions.
    pub fn new(
        params: ModelParams,
        times: Vec<f64>,
        decompositions: Vec<Decomposition>,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidParams(
                "a history family needs at least one time".into(),
            ));
        }
        if times.len() != decompositions.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} decompositions",
                times.len(),
                decompositions.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParams(
                "times must be finite and non-decreasing".into(),
            ));
        }
        Ok(Self {
            times,
            decompositions,
            params,
        })
    }

    /// The sampled bases of a consistent family.
    pub fn from_trajectory(traj: &FamilyTrajectory) -> Result<Self> {
        Self::new(traj.params, traj.times(), traj.decompositions())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn decompositions(&self) -> &[Decomposition] {
        &self.decompositions
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Replace the decomposition at one time, e.g. by [`Decomposition::trivial`]
    /// to coarse-grain.
    pub fn with_decomposition(mut self, index: usize, d: Decomposition) -> Self {
        self.decompositions[index] = d;
        self
    }

    /// Gaps shorter than the correlation time, which the Markov treatment of
    /// collisions does not strictly cover.
    pub fn warnings(&self) -> Vec<String> {
        let tau = self.params.tau_c;
        self.times
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] - w[0] < tau)
            .map(|(i, w)| {
                format!(
                    "gap {i}: {} is shorter than the correlation time {tau}",
                    w[1] - w[0]
                )
            })
            .collect()
    }
}

/// `D(α, β)` over all pairs of histories. Labels are little-endian mixed-radix
/// multi-indices: `α_1` varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceMatrix {
    entries: DMatrix<C64>,
    radices: Vec<usize>,
}

impl DecoherenceMatrix {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn label(&self, mut index: usize) -> Vec<usize> {
        self.radices
            .iter()
            .map(|&r| {
                let a = index % r;
                index /= r;
                a
            })
            .collect()
    }

    pub fn index(&self, label: &[usize]) -> usize {
        label
            .iter()
            .zip(&self.radices)
            .rev()
            .fold(0, |acc, (&a, &r)| acc * r + a)
    }

    pub fn get(&self, alpha: &[usize], beta: &[usize]) -> C64 {
        self.entries[(self.index(alpha), self.index(beta))]
    }

    /// History weights `D(α, α)`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.entries[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `alpha,beta,re,im`, labels written as `a1.a2...`.
    pub fn to_csv(&self) -> String {
        let fmt_label = |i: usize| {
            self.label(i)
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        let mut out = String::from("alpha,beta,re,im\n");
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let d = self.entries[(i, j)];
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_label(i),
                    fmt_label(j),
                    d.re,
                    d.im
                ));
            }
        }
        out
    }
}

/// Decoherence functional
/// `D(α,β) = Tr[P_f^{α_f} T(… P_2^{α_2} T(P_1^{α_1} ρ P_1^{β_1}) P_2^{β_2} …) P_f^{β_f}]`.
pub fn decoherence_functional(
    family: &HistoryFamily,
    initial: &BlochState,
) -> Result<DecoherenceMatrix> {
    let f = family.len();
    if f > MAX_TIMES {
        return Err(Error::SizeLimit {
            times: f,
            limit: MAX_TIMES,
        });
    }
    let radices: Vec<usize> = family
        .decompositions
        .iter()
        .map(Decomposition::len)
        .collect();
    let dim: usize = radices.iter().product();
    let steps: Vec<_> = family
        .times
        .windows(2)
        .map(|w| propagator_closed_form(&family.params, w[1] - w[0]))
        .collect();
    let mut entries = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));

    // depth-first over times, carrying the chain operator and partial labels
    struct Walk<'a> {
        family: &'a HistoryFamily,
        steps: &'a [crate::ptm::PauliTransferMatrix],
        radices: &'a [usize],
        entries: &'a mut DMatrix<C64>,
    }
    impl Walk<'_> {
        fn go(&mut self, m: usize, x: Op2, ia: usize, ib: usize, stride: usize) {
            let projectors = self.family.decompositions[m].projectors();
            let evolved = if m == 0 {
                x
            } else {
                apply_ptm(&self.steps[m - 1], &x)
            };
            for (a, pa) in projectors.iter().enumerate() {
                let left = pa * evolved;
                for (b, pb) in projectors.iter().enumerate() {
                    let next = left * pb;
                    let (na, nb) = (ia + a * stride, ib + b * stride);
                    if m + 1 == self.radices.len() {
                        self.entries[(na, nb)] = next.trace();
                    } else {
                        self.go(m + 1, next, na, nb, stride * self.radices[m]);
                    }
                }
            }
        }
    }
    Walk {
        family,
        steps: &steps,
        radices: &radices,
        entries: &mut entries,
    }
    .go(0, initial.density(), 0, 0, 1);
    Ok(DecoherenceMatrix { entries, radices })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub max_off_diagonal: f64,
    pub tol: f64,
    pub passed: bool,
    /// Diagonal weights divided by their total.
    pub weights: Vec<f64>,
    pub total_weight: f64,
}

pub fn consistency_check(d: &DecoherenceMatrix, tol: f64) -> ConsistencyReport {
    let diag = d.diagonal();
    let total: f64 = diag.iter().sum();
    let weights = diag
        .iter()
        .map(|w| if total > 0.0 { w / total } else { 0.0 })
        .collect();
    let max_off_diagonal = d.max_off_diagonal();
    ConsistencyReport {
        max_off_diagonal,
        tol,
        passed: max_off_diagonal <= tol,
        weights,
        total_weight: total,
    }
}

/// Probabilities of a consistent family written as a (possibly
/// inhomogeneous) Markov chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    /// Born probabilities at the first time.
    pub initial: Vec<f64>,
    /// `steps[m][(b, a)] = Pr(b at t_{m+2} | a at t_{m+1})`, column-stochastic.
    pub steps: Vec<DMatrix<f64>>,
    /// Largest `|W(α) − p(α_1) Π M(α_{m+1}|α_m)|` over histories.
    pub factorization_residual: f64,
}

impl MarkovChain {
    pub fn is_markov(&self, tol: f64) -> bool {
        self.factorization_residual <= tol
    }

    /// Whether every step matrix equals the first within `tol`.
    pub fn is_stationary(&self, tol: f64) -> bool {
        self.steps.windows(2).all(|w| (&w[1] - &w[0]).amax() <= tol)
    }

    pub fn path_probability(&self, path: &[usize]) -> f64 {
        let mut p = self.initial[path[0]];
        for (m, w) in path.windows(2).enumerate() {
            p *= self.steps[m][(w[1], w[0])];
        }
        p
    }
}

/// Extract step-by-step conditional probabilities from a consistent family
/// and measure how well they factorize the joint distribution.
pub fn markov_from_family(family: &HistoryFamily, initial: &BlochState) -> Result<MarkovChain> {
    let d = decoherence_functional(family, initial)?;
    let report = consistency_check(&d, CONSISTENCY_TOLERANCE);
    if !report.passed {
        return Err(Error::NotConsistent {
            max_off_diagonal: report.max_off_diagonal,
            tol: CONSISTENCY_TOLERANCE,
        });
    }
    let radices = d.radices().to_vec();
    let joint = report.weights;
    let labels: Vec<Vec<usize>> = (0..joint.len()).map(|i| d.label(i)).collect();

    let marginal = |m: usize| {
        let mut p = vec![0.0; radices[m]];
        for (l, w) in labels.iter().zip(&joint) {
            p[l[m]] += w;
        }
        p
    };
    let initial_dist = marginal(0);
    let mut steps = Vec::with_capacity(radices.len().saturating_sub(1));
    for m in 0..radices.len().saturating_sub(1) {
        let mut pair = DMatrix::zeros(radices[m + 1], radices[m]);
        for (l, w) in labels.iter().zip(&joint) {
            pair[(l[m + 1], l[m])] += w;
        }
        let from = marginal(m);
        for a in 0..radices[m] {
            for b in 0..radices[m + 1] {
                pair[(b, a)] = if from[a] > 0.0 {
                    pair[(b, a)] / from[a]
                } else {
                    1.0 / radices[m + 1] as f64
                };
            }
        }
        steps.push(pair);
    }
    let mut chain = MarkovChain {
        initial: initial_dist,
        steps,
        factorization_residual: 0.0,
    };
    chain.factorization_residual = labels
        .iter()
        .zip(&joint)
        .map(|(l, w)| (w - chain.path_probability(l)).abs())
        .fold(0.0, f64::max);
    Ok(chain)
}

fn check_stochastic(m: &DMatrix<f64>, what: &str) -> Result<()> {
    for c in 0..m.ncols() {
        let col = m.column(c);
        if col.iter().any(|&x| x < -1e-12) || (col.sum() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!(
                "{what}: column {c} is not stochastic"
            )));
        }
    }
    Ok(())
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| x < -1e-12 || !x.is_finite())
        || (p.iter().sum::<f64>() - 1.0).abs() > 1e-10
    {
        return Err(Error::InvalidDistribution(
            "count probabilities must sum to 1".into(),
        ));
    }
    Ok(())
}

/// Averaged Markov matrix `Σ_n Pr(n) M^(n)` for collision-count-conditioned
/// matrices `markov_by_count[n]`.
pub fn classical_collision_average(
    markov_by_count: &[DMatrix<f64>],
    count_dist: &[f64],
) -> Result<DMatrix<f64>> {
    if markov_by_count.is_empty() || markov_by_count.len() != count_dist.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices but {} probabilities",
            markov_by_count.len(),
            count_dist.len()
        )));
    }
    let (r, c) = markov_by_count[0].shape();
    if r != c {
        return Err(Error::DimensionMismatch(format!(
            "Markov matrix is {r}x{c}"
        )));
    }
    for (n, m) in markov_by_count.iter().enumerate() {
        if m.shape() != (r, c) {
            return Err(Error::DimensionMismatch(format!(
                "M^({n}) has shape {:?}",
                m.shape()
            )));
        }
        check_stochastic(m, &format!("M^({n})"))?;
    }
    check_distribution(count_dist)?;
    Ok(markov_by_count
        .iter()
        .zip(count_dist)
        .fold(DMatrix::zeros(r, c), |acc, (m, &p)| acc + m * p))
}

/// Probability of the state path `j_1 … j_{f+1}` with the collision counts
/// unobserved, by summing the count-conditioned chain over every sequence of
/// counts. This is the brute-force counterpart of chaining the averaged
/// matrix.
pub fn path_probability_over_counts(
    markov_by_count: &[DMatrix<f64>],
    count_dist: &[f64],
    path: &[usize],
) -> Result<f64> {
    classical_collision_average(markov_by_count, count_dist)?;
    let intervals = path.len().saturating_sub(1);
    let k = count_dist.len();
    let total = k
        .checked_pow(intervals as u32)
        .filter(|&n| n <= 1 << 24)
        .ok_or(Error::SizeLimit {
            times: path.len(),
            limit: 24,
        })?;
    let mut sum = 0.0;
    for mut code in 0..total {
        let mut p = 1.0;
        for w in path.windows(2) {
            let n = code % k;
            code /= k;
            p *= count_dist[n] * markov_by_count[n][(w[1], w[0])];
        }
        sum += p;
    }
    Ok(sum)
}
