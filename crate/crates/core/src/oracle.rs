//! Steerability oracle: LHS-membership feasibility, dual witnesses, and
//! multi-trial labeling.
//!
//! An assemblage admits a local-hidden-state model iff there are PSD matrices
//! `sigma_lambda` with `rho~_{a|x} = sum_lambda D(a|x,lambda) sigma_lambda`.
//! Membership is decided by minimizing the squared Frobenius residual of that
//! linear system over the PSD cone with projected gradient descent (gradient
//! step on the quadratic, then eigenvalue clipping of each `sigma_lambda`).
//! A steering witness is recovered from the residual matrices at the primal
//! optimum: shifted and scaled, they satisfy the dual constraints exactly and
//! yield a negative objective value precisely on steerable assemblages.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{
    assemblage, enumerate_strategies, mub_measurements, random_measurements, Assemblage,
    DeterministicStrategySet, MeasurementSet, OUTCOMES,
};
use crate::qstate::{werner_state, ComplexMatrix, DensityMatrix, WernerParams};
use crate::rng::derive_seed;

/// Steerability label: `+1` steerable, `-1` unsteerable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Steerable,
    Unsteerable,
}

impl Label {
    pub fn to_i8(self) -> i8 {
        match self {
            Label::Steerable => 1,
            Label::Unsteerable => -1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Label::Steerable),
            -1 => Ok(Label::Unsteerable),
            other => Err(Error::InvalidParameter(format!(
                "label must be +1 or -1, got {other}"
            ))),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Steerable => write!(f, "+1"),
            Label::Unsteerable => write!(f, "-1"),
        }
    }
}

/// Solver and labeling configuration.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleConfig {
    /// Feasibility threshold on the squared Frobenius residual.
    pub feas_tol: f64,
    /// Iteration cap per solve.
    pub max_iters: usize,
    /// Measurement sets tried per state before declaring it unsteerable.
    pub trials: usize,
    /// Multiplier on the 1/L descent step; 1.0 keeps the monotone guarantee.
    pub step_scale: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            max_iters: 20_000,
            trials: 10,
            step_scale: 1.0,
        }
    }
}

/// Per-iteration residual decrease below which the iterate is treated as
/// stationary.
const STALL_TOL: f64 = 1e-12;
/// Hard cap on labeling trials.
pub const MAX_TRIALS: usize = 100;

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "feas_tol must be positive, got {}",
                self.feas_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return Err(Error::InvalidParameter(format!(
                "trials must be in [1, {MAX_TRIALS}], got {}",
                self.trials
            )));
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "step_scale must be in (0, 1], got {}",
                self.step_scale
            )));
        }
        Ok(())
    }
}

/// A feasible LHS model: the `d` subnormalized PSD matrices `sigma_lambda`.
#[derive(Clone, Debug)]
pub struct LhsModel {
    pub sigmas: Vec<ComplexMatrix>,
}

/// Dual steering witness `{F_{a|x}}` with its objective value
/// `tr sum F_{a|x} rho~_{a|x}`; negative value certifies steerability.
#[derive(Clone, Debug)]
pub struct SteeringWitness {
    /// Indexed `x * OUTCOMES + a`, like [`Assemblage`] elements.
    pub f: Vec<ComplexMatrix>,
    pub value: f64,
}

impl SteeringWitness {
    /// Checks the two dual constraints: `sum_ax F_{a|x} D(a|x,lambda) >= 0`
    /// for every strategy (within 1e-8) and unit normalization trace.
    pub fn validate(&self, strat: &DeterministicStrategySet) -> Result<()> {
        let mut norm = 0.0;
        for lambda in 0..strat.d() {
            let mut sum = ComplexMatrix::zeros(2, 2);
            for x in 0..strat.m() {
                let a = strat.outcome(lambda, x);
                sum = sum.add(&self.f[x * OUTCOMES + a]);
            }
            let min_eig = sum.min_eigenvalue();
            if min_eig < -1e-8 {
                return Err(Error::InvalidDensity(format!(
                    "witness constraint violated at strategy {lambda}: min eigenvalue {min_eig:.3e}"
                )));
            }
            norm += sum.trace().re;
        }
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidDensity(format!(
                "witness normalization trace {norm} differs from 1"
            )));
        }
        Ok(())
    }
}

/// Outcome of one feasibility solve.
#[derive(Clone, Debug)]
pub struct LhsSolve {
    /// Final squared Frobenius residual.
    pub residual: f64,
    /// The feasible model, present when `residual <= feas_tol`.
    pub model: Option<LhsModel>,
    /// Residual matrices `rho~_{a|x} - sum_lambda D sigma_lambda` at the final
    /// iterate, indexed `x * OUTCOMES + a`; the witness direction.
    pub direction: Vec<ComplexMatrix>,
    /// Iterations spent.
    pub iterations: usize,
}

/// Compact Hermitian 2x2 value `[[a, br+i*bi], [br-i*bi, d]]` for the solver
/// hot path.
#[derive(Clone, Copy, Debug, Default)]
struct Herm2 {
    a: f64,
    d: f64,
    br: f64,
    bi: f64,
}

impl Herm2 {
    const ZERO: Herm2 = Herm2 { a: 0.0, d: 0.0, br: 0.0, bi: 0.0 };

    fn from_matrix(m: &ComplexMatrix) -> Self {
        let b = m.get(0, 1);
        Herm2 {
            a: m.get(0, 0).re,
            d: m.get(1, 1).re,
            br: b.re,
            bi: b.im,
        }
    }

    fn to_matrix(self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 0, Complex64::new(self.a, 0.0));
        m.set(1, 1, Complex64::new(self.d, 0.0));
        m.set(0, 1, Complex64::new(self.br, self.bi));
        m.set(1, 0, Complex64::new(self.br, -self.bi));
        m
    }

    fn add_assign(&mut self, o: &Herm2) {
        self.a += o.a;
        self.d += o.d;
        self.br += o.br;
        self.bi += o.bi;
    }

    fn sub(self, o: &Herm2) -> Herm2 {
        Herm2 {
            a: self.a - o.a,
            d: self.d - o.d,
            br: self.br - o.br,
            bi: self.bi - o.bi,
        }
    }

    fn scaled(self, s: f64) -> Herm2 {
        Herm2 {
            a: self.a * s,
            d: self.d * s,
            br: self.br * s,
            bi: self.bi * s,
        }
    }

    fn frob_sq(&self) -> f64 {
        self.a * self.a + self.d * self.d + 2.0 * (self.br * self.br + self.bi * self.bi)
    }

    fn trace(&self) -> f64 {
        self.a + self.d
    }

    fn eig_bounds(&self) -> (f64, f64) {
        let mean = 0.5 * (self.a + self.d);
        let delta = 0.5 * (self.a - self.d);
        let r = (delta * delta + self.br * self.br + self.bi * self.bi).sqrt();
        (mean - r, mean + r)
    }

    /// Euclidean projection onto the PSD cone: clip negative eigenvalues.
    fn psd_clip(self) -> Herm2 {
        let (lo, hi) = self.eig_bounds();
        if lo >= 0.0 {
            return self;
        }
        if hi <= 0.0 {
            return Herm2::ZERO;
        }
        // lo < 0 < hi, so the gap hi - lo is bounded away from zero.
        let scale = hi / (hi - lo);
        Herm2 {
            a: scale * (self.a - lo),
            d: scale * (self.d - lo),
            br: scale * self.br,
            bi: scale * self.bi,
        }
    }

    /// `tr(self * other)` for Hermitian matrices.
    fn dot(&self, o: &Herm2) -> f64 {
        self.a * o.a + self.d * o.d + 2.0 * (self.br * o.br + self.bi * o.bi)
    }
}

struct SolveOutcome {
    residual: f64,
    sigmas: Vec<Herm2>,
    direction: Vec<Herm2>,
    iterations: usize,
    converged: bool,
}

/// Projected gradient descent on
/// `R(sigma) = sum_ax || rho~_{a|x} - sum_lambda D(a|x,lambda) sigma_lambda ||_F^2`.
///
/// Step size is `1/L` with `L = 2 lambda_max(D D^T) = m*d`, the exact
/// Lipschitz constant of the gradient (the all-ones vector is the top
/// eigenvector of the strategy Gram matrix), so the residual decreases
/// monotonically.
fn solve_inner(
    asm: &Assemblage,
    strat: &DeterministicStrategySet,
    cfg: &OracleConfig,
    mut on_residual: impl FnMut(f64),
) -> Result<SolveOutcome> {
    cfg.validate()?;
    if asm.m() != strat.m() {
        return Err(Error::ShapeMismatch(format!(
            "assemblage has m={}, strategies have m={}",
            asm.m(),
            strat.m()
        )));
    }
    let m = asm.m();
    let d = strat.d();
    let targets: Vec<Herm2> = (0..m)
        .flat_map(|x| (0..OUTCOMES).map(move |a| (a, x)))
        .map(|(a, x)| Herm2::from_matrix(asm.element(a, x)))
        .collect();

    // slot[lambda * m + x] = index of (a, x) with a = lambda(x).
    let slots: Vec<usize> = (0..d)
        .flat_map(|lambda| (0..m).map(move |x| x * OUTCOMES + strat.outcome(lambda, x)))
        .collect();

    // Initial model sigma_lambda = rho_B / d: trace-consistent, and exact for
    // the maximally mixed state.
    let rho_b = Herm2::from_matrix(&asm.reduced_state());
    let mut sigmas = vec![rho_b.scaled(1.0 / d as f64); d];

    let step = cfg.step_scale / (m * d) as f64;
    let mut residuals = vec![Herm2::ZERO; m * OUTCOMES];
    let mut prev_r = f64::INFINITY;
    let mut iterations = 0;

    loop {
        // Residual matrices for the current iterate.
        for z in residuals.iter_mut() {
            *z = Herm2::ZERO;
        }
        for (lambda, sigma) in sigmas.iter().enumerate() {
            for x in 0..m {
                residuals[slots[lambda * m + x]].add_assign(sigma);
            }
        }
        let mut r = 0.0;
        for (slot, target) in residuals.iter_mut().zip(&targets) {
            *slot = target.sub(slot);
            r += slot.frob_sq();
        }
        on_residual(r);

        if r <= cfg.feas_tol {
            return Ok(SolveOutcome { residual: r, sigmas, direction: residuals, iterations, converged: true });
        }
        if prev_r - r <= STALL_TOL {
            // Stationary within floating-point resolution: infeasible.
            return Ok(SolveOutcome { residual: r, sigmas, direction: residuals, iterations, converged: true });
        }
        if iterations >= cfg.max_iters {
            return Err(Error::NonConvergence { iters: iterations, residual: r });
        }
        prev_r = r;
        iterations += 1;

        // sigma <- Pi_PSD(sigma - step * grad), grad_lambda = -2 sum_x Z_{lambda(x)|x}.
        for (lambda, sigma) in sigmas.iter_mut().enumerate() {
            let mut pull = Herm2::ZERO;
            for x in 0..m {
                pull.add_assign(&residuals[slots[lambda * m + x]]);
            }
            let mut stepped = *sigma;
            stepped.add_assign(&pull.scaled(2.0 * step));
            *sigma = stepped.psd_clip();
        }
    }
}

/// Full solve: residual, optional feasible model, and the residual direction
/// for witness extraction.
pub fn lhs_solve(
    asm: &Assemblage,
    strat: &DeterministicStrategySet,
    cfg: &OracleConfig,
) -> Result<LhsSolve> {
    let out = solve_inner(asm, strat, cfg, |_| {})?;
    let model = if out.residual <= cfg.feas_tol {
        Some(LhsModel {
            sigmas: out.sigmas.iter().map(|s| s.to_matrix()).collect(),
        })
    } else {
        None
    };
    Ok(LhsSolve {
        residual: out.residual,
        model,
        direction: out.direction.iter().map(|z| z.to_matrix()).collect(),
        iterations: out.iterations,
    })
}

/// Like [`lhs_solve`] but also returns the residual recorded at every
/// iteration; used to check the monotone-descent property.
pub fn lhs_solve_traced(
    asm: &Assemblage,
    strat: &DeterministicStrategySet,
    cfg: &OracleConfig,
) -> Result<(LhsSolve, Vec<f64>)> {
    let mut trace = Vec::new();
    let out = solve_inner(asm, strat, cfg, |r| trace.push(r))?;
    let model = if out.residual <= cfg.feas_tol {
        Some(LhsModel {
            sigmas: out.sigmas.iter().map(|s| s.to_matrix()).collect(),
        })
    } else {
        None
    };
    Ok((
        LhsSolve {
            residual: out.residual,
            model,
            direction: out.direction.iter().map(|z| z.to_matrix()).collect(),
            iterations: out.iterations,
        },
        trace,
    ))
}

/// Feasibility interface: final residual, and the LHS model whenever the
/// residual clears `feas_tol`.
pub fn lhs_feasibility(
    asm: &Assemblage,
    strat: &DeterministicStrategySet,
    cfg: &OracleConfig,
) -> Result<(f64, Option<LhsModel>)> {
    let solve = lhs_solve(asm, strat, cfg)?;
    Ok((solve.residual, solve.model))
}

/// Builds the dual witness from the residual direction at the primal optimum:
/// `F_{a|x} = (-Z_{a|x} + c I) / N` with `c` the smallest shift making every
/// strategy sum PSD and `N` the normalization trace.
pub fn witness_value(
    asm: &Assemblage,
    strat: &DeterministicStrategySet,
    direction: &[ComplexMatrix],
    cfg: &OracleConfig,
) -> Result<SteeringWitness> {
    let m = strat.m();
    if direction.len() != m * OUTCOMES {
        return Err(Error::ShapeMismatch(format!(
            "expected {} residual matrices, got {}",
            m * OUTCOMES,
            direction.len()
        )));
    }
    let z: Vec<Herm2> = direction.iter().map(Herm2::from_matrix).collect();
    let total: f64 = z.iter().map(Herm2::frob_sq).sum();
    if total <= cfg.feas_tol {
        return Err(Error::DegenerateDirection);
    }

    // Strategy sums W_lambda = sum_x Z_{lambda(x)|x}; the shift must dominate
    // their largest eigenvalue.
    let mut max_top = 0.0_f64;
    let mut trace_sum = 0.0_f64;
    for lambda in 0..strat.d() {
        let mut w = Herm2::ZERO;
        for x in 0..m {
            w.add_assign(&z[x * OUTCOMES + strat.outcome(lambda, x)]);
        }
        let (_, top) = w.eig_bounds();
        max_top = max_top.max(top);
        trace_sum += w.trace();
    }
    let shift = max_top / m as f64 + 1e-15;
    // N = sum_lambda tr(-W_lambda + shift * m * I).
    let norm = -trace_sum + shift * (m * strat.d() * 2) as f64;
    if norm <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateDirection);
    }

    let mut value = 0.0;
    let mut f = Vec::with_capacity(m * OUTCOMES);
    for x in 0..m {
        for a in 0..OUTCOMES {
            let idx = x * OUTCOMES + a;
            let mut fax = z[idx].scaled(-1.0);
            fax.a += shift;
            fax.d += shift;
            let fax = fax.scaled(1.0 / norm);
            value += fax.dot(&Herm2::from_matrix(asm.element(a, x)));
            f.push(fax.to_matrix());
        }
    }
    Ok(SteeringWitness { f, value })
}

/// Outcome of the multi-trial labeling of a single state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionDetail {
    pub label: Label,
    /// Trials actually run (stops at the first infeasible one).
    pub trials_used: usize,
    /// Residual of the deciding solve (last solve when unsteerable).
    pub residual: f64,
    /// Witness objective value, present when the state was flagged steerable.
    pub witness_value: Option<f64>,
}

/// Labels a state by running the feasibility solver over up to `cfg.trials`
/// measurement sets: the fixed MUB axes first when `m <= 3`, seeded random
/// directions afterwards. Steerable on the first infeasible trial, otherwise
/// unsteerable within budget. Non-convergence propagates so callers can drop
/// the state instead of mislabeling it.
pub fn steering_decision_full(
    rho: &DensityMatrix,
    m: usize,
    cfg: &OracleConfig,
    seed: u64,
) -> Result<DecisionDetail> {
    cfg.validate()?;
    let strat = enumerate_strategies(m)?;
    let mut last_residual = 0.0;
    for trial in 0..cfg.trials {
        let meas = trial_measurements(m, trial, seed)?;
        let asm = assemblage(rho, &meas);
        let solve = lhs_solve(&asm, &strat, cfg)?;
        if solve.residual > cfg.feas_tol {
            let witness = witness_value(&asm, &strat, &solve.direction, cfg)?;
            return Ok(DecisionDetail {
                label: Label::Steerable,
                trials_used: trial + 1,
                residual: solve.residual,
                witness_value: Some(witness.value),
            });
        }
        last_residual = solve.residual;
    }
    Ok(DecisionDetail {
        label: Label::Unsteerable,
        trials_used: cfg.trials,
        residual: last_residual,
        witness_value: None,
    })
}

/// Measurement set used by trial `t`: MUB axes on the first trial when
/// available, otherwise random directions with a per-trial derived seed.
pub fn trial_measurements(m: usize, trial: usize, seed: u64) -> Result<MeasurementSet> {
    if trial == 0 && m <= 3 {
        mub_measurements(m)
    } else {
        random_measurements(m, derive_seed(seed, trial as u64))
    }
}

/// Convenience wrapper returning only the label.
pub fn steering_decision(
    rho: &DensityMatrix,
    m: usize,
    cfg: &OracleConfig,
    seed: u64,
) -> Result<Label> {
    steering_decision_full(rho, m, cfg, seed).map(|d| d.label)
}

/// Bisects `alpha` on the feasibility predicate of the Werner family under a
/// fixed measurement set, to bracket width 1e-3. Steerability is monotone in
/// `alpha`, which makes the bisection valid. Returns 1.0 when even `alpha = 1`
/// admits an LHS model for these measurements.
pub fn werner_threshold(chi: f64, meas: &MeasurementSet, cfg: &OracleConfig) -> Result<f64> {
    let strat = enumerate_strategies(meas.m())?;
    let steerable = |alpha: f64| -> Result<bool> {
        let rho = werner_state(&WernerParams::new(alpha, chi)?);
        let asm = assemblage(&rho, meas);
        let solve = lhs_solve(&asm, &strat, cfg)?;
        Ok(solve.residual > cfg.feas_tol)
    };
    if !steerable(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if steerable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_qubit_density, ComplexMatrix, DensityMatrix};
    use std::f64::consts::FRAC_PI_4;

    fn werner(alpha: f64) -> DensityMatrix {
        werner_state(&WernerParams::new(alpha, FRAC_PI_4).unwrap())
    }

    fn separable_mixture(seed: u64, terms: usize) -> DensityMatrix {
        let mut acc = ComplexMatrix::zeros(4, 4);
        let weights: Vec<f64> = (0..terms).map(|i| (i + 1) as f64).collect();
        let total: f64 = weights.iter().sum();
        for (i, w) in weights.iter().enumerate() {
            let sigma = random_qubit_density(derive_seed(seed, 2 * i as u64));
            let tau = random_qubit_density(derive_seed(seed, 2 * i as u64 + 1));
            acc = acc.add(&sigma.mat().kron(tau.mat()).scale_re(w / total));
        }
        DensityMatrix::new(acc).unwrap()
    }

    #[test]
    fn maximally_mixed_state_is_feasible_at_the_initial_model() {
        let rho = DensityMatrix::new(ComplexMatrix::identity(4).scale_re(0.25)).unwrap();
        let meas = random_measurements(3, 5).unwrap();
        let strat = enumerate_strategies(3).unwrap();
        let asm = assemblage(&rho, &meas);
        let solve = lhs_solve(&asm, &strat, &OracleConfig::default()).unwrap();
        assert_eq!(solve.iterations, 0, "uniform model should be exact at init");
        assert!(solve.residual <= 1e-28);
        let model = solve.model.expect("feasible");
        let expected = ComplexMatrix::identity(2).scale_re(1.0 / (2.0 * strat.d() as f64));
        for sigma in &model.sigmas {
            assert!(sigma.max_abs_diff(&expected) <= 1e-14);
        }
    }

    #[test]
    fn separable_states_admit_models() {
        let cfg = OracleConfig::default();
        for seed in 0..5 {
            let rho = separable_mixture(seed, 3);
            for m in [2usize, 3] {
                let meas = mub_measurements(m).unwrap();
                let strat = enumerate_strategies(m).unwrap();
                let (residual, model) = lhs_feasibility(&assemblage(&rho, &meas), &strat, &cfg).unwrap();
                assert!(residual <= cfg.feas_tol, "seed {seed} m {m} residual {residual:.3e}");
                assert!(model.is_some());
            }
        }
    }

    #[test]
    fn feasible_model_reconstructs_the_assemblage() {
        let cfg = OracleConfig::default();
        let rho = separable_mixture(9, 4);
        let meas = mub_measurements(3).unwrap();
        let strat = enumerate_strategies(3).unwrap();
        let asm = assemblage(&rho, &meas);
        let solve = lhs_solve(&asm, &strat, &cfg).unwrap();
        let model = solve.model.expect("separable state must be feasible");
        for x in 0..3 {
            for a in 0..2 {
                let mut rebuilt = ComplexMatrix::zeros(2, 2);
                for lambda in 0..strat.d() {
                    if strat.outcome(lambda, x) == a {
                        rebuilt = rebuilt.add(&model.sigmas[lambda]);
                    }
                }
                let diff = rebuilt.sub(asm.element(a, x)).frobenius_norm();
                assert!(diff <= cfg.feas_tol.sqrt(), "element ({a}|{x}) off by {diff:.3e}");
            }
        }
        // Model mass sums to one and every sigma is PSD.
        let mass: f64 = model.sigmas.iter().map(|s| s.trace().re).sum();
        assert!((mass - 1.0).abs() <= 1e-5);
        for sigma in &model.sigmas {
            assert!(sigma.min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn steerable_werner_is_infeasible_with_two_mubs() {
        // alpha = 0.9 > 1/sqrt(2): the CJWR two-setting inequality is violated.
        let cfg = OracleConfig::default();
        let meas = mub_measurements(2).unwrap();
        let strat = enumerate_strategies(2).unwrap();
        let asm = assemblage(&werner(0.9), &meas);
        let (residual, model) = lhs_feasibility(&asm, &strat, &cfg).unwrap();
        assert!(residual > cfg.feas_tol, "residual {residual:.3e}");
        assert!(model.is_none());
    }

    #[test]
    fn witness_is_negative_and_satisfies_constraints() {
        let cfg = OracleConfig::default();
        let meas = mub_measurements(2).unwrap();
        let strat = enumerate_strategies(2).unwrap();
        let asm = assemblage(&werner(0.9), &meas);
        let solve = lhs_solve(&asm, &strat, &cfg).unwrap();
        assert!(solve.residual > cfg.feas_tol);
        let witness = witness_value(&asm, &strat, &solve.direction, &cfg).unwrap();
        assert!(witness.value < 0.0, "witness value {}", witness.value);
        witness.validate(&strat).unwrap();
    }

    #[test]
    fn witness_on_feasible_assemblage_is_degenerate() {
        let cfg = OracleConfig::default();
        let meas = mub_measurements(2).unwrap();
        let strat = enumerate_strategies(2).unwrap();
        let asm = assemblage(&werner(0.3), &meas);
        let solve = lhs_solve(&asm, &strat, &cfg).unwrap();
        assert!(solve.residual <= cfg.feas_tol);
        match witness_value(&asm, &strat, &solve.direction, &cfg) {
            Err(Error::DegenerateDirection) => {}
            other => panic!("expected DegenerateDirection, got {other:?}"),
        }
    }

    #[test]
    fn witness_sign_agrees_with_feasibility() {
        let cfg = OracleConfig::default();
        let meas = mub_measurements(3).unwrap();
        let strat = enumerate_strategies(3).unwrap();
        for &alpha in &[0.2, 0.5, 0.7, 0.9] {
            let asm = assemblage(&werner(alpha), &meas);
            let solve = lhs_solve(&asm, &strat, &cfg).unwrap();
            match witness_value(&asm, &strat, &solve.direction, &cfg) {
                Ok(w) => {
                    assert!(solve.residual > cfg.feas_tol || w.value >= -1e-9);
                    if w.value < -1e-9 {
                        assert!(solve.residual > cfg.feas_tol);
                    }
                }
                Err(Error::DegenerateDirection) => assert!(solve.residual <= cfg.feas_tol),
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }

    #[test]
    fn residual_descent_is_monotone() {
        let cfg = OracleConfig::default();
        let meas = mub_measurements(3).unwrap();
        let strat = enumerate_strategies(3).unwrap();
        for &alpha in &[0.5, 0.8] {
            let asm = assemblage(&werner(alpha), &meas);
            let (_, trace) = lhs_solve_traced(&asm, &strat, &cfg).unwrap();
            assert!(trace.len() > 1);
            for pair in trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-15, "residual rose: {} -> {}", pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let cfg = OracleConfig { max_iters: 1, ..OracleConfig::default() };
        let meas = mub_measurements(2).unwrap();
        let strat = enumerate_strategies(2).unwrap();
        let asm = assemblage(&werner(0.9), &meas);
        match lhs_solve(&asm, &strat, &cfg) {
            Err(Error::NonConvergence { .. }) => {}
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn decision_labels_match_known_werner_facts() {
        let cfg = OracleConfig { trials: 3, ..OracleConfig::default() };
        // Separable product state: unsteerable at any trial count.
        let rho = separable_mixture(3, 1);
        assert_eq!(steering_decision(&rho, 2, &cfg, 0).unwrap(), Label::Unsteerable);
        assert_eq!(steering_decision(&rho, 3, &cfg, 0).unwrap(), Label::Unsteerable);
        // 0.9 > 1/sqrt(2): caught by the first (MUB) trial at m=2.
        assert_eq!(steering_decision(&werner(0.9), 2, &cfg, 0).unwrap(), Label::Steerable);
        // 0.4 sits on the unsteerable side of the closed-form boundary at chi=pi/4.
        assert_eq!(steering_decision(&werner(0.4), 3, &cfg, 0).unwrap(), Label::Unsteerable);
    }

    #[test]
    fn decision_is_deterministic() {
        let cfg = OracleConfig { trials: 4, ..OracleConfig::default() };
        let rho = crate::qstate::random_density(17);
        let a = steering_decision_full(&rho, 3, &cfg, 123).unwrap();
        let b = steering_decision_full(&rho, 3, &cfg, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extra_settings_preserve_infeasibility() {
        // The three MUB axes contain the two-axis set; a state steerable with
        // the subset stays steerable with the superset.
        let cfg = OracleConfig::default();
        let alpha = 0.75; // above 1/sqrt(2)
        let strat2 = enumerate_strategies(2).unwrap();
        let strat3 = enumerate_strategies(3).unwrap();
        let asm2 = assemblage(&werner(alpha), &mub_measurements(2).unwrap());
        let asm3 = assemblage(&werner(alpha), &mub_measurements(3).unwrap());
        let r2 = lhs_solve(&asm2, &strat2, &cfg).unwrap().residual;
        let r3 = lhs_solve(&asm3, &strat3, &cfg).unwrap().residual;
        assert!(r2 > cfg.feas_tol);
        assert!(r3 > cfg.feas_tol);
    }

    #[test]
    fn threshold_bisection_respects_contract() {
        let cfg = OracleConfig::default();
        let meas = mub_measurements(3).unwrap();
        let alpha = werner_threshold(FRAC_PI_4, &meas, &cfg).unwrap();
        assert!((0.0..=1.0).contains(&alpha));
        // Analytic three-MUB threshold is 1/sqrt(3); unit tests allow a loose
        // band, the acceptance suite pins +-0.01.
        assert!((alpha - 1.0 / 3.0_f64.sqrt()).abs() < 0.02, "alpha* = {alpha}");
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let ok = OracleConfig::default();
        assert!(ok.validate().is_ok());
        assert!(OracleConfig { feas_tol: 0.0, ..ok }.validate().is_err());
        assert!(OracleConfig { max_iters: 0, ..ok }.validate().is_err());
        assert!(OracleConfig { trials: 0, ..ok }.validate().is_err());
        assert!(OracleConfig { trials: 101, ..ok }.validate().is_err());
        assert!(OracleConfig { step_scale: 1.5, ..ok }.validate().is_err());
    }
}
