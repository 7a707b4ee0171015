//! Multiplicative-weights solver for zero-sum games whose max player lives in
//! the spectraplex of a product of second-order cones.
//!
//! The min player is described by a best-response oracle ([`MinPlayer`]); the
//! max player runs matrix multiplicative weights in the Jordan algebra, which
//! for the product cone reduces to a closed-form per-block update.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use thiserror::Error;

use crate::eja::{norm, spectral_norm, trace_inner, JordanAlgebra, ProductElement};

pub const DEFAULT_ITERATION_CAP: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error("payoff spectral norm {observed_norm} exceeds width {rho} at iteration {iteration}")]
    WidthBreach { iteration: u64, observed_norm: f64, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameConfig {
    epsilon: f64,
    rho: f64,
    max_iterations_cap: u64,
    delta: f64,
}

impl GameConfig {
    /// Requires `0 < epsilon <= 2 * rho`.
    pub fn new(epsilon: f64, rho: f64) -> Result<Self, GameError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(GameError::InvalidConfig(format!("epsilon must be positive and finite, got {epsilon}")));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(GameError::InvalidConfig(format!("rho must be positive and finite, got {rho}")));
        }
        if epsilon > 2.0 * rho {
            return Err(GameError::InvalidConfig(format!("epsilon {epsilon} exceeds 2 * rho = {}", 2.0 * rho)));
        }
        Ok(Self { epsilon, rho, max_iterations_cap: DEFAULT_ITERATION_CAP, delta: 0.0 })
    }

    pub fn with_iteration_cap(mut self, cap: u64) -> Result<Self, GameError> {
        if cap == 0 {
            return Err(GameError::InvalidConfig("iteration cap must be positive".into()));
        }
        self.max_iterations_cap = cap;
        Ok(self)
    }

    /// Declares the oracle `delta`-approximate; the certificate bound grows by `delta`.
    pub fn with_delta(mut self, delta: f64) -> Result<Self, GameError> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(GameError::InvalidConfig(format!("delta must be nonnegative, got {delta}")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn max_iterations_cap(&self) -> u64 {
        self.max_iterations_cap
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Iterations actually run: the formula value, clipped to the cap.
    pub iterations: u64,
    pub eta: f64,
    /// Unclipped `ceil(4 rho^2 ln(2n) / epsilon^2)`.
    pub formula_iterations: u64,
    pub capped: bool,
}

pub fn schedule(config: &GameConfig, n: usize) -> Schedule {
    assert!(n >= 1, "a game needs at least one block");
    let log2n = (2.0 * n as f64).ln();
    let raw = (4.0 * config.rho * config.rho * log2n / (config.epsilon * config.epsilon)).ceil();
    // Saturating float-to-int conversion.
    let formula_iterations = (raw as u64).max(1);
    let capped = formula_iterations > config.max_iterations_cap;
    let iterations = formula_iterations.min(config.max_iterations_cap);
    Schedule { iterations, eta: (log2n / iterations as f64).sqrt(), formula_iterations, capped }
}

/// Accumulated payoffs and current iterate of the max player.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPlayerState {
    d: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    y: ProductElement,
    exps_plus: Vec<f64>,
    exps_minus: Vec<f64>,
}

impl MaxPlayerState {
    /// Uniform start: `ȳ_i = 0`, `y_{i,0} = 1/(√2 n)`.
    pub fn new(n: usize, d: usize) -> Self {
        let mut y = ProductElement::zeros(n, d);
        for i in 0..n {
            y.set_head(i, FRAC_1_SQRT_2 / n as f64);
        }
        Self { d, alpha: vec![0.0; n * d], beta: vec![0.0; n], y, exps_plus: vec![0.0; n], exps_minus: vec![0.0; n] }
    }

    pub fn num_blocks(&self) -> usize {
        self.beta.len()
    }

    pub fn alpha(&self, i: usize) -> &[f64] {
        &self.alpha[i * self.d..(i + 1) * self.d]
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn y(&self) -> &ProductElement {
        &self.y
    }
}

/// Adds `payoff` to the accumulators and recomputes the iterate
/// `y ∝ exp((eta/rho) Σ payoffs)`, normalised to unit trace.
///
/// Exponents are shifted by their maximum before exponentiation; this leaves
/// the normalised iterate unchanged and keeps long runs from overflowing.
pub fn mwu_update(state: &mut MaxPlayerState, payoff: &ProductElement, eta: f64, rho: f64) {
    let n = state.num_blocks();
    let d = state.d;
    assert!(payoff.num_blocks() == n && payoff.dim() == d, "payoff shape does not match the state");
    state.alpha.iter_mut().zip(payoff.bars_flat()).for_each(|(a, g)| *a += g);
    state.beta.iter_mut().zip(payoff.heads()).for_each(|(b, h)| *b += h);

    let scale = eta / (SQRT_2 * rho);
    let mut shift = f64::NEG_INFINITY;
    for i in 0..n {
        let a = norm(&state.alpha[i * d..(i + 1) * d]);
        state.exps_plus[i] = scale * (state.beta[i] + a);
        state.exps_minus[i] = scale * (state.beta[i] - a);
        shift = shift.max(state.exps_plus[i]);
    }
    let mut total = 0.0;
    for i in 0..n {
        state.exps_plus[i] = (state.exps_plus[i] - shift).exp();
        state.exps_minus[i] = (state.exps_minus[i] - shift).exp();
        total += state.exps_plus[i] + state.exps_minus[i];
    }
    let denom = SQRT_2 * total;
    for i in 0..n {
        let mu = state.exps_plus[i] + state.exps_minus[i];
        let lambda = state.exps_plus[i] - state.exps_minus[i];
        state.y.set_head(i, mu / denom);
        let alpha = &state.alpha[i * d..(i + 1) * d];
        let a = norm(alpha);
        let bar = state.y.bar_mut(i);
        if a > crate::eja::ZERO_BAR_THRESHOLD {
            let s = lambda / (denom * a);
            bar.iter_mut().zip(alpha).for_each(|(o, v)| *o = s * v);
        } else {
            bar.iter_mut().for_each(|o| *o = 0.0);
        }
    }
}

/// Max-player iterate of the general algebra form, `exp(s X) / tr(exp(s X))`
/// with `s = eta/rho` and `X` the cumulative payoff.
///
/// The product-cone update [`mwu_update`] is a closed form of this map; the
/// generic version is kept for cross-checking and for other algebras.
pub fn generic_max_player<A: JordanAlgebra>(algebra: &A, cumulative: &A::Element, eta: f64, rho: f64) -> A::Element {
    let s = eta / rho;
    let shift = s * algebra.max_eigenvalue(cumulative);
    let e = algebra.identity();
    let w = algebra.exp(&algebra.lincomb(s, cumulative, -shift, &e));
    let tr = algebra.trace(&w);
    algebra.lincomb(1.0 / tr, &w, 0.0, &e)
}

/// Best-response oracle of the min player.
///
/// The payoff map must be affine in the min player's point so that averaging
/// points and averaging payoffs commute.
pub trait MinPlayer {
    type Point: Clone;

    /// `(n, d)`: number of cone blocks and their bar dimension.
    fn shape(&self) -> (usize, usize);

    fn new_point(&self) -> Self::Point;

    /// Writes a minimiser of `f(x) • y` into `x` and `f(x)` into `payoff`.
    fn respond(&mut self, y: &ProductElement, x: &mut Self::Point, payoff: &mut ProductElement);

    /// Folds `x` into the running mean `mean`, which then averages `count` points.
    fn accumulate(&mut self, mean: &mut Self::Point, x: &Self::Point, count: u64);
}

/// Per-iteration view handed to the monitor.
#[derive(Debug)]
pub struct IterationInfo<'a> {
    pub iteration: u64,
    pub oracle_value: f64,
    pub payoff: &'a ProductElement,
    pub y: &'a ProductElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashCertificate<P> {
    pub x_bar: P,
    pub y_bar: ProductElement,
    /// Average of the payoffs, equal to `f(x_bar)` for affine payoffs.
    pub payoff_bar: ProductElement,
    pub iterations_run: u64,
    /// `max_y f(x_bar) • y`, the largest eigenvalue of `payoff_bar`.
    pub max_value: f64,
    /// `min_x f(x) • y_bar`, from one extra oracle call.
    pub min_value: f64,
    /// `max_value - min_value + delta`.
    pub gap_upper_bound: f64,
    pub mean_oracle_value: f64,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EarlyTermination<P> {
    pub iteration: u64,
    pub oracle_value: f64,
    /// The best response that triggered the stop.
    pub x: P,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameOutcome<P> {
    Completed(NashCertificate<P>),
    Stopped(EarlyTermination<P>),
}

/// Runs the scheduled number of rounds and returns the averaged strategies.
///
/// Fails with [`GameError::WidthBreach`] as soon as a payoff's spectral norm
/// exceeds `rho` (non-finite payoffs count as breaches).
pub fn solve_game<M, F>(player: &mut M, config: &GameConfig, mut monitor: F) -> Result<GameOutcome<M::Point>, GameError>
where
    M: MinPlayer,
    F: FnMut(&IterationInfo<'_>) -> Control,
{
    let (n, d) = player.shape();
    let sched = schedule(config, n);
    let mut state = MaxPlayerState::new(n, d);
    let mut x = player.new_point();
    let mut x_bar = player.new_point();
    let mut payoff = ProductElement::zeros(n, d);
    let mut payoff_bar = ProductElement::zeros(n, d);
    let mut y_bar = ProductElement::zeros(n, d);
    let mut mean_value = 0.0;

    for t in 1..=sched.iterations {
        player.respond(&state.y, &mut x, &mut payoff);
        let observed = spectral_norm(&payoff);
        if !observed.is_finite() || observed > config.rho {
            return Err(GameError::WidthBreach { iteration: t, observed_norm: observed, rho: config.rho });
        }
        let oracle_value = trace_inner(&payoff, &state.y).expect("oracle payoff has the game's shape");
        let info = IterationInfo { iteration: t, oracle_value, payoff: &payoff, y: &state.y };
        if monitor(&info) == Control::Stop {
            return Ok(GameOutcome::Stopped(EarlyTermination { iteration: t, oracle_value, x }));
        }
        player.accumulate(&mut x_bar, &x, t);
        payoff_bar.update_mean(&payoff, t);
        y_bar.update_mean(&state.y, t);
        mean_value += (oracle_value - mean_value) / t as f64;
        mwu_update(&mut state, &payoff, sched.eta, config.rho);
    }

    player.respond(&y_bar, &mut x, &mut payoff);
    let min_value = trace_inner(&payoff, &y_bar).expect("oracle payoff has the game's shape");
    let max_value = payoff_bar.max_eigenvalue();
    Ok(GameOutcome::Completed(NashCertificate {
        x_bar,
        y_bar,
        payoff_bar,
        iterations_run: sched.iterations,
        max_value,
        min_value,
        gap_upper_bound: max_value - min_value + config.delta,
        mean_oracle_value: mean_value,
        schedule: sched,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eja::{in_cone, ProductCone, SocElement};
    use proptest::prelude::*;

    #[test]
    fn schedule_examples() {
        let s = schedule(&GameConfig::new(1.0, 1.0).unwrap(), 1);
        assert_eq!(s.iterations, 3);
        assert!((s.eta - (2f64.ln() / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.eta - 0.48068).abs() < 1e-5);

        let s = schedule(&GameConfig::new(2.0, 1.0).unwrap(), 1);
        assert_eq!(s.iterations, 1);
        assert!((s.eta - 2f64.ln().sqrt()).abs() < 1e-15);

        assert!(matches!(GameConfig::new(2.0000001, 1.0), Err(GameError::InvalidConfig(_))));
    }

    #[test]
    fn schedule_cap_is_flagged() {
        let cfg = GameConfig::new(1e-3, 1.0).unwrap().with_iteration_cap(10).unwrap();
        let s = schedule(&cfg, 4);
        assert!(s.capped);
        assert_eq!(s.iterations, 10);
        assert!(s.formula_iterations > 10);
    }

    #[test]
    fn doubling_rho_quadruples_iterations() {
        let a = schedule(&GameConfig::new(0.01, 1.0).unwrap(), 5).formula_iterations as f64;
        let b = schedule(&GameConfig::new(0.01, 2.0).unwrap(), 5).formula_iterations as f64;
        assert!((b / a - 4.0).abs() < 1e-3);
    }

    #[test]
    fn zero_accumulators_give_uniform_iterate() {
        let mut s = MaxPlayerState::new(3, 2);
        mwu_update(&mut s, &ProductElement::zeros(3, 2), 0.3, 1.0);
        for i in 0..3 {
            assert!((s.y().head(i) - FRAC_1_SQRT_2 / 3.0).abs() < 1e-15);
            assert!(s.y().bar(i).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn single_block_has_fixed_head() {
        let mut s = MaxPlayerState::new(1, 2);
        let p = ProductElement::from_blocks(vec![SocElement::new(vec![0.7, -0.2], 0.4)]);
        mwu_update(&mut s, &p, 0.9, 1.0);
        assert!((s.y().head(0) - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn two_block_hand_example() {
        // Exponents (β ± ‖α‖)·η/(√2ρ) equal to (1, 0) for block 1 and (0, 0) for block 2.
        let eta = 1.0;
        let rho = 1.0;
        let c = SQRT_2 * rho / eta;
        let p = ProductElement::from_blocks(vec![SocElement::new(vec![c / 2.0], c / 2.0), SocElement::zero(1)]);
        let mut s = MaxPlayerState::new(2, 1);
        mwu_update(&mut s, &p, eta, rho);
        let e = 1f64.exp();
        assert!((s.y().head(0) - (e + 1.0) / (SQRT_2 * (e + 3.0))).abs() < 1e-14);
        assert!((s.y().head(1) - 2.0 / (SQRT_2 * (e + 3.0))).abs() < 1e-14);
        assert!((s.y().bar(0)[0] - (e - 1.0) / (SQRT_2 * (e + 3.0))).abs() < 1e-14);
    }

    struct ConstantPlayer {
        payoff: ProductElement,
    }

    impl MinPlayer for ConstantPlayer {
        type Point = ();
        fn shape(&self) -> (usize, usize) {
            (self.payoff.num_blocks(), self.payoff.dim())
        }
        fn new_point(&self) {}
        fn respond(&mut self, _y: &ProductElement, _x: &mut (), payoff: &mut ProductElement) {
            payoff.clone_from(&self.payoff);
        }
        fn accumulate(&mut self, _mean: &mut (), _x: &(), _count: u64) {}
    }

    #[test]
    fn constant_payoff_has_zero_gap() {
        let mut e = ProductElement::identity(1, 2);
        e.scale(FRAC_1_SQRT_2);
        let mut player = ConstantPlayer { payoff: e };
        let cfg = GameConfig::new(0.1, 1.0).unwrap();
        let GameOutcome::Completed(cert) = solve_game(&mut player, &cfg, |info| {
            assert!((info.oracle_value - FRAC_1_SQRT_2).abs() < 1e-12);
            Control::Continue
        })
        .unwrap() else {
            panic!("no early stop was requested");
        };
        assert!(cert.gap_upper_bound.abs() < 1e-12);
        assert!((cert.min_value - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn width_breach_on_first_iteration() {
        let mut p = ProductElement::identity(2, 1);
        p.scale(3.0);
        let mut player = ConstantPlayer { payoff: p };
        let cfg = GameConfig::new(0.1, 1.0).unwrap();
        match solve_game(&mut player, &cfg, |_| Control::Continue) {
            Err(GameError::WidthBreach { iteration, observed_norm, .. }) => {
                assert_eq!(iteration, 1);
                assert!((observed_norm - 3.0).abs() < 1e-12);
            }
            other => panic!("expected a width breach, got {other:?}"),
        }
    }

    #[test]
    fn monitor_can_stop() {
        let mut player = ConstantPlayer { payoff: ProductElement::zeros(2, 1) };
        let cfg = GameConfig::new(0.01, 1.0).unwrap();
        let out =
            solve_game(&mut player, &cfg, |info| if info.iteration == 5 { Control::Stop } else { Control::Continue })
                .unwrap();
        assert!(matches!(out, GameOutcome::Stopped(EarlyTermination { iteration: 5, .. })));
    }

    fn payoff_strategy() -> impl Strategy<Value = Vec<ProductElement>> {
        (1usize..5, 1usize..4).prop_flat_map(|(n, d)| {
            prop::collection::vec(
                (prop::collection::vec(-1.0..1.0f64, n * d), prop::collection::vec(-1.0..1.0f64, n)).prop_map(
                    move |(bars, heads)| {
                        let blocks =
                            (0..n).map(|i| SocElement::new(bars[i * d..(i + 1) * d].to_vec(), heads[i])).collect();
                        ProductElement::from_blocks(blocks)
                    },
                ),
                1..40,
            )
        })
    }

    proptest! {
        #[test]
        fn state_invariants_hold(payoffs in payoff_strategy(), eta in 0.01..3.0f64) {
            let n = payoffs[0].num_blocks();
            let d = payoffs[0].dim();
            let mut s = MaxPlayerState::new(n, d);
            let mut sum = ProductElement::zeros(n, d);
            for p in &payoffs {
                mwu_update(&mut s, p, eta, 1.0);
                sum.axpy(1.0, p);
                let heads: f64 = s.y().heads().iter().sum();
                prop_assert!((heads - FRAC_1_SQRT_2).abs() < 1e-9);
                prop_assert!(in_cone(s.y(), 1e-9));
            }
            // Pure accumulation: exact equality with sequential summation.
            for i in 0..n {
                prop_assert_eq!(s.alpha(i), sum.bar(i));
            }
            prop_assert_eq!(s.beta(), sum.heads());
        }

        #[test]
        fn closed_form_matches_generic_exponential(payoffs in payoff_strategy(), eta in 0.01..3.0f64) {
            let n = payoffs[0].num_blocks();
            let d = payoffs[0].dim();
            let mut s = MaxPlayerState::new(n, d);
            let mut sum = ProductElement::zeros(n, d);
            for p in &payoffs {
                mwu_update(&mut s, p, eta, 1.5);
                sum.axpy(1.0, p);
            }
            let generic = generic_max_player(&ProductCone { n, d }, &sum, eta, 1.5);
            let diff = s.y().bars_flat().iter().zip(generic.bars_flat())
                .chain(s.y().heads().iter().zip(generic.heads()))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            prop_assert!(diff < 1e-12);
        }
    }
}
