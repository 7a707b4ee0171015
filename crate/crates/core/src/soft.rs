//! Soft-margin smallest intersecting ball:
//! minimise `r + C Σ ξ_i` subject to `‖z − v_i‖ ≤ r + ξ_i`, `v_i ∈ Ω_i`,
//! `ξ ≥ 0`, `r ≥ 0`.
//!
//! A feasibility test decides, for a target `α̂`, whether the optimum is
//! below `α̂` by playing a game with payoff blocks `(v_i − z, −r − ξ_i)` over
//! the budget set `r + C Σ ξ ≤ α̂`. An outer search shrinks a bracket
//! `[L, U]` around the optimum by a factor 2/3 per test.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::bodies::{crude_radius_bound, reduced_k, ConvexBody};
use crate::eja::{trace_inner, ProductElement};
use crate::game::{solve_game, Control, GameConfig, GameError, GameOutcome, MinPlayer};
use crate::sib::{
    coefficient_certificates, dist, run_with_threads, scale_floor, solve as solve_hard, validate_bodies, BlockOracle,
    SibInstance, SibPoint, SolveError, SolverOptions,
};

#[derive(Debug, Clone)]
pub struct SoftSibInstance {
    bodies: Vec<ConvexBody>,
    c: f64,
    epsilon: f64,
}

impl SoftSibInstance {
    pub fn new(bodies: Vec<ConvexBody>, c: f64, epsilon: f64) -> Result<Self, SolveError<SoftSibSolution>> {
        validate_bodies(&bodies, epsilon).map_err(SolveError::InvalidInstance)?;
        if !(c.is_finite() && c > 0.0) {
            return Err(SolveError::InvalidInstance(format!("C must be positive and finite, got {c}")));
        }
        Ok(Self { bodies, c, epsilon })
    }

    pub fn bodies(&self) -> &[ConvexBody] {
        &self.bodies
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Reusable buffer for [`xi_r_into`].
#[derive(Debug, Clone, Default)]
pub struct XiRScratch {
    order: Vec<(f64, usize)>,
}

/// Maximises `r/√2 + Σ y_i ξ_i` over `r + C Σ ξ ≤ α̂`, `0 ≤ ξ ≤ D`,
/// `0 ≤ r ≤ D`, writing `ξ` into `xi` and returning `r`.
///
/// The budget goes greedily to the slacks whose weight per unit of budget,
/// `y_i/C`, is at least that of the radius, `1/√2`; each slack is capped at
/// `β = min(D, α̂/C)`. Ties among equal weights go to the lower index.
pub fn xi_r_into(y_heads: &[f64], c: f64, alpha_hat: f64, d: f64, xi: &mut [f64], scratch: &mut XiRScratch) -> f64 {
    let beta = d.min(alpha_hat / c);
    let k = if c * beta >= alpha_hat { 1 } else { reduced_k(c * beta / alpha_hat, usize::MAX) };
    xi.iter_mut().for_each(|v| *v = 0.0);
    scratch.order.clear();
    scratch.order.extend(y_heads.iter().enumerate().filter(|(_, &y)| y / c >= FRAC_1_SQRT_2).map(|(i, &y)| (y, i)));
    let favoured = scratch.order.len();
    if favoured >= k {
        let cmp = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        scratch.order.select_nth_unstable_by(k - 1, cmp);
        for &(_, i) in &scratch.order[..k - 1] {
            xi[i] = beta;
        }
        xi[scratch.order[k - 1].1] = (alpha_hat / c - (k - 1) as f64 * beta).clamp(0.0, beta);
        0.0
    } else {
        for &(_, i) in &scratch.order {
            xi[i] = beta;
        }
        let left = (alpha_hat - favoured as f64 * c * beta).max(0.0);
        let r = left.min(d);
        // Only reachable when the target exceeds the box: the radius is full
        // and the remaining budget goes to the other slacks by weight.
        let mut left = left - r;
        if left > 0.0 {
            scratch.order.clear();
            scratch.order.extend(
                y_heads.iter().enumerate().filter(|(_, &y)| y > 0.0 && y / c < FRAC_1_SQRT_2).map(|(i, &y)| (y, i)),
            );
            scratch.order.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for &(_, i) in &scratch.order {
                if left <= 0.0 {
                    break;
                }
                xi[i] = (left / c).min(beta);
                left -= c * xi[i];
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiR {
    pub xi: Vec<f64>,
    pub r: f64,
}

pub fn xi_r_suboracle(y_heads: &[f64], c: f64, alpha_hat: f64, d: f64) -> XiR {
    let mut xi = vec![0.0; y_heads.len()];
    let r = xi_r_into(y_heads, c, alpha_hat, d, &mut xi, &mut XiRScratch::default());
    XiR { xi, r }
}

/// Cheapest `(r, ξ)` for fixed center-to-witness distances:
/// minimises `r + C Σ max(0, d_i − r)` over `r ≥ 0`, preferring the smaller
/// `r` among ties.
pub fn optimal_slacks(distances: &[f64], c: f64) -> (f64, Vec<f64>) {
    let mut sorted: Vec<f64> = distances.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let objective = |r: f64| r + c * distances.iter().map(|d| (d - r).max(0.0)).sum::<f64>();
    let mut best_r = 0.0;
    let mut best = objective(0.0);
    // The objective is piecewise linear with kinks at the distances.
    for &r in &sorted {
        let g = objective(r);
        if g < best || (g == best && r < best_r) {
            best = g;
            best_r = r;
        }
    }
    let xi = distances.iter().map(|d| (d - best_r).max(0.0)).collect();
    (best_r, xi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftPoint {
    pub base: SibPoint,
    pub xi: Vec<f64>,
    pub r: f64,
}

#[derive(Debug)]
struct SoftPlayer<'a> {
    oracle: BlockOracle<'a>,
    c: f64,
    alpha_hat: f64,
    box_bound: f64,
    xi_scratch: XiRScratch,
}

impl MinPlayer for SoftPlayer<'_> {
    type Point = SoftPoint;

    fn shape(&self) -> (usize, usize) {
        let n = self.oracle_len();
        (n, self.dim())
    }

    fn new_point(&self) -> SoftPoint {
        let base = SibPoint::new(self.bodies());
        SoftPoint { xi: vec![0.0; self.oracle_len()], base, r: 0.0 }
    }

    fn respond(&mut self, y: &ProductElement, x: &mut SoftPoint, payoff: &mut ProductElement) {
        self.oracle.respond(y, &mut x.base);
        x.r = xi_r_into(y.heads(), self.c, self.alpha_hat, self.box_bound, &mut x.xi, &mut self.xi_scratch);
        for i in 0..x.xi.len() {
            let vi = x.base.witness(i);
            payoff.bar_mut(i).iter_mut().zip(vi).zip(&x.base.z).for_each(|((p, v), z)| *p = v - z);
            payoff.set_head(i, -x.r - x.xi[i]);
        }
    }

    fn accumulate(&mut self, mean: &mut SoftPoint, x: &SoftPoint, count: u64) {
        mean.base.update_mean(&x.base, count, self.oracle.singletons && count > 1);
        let w = 1.0 / count as f64;
        mean.xi.iter_mut().zip(&x.xi).for_each(|(m, s)| *m += (s - *m) * w);
        mean.r += (x.r - mean.r) * w;
    }
}

impl<'a> SoftPlayer<'a> {
    fn new(bodies: &'a [ConvexBody], c: f64, parallel: bool) -> Self {
        Self {
            oracle: BlockOracle::new(bodies, parallel),
            c,
            alpha_hat: 1.0,
            box_bound: 1.0,
            xi_scratch: XiRScratch::default(),
        }
    }

    fn bodies(&self) -> &'a [ConvexBody] {
        self.oracle.bodies()
    }

    fn oracle_len(&self) -> usize {
        self.oracle.bodies().len()
    }

    fn dim(&self) -> usize {
        self.oracle.bodies()[0].dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftOracleResponse {
    pub z: Vec<f64>,
    pub witnesses: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    pub r: f64,
    pub payoff: ProductElement,
    pub oracle_value: f64,
}

/// Best response of the soft game's min player to `y` for target `alpha_hat`
/// and box bound `d`.
pub fn soft_oracle(bodies: &[ConvexBody], y: &ProductElement, c: f64, alpha_hat: f64, d: f64) -> SoftOracleResponse {
    let mut player = SoftPlayer::new(bodies, c, false);
    player.alpha_hat = alpha_hat;
    player.box_bound = d;
    let mut x = player.new_point();
    let mut payoff = ProductElement::zeros(bodies.len(), bodies[0].dim());
    player.respond(y, &mut x, &mut payoff);
    let oracle_value = trace_inner(&payoff, y).expect("payoff has the shape of y");
    SoftOracleResponse {
        witnesses: (0..bodies.len()).map(|i| x.base.witness(i).to_vec()).collect(),
        z: x.base.z,
        xi: x.xi,
        r: x.r,
        payoff,
        oracle_value,
    }
}

/// [`soft_oracle`] for point data: witnesses are the points themselves and
/// the center is the point maximising `hᵀp` with `h = Σ ȳ_i`.
pub fn svdd_oracle(points: &[Vec<f64>], y: &ProductElement, c: f64, alpha_hat: f64, d: f64) -> SoftOracleResponse {
    let bodies: Vec<ConvexBody> =
        points.iter().map(|p| ConvexBody::polytope(std::slice::from_ref(p)).expect("finite points")).collect();
    soft_oracle(&bodies, y, c, alpha_hat, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftSibSolution {
    pub center: Vec<f64>,
    pub witnesses: Vec<Vec<f64>>,
    pub witness_coefficients: Vec<Option<Vec<f64>>>,
    pub slacks: Vec<f64>,
    pub radius: f64,
    /// `radius + C Σ slacks`.
    pub objective: f64,
    /// Certified lower bound on the optimal objective.
    pub lower_bound: f64,
    pub bracket_steps: u32,
    /// `(L, U)` before each feasibility test and after the last one.
    pub bracket_history: Vec<(f64, f64)>,
    pub width_doublings: u32,
    pub total_iterations: u64,
    /// `C > 1`: solved as a hard instance with zero slacks.
    pub delegated_to_hard: bool,
    pub capped: bool,
}

impl SoftSibSolution {
    /// Largest violation of `‖center − v_i‖ ≤ radius + ξ_i`, of sign
    /// constraints, or of witness membership.
    pub fn feasibility_residual(&self, bodies: &[ConvexBody]) -> f64 {
        let mut worst = (-self.radius).max(0.0);
        for (i, (w, b)) in self.witnesses.iter().zip(bodies).enumerate() {
            worst = worst.max(dist(w, &self.center) - self.radius - self.slacks[i]).max(-self.slacks[i]);
            if !b.contains(w, self.witness_coefficients[i].as_deref(), 1e-9) {
                worst = f64::INFINITY;
            }
        }
        worst.max(0.0)
    }

    fn from_parts(bodies: &[ConvexBody], c: f64, point: &SibPoint) -> Self {
        let (radius, slacks) = optimal_slacks(&point.distances(), c);
        let objective = radius + c * slacks.iter().sum::<f64>();
        Self {
            center: point.z.clone(),
            witnesses: (0..bodies.len()).map(|i| point.witness(i).to_vec()).collect(),
            witness_coefficients: coefficient_certificates(bodies, point),
            slacks,
            radius,
            objective,
            lower_bound: 0.0,
            bracket_steps: 0,
            bracket_history: Vec::new(),
            width_doublings: 0,
            total_iterations: 0,
            delegated_to_hard: false,
            capped: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FtpOutcome {
    /// A solution with objective at most `(1 + eps)·α̂` (slacks re-optimised
    /// for the averaged center and witnesses).
    Feasible(SoftSibSolution),
    /// Some round certified a positive game value, so the optimum exceeds `α̂`.
    Infeasible { iteration: u64 },
}

/// Mutable search state shared by consecutive feasibility tests.
#[derive(Debug)]
struct FtpContext<'a> {
    player: SoftPlayer<'a>,
    /// Running width proxy; the game width is `3·width_scale/√2`.
    width_scale: f64,
    doublings: u32,
    iterations: u64,
    cap: u64,
}

impl FtpContext<'_> {
    fn run(&mut self, alpha_hat: f64, eps: f64) -> Result<(FtpOutcome, bool), GameError> {
        self.player.alpha_hat = alpha_hat;
        loop {
            let rho = 3.0 * self.width_scale / SQRT_2;
            let game_eps = (eps * alpha_hat / SQRT_2).min(2.0 * rho);
            let config = GameConfig::new(game_eps, rho)?.with_iteration_cap(self.cap)?;
            let monitor = |info: &crate::game::IterationInfo<'_>| {
                if info.oracle_value > 0.0 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            };
            match solve_game(&mut self.player, &config, monitor) {
                Err(GameError::WidthBreach { iteration, .. }) => {
                    self.iterations += iteration;
                    self.width_scale *= 2.0;
                    self.doublings += 1;
                }
                Err(other) => return Err(other),
                Ok(GameOutcome::Stopped(stop)) => {
                    self.iterations += stop.iteration;
                    return Ok((FtpOutcome::Infeasible { iteration: stop.iteration }, false));
                }
                Ok(GameOutcome::Completed(cert)) => {
                    self.iterations += cert.iterations_run;
                    let bodies = self.player.bodies();
                    let mut sol = SoftSibSolution::from_parts(bodies, self.player.c, &cert.x_bar.base);
                    sol.capped = cert.schedule.capped;
                    return Ok((FtpOutcome::Feasible(sol), cert.schedule.capped));
                }
            }
        }
    }
}

/// Upper bound on the diameter of the union of the bodies: the diagonal of
/// their joint bounding box.
fn diameter_bound(bodies: &[ConvexBody]) -> f64 {
    let d = bodies[0].dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for b in bodies {
        let (l, h) = b.bounding_box();
        for j in 0..d {
            lo[j] = lo[j].min(l[j]);
            hi[j] = hi[j].max(h[j]);
        }
    }
    dist(&lo, &hi)
}

/// Decides whether the optimum is at most `alpha_hat`, to relative slack `eps`.
pub fn soft_ftp(
    instance: &SoftSibInstance,
    alpha_hat: f64,
    eps: f64,
    options: &SolverOptions,
) -> Result<FtpOutcome, SolveError<SoftSibSolution>> {
    if !(alpha_hat.is_finite() && alpha_hat > 0.0 && eps.is_finite() && eps > 0.0) {
        return Err(SolveError::InvalidInstance(format!(
            "alpha_hat and eps must be positive, got {alpha_hat} and {eps}"
        )));
    }
    run_with_threads(options.threads, |parallel| {
        let bodies = instance.bodies();
        let (e, _) = crude_radius_bound(bodies);
        let mut player = SoftPlayer::new(bodies, instance.c(), parallel);
        player.box_bound = diameter_bound(bodies);
        let mut ctx = FtpContext {
            player,
            width_scale: e.max(alpha_hat),
            doublings: 0,
            iterations: 0,
            cap: options.max_iterations_cap,
        };
        let (outcome, _) = ctx.run(alpha_hat, eps)?;
        Ok(outcome)
    })
}

/// Solves the instance to relative accuracy `epsilon`.
///
/// `C > 1` makes every slack unprofitable, so those instances are solved as
/// hard instances. Otherwise the bracket `[L, U] = [0, E]` is narrowed by
/// feasibility tests until `U ≤ (1 + ε) L`; the returned solution is the best
/// feasible one found and satisfies `objective ≤ U ≤ (1 + ε)·optimum`.
pub fn solve_soft(
    instance: &SoftSibInstance,
    options: &SolverOptions,
) -> Result<SoftSibSolution, SolveError<SoftSibSolution>> {
    let bodies = instance.bodies();
    let c = instance.c();
    let eps = instance.epsilon();
    if c > 1.0 {
        let hard = SibInstance::new(bodies.to_vec(), eps).map_err(|e| SolveError::InvalidInstance(e.to_string()))?;
        let lift = |s: crate::sib::SibSolution| SoftSibSolution {
            slacks: vec![0.0; s.witnesses.len()],
            objective: s.radius,
            lower_bound: SQRT_2 * s.nu_y.max(0.0),
            center: s.center,
            witnesses: s.witnesses,
            witness_coefficients: s.witness_coefficients,
            radius: s.radius,
            bracket_steps: 0,
            bracket_history: Vec::new(),
            width_doublings: s.width_doublings,
            total_iterations: s.total_iterations,
            delegated_to_hard: true,
            capped: s.capped,
        };
        return match solve_hard(&hard, options) {
            Ok(s) => Ok(lift(s)),
            Err(SolveError::IterationCapExhausted { partial }) => {
                Err(SolveError::IterationCapExhausted { partial: Box::new(lift(*partial)) })
            }
            Err(SolveError::Degenerate { scale, floor }) => Err(SolveError::Degenerate { scale, floor }),
            Err(SolveError::InvalidInstance(m)) => Err(SolveError::InvalidInstance(m)),
            Err(SolveError::Game(g)) => Err(SolveError::Game(g)),
        };
    }
    run_with_threads(options.threads, |parallel| solve_soft_inner(instance, options, parallel))
}

fn solve_soft_inner(
    instance: &SoftSibInstance,
    options: &SolverOptions,
    parallel: bool,
) -> Result<SoftSibSolution, SolveError<SoftSibSolution>> {
    let bodies = instance.bodies();
    let c = instance.c();
    let eps = instance.epsilon();
    let (e, anchor) = crude_radius_bound(bodies);
    let floor = scale_floor(e);
    if e <= floor {
        return Err(SolveError::Degenerate { scale: e, floor });
    }

    // Seed: center at the first representative, witnesses at the others.
    let mut seed = SibPoint::new(bodies);
    seed.z.copy_from_slice(&anchor);
    for (i, b) in bodies.iter().enumerate() {
        let rep = b.representative();
        seed.v[i * rep.len()..(i + 1) * rep.len()].copy_from_slice(&rep);
        if let Some(m) = b.num_points() {
            let w = match b {
                ConvexBody::Polytope(_) => (0..m).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect(),
                _ => vec![1.0 / m as f64; m],
            };
            seed.coefficients[i] = w;
        }
    }
    let mut best = SoftSibSolution::from_parts(bodies, c, &seed);

    let mut player = SoftPlayer::new(bodies, c, parallel);
    player.box_bound = diameter_bound(bodies);
    let mut ctx = FtpContext { player, width_scale: e, doublings: 0, iterations: 0, cap: options.max_iterations_cap };

    let (mut lower, mut upper) = (0.0f64, e);
    let mut history = vec![(lower, upper)];
    let mut steps = 0u32;
    let finish = |mut s: SoftSibSolution, lower: f64, steps: u32, history: Vec<(f64, f64)>, ctx: &FtpContext<'_>| {
        s.lower_bound = lower;
        s.bracket_steps = steps;
        s.bracket_history = history;
        s.width_doublings = ctx.doublings;
        s.total_iterations = ctx.iterations;
        s
    };

    while !(lower > 0.0 && upper <= (1.0 + eps) * lower) {
        if lower == 0.0 && (upper < floor || best.objective <= floor) {
            return Err(SolveError::Degenerate { scale: upper.min(best.objective), floor });
        }
        let gap = upper - lower;
        let alpha_hat = lower + gap / 3.0;
        let eps_step = gap / (3.0 * alpha_hat);
        let (outcome, capped) = ctx.run(alpha_hat, eps_step)?;
        match outcome {
            FtpOutcome::Infeasible { .. } => lower = alpha_hat,
            FtpOutcome::Feasible(sol) => {
                let bound = (1.0 + eps_step) * alpha_hat;
                if capped && sol.objective > bound * (1.0 + 1e-9) {
                    let partial = if sol.objective < best.objective { sol } else { best };
                    let partial = finish(partial, lower, steps, history, &ctx);
                    return Err(SolveError::IterationCapExhausted { partial: Box::new(partial) });
                }
                upper = lower + 2.0 * gap / 3.0;
                if sol.objective < best.objective {
                    best = sol;
                }
            }
        }
        steps += 1;
        history.push((lower, upper));
    }
    best.capped = false;
    Ok(finish(best, lower, steps, history, &ctx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_favoured_set_spends_budget_on_radius() {
        let out = xi_r_suboracle(&[0.1, 0.2, 0.3], 1.0, 0.7, 2.0);
        assert_eq!(out.r, 0.7);
        assert!(out.xi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_slack_takes_whole_budget() {
        // β = min(1, 1) = 1, k = 1.
        let y = [0.9, 0.1];
        let out = xi_r_suboracle(&y, 0.5, 0.5, 1.0);
        assert_eq!(out.r, 0.0);
        assert_eq!(out.xi, vec![1.0, 0.0]);
    }

    #[test]
    fn two_blocks_one_favoured() {
        let y = [0.8 / SQRT_2 * SQRT_2, 0.2 / SQRT_2];
        let out = xi_r_suboracle(&y, 1.0, 1.0, 1.0);
        assert_eq!(out.r, 0.0);
        assert_eq!(out.xi, vec![1.0, 0.0]);
    }

    #[test]
    fn partial_slack_then_radius() {
        // β = 0.5 (box), budget 1.2 with C = 1: two favoured slacks use 1, the radius the rest.
        let y = [0.9, 0.0, 0.8];
        let out = xi_r_suboracle(&y, 1.0, 1.2, 0.5);
        assert_eq!(out.xi, vec![0.5, 0.0, 0.5]);
        assert!((out.r - 0.2).abs() < 1e-15);
        // Budget beyond the box: the radius saturates and the last slack takes the rest.
        let y = [0.9, 0.3, 0.8];
        let out = xi_r_suboracle(&y, 1.0, 2.0, 0.5);
        assert_eq!(out.xi, vec![0.5, 0.5, 0.5]);
        assert_eq!(out.r, 0.5);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let y = [0.8, 0.8, 0.8];
        let out = xi_r_suboracle(&y, 1.0, 0.5, 1.0);
        assert_eq!(out.xi, vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn optimal_slacks_regimes() {
        let d = [1.0, 2.0, 10.0];
        let (r, xi) = optimal_slacks(&d, 0.2);
        assert_eq!(r, 0.0);
        assert_eq!(xi, d.to_vec());
        let (r, xi) = optimal_slacks(&d, 2.0);
        assert_eq!(r, 10.0);
        assert!(xi.iter().all(|&v| v == 0.0));
        // C = 0.6: slope 1 - 0.6·#{d_i > r}; one outlier above r pays less than raising r.
        let (r, xi) = optimal_slacks(&d, 0.6);
        assert_eq!(r, 2.0);
        assert_eq!(xi, vec![0.0, 0.0, 8.0]);
    }

    #[test]
    fn svdd_oracle_uniform_start() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![10.0, 0.0]];
        let mut y = ProductElement::zeros(3, 2);
        (0..3).for_each(|i| y.set_head(i, FRAC_1_SQRT_2 / 3.0));
        let r = svdd_oracle(&pts, &y, 0.6, 1.0, 10.0);
        assert_eq!(r.z, vec![0.0, 0.0]);
        assert_eq!(r.witnesses, pts);
    }

    #[test]
    fn svdd_oracle_concentrated_block() {
        let pts = vec![vec![0.0], vec![2.0], vec![10.0]];
        let mut y = ProductElement::zeros(3, 1);
        y.set_head(1, FRAC_1_SQRT_2);
        y.bar_mut(1)[0] = -0.5;
        let r = svdd_oracle(&pts, &y, 0.6, 1.0, 10.0);
        assert_eq!(r.z, vec![0.0]);
        y.bar_mut(1)[0] = 0.5;
        let r = svdd_oracle(&pts, &y, 0.6, 1.0, 10.0);
        assert_eq!(r.z, vec![10.0]);
    }

    fn points(xs: &[[f64; 2]]) -> Vec<ConvexBody> {
        xs.iter().map(|p| ConvexBody::polytope(&[p.to_vec()]).unwrap()).collect()
    }

    #[test]
    fn trivial_target_is_feasible() {
        let bodies = points(&[[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]]);
        let e = crude_radius_bound(&bodies).0;
        let inst = SoftSibInstance::new(bodies, 0.5, 0.1).unwrap();
        let out = soft_ftp(&inst, e, 0.1, &SolverOptions::default()).unwrap();
        let FtpOutcome::Feasible(sol) = out else { panic!("expected feasible") };
        assert!(sol.objective <= 1.1 * e);
        assert_eq!(sol.feasibility_residual(inst.bodies()), 0.0);
    }

    #[test]
    fn tiny_target_is_infeasible() {
        let bodies = points(&[[0.0, 0.0], [100.0, 0.0]]);
        let inst = SoftSibInstance::new(bodies, 1.0, 0.1).unwrap();
        let out = soft_ftp(&inst, 1e-6 * 100.0, 0.1, &SolverOptions::default()).unwrap();
        assert!(matches!(out, FtpOutcome::Infeasible { .. }));
    }

    #[test]
    fn collinear_svdd() {
        let bodies = points(&[[0.0, 0.0], [2.0, 0.0], [10.0, 0.0]]);
        let inst = SoftSibInstance::new(bodies, 0.6, 0.05).unwrap();
        let sol = solve_soft(&inst, &SolverOptions::default()).unwrap();
        // With C = 0.6 no single slack pays off: the optimum is the enclosing ball, r = 5.
        assert!(sol.objective <= 5.0 * 1.05 + 1e-9, "objective {}", sol.objective);
        assert!(sol.objective >= 5.0 - 1e-9);
        assert!(sol.feasibility_residual(inst.bodies()) <= 1e-9);
        for w in sol.bracket_history.windows(2) {
            let (a, b) = ((w[0].1 - w[0].0), (w[1].1 - w[1].0));
            assert!((b / a - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn large_penalty_delegates() {
        let bodies = points(&[[0.0, 0.0], [2.0, 0.0]]);
        let inst = SoftSibInstance::new(bodies, 2.0, 0.05).unwrap();
        let sol = solve_soft(&inst, &SolverOptions::default()).unwrap();
        assert!(sol.delegated_to_hard);
        assert!(sol.slacks.iter().all(|&v| v == 0.0));
        assert!(sol.radius <= 1.05);
    }

    #[test]
    fn full_slack_goes_to_heaviest_when_all_are_favoured() {
        let got = xi_r_suboracle(&[0.5, 0.9], 0.5, 0.75, 1.0);
        assert_eq!(got.xi, vec![0.5, 1.0]);
        assert_eq!(got.r, 0.0);
    }
}
