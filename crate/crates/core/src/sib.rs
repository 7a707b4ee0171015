//! Smallest intersecting ball: find the smallest ball meeting every body.
//!
//! The problem is cast as a game whose min player picks a center `z` and a
//! witness `v_i ∈ Ω_i` per body, with payoff blocks `(v_i − z, 0)`. Its value
//! is `r*/√2`. The driver guesses a radius scale `r`, solves the game to
//! additive accuracy `ε r/√2`, and accepts once the duality gap of the
//! averaged strategies is small relative to the lower bound. Unknown width
//! and radius scales are found by doubling and halving restarts.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use thiserror::Error;

use crate::bodies::{crude_radius_bound, support_max_into, ConvexBody, LmoScratch, SupportScratch};
use crate::eja::{trace_inner, ProductElement};
use crate::game::{solve_game, Control, GameConfig, GameError, GameOutcome, MinPlayer, DEFAULT_ITERATION_CAP};

#[derive(Debug, Error)]
pub enum SolveError<S: std::fmt::Debug> {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("degenerate instance: the bodies appear to share a common point (scale {scale:e} fell below {floor:e})")]
    Degenerate { scale: f64, floor: f64 },
    #[error("iteration cap exhausted before the stopping test passed")]
    IterationCapExhausted { partial: Box<S> },
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    /// Per-game iteration cap.
    pub max_iterations_cap: u64,
    /// Worker threads for the per-body oracle calls; `1` runs inline.
    pub threads: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations_cap: DEFAULT_ITERATION_CAP, threads: 1 }
    }
}

/// Smallest radius guess or bracket width before a run is declared degenerate.
pub fn scale_floor(e: f64) -> f64 {
    (1e-9 * e).max(1e-12)
}

pub(crate) fn validate_bodies(bodies: &[ConvexBody], epsilon: f64) -> Result<usize, String> {
    if bodies.len() < 2 {
        return Err(format!("need at least 2 bodies, got {}", bodies.len()));
    }
    let d = bodies[0].dim();
    if let Some(i) = bodies.iter().position(|b| b.dim() != d) {
        return Err(format!("body {i} has dimension {}, expected {d}", bodies[i].dim()));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(format!("epsilon must be positive and finite, got {epsilon}"));
    }
    Ok(d)
}

pub(crate) fn run_with_threads<T: Send>(threads: usize, f: impl FnOnce(bool) -> T + Send) -> T {
    if threads > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(|| f(true));
        }
    }
    f(false)
}

#[derive(Debug, Clone)]
pub struct SibInstance {
    bodies: Vec<ConvexBody>,
    epsilon: f64,
}

impl SibInstance {
    /// Requires at least two bodies of one dimension and a positive `epsilon`.
    pub fn new(bodies: Vec<ConvexBody>, epsilon: f64) -> Result<Self, SolveError<SibSolution>> {
        validate_bodies(&bodies, epsilon).map_err(SolveError::InvalidInstance)?;
        Ok(Self { bodies, epsilon })
    }

    pub fn bodies(&self) -> &[ConvexBody] {
        &self.bodies
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.bodies[0].dim()
    }
}

/// Min-player point: center, one witness per body, and for polytope bodies
/// the convex-combination coefficients of the witness.
#[derive(Debug, Clone, PartialEq)]
pub struct SibPoint {
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
}

impl SibPoint {
    pub(crate) fn new(bodies: &[ConvexBody]) -> Self {
        let d = bodies[0].dim();
        Self {
            z: vec![0.0; d],
            v: vec![0.0; d * bodies.len()],
            coefficients: bodies.iter().map(|b| vec![0.0; b.num_points().unwrap_or(0)]).collect(),
        }
    }

    pub fn witness(&self, i: usize) -> &[f64] {
        let d = self.z.len();
        &self.v[i * d..(i + 1) * d]
    }

    pub(crate) fn distances(&self) -> Vec<f64> {
        self.v.chunks(self.z.len()).map(|vi| dist(vi, &self.z)).collect()
    }

    pub(crate) fn update_mean(&mut self, x: &SibPoint, count: u64, skip_witnesses: bool) {
        let w = 1.0 / count as f64;
        let mix = |m: &mut f64, s: f64| *m += (s - *m) * w;
        self.z.iter_mut().zip(&x.z).for_each(|(m, s)| mix(m, *s));
        if skip_witnesses {
            return;
        }
        self.v.iter_mut().zip(&x.v).for_each(|(m, s)| mix(m, *s));
        for (mc, xc) in self.coefficients.iter_mut().zip(&x.coefficients) {
            mc.iter_mut().zip(xc).for_each(|(m, s)| mix(m, *s));
        }
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

type BlockSlot<'s> = (usize, ((&'s mut [f64], &'s mut Vec<f64>), &'s mut LmoScratch));

/// Per-body linear minimization plus hull support, shared by the hard and
/// soft games.
#[derive(Debug)]
pub(crate) struct BlockOracle<'a> {
    bodies: &'a [ConvexBody],
    d: usize,
    scratches: Vec<LmoScratch>,
    support: SupportScratch,
    h: Vec<f64>,
    parallel: bool,
    /// All bodies are single points: witnesses never change.
    pub(crate) singletons: bool,
}

impl<'a> BlockOracle<'a> {
    pub(crate) fn new(bodies: &'a [ConvexBody], parallel: bool) -> Self {
        let singletons = bodies.iter().all(|b| matches!(b, ConvexBody::Polytope(_)) && b.num_points() == Some(1));
        Self {
            bodies,
            d: bodies[0].dim(),
            scratches: vec![LmoScratch::new(); bodies.len()],
            support: SupportScratch::default(),
            h: vec![0.0; bodies[0].dim()],
            parallel,
            singletons,
        }
    }

    pub(crate) fn bodies(&self) -> &'a [ConvexBody] {
        self.bodies
    }

    /// Best response of the `(z, v)` part to `y`. Returns
    /// `Σ_i ȳ_iᵀ(v_i − z)`.
    pub(crate) fn respond(&mut self, y: &ProductElement, x: &mut SibPoint) -> f64 {
        let d = self.d;
        if self.singletons {
            for (i, b) in self.bodies.iter().enumerate() {
                if let ConvexBody::Polytope(p) = b {
                    x.v[i * d..(i + 1) * d].copy_from_slice(p.point(0));
                    x.coefficients[i][0] = 1.0;
                }
            }
        } else {
            let bodies = self.bodies;
            let solve_block = |(i, ((vi, ci), sc)): BlockSlot<'_>| {
                bodies[i].lmo_into(y.bar(i), vi, sc);
                if !ci.is_empty() {
                    ci.iter_mut().for_each(|c| *c = 0.0);
                    for &(j, w) in sc.picks() {
                        ci[j] += w;
                    }
                }
            };
            if self.parallel {
                x.v.par_chunks_mut(d)
                    .zip(x.coefficients.par_iter_mut())
                    .zip(self.scratches.par_iter_mut())
                    .enumerate()
                    .for_each(solve_block);
            } else {
                x.v.chunks_mut(d)
                    .zip(x.coefficients.iter_mut())
                    .zip(self.scratches.iter_mut())
                    .enumerate()
                    .for_each(solve_block);
            }
        }
        self.h.iter_mut().for_each(|v| *v = 0.0);
        let mut value = 0.0;
        for i in 0..self.bodies.len() {
            let yi = y.bar(i);
            self.h.iter_mut().zip(yi).for_each(|(a, b)| *a += b);
            value += yi.iter().zip(x.witness(i)).map(|(a, b)| a * b).sum::<f64>();
        }
        let (_, support) = support_max_into(self.bodies, &self.h, &mut x.z, &mut self.support);
        value - support
    }
}

/// The hard-margin game's min player.
#[derive(Debug)]
pub(crate) struct SibPlayer<'a> {
    oracle: BlockOracle<'a>,
}

impl<'a> SibPlayer<'a> {
    pub(crate) fn new(bodies: &'a [ConvexBody], parallel: bool) -> Self {
        Self { oracle: BlockOracle::new(bodies, parallel) }
    }
}

impl MinPlayer for SibPlayer<'_> {
    type Point = SibPoint;

    fn shape(&self) -> (usize, usize) {
        (self.oracle.bodies.len(), self.oracle.d)
    }

    fn new_point(&self) -> SibPoint {
        SibPoint::new(self.oracle.bodies)
    }

    fn respond(&mut self, y: &ProductElement, x: &mut SibPoint, payoff: &mut ProductElement) {
        self.oracle.respond(y, x);
        for i in 0..self.oracle.bodies.len() {
            let vi = x.witness(i);
            payoff.bar_mut(i).iter_mut().zip(vi).zip(&x.z).for_each(|((p, v), z)| *p = v - z);
            payoff.set_head(i, 0.0);
        }
    }

    fn accumulate(&mut self, mean: &mut SibPoint, x: &SibPoint, count: u64) {
        mean.update_mean(x, count, self.oracle.singletons && count > 1);
    }
}

/// A best response of the hard-margin min player.
#[derive(Debug, Clone, PartialEq)]
pub struct SibOracleResponse {
    pub z: Vec<f64>,
    pub witnesses: Vec<Vec<f64>>,
    pub payoff: ProductElement,
    /// `payoff • y`.
    pub oracle_value: f64,
}

/// Minimises `f(z, v) • y` over centers in the hull of the bodies and
/// witnesses in the bodies.
pub fn sib_oracle(bodies: &[ConvexBody], y: &ProductElement) -> SibOracleResponse {
    let mut player = SibPlayer::new(bodies, false);
    let mut x = player.new_point();
    let mut payoff = ProductElement::zeros(bodies.len(), bodies[0].dim());
    player.respond(y, &mut x, &mut payoff);
    let oracle_value = trace_inner(&payoff, y).expect("payoff has the shape of y");
    SibOracleResponse {
        witnesses: (0..bodies.len()).map(|i| x.witness(i).to_vec()).collect(),
        z: x.z,
        payoff,
        oracle_value,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SibSolution {
    pub center: Vec<f64>,
    pub witnesses: Vec<Vec<f64>>,
    /// Convex-combination coefficients certifying polytope witnesses.
    pub witness_coefficients: Vec<Option<Vec<f64>>>,
    /// `max_i ‖center − witness_i‖`.
    pub radius: f64,
    /// Upper game value `radius/√2`.
    pub nu_x: f64,
    /// Lower game value of the averaged max-player strategy.
    pub nu_y: f64,
    pub width_doublings: u32,
    pub radius_halvings: u32,
    pub total_iterations: u64,
    /// Whether the last game hit the iteration cap.
    pub capped: bool,
}

impl SibSolution {
    /// Largest violation of `‖center − v_i‖ ≤ radius` or of witness membership.
    pub fn feasibility_residual(&self, bodies: &[ConvexBody]) -> f64 {
        let mut worst = 0.0f64;
        for (i, (w, b)) in self.witnesses.iter().zip(bodies).enumerate() {
            worst = worst.max(dist(w, &self.center) - self.radius);
            if !b.contains(w, self.witness_coefficients[i].as_deref(), 1e-9) {
                worst = f64::INFINITY;
            }
        }
        worst.max(0.0)
    }
}

pub(crate) fn coefficient_certificates(bodies: &[ConvexBody], point: &SibPoint) -> Vec<Option<Vec<f64>>> {
    bodies.iter().zip(&point.coefficients).map(|(b, c)| b.num_points().map(|_| c.clone())).collect()
}

/// Solves the instance to relative accuracy `epsilon`.
///
/// On success, `radius ≤ (1 + ε)·r*`, certified by the returned `nu_x` and
/// `nu_y`: `nu_y ≤ r*/√2 ≤ nu_x` and `(nu_x − nu_y)/nu_y ≤ ε`.
pub fn solve(instance: &SibInstance, options: &SolverOptions) -> Result<SibSolution, SolveError<SibSolution>> {
    run_with_threads(options.threads, |parallel| solve_inner(instance, options, parallel))
}

fn solve_inner(
    instance: &SibInstance,
    options: &SolverOptions,
    parallel: bool,
) -> Result<SibSolution, SolveError<SibSolution>> {
    let bodies = instance.bodies();
    let eps = instance.epsilon();
    let (e, _) = crude_radius_bound(bodies);
    let floor = scale_floor(e);
    if e <= floor {
        return Err(SolveError::Degenerate { scale: e, floor });
    }
    let mut rho = 2.0 * e;
    let mut guess = e / 2.0;
    let mut doublings = 0;
    let mut halvings = 0;
    let mut total = 0u64;
    let mut player = SibPlayer::new(bodies, parallel);

    loop {
        let game_eps = (eps * guess / SQRT_2).min(2.0 * rho);
        let config = GameConfig::new(game_eps, rho)?.with_iteration_cap(options.max_iterations_cap)?;
        let cert = match solve_game(&mut player, &config, |_| Control::Continue) {
            Err(GameError::WidthBreach { iteration, .. }) => {
                total += iteration;
                rho *= 2.0;
                doublings += 1;
                continue;
            }
            Err(other) => return Err(other.into()),
            Ok(GameOutcome::Stopped(_)) => unreachable!("the monitor never stops the hard game"),
            Ok(GameOutcome::Completed(cert)) => cert,
        };
        total += cert.iterations_run;
        let x = &cert.x_bar;
        let radius = x.distances().into_iter().fold(0.0, f64::max);
        let nu_x = radius / SQRT_2;
        let nu_y = cert.min_value;
        let solution = SibSolution {
            center: x.z.clone(),
            witnesses: (0..bodies.len()).map(|i| x.witness(i).to_vec()).collect(),
            witness_coefficients: coefficient_certificates(bodies, x),
            radius,
            nu_x,
            nu_y,
            width_doublings: doublings,
            radius_halvings: halvings,
            total_iterations: total,
            capped: cert.schedule.capped,
        };
        if nu_y > 0.0 && (nu_x - nu_y) / nu_y <= eps {
            return Ok(solution);
        }
        if radius <= floor {
            return Err(SolveError::Degenerate { scale: radius, floor });
        }
        if cert.schedule.capped {
            return Err(SolveError::IterationCapExhausted { partial: Box::new(solution) });
        }
        guess /= 2.0;
        halvings += 1;
        if guess < floor {
            return Err(SolveError::Degenerate { scale: guess, floor });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: f64, y: f64) -> ConvexBody {
        ConvexBody::polytope(&[vec![x, y]]).unwrap()
    }

    #[test]
    fn oracle_at_uniform_start() {
        let bodies = [point(0.0, 0.0), point(2.0, 0.0)];
        let mut y = ProductElement::zeros(2, 2);
        y.set_head(0, 0.5 / SQRT_2);
        y.set_head(1, 0.5 / SQRT_2);
        let r = sib_oracle(&bodies, &y);
        assert_eq!(r.z, vec![0.0, 0.0]);
        assert_eq!(r.payoff.bar(0), &[0.0, 0.0]);
        assert_eq!(r.payoff.bar(1), &[2.0, 0.0]);
        assert_eq!(r.payoff.heads(), &[0.0, 0.0]);
    }

    #[test]
    fn oracle_on_opposed_balls() {
        let bodies = [ConvexBody::ball(vec![0.0, 0.0], 0.5).unwrap(), ConvexBody::ball(vec![4.0, 0.0], 0.5).unwrap()];
        let s = 0.2;
        let mut y = ProductElement::zeros(2, 2);
        y.bar_mut(0)[0] = s;
        y.bar_mut(1)[0] = -s;
        y.set_head(0, 0.5 / SQRT_2);
        y.set_head(1, 0.5 / SQRT_2);
        let r = sib_oracle(&bodies, &y);
        assert_eq!(r.witnesses, vec![vec![-0.5, 0.0], vec![4.5, 0.0]]);
        // The block directions cancel, so the hull functional is zero and the
        // first body's center wins the tie.
        assert_eq!(r.z, vec![0.0, 0.0]);

        y.bar_mut(1)[0] = -s / 2.0;
        let r = sib_oracle(&bodies, &y);
        assert_eq!(r.z, vec![4.5, 0.0]);
    }

    #[test]
    fn two_points() {
        let inst = SibInstance::new(vec![point(0.0, 0.0), point(2.0, 0.0)], 0.05).unwrap();
        let sol = solve(&inst, &SolverOptions::default()).unwrap();
        assert!(sol.radius >= 1.0 - 1e-12 && sol.radius <= 1.05, "radius {}", sol.radius);
        assert!(dist(&sol.center, &[1.0, 0.0]) <= 0.06);
        assert!(sol.nu_y <= sol.nu_x);
        assert_eq!(sol.feasibility_residual(inst.bodies()), 0.0);
    }

    #[test]
    fn identical_bodies_are_degenerate() {
        let b = ConvexBody::ball(vec![1.0, 1.0], 0.3).unwrap();
        let inst = SibInstance::new(vec![b.clone(), b.clone(), b], 0.05).unwrap();
        assert!(matches!(solve(&inst, &SolverOptions::default()), Err(SolveError::Degenerate { .. })));
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(matches!(SibInstance::new(vec![point(0.0, 0.0)], 0.1), Err(SolveError::InvalidInstance(_))));
        let mixed = vec![point(0.0, 0.0), ConvexBody::ball(vec![0.0], 1.0).unwrap()];
        assert!(matches!(SibInstance::new(mixed, 0.1), Err(SolveError::InvalidInstance(_))));
        assert!(matches!(
            SibInstance::new(vec![point(0.0, 0.0), point(1.0, 0.0)], 0.0),
            Err(SolveError::InvalidInstance(_))
        ));
    }

    #[test]
    fn threaded_run_is_identical() {
        let bodies = vec![
            ConvexBody::ball(vec![0.0, 0.0], 0.5).unwrap(),
            ConvexBody::polytope(&[vec![3.0, 1.0], vec![4.0, 2.0], vec![3.5, 3.0]]).unwrap(),
            ConvexBody::aabb(vec![1.0, -3.0], vec![2.0, -2.5]).unwrap(),
        ];
        let inst = SibInstance::new(bodies, 0.1).unwrap();
        let a = solve(&inst, &SolverOptions::default()).unwrap();
        let b = solve(&inst, &SolverOptions { threads: 3, ..SolverOptions::default() }).unwrap();
        assert_eq!(a, b);
    }
}
