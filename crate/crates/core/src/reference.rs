//! Slow, independent oracles for tests.
//!
//! Nothing here calls the production oracles: linear minimization is done by
//! enumeration or sampling, distances by explicit projection (Wolfe's
//! min-norm-point algorithm for polytopes, a Newton solve for ellipsoids),
//! and the ball problems by a central-cut ellipsoid method that carries a
//! certified lower bound.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bodies::ConvexBody;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReferenceError {
    #[error("reference solver exhausted {iterations} steps with gap {gap:e}")]
    BudgetExceeded { iterations: usize, gap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Extra solution components, e.g. `[r, ξ_1, …, ξ_n]` for soft problems.
    pub aux: Vec<f64>,
    pub iterations: usize,
    /// Certified optimality gap, or the sampling resolution for smooth LMOs.
    pub residual: f64,
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normv(a: &[f64]) -> f64 {
    dotv(a, a).sqrt()
}

fn ellipsoid_axes(sigma: &[f64], d: usize) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(DMatrix::from_row_slice(d, d, sigma))
}

/// `Σ^{-1/2}` as a row-major matrix.
fn inverse_sqrt(sigma: &[f64], d: usize) -> DMatrix<f64> {
    let eig = ellipsoid_axes(sigma, d);
    let q = &eig.eigenvectors;
    let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    q * diag * q.transpose()
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = normv(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Minimises `aᵀu` over the unit sphere by sampling and pattern search.
fn sphere_min(a: &[f64], samples: usize, seed: u64) -> (Vec<f64>, f64, usize) {
    let d = a.len();
    if d == 1 {
        let u = vec![if a[0] > 0.0 { -1.0 } else { 1.0 }];
        return (u, -a[0].abs(), 2);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = random_unit(&mut rng, d);
    let mut best_val = dotv(a, &best);
    for _ in 1..samples {
        let u = random_unit(&mut rng, d);
        let v = dotv(a, &u);
        if v < best_val {
            best_val = v;
            best = u;
        }
    }
    let mut step = 0.1;
    let mut evals = samples;
    while step > 1e-12 {
        let mut improved = false;
        for j in 0..d {
            for sign in [1.0, -1.0] {
                let mut u = best.clone();
                u[j] += sign * step;
                let n = normv(&u);
                u.iter_mut().for_each(|x| *x /= n);
                let v = dotv(a, &u);
                evals += 1;
                if v < best_val {
                    best_val = v;
                    best = u;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_val, evals)
}

/// Smallest `k` with `k·nu ≥ 1`, up to rounding.
fn support_count(nu: f64) -> usize {
    let mut k = 1;
    while (k as f64) * nu < 1.0 - 1e-12 {
        k += 1;
    }
    k
}

/// Extreme points of a reduced polytope: `k − 1` vertices at weight `ν` and
/// one more at the residual weight.
fn reduced_vertices(points: &[Vec<f64>], nu: f64) -> Vec<Vec<f64>> {
    let m = points.len();
    let d = points[0].len();
    let k = support_count(nu).min(m);
    let residual = (1.0 - nu * (k - 1) as f64).max(0.0);
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != k - 1 {
            continue;
        }
        for j in (0..m).filter(|j| mask & (1 << j) == 0) {
            let mut v = vec![0.0; d];
            for (i, p) in points.iter().enumerate() {
                let w = if mask & (1 << i) != 0 {
                    nu
                } else if i == j {
                    residual
                } else {
                    0.0
                };
                v.iter_mut().zip(p).for_each(|(a, b)| *a += w * b);
            }
            out.push(v);
        }
    }
    out
}

fn polytope_points(body: &ConvexBody) -> Option<Vec<Vec<f64>>> {
    match body {
        ConvexBody::Polytope(p) => Some((0..p.num_points()).map(|j| p.point(j).to_vec()).collect()),
        ConvexBody::ReducedPolytope(p) => {
            let pts: Vec<Vec<f64>> = (0..p.num_points()).map(|j| p.point(j).to_vec()).collect();
            Some(reduced_vertices(&pts, p.nu()))
        }
        _ => None,
    }
}

/// Brute-force linear minimization: enumeration for polytopes and boxes,
/// sampling plus local search for balls and ellipsoids.
pub fn ref_lmo(body: &ConvexBody, h: &[f64]) -> ReferenceResult {
    if let Some(vertices) = polytope_points(body) {
        let (best, value) = vertices
            .iter()
            .map(|v| (v, dotv(v, h)))
            .fold((&vertices[0], f64::INFINITY), |acc, (v, s)| if s < acc.1 { (v, s) } else { acc });
        return ReferenceResult { value, argmin: best.clone(), aux: vec![], iterations: vertices.len(), residual: 0.0 };
    }
    match body {
        ConvexBody::Aabb(b) => {
            let d = b.lo().len();
            let mut best = (f64::INFINITY, vec![]);
            for mask in 0u32..(1 << d) {
                let corner: Vec<f64> =
                    (0..d).map(|j| if mask & (1 << j) != 0 { b.hi()[j] } else { b.lo()[j] }).collect();
                let v = dotv(&corner, h);
                if v < best.0 {
                    best = (v, corner);
                }
            }
            ReferenceResult { value: best.0, argmin: best.1, aux: vec![], iterations: 1 << d, residual: 0.0 }
        }
        ConvexBody::Ball(b) => {
            let a: Vec<f64> = h.iter().map(|x| x * b.radius()).collect();
            let (u, val, evals) = sphere_min(&a, 4000, 11);
            let argmin = b.center().iter().zip(&u).map(|(c, x)| c + b.radius() * x).collect();
            ReferenceResult {
                value: dotv(b.center(), h) + val,
                argmin,
                aux: vec![],
                iterations: evals,
                residual: 1e-12,
            }
        }
        ConvexBody::Ellipsoid(e) => {
            let d = e.dim();
            let s = inverse_sqrt(e.sigma(), d);
            // Boundary points are c + Σ^{-1/2} u with ‖u‖ = 1.
            let a: Vec<f64> = (0..d).map(|j| (0..d).map(|i| s[(i, j)] * h[i]).sum()).collect();
            let (u, val, evals) = sphere_min(&a, 4000, 13);
            let argmin = (0..d).map(|i| e.center()[i] + (0..d).map(|j| s[(i, j)] * u[j]).sum::<f64>()).collect();
            ReferenceResult {
                value: dotv(e.center(), h) + val,
                argmin,
                aux: vec![],
                iterations: evals,
                residual: 1e-12,
            }
        }
        ConvexBody::Polytope(_) | ConvexBody::ReducedPolytope(_) => unreachable!("handled above"),
    }
}

/// Minimiser of `‖Σ α_k q_k‖` over `Σ α_k = 1` for the listed points.
fn affine_minimizer(q: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let k = set.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            m[(a, b)] = dotv(&q[set[a]], &q[set[b]]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m.lu().solve(&rhs)?;
    let alpha: Vec<f64> = sol.iter().take(k).copied().collect();
    alpha.iter().all(|a| a.is_finite()).then_some(alpha)
}

/// Wolfe's algorithm: the point of `conv(q)` nearest the origin.
fn min_norm_point(q: &[Vec<f64>]) -> Vec<f64> {
    let d = q[0].len();
    let combine = |set: &[usize], lam: &[f64]| {
        let mut x = vec![0.0; d];
        for (&s, &l) in set.iter().zip(lam) {
            x.iter_mut().zip(&q[s]).for_each(|(a, b)| *a += l * b);
        }
        x
    };
    let start = (0..q.len()).min_by(|&a, &b| normv(&q[a]).total_cmp(&normv(&q[b]))).expect("nonempty");
    let mut set = vec![start];
    let mut lam = vec![1.0];
    let mut x = q[start].clone();
    let scale = q.iter().map(|p| dotv(p, p)).fold(0.0, f64::max).max(1e-300);
    for _ in 0..10_000 {
        let j = (0..q.len()).min_by(|&a, &b| dotv(&x, &q[a]).total_cmp(&dotv(&x, &q[b]))).expect("nonempty");
        if dotv(&x, &x) - dotv(&x, &q[j]) <= 1e-15 * scale || set.contains(&j) {
            break;
        }
        set.push(j);
        lam.push(0.0);
        loop {
            let Some(alpha) = affine_minimizer(q, &set) else {
                set.pop();
                lam.pop();
                return combine(&set, &lam);
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                lam = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (a, l) in alpha.iter().zip(&lam) {
                if *a <= 1e-15 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let keep: Vec<bool> = lam.iter().map(|&l| l > 1e-15).collect();
            if keep.iter().all(|&k| k) {
                // No progress possible; drop the smallest weight.
                let worst = (0..lam.len()).min_by(|&a, &b| lam[a].total_cmp(&lam[b])).expect("nonempty");
                set.remove(worst);
                lam.remove(worst);
            } else {
                let mut i = 0;
                set.retain(|_| {
                    i += 1;
                    keep[i - 1]
                });
                lam.retain(|&l| l > 1e-15);
            }
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= total);
            if set.is_empty() {
                return x;
            }
        }
        x = combine(&set, &lam);
    }
    x
}

/// A body prepared for repeated Euclidean projection.
#[derive(Debug, Clone)]
enum Projector {
    Points(Vec<Vec<f64>>),
    Aabb(Vec<f64>, Vec<f64>),
    Ball(Vec<f64>, f64),
    Ellipsoid { center: Vec<f64>, axes: DMatrix<f64>, weights: Vec<f64> },
}

impl Projector {
    fn new(body: &ConvexBody) -> Self {
        if let Some(points) = polytope_points(body) {
            return Self::Points(points);
        }
        match body {
            ConvexBody::Aabb(b) => Self::Aabb(b.lo().to_vec(), b.hi().to_vec()),
            ConvexBody::Ball(b) => Self::Ball(b.center().to_vec(), b.radius()),
            ConvexBody::Ellipsoid(e) => {
                let eig = ellipsoid_axes(e.sigma(), e.dim());
                Self::Ellipsoid {
                    center: e.center().to_vec(),
                    weights: eig.eigenvalues.iter().copied().collect(),
                    axes: eig.eigenvectors,
                }
            }
            ConvexBody::Polytope(_) | ConvexBody::ReducedPolytope(_) => unreachable!("handled above"),
        }
    }

    fn project(&self, z: &[f64]) -> Vec<f64> {
        match self {
            Self::Points(points) => {
                if points.len() == 1 {
                    return points[0].clone();
                }
                let shifted: Vec<Vec<f64>> =
                    points.iter().map(|p| p.iter().zip(z).map(|(a, b)| a - b).collect()).collect();
                let x = min_norm_point(&shifted);
                x.iter().zip(z).map(|(a, b)| a + b).collect()
            }
            Self::Aabb(lo, hi) => z.iter().zip(lo).zip(hi).map(|((x, l), h)| x.clamp(*l, *h)).collect(),
            Self::Ball(c, r) => {
                let diff: Vec<f64> = z.iter().zip(c).map(|(a, b)| a - b).collect();
                let n = normv(&diff);
                if n <= *r {
                    z.to_vec()
                } else {
                    c.iter().zip(&diff).map(|(ci, di)| ci + di * r / n).collect()
                }
            }
            Self::Ellipsoid { center, axes, weights } => {
                let d = center.len();
                let diff = DVector::from_iterator(d, z.iter().zip(center).map(|(a, b)| a - b));
                let w = axes.transpose() * diff;
                let phi =
                    |mu: f64| (0..d).map(|j| weights[j] * (w[j] / (1.0 + mu * weights[j])).powi(2)).sum::<f64>() - 1.0;
                if phi(0.0) <= 0.0 {
                    return z.to_vec();
                }
                // φ is convex and decreasing in μ, so Newton from 0 increases monotonically to the root.
                let mut mu = 0.0f64;
                for _ in 0..500 {
                    let f = phi(mu);
                    let df: f64 = (0..d)
                        .map(|j| -2.0 * weights[j].powi(2) * w[j].powi(2) / (1.0 + mu * weights[j]).powi(3))
                        .sum();
                    let next = mu - f / df;
                    if !next.is_finite() || (next - mu).abs() <= 1e-12 * (1.0 + mu) {
                        mu = if next.is_finite() { next } else { mu };
                        break;
                    }
                    mu = next;
                }
                let local = DVector::from_iterator(d, (0..d).map(|j| w[j] / (1.0 + mu * weights[j])));
                let v = axes * local;
                (0..d).map(|i| center[i] + v[i]).collect()
            }
        }
    }

    /// Distance from `z` and a unit subgradient (zero inside the body).
    fn distance(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let p = self.project(z);
        let diff: Vec<f64> = z.iter().zip(&p).map(|(a, b)| a - b).collect();
        let n = normv(&diff);
        if n > 0.0 {
            (n, diff.into_iter().map(|x| x / n).collect())
        } else {
            (0.0, vec![0.0; z.len()])
        }
    }

    /// Axis-aligned bounds computed from the raw description.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Points(points) => {
                let d = points[0].len();
                let lo = (0..d).map(|j| points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..d).map(|j| points.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
                (lo, hi)
            }
            Self::Aabb(lo, hi) => (lo.clone(), hi.clone()),
            Self::Ball(c, r) => (c.iter().map(|x| x - r).collect(), c.iter().map(|x| x + r).collect()),
            Self::Ellipsoid { center, axes, weights } => {
                // Half-width along e_j is sqrt((Σ^{-1})_jj).
                let d = center.len();
                let half: Vec<f64> =
                    (0..d).map(|j| (0..d).map(|k| axes[(j, k)].powi(2) / weights[k]).sum::<f64>().sqrt()).collect();
                (
                    center.iter().zip(&half).map(|(c, h)| c - h).collect(),
                    center.iter().zip(&half).map(|(c, h)| c + h).collect(),
                )
            }
        }
    }
}

/// Central-cut ellipsoid method for a convex function whose minimisers lie
/// in the ball `B(center, radius)`. Stops when the best value is within
/// `tol` of the certified lower bound.
fn ellipsoid_minimize(
    mut f: impl FnMut(&[f64]) -> (f64, Vec<f64>),
    center: Vec<f64>,
    radius: f64,
    tol: f64,
    budget: usize,
) -> Result<(f64, Vec<f64>, usize, f64), ReferenceError> {
    let d = center.len();
    let mut z = center;
    let mut best = (f64::INFINITY, z.clone());
    let mut lower = f64::NEG_INFINITY;
    if d == 1 {
        let (mut a, mut b) = (z[0] - radius, z[0] + radius);
        for it in 1..=budget {
            let mid = 0.5 * (a + b);
            let (v, g) = f(&[mid]);
            if v < best.0 {
                best = (v, vec![mid]);
            }
            lower = lower.max(v - g[0].abs() * 0.5 * (b - a));
            if best.0 - lower <= tol || g[0] == 0.0 {
                return Ok((best.0, best.1, it, (best.0 - lower).max(0.0)));
            }
            if g[0] > 0.0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        return Err(ReferenceError::BudgetExceeded { iterations: budget, gap: best.0 - lower });
    }
    let df = d as f64;
    let mut p = DMatrix::<f64>::identity(d, d) * (radius * radius);
    for it in 1..=budget {
        let (v, g) = f(&z);
        if v < best.0 {
            best = (v, z.clone());
        }
        let gv = DVector::from_column_slice(&g);
        let pg = &p * &gv;
        let gpg = gv.dot(&pg);
        if gpg.is_nan() || gpg <= 0.0 {
            return Ok((best.0, best.1, it, 0.0));
        }
        lower = lower.max(v - gpg.sqrt());
        if best.0 - lower <= tol {
            return Ok((best.0, best.1, it, (best.0 - lower).max(0.0)));
        }
        let step = &pg / gpg.sqrt();
        for j in 0..d {
            z[j] -= step[j] / (df + 1.0);
        }
        p = (&p - (&step * step.transpose()) * (2.0 / (df + 1.0))) * (df * df / (df * df - 1.0));
        p = (&p + p.transpose()) * 0.5;
    }
    Err(ReferenceError::BudgetExceeded { iterations: budget, gap: best.0 - lower })
}

const BUDGET: usize = 100_000;

fn enclosing_ball(projectors: &[Projector]) -> (Vec<f64>, f64) {
    let d = match &projectors[0] {
        Projector::Points(p) => p[0].len(),
        Projector::Aabb(lo, _) => lo.len(),
        Projector::Ball(c, _) => c.len(),
        Projector::Ellipsoid { center, .. } => center.len(),
    };
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in projectors {
        let (l, h) = p.bounds();
        for j in 0..d {
            lo[j] = lo[j].min(l[j]);
            hi[j] = hi[j].max(h[j]);
        }
    }
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half = 0.5 * lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    (center, half * 1.01 + 1e-9)
}

/// Minimises `max_i dist(z, Ω_i)` to absolute accuracy `tol`.
pub fn ref_sib(bodies: &[ConvexBody], tol: f64) -> Result<ReferenceResult, ReferenceError> {
    let projectors: Vec<Projector> = bodies.iter().map(Projector::new).collect();
    let (center, radius) = enclosing_ball(&projectors);
    let f = |z: &[f64]| {
        let mut best = (f64::NEG_INFINITY, vec![0.0; z.len()]);
        for p in &projectors {
            let (dist, g) = p.distance(z);
            if dist > best.0 {
                best = (dist, g);
            }
        }
        best
    };
    let (value, argmin, iterations, residual) = ellipsoid_minimize(f, center, radius, tol, BUDGET)?;
    Ok(ReferenceResult { value, argmin, aux: vec![], iterations, residual })
}

/// `min_{r ≥ 0} r + C Σ max(0, d_i − r)` with its minimiser (smallest among ties).
fn best_radius(distances: &[f64], c: f64) -> (f64, f64) {
    let g = |r: f64| r + c * distances.iter().map(|d| (d - r).max(0.0)).sum::<f64>();
    std::iter::once(0.0)
        .chain(distances.iter().copied())
        .map(|r| (g(r), r))
        .fold((f64::INFINITY, 0.0), |acc, (v, r)| if v < acc.0 || (v == acc.0 && r < acc.1) { (v, r) } else { acc })
}

/// Minimises `r + C Σ max(0, dist(z, Ω_i) − r)` over `z` and `r ≥ 0` to
/// absolute accuracy `tol`. `aux` holds `[r, ξ_1, …, ξ_n]`.
pub fn ref_soft_sib(bodies: &[ConvexBody], c: f64, tol: f64) -> Result<ReferenceResult, ReferenceError> {
    let projectors: Vec<Projector> = bodies.iter().map(Projector::new).collect();
    let (center, radius) = enclosing_ball(&projectors);
    let f = |z: &[f64]| {
        let parts: Vec<(f64, Vec<f64>)> = projectors.iter().map(|p| p.distance(z)).collect();
        let dists: Vec<f64> = parts.iter().map(|(d, _)| *d).collect();
        let (value, r) = best_radius(&dists, c);
        // Slack weights θ_i: 1 above r, 0 below, and for distances tied with
        // r whatever makes r stationary (1 − C Σ θ = 0 when r > 0).
        let above = dists.iter().filter(|&&d| d > r).count() as f64;
        let tied = dists.iter().filter(|&&d| d == r && r > 0.0).count() as f64;
        let tie_weight = if tied > 0.0 { ((1.0 / c - above) / tied).clamp(0.0, 1.0) } else { 0.0 };
        let mut g = vec![0.0; z.len()];
        for (d, grad) in &parts {
            let theta = if *d > r {
                1.0
            } else if *d == r && r > 0.0 {
                tie_weight
            } else {
                0.0
            };
            g.iter_mut().zip(grad).for_each(|(a, b)| *a += c * theta * b);
        }
        (value, g)
    };
    let (value, argmin, iterations, residual) = ellipsoid_minimize(f, center, radius, tol, BUDGET)?;
    let dists: Vec<f64> = projectors.iter().map(|p| p.distance(&argmin).0).collect();
    let (_, r) = best_radius(&dists, c);
    let mut aux = vec![r];
    aux.extend(dists.iter().map(|d| (d - r).max(0.0)));
    Ok(ReferenceResult { value, argmin, aux, iterations, residual })
}

/// Euclidean distance from `z` to the body, by explicit projection.
pub fn ref_distance(body: &ConvexBody, z: &[f64]) -> f64 {
    Projector::new(body).distance(z).0
}

/// Maximises `r/√2 + Σ y_i ξ_i` over `r + C Σ ξ ≤ α̂`, `0 ≤ ξ ≤ D`,
/// `0 ≤ r ≤ D` by enumerating every basic solution. `argmin` holds
/// `[ξ_1, …, ξ_n, r]` of the best vertex and `value` its objective.
pub fn ref_xi_r(y_heads: &[f64], c: f64, alpha_hat: f64, d: f64) -> ReferenceResult {
    let n = y_heads.len();
    let dim = n + 1;
    // Rows a·x ≤ b over x = (ξ, r).
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut budget = vec![c; n];
    budget.push(1.0);
    rows.push((budget, alpha_hat));
    for j in 0..dim {
        let mut lo = vec![0.0; dim];
        lo[j] = -1.0;
        rows.push((lo, 0.0));
        let mut hi = vec![0.0; dim];
        hi[j] = 1.0;
        rows.push((hi, d));
    }
    let mut weights: Vec<f64> = y_heads.to_vec();
    weights.push(std::f64::consts::FRAC_1_SQRT_2);
    let mut best = (f64::NEG_INFINITY, vec![0.0; dim]);
    let mut count = 0;
    let total = rows.len();
    let mut pick: Vec<usize> = (0..dim).collect();
    loop {
        let a = DMatrix::from_fn(dim, dim, |i, j| rows[pick[i]].0[j]);
        let b = DVector::from_iterator(dim, pick.iter().map(|&i| rows[i].1));
        if a.determinant().abs() > 1e-12 {
            if let Some(x) = a.lu().solve(&b) {
                let feasible = rows.iter().all(|(row, rhs)| dotv(row, x.as_slice()) <= rhs + 1e-12 * (1.0 + rhs.abs()));
                if feasible {
                    count += 1;
                    let v = dotv(&weights, x.as_slice());
                    if v > best.0 {
                        best = (v, x.iter().copied().collect());
                    }
                }
            }
        }
        // Next combination of `dim` rows out of `total`.
        let mut i = dim;
        loop {
            if i == 0 {
                return ReferenceResult {
                    value: best.0,
                    argmin: best.1,
                    aux: vec![],
                    iterations: count,
                    residual: 0.0,
                };
            }
            i -= 1;
            if pick[i] < total - dim + i {
                break;
            }
        }
        pick[i] += 1;
        for j in i + 1..dim {
            pick[j] = pick[j - 1] + 1;
        }
    }
}
