//! Compact convex bodies with exact linear-minimization oracles.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::eja::{dot, norm, ZERO_BAR_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BodyError {
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("expected a vector of length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("non-finite entry")]
    NonFinite,
    #[error("nu = {nu} is outside [1/m, 1] for m = {m}")]
    NuOutOfRange { nu: f64, m: usize },
    #[error("lo[{axis}] = {lo} exceeds hi[{axis}] = {hi}")]
    InvertedBox { axis: usize, lo: f64, hi: f64 },
    #[error("radius {0} is negative")]
    NegativeRadius(f64),
    #[error("sigma must be a {d}x{d} matrix")]
    BadMatrixShape { d: usize },
    #[error("sigma is not symmetric")]
    NotSymmetric,
    #[error("sigma is not positive definite")]
    NotPositiveDefinite,
}

fn check_finite(v: &[f64]) -> Result<(), BodyError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(BodyError::NonFinite)
    }
}

fn check_len(v: &[f64], d: usize) -> Result<(), BodyError> {
    if v.len() == d {
        Ok(())
    } else {
        Err(BodyError::DimensionMismatch { expected: d, found: v.len() })
    }
}

/// Flattens a list of points, checking that all share one dimension.
fn flatten_points(points: &[Vec<f64>]) -> Result<(usize, Vec<f64>), BodyError> {
    let first = points.first().ok_or(BodyError::EmptyPointSet)?;
    let d = first.len();
    if d == 0 {
        return Err(BodyError::ZeroDimension);
    }
    let mut flat = Vec::with_capacity(d * points.len());
    for p in points {
        check_len(p, d)?;
        check_finite(p)?;
        flat.extend_from_slice(p);
    }
    Ok((d, flat))
}

/// `k = ceil(1/nu)`, snapping values within rounding noise of an integer.
pub(crate) fn reduced_k(nu: f64, m: usize) -> usize {
    let q = 1.0 / nu;
    let r = q.round();
    let k = if (q - r).abs() <= 1e-9 * q { r } else { q.ceil() };
    (k as usize).clamp(1, m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    d: usize,
    points: Vec<f64>,
}

impl Polytope {
    pub fn new(points: &[Vec<f64>]) -> Result<Self, BodyError> {
        let (d, points) = flatten_points(points)?;
        Ok(Self { d, points })
    }

    pub fn num_points(&self) -> usize {
        self.points.len() / self.d
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.d..(j + 1) * self.d]
    }
}

/// Convex combinations of a point set with every coefficient capped by `nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPolytope {
    d: usize,
    points: Vec<f64>,
    nu: f64,
    k: usize,
}

impl ReducedPolytope {
    pub fn new(points: &[Vec<f64>], nu: f64) -> Result<Self, BodyError> {
        let (d, points) = flatten_points(points)?;
        let m = points.len() / d;
        if !(nu.is_finite() && nu <= 1.0 && nu * m as f64 >= 1.0 - 1e-12) {
            return Err(BodyError::NuOutOfRange { nu, m });
        }
        Ok(Self { d, points, nu, k: reduced_k(nu, m) })
    }

    pub fn num_points(&self) -> usize {
        self.points.len() / self.d
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.d..(j + 1) * self.d]
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Number of nonzero coefficients at an extreme point, `ceil(1/nu)`.
    pub fn support_size(&self) -> usize {
        self.k
    }

    /// Weight on the `k`-th vertex of an extreme point.
    pub fn residual_weight(&self) -> f64 {
        (1.0 - self.nu * (self.k - 1) as f64).clamp(0.0, self.nu)
    }

    pub fn centroid(&self) -> Vec<f64> {
        let m = self.num_points();
        let mut c = vec![0.0; self.d];
        for j in 0..m {
            c.iter_mut().zip(self.point(j)).for_each(|(a, b)| *a += b / m as f64);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aabb {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, BodyError> {
        if lo.is_empty() {
            return Err(BodyError::ZeroDimension);
        }
        check_len(&hi, lo.len())?;
        check_finite(&lo)?;
        check_finite(&hi)?;
        if let Some(axis) = (0..lo.len()).find(|&j| lo[j] > hi[j]) {
            return Err(BodyError::InvertedBox { axis, lo: lo[axis], hi: hi[axis] });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self, BodyError> {
        if center.is_empty() {
            return Err(BodyError::ZeroDimension);
        }
        check_finite(&center)?;
        if !radius.is_finite() {
            return Err(BodyError::NonFinite);
        }
        if radius < 0.0 {
            return Err(BodyError::NegativeRadius(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// `{ v : (v - c)ᵀ Σ (v - c) ≤ 1 }` with `Σ` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vec<f64>,
    sigma: Vec<f64>,
    sigma_inv: Vec<f64>,
}

impl Ellipsoid {
    /// `sigma` is row-major `d × d`; it is inverted once here via Cholesky.
    pub fn new(center: Vec<f64>, sigma: &[Vec<f64>]) -> Result<Self, BodyError> {
        let d = center.len();
        if d == 0 {
            return Err(BodyError::ZeroDimension);
        }
        check_finite(&center)?;
        if sigma.len() != d || sigma.iter().any(|row| row.len() != d) {
            return Err(BodyError::BadMatrixShape { d });
        }
        let flat: Vec<f64> = sigma.iter().flatten().copied().collect();
        check_finite(&flat)?;
        let scale = flat.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..d {
            for j in 0..i {
                if (flat[i * d + j] - flat[j * d + i]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(BodyError::NotSymmetric);
                }
            }
        }
        let m = DMatrix::from_row_slice(d, d, &flat);
        let chol = m.clone().cholesky().ok_or(BodyError::NotPositiveDefinite)?;
        let inv = chol.inverse();
        let resid = (&m * &inv - DMatrix::<f64>::identity(d, d)).abs().max();
        if resid.is_nan() || resid > 1e-8 {
            return Err(BodyError::NotPositiveDefinite);
        }
        // Symmetrise away rounding so quadratic forms are exact mirrors.
        let inv = (&inv + inv.transpose()) * 0.5;
        let sigma_inv = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| inv[(i, j)]).collect();
        Ok(Self { center, sigma: flat, sigma_inv })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Row-major `Σ`.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Row-major `Σ⁻¹`.
    pub fn sigma_inv(&self) -> &[f64] {
        &self.sigma_inv
    }

    /// `(p - c)ᵀ Σ (p - c)`.
    pub fn quadratic_form(&self, p: &[f64]) -> f64 {
        let d = self.dim();
        let mut q = 0.0;
        for i in 0..d {
            let di = p[i] - self.center[i];
            let row: f64 = (0..d).map(|j| self.sigma[i * d + j] * (p[j] - self.center[j])).sum();
            q += di * row;
        }
        q
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Polytope(Polytope),
    ReducedPolytope(ReducedPolytope),
    Aabb(Aabb),
    Ball(Ball),
    Ellipsoid(Ellipsoid),
}

/// Reusable buffers for the oracles, plus the vertex weights of the last
/// polytope answer.
#[derive(Debug, Clone, Default)]
pub struct LmoScratch {
    order: Vec<(f64, usize)>,
    picks: Vec<(usize, f64)>,
}

impl LmoScratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// `(vertex index, weight)` pairs of the last polytope answer; empty for
    /// the other body classes.
    pub fn picks(&self) -> &[(usize, f64)] {
        &self.picks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmoResult {
    pub point: Vec<f64>,
    pub value: f64,
    /// Dense convex-combination coefficients for polytope bodies.
    pub coefficients: Option<Vec<f64>>,
}

impl ConvexBody {
    pub fn polytope(points: &[Vec<f64>]) -> Result<Self, BodyError> {
        Polytope::new(points).map(Self::Polytope)
    }

    pub fn reduced_polytope(points: &[Vec<f64>], nu: f64) -> Result<Self, BodyError> {
        ReducedPolytope::new(points, nu).map(Self::ReducedPolytope)
    }

    pub fn aabb(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, BodyError> {
        Aabb::new(lo, hi).map(Self::Aabb)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self, BodyError> {
        Ball::new(center, radius).map(Self::Ball)
    }

    pub fn ellipsoid(center: Vec<f64>, sigma: &[Vec<f64>]) -> Result<Self, BodyError> {
        Ellipsoid::new(center, sigma).map(Self::Ellipsoid)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Polytope(p) => p.d,
            Self::ReducedPolytope(p) => p.d,
            Self::Aabb(b) => b.lo.len(),
            Self::Ball(b) => b.center.len(),
            Self::Ellipsoid(e) => e.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Polytope(_) => "polytope",
            Self::ReducedPolytope(_) => "reduced_polytope",
            Self::Aabb(_) => "aabb",
            Self::Ball(_) => "ball",
            Self::Ellipsoid(_) => "ellipsoid",
        }
    }

    /// Number of generating points for polytope bodies.
    pub fn num_points(&self) -> Option<usize> {
        match self {
            Self::Polytope(p) => Some(p.num_points()),
            Self::ReducedPolytope(p) => Some(p.num_points()),
            _ => None,
        }
    }

    /// Writes `argmin { hᵀu : u ∈ body }` into `out` and returns the minimum.
    ///
    /// Ties go to the lowest vertex index; a zero functional on a ball or
    /// ellipsoid yields the center.
    pub fn lmo_into(&self, h: &[f64], out: &mut [f64], scratch: &mut LmoScratch) -> f64 {
        debug_assert_eq!(h.len(), self.dim());
        scratch.picks.clear();
        match self {
            Self::Polytope(p) => {
                let mut best = 0;
                let mut best_val = f64::INFINITY;
                for j in 0..p.num_points() {
                    let v = dot(p.point(j), h);
                    if v < best_val {
                        best_val = v;
                        best = j;
                    }
                }
                out.copy_from_slice(p.point(best));
                scratch.picks.push((best, 1.0));
                best_val
            }
            Self::ReducedPolytope(p) => {
                let m = p.num_points();
                scratch.order.clear();
                scratch.order.extend((0..m).map(|j| (dot(p.point(j), h), j)));
                let k = p.k;
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                scratch.order.select_nth_unstable_by(k - 1, cmp);
                // The first k - 1 slots hold the smallest scores in arbitrary
                // order; sorting them keeps the floating-point sum reproducible.
                scratch.order[..k - 1].sort_unstable_by(cmp);
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut value = 0.0;
                for (slot, &(score, j)) in scratch.order[..k].iter().enumerate() {
                    let w = if slot + 1 == k { p.residual_weight() } else { p.nu };
                    if w == 0.0 {
                        continue;
                    }
                    out.iter_mut().zip(p.point(j)).for_each(|(o, v)| *o += w * v);
                    value += w * score;
                    scratch.picks.push((j, w));
                }
                value
            }
            Self::Aabb(b) => {
                let mut value = 0.0;
                for j in 0..h.len() {
                    out[j] = if h[j] > 0.0 { b.lo[j] } else { b.hi[j] };
                    value += h[j] * out[j];
                }
                value
            }
            Self::Ball(b) => {
                let hn = norm(h);
                if hn > ZERO_BAR_THRESHOLD {
                    let s = b.radius / hn;
                    out.iter_mut().zip(&b.center).zip(h).for_each(|((o, c), g)| *o = c - s * g);
                    dot(&b.center, h) - b.radius * hn
                } else {
                    out.copy_from_slice(&b.center);
                    dot(&b.center, h)
                }
            }
            Self::Ellipsoid(e) => {
                let d = e.dim();
                for (o, row) in out.iter_mut().zip(e.sigma_inv.chunks(d)) {
                    *o = dot(row, h);
                }
                let q = dot(out, h);
                if q > ZERO_BAR_THRESHOLD {
                    let s = 1.0 / q.sqrt();
                    out.iter_mut().zip(&e.center).for_each(|(o, c)| *o = c - s * *o);
                    dot(&e.center, h) - q.sqrt()
                } else {
                    out.copy_from_slice(&e.center);
                    dot(&e.center, h)
                }
            }
        }
    }

    /// Allocating convenience wrapper around [`ConvexBody::lmo_into`].
    pub fn lmo(&self, h: &[f64]) -> LmoResult {
        let mut point = vec![0.0; self.dim()];
        let mut scratch = LmoScratch::new();
        let value = self.lmo_into(h, &mut point, &mut scratch);
        let coefficients = self.num_points().map(|m| {
            let mut c = vec![0.0; m];
            for &(j, w) in scratch.picks() {
                c[j] += w;
            }
            c
        });
        LmoResult { point, value, coefficients }
    }

    /// Membership test within `tol`.
    ///
    /// Polytope bodies are only checked through an explicit coefficient
    /// vector: the coefficients must be a valid (capped) convex combination
    /// reproducing `p`. Without coefficients they report `false`.
    pub fn contains(&self, p: &[f64], coefficients: Option<&[f64]>, tol: f64) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        match self {
            Self::Polytope(poly) => {
                coefficients.is_some_and(|c| combination_matches(c, 1.0, p, |j| poly.point(j), poly.num_points(), tol))
            }
            Self::ReducedPolytope(poly) => coefficients
                .is_some_and(|c| combination_matches(c, poly.nu, p, |j| poly.point(j), poly.num_points(), tol)),
            Self::Aabb(b) => (0..p.len()).all(|j| p[j] >= b.lo[j] - tol && p[j] <= b.hi[j] + tol),
            Self::Ball(b) => {
                let dist = p.iter().zip(&b.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                dist <= b.radius + tol
            }
            Self::Ellipsoid(e) => e.quadratic_form(p) <= 1.0 + tol,
        }
    }

    /// A fixed point of the body used for the crude radius bound.
    ///
    /// First vertex for polytopes, centroid for reduced polytopes (the first
    /// vertex need not belong to them), center otherwise.
    pub fn representative(&self) -> Vec<f64> {
        match self {
            Self::Polytope(p) => p.point(0).to_vec(),
            Self::ReducedPolytope(p) => p.centroid(),
            Self::Aabb(b) => b.lo.iter().zip(&b.hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            Self::Ball(b) => b.center.clone(),
            Self::Ellipsoid(e) => e.center.clone(),
        }
    }

    /// Axis-aligned box containing the body.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        let mut scratch = LmoScratch::new();
        let mut e = vec![0.0; d];
        let mut out = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            lo[j] = self.lmo_into(&e, &mut out, &mut scratch);
            e[j] = -1.0;
            hi[j] = -self.lmo_into(&e, &mut out, &mut scratch);
            e[j] = 0.0;
        }
        (lo, hi)
    }

    /// The same body shifted by `w`.
    pub fn translated(&self, w: &[f64]) -> ConvexBody {
        let shift = |v: &[f64]| v.iter().zip(w).map(|(a, b)| a + b).collect::<Vec<f64>>();
        let shift_points = |d: usize, pts: &[f64]| pts.chunks(d).flat_map(&shift).collect::<Vec<f64>>();
        match self {
            Self::Polytope(p) => Self::Polytope(Polytope { d: p.d, points: shift_points(p.d, &p.points) }),
            Self::ReducedPolytope(p) => {
                Self::ReducedPolytope(ReducedPolytope { points: shift_points(p.d, &p.points), ..p.clone() })
            }
            Self::Aabb(b) => Self::Aabb(Aabb { lo: shift(&b.lo), hi: shift(&b.hi) }),
            Self::Ball(b) => Self::Ball(Ball { center: shift(&b.center), radius: b.radius }),
            Self::Ellipsoid(e) => Self::Ellipsoid(Ellipsoid { center: shift(&e.center), ..e.clone() }),
        }
    }
}

fn combination_matches<'a>(
    coefficients: &[f64],
    cap: f64,
    p: &[f64],
    point: impl Fn(usize) -> &'a [f64],
    m: usize,
    tol: f64,
) -> bool {
    if coefficients.len() != m {
        return false;
    }
    if coefficients.iter().any(|&c| !(c >= -tol && c <= cap + tol)) {
        return false;
    }
    if (coefficients.iter().sum::<f64>() - 1.0).abs() > tol {
        return false;
    }
    let mut combo = vec![0.0; p.len()];
    let mut scale = 1.0f64;
    for (j, &c) in coefficients.iter().enumerate() {
        for (acc, v) in combo.iter_mut().zip(point(j)) {
            *acc += c * v;
            scale = scale.max(v.abs());
        }
    }
    combo.iter().zip(p).all(|(a, b)| (a - b).abs() <= tol * scale)
}

/// Reusable buffers for [`support_max_into`].
#[derive(Debug, Clone, Default)]
pub struct SupportScratch {
    neg_h: Vec<f64>,
    candidate: Vec<f64>,
    lmo: LmoScratch,
}

/// Maximises `hᵀz` over the union of the bodies (equivalently their convex
/// hull). Writes the maximiser into `out` and returns `(body index, value)`;
/// ties go to the lowest body index.
pub fn support_max_into(
    bodies: &[ConvexBody],
    h: &[f64],
    out: &mut [f64],
    scratch: &mut SupportScratch,
) -> (usize, f64) {
    assert!(!bodies.is_empty(), "support of an empty family");
    scratch.neg_h.clear();
    scratch.neg_h.extend(h.iter().map(|v| -v));
    scratch.candidate.resize(h.len(), 0.0);
    let mut best = (0, f64::NEG_INFINITY);
    for (i, body) in bodies.iter().enumerate() {
        let value = -body.lmo_into(&scratch.neg_h, &mut scratch.candidate, &mut scratch.lmo);
        if value > best.1 {
            best = (i, value);
            out.copy_from_slice(&scratch.candidate);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportResult {
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
}

pub fn support_max(bodies: &[ConvexBody], h: &[f64]) -> SupportResult {
    let mut point = vec![0.0; h.len()];
    let (index, value) = support_max_into(bodies, h, &mut point, &mut SupportScratch::default());
    SupportResult { index, point, value }
}

/// Distance bound `E = max_j ‖v̂_1 − v̂_j‖` over fixed body representatives,
/// together with the anchor `v̂_1`. For any family, `r* ≤ E`.
pub fn crude_radius_bound(bodies: &[ConvexBody]) -> (f64, Vec<f64>) {
    let anchor = bodies.first().expect("crude bound of an empty family").representative();
    let e = bodies[1..]
        .iter()
        .map(|b| {
            let r = b.representative();
            r.iter().zip(&anchor).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    (e, anchor)
}
