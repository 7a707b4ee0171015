//! Euclidean Jordan algebra of the second-order cone and of products of
//! equal-dimension second-order cones.
//!
//! An element of `Q^{d+1}` is a pair `(x̄, x0)` with `x̄ ∈ R^d`. The Jordan
//! product is `x ∘ y = (x0·ȳ + y0·x̄, xᵀy) / √2`, the identity is
//! `e = (0, √2)`, and every element has the spectral decomposition
//!
//! ```text
//! λ1 = (x0 + ‖x̄‖)/√2,  q1 = (u, 1)/√2
//! λ2 = (x0 − ‖x̄‖)/√2,  q2 = (−u, 1)/√2
//! ```
//!
//! with `u = x̄/‖x̄‖`. With this normalisation the trace inner product
//! `tr(x ∘ y)` is the plain dot product and the trace of `x` is `√2·x0`.
//!
//! The product cone `Q^{d+1} × … × Q^{d+1}` acts block-wise; its rank is `2n`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use thiserror::Error;

/// Norms at or below this are treated as a zero `x̄` part.
pub const ZERO_BAR_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EjaError {
    #[error("dimension mismatch: ({left_blocks} blocks, d = {left_dim}) vs ({right_blocks} blocks, d = {right_dim})")]
    DimensionMismatch { left_blocks: usize, left_dim: usize, right_blocks: usize, right_dim: usize },
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unit direction of `bar`, falling back to the first standard basis vector.
fn direction_into(bar: &[f64], nrm: f64, out: &mut [f64]) {
    if nrm > ZERO_BAR_THRESHOLD {
        for (o, b) in out.iter_mut().zip(bar) {
            *o = b / nrm;
        }
    } else {
        out.iter_mut().for_each(|o| *o = 0.0);
        if let Some(first) = out.first_mut() {
            *first = 1.0;
        }
    }
}

/// One element `(x̄, x0)` of `R^d × R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocElement {
    pub bar: Vec<f64>,
    pub head: f64,
}

/// Eigenvalues and idempotent direction of a [`SocElement`].
#[derive(Debug, Clone, PartialEq)]
pub struct SocSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    pub u: Vec<f64>,
}

impl SocSpectrum {
    /// The Jordan frame `(q1, q2)`.
    pub fn idempotents(&self) -> (SocElement, SocElement) {
        let q1 = SocElement::new(self.u.iter().map(|c| c * FRAC_1_SQRT_2).collect(), FRAC_1_SQRT_2);
        let q2 = SocElement::new(self.u.iter().map(|c| -c * FRAC_1_SQRT_2).collect(), FRAC_1_SQRT_2);
        (q1, q2)
    }

    /// `λ1·q1 + λ2·q2`.
    pub fn reconstruct(&self) -> SocElement {
        Self::combine(&self.u, self.lambda1, self.lambda2)
    }

    fn combine(u: &[f64], a: f64, b: f64) -> SocElement {
        let scale = (a - b) * FRAC_1_SQRT_2;
        SocElement::new(u.iter().map(|c| c * scale).collect(), (a + b) * FRAC_1_SQRT_2)
    }
}

impl SocElement {
    pub fn new(bar: Vec<f64>, head: f64) -> Self {
        Self { bar, head }
    }

    pub fn zero(d: usize) -> Self {
        Self::new(vec![0.0; d], 0.0)
    }

    /// The identity `e = (0, √2)`.
    pub fn identity(d: usize) -> Self {
        Self::new(vec![0.0; d], SQRT_2)
    }

    pub fn dim(&self) -> usize {
        self.bar.len()
    }

    pub fn bar_norm(&self) -> f64 {
        norm(&self.bar)
    }

    pub fn is_finite(&self) -> bool {
        self.head.is_finite() && self.bar.iter().all(|v| v.is_finite())
    }

    pub fn jordan_product(&self, other: &SocElement) -> SocElement {
        assert_eq!(self.dim(), other.dim(), "jordan product of mismatched blocks");
        let bar =
            self.bar.iter().zip(&other.bar).map(|(a, b)| (self.head * b + other.head * a) * FRAC_1_SQRT_2).collect();
        SocElement::new(bar, self.dot(other) * FRAC_1_SQRT_2)
    }

    /// Trace inner product, equal to the Euclidean dot product.
    pub fn dot(&self, other: &SocElement) -> f64 {
        dot(&self.bar, &other.bar) + self.head * other.head
    }

    pub fn trace(&self) -> f64 {
        SQRT_2 * self.head
    }

    pub fn spectrum(&self) -> SocSpectrum {
        spectral_decompose(self)
    }

    pub fn exp(&self) -> SocElement {
        soc_exp(self)
    }

    pub fn in_cone(&self, tol: f64) -> bool {
        self.bar_norm() <= self.head + tol
    }

    pub fn add(&self, other: &SocElement) -> SocElement {
        SocElement::new(self.bar.iter().zip(&other.bar).map(|(a, b)| a + b).collect(), self.head + other.head)
    }

    pub fn scale(&self, s: f64) -> SocElement {
        SocElement::new(self.bar.iter().map(|a| a * s).collect(), self.head * s)
    }

    pub fn max_abs_diff(&self, other: &SocElement) -> f64 {
        self.bar.iter().zip(&other.bar).map(|(a, b)| (a - b).abs()).fold((self.head - other.head).abs(), f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

pub fn spectral_decompose(x: &SocElement) -> SocSpectrum {
    let nrm = x.bar_norm();
    let mut u = vec![0.0; x.dim()];
    direction_into(&x.bar, nrm, &mut u);
    SocSpectrum { lambda1: (x.head + nrm) * FRAC_1_SQRT_2, lambda2: (x.head - nrm) * FRAC_1_SQRT_2, u }
}

/// `exp(λ1)·q1 + exp(λ2)·q2`.
///
/// Arguments with eigenvalues beyond ±700 overflow; the solvers normalise
/// in the log domain before calling into the exponential.
pub fn soc_exp(x: &SocElement) -> SocElement {
    let s = spectral_decompose(x);
    SocSpectrum::combine(&s.u, s.lambda1.exp(), s.lambda2.exp())
}

/// An element of the product algebra: `n` blocks of `R^d × R`, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductElement {
    d: usize,
    bars: Vec<f64>,
    heads: Vec<f64>,
}

impl ProductElement {
    pub fn zeros(n: usize, d: usize) -> Self {
        assert!(n >= 1, "a product element needs at least one block");
        Self { d, bars: vec![0.0; n * d], heads: vec![0.0; n] }
    }

    pub fn identity(n: usize, d: usize) -> Self {
        let mut e = Self::zeros(n, d);
        e.heads.iter_mut().for_each(|h| *h = SQRT_2);
        e
    }

    /// Panics on an empty list or on blocks of differing dimension.
    pub fn from_blocks(blocks: Vec<SocElement>) -> Self {
        assert!(!blocks.is_empty(), "a product element needs at least one block");
        let d = blocks[0].dim();
        let mut out = Self::zeros(blocks.len(), d);
        for (i, b) in blocks.into_iter().enumerate() {
            assert_eq!(b.dim(), d, "inhomogeneous block dimensions");
            out.bar_mut(i).copy_from_slice(&b.bar);
            out.heads[i] = b.head;
        }
        out
    }

    pub fn blocks(&self) -> Vec<SocElement> {
        (0..self.num_blocks()).map(|i| self.block(i)).collect()
    }

    pub fn block(&self, i: usize) -> SocElement {
        SocElement::new(self.bar(i).to_vec(), self.heads[i])
    }

    pub fn num_blocks(&self) -> usize {
        self.heads.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Rank of the underlying algebra.
    pub fn rank(&self) -> usize {
        2 * self.num_blocks()
    }

    pub fn bar(&self, i: usize) -> &[f64] {
        &self.bars[i * self.d..(i + 1) * self.d]
    }

    pub fn bar_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.bars[i * self.d..(i + 1) * self.d]
    }

    pub fn head(&self, i: usize) -> f64 {
        self.heads[i]
    }

    pub fn heads(&self) -> &[f64] {
        &self.heads
    }

    pub fn set_head(&mut self, i: usize, v: f64) {
        self.heads[i] = v;
    }

    pub fn bars_flat(&self) -> &[f64] {
        &self.bars
    }

    pub fn same_shape(&self, other: &ProductElement) -> bool {
        self.d == other.d && self.num_blocks() == other.num_blocks()
    }

    /// Sum of all `2n` eigenvalues, `√2·Σ heads`.
    pub fn trace(&self) -> f64 {
        SQRT_2 * self.heads.iter().sum::<f64>()
    }

    /// Per-block eigenvalue pairs `(λ1, λ2)`.
    pub fn eigenvalues(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.num_blocks()).map(move |i| {
            let nrm = norm(self.bar(i));
            let h = self.heads[i];
            ((h + nrm) * FRAC_1_SQRT_2, (h - nrm) * FRAC_1_SQRT_2)
        })
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().map(|(l1, _)| l1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(self)
    }

    pub fn in_cone(&self, tol: f64) -> bool {
        in_cone(self, tol)
    }

    pub fn exp(&self) -> ProductElement {
        ProductElement::from_blocks(self.blocks().iter().map(soc_exp).collect())
    }

    pub fn scale(&mut self, s: f64) {
        self.bars.iter_mut().for_each(|v| *v *= s);
        self.heads.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += s·other`.
    pub fn axpy(&mut self, s: f64, other: &ProductElement) {
        assert!(self.same_shape(other));
        self.bars.iter_mut().zip(&other.bars).for_each(|(a, b)| *a += s * b);
        self.heads.iter_mut().zip(&other.heads).for_each(|(a, b)| *a += s * b);
    }

    /// Running mean: after this call `self` is the average of `count` samples.
    pub fn update_mean(&mut self, sample: &ProductElement, count: u64) {
        let w = 1.0 / count as f64;
        self.bars.iter_mut().zip(&sample.bars).for_each(|(m, x)| *m += (x - *m) * w);
        self.heads.iter_mut().zip(&sample.heads).for_each(|(m, x)| *m += (x - *m) * w);
    }

    pub fn fill_zero(&mut self) {
        self.bars.iter_mut().for_each(|v| *v = 0.0);
        self.heads.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn is_finite(&self) -> bool {
        self.bars.iter().chain(&self.heads).all(|v| v.is_finite())
    }
}

pub fn trace_inner(x: &ProductElement, y: &ProductElement) -> Result<f64, EjaError> {
    if !x.same_shape(y) {
        return Err(EjaError::DimensionMismatch {
            left_blocks: x.num_blocks(),
            left_dim: x.dim(),
            right_blocks: y.num_blocks(),
            right_dim: y.dim(),
        });
    }
    Ok(dot(&x.bars, &y.bars) + dot(&x.heads, &y.heads))
}

/// Largest eigenvalue magnitude over all blocks.
pub fn spectral_norm(x: &ProductElement) -> f64 {
    x.eigenvalues().map(|(a, b)| a.abs().max(b.abs())).fold(0.0, f64::max)
}

pub fn in_cone(x: &ProductElement, tol: f64) -> bool {
    (0..x.num_blocks()).all(|i| norm(x.bar(i)) <= x.head(i) + tol)
}

/// The operations of a Euclidean Jordan algebra that the generic
/// multiplicative-weights skeleton needs.
pub trait JordanAlgebra {
    type Element: Clone;

    fn rank(&self) -> usize;
    fn identity(&self) -> Self::Element;
    fn zero(&self) -> Self::Element;
    fn trace(&self, x: &Self::Element) -> f64;
    fn inner(&self, x: &Self::Element, y: &Self::Element) -> f64;
    fn exp(&self, x: &Self::Element) -> Self::Element;
    fn max_eigenvalue(&self, x: &Self::Element) -> f64;
    /// `a·x + b·y`.
    fn lincomb(&self, a: f64, x: &Self::Element, b: f64, y: &Self::Element) -> Self::Element;
}

/// The algebra of `Q^{d+1} × … × Q^{d+1}` with `n` factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductCone {
    pub n: usize,
    pub d: usize,
}

impl JordanAlgebra for ProductCone {
    type Element = ProductElement;

    fn rank(&self) -> usize {
        2 * self.n
    }

    fn identity(&self) -> ProductElement {
        ProductElement::identity(self.n, self.d)
    }

    fn zero(&self) -> ProductElement {
        ProductElement::zeros(self.n, self.d)
    }

    fn trace(&self, x: &ProductElement) -> f64 {
        x.trace()
    }

    fn inner(&self, x: &ProductElement, y: &ProductElement) -> f64 {
        trace_inner(x, y).expect("elements of one algebra share a shape")
    }

    fn exp(&self, x: &ProductElement) -> ProductElement {
        x.exp()
    }

    fn max_eigenvalue(&self, x: &ProductElement) -> f64 {
        x.max_eigenvalue()
    }

    fn lincomb(&self, a: f64, x: &ProductElement, b: f64, y: &ProductElement) -> ProductElement {
        let mut out = x.clone();
        out.scale(a);
        out.axpy(b, y);
        out
    }
}
