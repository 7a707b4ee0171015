//! JSON instance and result files, plus a seeded instance generator.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so emit followed by parse is the identity.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bodies::{BodyError, ConvexBody};
use crate::sib::SibSolution;
use crate::soft::SoftSibSolution;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}, column {column}: {path}: {message}")]
    Parse { line: usize, column: usize, path: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl InstanceError {
    fn invalid(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::Invalid { field: field.into(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Hard,
    Soft,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hard" => Ok(Self::Hard),
            "soft" => Ok(Self::Soft),
            other => Err(format!("unknown mode {other:?}, expected hard or soft")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Polytope { points: Vec<Vec<f64>> },
    ReducedPolytope { points: Vec<Vec<f64>>, nu: f64 },
    Aabb { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, sigma: Vec<Vec<f64>> },
}

impl BodySpec {
    /// Builds the body, reporting failures against `prefix` (e.g. `bodies[3]`).
    fn build(&self, dimension: usize, prefix: &str) -> Result<ConvexBody, InstanceError> {
        let check_len = |v: &[f64], field: String| {
            if v.len() == dimension {
                Ok(())
            } else {
                Err(InstanceError::invalid(field, format!("expected length {dimension}, found {}", v.len())))
            }
        };
        let check_points = |points: &[Vec<f64>]| {
            if points.is_empty() {
                return Err(InstanceError::invalid(format!("{prefix}.points"), BodyError::EmptyPointSet));
            }
            points.iter().enumerate().try_for_each(|(j, p)| check_len(p, format!("{prefix}.points[{j}]")))
        };
        let field_of = |err: &BodyError, default: &str| -> String {
            let name = match err {
                BodyError::NuOutOfRange { .. } => "nu",
                BodyError::InvertedBox { .. } => "lo",
                BodyError::NegativeRadius(_) => "radius",
                BodyError::BadMatrixShape { .. } | BodyError::NotSymmetric | BodyError::NotPositiveDefinite => "sigma",
                _ => default,
            };
            format!("{prefix}.{name}")
        };
        match self {
            Self::Polytope { points } => {
                check_points(points)?;
                ConvexBody::polytope(points).map_err(|e| InstanceError::invalid(field_of(&e, "points"), e))
            }
            Self::ReducedPolytope { points, nu } => {
                check_points(points)?;
                ConvexBody::reduced_polytope(points, *nu).map_err(|e| InstanceError::invalid(field_of(&e, "points"), e))
            }
            Self::Aabb { lo, hi } => {
                check_len(lo, format!("{prefix}.lo"))?;
                check_len(hi, format!("{prefix}.hi"))?;
                ConvexBody::aabb(lo.clone(), hi.clone()).map_err(|e| InstanceError::invalid(field_of(&e, "lo"), e))
            }
            Self::Ball { center, radius } => {
                check_len(center, format!("{prefix}.center"))?;
                ConvexBody::ball(center.clone(), *radius).map_err(|e| InstanceError::invalid(field_of(&e, "center"), e))
            }
            Self::Ellipsoid { center, sigma } => {
                check_len(center, format!("{prefix}.center"))?;
                ConvexBody::ellipsoid(center.clone(), sigma)
                    .map_err(|e| InstanceError::invalid(field_of(&e, "sigma"), e))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dimension: usize,
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub epsilon: f64,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let file: Self = serde_path_to_error::deserialize(&mut de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            let text = inner.to_string();
            let message = match text.rsplit_once(" at line ") {
                Some((head, _)) => head.to_string(),
                None => text,
            };
            InstanceError::Parse { line: inner.line(), column: inner.column(), path, message }
        })?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes") + "\n"
    }

    /// Checks scalar fields and builds every body.
    pub fn validate(&self) -> Result<Vec<ConvexBody>, InstanceError> {
        if self.dimension == 0 {
            return Err(InstanceError::invalid("dimension", "must be at least 1"));
        }
        if self.bodies.is_empty() {
            return Err(InstanceError::invalid("bodies", "at least one body is required"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(InstanceError::invalid(
                "epsilon",
                format!("must be positive and finite, got {}", self.epsilon),
            ));
        }
        match (self.mode, self.c) {
            (Mode::Soft, None) => return Err(InstanceError::invalid("C", "required in soft mode")),
            (Mode::Soft, Some(c)) if !(c > 0.0 && c.is_finite()) => {
                return Err(InstanceError::invalid("C", format!("must be positive and finite, got {c}")))
            }
            _ => {}
        }
        self.bodies.iter().enumerate().map(|(i, spec)| spec.build(self.dimension, &format!("bodies[{i}]"))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub mode: Mode,
    pub converged: bool,
    pub radius: f64,
    pub center: Vec<f64>,
    pub witnesses: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slacks: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_y: Option<f64>,
    pub iterations: u64,
    pub width_doublings: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_halvings: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket_steps: Option<u32>,
    pub wall_time_ms: f64,
}

impl ResultFile {
    pub fn from_hard(solution: &SibSolution, converged: bool, wall_time_ms: f64) -> Self {
        Self {
            mode: Mode::Hard,
            converged,
            radius: solution.radius,
            center: solution.center.clone(),
            witnesses: solution.witnesses.clone(),
            slacks: None,
            objective: None,
            lower_bound: None,
            nu_x: Some(solution.nu_x),
            nu_y: Some(solution.nu_y),
            iterations: solution.total_iterations,
            width_doublings: solution.width_doublings,
            radius_halvings: Some(solution.radius_halvings),
            bracket_steps: None,
            wall_time_ms,
        }
    }

    pub fn from_soft(solution: &SoftSibSolution, converged: bool, wall_time_ms: f64) -> Self {
        Self {
            mode: Mode::Soft,
            converged,
            radius: solution.radius,
            center: solution.center.clone(),
            witnesses: solution.witnesses.clone(),
            slacks: Some(solution.slacks.clone()),
            objective: Some(solution.objective),
            lower_bound: Some(solution.lower_bound),
            nu_x: None,
            nu_y: None,
            iterations: solution.total_iterations,
            width_doublings: solution.width_doublings,
            radius_halvings: None,
            bracket_steps: Some(solution.bracket_steps),
            wall_time_ms,
        }
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes") + "\n"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Polytope,
    ReducedPolytope,
    Aabb,
    Ball,
    Ellipsoid,
}

impl FromStr for GenKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "polytope" => Ok(Self::Polytope),
            "reduced_polytope" => Ok(Self::ReducedPolytope),
            "aabb" => Ok(Self::Aabb),
            "ball" => Ok(Self::Ball),
            "ellipsoid" => Ok(Self::Ellipsoid),
            other => Err(format!(
                "unknown body kind {other:?}, expected polytope, reduced_polytope, aabb, ball or ellipsoid"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub kind: GenKind,
    pub n: usize,
    pub d: usize,
    /// Points per body for the polytope kinds.
    pub m: usize,
    pub seed: u64,
}

/// Random instance from a ChaCha8 stream seeded with `seed`: body centers
/// uniform in `[-10, 10]^d`, body sizes uniform in `[0.1, 1]`.
pub fn generate(params: &GenParams) -> InstanceFile {
    let GenParams { kind, n, d, m, seed } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vector =
        |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> Vec<f64> { (0..d).map(|_| rng.gen_range(lo..hi)).collect() };
    let bodies = (0..n)
        .map(|_| {
            let center = vector(&mut rng, -10.0, 10.0);
            let size = rng.gen_range(0.1..1.0);
            match kind {
                GenKind::Polytope | GenKind::ReducedPolytope => {
                    let points: Vec<Vec<f64>> = (0..m)
                        .map(|_| vector(&mut rng, -size, size).iter().zip(&center).map(|(o, c)| c + o).collect())
                        .collect();
                    if kind == GenKind::Polytope {
                        BodySpec::Polytope { points }
                    } else {
                        let nu = rng.gen_range(1.0 / m as f64..=1.0);
                        BodySpec::ReducedPolytope { points, nu }
                    }
                }
                GenKind::Aabb => {
                    let half = vector(&mut rng, 0.1, 1.0);
                    BodySpec::Aabb {
                        lo: center.iter().zip(&half).map(|(c, h)| c - h).collect(),
                        hi: center.iter().zip(&half).map(|(c, h)| c + h).collect(),
                    }
                }
                GenKind::Ball => BodySpec::Ball { center, radius: size },
                GenKind::Ellipsoid => {
                    let axes = vector(&mut rng, 0.1, 1.0);
                    let raw = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
                    let q = raw.qr().q();
                    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                        d,
                        axes.iter().map(|a| 1.0 / (a * a)),
                    ));
                    let s = &q * diag * q.transpose();
                    let sigma = (0..d).map(|i| (0..d).map(|j| 0.5 * (s[(i, j)] + s[(j, i)])).collect()).collect();
                    BodySpec::Ellipsoid { center, sigma }
                }
            }
        })
        .collect();
    InstanceFile { dimension: d, bodies, mode: Mode::Hard, c: None, epsilon: 0.05 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_body_types() {
        let text = r#"{
            "dimension": 2,
            "bodies": [
                {"type": "polytope", "points": [[0, 0], [1, 0]]},
                {"type": "reduced_polytope", "points": [[0, 0], [1, 0], [0, 1]], "nu": 0.5},
                {"type": "aabb", "lo": [0, 0], "hi": [1, 1]},
                {"type": "ball", "center": [3, 3], "radius": 0.5},
                {"type": "ellipsoid", "center": [0, 5], "sigma": [[1, 0], [0, 4]]}
            ],
            "mode": "soft",
            "C": 0.5,
            "epsilon": 0.1
        }"#;
        let file = InstanceFile::parse(text).unwrap();
        assert_eq!(file.validate().unwrap().len(), 5);
        assert_eq!(InstanceFile::parse(&file.to_json()).unwrap(), file);
    }

    #[test]
    fn nu_error_cites_field() {
        let text = r#"{"dimension": 1, "epsilon": 0.1, "bodies": [
            {"type": "ball", "center": [0], "radius": 1},
            {"type": "reduced_polytope", "points": [[0], [1], [2], [3], [4]], "nu": 0.1}]}"#;
        let err = InstanceFile::parse(text).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("bodies[1].nu"), "{err}");
    }

    #[test]
    fn shape_errors_cite_field() {
        let text = r#"{"dimension": 2, "epsilon": 0.1, "bodies": [{"type": "ball", "center": [0], "radius": 1}]}"#;
        let err = InstanceFile::parse(text).unwrap().validate().unwrap_err();
        assert!(err.to_string().starts_with("bodies[0].center"), "{err}");

        let text = r#"{"dimension": 2, "epsilon": 0.1, "bodies": [{"type": "ellipsoid", "center": [0, 0], "sigma": [[1, 0], [0, -1]]}]}"#;
        let err = InstanceFile::parse(text).unwrap().validate().unwrap_err();
        assert!(err.to_string().starts_with("bodies[0].sigma"), "{err}");

        let text = r#"{"dimension": 1, "epsilon": 0.1, "bodies": [{"type": "ball", "center": [0], "radius": "x"}]}"#;
        let err = InstanceFile::parse(text).unwrap_err();
        assert!(err.to_string().contains("bodies[0]: invalid type"), "{err}");
    }

    #[test]
    fn soft_mode_needs_c() {
        let text = r#"{"dimension": 1, "epsilon": 0.1, "mode": "soft", "bodies": [{"type": "ball", "center": [0], "radius": 1}]}"#;
        let err = InstanceFile::parse(text).unwrap().validate().unwrap_err();
        assert!(err.to_string().starts_with("C:"), "{err}");
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        for kind in [GenKind::Polytope, GenKind::ReducedPolytope, GenKind::Aabb, GenKind::Ball, GenKind::Ellipsoid] {
            let params = GenParams { kind, n: 5, d: 3, m: 4, seed: 7 };
            let a = generate(&params).to_json();
            assert_eq!(a, generate(&params).to_json());
            InstanceFile::parse(&a).unwrap().validate().unwrap();
        }
    }
}
