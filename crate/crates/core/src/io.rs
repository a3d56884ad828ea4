//! JSON instance and result documents.
//!
//! An instance is one object with `dimension`, `mode`, `bodies`, the
//! fractions (`alpha`, or `partition` for tangent pairs) and optional solver
//! `options`. Unknown fields are rejected. Body indices in documents are
//! 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, MAX_DIM};
use crate::halfspace::{Engine, FractionVector, SolveOptions, SolveReport};
use crate::measures::SelectionRule;
use crate::point::Point;
use crate::separation::{Family, WellSeparationReport};
use crate::sphere::{ball_mass, Sphere};

/// A structural or range problem in an instance document.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct SchemaError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}")?;
            if let Some(col) = self.column {
                write!(f, ", column {col}")?;
            }
            write!(f, ": ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Halfspace,
    Sphere,
    TheoremC,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedBody {
    pub name: String,
    pub vertices: Vec<Vec<f64>>,
}

/// 1-based body indices on each side of a tangent pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Partition {
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuation_schedule: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multistart_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionRule>,
}

impl InstanceOptions {
    fn is_empty(&self) -> bool {
        *self == InstanceOptions::default()
    }

    /// Defaults overridden by every field that is set.
    pub fn to_solve_options(&self) -> SolveOptions {
        let mut o = SolveOptions::default();
        if let Some(e) = self.engine {
            o.engine = e;
        }
        if let Some(d) = self.damping {
            o.damping = d;
        }
        if let Some(m) = self.max_iterations {
            o.max_iterations = m;
        }
        if let Some(t) = self.residual_tol {
            o.residual_tol = t;
        }
        if let Some(s) = &self.continuation_schedule {
            o.continuation_schedule = s.clone();
        }
        if let Some(m) = self.multistart_count {
            o.multistart_count = m;
        }
        if let Some(s) = self.seed {
            o.seed = s;
        }
        if let Some(s) = self.selection {
            o.selection = s;
        }
        o
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub dimension: usize,
    pub mode: Mode,
    pub bodies: Vec<NamedBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    #[serde(default, skip_serializing_if = "InstanceOptions::is_empty")]
    pub options: InstanceOptions,
}

impl Instance {
    pub fn expected_bodies(&self) -> usize {
        match self.mode {
            Mode::Sphere => self.dimension + 1,
            Mode::Halfspace | Mode::TheoremC => self.dimension,
        }
    }

    /// The bodies as a family, in document order.
    pub fn family(&self) -> Result<Family> {
        let bodies = self
            .bodies
            .iter()
            .map(|b| {
                let pts: Vec<Point> = b.vertices.iter().map(|v| Point::new(v)).collect();
                Body::from_points(&pts).map_err(|e| match e {
                    Error::DegenerateBody(msg) => Error::DegenerateBody(format!("{}: {msg}", b.name)),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Family::new(bodies)
    }

    pub fn fractions(&self) -> Result<FractionVector> {
        match self.mode {
            Mode::TheoremC => Err(Error::InvalidInput("tangent-pair instances have no alpha".into())),
            _ => FractionVector::new(self.alpha.clone().unwrap_or_default()),
        }
    }

    /// Zero-based indices of the `inside` side of the partition.
    pub fn inside(&self) -> Vec<usize> {
        self.partition
            .as_ref()
            .map(|p| p.inside.iter().map(|i| i - 1).collect())
            .unwrap_or_default()
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> std::result::Result<Instance, SchemaError> {
    let inst: Instance = serde_json::from_str(text).map_err(|e| SchemaError {
        line: Some(e.line()),
        column: Some(e.column()),
        field: None,
        message: e.to_string(),
    })?;
    validate(&inst, text)?;
    Ok(inst)
}

pub fn serialize_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(inst).expect("instances serialize") + "\n"
}

fn field_error(text: &str, key: &str, field: String, message: String) -> SchemaError {
    let needle = format!("\"{key}\"");
    let line = text
        .lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1);
    SchemaError {
        line,
        column: None,
        field: Some(field),
        message,
    }
}

fn validate(inst: &Instance, text: &str) -> std::result::Result<(), SchemaError> {
    let d = inst.dimension;
    if d == 0 || d > MAX_DIM {
        return Err(field_error(text, "dimension", "dimension".into(), format!("{d} is outside 1..={MAX_DIM}")));
    }
    if inst.mode == Mode::Sphere && d + 1 > MAX_DIM {
        return Err(field_error(text, "dimension", "dimension".into(), format!("sphere mode supports dimension at most {}", MAX_DIM - 1)));
    }
    let n = inst.expected_bodies();
    if inst.bodies.len() != n {
        return Err(field_error(
            text,
            "bodies",
            "bodies".into(),
            format!("{} bodies given, {n} required in this mode", inst.bodies.len()),
        ));
    }
    for (i, b) in inst.bodies.iter().enumerate() {
        if b.vertices.len() < d + 1 {
            return Err(field_error(text, "vertices", format!("bodies[{i}].vertices"), format!("at least {} vertices required", d + 1)));
        }
        for (j, v) in b.vertices.iter().enumerate() {
            if v.len() != d {
                return Err(field_error(text, "vertices", format!("bodies[{i}].vertices[{j}]"), format!("{} coordinates, expected {d}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(field_error(text, "vertices", format!("bodies[{i}].vertices[{j}]"), "non-finite coordinate".into()));
            }
        }
    }
    match inst.mode {
        Mode::Halfspace | Mode::Sphere => {
            let Some(alpha) = &inst.alpha else {
                return Err(field_error(text, "mode", "alpha".into(), "required in this mode".into()));
            };
            if alpha.len() != n {
                return Err(field_error(text, "alpha", "alpha".into(), format!("{} entries, expected {n}", alpha.len())));
            }
            if let Some((i, a)) = alpha.iter().enumerate().find(|(_, a)| !(0.0..=1.0).contains(*a)) {
                return Err(field_error(text, "alpha", format!("alpha[{i}]"), format!("{a} is outside [0, 1]")));
            }
            if inst.partition.is_some() {
                return Err(field_error(text, "partition", "partition".into(), "only allowed in theorem_c mode".into()));
            }
        }
        Mode::TheoremC => {
            let Some(p) = &inst.partition else {
                return Err(field_error(text, "mode", "partition".into(), "required in theorem_c mode".into()));
            };
            if inst.alpha.is_some() {
                return Err(field_error(text, "alpha", "alpha".into(), "not allowed in theorem_c mode".into()));
            }
            let mut seen = vec![false; n];
            for (side, list) in [("inside", &p.inside), ("outside", &p.outside)] {
                if list.is_empty() {
                    return Err(field_error(text, side, format!("partition.{side}"), "must be nonempty".into()));
                }
                for &k in list {
                    if k == 0 || k > n || seen[k - 1] {
                        return Err(field_error(text, side, format!("partition.{side}"), format!("index {k} is out of range or repeated")));
                    }
                    seen[k - 1] = true;
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(field_error(text, "partition", "partition".into(), "must cover every body".into()));
            }
        }
    }
    let o = &inst.options;
    if let Some(t) = o.residual_tol {
        if t.is_nan() || t <= 0.0 {
            return Err(field_error(text, "residual_tol", "options.residual_tol".into(), "must be positive".into()));
        }
    }
    if let Some(l) = o.damping {
        if !(l > 0.0 && l <= 1.0) {
            return Err(field_error(text, "damping", "options.damping".into(), "must lie in (0, 1]".into()));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    NotSeparated,
    NoConvergence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceDoc {
    pub normal: Vec<f64>,
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_body_fractions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_det: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereDoc {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDoc {
    pub status: Status,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspace: Option<HalfspaceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere: Option<SphereDoc>,
    /// Tangent pairs: the `inside`-below halfspace, then the reverse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<HalfspaceDoc>>,
    #[serde(default)]
    pub per_body_fractions: Vec<f64>,
    #[serde(default)]
    pub t_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_det: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default)]
    pub iterations: usize,
    /// Absent when the family has no pair to separate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
    pub engine: Engine,
    pub seed: u64,
}

impl ResultDoc {
    pub fn empty(status: Status, mode: Mode, engine: Engine, seed: u64) -> ResultDoc {
        ResultDoc {
            status,
            mode,
            halfspace: None,
            sphere: None,
            halfspaces: None,
            per_body_fractions: Vec::new(),
            t_values: Vec::new(),
            orientation_det: None,
            residual: None,
            iterations: 0,
            separation_margin: None,
            witness: None,
            engine,
            seed,
        }
    }

    pub fn set_separation(&mut self, report: &WellSeparationReport) {
        self.separation_margin = report.margin.is_finite().then_some(report.margin);
        self.witness = report.witness.as_ref().map(|w| WitnessDoc {
            inside: w.inside.iter().map(|i| i + 1).collect(),
            outside: w.outside.iter().map(|i| i + 1).collect(),
            point: w.point.coords().to_vec(),
        });
    }

    pub fn set_halfspace(&mut self, r: &SolveReport) {
        self.halfspace = Some(halfspace_doc(r, false));
        self.per_body_fractions = r.per_body_fraction.clone();
        self.t_values = r.t_values.clone();
        self.orientation_det = Some(r.orientation_det);
        self.residual = Some(r.residual);
        self.iterations = r.iterations;
    }
}

pub fn halfspace_doc(r: &SolveReport, detailed: bool) -> HalfspaceDoc {
    HalfspaceDoc {
        normal: unsigned_zeros(r.normal().coords()),
        offset: r.offset() + 0.0,
        per_body_fractions: detailed.then(|| r.per_body_fraction.clone()),
        orientation_det: detailed.then_some(r.orientation_det),
    }
}

/// Coordinates with `-0.0` printed as `0.0`.
pub fn unsigned_zeros(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| x + 0.0).collect()
}

pub fn serialize_result(doc: &ResultDoc) -> String {
    serde_json::to_string_pretty(doc).expect("results serialize") + "\n"
}

pub fn parse_result(text: &str) -> std::result::Result<ResultDoc, SchemaError> {
    serde_json::from_str(text).map_err(|e| SchemaError {
        line: Some(e.line()),
        column: Some(e.column()),
        field: None,
        message: e.to_string(),
    })
}

/// Fractions of each body inside the result's halfspace or ball,
/// recomputed from the instance.
pub fn recompute_fractions(inst: &Instance, doc: &ResultDoc) -> Result<Vec<Vec<f64>>> {
    let family = inst.family()?;
    let below = |h: &HalfspaceDoc| -> Vec<f64> {
        let v = Point::new(&h.normal);
        family
            .bodies()
            .iter()
            .map(|b| b.volume_below(&v, h.offset) / b.volume())
            .collect()
    };
    if let Some(h) = &doc.halfspace {
        return Ok(vec![below(h)]);
    }
    if let Some(hs) = &doc.halfspaces {
        return Ok(hs.iter().map(below).collect());
    }
    if let Some(s) = &doc.sphere {
        let sphere = Sphere::new(Point::new(&s.center), s.radius)?;
        return Ok(vec![family
            .bodies()
            .iter()
            .map(|b| ball_mass(b, &sphere) / b.volume())
            .collect()]);
    }
    Err(Error::InvalidInput("result carries no solution".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SQUARES: &str = r#"{
  "dimension": 2,
  "mode": "halfspace",
  "bodies": [
    {"name": "left", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]},
    {"name": "right", "vertices": [[3, 0], [4, 0], [4, 1], [3, 1]]}
  ],
  "alpha": [0.5, 0.5]
}"#;

    #[test]
    fn parses_and_round_trips() {
        let inst = parse_instance(TWO_SQUARES).unwrap();
        assert_eq!(inst.bodies.len(), 2);
        let text = serialize_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
        assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);
    }

    #[test]
    fn alpha_out_of_range() {
        let e = parse_instance(&TWO_SQUARES.replace("[0.5, 0.5]", "[0.5, 1.5]")).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("alpha[1]"));
        assert_eq!(e.line, Some(8));
    }

    #[test]
    fn wrong_body_count() {
        let text = TWO_SQUARES.replace("\"dimension\": 2", "\"dimension\": 3");
        let e = parse_instance(&text).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("bodies"));
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = TWO_SQUARES.replace("\"mode\"", "\"colour\": 1, \"mode\"");
        let e = parse_instance(&text).unwrap_err();
        assert!(e.message.contains("unknown field"), "{e}");
        assert!(e.line.is_some());
    }

    #[test]
    fn theorem_c_partition_must_cover() {
        let text = TWO_SQUARES
            .replace("\"halfspace\"", "\"theorem_c\"")
            .replace("\"alpha\": [0.5, 0.5]", "\"partition\": {\"inside\": [1], \"outside\": [1]}");
        let e = parse_instance(&text).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("partition.outside"));
    }
}
