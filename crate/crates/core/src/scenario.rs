//! Scenario files: named observables, contexts over them and named states.
//!
//! ```json
//! {
//!   "dim": 3,
//!   "observables": { "A": [[[1.0, 0.0], [0.0, 0.0], ...], ...], ... },
//!   "contexts": [ { "name": "G1", "A": "A", "B": "B", "C": "C" } ],
//!   "states": { "psi": { "vector": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]] },
//!               "rho": { "matrix": [[[0.5, 0.0], ...], ...] } }
//! }
//! ```
//!
//! Matrices are row-major lists of rows; every complex number is `[re, im]`.
//! Pure states given as vectors are normalized on load.

use std::path::Path;

use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kcbs::{kcbs_pentagon, minus_z, plus_z, zero_eigenstate, Direction};
use crate::measures::{Context, ContextFamily};
use crate::operator::{conjugate_diagonal, CMatrix, DensityMatrix, HermitianOperator, StateVector};

pub type Rows = Vec<Vec<[f64; 2]>>;

/// The on-disk form of a scenario, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub dim: usize,
    pub observables: IndexMap<String, Rows>,
    pub contexts: Vec<ContextSpec>,
    #[serde(default)]
    pub states: IndexMap<String, StateSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    pub name: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    #[serde(rename = "C")]
    pub c: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpec {
    Vector(Vec<[f64; 2]>),
    Matrix(Rows),
}

/// Where a scenario came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File(String),
    Builtin(String),
    Inline,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::File(p) => write!(f, "{p}"),
            Source::Builtin(n) => write!(f, "builtin:{n}"),
            Source::Inline => write!(f, "inline"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NamedContext {
    pub spec: ContextSpec,
    pub context: Context,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    dim: usize,
    observables: IndexMap<String, HermitianOperator>,
    contexts: Vec<NamedContext>,
    states: IndexMap<String, DensityMatrix>,
    document: ScenarioDocument,
    source: Source,
}

pub const BUILTIN_NAMES: &[&str] = &["kcbs", "mub3", "commuting"];

fn rows_to_matrix(name: &str, rows: &Rows, dim: usize) -> Result<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::validation(format!(
            "'{name}' must be a {dim}x{dim} matrix"
        )));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn matrix_to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn vector_to_spec(v: &StateVector) -> StateSpec {
    StateSpec::Vector(v.iter().map(|z| [z.re, z.im]).collect())
}

fn tagged(name: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("{name}: {m}")),
        Error::NotCommuting { .. } | Error::Dimension { .. } => Error::Validation(format!("{name}: {e}")),
        other => other,
    }
}

impl Scenario {
    pub fn from_document(document: ScenarioDocument, source: Source) -> Result<Self> {
        let dim = document.dim;
        if dim < 3 {
            return Err(Error::validation(format!("dim must be at least 3, got {dim}")));
        }
        let mut observables = IndexMap::new();
        for (name, rows) in &document.observables {
            let m = rows_to_matrix(name, rows, dim)?;
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::validation(format!("{name}: non-finite entries")));
            }
            let op = HermitianOperator::new(m).map_err(|e| tagged(name, e))?;
            observables.insert(name.clone(), op);
        }
        let mut seen = std::collections::HashSet::new();
        let mut contexts = Vec::with_capacity(document.contexts.len());
        for spec in &document.contexts {
            if !seen.insert(spec.name.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate context name '{}'",
                    spec.name
                )));
            }
            let get = |n: &str| {
                observables.get(n).cloned().ok_or_else(|| {
                    Error::validation(format!(
                        "context '{}' refers to unknown observable '{n}'",
                        spec.name
                    ))
                })
            };
            let context = Context::new(get(&spec.a)?, get(&spec.b)?, get(&spec.c)?)
                .map_err(|e| tagged(&spec.name, e))?;
            contexts.push(NamedContext {
                spec: spec.clone(),
                context,
            });
        }
        let mut states = IndexMap::new();
        for (name, spec) in &document.states {
            let rho = match spec {
                StateSpec::Vector(v) => {
                    if v.len() != dim {
                        return Err(Error::validation(format!(
                            "state '{name}' must have {dim} amplitudes"
                        )));
                    }
                    let psi = StateVector::from_iterator(dim, v.iter().map(|z| Complex64::new(z[0], z[1])));
                    DensityMatrix::from_pure(&psi)
                }
                StateSpec::Matrix(rows) => DensityMatrix::new(rows_to_matrix(name, rows, dim)?),
            }
            .map_err(|e| tagged(name, e))?;
            states.insert(name.clone(), rho);
        }
        Ok(Scenario {
            dim,
            observables,
            contexts,
            states,
            document,
            source,
        })
    }

    pub fn from_json_str(s: &str, source: Source) -> Result<Self> {
        let doc: ScenarioDocument =
            serde_json::from_str(s).map_err(|e| Error::validation(format!("malformed scenario: {e}")))?;
        Scenario::from_document(doc, source)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_json_str(&text, Source::File(path.display().to_string()))
    }

    /// A built-in scenario name, or else a path to a scenario file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if BUILTIN_NAMES.contains(&name_or_path) {
            builtin(name_or_path)
        } else {
            Scenario::from_path(Path::new(name_or_path))
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn document(&self) -> &ScenarioDocument {
        &self.document
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.document)?)
    }

    pub fn observables(&self) -> &IndexMap<String, HermitianOperator> {
        &self.observables
    }

    pub fn contexts(&self) -> &[NamedContext] {
        &self.contexts
    }

    pub fn states(&self) -> &IndexMap<String, DensityMatrix> {
        &self.states
    }

    pub fn context(&self, name: &str) -> Result<&Context> {
        self.contexts
            .iter()
            .find(|c| c.spec.name == name)
            .map(|c| &c.context)
            .ok_or_else(|| Error::UnknownName(format!("context '{name}'")))
    }

    pub fn state(&self, name: &str) -> Result<&DensityMatrix> {
        self.states
            .get(name)
            .ok_or_else(|| Error::UnknownName(format!("state '{name}'")))
    }

    pub fn family(&self) -> Result<ContextFamily> {
        ContextFamily::new(self.contexts.iter().map(|c| c.context.clone()).collect())
    }
}

/// Built-in scenarios: `kcbs`, a `d = 3` Fourier pair (`mub3`) and a commuting triple.
pub fn builtin(name: &str) -> Result<Scenario> {
    let doc = match name {
        "kcbs" => kcbs_document(),
        "mub3" => mub3_document()?,
        "commuting" => commuting_document(),
        _ => return Err(Error::UnknownName(format!("built-in scenario '{name}'"))),
    };
    Scenario::from_document(doc, Source::Builtin(name.to_string()))
}

fn kcbs_document() -> ScenarioDocument {
    let pent = kcbs_pentagon();
    let mut observables = IndexMap::new();
    for (i, a) in pent.observables().iter().enumerate() {
        observables.insert(format!("A{}", i + 1), matrix_to_rows(a));
    }
    let contexts = (1..=5)
        .map(|a: usize| ContextSpec {
            name: format!("G{a}"),
            a: format!("A{}", (a + 3) % 5 + 1),
            b: format!("A{a}"),
            c: format!("A{}", a % 5 + 1),
        })
        .collect();
    let mut states = IndexMap::new();
    states.insert(
        "0z".to_string(),
        vector_to_spec(&zero_eigenstate(&Direction::z())),
    );
    states.insert("+1z".to_string(), vector_to_spec(&plus_z()));
    states.insert("-1z".to_string(), vector_to_spec(&minus_z()));
    states.insert(
        "mixed".to_string(),
        StateSpec::Matrix(matrix_to_rows(&DensityMatrix::maximally_mixed(3))),
    );
    ScenarioDocument {
        dim: 3,
        observables,
        contexts,
        states,
    }
}

fn mub3_document() -> Result<ScenarioDocument> {
    let w = std::f64::consts::TAU / 3.0;
    let f = CMatrix::from_fn(3, 3, |j, k| {
        Complex64::from_polar(1.0 / 3f64.sqrt(), w * (j * k) as f64)
    });
    let mut observables = IndexMap::new();
    let z = HermitianOperator::diagonal(&[1.0, 0.0, -1.0])?;
    let x = conjugate_diagonal(&f, &[1.0, 0.0, -1.0])?;
    observables.insert("Z".to_string(), matrix_to_rows(&z));
    observables.insert("I".to_string(), matrix_to_rows(&HermitianOperator::identity(3)));
    observables.insert("X".to_string(), matrix_to_rows(&x));
    let mut states = IndexMap::new();
    states.insert(
        "e0".to_string(),
        vector_to_spec(&StateVector::from_fn(3, |i, _| {
            Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)
        })),
    );
    states.insert(
        "mixed".to_string(),
        StateSpec::Matrix(matrix_to_rows(&DensityMatrix::maximally_mixed(3))),
    );
    Ok(ScenarioDocument {
        dim: 3,
        observables,
        contexts: vec![ContextSpec {
            name: "F".to_string(),
            a: "Z".to_string(),
            b: "I".to_string(),
            c: "X".to_string(),
        }],
        states,
    })
}

fn commuting_document() -> ScenarioDocument {
    let diag = |v: [f64; 3]| {
        (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| if i == j { [v[i], 0.0] } else { [0.0, 0.0] })
                    .collect()
            })
            .collect()
    };
    let mut observables = IndexMap::new();
    observables.insert("A".to_string(), diag([1.0, 2.0, 3.0]));
    observables.insert("B".to_string(), diag([1.0, 1.0, -1.0]));
    observables.insert("C".to_string(), diag([0.5, -0.5, 2.0]));
    let mut states = IndexMap::new();
    states.insert(
        "plus".to_string(),
        StateSpec::Vector(vec![[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]),
    );
    ScenarioDocument {
        dim: 3,
        observables,
        contexts: vec![ContextSpec {
            name: "T".to_string(),
            a: "A".to_string(),
            b: "B".to_string(),
            c: "C".to_string(),
        }],
        states,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{mie, mie_via_commutators};

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            assert_eq!(s.dim(), 3);
            assert_eq!(s.source(), &Source::Builtin(name.to_string()));
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn builtin_values() {
        let k = builtin("kcbs").unwrap();
        assert_eq!(k.contexts().len(), 5);
        assert_eq!(k.contexts()[0].spec.a, "A5");
        assert_eq!(k.contexts()[0].spec.c, "A2");
        assert_eq!(k.contexts()[4].spec.a, "A4");
        assert_eq!(k.contexts()[4].spec.c, "A1");
        let e = mie(k.context("G1").unwrap()).unwrap().value;
        assert!((e - 0.6852427).abs() < 1e-6);
        let m = builtin("mub3").unwrap();
        assert!((mie(m.context("F").unwrap()).unwrap().value - 1.0 / 3.0).abs() < 1e-10);
        assert!((mie_via_commutators(m.context("F").unwrap()).unwrap().value - 1.0 / 3.0).abs() < 1e-10);
        let c = builtin("commuting").unwrap();
        assert!((mie(c.context("T").unwrap()).unwrap().value - 1.0).abs() < 1e-12);
        assert!(matches!(k.context("G9"), Err(Error::UnknownName(_))));
        assert!(matches!(k.state("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn json_round_trip() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            let text = s.to_json_pretty().unwrap();
            let back = Scenario::from_json_str(&text, Source::Inline).unwrap();
            assert_eq!(back.document(), s.document());
            assert_eq!(back.to_json_pretty().unwrap(), text);
        }
    }

    #[test]
    fn load_rejects_bad_input() {
        let good = builtin("commuting").unwrap().to_json_pretty().unwrap();
        let cases = [
            good.replace("\"dim\": 3", "\"dim\": 2"),
            good.replace("\"B\": \"B\"", "\"B\": \"Q\""),
            good.replace("\"dim\": 3", "\"dim\": 3, \"extra\": 1"),
            "{".to_string(),
        ];
        for text in &cases {
            assert!(
                matches!(
                    Scenario::from_json_str(text, Source::Inline),
                    Err(Error::Validation(_))
                ),
                "{text}"
            );
        }
        // A non-commuting B slot.
        let mut doc = builtin("mub3").unwrap().document().clone();
        doc.contexts[0].b = "X".to_string();
        assert!(matches!(
            Scenario::from_document(doc, Source::Inline),
            Err(Error::Validation(_))
        ));
        // Non-Hermitian observable.
        let mut doc = builtin("commuting").unwrap().document().clone();
        doc.observables["A"][0][1] = [1.0, 0.0];
        assert!(matches!(
            Scenario::from_document(doc, Source::Inline),
            Err(Error::Validation(_))
        ));
        // Density matrix with trace 2.
        let mut doc = builtin("kcbs").unwrap().document().clone();
        doc.states.insert(
            "bad".into(),
            StateSpec::Matrix(matrix_to_rows(&CMatrix::identity(3, 3).scale(2.0 / 3.0))),
        );
        assert!(matches!(
            Scenario::from_document(doc, Source::Inline),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn vector_states_are_normalized() {
        let c = builtin("commuting").unwrap();
        let rho = c.state("plus").unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }
}
