//! Empirical models, their validation, possibilistic reduction, stacking and
//! the JSON file format.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratbool::rational::{format_rational, parse_rational, sum};
use crate::ratbool::{BoolMatrix, RatMatrix, Rational};
use crate::scenario::{validate_cover, Label, MeasurementScenario, PreparationScenario, ScenarioError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Scenario { path: String, source: ScenarioError },
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
    #[error("{path} (context {context}, column {column}): {message}")]
    NotStochastic { path: String, context: usize, column: usize, message: String },
}

impl ModelError {
    pub fn path(&self) -> &str {
        match self {
            ModelError::Schema { path, .. }
            | ModelError::Scenario { path, .. }
            | ModelError::Shape { path, .. }
            | ModelError::NotStochastic { path, .. } => path,
        }
    }
}

/// Per-context distributions `e_C` over local sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementModel {
    scenario: MeasurementScenario,
    tables: Vec<Vec<Rational>>,
}

impl MeasurementModel {
    pub fn new(scenario: MeasurementScenario, tables: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        check_cover(scenario.cover())?;
        if tables.len() != scenario.contexts().len() {
            return Err(ModelError::Shape {
                path: "$.tables".into(),
                message: format!("{} tables for {} contexts", tables.len(), scenario.contexts().len()),
            });
        }
        for (c, t) in tables.iter().enumerate() {
            let want = scenario.cover().context_sections(c).size();
            if t.len() != want {
                return Err(ModelError::Shape {
                    path: format!("$.tables[{c}][0]"),
                    message: format!("{} entries, expected {want} local sections", t.len()),
                });
            }
        }
        Ok(Self { scenario, tables })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn tables(&self) -> &[Vec<Rational>] {
        &self.tables
    }

    pub fn table(&self, context: usize) -> &[Rational] {
        &self.tables[context]
    }
}

/// Per-context tables `E_{m|Γ}`: rows are outcomes, columns local preparation sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationModel {
    scenario: PreparationScenario,
    tables: Vec<RatMatrix>,
}

impl PreparationModel {
    pub fn new(scenario: PreparationScenario, tables: Vec<RatMatrix>) -> Result<Self, ModelError> {
        check_cover(scenario.cover())?;
        if tables.len() != scenario.contexts().len() {
            return Err(ModelError::Shape {
                path: "$.tables".into(),
                message: format!("{} tables for {} contexts", tables.len(), scenario.contexts().len()),
            });
        }
        let outcomes = scenario.outcomes().len();
        for (c, t) in tables.iter().enumerate() {
            let want = scenario.cover().context_sections(c).size();
            if t.rows() != outcomes || t.cols() != want {
                return Err(ModelError::Shape {
                    path: format!("$.tables[{c}]"),
                    message: format!(
                        "table is {}x{}, expected {outcomes}x{want} (outcomes x local sections)",
                        t.rows(),
                        t.cols()
                    ),
                });
            }
        }
        Ok(Self { scenario, tables })
    }

    pub fn scenario(&self) -> &PreparationScenario {
        &self.scenario
    }

    pub fn tables(&self) -> &[RatMatrix] {
        &self.tables
    }

    pub fn table(&self, context: usize) -> &RatMatrix {
        &self.tables[context]
    }
}

fn check_cover(cover: &crate::scenario::Cover) -> Result<(), ModelError> {
    validate_cover(cover).map(|_| ()).map_err(|source| ModelError::Scenario { path: "$.cover".into(), source })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmpiricalModel {
    Measurement(MeasurementModel),
    Preparation(PreparationModel),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub kind: &'static str,
    pub contexts: usize,
    pub columns: usize,
    /// Context pairs `(i, j)` with context `i` contained in context `j`.
    pub nested_contexts: Vec<(usize, usize)>,
}

fn check_distribution(
    values: &[Rational],
    path: impl Fn(Option<usize>) -> String,
    context: usize,
    column: usize,
) -> Result<(), ModelError> {
    if let Some(i) = values.iter().position(|v| v.is_negative()) {
        return Err(ModelError::NotStochastic {
            path: path(Some(i)),
            context,
            column,
            message: format!("negative entry {}", format_rational(&values[i])),
        });
    }
    let total = sum(values);
    if total != Rational::from_integer(1.into()) {
        return Err(ModelError::NotStochastic {
            path: path(None),
            context,
            column,
            message: format!("entries sum to {} instead of 1", format_rational(&total)),
        });
    }
    Ok(())
}

impl EmpiricalModel {
    /// Checks every stochasticity constraint exactly.
    pub fn validate(&self) -> Result<ValidationReport, ModelError> {
        match self {
            EmpiricalModel::Measurement(m) => m.validate(),
            EmpiricalModel::Preparation(m) => m.validate(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EmpiricalModel::Measurement(_) => "measurement",
            EmpiricalModel::Preparation(_) => "preparation",
        }
    }
}

impl MeasurementModel {
    pub fn validate(&self) -> Result<ValidationReport, ModelError> {
        for (c, t) in self.tables.iter().enumerate() {
            check_distribution(
                t,
                |i| match i {
                    Some(i) => format!("$.tables[{c}][0][{i}]"),
                    None => format!("$.tables[{c}][0]"),
                },
                c,
                0,
            )?;
        }
        let report = validate_cover(self.scenario.cover())
            .map_err(|source| ModelError::Scenario { path: "$.cover".into(), source })?;
        Ok(ValidationReport {
            valid: true,
            kind: "measurement",
            contexts: self.tables.len(),
            columns: self.tables.len(),
            nested_contexts: report.nested,
        })
    }

    pub fn possibilistic_reduce(&self) -> PossibilisticMeasurement {
        PossibilisticMeasurement {
            scenario: self.scenario.clone(),
            tables: self.tables.iter().map(|t| t.iter().map(|v| !v.is_zero()).collect()).collect(),
        }
    }

    /// Stacked empirical column `E_p`, context blocks in cover order.
    pub fn stack(&self) -> RatMatrix {
        RatMatrix::column_vector(self.tables.iter().flatten().cloned().collect())
    }
}

impl PreparationModel {
    pub fn validate(&self) -> Result<ValidationReport, ModelError> {
        let mut columns = 0;
        for (c, t) in self.tables.iter().enumerate() {
            for j in 0..t.cols() {
                check_distribution(
                    &t.column(j),
                    |i| match i {
                        Some(i) => format!("$.tables[{c}][{i}][{j}]"),
                        None => format!("$.tables[{c}][*][{j}]"),
                    },
                    c,
                    j,
                )?;
            }
            columns += t.cols();
        }
        let report = validate_cover(self.scenario.cover())
            .map_err(|source| ModelError::Scenario { path: "$.cover".into(), source })?;
        Ok(ValidationReport {
            valid: true,
            kind: "preparation",
            contexts: self.tables.len(),
            columns,
            nested_contexts: report.nested,
        })
    }

    pub fn possibilistic_reduce(&self) -> PossibilisticPreparation {
        PossibilisticPreparation {
            scenario: self.scenario.clone(),
            tables: self.tables.iter().map(RatMatrix::support).collect(),
        }
    }

    /// Stacked `E_m`: `|O|` rows, one column block per source context.
    pub fn stack(&self) -> RatMatrix {
        RatMatrix::hstack(&self.tables).expect("tables share the outcome row count")
    }
}

/// Support pattern of a measurement model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilisticMeasurement {
    pub scenario: MeasurementScenario,
    pub tables: Vec<Vec<bool>>,
}

impl PossibilisticMeasurement {
    pub fn stack(&self) -> Vec<bool> {
        self.tables.iter().flatten().copied().collect()
    }
}

/// Support pattern `Ē` of a preparation model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilisticPreparation {
    pub scenario: PreparationScenario,
    pub tables: Vec<BoolMatrix>,
}

impl PossibilisticPreparation {
    pub fn stack(&self) -> BoolMatrix {
        BoolMatrix::hstack(&self.tables).expect("tables share the outcome row count")
    }

    /// Stacked column index → (context, local section index).
    pub fn column_origin(&self, j: usize) -> (usize, usize) {
        let mut j = j;
        for (c, t) in self.tables.iter().enumerate() {
            if j < t.cols() {
                return (c, j);
            }
            j -= t.cols();
        }
        panic!("stacked column out of range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Measurement,
    Preparation,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measurements: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sources: Option<Vec<Label>>,
    outcomes: Vec<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    instances: Option<Vec<Label>>,
    cover: Vec<Vec<Label>>,
    tables: Vec<Vec<Vec<String>>>,
}

fn schema(path: &str, message: impl Into<String>) -> ModelError {
    ModelError::Schema { path: path.into(), message: message.into() }
}

fn parse_table(table: &[Vec<String>], c: usize) -> Result<Vec<Vec<Rational>>, ModelError> {
    let width = table.first().map_or(0, Vec::len);
    table
        .iter()
        .enumerate()
        .map(|(r, row)| {
            if row.len() != width {
                return Err(ModelError::Shape {
                    path: format!("$.tables[{c}][{r}]"),
                    message: format!("ragged table: {} entries, first row has {width}", row.len()),
                });
            }
            row.iter()
                .enumerate()
                .map(|(i, s)| parse_rational(s).map_err(|e| schema(&format!("$.tables[{c}][{r}][{i}]"), e.to_string())))
                .collect()
        })
        .collect()
}

/// Parses a model file. Structure is checked here; stochasticity is left to
/// [`EmpiricalModel::validate`].
pub fn parse(bytes: &[u8]) -> Result<EmpiricalModel, ModelError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let file: ModelFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { format!("$.{path}") };
        schema(&path, e.into_inner().to_string())
    })?;

    let scenario_err = |path: &str| {
        let path = path.to_string();
        move |source| ModelError::Scenario { path, source }
    };

    let tables: Vec<Vec<Vec<Rational>>> =
        file.tables.iter().enumerate().map(|(c, t)| parse_table(t, c)).collect::<Result<_, _>>()?;

    match file.kind {
        Kind::Measurement => {
            if file.sources.is_some() || file.instances.is_some() {
                return Err(schema("$", "measurement models take \"measurements\", not \"sources\"/\"instances\""));
            }
            let measurements = file.measurements.ok_or_else(|| schema("$", "missing field \"measurements\""))?;
            let scenario =
                MeasurementScenario::new(measurements, file.outcomes, file.cover).map_err(scenario_err("$.cover"))?;
            let mut flat = Vec::with_capacity(tables.len());
            for (c, mut t) in tables.into_iter().enumerate() {
                if t.len() != 1 {
                    return Err(ModelError::Shape {
                        path: format!("$.tables[{c}]"),
                        message: format!("measurement tables have exactly one row, found {}", t.len()),
                    });
                }
                flat.push(t.pop().expect("one row"));
            }
            MeasurementModel::new(scenario, flat).map(EmpiricalModel::Measurement)
        }
        Kind::Preparation => {
            if file.measurements.is_some() {
                return Err(schema("$", "preparation models take \"sources\", not \"measurements\""));
            }
            let sources = file.sources.ok_or_else(|| schema("$", "missing field \"sources\""))?;
            let instances = file.instances.ok_or_else(|| schema("$", "missing field \"instances\""))?;
            let scenario = PreparationScenario::new(sources, instances, file.cover, file.outcomes)
                .map_err(scenario_err("$.cover"))?;
            let mats = tables
                .into_iter()
                .enumerate()
                .map(|(c, t)| {
                    RatMatrix::from_rows(t)
                        .map_err(|e| ModelError::Shape { path: format!("$.tables[{c}]"), message: e.to_string() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            PreparationModel::new(scenario, mats).map(EmpiricalModel::Preparation)
        }
    }
}

fn format_row(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

/// Canonical pretty JSON with a trailing newline.
pub fn serialize(model: &EmpiricalModel) -> String {
    let file = match model {
        EmpiricalModel::Measurement(m) => ModelFile {
            kind: Kind::Measurement,
            measurements: Some(m.scenario.measurements().to_vec()),
            sources: None,
            outcomes: m.scenario.outcomes().to_vec(),
            instances: None,
            cover: m.scenario.contexts().to_vec(),
            tables: m.tables.iter().map(|t| vec![format_row(t)]).collect(),
        },
        EmpiricalModel::Preparation(m) => ModelFile {
            kind: Kind::Preparation,
            measurements: None,
            sources: Some(m.scenario.sources().to_vec()),
            outcomes: m.scenario.outcomes().to_vec(),
            instances: Some(m.scenario.instances().to_vec()),
            cover: m.scenario.contexts().to_vec(),
            tables: m.tables.iter().map(|t| (0..t.rows()).map(|r| format_row(t.row(r))).collect()).collect(),
        },
    };
    let mut out = serde_json::to_string_pretty(&file).expect("model file serialises");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratbool::rational::{int, ratio};
    use crate::scenario::labels;

    fn single_context(column: Vec<Rational>) -> MeasurementModel {
        let s = MeasurementScenario::new(labels(["a", "b"]), labels(["0", "1"]), vec![labels(["a", "b"])]).unwrap();
        MeasurementModel::new(s, vec![column]).unwrap()
    }

    #[test]
    fn negative_entry_rejected_with_path() {
        let m = single_context(vec![ratio(1, 2), ratio(1, 2), ratio(1, 2), ratio(-1, 2)]);
        let err = m.validate().unwrap_err();
        assert_eq!(err.path(), "$.tables[0][0][3]");
        assert!(err.to_string().contains("negative"));
    }

    #[test]
    fn bad_sum_rejected() {
        let m = single_context(vec![ratio(1, 3), ratio(1, 3), ratio(1, 2), int(0)]);
        let err = m.validate().unwrap_err();
        assert!(err.to_string().contains("7/6"), "{err}");
    }

    #[test]
    fn reduction_examples() {
        let m = single_context(vec![int(0), ratio(1, 4), ratio(1, 4), ratio(1, 2)]);
        assert_eq!(m.possibilistic_reduce().tables[0], vec![false, true, true, true]);
        let m = single_context(vec![int(1), int(0), int(0), int(0)]);
        assert_eq!(m.possibilistic_reduce().tables[0], vec![true, false, false, false]);
        assert_eq!(m.stack().column(0), m.table(0).to_vec());
    }

    #[test]
    fn decimal_and_fraction_entries_accepted() {
        let text = r#"{"kind":"measurement","measurements":["a"],"outcomes":["0","1","2"],
            "cover":[["a"]],"tables":[[["0.25","1/3","5/12"]]]}"#;
        let m = parse(text.as_bytes()).unwrap();
        m.validate().unwrap();
        let EmpiricalModel::Measurement(m) = m else { panic!() };
        assert_eq!(m.table(0)[0], ratio(1, 4));
    }

    #[test]
    fn json_numbers_are_rejected() {
        let text = r#"{"kind":"measurement","measurements":["a"],"outcomes":["0","1"],
            "cover":[["a"]],"tables":[[[0.5,"1/2"]]]}"#;
        let err = parse(text.as_bytes()).unwrap_err();
        assert_eq!(err.path(), "$.tables[0][0][0]");
    }

    #[test]
    fn structural_errors_have_paths() {
        let ragged = r#"{"kind":"preparation","sources":["a"],"instances":["0","1"],"outcomes":["x","y"],
            "cover":[["a"]],"tables":[[["1","0"],["0"]]]}"#;
        assert_eq!(parse(ragged.as_bytes()).unwrap_err().path(), "$.tables[0][1]");

        let unknown = r#"{"kind":"measurement","measurements":["a"],"outcomes":["0","1"],
            "cover":[["q"]],"tables":[[["1","0"]]]}"#;
        assert!(matches!(
            parse(unknown.as_bytes()).unwrap_err(),
            ModelError::Scenario { source: ScenarioError::UnknownLabel(_), .. }
        ));

        let wrong_size = r#"{"kind":"measurement","measurements":["a"],"outcomes":["0","1"],
            "cover":[["a"]],"tables":[[["1","0","0"]]]}"#;
        assert_eq!(parse(wrong_size.as_bytes()).unwrap_err().path(), "$.tables[0][0]");

        let missing = r#"{"kind":"measurement","outcomes":["0","1"],"cover":[],"tables":[]}"#;
        assert!(parse(missing.as_bytes()).is_err());

        let extra = r#"{"kind":"measurement","measurements":["a"],"outcomes":["0","1"],
            "cover":[["a"]],"tables":[[["1","0"]]],"bogus":1}"#;
        assert!(parse(extra.as_bytes()).is_err());

        let uncovered = r#"{"kind":"measurement","measurements":["a","b"],"outcomes":["0","1"],
            "cover":[["a"]],"tables":[[["1","0"]]]}"#;
        assert_eq!(parse(uncovered.as_bytes()).unwrap_err().path(), "$.cover");
    }

    #[test]
    fn preparation_column_sum_path() {
        let text = r#"{"kind":"preparation","sources":["a"],"instances":["0","1"],"outcomes":["x","y"],
            "cover":[["a"]],"tables":[[["1","1/2"],["0","1/4"]]]}"#;
        let m = parse(text.as_bytes()).unwrap();
        let err = m.validate().unwrap_err();
        assert_eq!(err.path(), "$.tables[0][*][1]");
    }
}
