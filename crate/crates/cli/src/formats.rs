//! JSON file formats.
//!
//! Every writer emits numbers in shortest round-trip form and every reader
//! parses them with correct rounding, so a written file re-reads to a
//! bit-identical value.

use std::fmt;
use std::path::Path;

use kmetric_core::simplex::{binomial, simplex_index, Combinations};
use kmetric_core::{Chain, ChainMatrix, KMetric, PointCloud, SimplexKey, WeightedComplex};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A malformed input, located as precisely as the format allows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputError {
    pub file: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl InputError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        InputError { file: None, line: None, column: None, field: Some(field.into()), message: message.into() }
    }

    fn at_line(mut self, line: Option<usize>) -> Self {
        self.line = line;
        self
    }

    pub fn in_file(mut self, file: &str) -> Self {
        self.file = Some(file.to_string());
        self
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}")?;
            if let Some(line) = self.line {
                write!(f, ":{line}")?;
            }
            f.write_str(": ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricEntry {
    pub s: Vec<usize>,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    pub n: usize,
    pub k: usize,
    pub values: Vec<MetricEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainMatrixFile {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetEntry {
    pub s: Vec<usize>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub n: usize,
    pub k: usize,
    pub facets: Vec<FacetEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudFile {
    pub m: usize,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub n: usize,
    pub dim: usize,
    pub coeffs: Vec<f64>,
}

/// Line of the `index`-th occurrence of `"key"` in `text` (1-based).
fn line_of_key(text: &str, key: &str, index: usize) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let offset = text.match_indices(&needle).nth(index)?.0;
    Some(text[..offset].matches('\n').count() + 1)
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        // serde appends " at line L column C"; keep the message short
        let message = message.split(" at line ").next().unwrap_or(&message).to_string();
        let field = message
            .strip_prefix("missing field `")
            .or_else(|| message.strip_prefix("unknown field `"))
            .and_then(|rest| rest.split('`').next())
            .map(str::to_string);
        InputError { file: None, line: Some(e.line()), column: Some(e.column()), field, message }
    })
}

fn check_simplex(s: &[usize], n: usize, k: usize, field: &str) -> Result<(), String> {
    if s.len() != k {
        return Err(format!("expected {k} vertices, got {}", s.len()));
    }
    if s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("vertex list {s:?} must be strictly increasing"));
    }
    if let Some(v) = s.iter().find(|&&v| v >= n) {
        return Err(format!("vertex {v} out of range for n = {n} in {field}"));
    }
    Ok(())
}

pub fn metric_to_file(d: &KMetric) -> MetricFile {
    MetricFile {
        n: d.n(),
        k: d.k(),
        values: d.entries().map(|(s, d)| MetricEntry { s, d }).collect(),
    }
}

pub fn parse_metric(text: &str) -> Result<KMetric, InputError> {
    let file: MetricFile = parse_json(text)?;
    metric_from_file(&file, text)
}

fn metric_from_file(file: &MetricFile, text: &str) -> Result<KMetric, InputError> {
    let (n, k) = (file.n, file.k);
    if k < 2 || n < k {
        return Err(InputError::field("k", format!("need n ≥ k ≥ 2, got n = {n}, k = {k}")).at_line(line_of_key(text, "k", 0)));
    }
    let count = binomial(n, k);
    if count > kmetric_core::simplex::MAX_SIMPLICES {
        return Err(InputError::field("n", format!("{count} tuples exceed the size limit")));
    }
    let mut values = vec![None; count as usize];
    for (i, e) in file.values.iter().enumerate() {
        let field = format!("values[{i}].s");
        let line = line_of_key(text, "s", i);
        check_simplex(&e.s, n, k, &field).map_err(|m| InputError::field(&field, m).at_line(line))?;
        if !(e.d.is_finite() && e.d >= 0.0) {
            return Err(InputError::field(format!("values[{i}].d"), format!("value {} must be finite and non-negative", e.d)).at_line(line));
        }
        let slot = &mut values[simplex_index(&e.s, n)];
        if slot.is_some() {
            return Err(InputError::field(&field, format!("tuple {:?} listed twice", e.s)).at_line(line));
        }
        *slot = Some(e.d);
    }
    if let Some((missing, _)) = Combinations::new(n, k).zip(&values).find(|(_, v)| v.is_none()) {
        return Err(InputError::field(
            "values",
            format!("{} of {count} tuples present; first missing tuple {missing:?}", file.values.len()),
        ));
    }
    KMetric::new(n, k, values.into_iter().map(|v| v.unwrap()).collect())
        .map_err(|e| InputError::field("values", e.to_string()))
}

pub fn chains_to_file(f: &ChainMatrix) -> ChainMatrixFile {
    ChainMatrixFile { n: f.n(), k: f.k(), m: f.m(), data: f.to_row_major() }
}

pub fn parse_chain_matrix(text: &str) -> Result<ChainMatrix, InputError> {
    let file: ChainMatrixFile = parse_json(text)?;
    if file.k < 2 || file.n < file.k {
        return Err(InputError::field("k", format!("need n ≥ k ≥ 2, got n = {}, k = {}", file.n, file.k)).at_line(line_of_key(text, "k", 0)));
    }
    if let Some(i) = file.data.iter().position(|x| !x.is_finite()) {
        return Err(InputError::field(format!("data[{i}]"), "entries must be finite"));
    }
    ChainMatrix::from_row_major(file.n, file.k, file.m, &file.data)
        .map_err(|e| InputError::field("data", e.to_string()).at_line(line_of_key(text, "data", 0)))
}

pub fn complex_to_file(c: &WeightedComplex) -> ComplexFile {
    ComplexFile {
        n: c.n(),
        k: c.k(),
        facets: c.facets().iter().map(|(s, w)| FacetEntry { s: s.vertices().to_vec(), w: *w }).collect(),
    }
}

pub fn parse_complex(text: &str) -> Result<WeightedComplex, InputError> {
    let file: ComplexFile = parse_json(text)?;
    let (n, k) = (file.n, file.k);
    if k < 2 || n < k {
        return Err(InputError::field("k", format!("need n ≥ k ≥ 2, got n = {n}, k = {k}")).at_line(line_of_key(text, "k", 0)));
    }
    let mut facets = Vec::with_capacity(file.facets.len());
    for (i, e) in file.facets.iter().enumerate() {
        let field = format!("facets[{i}].s");
        let line = line_of_key(text, "s", i);
        check_simplex(&e.s, n, k, &field).map_err(|m| InputError::field(&field, m).at_line(line))?;
        if !(e.w.is_finite() && e.w > 0.0) {
            return Err(InputError::field(format!("facets[{i}].w"), format!("weight {} must be positive", e.w)).at_line(line));
        }
        facets.push((SimplexKey::new(e.s.clone(), n).expect("checked above"), e.w));
    }
    WeightedComplex::new(n, k, facets).map_err(|e| InputError::field("facets", e.to_string()))
}

pub fn cloud_to_file(c: &PointCloud) -> CloudFile {
    CloudFile { m: c.m(), points: c.points().to_vec() }
}

pub fn parse_cloud(text: &str) -> Result<PointCloud, InputError> {
    let file: CloudFile = parse_json(text)?;
    if let Some(i) = file.points.iter().position(|p| p.len() != file.m) {
        return Err(InputError::field(
            format!("points[{i}]"),
            format!("expected {} coordinates, got {}", file.m, file.points[i].len()),
        ));
    }
    PointCloud::new(file.m, file.points).map_err(|e| InputError::field("points", e.to_string()))
}

pub fn chain_to_file(c: &Chain) -> ChainFile {
    ChainFile { n: c.n(), dim: c.dim(), coeffs: c.coeffs().to_vec() }
}

pub fn parse_chain(text: &str) -> Result<Chain, InputError> {
    let file: ChainFile = parse_json(text)?;
    if binomial(file.n, file.dim + 1) > kmetric_core::simplex::MAX_SIMPLICES {
        return Err(InputError::field("n", "chain exceeds the size limit"));
    }
    Chain::new(file.n, file.dim, file.coeffs).map_err(|e| InputError::field("coeffs", e.to_string()))
}

/// Either object accepted by `apex`.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricOrChains {
    Metric(KMetric),
    Chains(ChainMatrix),
}

pub fn parse_metric_or_chains(text: &str) -> Result<MetricOrChains, InputError> {
    let value: serde_json::Value = parse_json(text)?;
    let obj = value.as_object().ok_or_else(|| InputError::field("", "expected a JSON object"))?;
    if obj.contains_key("values") {
        parse_metric(text).map(MetricOrChains::Metric)
    } else if obj.contains_key("data") {
        parse_chain_matrix(text).map(MetricOrChains::Chains)
    } else {
        Err(InputError::field("", "expected a k-metric (`values`) or a chain matrix (`data`)"))
    }
}

/// Serialized file content with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a file, returning its text and digest.
pub fn read_input(path: &Path) -> Result<(String, String), InputError> {
    let bytes = std::fs::read(path).map_err(|e| InputError {
        file: Some(path.display().to_string()),
        line: None,
        column: None,
        field: None,
        message: format!("cannot read: {e}"),
    })?;
    let digest = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| {
        InputError::field("", format!("not valid UTF-8: {e}")).in_file(&path.display().to_string())
    })?;
    Ok((text, digest))
}
