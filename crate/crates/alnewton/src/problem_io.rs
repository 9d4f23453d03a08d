//! Problem ingestion: matrix and vector text formats plus the TOML
//! problem-description schema.
//!
//! Matrices come in two text forms: the coordinate format headed by a
//! `%%MatrixMarket` line (1-indexed `row col value` triples, `general` or
//! `symmetric`), or a dense whitespace grid with a leading `rows cols`
//! line. Vectors are plain whitespace-separated numbers; lines starting
//! with `#` or `%` are comments in all formats.
//!
//! A problem file looks like (the top-level `E_path` key must precede
//! the section headers, as usual in TOML):
//!
//! ```toml
//! E_path = "identity"   # or a matrix file path
//!
//! [objective]
//! kind = "quadratic"
//! A_path = "a.txt"      # matrix file, relative to the problem file
//! b = [2.0]             # inline linear term
//!
//! [phi]
//! kind = "l1"           # or "box" with lower = [...], upper = [...]
//! alpha = 1.0
//!
//! [defaults]            # optional solver overrides
//! c = 1.0
//! tol = 1e-10
//! max_iter = 100
//! ```

use crate::lagrangian::{Problem, ProblemError, QuadraticObjective, SeparableExpObjective};
use crate::linalg::{LinearMap, SparseMatrix};
use crate::prox::ProxFunction;
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

fn io_err(path: &Path, source: std::io::Error) -> LoadError {
    LoadError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn schema_err(path: &Path, message: impl Into<String>) -> LoadError {
    LoadError::Schema {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#') || t.starts_with('%')
}

/// Read a matrix file in either supported text format. MatrixMarket input
/// yields sparse storage; a dense grid yields dense storage.
pub fn read_matrix_file(path: &Path) -> Result<LinearMap, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut first_data = None;
    for (idx, line) in text.lines().enumerate() {
        if line.trim_start().starts_with("%%MatrixMarket") {
            return read_matrix_market(path, &text).map(LinearMap::Sparse);
        }
        if !is_comment(line) {
            first_data = Some(idx);
            break;
        }
    }
    if first_data.is_none() {
        return Err(parse_err(path, 1, "file contains no matrix data"));
    }
    read_dense_grid(path, &text).map(LinearMap::Dense)
}

fn read_matrix_market(path: &Path, text: &str) -> Result<SparseMatrix, LoadError> {
    let mut lines = text.lines().enumerate();
    let (hline_no, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&"%%MatrixMarket") {
        return Err(parse_err(path, hline_no + 1, "missing %%MatrixMarket header"));
    }
    if fields.get(1) != Some(&"matrix") || fields.get(2) != Some(&"coordinate") {
        return Err(parse_err(
            path,
            hline_no + 1,
            "only `matrix coordinate` files are supported",
        ));
    }
    if fields.get(3) != Some(&"real") && fields.get(3) != Some(&"integer") {
        return Err(parse_err(
            path,
            hline_no + 1,
            format!("unsupported value type {:?}", fields.get(3).unwrap_or(&"")),
        ));
    }
    let symmetric = match fields.get(4) {
        Some(&"general") => false,
        Some(&"symmetric") => true,
        other => {
            return Err(parse_err(
                path,
                hline_no + 1,
                format!("unsupported storage qualifier {:?}", other.unwrap_or(&"")),
            ))
        }
    };

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if is_comment(line) {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match dims {
            None => {
                if toks.len() != 3 {
                    return Err(parse_err(path, line_no, "expected `rows cols nnz`"));
                }
                let r: usize = toks[0]
                    .parse()
                    .map_err(|_| parse_err(path, line_no, "cannot parse row count"))?;
                let c: usize = toks[1]
                    .parse()
                    .map_err(|_| parse_err(path, line_no, "cannot parse column count"))?;
                let nnz: usize = toks[2]
                    .parse()
                    .map_err(|_| parse_err(path, line_no, "cannot parse entry count"))?;
                dims = Some((r, c, nnz));
                triplets.reserve(nnz);
            }
            Some((r, c, nnz)) => {
                if toks.len() != 3 {
                    return Err(parse_err(path, line_no, "expected `row col value`"));
                }
                let i: usize = toks[0]
                    .parse()
                    .map_err(|_| parse_err(path, line_no, "cannot parse row index"))?;
                let j: usize = toks[1]
                    .parse()
                    .map_err(|_| parse_err(path, line_no, "cannot parse column index"))?;
                let v: f64 = toks[2]
                    .parse()
                    .map_err(|_| parse_err(path, line_no, "cannot parse value"))?;
                if i < 1 || i > r || j < 1 || j > c {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!("index ({i}, {j}) out of range for a {r}x{c} matrix"),
                    ));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
                if triplets.len() > 2 * nnz {
                    return Err(parse_err(path, line_no, "more entries than declared"));
                }
            }
        }
    }
    let (r, c, nnz) = dims.ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    let declared = triplets.len() - if symmetric { triplets.iter().filter(|t| t.0 != t.1).count() / 2 } else { 0 };
    if declared != nnz {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("declared {nnz} entries but found {declared}"),
        ));
    }
    SparseMatrix::from_triplets(r, c, &triplets)
        .map_err(|e| schema_err(path, format!("invalid coordinate data: {e}")))
}

fn read_dense_grid(path: &Path, text: &str) -> Result<DMatrix<f64>, LoadError> {
    let mut dims: Option<(usize, usize)> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut last_line = 1;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if is_comment(line) {
            continue;
        }
        last_line = line_no;
        if dims.is_none() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(parse_err(path, line_no, "expected leading `rows cols` line"));
            }
            let r: usize = toks[0]
                .parse()
                .map_err(|_| parse_err(path, line_no, "cannot parse row count"))?;
            let c: usize = toks[1]
                .parse()
                .map_err(|_| parse_err(path, line_no, "cannot parse column count"))?;
            dims = Some((r, c));
            values.reserve(r * c);
            continue;
        }
        let (r, c) = dims.unwrap();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("cannot parse value {tok:?}")))?;
            if values.len() >= r * c {
                return Err(parse_err(path, line_no, "more values than rows*cols"));
            }
            values.push(v);
        }
    }
    let (r, c) = dims.ok_or_else(|| parse_err(path, 1, "missing `rows cols` line"))?;
    if values.len() != r * c {
        return Err(parse_err(
            path,
            last_line,
            format!("expected {} values for a {r}x{c} matrix, found {}", r * c, values.len()),
        ));
    }
    Ok(DMatrix::from_row_slice(r, c, &values))
}

/// Read a whitespace-separated vector of numbers.
pub fn read_vector_file(path: &Path) -> Result<DVector<f64>, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if is_comment(line) {
            continue;
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| {
                parse_err(path, idx + 1, format!("cannot parse value {tok:?}"))
            })?;
            values.push(v);
        }
    }
    Ok(DVector::from_vec(values))
}

pub fn write_vector_file(path: &Path, v: &DVector<f64>) -> Result<(), LoadError> {
    let mut out = String::new();
    for x in v.iter() {
        out.push_str(&format!("{x:.17e}\n"));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn write_dense_matrix_file(path: &Path, m: &DMatrix<f64>) -> Result<(), LoadError> {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.17e}", m[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFileDoc {
    objective: ObjectiveDoc,
    #[serde(rename = "E_path")]
    e_path: String,
    phi: PhiDoc,
    #[serde(default)]
    defaults: DefaultsDoc,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ObjectiveDoc {
    Quadratic {
        #[serde(rename = "A_path")]
        a_path: String,
        b: Vec<f64>,
    },
    Builtin {
        name: String,
        #[serde(default)]
        params: toml::Table,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum PhiDoc {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    L1 { alpha: f64 },
}

#[derive(Debug, Deserialize, Default, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct DefaultsDoc {
    pub c: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

/// A fully validated problem plus the file's optional solver defaults.
#[derive(Debug)]
pub struct LoadedProblem {
    pub problem: Problem,
    pub defaults: DefaultsDoc,
}

fn toml_line(text: &str, span_start: usize) -> usize {
    text[..span_start.min(text.len())].matches('\n').count() + 1
}

fn builtin_param_f64(
    path: &Path,
    params: &toml::Table,
    key: &str,
    default: f64,
) -> Result<f64, LoadError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_float()
            .or_else(|| v.as_integer().map(|i| i as f64))
            .ok_or_else(|| schema_err(path, format!("objective.params.{key} must be a number"))),
    }
}

/// Load, cross-validate and assemble a problem from a TOML description.
pub fn load_problem(path: &Path) -> Result<LoadedProblem, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let doc: ProblemFileDoc = toml::from_str(&text).map_err(|e| {
        let line = e.span().map(|s| toml_line(&text, s.start)).unwrap_or(1);
        parse_err(path, line, e.message().to_string())
    })?;
    let dir = path.parent().map(PathBuf::from).unwrap_or_default();
    let resolve = |p: &str| -> PathBuf {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            dir.join(pb)
        }
    };

    let smooth: Arc<dyn crate::lagrangian::SmoothObjective> = match &doc.objective {
        ObjectiveDoc::Quadratic { a_path, b } => {
            let a = read_matrix_file(&resolve(a_path))?.to_dense();
            if a.nrows() != a.ncols() {
                return Err(schema_err(
                    path,
                    format!(
                        "objective.A_path: matrix must be square, got {}x{}",
                        a.nrows(),
                        a.ncols()
                    ),
                ));
            }
            if b.len() != a.nrows() {
                return Err(schema_err(
                    path,
                    format!(
                        "objective.b has length {} but A is {}x{}",
                        b.len(),
                        a.nrows(),
                        a.ncols()
                    ),
                ));
            }
            Arc::new(QuadraticObjective::new(a, DVector::from_vec(b.clone()))?)
        }
        ObjectiveDoc::Builtin { name, params } => match name.as_str() {
            "separable_exp" => {
                let dim = params
                    .get("dim")
                    .and_then(|v| v.as_integer())
                    .ok_or_else(|| {
                        schema_err(path, "objective.params.dim (integer) is required for separable_exp")
                    })?;
                if dim < 1 {
                    return Err(schema_err(path, "objective.params.dim must be at least 1"));
                }
                let rate = builtin_param_f64(path, params, "rate", 1.0)?;
                let ridge = builtin_param_f64(path, params, "ridge", 0.01)?;
                if ridge <= 0.0 {
                    return Err(schema_err(path, "objective.params.ridge must be positive"));
                }
                Arc::new(SeparableExpObjective::uniform(rate, ridge, dim as usize))
            }
            other => {
                return Err(schema_err(
                    path,
                    format!("objective.name: unknown builtin {other:?}"),
                ))
            }
        },
    };
    let n = smooth.dim();

    let e = if doc.e_path == "identity" {
        LinearMap::identity(n)
    } else {
        read_matrix_file(&resolve(&doc.e_path))?
    };
    if e.ncols() != n {
        return Err(schema_err(
            path,
            format!(
                "E_path: map has {} columns but the objective lives on R^{n}",
                e.ncols()
            ),
        ));
    }
    let m = e.nrows();

    let phi = match &doc.phi {
        PhiDoc::Box { lower, upper } => {
            if lower.len() != m {
                return Err(schema_err(
                    path,
                    format!("phi.lower has length {} but E has {m} rows", lower.len()),
                ));
            }
            if upper.len() != m {
                return Err(schema_err(
                    path,
                    format!("phi.upper has length {} but E has {m} rows", upper.len()),
                ));
            }
            ProxFunction::box_indicator(
                DVector::from_vec(lower.clone()),
                DVector::from_vec(upper.clone()),
            )
            .map_err(ProblemError::from)?
        }
        PhiDoc::L1 { alpha } => ProxFunction::l1(*alpha, m).map_err(ProblemError::from)?,
    };

    let c = doc.defaults.c.unwrap_or(1.0);
    if let Some(tol) = doc.defaults.tol {
        if !(tol > 0.0) {
            return Err(schema_err(path, format!("defaults.tol must be positive, got {tol}")));
        }
    }
    let problem = Problem::new(smooth, e, phi, c)?;
    Ok(LoadedProblem {
        problem,
        defaults: doc.defaults,
    })
}
