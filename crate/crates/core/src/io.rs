//! File formats.
//!
//! Operators are JSON objects
//! `{name, n, dimE, dimF, A: [A_1, …, A_n], B}` where each matrix is a list of
//! rows and each entry is either a number or a list of monomials
//! `{exps: [int], coef: number}`. `B` may be omitted (zero).
//!
//! Grid fields are a one-line JSON header
//! `{n, dimE, origin, extents, shape, order: "row-major", dtype: "f64-le"}`
//! followed by raw little-endian `f64` samples, either after a
//! [`PAYLOAD_SENTINEL`] line in the same file or in a sibling file named by the
//! header's `payload` key.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FluxError, Result};
use crate::field::{BoxRegion, GridField};
use crate::operator::OperatorSpec;
use crate::poly::{MultiPoly, PolyMatrix};

pub const PAYLOAD_SENTINEL: &str = "--payload--";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Constant(f64),
    Poly(Vec<Monomial>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub name: String,
    pub n: usize,
    #[serde(rename = "dimE")]
    pub dim_e: usize,
    #[serde(rename = "dimF")]
    pub dim_f: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<Entry>>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<Entry>>>,
}

fn entry_poly(e: &Entry, n: usize, at: &str) -> Result<MultiPoly> {
    match e {
        Entry::Constant(c) if c.is_finite() => Ok(MultiPoly::constant(n, *c)),
        Entry::Constant(c) => Err(FluxError::Format(format!("{at}: non-finite coefficient {c}"))),
        Entry::Poly(terms) => MultiPoly::from_terms(n, terms.iter().map(|t| (t.exps.clone(), t.coef)))
            .map_err(|e| FluxError::Format(format!("{at}: {e}"))),
    }
}

fn poly_entry(p: &MultiPoly) -> Entry {
    match p.as_constant() {
        Some(c) => Entry::Constant(c),
        None => Entry::Poly(
            p.terms()
                .map(|(e, c)| Monomial {
                    exps: e.to_vec(),
                    coef: c,
                })
                .collect(),
        ),
    }
}

fn matrix_from(rows: &[Vec<Entry>], f: &OperatorFile, what: &str) -> Result<PolyMatrix> {
    if rows.len() != f.dim_f {
        return Err(FluxError::Format(format!("{what}: expected {} rows, got {}", f.dim_f, rows.len())));
    }
    let mut entries = Vec::with_capacity(f.dim_f * f.dim_e);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != f.dim_e {
            return Err(FluxError::Format(format!(
                "{what}[{r}]: expected {} columns, got {}",
                f.dim_e,
                row.len()
            )));
        }
        for (c, e) in row.iter().enumerate() {
            entries.push(entry_poly(e, f.n, &format!("{what}[{r}][{c}]"))?);
        }
    }
    PolyMatrix::from_entries(f.dim_f, f.dim_e, f.n, entries)
}

impl OperatorFile {
    pub fn into_operator(&self) -> Result<OperatorSpec> {
        if self.a.len() != self.n {
            return Err(FluxError::Format(format!("A: expected {} matrices, got {}", self.n, self.a.len())));
        }
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(j, m)| matrix_from(m, self, &format!("A[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let b = match &self.b {
            Some(m) => matrix_from(m, self, "B")?,
            None => PolyMatrix::zeros(self.dim_f, self.dim_e, self.n),
        };
        OperatorSpec::new(self.name.clone(), self.n, self.dim_e, self.dim_f, a, b)
    }

    pub fn from_operator(op: &OperatorSpec) -> Self {
        let rows = |m: &PolyMatrix| -> Vec<Vec<Entry>> {
            (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| poly_entry(m.get(r, c))).collect())
                .collect()
        };
        OperatorFile {
            name: op.name.clone(),
            n: op.n,
            dim_e: op.dim_e,
            dim_f: op.dim_f,
            a: op.a.iter().map(rows).collect(),
            b: (!op.b.is_zero()).then(|| rows(&op.b)),
        }
    }
}

/// Parses an operator; errors carry the line and column of the problem.
pub fn parse_operator(text: &str) -> Result<OperatorSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: OperatorFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match path.as_str() {
            "." | "" => FluxError::Format(format!("operator JSON: {inner}")),
            _ => FluxError::Format(format!("operator JSON at {path}: {inner}")),
        }
    })?;
    file.into_operator()
}

pub fn operator_to_json(op: &OperatorSpec) -> String {
    serde_json::to_string_pretty(&OperatorFile::from_operator(op)).expect("plain data serializes")
}

pub fn read_operator(path: &Path) -> Result<OperatorSpec> {
    parse_operator(&fs::read_to_string(path)?).map_err(|e| match e {
        FluxError::Format(m) => FluxError::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridHeader {
    pub n: usize,
    #[serde(rename = "dimE")]
    pub dim_e: usize,
    pub origin: Vec<f64>,
    pub extents: Vec<f64>,
    pub shape: Vec<usize>,
    pub order: String,
    pub dtype: String,
    /// Sibling payload file, relative to the header's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
}

impl GridHeader {
    fn validate(&self) -> Result<()> {
        if self.order != "row-major" {
            return Err(FluxError::Format(format!("grid header: unsupported order '{}'", self.order)));
        }
        if self.dtype != "f64-le" {
            return Err(FluxError::Format(format!("grid header: unsupported dtype '{}'", self.dtype)));
        }
        if self.origin.len() != self.n || self.extents.len() != self.n || self.shape.len() != self.n {
            return Err(FluxError::Format("grid header: origin, extents and shape must have n entries".into()));
        }
        Ok(())
    }

    fn values(&self) -> usize {
        self.shape.iter().product::<usize>() * self.dim_e
    }
}

fn decode(bytes: &[u8], expected: usize) -> Result<Vec<f64>> {
    if bytes.len() != expected * 8 {
        return Err(FluxError::Format(format!(
            "grid payload: expected {} bytes, got {}",
            expected * 8,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn build_grid(h: &GridHeader, data: Vec<f64>) -> Result<GridField> {
    let domain = BoxRegion::new(h.origin.clone(), h.extents.clone())?;
    GridField::new(domain, h.shape.clone(), h.dim_e, data)
}

/// Parses a single-file grid: header line, sentinel line, payload.
pub fn parse_grid_embedded(bytes: &[u8]) -> Result<GridField> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| FluxError::Format("grid file: missing header line".into()))?;
    let header: GridHeader = serde_json::from_slice(&bytes[..nl]).map_err(|e| FluxError::Format(format!("grid header: {e}")))?;
    header.validate()?;
    let rest = &bytes[nl + 1..];
    let marker = format!("{PAYLOAD_SENTINEL}\n");
    let payload = rest
        .strip_prefix(marker.as_bytes())
        .ok_or_else(|| FluxError::Format(format!("grid file: expected '{PAYLOAD_SENTINEL}' after the header")))?;
    build_grid(&header, decode(payload, header.values())?)
}

pub fn read_grid_field(path: &Path) -> Result<GridField> {
    let bytes = fs::read(path)?;
    let first_line = bytes.split(|&b| b == b'\n').next().unwrap_or(&[]);
    let header: GridHeader =
        serde_json::from_slice(first_line).map_err(|e| FluxError::Format(format!("{}: grid header: {e}", path.display())))?;
    match &header.payload {
        Some(name) => {
            header.validate()?;
            let sibling = path.parent().unwrap_or(Path::new(".")).join(name);
            build_grid(&header, decode(&fs::read(sibling)?, header.values())?)
        }
        None => parse_grid_embedded(&bytes),
    }
}

fn header_for(g: &GridField, payload: Option<String>) -> GridHeader {
    GridHeader {
        n: g.domain.dim(),
        dim_e: g.dim_e,
        origin: g.domain.origin.clone(),
        extents: g.domain.extents.clone(),
        shape: g.shape.clone(),
        order: "row-major".into(),
        dtype: "f64-le".into(),
        payload,
    }
}

fn encode(data: &[f64]) -> Vec<u8> {
    data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn grid_to_bytes(g: &GridField) -> Vec<u8> {
    let mut out = serde_json::to_vec(&header_for(g, None)).expect("plain data serializes");
    out.push(b'\n');
    out.extend_from_slice(PAYLOAD_SENTINEL.as_bytes());
    out.push(b'\n');
    out.extend(encode(&g.data));
    out
}

/// Writes a single-file grid with an embedded payload.
pub fn write_grid_field(path: &Path, g: &GridField) -> Result<()> {
    fs::write(path, grid_to_bytes(g))?;
    Ok(())
}

/// Writes the header to `path` and the payload to `path` with extension `.f64`.
pub fn write_grid_field_split(path: &Path, g: &GridField) -> Result<()> {
    let payload = path.with_extension("f64");
    let name = payload
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| FluxError::Argument(format!("bad payload path {}", payload.display())))?
        .to_string();
    let mut head = serde_json::to_vec(&header_for(g, Some(name))).expect("plain data serializes");
    head.push(b'\n');
    fs::write(path, head)?;
    fs::write(payload, encode(&g.data))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::Vector;

    #[test]
    fn operator_round_trip() {
        for e in catalog::operators() {
            let text = operator_to_json(&e.op);
            assert_eq!(parse_operator(&text).unwrap(), e.op, "{}", e.id);
        }
    }

    #[test]
    fn mixed_entries_parse() {
        let text = r#"{"name":"m","n":2,"dimE":1,"dimF":1,
            "A":[[[1]],[[[{"exps":[1,0],"coef":2.0}]]]],
            "B":[[0.5]]}"#;
        let op = parse_operator(text).unwrap();
        assert_eq!(op.a[1].eval(&[3.0, 0.0])[(0, 0)], 6.0);
        assert_eq!(op.b.eval(&[0.0, 0.0])[(0, 0)], 0.5);
    }

    #[test]
    fn malformed_operator_reports_location() {
        let err = parse_operator("{\"name\": \"x\",\n \"n\": oops}").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, FluxError::Format(_)));
        assert!(msg.contains("line 2"), "{msg}");
        let err = parse_operator(r#"{"name":"x","n":1,"dimE":1,"dimF":1,"A":[[[1, 2]]]}"#).unwrap_err();
        assert!(err.to_string().contains("A[0][0]"), "{err}");
    }

    #[test]
    fn grid_round_trips() {
        let g = GridField::sample(BoxRegion::centered_cube(2, 1.0), vec![4, 3], 2, |x| {
            Vector::from_vec(vec![x[0], x[1] * 0.1])
        })
        .unwrap();
        assert_eq!(parse_grid_embedded(&grid_to_bytes(&g)).unwrap(), g);
        let dir = std::env::temp_dir().join(format!("fluxlab-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let one = dir.join("one.grid");
        write_grid_field(&one, &g).unwrap();
        assert_eq!(read_grid_field(&one).unwrap(), g);
        let two = dir.join("two.json");
        write_grid_field_split(&two, &g).unwrap();
        assert_eq!(read_grid_field(&two).unwrap(), g);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn short_payload_is_rejected() {
        let g = GridField::sample(BoxRegion::centered_cube(1, 1.0), vec![3], 1, |x| Vector::from_vec(vec![x[0]])).unwrap();
        let mut bytes = grid_to_bytes(&g);
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(parse_grid_embedded(&bytes), Err(FluxError::Format(_))));
    }
}
