//! Config files, CSV tables and their JSON sidecars.
//!
//! Config files are flat `key = value` text with `#` comments. Every CSV
//! written here gets a `.json` sidecar naming its columns, the hash of the
//! run configuration and the quadrature tolerances in force.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fields::{MeshPart, MeshSpec, Part, PiecewiseField};
use crate::geometry::{GeometryError, PatchDomain, Side};
use crate::quadrature::QuadratureSpec;
use crate::C64;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.into(), source })
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, IoError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| IoError::Config(format!("line {}: expected key = value", n + 1)))?;
        let k = k.trim().to_string();
        if k.is_empty() {
            return Err(IoError::Config(format!("line {}: empty key", n + 1)));
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(IoError::Config(format!("duplicate key {k}")));
        }
    }
    Ok(out)
}

fn num(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, IoError> {
    map.get(key)
        .map(|v| v.parse::<f64>().map_err(|_| IoError::Config(format!("{key}: not a number: {v}"))))
        .transpose()
}

/// Fourier coefficients are listed for `k = 0, 1, −1, 2, −2, …`.
pub fn mode_index(j: usize) -> i32 {
    if j == 0 {
        0
    } else if j % 2 == 1 {
        (j as i32 + 1) / 2
    } else {
        -(j as i32 / 2)
    }
}

/// `[re,im; re,im; …]`.
pub fn parse_coeffs(v: &str) -> Result<Vec<C64>, IoError> {
    let body = v.trim().trim_start_matches('[').trim_end_matches(']');
    body.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let mut it = pair.split(',').map(|x| x.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(re)), Some(Ok(im)), None) => Ok(C64::new(re, im)),
                _ => Err(IoError::Config(format!("bad coefficient pair `{pair}`"))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainShape {
    Disk { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], a: f64, b: f64 },
    Fourier { coeffs: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub shape: DomainShape,
    pub holder_gamma: f64,
}

impl DomainConfig {
    pub fn unit_disk() -> Self {
        Self { shape: DomainShape::Disk { center: [0.0, 0.0], radius: 1.0 }, holder_gamma: 0.5 }
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let m = parse_kv(text)?;
        let gamma = num(&m, "holder_gamma")?.unwrap_or(0.5);
        let center = [num(&m, "center_re")?.unwrap_or(0.0), num(&m, "center_im")?.unwrap_or(0.0)];
        let need = |k: &str| num(&m, k)?.ok_or_else(|| IoError::Config(format!("missing key {k}")));
        let shape = match m.get("kind").map(String::as_str) {
            Some("disk") => DomainShape::Disk { center, radius: need("radius")? },
            Some("ellipse") => DomainShape::Ellipse { center, a: need("a")?, b: need("b")? },
            Some("fourier") => {
                let c = parse_coeffs(m.get("coeffs").ok_or_else(|| IoError::Config("missing key coeffs".into()))?)?;
                DomainShape::Fourier { coeffs: c.iter().map(|z| [z.re, z.im]).collect() }
            }
            Some(k) => return Err(IoError::Config(format!("unknown kind {k}"))),
            None => return Err(IoError::Config("missing key kind".into())),
        };
        Ok(Self { shape, holder_gamma: gamma })
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::parse(&read(path)?)
    }

    pub fn build(&self) -> Result<Arc<PatchDomain>, IoError> {
        let g = self.holder_gamma;
        let d = match &self.shape {
            DomainShape::Disk { center, radius } => PatchDomain::disk(C64::new(center[0], center[1]), *radius, g)?,
            DomainShape::Ellipse { center, a, b } => PatchDomain::ellipse(C64::new(center[0], center[1]), *a, *b, g)?,
            DomainShape::Fourier { coeffs } => {
                PatchDomain::fourier(coeffs.iter().enumerate().map(|(j, c)| (mode_index(j), C64::new(c[0], c[1]))).collect(), g)?
            }
        };
        Ok(Arc::new(d))
    }

    /// Canonical text form, re-parsable by [`DomainConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match &self.shape {
            DomainShape::Disk { center, radius } => {
                s += &format!("kind = disk\nradius = {}\ncenter_re = {}\ncenter_im = {}\n", radius, center[0], center[1]);
            }
            DomainShape::Ellipse { center, a, b } => {
                s += &format!("kind = ellipse\na = {}\nb = {}\ncenter_re = {}\ncenter_im = {}\n", a, b, center[0], center[1]);
            }
            DomainShape::Fourier { coeffs } => {
                let body: Vec<String> = coeffs.iter().map(|c| format!("{},{}", c[0], c[1])).collect();
                s += &format!("kind = fourier\ncoeffs = [{}]\n", body.join(";"));
            }
        }
        s += &format!("holder_gamma = {}\n", self.holder_gamma);
        s
    }
}

/// `{:.12e}` text for CSV cells.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

/// Rounds to 13 significant digits so JSON output is stable across runs.
pub fn fixed(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    fmt_f(x).parse().unwrap_or(x)
}

/// Applies [`fixed`] to every number in a JSON tree; non-finite values become strings.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => serde_json::Number::from_f64(fixed(x)).map(Value::Number).unwrap_or_else(|| Value::String(x.to_string())),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Serializes a value, mapping NaN/∞ to strings first.
pub fn to_json<T: Serialize>(v: &T) -> Value {
    round_json(serde_json::to_value(v).unwrap_or(Value::Null))
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(path, text).map_err(|source| IoError::File { path: path.into(), source })
}

/// SHA-256 of the canonical text of a run configuration.
pub fn config_hash(canonical: &str) -> String {
    let d = Sha256::digest(canonical.as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance recorded next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub columns: Vec<String>,
    pub config_hash: String,
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
    #[serde(default)]
    pub extra: Value,
}

impl Sidecar {
    pub fn new(columns: &[&str], config_hash: &str, spec: &QuadratureSpec) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            config_hash: config_hash.into(),
            quad_abs_tol: spec.abs_tol,
            quad_rel_tol: spec.rel_tol,
            extra: Value::Null,
        }
    }

    pub fn with_extra(mut self, extra: Value) -> Self {
        self.extra = extra;
        self
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `rows` (already formatted) with a header and the sidecar.
pub fn write_table(path: &Path, sidecar: &Sidecar, rows: &[Vec<String>]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&sidecar.columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|source| IoError::File { path: path.into(), source })?;
    write_json(&sidecar_path(path), &to_json(sidecar))
}

pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), IoError> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(|s| s.trim().to_string()).collect());
    }
    Ok((header, rows))
}

fn column(header: &[String], name: &str) -> Result<usize, IoError> {
    header.iter().position(|h| h == name).ok_or_else(|| IoError::Config(format!("missing column {name}")))
}

fn cell(row: &[String], i: usize) -> Result<f64, IoError> {
    row.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| IoError::Config(format!("bad number in column {i}")))
}

/// Points CSV with columns `re_z, im_z`.
pub fn read_points(path: &Path) -> Result<Vec<C64>, IoError> {
    let (h, rows) = read_table(path)?;
    let (a, b) = (column(&h, "re_z")?, column(&h, "im_z")?);
    rows.iter().map(|r| Ok(C64::new(cell(r, a)?, cell(r, b)?))).collect()
}

pub const FIELD_COLUMNS: [&str; 5] = ["region", "re_z", "im_z", "re_f", "im_f"];

/// Field CSV rows at the mesh nodes of each side.
pub fn field_rows(f: &PiecewiseField, mesh: &MeshSpec) -> Vec<Vec<String>> {
    let dom = f.domain();
    let mut rows = Vec::new();
    for (side, name) in [(Side::Interior, "interior"), (Side::Exterior, "exterior")] {
        for z in MeshPart::node_positions(dom, side, mesh) {
            let v = f.side_value(side, z);
            rows.push(vec![name.to_string(), fmt_f(z.re), fmt_f(z.im), fmt_f(v.re), fmt_f(v.im)]);
        }
    }
    rows
}

/// Sidecar payload that lets [`read_field`] rebuild the mesh parts.
pub fn field_extra(mesh: &MeshSpec, exterior_decay: u32) -> Value {
    json!({ "mesh": { "n_radial": mesh.n_radial, "n_theta": mesh.n_theta, "stencil": mesh.stencil }, "exterior_decay": exterior_decay })
}

/// Reads a field CSV. Per side: no rows is zero, one row a constant, and a
/// full node set (in node order, mesh from the sidecar) a mesh part.
pub fn read_field(path: &Path, domain: Arc<PatchDomain>) -> Result<PiecewiseField, IoError> {
    let (h, rows) = read_table(path)?;
    let (ir, iz, jz, iv, jv) = (column(&h, "region")?, column(&h, "re_z")?, column(&h, "im_z")?, column(&h, "re_f")?, column(&h, "im_f")?);
    let side_path = sidecar_path(path);
    let (mesh, decay) = if side_path.exists() {
        let sc: Sidecar = serde_json::from_str(&read(&side_path)?)?;
        let m = &sc.extra["mesh"];
        let mesh = match (m["n_radial"].as_u64(), m["n_theta"].as_u64()) {
            (Some(nr), Some(nt)) => Some(MeshSpec { n_radial: nr as usize, n_theta: nt as usize, stencil: m["stencil"].as_u64().unwrap_or(nt) as usize }),
            _ => None,
        };
        (mesh, sc.extra["exterior_decay"].as_u64().unwrap_or(0) as u32)
    } else {
        (None, 0)
    };
    let mut parts = Vec::new();
    for (side, name) in [(Side::Interior, "interior"), (Side::Exterior, "exterior")] {
        let mine: Vec<&Vec<String>> = rows.iter().filter(|r| r.get(ir).map(String::as_str) == Some(name)).collect();
        let vals: Vec<C64> = mine.iter().map(|r| Ok(C64::new(cell(r, iv)?, cell(r, jv)?))).collect::<Result<_, IoError>>()?;
        let part = match (vals.len(), mesh) {
            (0, _) => Part::Zero,
            (1, _) => Part::Constant(vals[0]),
            (n, Some(m)) if n == m.n_radial * m.n_theta => {
                let nodes = MeshPart::node_positions(&domain, side, &m);
                for (r, z) in mine.iter().zip(&nodes) {
                    let p = C64::new(cell(r, iz)?, cell(r, jz)?);
                    if (p - z).norm() > 1e-9 * (1.0 + z.norm()) {
                        return Err(IoError::Config(format!("{name} row at {p} is not the mesh node {z}")));
                    }
                }
                let mp = MeshPart::from_values(domain.clone(), side, m, vals);
                Part::Mesh(Arc::new(if side == Side::Exterior { mp.with_decay(decay) } else { mp }))
            }
            (n, _) => return Err(IoError::Config(format!("{n} {name} rows do not match a mesh"))),
        };
        parts.push(part);
    }
    let ext = parts.pop().expect("two parts");
    let int = parts.pop().expect("two parts");
    Ok(PiecewiseField::new(domain, int, ext))
}
