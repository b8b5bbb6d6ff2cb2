//! Plain-text file formats: point clouds, distance matrices, diagrams,
//! kernel matrices and matchings.
//!
//! Floats are written with the shortest representation that parses back to
//! the same value; infinities are written `inf`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::filtration::{DistanceMatrix, PointCloud};
use crate::kernels::{KernelMatrix, KernelSpec};
use crate::metrics::Matching;
use crate::persistence::{DiagramPoint, DiagramSet, PersistenceDiagram};
use crate::scalar::{lit, Scalar};

pub const DIAGRAM_HEADER: &str = "# persistence-diagram v1";
pub const KERNEL_HEADER: &str = "# kernel-matrix v1";

/// Round-trip float formatting with `inf` / `-inf` / `nan` spelled out.
pub fn format_float<T: Scalar>(x: T) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > T::zero() { "inf".into() } else { "-inf".into() }
    } else {
        // T's Display is the shortest round-trip form
        let s = format!("{x}");
        if s == "-0" { "0".into() } else { s }
    }
}

pub fn parse_float<T: Scalar>(field: &str, line: usize) -> Result<T> {
    let f = field.trim();
    let v: f64 = match f.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ => f
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("`{f}` is not a number") })?,
    };
    if v.is_nan() {
        return Err(Error::Parse { line, message: "NaN is not allowed".into() });
    }
    Ok(lit(v))
}

/// Nonblank data lines with 1-based line numbers; `#` lines are skipped.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_row<T: Scalar>(line: &str, no: usize) -> Result<Vec<T>> {
    line.split(',').map(|f| parse_float(f, no)).collect()
}

/// One point per row, comma separated, no header.
pub fn read_cloud<T: Scalar>(text: &str) -> Result<PointCloud<T>> {
    let mut points = Vec::new();
    let mut width = None;
    for (no, line) in data_lines(text) {
        let row: Vec<T> = parse_row(line, no)?;
        if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
            return Err(Error::Parse { line: no, message: format!("coordinate {bad} is not finite") });
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse { line: no, message: format!("expected {w} coordinates, found {}", row.len()) })
            }
            _ => {}
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("point cloud file has no points".into()));
    }
    PointCloud::new(points)
}

pub fn write_cloud<T: Scalar>(cloud: &PointCloud<T>) -> String {
    let mut out = String::new();
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(|&x| format_float(x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Full symmetric or lower-triangular matrix, detected from row lengths.
/// Lower-triangular rows may include the zero diagonal (`1, 2, ..., n`
/// entries) or omit it (`1, 2, ..., n - 1` entries, empty first row left out).
pub fn read_distance_matrix<T: Scalar>(text: &str) -> Result<DistanceMatrix<T>> {
    let mut rows: Vec<(usize, Vec<T>)> = Vec::new();
    for (no, line) in data_lines(text) {
        rows.push((no, parse_row(line, no)?));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("distance file has no rows".into()));
    }
    let r = rows.len();
    if rows.iter().all(|(_, v)| v.len() == r) {
        return DistanceMatrix::from_precomputed(rows.into_iter().map(|(_, v)| v).collect());
    }
    if let Some((no, _)) = rows.iter().enumerate().find(|(i, (_, v))| v.len() != i + 1).map(|(_, row)| row) {
        return Err(Error::Parse { line: *no, message: "rows are neither a full square matrix nor lower triangular".into() });
    }
    let with_diagonal = rows.iter().all(|(_, v)| v.last().is_some_and(|x| *x == T::zero()));
    let (n, offset) = if with_diagonal { (r, 0) } else { (r + 1, 1) };
    let mut m = vec![vec![T::zero(); n]; n];
    for (i, (_, v)) in rows.iter().enumerate() {
        for (j, &x) in v.iter().enumerate() {
            m[i + offset][j] = x;
            m[j][i + offset] = x;
        }
    }
    DistanceMatrix::from_precomputed(m)
}

/// Diagram rows `dim,birth,death`, sorted by `(dim, birth, death)`.
pub fn write_diagrams<T: Scalar>(diagrams: &[&PersistenceDiagram<T>]) -> String {
    let mut out = String::from(DIAGRAM_HEADER);
    out.push('\n');
    let mut sorted: Vec<&PersistenceDiagram<T>> = diagrams.to_vec();
    sorted.sort_by_key(|d| d.dim());
    for d in sorted {
        for p in d.sorted_points() {
            let _ = writeln!(out, "{},{},{}", d.dim(), format_float(p.birth), format_float(p.death));
        }
    }
    out
}

pub fn write_diagram<T: Scalar>(d: &PersistenceDiagram<T>) -> String {
    write_diagrams(&[d])
}

/// Every dimension present in a diagram file.
pub fn read_diagram_file<T: Scalar>(text: &str) -> Result<BTreeMap<usize, PersistenceDiagram<T>>> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    if first != Some(DIAGRAM_HEADER) {
        return Err(Error::Parse { line: 1, message: format!("missing header `{DIAGRAM_HEADER}`") });
    }
    let mut points: BTreeMap<usize, Vec<DiagramPoint<T>>> = BTreeMap::new();
    for (no, line) in data_lines(text) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse { line: no, message: format!("expected `dim,birth,death`, found {} fields", fields.len()) });
        }
        let dim: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { line: no, message: format!("`{}` is not a dimension", fields[0].trim()) })?;
        let birth: T = parse_float(fields[1], no)?;
        let death: T = parse_float(fields[2], no)?;
        if !birth.is_finite() {
            return Err(Error::Parse { line: no, message: "birth must be finite".into() });
        }
        if death < birth {
            return Err(Error::Parse { line: no, message: format!("death {death} precedes birth {birth}") });
        }
        points.entry(dim).or_default().push(DiagramPoint::new(birth, death));
    }
    points.into_iter().map(|(dim, pts)| Ok((dim, PersistenceDiagram::new(dim, pts)?))).collect()
}

/// The diagram of dimension `dim`; a file with no rows in that dimension is the empty diagram.
pub fn read_diagram<T: Scalar>(text: &str, dim: Option<usize>) -> Result<PersistenceDiagram<T>> {
    let mut all = read_diagram_file::<T>(text)?;
    match dim {
        Some(d) => Ok(all.remove(&d).unwrap_or_else(|| PersistenceDiagram::empty(d))),
        None => match all.len() {
            0 => Ok(PersistenceDiagram::empty(0)),
            1 => Ok(all.into_values().next().unwrap()),
            _ => Err(Error::InvalidInput(format!(
                "diagram file holds dimensions {:?}; choose one",
                all.keys().collect::<Vec<_>>()
            ))),
        },
    }
}

pub fn write_diagram_set<T: Scalar>(set: &DiagramSet<T>) -> String {
    let refs: Vec<&PersistenceDiagram<T>> = set.diagrams().iter().collect();
    write_diagrams(&refs)
}

pub fn kernel_header<T: Scalar>(spec: Option<&KernelSpec<T>>, transform: Option<&str>) -> String {
    match spec {
        Some(s) => {
            let mut params = s.describe_params();
            if let Some(t) = transform {
                let _ = write!(params, ",transform={t}");
            }
            format!("{KERNEL_HEADER} kind={} params={params}", s.kind_name())
        }
        None => format!("{KERNEL_HEADER} kind=precomputed params="),
    }
}

pub fn write_kernel_matrix<T: Scalar>(k: &KernelMatrix<T>) -> String {
    let transform = k.transform().map(|t| t.as_str());
    let mut out = kernel_header(k.spec(), transform);
    out.push('\n');
    for i in 0..k.n() {
        let row: Vec<String> = k.row(i).iter().map(|&x| format_float(x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Matrix body of a kernel-matrix file; the header line is required.
pub fn read_kernel_matrix<T: Scalar>(text: &str) -> Result<KernelMatrix<T>> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    if !first.starts_with(KERNEL_HEADER) {
        return Err(Error::Parse { line: 1, message: format!("missing header `{KERNEL_HEADER} ...`") });
    }
    let mut rows = Vec::new();
    for (no, line) in data_lines(text) {
        rows.push(parse_row::<T>(line, no)?);
    }
    KernelMatrix::from_rows(&rows)
}

/// `i,j,cost` rows; `-1` marks the diagonal.
pub fn write_matching<T: Scalar>(m: &Matching<T>) -> String {
    let idx = |x: Option<usize>| x.map_or("-1".to_string(), |i| i.to_string());
    let mut out = String::from("i,j,cost\n");
    for p in &m.pairs {
        let _ = writeln!(out, "{},{},{}", idx(p.left), idx(p.right), format_float(p.cost));
    }
    out
}
