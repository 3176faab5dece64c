//! ASCII OBJ and PLY readers.

use std::path::Path;

use super::TriangleMesh;
use crate::{Error, Point3, Result};

/// Loads an ASCII `.obj` or `.ply` file, dispatching on the extension (or on
/// the `ply` magic line when the extension is unknown).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("obj") => parse_obj(&text),
        Some("ply") => parse_ply(&text),
        _ if text.trim_start().starts_with("ply") => parse_ply(&text),
        other => Err(Error::UnsupportedFormat(other.unwrap_or("<none>").to_string())),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

/// Parses `v` and `f` records. Polygons are fan-triangulated; texture and
/// normal indices (`v/vt/vn`) are ignored; negative indices are relative.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let coords: Vec<&str> = toks.collect();
                if coords.len() < 3 {
                    return Err(parse_err(line_no, "vertex needs three coordinates"));
                }
                let x = parse_f64(coords[0], line_no)?;
                let y = parse_f64(coords[1], line_no)?;
                let z = parse_f64(coords[2], line_no)?;
                if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                    return Err(parse_err(line_no, "non-finite vertex coordinate"));
                }
                vertices.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in toks {
                    let head = tok.split('/').next().unwrap_or("");
                    let n: i64 = head
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("invalid face index `{tok}`")))?;
                    let resolved = match n {
                        0 => None,
                        n if n > 0 => Some(n as usize - 1),
                        n => vertices.len().checked_sub(n.unsigned_abs() as usize),
                    };
                    match resolved {
                        Some(k) if k < vertices.len() => idx.push(k),
                        _ => {
                            return Err(parse_err(
                                line_no,
                                format!(
                                    "face index {n} out of range ({} vertices defined)",
                                    vertices.len()
                                ),
                            ))
                        }
                    }
                }
                if idx.len() < 3 {
                    return Err(parse_err(line_no, "face needs at least three vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    TriangleMesh::new(vertices, faces)
}

#[derive(Debug)]
enum Property {
    Scalar(String),
    List(String),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Parses an ASCII PLY file with `vertex` (x, y, z) and `face`
/// (`vertex_indices` list) elements. Other elements and properties are
/// skipped.
pub fn parse_ply(text: &str) -> Result<TriangleMesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, _)) => return Err(parse_err(n, "missing `ply` magic")),
        None => return Err(parse_err(1, "empty file")),
    }

    let mut elements: Vec<Element> = Vec::new();
    loop {
        let Some((n, line)) = lines.next() else {
            return Err(parse_err(0, "missing end_header"));
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["end_header"] => break,
            ["format", "ascii", _] => {}
            ["format", fmt, ..] => {
                return Err(parse_err(n, format!("only ASCII PLY is supported, got `{fmt}`")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| parse_err(n, format!("invalid element count `{count}`")))?,
                properties: Vec::new(),
            }),
            ["property", "list", _, _, name] => elements
                .last_mut()
                .ok_or_else(|| parse_err(n, "property before element"))?
                .properties
                .push(Property::List(name.to_string())),
            ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| parse_err(n, "property before element"))?
                .properties
                .push(Property::Scalar(name.to_string())),
            _ => return Err(parse_err(n, format!("unrecognized header line `{line}`"))),
        }
    }

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for element in &elements {
        for _ in 0..element.count {
            let Some((n, line)) = lines.next() else {
                return Err(parse_err(0, format!("unexpected end of file in `{}`", element.name)));
            };
            let mut toks = line.split_whitespace();
            let mut scalars: Vec<(&str, f64)> = Vec::new();
            let mut lists: Vec<(&str, Vec<i64>)> = Vec::new();
            for prop in &element.properties {
                match prop {
                    Property::Scalar(name) => {
                        let tok = toks.next().ok_or_else(|| parse_err(n, "too few values"))?;
                        scalars.push((name, parse_f64(tok, n)?));
                    }
                    Property::List(name) => {
                        let tok = toks.next().ok_or_else(|| parse_err(n, "too few values"))?;
                        let len: usize = tok
                            .parse()
                            .map_err(|_| parse_err(n, format!("invalid list length `{tok}`")))?;
                        let mut items = Vec::with_capacity(len);
                        for _ in 0..len {
                            let tok = toks.next().ok_or_else(|| parse_err(n, "list too short"))?;
                            items.push(
                                tok.parse()
                                    .map_err(|_| parse_err(n, format!("invalid index `{tok}`")))?,
                            );
                        }
                        lists.push((name, items));
                    }
                }
            }
            match element.name.as_str() {
                "vertex" => {
                    let get = |axis: &str| {
                        scalars
                            .iter()
                            .find(|(name, _)| *name == axis)
                            .map(|&(_, v)| v)
                            .ok_or_else(|| parse_err(n, format!("vertex lacks `{axis}`")))
                    };
                    let p = Point3::new(get("x")?, get("y")?, get("z")?);
                    if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                        return Err(parse_err(n, "non-finite vertex coordinate"));
                    }
                    vertices.push(p);
                }
                "face" => {
                    let (_, idx) = lists
                        .iter()
                        .find(|(name, _)| *name == "vertex_indices" || *name == "vertex_index")
                        .ok_or_else(|| parse_err(n, "face lacks `vertex_indices`"))?;
                    if idx.len() < 3 {
                        return Err(parse_err(n, "face needs at least three vertices"));
                    }
                    let vertex_count = element_count(&elements, "vertex");
                    let mut resolved = Vec::with_capacity(idx.len());
                    for &k in idx {
                        if k < 0 || k as usize >= vertex_count {
                            return Err(parse_err(
                                n,
                                format!("face index {k} out of range ({vertex_count} vertices)"),
                            ));
                        }
                        resolved.push(k as usize);
                    }
                    for k in 1..resolved.len() - 1 {
                        faces.push([resolved[0], resolved[k], resolved[k + 1]]);
                    }
                }
                _ => {}
            }
        }
    }
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    TriangleMesh::new(vertices, faces)
}

fn element_count(elements: &[Element], name: &str) -> usize {
    elements
        .iter()
        .find(|e| e.name == name)
        .map_or(0, |e| e.count)
}
