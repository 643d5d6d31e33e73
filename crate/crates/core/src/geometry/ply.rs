//! ASCII PLY subset reader and writer.
//!
//! Supported layout: a `vertex` element with properties `x y z`
//! (+ optional `nx ny nz`, `red green blue`, `label`) and a `face` element
//! with one index-list property of exactly three indices. Files are UTF-8,
//! whitespace-separated, LF line endings.

use super::Mesh;
use crate::error::{Error, Result};
use crate::math::Vec3;
use std::fmt::Write as _;

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::PlyParse { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VertexProp {
    X,
    Y,
    Z,
    Nx,
    Ny,
    Nz,
    Red,
    Green,
    Blue,
    Label,
    Ignored,
}

struct Header {
    vertex_count: usize,
    face_count: usize,
    vertex_props: Vec<VertexProp>,
    has_normals: bool,
    has_colors: bool,
    has_labels: bool,
    /// 1-based line number where the body starts.
    body_start: usize,
}

fn parse_header(lines: &[&str]) -> Result<Header> {
    let mut it = lines.iter().enumerate();
    let mut next_content = |expect: &str| -> Result<(usize, &str)> {
        for (i, raw) in it.by_ref() {
            let t = raw.trim();
            if t.is_empty() || t.starts_with("comment") {
                continue;
            }
            return Ok((i + 1, t));
        }
        Err(err(lines.len(), format!("unexpected end of header, expected {expect}")))
    };

    let (ln, magic) = next_content("'ply'")?;
    if magic != "ply" {
        return Err(err(ln, "file does not start with 'ply'"));
    }
    let (ln, format) = next_content("'format ascii 1.0'")?;
    if format != "format ascii 1.0" {
        return Err(err(ln, format!("unsupported format line '{format}'")));
    }

    let mut vertex_count = None;
    let mut face_count = None;
    let mut vertex_props: Vec<VertexProp> = Vec::new();
    let mut face_list_seen = false;
    // Which element the property lines currently belong to.
    #[derive(PartialEq)]
    enum Section {
        None,
        Vertex,
        Face,
        Other,
    }
    let mut section = Section::None;
    let body_start;

    loop {
        let (ln, line) = next_content("'end_header'")?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("end_header") => {
                body_start = ln + 1;
                break;
            }
            Some("element") => {
                let name = tok.next().ok_or_else(|| err(ln, "element without name"))?;
                let count: usize = tok
                    .next()
                    .ok_or_else(|| err(ln, "element without count"))?
                    .parse()
                    .map_err(|_| err(ln, "element count is not an integer"))?;
                section = match name {
                    "vertex" => {
                        vertex_count = Some(count);
                        Section::Vertex
                    }
                    "face" => {
                        face_count = Some(count);
                        Section::Face
                    }
                    _ => Section::Other,
                };
            }
            Some("property") => match section {
                Section::Vertex => {
                    let ty = tok.next().ok_or_else(|| err(ln, "property without type"))?;
                    if ty == "list" {
                        return Err(err(ln, "list property not supported on vertex element"));
                    }
                    let name = tok.next().ok_or_else(|| err(ln, "property without name"))?;
                    vertex_props.push(match name {
                        "x" => VertexProp::X,
                        "y" => VertexProp::Y,
                        "z" => VertexProp::Z,
                        "nx" => VertexProp::Nx,
                        "ny" => VertexProp::Ny,
                        "nz" => VertexProp::Nz,
                        "red" => VertexProp::Red,
                        "green" => VertexProp::Green,
                        "blue" => VertexProp::Blue,
                        "label" => VertexProp::Label,
                        _ => VertexProp::Ignored,
                    });
                }
                Section::Face => {
                    let ty = tok.next().ok_or_else(|| err(ln, "property without type"))?;
                    if ty != "list" {
                        return Err(err(ln, "face element requires a single list property"));
                    }
                    face_list_seen = true;
                }
                Section::Other => {}
                Section::None => return Err(err(ln, "property before any element")),
            },
            Some(other) => return Err(err(ln, format!("unknown header keyword '{other}'"))),
            None => unreachable!("blank lines are skipped"),
        }
    }

    let vertex_count = vertex_count.ok_or_else(|| err(body_start - 1, "missing 'element vertex'"))?;
    let face_count = face_count.unwrap_or(0);
    if face_count > 0 && !face_list_seen {
        return Err(err(body_start - 1, "face element missing its list property"));
    }
    let has = |p: VertexProp| vertex_props.contains(&p);
    for required in [VertexProp::X, VertexProp::Y, VertexProp::Z] {
        if !has(required) {
            return Err(err(body_start - 1, "vertex element must declare x, y, z"));
        }
    }
    let has_normals = has(VertexProp::Nx);
    if has_normals && (!has(VertexProp::Ny) || !has(VertexProp::Nz)) {
        return Err(err(body_start - 1, "normals require all of nx, ny, nz"));
    }
    let has_colors = has(VertexProp::Red);
    if has_colors && (!has(VertexProp::Green) || !has(VertexProp::Blue)) {
        return Err(err(body_start - 1, "colors require all of red, green, blue"));
    }
    let has_labels = has(VertexProp::Label);
    Ok(Header {
        vertex_count,
        face_count,
        vertex_props,
        has_normals,
        has_colors,
        has_labels,
        body_start,
    })
}

/// Parse an ASCII PLY mesh. Errors carry the 1-based line number.
pub fn parse_ply(text: &str) -> Result<Mesh> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(&lines)?;

    let mut mesh = Mesh {
        vertices: Vec::with_capacity(header.vertex_count),
        faces: Vec::with_capacity(header.face_count),
        normals: header.has_normals.then(|| Vec::with_capacity(header.vertex_count)),
        colors: header.has_colors.then(|| Vec::with_capacity(header.vertex_count)),
        labels: header.has_labels.then(|| Vec::with_capacity(header.vertex_count)),
    };

    // Body lines: data rows, skipping blanks/comments to be lenient.
    let mut rows = lines
        .iter()
        .enumerate()
        .skip(header.body_start - 1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with("comment"));

    for _ in 0..header.vertex_count {
        let (ln, row) = rows
            .next()
            .ok_or_else(|| err(lines.len(), "unexpected end of file in vertex data"))?;
        let tokens: Vec<&str> = row.split_whitespace().collect();
        if tokens.len() < header.vertex_props.len() {
            return Err(err(ln, format!(
                "expected {} vertex values, found {}",
                header.vertex_props.len(),
                tokens.len()
            )));
        }
        let mut pos = Vec3::ZERO;
        let mut normal = Vec3::ZERO;
        let mut color = [0u8; 3];
        let mut label = 0u16;
        for (prop, tok) in header.vertex_props.iter().zip(&tokens) {
            let parse_f = || -> Result<f64> {
                tok.parse().map_err(|_| err(ln, format!("invalid float '{tok}'")))
            };
            match prop {
                VertexProp::X => pos.x = parse_f()?,
                VertexProp::Y => pos.y = parse_f()?,
                VertexProp::Z => pos.z = parse_f()?,
                VertexProp::Nx => normal.x = parse_f()?,
                VertexProp::Ny => normal.y = parse_f()?,
                VertexProp::Nz => normal.z = parse_f()?,
                VertexProp::Red => {
                    color[0] = tok.parse().map_err(|_| err(ln, format!("invalid color '{tok}'")))?
                }
                VertexProp::Green => {
                    color[1] = tok.parse().map_err(|_| err(ln, format!("invalid color '{tok}'")))?
                }
                VertexProp::Blue => {
                    color[2] = tok.parse().map_err(|_| err(ln, format!("invalid color '{tok}'")))?
                }
                VertexProp::Label => {
                    label = tok.parse().map_err(|_| err(ln, format!("invalid label '{tok}'")))?
                }
                VertexProp::Ignored => {}
            }
        }
        mesh.vertices.push(pos);
        if let Some(ns) = &mut mesh.normals {
            ns.push(normal);
        }
        if let Some(cs) = &mut mesh.colors {
            cs.push(color);
        }
        if let Some(ls) = &mut mesh.labels {
            ls.push(label);
        }
    }

    for _ in 0..header.face_count {
        let (ln, row) = rows
            .next()
            .ok_or_else(|| err(lines.len(), "unexpected end of file in face data"))?;
        let mut tok = row.split_whitespace();
        let count: usize = tok
            .next()
            .ok_or_else(|| err(ln, "empty face row"))?
            .parse()
            .map_err(|_| err(ln, "invalid face index count"))?;
        if count != 3 {
            return Err(err(ln, format!("non-triangle face with {count} indices")));
        }
        let mut face = [0u32; 3];
        for slot in &mut face {
            let t = tok.next().ok_or_else(|| err(ln, "face row has too few indices"))?;
            let idx: u32 = t.parse().map_err(|_| err(ln, format!("invalid index '{t}'")))?;
            if idx as usize >= header.vertex_count {
                return Err(err(ln, format!(
                    "index out of range: {idx} of {}",
                    header.vertex_count
                )));
            }
            *slot = idx;
        }
        mesh.faces.push(face);
    }

    Ok(mesh)
}

/// Format a float with full round-trip precision (17 significant digits).
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize a mesh as ASCII PLY. The output is parseable by [`parse_ply`]
/// and reproduces every field exactly.
pub fn write_ply(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", mesh.vertex_count());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if mesh.normals.is_some() {
        out.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    if mesh.colors.is_some() {
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    if mesh.labels.is_some() {
        out.push_str("property ushort label\n");
    }
    let _ = writeln!(out, "element face {}", mesh.face_count());
    out.push_str("property list uchar uint vertex_indices\nend_header\n");

    for (i, v) in mesh.vertices.iter().enumerate() {
        let _ = write!(out, "{} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z));
        if let Some(ns) = &mesh.normals {
            let n = ns[i];
            let _ = write!(out, " {} {} {}", fmt_f64(n.x), fmt_f64(n.y), fmt_f64(n.z));
        }
        if let Some(cs) = &mesh.colors {
            let c = cs[i];
            let _ = write!(out, " {} {} {}", c[0], c[1], c[2]);
        }
        if let Some(ls) = &mesh.labels {
            let _ = write!(out, " {}", ls[i]);
        }
        out.push('\n');
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}
