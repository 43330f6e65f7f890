//! Gmsh MSH 2.2 ASCII reader and writer (triangles only).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{signed_area, TriMesh};

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let t = l.trim();
            if !t.is_empty() {
                return Some((i + 1, t));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_line()
            .ok_or_else(|| format_err(self.last + 1, format!("unexpected end of file, expected {what}")))
    }
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| format_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| format_err(line, format!("cannot parse {what} from {tok:?}")))
}

/// Parses an MSH 2.2 ASCII document.
///
/// Triangles (type 2) become mesh elements with their first tag as region;
/// line (type 1) and point (type 15) elements are ignored. Clockwise
/// triangles are reoriented and unreferenced nodes are dropped.
pub fn import_gmsh(text: &str) -> Result<TriMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let mut nodes: Vec<(u64, [f64; 2])> = Vec::new();
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut elements: Vec<(usize, [u64; 3], i32)> = Vec::new();
    let mut saw_format = false;
    while let Some((ln, l)) = lines.next_line() {
        match l {
            "$MeshFormat" => {
                let (ln, hdr) = lines.expect("format header")?;
                let mut it = hdr.split_whitespace();
                let version: String = parse(it.next(), ln, "version")?;
                if version != "2.2" {
                    return Err(format_err(
                        ln,
                        format!("unsupported MSH version {version}, expected 2.2"),
                    ));
                }
                let ftype: i32 = parse(it.next(), ln, "file type")?;
                if ftype != 0 {
                    return Err(format_err(ln, "binary MSH files are not supported"));
                }
                let (ln, end) = lines.expect("$EndMeshFormat")?;
                if end != "$EndMeshFormat" {
                    return Err(format_err(ln, "expected $EndMeshFormat"));
                }
                saw_format = true;
            }
            "$Nodes" => {
                let (ln, cnt) = lines.expect("node count")?;
                let count: usize = parse(Some(cnt), ln, "node count")?;
                for _ in 0..count {
                    let (ln, row) = lines.expect("node record")?;
                    let mut it = row.split_whitespace();
                    let id: u64 = parse(it.next(), ln, "node id")?;
                    let x: f64 = parse(it.next(), ln, "x coordinate")?;
                    let y: f64 = parse(it.next(), ln, "y coordinate")?;
                    let _z: f64 = parse(it.next(), ln, "z coordinate")?;
                    if node_index.insert(id, nodes.len()).is_some() {
                        return Err(format_err(ln, format!("duplicate node id {id}")));
                    }
                    nodes.push((id, [x, y]));
                }
                let (ln, end) = lines.expect("$EndNodes")?;
                if end != "$EndNodes" {
                    return Err(format_err(ln, "node count does not match the records before $EndNodes"));
                }
            }
            "$Elements" => {
                let (ln, cnt) = lines.expect("element count")?;
                let count: usize = parse(Some(cnt), ln, "element count")?;
                for _ in 0..count {
                    let (ln, row) = lines.expect("element record")?;
                    let mut it = row.split_whitespace();
                    let _id: u64 = parse(it.next(), ln, "element id")?;
                    let etype: u32 = parse(it.next(), ln, "element type")?;
                    let ntags: usize = parse(it.next(), ln, "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(parse::<i64>(it.next(), ln, "tag")?);
                    }
                    let nnodes = match etype {
                        1 => 2,
                        2 => 3,
                        15 => 1,
                        other => {
                            return Err(format_err(ln, format!("unsupported element type {other}")));
                        }
                    };
                    let mut ids = [0u64; 3];
                    for id in ids.iter_mut().take(nnodes) {
                        *id = parse(it.next(), ln, "element node id")?;
                    }
                    if etype == 2 {
                        let region = tags.first().copied().unwrap_or(0) as i32;
                        elements.push((ln, ids, region));
                    }
                }
                let (ln, end) = lines.expect("$EndElements")?;
                if end != "$EndElements" {
                    return Err(format_err(
                        ln,
                        "element count does not match the records before $EndElements",
                    ));
                }
            }
            other if other.starts_with("$End") => {
                return Err(format_err(ln, format!("unmatched section terminator {other}")));
            }
            other if other.starts_with('$') => {
                // Skip unknown sections such as $PhysicalNames.
                let end = format!("$End{}", &other[1..]);
                loop {
                    let (_, l) = lines.expect(&end)?;
                    if l == end {
                        break;
                    }
                }
            }
            other => return Err(format_err(ln, format!("unexpected content {other:?}"))),
        }
    }
    if !saw_format {
        return Err(format_err(1, "missing $MeshFormat section"));
    }
    if elements.is_empty() {
        return Err(format_err(lines.last, "no triangle elements"));
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(elements.len());
    let mut regions = Vec::with_capacity(elements.len());
    let mut local: Vec<[usize; 3]> = Vec::with_capacity(elements.len());
    for (ln, ids, _) in &elements {
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = *node_index
                .get(&ids[k])
                .ok_or_else(|| format_err(*ln, format!("element references unknown node {}", ids[k])))?;
        }
        local.push(tri);
    }
    let mut used = vec![false; nodes.len()];
    for tri in &local {
        for &n in tri {
            used[n] = true;
        }
    }
    for (n, node) in nodes.iter().enumerate() {
        if used[n] {
            remap[n] = vertices.len();
            vertices.push(node.1);
        }
    }
    for (i, tri) in local.iter().enumerate() {
        let mut t = [remap[tri[0]], remap[tri[1]], remap[tri[2]]];
        let a = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        if a < 0.0 {
            t.swap(1, 2);
        } else if a == 0.0 {
            return Err(format_err(elements[i].0, "degenerate triangle with zero area"));
        }
        triangles.push(t);
        regions.push(elements[i].2);
    }
    TriMesh::with_regions(vertices, triangles, regions)
}

/// Writes an MSH 2.2 ASCII document with 17 significant digits, so that
/// reading it back reproduces every coordinate bit for bit.
pub fn export_gmsh(mesh: &TriMesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_vertices());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {:.16e} {:.16e} 0", i + 1, v[0], v[1]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.n_triangles());
    for (i, (t, r)) in mesh.triangles().iter().zip(mesh.regions()).enumerate() {
        let _ = writeln!(s, "{} 2 2 {} {} {} {} {}", i + 1, r, r, t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s.push_str("$EndElements\n");
    s
}

pub fn read_gmsh(path: &Path) -> Result<TriMesh> {
    import_gmsh(&std::fs::read_to_string(path)?)
}

pub fn write_gmsh(mesh: &TriMesh, path: &Path) -> Result<()> {
    std::fs::write(path, export_gmsh(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_rectangle;

    const TWO_TRIANGLES: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n$Elements\n3\n1 1 2 0 1 1 2\n2 2 2 0 1 1 2 3\n3 2 2 0 1 1 3 4\n$EndElements\n";

    #[test]
    fn reads_two_triangles() {
        let m = import_gmsh(TWO_TRIANGLES).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.boundary().len(), 4);
    }

    #[test]
    fn reorients_clockwise() {
        let text = TWO_TRIANGLES.replace("2 2 2 0 1 1 2 3", "2 2 2 0 1 1 3 2");
        let m = import_gmsh(&text).unwrap();
        assert!(m.triangle_area(0) > 0.0);
    }

    #[test]
    fn rejects_version_four() {
        let text = TWO_TRIANGLES.replace("2.2 0 8", "4.1 0 8");
        match import_gmsh(&text) {
            Err(Error::Format { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("4.1"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_node_block() {
        let text = TWO_TRIANGLES.replace("$Nodes\n4\n", "$Nodes\n5\n");
        assert!(matches!(import_gmsh(&text), Err(Error::Format { .. })));
    }

    #[test]
    fn round_trip_is_exact() {
        let m = gen_rectangle(std::f64::consts::PI, 1.0 / 3.0, 7, 5).unwrap();
        let back = import_gmsh(&export_gmsh(&m)).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
    }
}
