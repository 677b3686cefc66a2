use std::io::{BufRead, Write};

use super::Mesh;
use crate::error::{Error, Result};

impl Mesh {
    /// Writes the plain-text mesh format: a `nodes <n> triangles <m>` header,
    /// one `x y` line per node and one 0-based index triple per triangle.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "nodes {} triangles {}", self.node_count(), self.triangle_count())?;
        for p in self.nodes() {
            writeln!(w, "{:.16e} {:.16e}", p[0], p[1])?;
        }
        for t in self.triangles() {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Mesh> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty mesh file"))?;
        let header = header?;
        let words: Vec<&str> = header.split_whitespace().collect();
        let (n_nodes, n_tris) = match words.as_slice() {
            ["nodes", n, "triangles", m] => (
                n.parse::<usize>().map_err(|e| Error::parse(1, e.to_string()))?,
                m.parse::<usize>().map_err(|e| Error::parse(1, e.to_string()))?,
            ),
            _ => return Err(Error::parse(1, "expected `nodes <n> triangles <m>`")),
        };
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut triangles = Vec::with_capacity(n_tris);
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if nodes.len() < n_nodes {
                let xy = parse_all::<f64>(&fields, lineno)?;
                if xy.len() != 2 {
                    return Err(Error::parse(lineno, "node line needs two coordinates"));
                }
                nodes.push([xy[0], xy[1]]);
            } else if triangles.len() < n_tris {
                let ix = parse_all::<usize>(&fields, lineno)?;
                if ix.len() != 3 {
                    return Err(Error::parse(lineno, "triangle line needs three indices"));
                }
                triangles.push([ix[0], ix[1], ix[2]]);
            } else {
                return Err(Error::parse(lineno, "trailing data after the last triangle"));
            }
        }
        if nodes.len() != n_nodes || triangles.len() != n_tris {
            return Err(Error::parse(0, "mesh file is truncated"));
        }
        Mesh::new(nodes, triangles)
    }
}

fn parse_all<T: std::str::FromStr>(fields: &[&str], line: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    fields
        .iter()
        .map(|f| f.parse::<T>().map_err(|e| Error::parse(line, format!("`{f}`: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_uniform_mesh, rgb_refine};

    #[test]
    fn round_trip_is_bit_exact() {
        let m = make_uniform_mesh(3).unwrap();
        let m = rgb_refine(&m, &[0, 7, 11]).unwrap().mesh;
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = Mesh::read_text(&buf[..]).unwrap();
        assert!(back.same_geometry(&m));
    }

    #[test]
    fn rejects_bad_header() {
        assert!(matches!(
            Mesh::read_text(&b"points 3\n"[..]),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_truncated() {
        let text = "nodes 4 triangles 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n";
        assert!(Mesh::read_text(text.as_bytes()).is_err());
    }
}
