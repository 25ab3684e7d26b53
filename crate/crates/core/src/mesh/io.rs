use std::fmt::Write as _;
use std::path::Path;

use super::{Point3, TriMesh};
use crate::error::{arg_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("off") => Ok(Self::Off),
            Some("obj") => Ok(Self::Obj),
            _ => arg_err(format!("cannot infer mesh format of {}", path.display())),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_floats(line: usize, tokens: &[&str]) -> Result<Point3> {
    if tokens.len() < 3 {
        return Err(parse_err(line, "vertex needs three coordinates"));
    }
    let mut p = [0.0; 3];
    for (c, t) in p.iter_mut().zip(tokens) {
        *c = t.parse().map_err(|e| parse_err(line, format!("{e}")))?;
    }
    Ok(p)
}

impl TriMesh {
    pub fn to_off(&self) -> String {
        let mut s = format!("OFF\n{} {} 0\n", self.n_vertices(), self.n_faces());
        for p in self.vertices() {
            let _ = writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]);
        }
        for f in self.faces() {
            let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
        }
        s
    }

    pub fn from_off(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        // Counts may share the header line ("OFF 4 4 0").
        let rest = header.strip_prefix("OFF").ok_or_else(|| parse_err(hl, "malformed header: expected OFF"))?.trim();
        let (cl, counts) = if rest.is_empty() { lines.next().ok_or_else(|| parse_err(hl, "missing counts"))? } else { (hl, rest) };
        let counts: Vec<usize> = counts
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(cl, format!("malformed header counts: {e}")))?;
        if counts.len() < 2 {
            return Err(parse_err(cl, "malformed header: expected vertex and face counts"));
        }
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(cl, "missing vertex rows"))?;
            vertices.push(parse_floats(ln, &l.split_whitespace().collect::<Vec<_>>())?);
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(cl, "missing face rows"))?;
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(ln, format!("{e}")))?;
            if idx.first() != Some(&3) || idx.len() != 4 {
                return Err(parse_err(ln, "non-triangle face"));
            }
            if idx[1..].iter().any(|&v| v >= nv) {
                return Err(parse_err(ln, "index out of range"));
            }
            faces.push([idx[1], idx[2], idx[3]]);
        }
        TriMesh::new(vertices, faces)
    }

    /// OBJ subset: `v` and `f` lines, 1-based indices.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for p in self.vertices() {
            let _ = writeln!(s, "v {:?} {:?} {:?}", p[0], p[1], p[2]);
        }
        for f in self.faces() {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        s
    }

    pub fn from_obj(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut raw_faces = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let tokens: Vec<&str> = line.split('#').next().unwrap_or("").split_whitespace().collect();
            match tokens.first() {
                Some(&"v") => vertices.push(parse_floats(ln, &tokens[1..])?),
                Some(&"f") => {
                    if tokens.len() != 4 {
                        return Err(parse_err(ln, "non-triangle face"));
                    }
                    let mut f = [0usize; 3];
                    for (slot, t) in f.iter_mut().zip(&tokens[1..]) {
                        // Accept "i/t/n" forms; only the position index matters.
                        let idx: i64 = t.split('/').next().unwrap_or("").parse().map_err(|e| parse_err(ln, format!("{e}")))?;
                        if idx < 1 {
                            return Err(parse_err(ln, "index out of range"));
                        }
                        *slot = (idx - 1) as usize;
                    }
                    raw_faces.push((ln, f));
                }
                _ => {}
            }
        }
        let n = vertices.len();
        let mut faces = Vec::with_capacity(raw_faces.len());
        for (ln, f) in raw_faces {
            if f.iter().any(|&v| v >= n) {
                return Err(parse_err(ln, "index out of range"));
            }
            faces.push(f);
        }
        TriMesh::new(vertices, faces)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let format = MeshFormat::from_path(path)?;
        let text = std::fs::read_to_string(path)?;
        match format {
            MeshFormat::Off => Self::from_off(&text),
            MeshFormat::Obj => Self::from_obj(&text),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = match MeshFormat::from_path(path)? {
            MeshFormat::Off => self.to_off(),
            MeshFormat::Obj => self.to_obj(),
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}
