//! Plain-text `HYPMESH 1` mesh format.
//!
//! ```text
//! HYPMESH 1
//! F <face-count> G <genus>
//! # free-form comment lines
//! v0 v1 v2 len0 len1 len2        (one line per face)
//! f1 side1 f2 side2              (one line per glued pair)
//! CURVE <name> <edge-count>      (then one `face side` line per edge)
//! DECK <degree>                  (then one line per face: image under the deck shift)
//! PIECE <index> <face-count>     (then one line of face indices)
//! LIFT <index> <edge-count>      (then one `face side` line per edge)
//! ```
//!
//! Lengths are written with 17 significant digits, so a written mesh parses
//! back to identical lengths.

use std::io::{BufRead, Write};

use crate::cover::CoverSurface;
use crate::error::{Error, Result};
use crate::surface::{Gluing, MeshCurve, SideRef, TriangulatedSurface};

pub const MAGIC: &str = "HYPMESH 1";

/// Contents of a parsed file.
#[derive(Debug, Clone)]
pub struct HypMesh {
    pub surface: TriangulatedSurface,
    pub comments: Vec<String>,
    pub curves: Vec<(String, MeshCurve)>,
    pub deck: Option<(usize, Vec<usize>)>,
    pub pieces: Vec<Vec<usize>>,
    pub lifts: Vec<MeshCurve>,
}

pub fn write_surface<W: Write>(
    w: &mut W,
    surface: &TriangulatedSurface,
    comments: &[String],
    curves: &[(&str, &MeshCurve)],
) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "F {} G {}", surface.face_count(), surface.genus())?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    for (verts, len) in surface.faces().iter().zip(surface.lengths()) {
        writeln!(w, "{} {} {} {:.16e} {:.16e} {:.16e}", verts[0], verts[1], verts[2], len[0], len[1], len[2])?;
    }
    for e in surface.edges() {
        if let Some(t) = e.twin {
            writeln!(w, "{} {} {} {}", e.side.face, e.side.side, t.face, t.side)?;
        }
    }
    for (name, curve) in curves {
        writeln!(w, "CURVE {name} {}", curve.edge_count())?;
        write_sides(w, curve.edges())?;
    }
    Ok(())
}

pub fn write_cover<W: Write>(w: &mut W, cover: &CoverSurface, comments: &[String]) -> std::io::Result<()> {
    write_surface(w, cover.surface(), comments, &[])?;
    writeln!(w, "DECK {}", cover.degree())?;
    for image in cover.deck_faces() {
        writeln!(w, "{image}")?;
    }
    for p in 0..cover.piece_count() {
        let faces: Vec<String> = cover.piece_faces(p).map(|f| f.to_string()).collect();
        writeln!(w, "PIECE {} {}", p + 1, faces.len())?;
        writeln!(w, "{}", faces.join(" "))?;
    }
    for (i, lift) in cover.lifts().iter().enumerate() {
        writeln!(w, "LIFT {} {}", i + 1, lift.edge_count())?;
        write_sides(w, lift.edges())?;
    }
    Ok(())
}

fn write_sides<W: Write>(w: &mut W, sides: &[SideRef]) -> std::io::Result<()> {
    for s in sides {
        writeln!(w, "{} {}", s.face, s.side)?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-comment line, with its line number.
    fn next(&mut self, comments: &mut Vec<String>) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.number += 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(c) = trimmed.strip_prefix('#') {
                comments.push(c.trim().to_string());
                continue;
            }
            return Ok(Some((self.number, trimmed.to_string())));
        }
        Ok(None)
    }

    fn expect(&mut self, comments: &mut Vec<String>, what: &str) -> Result<(usize, String)> {
        self.next(comments)?.ok_or_else(|| Error::Parse { line: self.number, message: format!("expected {what}, found end of file") })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn fields<T: std::str::FromStr>(line: usize, text: &str, count: usize) -> Result<Vec<T>> {
    let out: Vec<T> = text
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("cannot parse `{t}`"))))
        .collect::<Result<_>>()?;
    if out.len() != count {
        return Err(parse_err(line, format!("expected {count} fields, found {}", out.len())));
    }
    Ok(out)
}

fn read_sides<R: BufRead>(lines: &mut Lines<R>, comments: &mut Vec<String>, count: usize) -> Result<Vec<SideRef>> {
    (0..count)
        .map(|_| {
            let (no, text) = lines.expect(comments, "`face side`")?;
            let v: Vec<usize> = fields(no, &text, 2)?;
            Ok(SideRef::new(v[0], v[1]))
        })
        .collect()
}

pub fn parse<R: BufRead>(reader: R) -> Result<HypMesh> {
    let mut lines = Lines { inner: reader.lines(), number: 0 };
    let mut comments = Vec::new();
    let (no, magic) = lines.expect(&mut comments, "header")?;
    if magic != MAGIC {
        return Err(parse_err(no, format!("expected `{MAGIC}`, found `{magic}`")));
    }
    let (no, counts) = lines.expect(&mut comments, "`F <count> G <genus>`")?;
    let parts: Vec<&str> = counts.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "F" || parts[2] != "G" {
        return Err(parse_err(no, "expected `F <count> G <genus>`"));
    }
    let nf: usize = parts[1].parse().map_err(|_| parse_err(no, "bad face count"))?;
    let genus: i64 = parts[3].parse().map_err(|_| parse_err(no, "bad genus"))?;

    let mut faces = Vec::with_capacity(nf);
    let mut lengths = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (no, text) = lines.expect(&mut comments, "face line")?;
        let t: Vec<&str> = text.split_whitespace().collect();
        if t.len() != 6 {
            return Err(parse_err(no, format!("expected 6 fields, found {}", t.len())));
        }
        let v: Vec<usize> = fields(no, &t[..3].join(" "), 3)?;
        let l: Vec<f64> = fields(no, &t[3..].join(" "), 3)?;
        faces.push([v[0], v[1], v[2]]);
        lengths.push([l[0], l[1], l[2]]);
    }

    let mut gluing: Vec<Gluing> = vec![[None; 3]; nf];
    let mut pending = None;
    while let Some((no, text)) = lines.next(&mut comments)? {
        if text.starts_with(|c: char| c.is_ascii_alphabetic()) {
            pending = Some((no, text));
            break;
        }
        let v: Vec<usize> = fields(no, &text, 4)?;
        let (a, b) = (SideRef::new(v[0], v[1]), SideRef::new(v[2], v[3]));
        for s in [a, b] {
            if s.face >= nf || s.side >= 3 {
                return Err(parse_err(no, format!("side {} {} out of range", s.face, s.side)));
            }
            if gluing[s.face][s.side].is_some() {
                return Err(parse_err(no, format!("side {} {} glued twice", s.face, s.side)));
            }
        }
        gluing[a.face][a.side] = Some(b);
        gluing[b.face][b.side] = Some(a);
    }
    let surface = TriangulatedSurface::from_gluing(lengths, gluing)?;
    if surface.faces() != faces.as_slice() {
        return Err(Error::InvalidMesh("vertex labels do not match the gluing".into()));
    }
    if surface.genus() != genus {
        return Err(Error::InvalidMesh(format!("header genus {genus} but mesh has genus {}", surface.genus())));
    }

    let mut mesh = HypMesh { surface, comments: Vec::new(), curves: Vec::new(), deck: None, pieces: Vec::new(), lifts: Vec::new() };
    loop {
        let next = match pending.take() {
            Some(x) => Some(x),
            None => lines.next(&mut comments)?,
        };
        let Some((no, text)) = next else { break };
        let t: Vec<&str> = text.split_whitespace().collect();
        let count = |i: usize| -> Result<usize> {
            t.get(i).and_then(|x| x.parse().ok()).ok_or_else(|| parse_err(no, format!("bad block header `{text}`")))
        };
        match t[0] {
            "CURVE" if t.len() == 3 => {
                let sides = read_sides(&mut lines, &mut comments, count(2)?)?;
                mesh.curves.push((t[1].to_string(), MeshCurve::new(&mesh.surface, sides)?));
            }
            "LIFT" if t.len() == 3 => {
                let sides = read_sides(&mut lines, &mut comments, count(2)?)?;
                mesh.lifts.push(MeshCurve::new(&mesh.surface, sides)?);
            }
            "DECK" if t.len() == 2 => {
                let d = count(1)?;
                let mut images = Vec::with_capacity(nf);
                for _ in 0..nf {
                    let (no, text) = lines.expect(&mut comments, "deck image")?;
                    images.push(fields::<usize>(no, &text, 1)?[0]);
                }
                mesh.deck = Some((d, images));
            }
            "PIECE" if t.len() == 3 => {
                let k = count(2)?;
                let (no, text) = lines.expect(&mut comments, "piece faces")?;
                mesh.pieces.push(fields(no, &text, k)?);
            }
            _ => return Err(parse_err(no, format!("unknown block `{text}`"))),
        }
    }
    mesh.comments = comments;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::cyclic_cover;
    use crate::surface::{build_surface, FenchelNielsenSpec};

    #[test]
    fn surface_round_trip_is_exact() {
        let b = build_surface(&FenchelNielsenSpec::default()).unwrap();
        let mut buf = Vec::new();
        write_surface(&mut buf, &b.surface, &["area 12.566".into()], &[("gamma", &b.gamma)]).unwrap();
        let m = parse(buf.as_slice()).unwrap();
        assert!(m.surface.same_combinatorics(&b.surface));
        assert_eq!(m.surface.lengths(), b.surface.lengths());
        assert_eq!(m.comments, vec!["area 12.566".to_string()]);
        assert_eq!(m.curves[0].1, b.gamma);
        let mut again = Vec::new();
        write_surface(&mut again, &m.surface, &m.comments, &[("gamma", &m.curves[0].1)]).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn cover_blocks_round_trip() {
        let b = build_surface(&FenchelNielsenSpec::default()).unwrap();
        let c = cyclic_cover(&b.surface, &b.gamma, 2, 2).unwrap();
        let mut buf = Vec::new();
        write_cover(&mut buf, &c, &[]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\nDECK 6\n"));
        let m = parse(buf.as_slice()).unwrap();
        assert_eq!(m.deck.as_ref().unwrap().1, c.deck_faces());
        assert_eq!(m.pieces.len(), 3);
        assert_eq!(m.lifts.as_slice(), c.lifts());
        assert_eq!(m.surface.genus(), 7);
    }

    #[test]
    fn malformed_input_reports_line() {
        let cases = [
            ("HYPMESH 2\n", 1),
            ("HYPMESH 1\nF x G 2\n", 2),
            ("HYPMESH 1\nF 1 G 2\n0 1 2 1.0 1.0\n", 3),
        ];
        for (text, line) in cases {
            match parse(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }
}
