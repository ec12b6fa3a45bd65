//! Closed surfaces glued from geodesic hyperbolic triangles.
//!
//! A surface is pure combinatorics plus edge lengths: every triangle lists the
//! length of the side opposite each corner, and an involution pairs triangle
//! sides. Side `k` of a face runs from corner `k+1` to corner `k+2` (indices
//! mod 3), so all faces are oriented consistently and glued sides run in
//! opposite directions. Vertex ids are derived from the gluing.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeom::{self, HyperboloidPoint, TriangleLengths};
use crate::unionfind::UnionFind;

/// Tolerance on glued side lengths.
pub const GLUE_TOL: f64 = 1e-10;
/// Tolerance on cone angles and Gauss–Bonnet.
pub const ANGLE_TOL: f64 = 1e-8;

/// One side of one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SideRef {
    pub face: usize,
    pub side: usize,
}

impl SideRef {
    pub const fn new(face: usize, side: usize) -> Self {
        Self { face, side }
    }
}

pub type Gluing = [Option<SideRef>; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct TriangulatedSurface {
    faces: Vec<[usize; 3]>,
    lengths: Vec<[f64; 3]>,
    gluing: Vec<Gluing>,
    vertex_count: usize,
}

/// An edge of the mesh, identified by its canonical side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub side: SideRef,
    pub twin: Option<SideRef>,
    pub vertices: (usize, usize),
    pub length: f64,
}

impl TriangulatedSurface {
    /// Builds a (possibly bordered) surface from side lengths and a side pairing.
    /// `None` marks a boundary side.
    pub fn from_gluing(lengths: Vec<[f64; 3]>, gluing: Vec<Gluing>) -> Result<Self> {
        if lengths.len() != gluing.len() {
            return Err(Error::InvalidMesh("length and gluing tables differ in size".into()));
        }
        if lengths.is_empty() {
            return Err(Error::InvalidMesh("surface has no faces".into()));
        }
        let n = lengths.len();
        for (f, l) in lengths.iter().enumerate() {
            TriangleLengths::from_array(*l)
                .map_err(|e| Error::InvalidMesh(format!("face {f}: {e}")))?;
        }
        for f in 0..n {
            for k in 0..3 {
                let Some(t) = gluing[f][k] else { continue };
                if t.face >= n || t.side >= 3 {
                    return Err(Error::InvalidMesh(format!("side ({f},{k}) glued out of range")));
                }
                if t == SideRef::new(f, k) {
                    return Err(Error::InvalidMesh(format!("side ({f},{k}) glued to itself")));
                }
                if gluing[t.face][t.side] != Some(SideRef::new(f, k)) {
                    return Err(Error::InvalidMesh(format!("gluing is not an involution at ({f},{k})")));
                }
                let (a, b) = (lengths[f][k], lengths[t.face][t.side]);
                if (a - b).abs() > GLUE_TOL * a.max(1.0) {
                    return Err(Error::InvalidMesh(format!(
                        "glued sides ({f},{k}) and ({},{}) differ in length: {a} vs {b}",
                        t.face, t.side
                    )));
                }
            }
        }
        let (faces, vertex_count) = derive_vertices(&gluing);
        Ok(Self { faces, lengths, gluing, vertex_count })
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn lengths(&self) -> &[[f64; 3]] {
        &self.lengths
    }

    pub fn gluing(&self) -> &[Gluing] {
        &self.gluing
    }

    pub fn partner(&self, s: SideRef) -> Option<SideRef> {
        self.gluing[s.face][s.side]
    }

    pub fn side_length(&self, s: SideRef) -> f64 {
        self.lengths[s.face][s.side]
    }

    /// Start and end vertex of a side in its face's orientation.
    pub fn side_vertices(&self, s: SideRef) -> (usize, usize) {
        let f = &self.faces[s.face];
        (f[(s.side + 1) % 3], f[(s.side + 2) % 3])
    }

    pub fn triangle(&self, f: usize) -> TriangleLengths {
        TriangleLengths::from_array(self.lengths[f]).expect("validated at construction")
    }

    pub fn triangle_area(&self, f: usize) -> f64 {
        self.triangle(f).area().expect("validated at construction")
    }

    pub fn total_area(&self) -> f64 {
        (0..self.face_count()).map(|f| self.triangle_area(f)).sum()
    }

    pub fn is_closed(&self) -> bool {
        self.gluing.iter().all(|g| g.iter().all(Option::is_some))
    }

    pub fn boundary_sides(&self) -> Vec<SideRef> {
        let mut out = Vec::new();
        for (f, g) in self.gluing.iter().enumerate() {
            for k in 0..3 {
                if g[k].is_none() {
                    out.push(SideRef::new(f, k));
                }
            }
        }
        out
    }

    /// Unique edges in face/side order; the canonical side is the smaller of the pair.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(3 * self.face_count() / 2 + 1);
        for f in 0..self.face_count() {
            for k in 0..3 {
                let s = SideRef::new(f, k);
                let twin = self.partner(s);
                if twin.is_some_and(|t| t < s) {
                    continue;
                }
                out.push(Edge { side: s, twin, vertices: self.side_vertices(s), length: self.side_length(s) });
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        let glued: usize = self.gluing.iter().map(|g| g.iter().filter(|s| s.is_some()).count()).sum();
        let boundary = 3 * self.face_count() - glued;
        glued / 2 + boundary
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Genus from `χ = 2 − 2g − b`, where `b` counts boundary cycles.
    pub fn genus(&self) -> i64 {
        let b = self.boundary_cycles().len() as i64;
        (2 - self.euler_characteristic() - b) / 2
    }

    /// Sum of incident corner angles at every vertex.
    pub fn cone_angles(&self) -> Vec<f64> {
        let mut cone = vec![0.0; self.vertex_count];
        for (f, verts) in self.faces.iter().enumerate() {
            let angles = self.triangle(f).angles();
            for k in 0..3 {
                cone[verts[k]] += angles[k];
            }
        }
        cone
    }

    /// Boundary components as cycles of boundary sides, following side orientation.
    pub fn boundary_cycles(&self) -> Vec<Vec<SideRef>> {
        let sides = self.boundary_sides();
        let by_start: HashMap<usize, SideRef> =
            sides.iter().map(|&s| (self.side_vertices(s).0, s)).collect();
        let mut seen = HashSet::new();
        let mut cycles = Vec::new();
        for &s in &sides {
            if seen.contains(&s) {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = s;
            while seen.insert(cur) {
                cycle.push(cur);
                match by_start.get(&self.side_vertices(cur).1) {
                    Some(&next) => cur = next,
                    None => break,
                }
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// Number of face components once the listed sides (and their twins) are unglued.
    pub fn components_without(&self, cut: &HashSet<SideRef>) -> usize {
        let mut uf = UnionFind::new(self.face_count());
        for (f, g) in self.gluing.iter().enumerate() {
            for k in 0..3 {
                let s = SideRef::new(f, k);
                if let Some(t) = g[k] {
                    if !cut.contains(&s) && !cut.contains(&t) {
                        uf.union(f, t.face);
                    }
                }
            }
        }
        uf.component_count()
    }

    pub fn is_connected(&self) -> bool {
        self.components_without(&HashSet::new()) == 1
    }

    /// Checks every invariant of a closed hyperbolic surface.
    pub fn validate_closed(&self) -> Result<()> {
        if !self.is_closed() {
            return Err(Error::InvalidMesh("surface has boundary".into()));
        }
        if !self.is_connected() {
            return Err(Error::InvalidMesh("surface is disconnected".into()));
        }
        let chi = self.euler_characteristic();
        if chi % 2 != 0 {
            return Err(Error::InvalidMesh(format!("odd Euler characteristic {chi}")));
        }
        let g = self.genus();
        if g < 2 {
            return Err(Error::InvalidMesh(format!("genus {g} carries no hyperbolic metric")));
        }
        for (v, a) in self.cone_angles().iter().enumerate() {
            if (a - 2.0 * PI).abs() > ANGLE_TOL {
                return Err(Error::InvalidMesh(format!("cone angle {a} at vertex {v}")));
            }
        }
        let area = self.total_area();
        let expected = -2.0 * PI * chi as f64;
        if (area - expected).abs() > ANGLE_TOL {
            return Err(Error::InvalidMesh(format!("area {area} violates Gauss–Bonnet ({expected})")));
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn perturb_length(&mut self, face: usize, side: usize, delta: f64) {
        self.lengths[face][side] += delta;
    }

    /// Returns true when `self` equals `other` up to vertex relabeling.
    pub fn same_combinatorics(&self, other: &Self) -> bool {
        self.gluing == other.gluing && self.lengths == other.lengths
    }
}

/// Vertex ids from gluing: corners are identified across glued sides, classes
/// numbered by first appearance in face/corner order.
fn derive_vertices(gluing: &[Gluing]) -> (Vec<[usize; 3]>, usize) {
    let n = gluing.len();
    let mut uf = UnionFind::new(3 * n);
    for (f, g) in gluing.iter().enumerate() {
        for k in 0..3 {
            if let Some(t) = g[k] {
                uf.union(3 * f + (k + 1) % 3, 3 * t.face + (t.side + 2) % 3);
                uf.union(3 * f + (k + 2) % 3, 3 * t.face + (t.side + 1) % 3);
            }
        }
    }
    let (labels, count) = uf.labels();
    let faces = (0..n).map(|f| [labels[3 * f], labels[3 * f + 1], labels[3 * f + 2]]).collect();
    (faces, count)
}

/// A simple closed curve made of mesh edges. Each entry names the side whose
/// face lies to the curve's left.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshCurve {
    edges: Vec<SideRef>,
    vertices: Vec<usize>,
    length: f64,
    separating: bool,
}

impl MeshCurve {
    pub fn new(surface: &TriangulatedSurface, edges: Vec<SideRef>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::CurveNotEdgeAligned("empty curve".into()));
        }
        for s in &edges {
            if s.face >= surface.face_count() || s.side >= 3 {
                return Err(Error::CurveNotEdgeAligned(format!("side {s:?} does not exist")));
            }
        }
        let mut vertices = Vec::with_capacity(edges.len());
        for (i, s) in edges.iter().enumerate() {
            let (a, b) = surface.side_vertices(*s);
            let next = edges[(i + 1) % edges.len()];
            if surface.side_vertices(next).0 != b {
                return Err(Error::CurveNotEdgeAligned(format!(
                    "edge {i} ends at vertex {b} but edge {} does not start there",
                    (i + 1) % edges.len()
                )));
            }
            vertices.push(a);
        }
        let distinct: HashSet<usize> = vertices.iter().copied().collect();
        if distinct.len() != vertices.len() {
            return Err(Error::CurveNotEdgeAligned("curve revisits a vertex".into()));
        }
        let length = edges.iter().map(|s| surface.side_length(*s)).sum();
        let cut: HashSet<SideRef> = edges.iter().copied().collect();
        let separating = surface.components_without(&cut) > 1;
        Ok(Self { edges, vertices, length, separating })
    }

    pub fn edges(&self) -> &[SideRef] {
        &self.edges
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_separating(&self) -> bool {
        self.separating
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Fenchel–Nielsen data for the genus-2 surface glued from two pairs of pants
/// along all three cuffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FenchelNielsenSpec {
    pub cuffs: [f64; 3],
    /// Twist per cuff in units of the cuff vertex spacing `l/m`.
    pub twists: [i64; 3],
    /// Number of mesh edges along each cuff.
    pub subdivisions: usize,
}

impl Default for FenchelNielsenSpec {
    fn default() -> Self {
        Self { cuffs: [2.0, 2.0, 2.0], twists: [0; 3], subdivisions: 8 }
    }
}

impl FenchelNielsenSpec {
    pub fn validate(&self) -> Result<()> {
        for (c, l) in self.cuffs.iter().enumerate() {
            if !(l.is_finite() && *l > 0.0) {
                return Err(Error::InvalidInput(format!("cuff {c} has invalid length {l}")));
            }
        }
        if self.subdivisions < 4 || self.subdivisions % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "cuff subdivision must be even and at least 4, got {}",
                self.subdivisions
            )));
        }
        Ok(())
    }
}

/// Output of [`build_surface`].
#[derive(Debug, Clone)]
pub struct BuiltSurface {
    pub surface: TriangulatedSurface,
    /// Designated non-separating geodesic (cuff 0).
    pub gamma: MeshCurve,
    pub cuffs: [MeshCurve; 3],
    /// Twist actually applied on each cuff, in length units.
    pub applied_twists: [f64; 3],
    pub seam_lengths: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
enum HexSide {
    Cuff(usize),
    /// Seam opposite the given cuff.
    Seam(usize),
}

/// Glues two congruent pairs of pants along their three cuffs.
///
/// Each pair of pants is two mirror-image right-angled hexagons glued along
/// their seams. Every hexagon side is subdivided (`m/2` segments per half-cuff,
/// seams at a comparable spacing) and the hexagon is fanned from the normalized
/// sum of its corners in a hyperboloid chart.
pub fn build_surface(spec: &FenchelNielsenSpec) -> Result<BuiltSurface> {
    spec.validate()?;
    let m = spec.subdivisions;
    let half = m / 2;
    let l = spec.cuffs;

    let mut seam = [0.0; 3];
    for c in 0..3 {
        seam[c] = hypgeom::hexagon_opposite_side(0.5 * l[(c + 1) % 3], 0.5 * l[(c + 2) % 3], 0.5 * l[c])
            .map_err(|e| Error::DegenerateHexagon { cuff: c, reason: e.to_string() })?;
    }

    // counter-clockwise: half-cuff 0, seam(0,1), half-cuff 1, seam(1,2), half-cuff 2, seam(2,0)
    let kinds = [
        HexSide::Cuff(0),
        HexSide::Seam(2),
        HexSide::Cuff(1),
        HexSide::Seam(0),
        HexSide::Cuff(2),
        HexSide::Seam(1),
    ];
    let target = (l[0] + l[1] + l[2]) / (3.0 * m as f64);
    let side_len = |k: HexSide| match k {
        HexSide::Cuff(c) => 0.5 * l[c],
        HexSide::Seam(c) => seam[c],
    };
    let side_segments = |k: HexSide| match k {
        HexSide::Cuff(_) => half,
        HexSide::Seam(c) => ((seam[c] / target).round() as usize).max(1),
    };
    let lens: [f64; 6] = std::array::from_fn(|j| side_len(kinds[j]));
    let corners = hypgeom::right_angled_hexagon(lens);

    // boundary points and per-segment metadata
    let mut points: Vec<HyperboloidPoint> = Vec::new();
    let mut segment_len: Vec<f64> = Vec::new();
    let mut segment_cuff: Vec<usize> = Vec::new();
    let mut cuff_start = [0usize; 3];
    for (j, kind) in kinds.iter().enumerate() {
        let n = side_segments(*kind);
        if let HexSide::Cuff(c) = kind {
            cuff_start[*c] = points.len();
        }
        let (p, q) = (corners[j], corners[(j + 1) % 6]);
        for i in 0..n {
            points.push(if i == 0 { p } else { p.geodesic_toward(&q, i as f64 / n as f64) });
            segment_len.push(lens[j] / n as f64);
            segment_cuff.push(match kind {
                HexSide::Cuff(c) | HexSide::Seam(c) => *c,
            });
        }
    }
    let nb = points.len();
    let sum = corners.iter().fold([0.0; 3], |acc, p| {
        let a = p.as_array();
        [acc[0] + a[0], acc[1] + a[1], acc[2] + a[2]]
    });
    let center = HyperboloidPoint::normalized(sum);
    let spokes: Vec<f64> = points.iter().map(|p| center.distance(p)).collect();

    // lengths for the front fan (center, P_j, P_{j+1}) and its mirror (center, P_{j+1}, P_j)
    let mut front = Vec::with_capacity(nb);
    let mut back = Vec::with_capacity(nb);
    for j in 0..nb {
        let t = [segment_len[j], spokes[(j + 1) % nb], spokes[j]];
        TriangleLengths::from_array(t).map_err(|e| Error::DegenerateHexagon {
            cuff: segment_cuff[j],
            reason: e.to_string(),
        })?;
        front.push(t);
        back.push([segment_len[j], spokes[j], spokes[(j + 1) % nb]]);
    }

    let face = |pants: usize, hex: usize, j: usize| (2 * pants + hex) * nb + j;
    let mut lengths = Vec::with_capacity(4 * nb);
    for _pants in 0..2 {
        lengths.extend_from_slice(&front);
        lengths.extend_from_slice(&back);
    }
    let mut gluing: Vec<Gluing> = vec![[None; 3]; 4 * nb];
    let mut glue = |a: SideRef, b: SideRef| {
        gluing[a.face][a.side] = Some(b);
        gluing[b.face][b.side] = Some(a);
    };

    // (pants, cuff, position along the cuff as pants boundary) -> side 0 of a fan face
    let cuff_side = |pants: usize, c: usize, q: usize| -> SideRef {
        if q < half {
            SideRef::new(face(pants, 0, cuff_start[c] + q), 0)
        } else {
            SideRef::new(face(pants, 1, cuff_start[c] + (half - 1 - (q - half))), 0)
        }
    };

    for pants in 0..2 {
        for j in 0..nb {
            let jn = (j + 1) % nb;
            // fan spokes
            glue(SideRef::new(face(pants, 0, j), 1), SideRef::new(face(pants, 0, jn), 2));
            glue(SideRef::new(face(pants, 1, j), 2), SideRef::new(face(pants, 1, jn), 1));
        }
        for (j, kind) in boundary_kinds(&kinds, &side_segments).iter().enumerate() {
            if let HexSide::Seam(_) = kind {
                glue(SideRef::new(face(pants, 0, j), 0), SideRef::new(face(pants, 1, j), 0));
            }
        }
    }
    let mut applied_twists = [0.0; 3];
    for c in 0..3 {
        let tau = spec.twists[c].rem_euclid(m as i64) as usize;
        applied_twists[c] = spec.twists[c] as f64 * l[c] / m as f64;
        for q in 0..m {
            let partner = (tau + 2 * m - q - 1) % m;
            glue(cuff_side(0, c, q), cuff_side(1, c, partner));
        }
    }

    let surface = TriangulatedSurface::from_gluing(lengths, gluing)?;
    let cuffs: [MeshCurve; 3] = [0, 1, 2].map(|c| {
        MeshCurve::new(&surface, (0..m).map(|q| cuff_side(0, c, q)).collect())
            .expect("cuff is a simple cycle by construction")
    });
    Ok(BuiltSurface {
        surface,
        gamma: cuffs[0].clone(),
        cuffs,
        applied_twists,
        seam_lengths: seam,
    })
}

fn boundary_kinds(kinds: &[HexSide; 6], segments: &impl Fn(HexSide) -> usize) -> Vec<HexSide> {
    kinds.iter().flat_map(|k| std::iter::repeat_n(*k, segments(*k))).collect()
}

/// A surface cut open along a non-separating curve. `left[i]` and `right[i]`
/// were glued to each other before the cut; `left` sides border the faces that
/// were on the curve's left.
#[derive(Debug, Clone)]
pub struct CutSurface {
    pub surface: TriangulatedSurface,
    pub left: Vec<SideRef>,
    pub right: Vec<SideRef>,
}

pub fn cut_along(surface: &TriangulatedSurface, curve: &MeshCurve) -> Result<CutSurface> {
    let checked = MeshCurve::new(surface, curve.edges().to_vec())?;
    if checked.is_separating() {
        let cut: HashSet<SideRef> = checked.edges().iter().copied().collect();
        return Err(Error::SeparatingCurve { components: surface.components_without(&cut) });
    }
    let mut gluing = surface.gluing().to_vec();
    let mut right = Vec::with_capacity(checked.edge_count());
    for &s in checked.edges() {
        let t = surface
            .partner(s)
            .ok_or_else(|| Error::CurveNotEdgeAligned(format!("side {s:?} is already on the boundary")))?;
        gluing[s.face][s.side] = None;
        gluing[t.face][t.side] = None;
        right.push(t);
    }
    let open = TriangulatedSurface::from_gluing(surface.lengths().to_vec(), gluing)?;
    Ok(CutSurface { surface: open, left: checked.edges().to_vec(), right })
}

impl CutSurface {
    /// Glues the two boundary cycles back with the identity correspondence.
    pub fn reglue(&self) -> Result<TriangulatedSurface> {
        let mut gluing = self.surface.gluing().to_vec();
        for (l, r) in self.left.iter().zip(&self.right) {
            gluing[l.face][l.side] = Some(*r);
            gluing[r.face][r.side] = Some(*l);
        }
        TriangulatedSurface::from_gluing(self.surface.lengths().to_vec(), gluing)
    }
}

pub fn euler_characteristic(surface: &TriangulatedSurface) -> i64 {
    surface.euler_characteristic()
}

pub fn total_area(surface: &TriangulatedSurface) -> f64 {
    surface.total_area()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_surface() -> BuiltSurface {
        build_surface(&FenchelNielsenSpec::default()).unwrap()
    }

    #[test]
    fn default_surface_is_genus_two() {
        let b = default_surface();
        b.surface.validate_closed().unwrap();
        assert_eq!(b.surface.euler_characteristic(), -2);
        assert_eq!(b.surface.genus(), 2);
        assert!((b.surface.total_area() - 4.0 * PI).abs() < 1e-8);
        assert!((b.gamma.length() - 2.0).abs() < 1e-9);
        assert_eq!(b.gamma.edge_count(), 8);
        assert!(!b.gamma.is_separating());
    }

    /// Connectivity of the complement by flood fill over face adjacency.
    fn flood_components(s: &TriangulatedSurface, cut: &[SideRef]) -> usize {
        let blocked: HashSet<SideRef> =
            cut.iter().flat_map(|&c| [Some(c), s.partner(c)]).flatten().collect();
        let mut seen = vec![false; s.face_count()];
        let mut count = 0;
        for start in 0..s.face_count() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(f) = stack.pop() {
                for k in 0..3 {
                    let side = SideRef::new(f, k);
                    if blocked.contains(&side) {
                        continue;
                    }
                    if let Some(t) = s.partner(side) {
                        if !seen[t.face] {
                            seen[t.face] = true;
                            stack.push(t.face);
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn cuffs_are_non_separating() {
        let b = default_surface();
        for c in &b.cuffs {
            assert!(!c.is_separating());
            assert_eq!(flood_components(&b.surface, c.edges()), 1);
        }
    }

    #[test]
    fn contractible_cycle_separates() {
        let b = default_surface();
        let s = &b.surface;
        // link of the first hexagon center: the boundary of its fan
        let center = s.faces()[0][0];
        let fan: Vec<usize> = (0..s.face_count()).filter(|&f| s.faces()[f][0] == center).collect();
        let edges: Vec<SideRef> = fan.iter().map(|&f| SideRef::new(f, 0)).collect();
        let curve = MeshCurve::new(s, edges).unwrap();
        assert!(curve.is_separating());
        assert_eq!(flood_components(s, curve.edges()), 2);
        assert!(matches!(cut_along(s, &curve), Err(Error::SeparatingCurve { components: 2 })));
    }

    #[test]
    fn spec_grid_satisfies_invariants() {
        for &l in &[0.5, 1.0, 2.0, 3.0, 4.0] {
            for &m in &[4, 8, 16] {
                let spec = FenchelNielsenSpec { cuffs: [l, 0.5 + l / 2.0, 4.5 - l], twists: [1, 0, -2], subdivisions: m };
                let b = build_surface(&spec).unwrap();
                b.surface.validate_closed().unwrap();
                assert_eq!(b.surface.genus(), 2);
                for (c, curve) in b.cuffs.iter().enumerate() {
                    assert!((curve.length() - spec.cuffs[c]).abs() < 1e-9);
                    assert_eq!(curve.edge_count(), m);
                }
            }
        }
    }

    #[test]
    fn twist_changes_only_the_gluing() {
        let base = default_surface();
        let spec = FenchelNielsenSpec { twists: [3, -1, 5], ..Default::default() };
        let twisted = build_surface(&spec).unwrap();
        twisted.surface.validate_closed().unwrap();
        assert_ne!(base.surface.gluing(), twisted.surface.gluing());
        let areas = |s: &TriangulatedSurface| {
            let mut a: Vec<u64> = (0..s.face_count()).map(|f| s.triangle_area(f).to_bits()).collect();
            a.sort_unstable();
            a
        };
        assert_eq!(areas(&base.surface), areas(&twisted.surface));
        assert!((twisted.applied_twists[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = |spec: FenchelNielsenSpec| build_surface(&spec).is_err();
        assert!(bad(FenchelNielsenSpec { subdivisions: 2, ..Default::default() }));
        assert!(bad(FenchelNielsenSpec { subdivisions: 7, ..Default::default() }));
        assert!(bad(FenchelNielsenSpec { cuffs: [2.0, -1.0, 2.0], ..Default::default() }));
        assert!(bad(FenchelNielsenSpec { cuffs: [2.0, f64::INFINITY, 2.0], ..Default::default() }));
    }

    #[test]
    fn extreme_cuffs_report_degenerate_hexagon() {
        let spec = FenchelNielsenSpec { cuffs: [1e-9, 60.0, 60.0], twists: [0; 3], subdivisions: 4 };
        match build_surface(&spec) {
            Err(Error::DegenerateHexagon { .. }) | Err(Error::InvalidMesh(_)) => {}
            other => panic!("expected a degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn cut_and_reglue_round_trip() {
        let b = default_surface();
        let cut = cut_along(&b.surface, &b.gamma).unwrap();
        assert!(!cut.surface.is_closed());
        assert!(cut.surface.is_connected());
        assert_eq!(cut.surface.euler_characteristic(), -2);
        let cycles = cut.surface.boundary_cycles();
        assert_eq!(cycles.len(), 2);
        assert_eq!(cut.surface.genus(), 1);
        for cycle in &cycles {
            let total: f64 = cycle.iter().map(|s| cut.surface.side_length(*s)).sum();
            assert!((total - b.gamma.length()).abs() < 1e-12);
        }
        let back = cut.reglue().unwrap();
        assert!(back.same_combinatorics(&b.surface));
        assert_eq!(back.faces(), b.surface.faces());
    }

    #[test]
    fn broken_curves_rejected() {
        let b = default_surface();
        let mut edges = b.gamma.edges().to_vec();
        edges.swap(0, 2);
        assert!(matches!(MeshCurve::new(&b.surface, edges), Err(Error::CurveNotEdgeAligned(_))));
        assert!(MeshCurve::new(&b.surface, vec![]).is_err());
    }
}
