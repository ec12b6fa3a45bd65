//! Test functions, Rayleigh quotients and the eigenvalue bound `C(η)(h+h²)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::cover::CoverSurface;
use crate::eigen::SpectrumResult;
use crate::error::{Error, Result};
use crate::fem::SparsePencil;
use crate::surface::{MeshCurve, TriangulatedSurface};

/// Largest ramp width allowed, keeping `sinh t < 1`.
pub const MAX_RAMP: f64 = 0.4;
/// Absolute slack on `λ_n ≤ bound`.
pub const BOUND_SLACK: f64 = 1e-6;
/// Slack on `λ_n ≤ certificate`, relative to the pencil scale.
pub const CERTIFICATE_SLACK: f64 = 1e-7;

/// Collar-lemma half-width `asinh(1/sinh(l/2))`.
pub fn collar_width(l: f64) -> f64 {
    (1.0 / (0.5 * l).sinh()).asinh()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source edge-path distances. With `allowed`, only edges of faces
/// flagged true are used; vertices not reached get `f64::INFINITY`.
pub fn distances(surface: &TriangulatedSurface, sources: &[usize], allowed: Option<&[bool]>) -> Vec<f64> {
    let n = surface.vertex_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (f, verts) in surface.faces().iter().enumerate() {
        if allowed.is_some_and(|a| !a[f]) {
            continue;
        }
        let len = surface.lengths()[f];
        for k in 0..3 {
            let (a, b) = (verts[(k + 1) % 3], verts[(k + 2) % 3]);
            adj[a].push((b, len[k]));
            adj[b].push((a, len[k]));
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    while let Some(HeapItem(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, l) in &adj[v] {
            let nd = d + l;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem(nd, w));
            }
        }
    }
    dist
}

/// Edge-path distance from the union of `curves` to every vertex.
pub fn distance_to_curves(surface: &TriangulatedSurface, curves: &[MeshCurve]) -> Result<Vec<f64>> {
    if curves.is_empty() {
        return Err(Error::InvalidInput("distance to an empty set of curves".into()));
    }
    let sources: Vec<usize> = curves.iter().flat_map(|c| c.vertices().iter().copied()).collect();
    Ok(distances(surface, &sources, None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarData {
    pub eta: f64,
    pub collar_lemma_width: f64,
    /// Smallest distance from each lift to any other lift.
    pub lift_clearance: Vec<f64>,
    pub t: f64,
    /// Largest distance from a piece vertex to the piece boundary, minimized over pieces.
    pub piece_inradius: f64,
    /// True when `t` had to be reduced to the piece inradius.
    pub t_shrunk: bool,
}

impl CollarData {
    pub fn measure(cover: &CoverSurface) -> Result<Self> {
        let s = cover.surface();
        let lifts = cover.lifts();
        let l = lifts[0].length();
        let collar_lemma_width = collar_width(l);
        let mut lift_clearance = Vec::with_capacity(lifts.len());
        for (i, lift) in lifts.iter().enumerate() {
            let d = distances(s, lift.vertices(), None);
            let clearance = lifts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, o)| o.vertices().iter().map(|&v| d[v]))
                .fold(f64::INFINITY, f64::min);
            lift_clearance.push(clearance);
        }
        let min_clearance = lift_clearance.iter().copied().fold(f64::INFINITY, f64::min);
        let eta = collar_lemma_width.min(0.5 * min_clearance);
        let mut piece_inradius = f64::INFINITY;
        for p in 0..cover.piece_count() {
            let d = piece_boundary_distance(cover, p);
            let r = piece_vertices(cover, p).into_iter().map(|v| d[v]).fold(0.0, f64::max);
            piece_inradius = piece_inradius.min(r);
        }
        let mut t = (0.5 * eta).min(MAX_RAMP);
        let t_shrunk = piece_inradius < t;
        if t_shrunk {
            t = piece_inradius;
        }
        if !(t > 0.0) {
            return Err(Error::InvalidMesh(format!("ramp width {t} is not positive")));
        }
        Ok(Self { eta, collar_lemma_width, lift_clearance, t, piece_inradius, t_shrunk })
    }
}

fn piece_mask(cover: &CoverSurface, piece: usize) -> Vec<bool> {
    cover.piece_of_face().iter().map(|&p| p == piece).collect()
}

fn piece_vertices(cover: &CoverSurface, piece: usize) -> Vec<usize> {
    let s = cover.surface();
    let mut seen = vec![false; s.vertex_count()];
    for f in cover.piece_faces(piece) {
        for &v in &s.faces()[f] {
            seen[v] = true;
        }
    }
    (0..seen.len()).filter(|&v| seen[v]).collect()
}

/// Distances inside a piece from both of its boundary lifts.
fn piece_boundary_distance(cover: &CoverSurface, piece: usize) -> Vec<f64> {
    let (a, b) = cover.piece_boundary(piece);
    let lifts = cover.lifts();
    let sources: Vec<usize> = lifts[a].vertices().iter().chain(lifts[b].vertices()).copied().collect();
    distances(cover.surface(), &sources, Some(&piece_mask(cover, piece)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunctionVariant {
    /// Ramps from both boundary lifts of the piece.
    #[default]
    Corrected,
    /// Ramps from the piece's own lift only and drops to zero on the other one.
    PaperLiteral,
}

impl std::str::FromStr for TestFunctionVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "paper-literal" => Ok(Self::PaperLiteral),
            other => Err(format!("unknown test function variant `{other}` (expected corrected or paper-literal)")),
        }
    }
}

/// One vertex function per piece: ramp of width `t`, plateau 1, zero outside.
pub fn build_test_functions(
    cover: &CoverSurface,
    collar: &CollarData,
    variant: TestFunctionVariant,
) -> Result<Vec<Vec<f64>>> {
    let s = cover.surface();
    let lifts = cover.lifts();
    let mut on_lift = vec![false; s.vertex_count()];
    for lift in lifts {
        for &v in lift.vertices() {
            on_lift[v] = true;
        }
    }
    let t = collar.t;
    let mut out = Vec::with_capacity(cover.piece_count());
    for p in 0..cover.piece_count() {
        let d = match variant {
            TestFunctionVariant::Corrected => piece_boundary_distance(cover, p),
            TestFunctionVariant::PaperLiteral => {
                let (_, own) = cover.piece_boundary(p);
                distances(s, lifts[own].vertices(), Some(&piece_mask(cover, p)))
            }
        };
        let mut f = vec![0.0; s.vertex_count()];
        for v in piece_vertices(cover, p) {
            if !on_lift[v] {
                f[v] = (d[v] / t).min(1.0);
            }
        }
        if f.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroNorm);
        }
        out.push(f);
    }
    Ok(out)
}

/// `fᵀKf / fᵀBf`.
pub fn rayleigh(pencil: &SparsePencil, f: &[f64]) -> Result<f64> {
    let den = pencil.mass.bilinear(f, f);
    if !(den > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(pencil.stiffness.bilinear(f, f) / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxCertificate {
    pub quotients: Vec<f64>,
    /// `max_i q_i`, an upper bound for `λ_k` with `k + 1` functions.
    pub value: f64,
}

/// Checks that no triangle carries two of the functions, confirms that every
/// cross term vanishes exactly, and returns the largest Rayleigh quotient.
pub fn minimax_certificate(
    surface: &TriangulatedSurface,
    pencil: &SparsePencil,
    functions: &[Vec<f64>],
) -> Result<MinimaxCertificate> {
    if functions.is_empty() {
        return Err(Error::InvalidInput("no test functions".into()));
    }
    for (face, verts) in surface.faces().iter().enumerate() {
        let mut owner: Option<usize> = None;
        for (i, f) in functions.iter().enumerate() {
            if verts.iter().any(|&v| f[v] != 0.0) {
                if let Some(j) = owner {
                    return Err(Error::SupportOverlap { face, i: j, j: i });
                }
                owner = Some(i);
            }
        }
    }
    for i in 0..functions.len() {
        for j in i + 1..functions.len() {
            let k = pencil.stiffness.bilinear(&functions[i], &functions[j]);
            let b = pencil.mass.bilinear(&functions[i], &functions[j]);
            if k != 0.0 || b != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "cross terms of functions {i} and {j} do not vanish: K {k:e}, B {b:e}"
                )));
            }
        }
    }
    let quotients = functions.iter().map(|f| rayleigh(pencil, f)).collect::<Result<Vec<_>>>()?;
    let value = quotients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MinimaxCertificate { quotients, value })
}

/// Total interface length over the smallest piece area, for any partition of
/// the faces into labelled pieces `0..k`.
pub fn compute_h_general(surface: &TriangulatedSurface, piece_of_face: &[usize], interface: &[MeshCurve]) -> Result<f64> {
    let k = piece_of_face.iter().copied().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(Error::InvalidInput("a partition needs at least two pieces".into()));
    }
    let mut area = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (f, &p) in piece_of_face.iter().enumerate() {
        area[p] += surface.triangle_area(f);
        count[p] += 1;
    }
    if let Some(p) = count.iter().position(|&c| c == 0) {
        return Err(Error::InvalidInput(format!("piece {p} is empty")));
    }
    let length: f64 = interface.iter().map(MeshCurve::length).sum();
    Ok(length / area.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Fraction of a triangle where the linear interpolant of `values` is at most `level`.
pub fn sublevel_fraction(values: [f64; 3], level: f64) -> f64 {
    let pts = [(0.0, 0.0, values[0]), (1.0, 0.0, values[1]), (0.0, 1.0, values[2])];
    let mut poly: Vec<(f64, f64)> = Vec::with_capacity(4);
    for i in 0..3 {
        let (x0, y0, v0) = pts[i];
        let (x1, y1, v1) = pts[(i + 1) % 3];
        if v0 <= level {
            poly.push((x0, y0));
        }
        if (v0 <= level) != (v1 <= level) {
            let s = (level - v0) / (v1 - v0);
            poly.push((x0 + s * (x1 - x0), y0 + s * (y1 - y0)));
        }
    }
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        twice += a.0 * b.1 - b.0 * a.1;
    }
    twice.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfCollarArea {
    pub lift: usize,
    pub piece: usize,
    pub area: f64,
}

/// Area of `{dist ≤ t}` on each side of each lift, measured inside the adjacent piece.
pub fn half_collar_areas(cover: &CoverSurface, t: f64) -> Vec<HalfCollarArea> {
    let s = cover.surface();
    let pieces = cover.piece_count();
    let mut out = Vec::new();
    for (lift, curve) in cover.lifts().iter().enumerate() {
        for piece in [lift, (lift + 1) % pieces] {
            let d = distances(s, curve.vertices(), Some(&piece_mask(cover, piece)));
            let area = cover
                .piece_faces(piece)
                .map(|f| {
                    let v = s.faces()[f].map(|v| d[v]);
                    sublevel_fraction(v, t) * s.triangle_area(f)
                })
                .sum();
            out.push(HalfCollarArea { lift, piece, area });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub step: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub d: usize,
    pub genus: i64,
    pub l_gamma: f64,
    pub area_base: f64,
    pub h: f64,
    pub eta: f64,
    pub t: f64,
    pub t_shrunk: bool,
    pub c_eta: f64,
    pub bound: f64,
    pub conservative_bound: f64,
    pub quotients: Vec<f64>,
    pub certificate: f64,
    pub lambda_n: f64,
    pub variant: TestFunctionVariant,
    pub bound_holds: bool,
    pub conservative_bound_holds: bool,
    pub certificate_holds: bool,
    pub paper_chain_assumptions_hold: bool,
    pub chain: Vec<ChainStep>,
    pub half_collar: Vec<HalfCollarArea>,
    /// `l(γ)·sinh(t)`, the reference half-collar area.
    pub half_collar_reference: f64,
    /// Total length `(n+1)·l(γ)` of the cutting multicurve.
    pub witness_length: f64,
}

/// Evaluates the bound and its certificate for a cover whose spectrum contains `λ_n`.
pub fn bound_report(
    cover: &CoverSurface,
    pencil: &SparsePencil,
    spectrum: &SpectrumResult,
    variant: TestFunctionVariant,
) -> Result<BoundReport> {
    let n = cover.n();
    let lambda_n = *spectrum
        .eigenvalues
        .get(n)
        .ok_or_else(|| Error::InvalidInput(format!("spectrum has no λ_{n}")))?;
    let collar = CollarData::measure(cover)?;
    let functions = build_test_functions(cover, &collar, variant)?;
    let cert = minimax_certificate(cover.surface(), pencil, &functions)?;

    let big_n = cover.copies_per_piece();
    let d = cover.degree();
    let l = cover.lifts()[0].length();
    let area_base = cover.base_area();
    let h = (n + 1) as f64 * l / (big_n as f64 * area_base);
    let t = collar.t;
    let eta = collar.eta;
    let c_eta = 2.0 / eta;
    let bound = c_eta * (h + h * h);
    let conservative_bound = 2.0 * bound;
    let half_collar = half_collar_areas(cover, t);
    let reference = l * t.sinh();

    let piece_area = big_n as f64 * area_base;
    let collar_area = half_collar.iter().map(|c| c.area).fold(0.0, f64::max);
    let m = (n + 1) as f64;
    let sh = t.sinh();
    let values = [
        ("max Rayleigh quotient", cert.value),
        ("measured half-collar ratio", collar_area / (t * t * (piece_area - collar_area))),
        ("l sinh t half-collar ratio", reference / (t * t * (piece_area - reference))),
        ("rewritten with h", h * piece_area * sh / (m * t * t * (piece_area - h * piece_area * sh / m))),
        ("area cancelled", h * sh / (m * t * t * (1.0 - h * sh / m))),
        ("factor 1/(n+1) dropped", h * sh / (t * t * (1.0 - sh))),
        ("sinh t replaced by t", h / (t * (1.0 - sh))),
        ("1/t replaced by 2/eta", 2.0 * h / (eta * (1.0 - sh))),
        ("1/(1 - sinh t) replaced by 1 + h", c_eta * h * (1.0 + h)),
    ];
    let chain: Vec<ChainStep> = values
        .windows(2)
        .map(|w| ChainStep {
            step: w[1].0.to_string(),
            lhs: w[0].1,
            rhs: w[1].1,
            holds: w[0].1 <= w[1].1 * (1.0 + 1e-12),
        })
        .collect();
    let paper_chain_assumptions_hold = chain.iter().all(|s| s.holds);

    Ok(BoundReport {
        n,
        big_n,
        d,
        genus: cover.surface().genus(),
        l_gamma: l,
        area_base,
        h,
        eta,
        t,
        t_shrunk: collar.t_shrunk,
        c_eta,
        bound,
        conservative_bound,
        quotients: cert.quotients,
        certificate: cert.value,
        lambda_n,
        variant,
        bound_holds: lambda_n <= bound + BOUND_SLACK,
        conservative_bound_holds: lambda_n <= conservative_bound + BOUND_SLACK,
        certificate_holds: lambda_n <= cert.value + CERTIFICATE_SLACK * pencil.scale(),
        paper_chain_assumptions_hold,
        chain,
        half_collar,
        half_collar_reference: reference,
        witness_length: m * l,
    })
}
