//! Cyclic covers along a non-separating curve.
//!
//! `d` copies of the base cut open along `γ` are arranged in a ring: the left
//! boundary of copy `k` is glued to the right boundary of copy `k+1 mod d`.
//! With `d = (n+1)·N`, pieces `A_1 … A_{n+1}` are blocks of `N` consecutive
//! copies, and lift `γ_i` is the seam between `A_i` and `A_{i+1}`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::surface::{cut_along, Gluing, MeshCurve, SideRef, TriangulatedSurface};

#[derive(Debug, Clone)]
pub struct CoverSurface {
    surface: TriangulatedSurface,
    degree: usize,
    base_faces: usize,
    n: usize,
    copies_per_piece: usize,
    lifts: Vec<MeshCurve>,
    piece_of_face: Vec<usize>,
    deck_faces: Vec<usize>,
}

/// Glues `degree` copies of `base` cut along `gamma` into a ring.
pub fn cyclic_cover_of_degree(
    base: &TriangulatedSurface,
    gamma: &MeshCurve,
    degree: usize,
) -> Result<TriangulatedSurface> {
    if degree == 0 {
        return Err(Error::InvalidInput("cover degree must be positive".into()));
    }
    let cut = cut_along(base, gamma)?;
    let f = base.face_count();
    let open = cut.surface.gluing();
    let mut lengths = Vec::with_capacity(degree * f);
    let mut gluing: Vec<Gluing> = Vec::with_capacity(degree * f);
    for copy in 0..degree {
        lengths.extend_from_slice(base.lengths());
        let offset = copy * f;
        gluing.extend(open.iter().map(|g| g.map(|s| s.map(|s| SideRef::new(s.face + offset, s.side)))));
    }
    for copy in 0..degree {
        let next = (copy + 1) % degree;
        for (l, r) in cut.left.iter().zip(&cut.right) {
            let a = SideRef::new(copy * f + l.face, l.side);
            let b = SideRef::new(next * f + r.face, r.side);
            gluing[a.face][a.side] = Some(b);
            gluing[b.face][b.side] = Some(a);
        }
    }
    TriangulatedSurface::from_gluing(lengths, gluing)
}

/// Degree-`(n+1)·N` cover with lifts `γ_1 … γ_{n+1}` and pieces `A_1 … A_{n+1}`.
pub fn cyclic_cover(
    base: &TriangulatedSurface,
    gamma: &MeshCurve,
    n: usize,
    copies_per_piece: usize,
) -> Result<CoverSurface> {
    if n == 0 || copies_per_piece == 0 {
        return Err(Error::InvalidInput(format!(
            "need n >= 1 and N >= 1, got n = {n}, N = {copies_per_piece}"
        )));
    }
    let degree = (n + 1) * copies_per_piece;
    let surface = cyclic_cover_of_degree(base, gamma, degree)?;
    let f = base.face_count();

    // γ_i sits at copy i·N: the left sides of copy i·N − 1.
    let lifts = (1..=n + 1)
        .map(|i| {
            let copy = (i * copies_per_piece + degree - 1) % degree;
            let edges = gamma.edges().iter().map(|s| SideRef::new(copy * f + s.face, s.side)).collect();
            MeshCurve::new(&surface, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    let piece_of_face = (0..degree * f).map(|face| (face / f) / copies_per_piece).collect();
    let deck_faces = (0..degree * f).map(|face| (face + f) % (degree * f)).collect();

    Ok(CoverSurface { surface, degree, base_faces: f, n, copies_per_piece, lifts, piece_of_face, deck_faces })
}

impl CoverSurface {
    pub fn surface(&self) -> &TriangulatedSurface {
        &self.surface
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `N`, the number of base copies per piece.
    pub fn copies_per_piece(&self) -> usize {
        self.copies_per_piece
    }

    pub fn piece_count(&self) -> usize {
        self.n + 1
    }

    pub fn base_face_count(&self) -> usize {
        self.base_faces
    }

    /// Lifts `γ_1 … γ_{n+1}` (0-based here).
    pub fn lifts(&self) -> &[MeshCurve] {
        &self.lifts
    }

    pub fn copy_of_face(&self, face: usize) -> usize {
        face / self.base_faces
    }

    /// 0-based piece index of every face.
    pub fn piece_of_face(&self) -> &[usize] {
        &self.piece_of_face
    }

    pub fn piece_faces(&self, piece: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.surface.face_count()).filter(move |&f| self.piece_of_face[f] == piece)
    }

    pub fn piece_area(&self, piece: usize) -> f64 {
        self.piece_faces(piece).map(|f| self.surface.triangle_area(f)).sum()
    }

    /// Lifts bounding piece `i` (0-based): `(γ_{i-1}, γ_i)` in 1-based terms.
    /// Area of one copy of the base, summed in base face order.
    pub fn base_area(&self) -> f64 {
        (0..self.base_faces).map(|f| self.surface.triangle_area(f)).sum()
    }

    pub fn piece_boundary(&self, piece: usize) -> (usize, usize) {
        let k = self.n + 1;
        ((piece + k - 1) % k, piece)
    }

    /// Face permutation of the deck generator (shift by one copy).
    pub fn deck_faces(&self) -> &[usize] {
        &self.deck_faces
    }

    /// Vertex permutation induced by the deck generator.
    pub fn deck_vertices(&self) -> Result<Vec<usize>> {
        let faces = self.surface.faces();
        let mut image = vec![usize::MAX; self.surface.vertex_count()];
        for (f, verts) in faces.iter().enumerate() {
            let target = faces[self.deck_faces[f]];
            for c in 0..3 {
                let v = verts[c];
                if image[v] == usize::MAX {
                    image[v] = target[c];
                } else if image[v] != target[c] {
                    return Err(Error::InvalidMesh(format!("deck map is not well defined at vertex {v}")));
                }
            }
        }
        let distinct: HashSet<usize> = image.iter().copied().collect();
        if distinct.len() != image.len() || distinct.contains(&usize::MAX) {
            return Err(Error::InvalidMesh("deck map on vertices is not a bijection".into()));
        }
        Ok(image)
    }

    /// Faces and gluing folded back onto copy 0.
    pub fn quotient(&self) -> Result<TriangulatedSurface> {
        let f = self.base_faces;
        let lengths = self.surface.lengths()[..f].to_vec();
        let gluing = self.surface.gluing()[..f]
            .iter()
            .map(|g| g.map(|s| s.map(|s| SideRef::new(s.face % f, s.side))))
            .collect();
        TriangulatedSurface::from_gluing(lengths, gluing)
    }
}

/// Outcome of [`verify_deck_symmetry`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeckCertificate {
    pub holds: bool,
    pub offending_face: Option<usize>,
    pub diagnostic: String,
}

impl DeckCertificate {
    fn fail(face: usize, diagnostic: String) -> Self {
        Self { holds: false, offending_face: Some(face), diagnostic }
    }
}

/// Checks that the copy shift is a length-preserving automorphism of order `d`.
pub fn verify_deck_symmetry(cover: &CoverSurface) -> DeckCertificate {
    let s = &cover.surface;
    let deck = &cover.deck_faces;
    for f in 0..s.face_count() {
        let g = deck[f];
        if s.lengths()[f] != s.lengths()[g] {
            return DeckCertificate::fail(f, format!("face {f} and its image {g} have different lengths"));
        }
        for k in 0..3 {
            let expected = s.partner(SideRef::new(f, k)).map(|t| SideRef::new(deck[t.face], t.side));
            if s.partner(SideRef::new(g, k)) != expected {
                return DeckCertificate::fail(f, format!("gluing of side ({f},{k}) is not deck-equivariant"));
            }
        }
        let mut h = f;
        for _ in 0..cover.degree {
            h = deck[h];
        }
        if h != f {
            return DeckCertificate::fail(f, format!("shift^{} moves face {f}", cover.degree));
        }
    }
    if let Err(e) = cover.deck_vertices() {
        return DeckCertificate { holds: false, offending_face: None, diagnostic: e.to_string() };
    }
    DeckCertificate { holds: true, offending_face: None, diagnostic: "ok".into() }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::surface::{build_surface, FenchelNielsenSpec};

    fn base() -> crate::surface::BuiltSurface {
        build_surface(&FenchelNielsenSpec::default()).unwrap()
    }

    #[test]
    fn degree_one_cover_is_the_base() {
        let b = base();
        let cover = cyclic_cover_of_degree(&b.surface, &b.gamma, 1).unwrap();
        assert!(cover.same_combinatorics(&b.surface));
        assert_eq!(cover.faces(), b.surface.faces());
        assert!(cyclic_cover_of_degree(&b.surface, &b.gamma, 0).is_err());
    }

    #[test]
    fn six_fold_cover_has_genus_seven() {
        let b = base();
        let cover = cyclic_cover(&b.surface, &b.gamma, 2, 2).unwrap();
        let s = cover.surface();
        s.validate_closed().unwrap();
        assert_eq!(cover.degree(), 6);
        assert_eq!(s.euler_characteristic(), -12);
        assert_eq!(s.genus(), 7);
        assert!((s.total_area() - 24.0 * PI).abs() < 1e-8);
        for i in 0..3 {
            assert!((cover.piece_area(i) - 8.0 * PI).abs() < 1e-8);
        }
        for lift in cover.lifts() {
            assert!((lift.length() - 2.0).abs() < 1e-9);
            assert!(!lift.is_separating());
        }
    }

    #[test]
    fn pieces_meet_exactly_along_lifts() {
        let b = base();
        for (n, big_n) in [(1, 1), (2, 2), (3, 1), (2, 3)] {
            let cover = cyclic_cover(&b.surface, &b.gamma, n, big_n).unwrap();
            let s = cover.surface();
            let pieces = cover.piece_of_face();
            let lift_sides: HashSet<SideRef> = cover
                .lifts()
                .iter()
                .flat_map(|c| c.edges().iter().flat_map(|&e| [e, s.partner(e).unwrap()]))
                .collect();
            for f in 0..s.face_count() {
                for k in 0..3 {
                    let side = SideRef::new(f, k);
                    let t = s.partner(side).unwrap();
                    let crosses = pieces[f] != pieces[t.face];
                    assert_eq!(crosses, lift_sides.contains(&side));
                    if crosses {
                        let k1 = n + 1;
                        let (a, b) = (pieces[f], pieces[t.face]);
                        assert!((a + 1) % k1 == b || (b + 1) % k1 == a, "non-adjacent pieces touch");
                    }
                }
            }
            // lift i lies between piece i (left) and piece i+1 (right)
            for (i, lift) in cover.lifts().iter().enumerate() {
                for e in lift.edges() {
                    assert_eq!(pieces[e.face], i);
                    assert_eq!(pieces[s.partner(*e).unwrap().face], (i + 1) % (n + 1));
                }
            }
            // equal pieces: identical triangle multisets
            let multiset = |p: usize| {
                let mut v: Vec<u64> = cover.piece_faces(p).map(|f| s.triangle_area(f).to_bits()).collect();
                v.sort_unstable();
                v
            };
            for p in 1..=n {
                assert_eq!(multiset(0), multiset(p));
            }
            assert!(s.is_connected());
            assert_eq!(s.euler_characteristic(), cover.degree() as i64 * -2);
        }
    }

    #[test]
    fn deck_symmetry_certificate() {
        let b = base();
        let cover = cyclic_cover(&b.surface, &b.gamma, 2, 2).unwrap();
        assert!(verify_deck_symmetry(&cover).holds);
        let perm = cover.deck_vertices().unwrap();
        let mut v = 0;
        for _ in 0..6 {
            v = perm[v];
        }
        assert_eq!(v, 0);

        let mut broken = cover.clone();
        broken.surface.perturb_length(17, 1, 1e-13);
        let cert = verify_deck_symmetry(&broken);
        assert!(!cert.holds);
        assert!(matches!(cert.offending_face, Some(f) if f == 17 || broken.deck_faces[f] == 17));
    }

    #[test]
    fn degree_one_deck_is_trivial() {
        let b = base();
        let s = cyclic_cover_of_degree(&b.surface, &b.gamma, 1).unwrap();
        let cover = CoverSurface {
            surface: s,
            degree: 1,
            base_faces: b.surface.face_count(),
            n: 0,
            copies_per_piece: 1,
            lifts: vec![],
            piece_of_face: vec![0; b.surface.face_count()],
            deck_faces: (0..b.surface.face_count()).collect(),
        };
        assert!(verify_deck_symmetry(&cover).holds);
    }

    #[test]
    fn quotient_recovers_base() {
        let b = base();
        for (n, big_n) in [(1, 1), (2, 1), (1, 2), (2, 2), (5, 1)] {
            let cover = cyclic_cover(&b.surface, &b.gamma, n, big_n).unwrap();
            let q = cover.quotient().unwrap();
            assert!(q.same_combinatorics(&b.surface));
        }
    }

    #[test]
    fn separating_curve_rejected() {
        let b = base();
        let s = &b.surface;
        let center = s.faces()[0][0];
        let edges: Vec<SideRef> =
            (0..s.face_count()).filter(|&f| s.faces()[f][0] == center).map(|f| SideRef::new(f, 0)).collect();
        let curve = MeshCurve::new(s, edges).unwrap();
        assert!(matches!(cyclic_cover(s, &curve, 1, 1), Err(Error::SeparatingCurve { .. })));
        assert!(cyclic_cover(s, &b.gamma, 0, 1).is_err());
    }
}
