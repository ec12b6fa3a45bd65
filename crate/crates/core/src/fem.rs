//! P1 finite elements and geodesic mesh refinement.
//!
//! Element matrices are computed on the Euclidean triangle with the same edge
//! lengths. Stiffness uses cotangent weights, mass is scaled by the hyperbolic
//! area so that `𝟙ᵀB𝟙` is the exact surface area.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hypgeom::{euclidean_area, geodesic_midpoint, triangle_chart, TriangleLengths};
use crate::sparse::CsrMatrix;
use crate::surface::{Gluing, MeshCurve, SideRef, TriangulatedSurface};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassKind {
    #[default]
    Consistent,
    Lumped,
}

impl std::str::FromStr for MassKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "consistent" => Ok(Self::Consistent),
            "lumped" => Ok(Self::Lumped),
            other => Err(format!("unknown mass kind `{other}` (expected consistent or lumped)")),
        }
    }
}

/// Stiffness `K` and mass `B` over the vertex degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePencil {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub mass_kind: MassKind,
}

impl SparsePencil {
    pub fn dof(&self) -> usize {
        self.stiffness.dim()
    }

    /// `trace(K)/dof`, the reference magnitude for shifts and slack.
    pub fn scale(&self) -> f64 {
        let s = self.stiffness.trace() / self.dof() as f64;
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Same stiffness with the mass multiplied by `c`.
    pub fn with_scaled_mass(&self, c: f64) -> Self {
        Self { stiffness: self.stiffness.clone(), mass: self.mass.scaled(c), mass_kind: self.mass_kind }
    }

    /// Writes `K` and `B` as `<stem>_K.txt` and `<stem>_B.txt` in coordinate format.
    pub fn dump(&self, dir: &Path, stem: &str) -> std::io::Result<()> {
        for (tag, m) in [("K", &self.stiffness), ("B", &self.mass)] {
            let file = std::fs::File::create(dir.join(format!("{stem}_{tag}.txt")))?;
            let mut w = std::io::BufWriter::new(file);
            m.write_coordinate(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }
}

/// Element stiffness for a Euclidean triangle with the given side lengths
/// (`len[k]` opposite corner `k`): entry `(i, j)` of the local matrix.
pub fn element_stiffness(len: [f64; 3]) -> [[f64; 3]; 3] {
    let area4 = 4.0 * euclidean_area(len);
    let sq = len.map(|l| l * l);
    let mut cot = [0.0; 3];
    for k in 0..3 {
        cot[k] = (sq[(k + 1) % 3] + sq[(k + 2) % 3] - sq[k]) / area4;
    }
    let mut e = [[0.0; 3]; 3];
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let w = 0.5 * cot[k];
        e[i][j] = -w;
        e[j][i] = -w;
        e[i][i] += w;
        e[j][j] += w;
    }
    e
}

pub fn element_mass(area: f64, kind: MassKind) -> [[f64; 3]; 3] {
    match kind {
        MassKind::Consistent => {
            let (d, o) = (area / 6.0, area / 12.0);
            [[d, o, o], [o, d, o], [o, o, d]]
        }
        MassKind::Lumped => {
            let d = area / 3.0;
            [[d, 0.0, 0.0], [0.0, d, 0.0], [0.0, 0.0, d]]
        }
    }
}

pub fn assemble(surface: &TriangulatedSurface) -> Result<SparsePencil> {
    assemble_with(surface, MassKind::Consistent)
}

pub fn assemble_with(surface: &TriangulatedSurface, kind: MassKind) -> Result<SparsePencil> {
    let n = surface.vertex_count();
    let nf = surface.face_count();
    let mut kt = Vec::with_capacity(9 * nf);
    let mut bt = Vec::with_capacity(9 * nf);
    for f in 0..nf {
        let len = surface.lengths()[f];
        let area = TriangleLengths::from_array(len)?.area()?;
        let ke = element_stiffness(len);
        let be = element_mass(area, kind);
        let verts = surface.faces()[f];
        for a in 0..3 {
            for b in 0..3 {
                kt.push((verts[a], verts[b], ke[a][b]));
                if be[a][b] != 0.0 {
                    bt.push((verts[a], verts[b], be[a][b]));
                }
            }
        }
    }
    Ok(SparsePencil {
        stiffness: CsrMatrix::from_triplets(n, kt),
        mass: CsrMatrix::from_triplets(n, bt),
        mass_kind: kind,
    })
}

/// Splits every triangle into four through its side midpoints.
///
/// Face `4f+c` is the corner triangle at corner `c`, face `4f+3` the middle
/// one. Half-sides have exactly half the original length; the three interior
/// lengths are distances between midpoints in a hyperboloid chart of `f`.
pub fn refine(surface: &TriangulatedSurface) -> Result<TriangulatedSurface> {
    let nf = surface.face_count();
    let mut lengths = Vec::with_capacity(4 * nf);
    let mut gluing: Vec<Gluing> = vec![[None; 3]; 4 * nf];
    for f in 0..nf {
        let len = surface.lengths()[f];
        let chart = triangle_chart(&TriangleLengths::from_array(len)?);
        let mut mid = Vec::with_capacity(3);
        for k in 0..3 {
            mid.push(geodesic_midpoint(&chart[(k + 1) % 3], &chart[(k + 2) % 3])?);
        }
        // inner[k]: side of the middle triangle opposite midpoint k
        let inner: [f64; 3] = std::array::from_fn(|k| mid[(k + 1) % 3].distance(&mid[(k + 2) % 3]));
        for c in 0..3 {
            lengths.push([inner[c], 0.5 * len[(c + 1) % 3], 0.5 * len[(c + 2) % 3]]);
        }
        lengths.push(inner);
        for c in 0..3 {
            gluing[4 * f + c][0] = Some(SideRef::new(4 * f + 3, c));
            gluing[4 * f + 3][c] = Some(SideRef::new(4 * f + c, 0));
        }
        for k in 0..3 {
            if let Some(g) = surface.partner(SideRef::new(f, k)) {
                let [first, second] = split_side(SideRef::new(f, k));
                let [g_first, g_second] = split_side(g);
                gluing[first.face][first.side] = Some(g_second);
                gluing[second.face][second.side] = Some(g_first);
            }
        }
    }
    TriangulatedSurface::from_gluing(lengths, gluing)
}

/// The two halves of a side after [`refine`], in the side's orientation.
pub fn split_side(s: SideRef) -> [SideRef; 2] {
    [SideRef::new(4 * s.face + (s.side + 1) % 3, 2), SideRef::new(4 * s.face + (s.side + 2) % 3, 1)]
}

/// Image of a curve of `original` in `refine(original)`.
pub fn refine_curve(refined: &TriangulatedSurface, curve: &MeshCurve) -> Result<MeshCurve> {
    let edges = curve.edges().iter().flat_map(|&s| split_side(s)).collect();
    MeshCurve::new(refined, edges)
}

/// Applies [`refine`] `levels` times, carrying the curves along.
pub fn refine_levels(
    surface: &TriangulatedSurface,
    curves: &[MeshCurve],
    levels: usize,
) -> Result<(TriangulatedSurface, Vec<MeshCurve>)> {
    let mut s = surface.clone();
    let mut cs = curves.to_vec();
    for _ in 0..levels {
        let r = refine(&s)?;
        cs = cs.iter().map(|c| refine_curve(&r, c)).collect::<Result<_>>()?;
        s = r;
    }
    Ok((s, cs))
}

/// Largest triangle diameter, which for a geodesic triangle is its longest side.
pub fn max_edge_length(surface: &TriangulatedSurface) -> f64 {
    surface.lengths().iter().flatten().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::cyclic_cover;
    use crate::surface::{build_surface, FenchelNielsenSpec};
    use rand::{Rng, SeedableRng};

    fn base() -> crate::surface::BuiltSurface {
        build_surface(&FenchelNielsenSpec::default()).unwrap()
    }

    #[test]
    fn constants_are_in_the_kernel_and_mass_integrates_area() {
        let b = base();
        let (s, _) = refine_levels(&b.surface, &[], 1).unwrap();
        for kind in [MassKind::Consistent, MassKind::Lumped] {
            let p = assemble_with(&s, kind).unwrap();
            assert!(p.stiffness.is_symmetric() && p.mass.is_symmetric());
            let ones = vec![1.0; p.dof()];
            let k1 = p.stiffness.mul_vec(&ones);
            let scale = p.scale();
            assert!(k1.iter().all(|v| v.abs() <= 1e-12 * scale));
            assert!((p.mass.bilinear(&ones, &ones) - 4.0 * std::f64::consts::PI).abs() < 1e-8);
        }
    }

    #[test]
    fn stiffness_is_positive_semidefinite_on_random_vectors() {
        let p = assemble(&base().surface).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x: Vec<f64> = (0..p.dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(p.stiffness.bilinear(&x, &x) >= 0.0);
            assert!(p.mass.bilinear(&x, &x) > 0.0);
        }
    }

    #[test]
    fn equilateral_element_matches_hand_values() {
        // cot 60° = 1/√3
        let e = element_stiffness([1.0, 1.0, 1.0]);
        let w = 0.5 / 3f64.sqrt();
        assert!((e[0][1] + w).abs() < 1e-15);
        assert!((e[0][0] - 2.0 * w).abs() < 1e-15);
        // right isosceles: the hypotenuse weight vanishes
        let r = element_stiffness([2f64.sqrt(), 1.0, 1.0]);
        assert!(r[1][2].abs() < 1e-15);
        assert!((r[0][1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn refinement_preserves_topology_area_and_curves() {
        let b = base();
        let mut s = b.surface.clone();
        let mut g = b.gamma.clone();
        let mut diam = max_edge_length(&s);
        for _ in 0..3 {
            let r = refine(&s).unwrap();
            assert_eq!(r.face_count(), 4 * s.face_count());
            assert_eq!(r.euler_characteristic(), s.euler_characteristic());
            assert!((r.total_area() - s.total_area()).abs() < 1e-8);
            r.validate_closed().unwrap();
            let rg = refine_curve(&r, &g).unwrap();
            assert_eq!(rg.edge_count(), 2 * g.edge_count());
            assert!((rg.length() - 2.0).abs() < 1e-9);
            assert!(!rg.is_separating());
            let d = max_edge_length(&r);
            let ratio = diam / d;
            assert!((1.8..=2.2).contains(&ratio), "diameter ratio {ratio}");
            diam = d;
            s = r;
            g = rg;
        }
    }

    #[test]
    fn deck_shift_preserves_matrices_exactly() {
        let b = base();
        let cover = cyclic_cover(&b.surface, &b.gamma, 2, 2).unwrap();
        let p = assemble(cover.surface()).unwrap();
        let deck = cover.deck_vertices().unwrap();
        for m in [&p.stiffness, &p.mass] {
            for i in 0..m.dim() {
                for (j, v) in m.row(i) {
                    assert_eq!(m.get(deck[i], deck[j]).to_bits(), v.to_bits());
                }
            }
        }
    }

    #[test]
    fn assembly_is_reproducible() {
        let s = base().surface;
        assert_eq!(assemble(&s).unwrap(), assemble(&s).unwrap());
        let scaled = assemble(&s).unwrap().with_scaled_mass(2.0);
        assert_eq!(scaled.mass.get(0, 0), 2.0 * assemble(&s).unwrap().mass.get(0, 0));
    }
}
