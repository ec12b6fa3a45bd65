//! Benchmark fixtures.

use smalleig_core::fem::refine_levels;
use smalleig_core::{build_surface, cyclic_cover, CoverSurface, FenchelNielsenSpec, MeshCurve, TriangulatedSurface};

/// Default base surface refined `levels` times, with its designated curve.
pub fn base(levels: usize) -> (TriangulatedSurface, MeshCurve) {
    let built = build_surface(&FenchelNielsenSpec::default()).expect("default spec is valid");
    let (s, mut c) = refine_levels(&built.surface, &[built.gamma], levels).expect("refinement succeeds");
    (s, c.remove(0))
}

pub fn cover(levels: usize, n: usize, big_n: usize) -> CoverSurface {
    let (s, g) = base(levels);
    cyclic_cover(&s, &g, n, big_n).expect("cuff is non-separating")
}
