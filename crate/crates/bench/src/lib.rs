//! Fixtures shared by the benchmarks.

use catafind_core::scenarios::Branch;
use catafind_core::{make_reaction_diffusion, Point, RdKind, RdReference, SolveOptions, VectorField};

pub fn rd_fixed(k1: f64, k2: f64) -> VectorField {
    make_reaction_diffusion()
        .fix_params(&[("k1".into(), k1), ("k2".into(), k2)])
        .expect("rd declares k1 and k2")
}

/// Seed box that holds both butterflies for moderate k.
pub fn butterfly_options() -> SolveOptions {
    SolveOptions {
        seed_box: vec![(-1.0, 1.0), (-1.0, 1.0), (-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5)],
        ..SolveOptions::default()
    }
}

/// Butterfly point of [`rd_fixed`] with parameters `(b, d, a, g)`.
pub fn butterfly_point(k1: f64, k2: f64) -> Point {
    let p = RdReference::new(k1, k2)
        .and_then(|rd| rd.point(RdKind::Butterfly { branch: Branch::Plus }))
        .expect("positive k");
    Point::new(p.x, p.alpha[..4].to_vec())
}
