//! Constructions on loops of non-degenerate curves: the model twist,
//! telephone wires, cut-and-insert, the concatenation family and its slide
//! homotopy, and mollification of broken curves.

mod fixtures;
mod mollify;
mod twist;
mod wire;

pub use fixtures::{geodesic_segment, jump_fixture, circle_loop};
pub use mollify::{blend_profile, mollify, MollifyReport, MOLLIFY_INTERVALS_PER_UNIT};
pub use twist::{exponentiate_loop, make_twist, scale_into_manifold, smooth_step, Twist};
pub use wire::{
    asymptotic_table, conc_family, cut_insert, find_manifold_wire_n, find_wire_n, frame_c0_distance,
    manifold_wire, matrix_wire, rotation_loop, slide_homotopy, twist_basis, AsymptoticRow, FrameMatching,
    ManifoldWire, ManifoldWireReport, WireReport, WireSearch,
};

use crate::spline::BSpline;

/// Number of nonempty knot spans of a spline.
pub(crate) fn spans(s: &BSpline) -> usize {
    s.knots().windows(2).filter(|w| w[1] > w[0]).count()
}
