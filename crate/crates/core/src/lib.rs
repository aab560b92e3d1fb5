//! Multicomplex filled-in Julia sets.
//!
//! Arithmetic over `MC(n)`, escape-time iteration of `ζ^p + c`, the
//! classification of principal 3D slices, and a voxel renderer.

pub mod bench;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod multicomplex;
pub mod renderer;
pub mod slices;
pub mod units;
pub mod verify;

pub use dynamics::{
    escape_radius, escape_time, is_member, iterate_once, membership_via_decomposition, orbit,
    DynamicsParams, EscapeKernel, EscapeResult, DEFAULT_MAX_ITER, MAX_ITER_LIMIT,
};
pub use error::{Error, Result};
pub use multicomplex::{IdempotentSplit, Multicomplex};
pub use slices::{
    build_phi, class_count, classify, classify_multicomplex, escape_equivalence_check,
    iterate_space, iterate_span_check, IterateSpace, IterateSpaceKind, PhiMap, SliceCase,
    SliceClass, SliceTriple,
};
pub use units::{
    enumerate_units, unit_nature, unit_product, unit_square_sign, Sign, SignedUnit, UnitMask,
    UnitNature, MAX_ORDER,
};
pub use renderer::{
    export_grid, read_mcvox, render_slice, render_slice_with, write_mcvox, write_pgm_stack, write_ply,
    ExportFormat, GridMeta, GridSpec, RenderOptions, VoxelGrid, BOUNDED_CODE,
};
pub use verify::{run_suite, Suite, VerificationReport, DEFAULT_SEED};
