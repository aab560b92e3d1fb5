use std::path::Path;

use mcjulia::renderer::*;
use mcjulia::slices::{build_phi, class_members};
use mcjulia::{DynamicsParams, EscapeResult, SliceTriple, UnitMask};

fn triple(units: [UnitMask; 3]) -> SliceTriple {
    SliceTriple::new(3, units).unwrap()
}

fn one_i1_i2() -> SliceTriple {
    triple([UnitMask::ONE, UnitMask::I1, UnitMask::I2])
}

fn render(t: &SliceTriple, p: u32, c: f64, n_iter: u32, dim: usize, workers: usize) -> VoxelGrid {
    let params = DynamicsParams::real(t.order(), p, c, n_iter).unwrap();
    let spec = GridSpec::cube(dim, params.escape_radius()).unwrap();
    let opts = RenderOptions {
        workers: Some(workers),
        ..Default::default()
    };
    render_slice_with(t, &params, &spec, &opts).unwrap()
}

#[test]
fn single_voxel_at_the_origin_is_bounded() {
    let params = DynamicsParams::real(3, 2, 0.0, 100).unwrap();
    let spec = GridSpec::cube(1, 2.0).unwrap();
    let g = render_slice(&one_i1_i2(), &params, &spec).unwrap();
    assert_eq!(g.codes(), &[BOUNDED_CODE]);
    let bytes = encode_mcvox(&g).unwrap();
    // header: magic+version, n, p, N, 8 coefficients, masks, dims, bounds
    let header = 8 + 1 + 1 + 2 + 8 * 8 + 3 + 3 * 4 + 6 * 8;
    assert_eq!(bytes.len(), header + 2);
    assert_eq!(&bytes[header..], &[0xFF, 0xFF]);
}

#[test]
fn corner_escapes_immediately() {
    let params = DynamicsParams::real(3, 2, 0.0, 100).unwrap();
    let spec = GridSpec::cube(3, 2.0).unwrap();
    let g = render_slice(&one_i1_i2(), &params, &spec).unwrap();
    assert_eq!(g.get(2, 2, 2), EscapeResult::Escaped(1));
    assert_eq!(g.get(1, 1, 1), EscapeResult::Bounded);
}

#[test]
fn codes_do_not_depend_on_worker_count() {
    let t = one_i1_i2();
    let a = render(&t, 2, 0.25, 100, 33, 1);
    for w in [2, 8] {
        assert_eq!(render(&t, 2, 0.25, 100, 33, w), a);
    }
    let t = triple([UnitMask::J1, UnitMask::J3, UnitMask::I4]);
    assert_eq!(render(&t, 3, 0.25, 60, 17, 1), render(&t, 3, 0.25, 60, 17, 8));
}

#[test]
fn mirror_symmetry_in_imaginary_axes() {
    for t in [one_i1_i2(), triple([UnitMask::I1, UnitMask::I2, UnitMask::I3])] {
        let g = render(&t, 2, 0.25, 100, 31, 4);
        let n = 31;
        let mut bounded = 0;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let c = g.code(i, j, k);
                    assert_eq!(c, g.code(i, n - 1 - j, k));
                    assert_eq!(c, g.code(i, j, n - 1 - k));
                    bounded += usize::from(c == BOUNDED_CODE);
                }
            }
        }
        assert!(bounded > 0, "{t} is empty");
    }
}

#[test]
fn more_iterations_only_remove_members() {
    let t = one_i1_i2();
    let params100 = DynamicsParams::real(3, 2, 0.25, 100).unwrap();
    let params200 = params100.with_max_iter(200).unwrap();
    let spec = GridSpec::cube(25, params100.escape_radius()).unwrap();
    let g100 = render_slice(&t, &params100, &spec).unwrap();
    let g200 = render_slice(&t, &params200, &spec).unwrap();
    for (a, b) in g100.codes().iter().zip(g200.codes()) {
        if *b == BOUNDED_CODE {
            assert_eq!(*a, BOUNDED_CODE);
        } else if *a != BOUNDED_CODE {
            assert_eq!(a, b);
        }
    }
}

/// Reads the target grid at the voxel corresponding to `(i, j, k)` on the
/// source under the axis alignment of φ.
fn aligned_code(dst: &VoxelGrid, images: &[mcjulia::SignedUnit; 3], dst_units: [UnitMask; 3], idx: [usize; 3], n: usize) -> u16 {
    let mut t = [0usize; 3];
    for (axis, img) in images.iter().enumerate() {
        let slot = dst_units.iter().position(|u| *u == img.mask).unwrap();
        t[slot] = if img.sign == mcjulia::Sign::Minus { n - 1 - idx[axis] } else { idx[axis] };
    }
    dst.code(t[0], t[1], t[2])
}

#[test]
fn equivalent_slices_render_identical_grids() {
    let n = 15;
    for (p, c) in [(2, 0.25), (3, 0.25), (3, 0.0)] {
        for (_, members) in class_members(3, p, c).unwrap() {
            let src = members[0];
            let a = render(&src, p, c, 60, n, 2);
            for dst in &members[1..] {
                let phi = build_phi(&src, dst, p, c).unwrap();
                let b = render(dst, p, c, 60, n, 2);
                for k in 0..n {
                    for j in 0..n {
                        for i in 0..n {
                            assert_eq!(
                                a.code(i, j, k),
                                aligned_code(&b, &phi.axis_images, dst.units(), [i, j, k], n),
                                "{src} vs {dst} p={p} c={c}"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn identity_aligned_pair_gives_the_same_array() {
    let a = render(&triple([UnitMask::ONE, UnitMask::I1, UnitMask::J1]), 2, 0.25, 100, 21, 2);
    let b = render(&triple([UnitMask::ONE, UnitMask::I2, UnitMask::J3]), 2, 0.25, 100, 21, 2);
    assert_eq!(a.codes(), b.codes());
}

#[test]
fn exports_round_trip_and_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let g = render(&one_i1_i2(), 2, 0.25, 40, 11, 2);

    let mcvox = dir.path().join("g.mcvox");
    export_grid(&g, ExportFormat::Mcvox, &mcvox).unwrap();
    assert_eq!(read_mcvox(&mcvox).unwrap(), g);

    let ply = dir.path().join("g.ply");
    export_grid(&g, ExportFormat::Ply, &ply).unwrap();
    let text = std::fs::read_to_string(&ply).unwrap();
    let count = g.bounded_count();
    assert!(text.starts_with("ply\nformat ascii 1.0\n"));
    assert!(text.contains(&format!("element vertex {count}\n")));
    let body = text.split("end_header\n").nth(1).unwrap();
    assert_eq!(body.lines().count(), count);

    let files = export_grid(&g, ExportFormat::PgmStack, &dir.path().join("g.pgm")).unwrap();
    assert_eq!(files.len(), 11);
    assert_eq!(files[5], dir.path().join("g_z0005.pgm"));
    let bytes = std::fs::read(&files[5]).unwrap();
    let header = b"P5\n11 11\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 121);
    // the central voxel is the origin, which is bounded
    assert_eq!(bytes[header.len() + 5 * 11 + 5], 0);
}

#[test]
fn empty_point_cloud_for_an_escaped_grid() {
    let dir = tempfile::tempdir().unwrap();
    let params = DynamicsParams::real(3, 2, 0.0, 10).unwrap();
    let spec = GridSpec::new([2, 2, 2], [[5.0, 6.0]; 3]).unwrap();
    let g = render_slice(&one_i1_i2(), &params, &spec).unwrap();
    assert_eq!(g.bounded_count(), 0);
    let ply = dir.path().join("none.ply");
    write_ply(&g, &ply).unwrap();
    let text = std::fs::read_to_string(&ply).unwrap();
    assert!(text.contains("element vertex 0\n"));
    assert!(text.ends_with("end_header\n"));
}

#[test]
fn io_errors_carry_the_path() {
    let g = render(&one_i1_i2(), 2, 0.0, 10, 3, 1);
    let err = write_mcvox(&g, Path::new("/nonexistent-dir/x.mcvox")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.mcvox"));
}

#[test]
fn bicomplex_slices_render() {
    let t = SliceTriple::new(2, [UnitMask::ONE, UnitMask::I1, UnitMask::I2]).unwrap();
    let g = render(&t, 2, -0.5, 50, 9, 2);
    assert!(g.is_bounded(4, 4, 4));
    assert_eq!(g.meta().units, [0, 1, 2]);
}
