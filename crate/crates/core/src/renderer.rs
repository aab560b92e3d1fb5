//! Voxel rendering of 3D slices and export to MCVOX, PLY and PGM stacks.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsParams, EscapeKernel, EscapeResult, MAX_ITER_LIMIT};
use crate::error::{Error, Result};
use crate::slices::SliceTriple;
use crate::units::{UnitMask, MAX_ORDER};

/// Stored code of a voxel whose orbit stayed bounded.
pub const BOUNDED_CODE: u16 = u16::MAX;

/// Default cap on the size of the code array, in bytes.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

/// Environment variable consulted when no worker count is given.
pub const WORKERS_ENV: &str = "MCJULIA_WORKERS";

const MAGIC: &[u8; 7] = b"MCVOX1\0";
const VERSION: u8 = 1;

/// Resolution and axis-aligned bounds of a voxel grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dims: [usize; 3],
    bounds: [[f64; 2]; 3],
}

impl GridSpec {
    pub fn new(dims: [usize; 3], bounds: [[f64; 2]; 3]) -> Result<Self> {
        if dims.iter().any(|&d| d == 0 || d > u32::MAX as usize) {
            return Err(Error::InvalidGrid(format!(
                "dimensions must be in 1..=2^32-1 (got {dims:?})"
            )));
        }
        for [lo, hi] in bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidGrid(format!(
                    "bounds must be finite with min < max (got [{lo}, {hi}])"
                )));
            }
        }
        Ok(GridSpec { dims, bounds })
    }

    /// `dim^3` voxels covering `[-radius, radius]^3`.
    pub fn cube(dim: usize, radius: f64) -> Result<Self> {
        Self::new([dim; 3], [[-radius, radius]; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn bounds(&self) -> [[f64; 2]; 3] {
        self.bounds
    }

    pub fn voxel_count(&self) -> u128 {
        self.dims.iter().map(|&d| d as u128).product()
    }

    /// Center of voxel `i` along `axis`. Written so that centers of a
    /// symmetric range are exact negatives of each other.
    pub fn center(&self, axis: usize, i: usize) -> f64 {
        let [lo, hi] = self.bounds[axis];
        let n = self.dims[axis];
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let offset = (2 * i + 1) as f64 - n as f64;
        mid + offset * (half / n as f64)
    }

    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }
}

/// Parameters a grid was rendered with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub order: u32,
    pub power: u32,
    pub max_iter: u32,
    pub c: Vec<f64>,
    pub units: [u32; 3],
}

/// Escape codes on a regular grid, `x` fastest. Bounded voxels hold
/// [`BOUNDED_CODE`], escaped ones their escape iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    meta: GridMeta,
    spec: GridSpec,
    codes: Vec<u16>,
}

impl VoxelGrid {
    pub fn from_parts(meta: GridMeta, spec: GridSpec, codes: Vec<u16>) -> Result<Self> {
        if codes.len() as u128 != spec.voxel_count() {
            return Err(Error::InvalidGrid(format!(
                "{} codes for {} voxels",
                codes.len(),
                spec.voxel_count()
            )));
        }
        Ok(VoxelGrid { meta, spec, codes })
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dims(&self) -> [usize; 3] {
        self.spec.dims
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }

    pub fn code(&self, i: usize, j: usize, k: usize) -> u16 {
        self.codes[self.spec.linear_index(i, j, k)]
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> EscapeResult {
        decode(self.code(i, j, k))
    }

    pub fn is_bounded(&self, i: usize, j: usize, k: usize) -> bool {
        self.code(i, j, k) == BOUNDED_CODE
    }

    pub fn bounded_count(&self) -> usize {
        self.codes.iter().filter(|&&c| c == BOUNDED_CODE).count()
    }

    /// Centers of all bounded voxels, `x` fastest.
    pub fn bounded_points(&self) -> Vec<[f64; 3]> {
        let [nx, ny, _] = self.spec.dims;
        self.codes
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == BOUNDED_CODE)
            .map(|(idx, _)| {
                let (i, j, k) = (idx % nx, (idx / nx) % ny, idx / (nx * ny));
                [
                    self.spec.center(0, i),
                    self.spec.center(1, j),
                    self.spec.center(2, k),
                ]
            })
            .collect()
    }
}

fn encode(r: EscapeResult) -> u16 {
    match r {
        EscapeResult::Bounded => BOUNDED_CODE,
        EscapeResult::Escaped(m) => m as u16,
    }
}

fn decode(code: u16) -> EscapeResult {
    if code == BOUNDED_CODE {
        EscapeResult::Bounded
    } else {
        EscapeResult::Escaped(u32::from(code))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderOptions {
    /// Worker threads; falls back to `MCJULIA_WORKERS`, then to all cores.
    pub workers: Option<usize>,
    pub memory_budget: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            workers: None,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Worker count from the option or the environment. `Ok(None)` means the
/// global pool.
pub fn resolve_workers(workers: Option<usize>) -> Result<Option<usize>> {
    let w = match workers {
        Some(w) => Some(w),
        None => match std::env::var(WORKERS_ENV) {
            Ok(s) if !s.trim().is_empty() => Some(s.trim().parse::<usize>().map_err(|_| {
                Error::InvalidGrid(format!("{WORKERS_ENV} must be a positive integer (got {s:?})"))
            })?),
            _ => None,
        },
    };
    if w == Some(0) {
        return Err(Error::InvalidGrid("worker count must be at least 1".into()));
    }
    Ok(w)
}

/// Escape codes of every voxel center `(x, y, z) -> x u1 + y u2 + z u3`.
pub fn render_slice(t: &SliceTriple, params: &DynamicsParams, spec: &GridSpec) -> Result<VoxelGrid> {
    render_slice_with(t, params, spec, &RenderOptions::default())
}

pub fn render_slice_with(
    t: &SliceTriple,
    params: &DynamicsParams,
    spec: &GridSpec,
    opts: &RenderOptions,
) -> Result<VoxelGrid> {
    if t.order() != params.order() {
        return Err(Error::OrderMismatch {
            left: t.order(),
            right: params.order(),
        });
    }
    let voxels = spec.voxel_count();
    if voxels * 2 > opts.memory_budget as u128 {
        return Err(Error::MemoryBudget {
            voxels,
            budget: opts.memory_budget,
        });
    }
    let workers = resolve_workers(opts.workers)?;
    let mut codes = vec![0u16; voxels as usize];
    let fill = |codes: &mut [u16]| fill_codes(t, params, spec, codes);
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidGrid(format!("cannot start {w} workers: {e}")))?
            .install(|| fill(&mut codes)),
        None => fill(&mut codes),
    }
    let meta = GridMeta {
        order: params.order(),
        power: params.power(),
        max_iter: params.max_iter(),
        c: params.c().coeffs().to_vec(),
        units: t.units().map(|u| u.0),
    };
    VoxelGrid::from_parts(meta, *spec, codes)
}

fn fill_codes(t: &SliceTriple, params: &DynamicsParams, spec: &GridSpec, codes: &mut [u16]) {
    let [nx, ny, _] = spec.dims;
    let [ux, uy, uz] = t.units().map(UnitMask::index);
    let len = 1usize << params.order();
    codes
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, plane)| {
            let mut kernel = EscapeKernel::new(params);
            let mut point = vec![0.0; len];
            let z = spec.center(2, k);
            for (j, row) in plane.chunks_exact_mut(nx).enumerate() {
                let y = spec.center(1, j);
                for (i, code) in row.iter_mut().enumerate() {
                    point.iter_mut().for_each(|v| *v = 0.0);
                    point[ux] = spec.center(0, i);
                    point[uy] = y;
                    point[uz] = z;
                    *code = encode(kernel.run(&point));
                }
            }
        });
}

/// On-disk formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExportFormat {
    Mcvox,
    Ply,
    PgmStack,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcvox" => Ok(ExportFormat::Mcvox),
            "ply" => Ok(ExportFormat::Ply),
            "pgm" | "pgm_stack" | "pgm-stack" => Ok(ExportFormat::PgmStack),
            _ => Err(Error::Format(format!(
                "unknown format {s:?} (expected mcvox, ply or pgm)"
            ))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Mcvox => "mcvox",
            ExportFormat::Ply => "ply",
            ExportFormat::PgmStack => "pgm",
        })
    }
}

/// Writes `grid` and returns the files created.
pub fn export_grid(grid: &VoxelGrid, format: ExportFormat, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        ExportFormat::Mcvox => write_mcvox(grid, path).map(|_| vec![path.to_path_buf()]),
        ExportFormat::Ply => write_ply(grid, path).map(|_| vec![path.to_path_buf()]),
        ExportFormat::PgmStack => write_pgm_stack(grid, path),
    }
}

/// Little-endian MCVOX encoding: magic, version, order, power, cutoff,
/// `c` coefficients, unit masks, dimensions, bounds, then the codes.
pub fn encode_mcvox(grid: &VoxelGrid) -> Result<Vec<u8>> {
    let m = &grid.meta;
    let power = u8::try_from(m.power)
        .map_err(|_| Error::Format(format!("power {} does not fit the header", m.power)))?;
    let mut out = Vec::with_capacity(64 + 8 * m.c.len() + 2 * grid.codes.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(m.order as u8);
    out.push(power);
    out.extend_from_slice(&(m.max_iter as u16).to_le_bytes());
    for c in &m.c {
        out.extend_from_slice(&c.to_le_bytes());
    }
    for u in m.units {
        out.push(u as u8);
    }
    for d in grid.spec.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for [lo, hi] in grid.spec.bounds {
        out.extend_from_slice(&lo.to_le_bytes());
        out.extend_from_slice(&hi.to_le_bytes());
    }
    for c in &grid.codes {
        out.extend_from_slice(&c.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Format("MCVOX data is truncated".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_mcvox(bytes: &[u8]) -> Result<VoxelGrid> {
    let mut r = Reader { buf: bytes };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Format("not an MCVOX file".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported MCVOX version {version}")));
    }
    let order = u32::from(r.u8()?);
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Format(format!("order {order} out of range")));
    }
    let power = u32::from(r.u8()?);
    let max_iter = u32::from(r.u16()?);
    if max_iter > MAX_ITER_LIMIT {
        return Err(Error::Format(format!("cutoff {max_iter} out of range")));
    }
    let c = (0..1usize << order).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let units = [r.u8()?, r.u8()?, r.u8()?].map(u32::from);
    let dims = [r.u32()?, r.u32()?, r.u32()?].map(|d| d as usize);
    let mut bounds = [[0.0; 2]; 3];
    for b in &mut bounds {
        *b = [r.f64()?, r.f64()?];
    }
    let spec = GridSpec::new(dims, bounds)?;
    let count = spec.voxel_count();
    if r.buf.len() as u128 != count * 2 {
        return Err(Error::Format(format!(
            "expected {} code bytes, found {}",
            count * 2,
            r.buf.len()
        )));
    }
    let codes = r
        .buf
        .chunks_exact(2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .collect();
    let meta = GridMeta {
        order,
        power,
        max_iter,
        c,
        units,
    };
    VoxelGrid::from_parts(meta, spec, codes)
}

pub fn write_mcvox(grid: &VoxelGrid, path: &Path) -> Result<()> {
    let bytes = encode_mcvox(grid)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_mcvox(path: &Path) -> Result<VoxelGrid> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mcvox(&bytes)
}

/// ASCII point cloud of the bounded voxel centers.
pub fn write_ply(grid: &VoxelGrid, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let points = grid.bounded_points();
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write!(
        w,
        "ply\nformat ascii 1.0\ncomment mcjulia bounded voxels\nelement vertex {}\n\
         property float x\nproperty float y\nproperty float z\nend_header\n",
        points.len()
    )
    .map_err(io)?;
    for [x, y, z] in points {
        writeln!(w, "{} {} {}", x as f32, y as f32, z as f32).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Gray level of a voxel: 0 for bounded, `m * 255 / N` clamped to `1..=255`
/// for escape iteration `m`.
pub fn pgm_level(code: u16, max_iter: u32) -> u8 {
    if code == BOUNDED_CODE {
        0
    } else {
        let v = u64::from(code) * 255 / u64::from(max_iter.max(1));
        v.clamp(1, 255) as u8
    }
}

/// Path of the PGM file for plane `k`, derived from `path` by dropping the
/// extension.
pub fn pgm_plane_path(path: &Path, k: usize) -> PathBuf {
    let stem = path.with_extension("");
    let name = stem
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "slice".into());
    stem.with_file_name(format!("{name}_z{k:04}.pgm"))
}

/// One binary PGM per z-plane.
pub fn write_pgm_stack(grid: &VoxelGrid, path: &Path) -> Result<Vec<PathBuf>> {
    let [nx, ny, nz] = grid.dims();
    let plane = nx * ny;
    let mut files = Vec::with_capacity(nz);
    for k in 0..nz {
        let file = pgm_plane_path(path, k);
        let io = |e| Error::io(&file, e);
        let mut w = BufWriter::new(File::create(&file).map_err(io)?);
        write!(w, "P5\n{nx} {ny}\n255\n").map_err(io)?;
        let levels: Vec<u8> = grid.codes[k * plane..(k + 1) * plane]
            .iter()
            .map(|&c| pgm_level(c, grid.meta.max_iter))
            .collect();
        w.write_all(&levels).map_err(io)?;
        w.flush().map_err(io)?;
        files.push(file);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> VoxelGrid {
        let t = SliceTriple::new(3, [UnitMask::ONE, UnitMask::I1, UnitMask::J1]).unwrap();
        let params = DynamicsParams::real(3, 2, -0.5, 50).unwrap();
        let spec = GridSpec::cube(9, params.escape_radius()).unwrap();
        render_slice(&t, &params, &spec).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new([0, 1, 1], [[-1.0, 1.0]; 3]).is_err());
        assert!(GridSpec::new([1, 1, 1], [[1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]).is_err());
        assert!(GridSpec::new([1, 1, 1], [[f64::NAN, 1.0], [-1.0, 1.0], [-1.0, 1.0]]).is_err());
    }

    #[test]
    fn centers_are_antisymmetric() {
        let s = GridSpec::cube(7, 1.3).unwrap();
        for i in 0..7 {
            assert_eq!(s.center(0, i), -s.center(0, 6 - i));
        }
        assert_eq!(s.center(0, 3), 0.0);
        let s = GridSpec::new([2, 1, 1], [[0.0, 2.0], [0.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(s.center(0, 0), 0.5);
        assert_eq!(s.center(0, 1), 1.5);
    }

    #[test]
    fn memory_budget_is_enforced() {
        let t = SliceTriple::new(3, [UnitMask::ONE, UnitMask::I1, UnitMask::J1]).unwrap();
        let params = DynamicsParams::real(3, 2, 0.0, 10).unwrap();
        let spec = GridSpec::cube(100, 2.0).unwrap();
        let opts = RenderOptions {
            workers: Some(1),
            memory_budget: 1000,
        };
        assert!(matches!(
            render_slice_with(&t, &params, &spec, &opts),
            Err(Error::MemoryBudget { .. })
        ));
    }

    #[test]
    fn origin_is_bounded() {
        let g = small_grid();
        assert!(g.is_bounded(4, 4, 4));
        assert_eq!(g.get(0, 0, 0), EscapeResult::Escaped(1));
        assert!(g.bounded_count() > 0);
    }

    #[test]
    fn mcvox_round_trip() {
        let g = small_grid();
        let bytes = encode_mcvox(&g).unwrap();
        assert_eq!(&bytes[..7], MAGIC);
        assert_eq!(decode_mcvox(&bytes).unwrap(), g);
        assert!(decode_mcvox(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_mcvox(&bad).is_err());
    }

    #[test]
    fn pgm_levels() {
        assert_eq!(pgm_level(BOUNDED_CODE, 100), 0);
        assert_eq!(pgm_level(0, 100), 1);
        assert_eq!(pgm_level(100, 100), 255);
        assert_eq!(pgm_level(50, 100), 127);
        assert_eq!(
            pgm_plane_path(Path::new("/tmp/out.pgm"), 3),
            PathBuf::from("/tmp/out_z0003.pgm")
        );
    }

    #[test]
    fn format_names() {
        assert_eq!("MCVOX".parse::<ExportFormat>().unwrap(), ExportFormat::Mcvox);
        assert_eq!("pgm".parse::<ExportFormat>().unwrap(), ExportFormat::PgmStack);
        assert!("obj".parse::<ExportFormat>().is_err());
    }
}
