//! Principal 3D slices `T(u1, u2, u3) = span_R{u1, u2, u3}` and their
//! equivalence classes.
//!
//! A slice is classified from an invariant signature: parity of `p`, whether
//! `c = 0`, whether the triple contains `1`, whether one unit is (up to sign)
//! the product of the other two, and the multiset of squares. [`build_phi`]
//! then produces an explicit linear bijection between the iterate spaces of
//! two slices in the same class, which is what makes the classification
//! checkable.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{iterate_once, DynamicsParams, EscapeKernel, EscapeResult};
use crate::error::{Error, Result};
use crate::multicomplex::Multicomplex;
use crate::units::{check_order, Sign, SignedUnit, UnitMask, UnitNature};

/// Three pairwise distinct units of `I(n)`, in the caller's axis order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SliceTriple {
    order: u32,
    units: [UnitMask; 3],
}

impl SliceTriple {
    pub fn new(order: u32, units: [UnitMask; 3]) -> Result<Self> {
        check_order(order, 2)?;
        for u in units {
            if !u.is_valid_for(order) {
                return Err(Error::InvalidMask { mask: u.0, order });
            }
        }
        let [a, b, c] = units;
        if a == b || a == c || b == c {
            return Err(Error::DuplicateUnits([a.0, b.0, c.0]));
        }
        Ok(SliceTriple { order, units })
    }

    /// Smallest order that holds all three units (at least 3).
    pub fn minimal(units: [UnitMask; 3]) -> Result<Self> {
        let order = units.iter().map(|u| u.min_order()).max().unwrap_or(0).max(3);
        Self::new(order, units)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn units(&self) -> [UnitMask; 3] {
        self.units
    }

    /// Same units embedded in a larger order.
    pub fn with_order(&self, order: u32) -> Result<Self> {
        Self::new(order, self.units)
    }

    /// `1` first, then imaginary units, then hyperbolic units; ascending mask
    /// within a nature.
    pub fn canonical_order(&self) -> SliceTriple {
        let mut units = self.units;
        units.sort_by_key(|u| (nature_rank(u.nature()), u.0));
        SliceTriple {
            order: self.order,
            units,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical_order() == *self
    }

    pub fn contains_one(&self) -> bool {
        self.units.contains(&UnitMask::ONE)
    }

    /// Whether `u_k u_l = ±u_h` for some ordering of the three units.
    pub fn closure_flag(&self) -> bool {
        let [a, b, c] = self.units;
        a.0 ^ b.0 ^ c.0 == 0
    }

    pub fn squares(&self) -> [Sign; 3] {
        self.units.map(|u| u.square_sign())
    }

    /// Squares sorted ascending (`-` before `+`).
    pub fn square_multiset(&self) -> [Sign; 3] {
        let mut s = self.squares();
        s.sort();
        s
    }

    /// Signed product of the units selected by the bits of `subset`
    /// (bit `k` selects `u_{k+1}`).
    fn subset_product(&self, subset: u8) -> SignedUnit {
        product_of(&self.units.map(SignedUnit::positive), subset)
    }
}

fn product_of(units: &[SignedUnit; 3], subset: u8) -> SignedUnit {
    (0..3)
        .filter(|k| subset & (1 << k) != 0)
        .fold(SignedUnit::positive(UnitMask::ONE), |acc, k| acc * units[k])
}

fn nature_rank(n: UnitNature) -> u8 {
    match n {
        UnitNature::Real => 0,
        UnitNature::Imaginary => 1,
        UnitNature::Hyperbolic => 2,
    }
}

impl fmt::Display for SliceTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.units;
        write!(f, "({a}, {b}, {c})")
    }
}

pub fn canonical_order(t: &SliceTriple) -> SliceTriple {
    t.canonical_order()
}

pub fn closure_flag(t: &SliceTriple) -> bool {
    t.closure_flag()
}

/// The three shapes the space of iterates can take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IterateSpaceKind {
    /// `span{1, u1u2, u1u3, u2u3}`
    L,
    /// `span{u1, u2, u3, u1u2u3}`
    M,
    /// `span` of all eight subset products.
    S,
}

const SUBSETS_L: [u8; 4] = [0b000, 0b011, 0b101, 0b110];
const SUBSETS_M: [u8; 4] = [0b001, 0b010, 0b100, 0b111];
const SUBSETS_S: [u8; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

impl IterateSpaceKind {
    fn subsets(self) -> &'static [u8] {
        match self {
            IterateSpaceKind::L => &SUBSETS_L,
            IterateSpaceKind::M => &SUBSETS_M,
            IterateSpaceKind::S => &SUBSETS_S,
        }
    }

    pub fn dimension(self) -> usize {
        self.subsets().len()
    }
}

/// The iterate space of a slice with an explicit signed basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterateSpace {
    pub kind: IterateSpaceKind,
    pub basis: Vec<SignedUnit>,
}

impl IterateSpace {
    pub fn masks(&self) -> Vec<UnitMask> {
        self.basis.iter().map(|b| b.mask).collect()
    }
}

pub fn iterate_space_kind(t: &SliceTriple, p: u32, c_is_zero: bool) -> IterateSpaceKind {
    if p % 2 == 0 {
        IterateSpaceKind::L
    } else if c_is_zero || t.contains_one() || t.closure_flag() {
        IterateSpaceKind::M
    } else {
        IterateSpaceKind::S
    }
}

/// Space spanned by all iterates of points of the canonically ordered slice.
pub fn iterate_space(t: &SliceTriple, p: u32, c_is_zero: bool) -> IterateSpace {
    let t = t.canonical_order();
    let kind = iterate_space_kind(&t, p, c_is_zero);
    IterateSpace {
        kind,
        basis: kind.subsets().iter().map(|&s| t.subset_product(s)).collect(),
    }
}

/// Which branch of the classification a slice falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SliceCase {
    Even,
    OddCZero,
    #[serde(rename = "OddC_ContainsOne")]
    OddCContainsOne,
    #[serde(rename = "OddC_Closed")]
    OddCClosed,
    #[serde(rename = "OddC_Open")]
    OddCOpen,
}

impl fmt::Display for SliceCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SliceCase::Even => "Even",
            SliceCase::OddCZero => "OddCZero",
            SliceCase::OddCContainsOne => "OddC_ContainsOne",
            SliceCase::OddCClosed => "OddC_Closed",
            SliceCase::OddCOpen => "OddC_Open",
        })
    }
}

/// An equivalence class of principal 3D slices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SliceClass {
    pub case: SliceCase,
    pub squares: [Sign; 3],
    pub representative: SliceTriple,
}

impl SliceClass {
    pub fn key(&self) -> (SliceCase, [Sign; 3]) {
        (self.case, self.squares)
    }

    pub fn negative_squares(&self) -> usize {
        self.squares.iter().filter(|&&s| s == Sign::Minus).count()
    }
}

impl fmt::Display for SliceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.squares;
        write!(f, "{}{{{a}{b}{c}}} ~ T{}", self.case, self.representative)
    }
}

fn triple(units: [UnitMask; 3]) -> SliceTriple {
    SliceTriple::minimal(units).expect("static representative")
}

fn representative(case: SliceCase, negatives: usize) -> SliceTriple {
    use UnitMask as U;
    match (case, negatives) {
        (SliceCase::OddCClosed, 0) => triple([U::J1, U::J2, U::J3]),
        (SliceCase::OddCClosed, _) => triple([U::I1, U::I2, U::J1]),
        // i1i2, i1i3, i1 times the fourth generator: needs order 4
        (SliceCase::OddCOpen, 0) => triple([U(0b0011), U(0b0101), U(0b1001)]),
        (SliceCase::OddCOpen, 1) => triple([U::I1, U::J1, U::J2]),
        (SliceCase::OddCOpen, 2) => triple([U::I1, U::I2, U::J2]),
        (_, 0) => triple([U::ONE, U::J1, U::J2]),
        (_, 1) => triple([U::ONE, U::I1, U::J1]),
        (_, 2) => triple([U::ONE, U::I1, U::I2]),
        _ => triple([U::I1, U::I2, U::I3]),
    }
}

fn check_real_parameter(p: u32, c: f64) -> Result<()> {
    if p < 2 {
        return Err(Error::PowerOutOfRange { got: p, min: 2 });
    }
    if !c.is_finite() {
        return Err(Error::NonFinite(0));
    }
    Ok(())
}

/// Equivalence class of `T(u1, u2, u3)` for `f_c(ζ) = ζ^p + c` with real `c`.
/// The unit order of `t` does not matter.
pub fn classify(t: &SliceTriple, p: u32, c: f64) -> Result<SliceClass> {
    check_real_parameter(p, c)?;
    let case = if p % 2 == 0 {
        SliceCase::Even
    } else if c == 0.0 {
        SliceCase::OddCZero
    } else if t.contains_one() {
        SliceCase::OddCContainsOne
    } else if t.closure_flag() {
        SliceCase::OddCClosed
    } else {
        SliceCase::OddCOpen
    };
    let squares = t.square_multiset();
    let negatives = squares.iter().filter(|&&s| s == Sign::Minus).count();
    Ok(SliceClass {
        case,
        squares,
        representative: representative(case, negatives),
    })
}

/// [`classify`] for a multicomplex parameter, which must be real.
pub fn classify_multicomplex(t: &SliceTriple, p: u32, c: &Multicomplex) -> Result<SliceClass> {
    if !c.is_real() {
        return Err(Error::NonRealParameter);
    }
    classify(t, p, c.coeffs()[0])
}

/// Every unordered triple of distinct units of `I(n)`, masks ascending.
pub fn all_triples(n: u32) -> Result<Vec<SliceTriple>> {
    check_order(n, 3)?;
    let size = 1u32 << n;
    let mut out = Vec::new();
    for a in 0..size {
        for b in a + 1..size {
            for c in b + 1..size {
                out.push(SliceTriple {
                    order: n,
                    units: [UnitMask(a), UnitMask(b), UnitMask(c)],
                });
            }
        }
    }
    Ok(out)
}

/// All triples of order `n` grouped by class, classes in sorted order.
pub fn class_members(n: u32, p: u32, c: f64) -> Result<Vec<(SliceClass, Vec<SliceTriple>)>> {
    check_real_parameter(p, c)?;
    let mut groups: BTreeMap<(SliceCase, [Sign; 3]), (SliceClass, Vec<SliceTriple>)> =
        BTreeMap::new();
    for t in all_triples(n)? {
        let class = classify(&t, p, c)?;
        groups
            .entry(class.key())
            .or_insert_with(|| (class, Vec::new()))
            .1
            .push(t);
    }
    Ok(groups.into_values().collect())
}

/// Number of distinct classes among all `C(2^n, 3)` triples.
pub fn class_count(n: u32, p: u32, c: f64) -> Result<usize> {
    Ok(class_members(n, p, c)?.len())
}

/// A linear bijection between the iterate spaces of two equivalent slices,
/// sending the k-th source basis element to the k-th target basis element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiMap {
    pub kind: IterateSpaceKind,
    pub source: SliceTriple,
    pub target: SliceTriple,
    pub source_basis: Vec<SignedUnit>,
    pub target_basis: Vec<SignedUnit>,
    /// Images of the source axes `u1, u2, u3`. A negated image means the
    /// target slice is traversed with that coordinate reflected.
    pub axis_images: [SignedUnit; 3],
    /// Only odd products are preserved (odd `p`, `c = 0`), so `1` need not
    /// map to `1`.
    pub odd_products_only: bool,
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Sign patterns ordered by number of reflections.
const REFLECTIONS: [u8; 8] = [0b000, 0b100, 0b010, 0b001, 0b110, 0b101, 0b011, 0b111];

impl PhiMap {
    /// Image of `z`, which must lie in the source iterate space.
    pub fn apply(&self, z: &Multicomplex) -> Result<Multicomplex> {
        let order = self.target.order();
        if z.order() != self.source.order() {
            return Err(Error::OrderMismatch {
                left: z.order(),
                right: self.source.order(),
            });
        }
        let mut inside = vec![false; z.coeffs().len()];
        let mut out = vec![0.0; 1 << order];
        for (s, t) in self.source_basis.iter().zip(&self.target_basis) {
            inside[s.mask.index()] = true;
            let x = z.coeff(s.mask) * (s.sign * t.sign).to_f64();
            out[t.mask.index()] += x;
        }
        if let Some(i) = z
            .coeffs()
            .iter()
            .enumerate()
            .position(|(i, &c)| !inside[i] && c != 0.0)
        {
            return Err(Error::InvalidMask {
                mask: i as u32,
                order,
            });
        }
        Ok(Multicomplex::from_raw(order, out))
    }

    fn image(&self, b: SignedUnit) -> Option<SignedUnit> {
        let k = self.source_basis.iter().position(|s| s.mask == b.mask)?;
        let relative = b.sign * self.source_basis[k].sign;
        let t = self.target_basis[k];
        Some(SignedUnit::new(relative * t.sign, t.mask))
    }

    /// `φ(b_i b_j) = φ(b_i) φ(b_j)` on all basis pairs when the source space
    /// is closed under multiplication; otherwise, and whenever only odd
    /// products are preserved, the same identity on all products of three
    /// basis elements, which is what odd powers need.
    pub fn is_multiplicative(&self) -> bool {
        let b = &self.source_basis;
        let t = &self.target_basis;
        let n = b.len();
        let closed = !self.odd_products_only
            && (0..n).all(|i| (0..n).all(|j| self.image(b[i] * b[j]).is_some()));
        if closed {
            (0..n).all(|i| {
                (0..n).all(|j| self.image(b[i] * b[j]) == Some(t[i] * t[j]))
            })
        } else {
            (0..n).all(|i| {
                (0..n).all(|j| {
                    (0..n).all(|k| self.image(b[i] * b[j] * b[k]) == Some(t[i] * t[j] * t[k]))
                })
            })
        }
    }
}

/// Subsets whose products must be mapped consistently for each case: the
/// even products for `L`, the odd ones for `M` with `c = 0`, and all of them
/// when a nonzero real `c` forces `φ(1) = 1` on the generated algebra.
fn relation_family(case: SliceCase) -> &'static [u8] {
    match case {
        SliceCase::Even => &SUBSETS_L,
        SliceCase::OddCZero => &SUBSETS_M,
        _ => &SUBSETS_S,
    }
}

/// Constructs the correspondence between two slices of the same class.
/// Prefers the identity alignment, then axis permutations, and reflects an
/// axis only when the sign of `u1 u2 u3` differs between two closed triples.
pub fn build_phi(src: &SliceTriple, dst: &SliceTriple, p: u32, c: f64) -> Result<PhiMap> {
    let cs = classify(src, p, c)?;
    let cd = classify(dst, p, c)?;
    if cs.key() != cd.key() {
        return Err(Error::ClassMismatch {
            src: cs.to_string(),
            dst: cd.to_string(),
        });
    }
    let kind = iterate_space_kind(src, p, c == 0.0);
    let family = relation_family(cs.case);
    let su = src.units().map(SignedUnit::positive);
    let src_elems: Vec<SignedUnit> = family.iter().map(|&s| product_of(&su, s)).collect();

    for &reflect in &REFLECTIONS {
        for perm in &PERMUTATIONS {
            let images: [SignedUnit; 3] = std::array::from_fn(|k| {
                let sign = Sign::from_parity(reflect & (1 << k) != 0);
                SignedUnit::new(sign, dst.units()[perm[k]])
            });
            if (0..3).any(|k| su[k].mask.square_sign() != images[k].mask.square_sign()) {
                continue;
            }
            let tgt_elems: Vec<SignedUnit> =
                family.iter().map(|&s| product_of(&images, s)).collect();
            if !relations_agree(&src_elems, &tgt_elems) {
                continue;
            }
            let source_basis: Vec<SignedUnit> =
                kind.subsets().iter().map(|&s| product_of(&su, s)).collect();
            let target_basis = kind.subsets().iter().map(|&s| product_of(&images, s)).collect();
            return Ok(PhiMap {
                kind,
                source: *src,
                target: *dst,
                source_basis,
                target_basis,
                axis_images: images,
                odd_products_only: cs.case == SliceCase::OddCZero,
            });
        }
    }
    // every pair with the same signature admits an alignment
    Err(Error::ClassMismatch {
        src: format!("{cs} {src}"),
        dst: format!("{cd} {dst} (no alignment)"),
    })
}

/// Same coincidence pattern of masks on both sides, with matching relative signs.
fn relations_agree(src: &[SignedUnit], tgt: &[SignedUnit]) -> bool {
    for i in 0..src.len() {
        for j in i + 1..src.len() {
            let same_src = src[i].mask == src[j].mask;
            let same_tgt = tgt[i].mask == tgt[j].mask;
            if same_src != same_tgt {
                return false;
            }
            if same_src && src[i].sign * src[j].sign != tgt[i].sign * tgt[j].sign {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeMismatch {
    pub point: [f64; 3],
    pub source: EscapeResult,
    pub target: EscapeResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub source: String,
    pub target: String,
    pub axis_images: Vec<String>,
    pub samples: usize,
    pub agreements: usize,
    pub seed: u64,
    /// First few disagreements, verbatim.
    pub mismatches: Vec<EscapeMismatch>,
    pub pass: bool,
}

/// Uniform points of `[-R, R]^3`, the origin first.
pub fn sample_points(radius: f64, samples: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|i| {
            if i == 0 {
                [0.0; 3]
            } else {
                std::array::from_fn(|_| rng.gen_range(-radius..=radius))
            }
        })
        .collect()
}

fn check_real_params(params: &DynamicsParams) -> Result<f64> {
    if !params.c().is_real() {
        return Err(Error::NonRealParameter);
    }
    Ok(params.c().coeffs()[0])
}

/// Compares escape iterations of corresponding points of two equivalent
/// slices: `(x, y, z)` on the source against its image under
/// [`PhiMap::axis_images`] on the target.
pub fn escape_equivalence_check(
    src: &SliceTriple,
    dst: &SliceTriple,
    params: &DynamicsParams,
    samples: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    let c = check_real_params(params)?;
    for t in [src, dst] {
        if t.order() != params.order() {
            return Err(Error::OrderMismatch {
                left: t.order(),
                right: params.order(),
            });
        }
    }
    let phi = build_phi(src, dst, params.power(), c)?;
    let points = sample_points(params.escape_radius(), samples, seed);
    let mut kernel = EscapeKernel::new(params);
    let mut agreements = 0;
    let mut mismatches = Vec::new();
    let len = 1usize << params.order();
    let mut a = vec![0.0; len];
    let mut b = vec![0.0; len];
    for pt in &points {
        a.iter_mut().for_each(|v| *v = 0.0);
        b.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..3 {
            a[src.units()[k].index()] = pt[k];
            let img = phi.axis_images[k];
            b[img.mask.index()] = img.sign.to_f64() * pt[k];
        }
        let ra = kernel.run(&a);
        let rb = kernel.run(&b);
        if ra == rb {
            agreements += 1;
        } else if mismatches.len() < 10 {
            mismatches.push(EscapeMismatch {
                point: *pt,
                source: ra,
                target: rb,
            });
        }
    }
    Ok(EquivalenceReport {
        source: src.to_string(),
        target: dst.to_string(),
        axis_images: phi.axis_images.iter().map(|u| u.to_string()).collect(),
        samples,
        agreements,
        seed,
        pass: agreements == samples,
        mismatches,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanReport {
    pub triple: String,
    pub kind: IterateSpaceKind,
    pub expected_dimension: usize,
    pub observed_rank: usize,
    pub max_residual: f64,
    pub seeds: usize,
    pub seed: u64,
    pub pass: bool,
}

pub const SPAN_RESIDUAL_TOL: f64 = 1e-10;
pub const SPAN_RANK_TOL: f64 = 1e-8;
pub const SPAN_ITERATES: usize = 3;

/// Checks that iterates stay inside the predicted space and that they span it.
///
/// Each of `seeds` random slice points (coordinates uniform in `[-1, 1]`)
/// contributes its first three iterates. Iterates are normalised to unit
/// norm before measuring the coefficients outside the predicted masks, and
/// the rank of the stacked iterates uses a relative singular-value cut.
pub fn iterate_span_check(t: &SliceTriple, p: u32, c: f64, seeds: usize, seed: u64) -> Result<SpanReport> {
    check_real_parameter(p, c)?;
    let space = iterate_space(t, p, c == 0.0);
    let params = DynamicsParams::real(t.order(), p, c, 1)?;
    let len = 1usize << t.order();
    let mut inside = vec![false; len];
    for m in space.masks() {
        inside[m.index()] = true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut max_residual = 0.0f64;
    for _ in 0..seeds {
        let [x, y, z]: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
        let mut cur = Multicomplex::from_slice_point(x, y, z, t);
        for _ in 0..SPAN_ITERATES {
            cur = iterate_once(&cur, &params)?;
            let norm = cur.norm();
            if !(norm.is_finite() && norm > 0.0) {
                continue;
            }
            let row: Vec<f64> = cur.coeffs().iter().map(|v| v / norm).collect();
            for (i, v) in row.iter().enumerate() {
                if !inside[i] {
                    max_residual = max_residual.max(v.abs());
                }
            }
            rows.push(row);
        }
    }
    let observed_rank = if rows.is_empty() {
        0
    } else {
        let m = DMatrix::from_fn(rows.len(), len, |i, j| rows[i][j]);
        let sv = m.singular_values();
        let top = sv.max();
        sv.iter().filter(|&&s| s > SPAN_RANK_TOL * top).count()
    };
    let expected_dimension = space.kind.dimension();
    Ok(SpanReport {
        triple: t.to_string(),
        kind: space.kind,
        expected_dimension,
        observed_rank,
        max_residual,
        seeds,
        seed,
        pass: max_residual <= SPAN_RESIDUAL_TOL && observed_rank == expected_dimension,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub case: SliceCase,
    pub squares: [i8; 3],
    pub representative: String,
    pub representative_masks: [u32; 3],
    pub representative_order: u32,
    pub members: usize,
    pub has_tricomplex_member: bool,
    pub alternate_labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: u32,
    pub p: u32,
    pub c: f64,
    pub triples: usize,
    pub class_count: usize,
    pub classes: Vec<ClassEntry>,
    pub partition_ok: bool,
    pub permutation_invariant: bool,
    pub representatives_fixed: bool,
}

/// Full classification of the order-`n` slices with per-class statistics and
/// the structural self-checks.
pub fn classification_report(n: u32, p: u32, c: f64) -> Result<ClassificationReport> {
    let groups = class_members(n, p, c)?;
    let triples = all_triples(n)?.len();
    let mut permutation_invariant = true;
    let mut representatives_fixed = true;
    let mut classes = Vec::new();
    let mut assigned = 0;
    for (class, members) in &groups {
        assigned += members.len();
        for t in members {
            for perm in &PERMUTATIONS {
                let u = t.units();
                let permuted = SliceTriple::new(n, [u[perm[0]], u[perm[1]], u[perm[2]]])?;
                if classify(&permuted, p, c)? != *class {
                    permutation_invariant = false;
                }
            }
        }
        let rep = class.representative;
        if classify(&rep, p, c)? != *class {
            representatives_fixed = false;
        }
        let alternate_labels = if class.case == SliceCase::OddCOpen && class.negative_squares() == 1 {
            vec!["(i1, i2, j2)".to_string()]
        } else {
            Vec::new()
        };
        classes.push(ClassEntry {
            case: class.case,
            squares: class.squares.map(Sign::to_i8),
            representative: rep.to_string(),
            representative_masks: rep.units().map(|u| u.0),
            representative_order: rep.order(),
            members: members.len(),
            has_tricomplex_member: members
                .iter()
                .any(|t| t.units().iter().all(|u| u.0 < 8)),
            alternate_labels,
        });
    }
    Ok(ClassificationReport {
        n,
        p,
        c,
        triples,
        class_count: classes.len(),
        classes,
        partition_ok: assigned == triples,
        permutation_invariant,
        representatives_fixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use UnitMask as U;

    fn t3(a: U, b: U, c: U) -> SliceTriple {
        SliceTriple::new(3, [a, b, c]).unwrap()
    }

    #[test]
    fn construction_rejects_bad_triples() {
        assert!(matches!(
            SliceTriple::new(3, [U::I1, U::I1, U::J1]),
            Err(Error::DuplicateUnits(_))
        ));
        assert!(SliceTriple::new(3, [U::I1, U(8), U::J1]).is_err());
        assert!(SliceTriple::new(1, [U(0), U(1), U(1)]).is_err());
    }

    #[test]
    fn canonical_ordering() {
        assert_eq!(
            t3(U::J3, U::I1, U::ONE).canonical_order(),
            t3(U::ONE, U::I1, U::J3)
        );
        assert_eq!(
            t3(U::I3, U::I1, U::I2).canonical_order(),
            t3(U::I1, U::I2, U::I3)
        );
        let t = t3(U::ONE, U::I1, U::J3);
        assert_eq!(t.canonical_order(), t);
        assert!(t.is_canonical());
    }

    #[test]
    fn closure_examples() {
        assert!(t3(U::I1, U::I2, U::J1).closure_flag());
        assert!(t3(U::J1, U::J2, U::J3).closure_flag());
        assert!(!t3(U::I1, U::I2, U::J2).closure_flag());
        // brute force through the signed product
        let t = t3(U::J1, U::J2, U::J3);
        let [a, b, c] = t.units();
        assert_eq!(a.times(b), SignedUnit::new(Sign::Minus, c));
    }

    #[test]
    fn iterate_space_examples() {
        let t = t3(U::ONE, U::I1, U::J3);
        let s = iterate_space(&t, 2, false);
        assert_eq!(s.kind, IterateSpaceKind::L);
        assert_eq!(s.basis[0], SignedUnit::positive(U::ONE));
        assert_eq!(s.basis[1], SignedUnit::positive(U::I1));
        assert_eq!(iterate_space(&t, 3, true).kind, IterateSpaceKind::M);
        let s = iterate_space(&t3(U::I1, U::I2, U::J2), 3, false);
        assert_eq!(s.kind, IterateSpaceKind::S);
        assert_eq!(s.basis.len(), 8);
        let mut masks: Vec<u32> = s.masks().iter().map(|m| m.0).collect();
        masks.sort();
        assert_eq!(masks, (0..8).collect::<Vec<_>>());
        assert_eq!(
            iterate_space(&t3(U::I1, U::I2, U::J1), 3, false).kind,
            IterateSpaceKind::M
        );
    }

    #[test]
    fn classify_examples() {
        let c = classify(&t3(U::ONE, U::J1, U::J2), 2, 0.25).unwrap();
        assert_eq!(c.case, SliceCase::Even);
        assert_eq!(c.squares, [Sign::Plus; 3]);
        assert_eq!(c.representative, t3(U::ONE, U::J1, U::J2));

        let c = classify(&t3(U::I1, U::I2, U::I3), 2, 0.25).unwrap();
        assert_eq!(c.squares, [Sign::Minus; 3]);
        assert_eq!(c.representative, t3(U::I1, U::I2, U::I3));

        let c = classify(&t3(U::J1, U::J2, U::J3), 3, 0.25).unwrap();
        assert_eq!(c.case, SliceCase::OddCClosed);
        assert_eq!(c.representative, t3(U::J1, U::J2, U::J3));

        let t = SliceTriple::new(4, [U(0b0011), U(0b0101), U(0b1001)]).unwrap();
        let c = classify(&t, 3, 0.25).unwrap();
        assert_eq!(c.case, SliceCase::OddCOpen);
        assert_eq!(c.squares, [Sign::Plus; 3]);
        assert_eq!(c.representative, t);
        // no open all-hyperbolic triple exists at order 3
        assert!(all_triples(3)
            .unwrap()
            .iter()
            .all(|t| classify(t, 3, 0.25).unwrap().key() != c.key()));
    }

    #[test]
    fn classify_rejects_bad_parameters() {
        let t = t3(U::ONE, U::I1, U::I2);
        let mut coeffs = vec![0.0; 8];
        coeffs[0] = 0.25;
        coeffs[1] = 0.1;
        let c = Multicomplex::from_coeffs(3, coeffs).unwrap();
        assert!(matches!(
            classify_multicomplex(&t, 3, &c),
            Err(Error::NonRealParameter)
        ));
        assert!(classify_multicomplex(&t, 3, &Multicomplex::real(3, 0.25).unwrap()).is_ok());
        assert!(classify(&t, 1, 0.0).is_err());
        assert!(classify(&t, 2, f64::NAN).is_err());
    }

    #[test]
    fn counts_small() {
        assert_eq!(class_count(3, 2, 0.25).unwrap(), 4);
        assert_eq!(class_count(3, 3, 0.0).unwrap(), 4);
        assert_eq!(class_count(3, 3, 0.25).unwrap(), 8);
        assert_eq!(class_count(4, 3, 0.25).unwrap(), 9);
        assert!(class_count(2, 2, 0.0).is_err());
    }

    #[test]
    fn phi_identity_and_mismatch() {
        let t = t3(U::ONE, U::I1, U::J1);
        let phi = build_phi(&t, &t, 2, 0.25).unwrap();
        assert_eq!(phi.source_basis, phi.target_basis);
        assert_eq!(phi.axis_images, t.units().map(SignedUnit::positive));
        assert!(phi.is_multiplicative());
        assert!(matches!(
            build_phi(&t, &t3(U::I1, U::I2, U::I3), 2, 0.25),
            Err(Error::ClassMismatch { .. })
        ));
    }

    #[test]
    fn phi_even_example() {
        let src = t3(U::ONE, U::I1, U::J1);
        let dst = t3(U::ONE, U::I2, U::J3);
        let phi = build_phi(&src, &dst, 2, 0.25).unwrap();
        assert_eq!(phi.kind, IterateSpaceKind::L);
        assert_eq!(phi.target_basis[0], SignedUnit::positive(U::ONE));
        // i1 j1 -> i2 j3
        assert_eq!(phi.source_basis[3], U::I1.times(U::J1));
        assert_eq!(phi.target_basis[3], U::I2.times(U::J3));
        assert!(phi.is_multiplicative());
    }

    #[test]
    fn phi_odd_closed_example() {
        let src = t3(U::I1, U::I2, U::J1);
        let dst = t3(U::I1, U::I3, U::J2);
        let phi = build_phi(&src, &dst, 3, 0.25).unwrap();
        assert_eq!(phi.kind, IterateSpaceKind::M);
        assert_eq!(phi.axis_images, dst.units().map(SignedUnit::positive));
        assert!(phi.is_multiplicative());

        // i1 i4 = -j3: the product of the three units has the opposite sign,
        // so one axis is reflected
        let other = t3(U::I1, U::I4, U::J3);
        let phi = build_phi(&src, &other, 3, 0.25).unwrap();
        assert!(phi.axis_images.iter().any(|u| u.sign == Sign::Minus));
        assert!(phi.is_multiplicative());
    }

    #[test]
    fn phi_apply_is_signed_reindexing() {
        let src = t3(U::I1, U::I2, U::J1);
        let dst = t3(U::I1, U::I4, U::J3);
        let phi = build_phi(&src, &dst, 3, 0.25).unwrap();
        let z = Multicomplex::from_coeffs(3, vec![0.5, 1.0, -2.0, 3.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let w = phi.apply(&z).unwrap();
        assert_eq!(w.norm(), z.norm());
        let outside = Multicomplex::unit(3, U::I3).unwrap();
        assert!(phi.apply(&outside).is_err());
    }

    #[test]
    fn report_structure() {
        let r = classification_report(3, 3, 0.25).unwrap();
        assert_eq!(r.class_count, 8);
        assert_eq!(r.triples, 56);
        assert!(r.partition_ok && r.permutation_invariant && r.representatives_fixed);
        assert_eq!(r.classes.iter().map(|c| c.members).sum::<usize>(), 56);
        assert_eq!(
            r.classes.iter().filter(|c| !c.alternate_labels.is_empty()).count(),
            1
        );
    }
}
