//! Oracle checks emitted as JSON-lines reports.

use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bench::random_multicomplex;
use crate::dynamics::{escape_time, is_member, membership_via_decomposition, DynamicsParams};
use crate::error::{Error, Result};
use crate::multicomplex::Multicomplex;
use crate::slices::{
    class_members, classification_report, escape_equivalence_check, iterate_span_check,
    SliceTriple,
};
use crate::units::{check_order, enumerate_units, UnitMask, UnitNature};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Relative tolerance of floating-point agreement checks.
pub const REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<u32>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: ReportParams,
    pub expected: Value,
    pub observed: Value,
    pub pass: bool,
    pub max_error: f64,
}

impl VerificationReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if let Some(n) = self.params.n {
            parts.push(format!("n={n}"));
        }
        if let Some(p) = self.params.p {
            parts.push(format!("p={p}"));
        }
        if let Some(c) = self.params.c {
            parts.push(format!("c={c}"));
        }
        format!(
            "{} {} [{}] max_error={:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            parts.join(" "),
            self.max_error
        )
    }
}

fn params(n: u32, seed: u64) -> ReportParams {
    ReportParams {
        n: Some(n),
        seed,
        ..Default::default()
    }
}

fn rel_diff(a: &Multicomplex, b: &Multicomplex) -> f64 {
    let diff: f64 = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = a.norm().max(b.norm());
    if diff == 0.0 {
        0.0
    } else if scale == 0.0 || !diff.is_finite() {
        f64::INFINITY
    } else {
        diff / scale
    }
}

fn integer_multicomplex(rng: &mut impl Rng, n: u32) -> Multicomplex {
    let coeffs = (0..1usize << n).map(|_| f64::from(rng.gen_range(-4i32..=4))).collect();
    Multicomplex::from_coeffs(n, coeffs).expect("finite")
}

/// Commutativity, associativity and distributivity of the default product.
pub fn verify_ring_axioms(n: u32, trials: usize, seed: u64) -> Result<VerificationReport> {
    check_order(n, 1)?;
    if n > 6 {
        return Err(Error::OrderOutOfRange(n, "1..=6"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0f64;
    for _ in 0..trials {
        let [a, b, c] = std::array::from_fn(|_| random_multicomplex(&mut rng, n));
        let ab = a.mul(&b)?;
        max_error = max_error.max(rel_diff(&ab, &b.mul(&a)?));
        max_error = max_error.max(rel_diff(&ab.mul(&c)?, &a.mul(&b.mul(&c)?)?));
        max_error = max_error.max(rel_diff(&a.mul(&b.add(&c)?)?, &ab.add(&a.mul(&c)?)?));
    }
    let mut integer_error = 0.0f64;
    for _ in 0..trials.min(100) {
        let [a, b, c] = std::array::from_fn(|_| integer_multicomplex(&mut rng, n));
        integer_error = integer_error.max(rel_diff(&a.mul_direct(&b)?.mul_direct(&c)?, &a.mul_direct(&b.mul_direct(&c)?)?));
        integer_error = integer_error.max(rel_diff(&a.mul(&b)?, &b.mul(&a)?));
    }
    Ok(VerificationReport {
        check: "ring_axioms".into(),
        params: params(n, seed),
        expected: json!({ "relative_residual_max": REL_TOL, "integer_residual": 0.0 }),
        observed: json!({ "relative_residual": max_error, "integer_residual": integer_error, "trials": trials }),
        pass: max_error <= REL_TOL && integer_error == 0.0,
        max_error,
    })
}

/// Direct against idempotent multiplication on random pairs, on every pair
/// of basis units, and on a zero operand.
pub fn verify_mul_paths(n: u32, trials: usize, seed: u64) -> Result<VerificationReport> {
    check_order(n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0f64;
    for _ in 0..trials {
        let a = random_multicomplex(&mut rng, n);
        let b = random_multicomplex(&mut rng, n);
        max_error = max_error.max(rel_diff(&a.mul_direct(&b)?, &a.mul_idempotent(&b)?));
    }
    let mut basis_exact = true;
    if n <= 5 {
        for u in enumerate_units(n)? {
            for v in enumerate_units(n)? {
                let a = Multicomplex::unit(n, u)?;
                let b = Multicomplex::unit(n, v)?;
                basis_exact &= a.mul_direct(&b)? == a.mul_idempotent(&b)?;
            }
        }
    }
    let a = random_multicomplex(&mut rng, n);
    let z = Multicomplex::zero(n)?;
    let zero_exact = a.mul_direct(&z)?.is_zero() && a.mul_idempotent(&z)?.is_zero();
    Ok(VerificationReport {
        check: "mul_paths".into(),
        params: params(n, seed),
        expected: json!({ "relative_error_max": REL_TOL, "basis_exact": true, "zero_exact": true }),
        observed: json!({ "relative_error": max_error, "basis_exact": basis_exact, "zero_exact": zero_exact, "trials": trials }),
        pass: max_error <= REL_TOL && basis_exact && zero_exact,
        max_error,
    })
}

/// Coefficient, recursive and idempotent norms agree.
pub fn verify_norms(n: u32, trials: usize, seed: u64) -> Result<VerificationReport> {
    check_order(n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0f64;
    for _ in 0..trials {
        let a = random_multicomplex(&mut rng, n);
        let e = a.norm();
        for other in [a.norm_recursive(), a.norm_idempotent()] {
            max_error = max_error.max((e - other).abs() / e.max(f64::MIN_POSITIVE));
        }
    }
    Ok(VerificationReport {
        check: "norms".into(),
        params: params(n, seed),
        expected: json!({ "relative_error_max": REL_TOL }),
        observed: json!({ "relative_error": max_error, "trials": trials }),
        pass: max_error <= REL_TOL,
        max_error,
    })
}

/// Counts of real, imaginary and hyperbolic units against the closed forms.
pub fn verify_counts(n: u32) -> Result<VerificationReport> {
    let units = enumerate_units(n)?;
    let count = |k: UnitNature| units.iter().filter(|u| u.nature() == k).count();
    let observed = [
        count(UnitNature::Real),
        count(UnitNature::Imaginary),
        count(UnitNature::Hyperbolic),
    ];
    let half = 1usize << (n - 1);
    let expected = [1, half, half - 1];
    Ok(VerificationReport {
        check: "unit_counts".into(),
        params: params(n, 0),
        expected: json!(expected),
        observed: json!(observed),
        pass: observed == expected,
        max_error: 0.0,
    })
}

/// Class count expected from the main counting statement.
pub fn expected_class_count(n: u32, p: u32, c: f64) -> usize {
    if p % 2 == 0 || c == 0.0 {
        4
    } else if n == 3 {
        8
    } else {
        9
    }
}

/// Exhaustive classification of all triples with the structural self-checks.
pub fn verify_classification(n: u32, p: u32, c: f64) -> Result<VerificationReport> {
    let report = classification_report(n, p, c)?;
    let expected = expected_class_count(n, p, c);
    let pass = report.class_count == expected
        && report.partition_ok
        && report.permutation_invariant
        && report.representatives_fixed;
    Ok(VerificationReport {
        check: "classification".into(),
        params: ReportParams {
            n: Some(n),
            p: Some(p),
            c: Some(c),
            ..Default::default()
        },
        expected: json!({ "class_count": expected, "partition": true, "permutation_invariant": true, "representatives_fixed": true }),
        observed: serde_json::to_value(&report).expect("report serializes"),
        pass,
        max_error: 0.0,
    })
}

/// Every even-case class has a member built from units of `I(3)` only.
pub fn verify_tricomplex_sufficiency(n: u32, p: u32) -> Result<VerificationReport> {
    if p % 2 != 0 {
        return Err(Error::PowerOutOfRange { got: p, min: 2 });
    }
    let report = classification_report(n, p, 0.25)?;
    let missing: Vec<&str> = report
        .classes
        .iter()
        .filter(|c| !c.has_tricomplex_member)
        .map(|c| c.representative.as_str())
        .collect();
    Ok(VerificationReport {
        check: "even_tricomplex_sufficiency".into(),
        params: ReportParams {
            n: Some(n),
            p: Some(p),
            c: Some(0.25),
            ..Default::default()
        },
        expected: json!({ "classes_without_order3_member": 0 }),
        observed: json!({ "classes": report.class_count, "classes_without_order3_member": missing }),
        pass: missing.is_empty(),
        max_error: 0.0,
    })
}

/// Membership computed directly and through the idempotent split agree.
/// Points are drawn with coefficients uniform in `[-r, r]`, `r = R / 2^(n/2)`,
/// so their norms straddle the escape radius.
pub fn verify_decomposition(
    n: u32,
    p: u32,
    c: f64,
    trials: usize,
    max_iter: u32,
    seed: u64,
) -> Result<VerificationReport> {
    check_order(n, 2)?;
    let dp = DynamicsParams::real(n, p, c, max_iter)?;
    let r = dp.escape_radius() / f64::from(1u32 << n).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = 0;
    let mut members = 0;
    let mut points = Vec::with_capacity(trials + 2);
    points.push(Multicomplex::zero(n)?);
    points.push(Multicomplex::real(n, 2.0 * dp.escape_radius())?);
    for _ in 0..trials {
        let coeffs = (0..1usize << n).map(|_| rng.gen_range(-r..=r)).collect();
        points.push(Multicomplex::from_coeffs(n, coeffs)?);
    }
    for z in &points {
        let direct = is_member(z, &dp)?;
        members += usize::from(direct);
        if direct != membership_via_decomposition(z, &dp)? {
            disagreements += 1;
        }
    }
    Ok(VerificationReport {
        check: "decomposition".into(),
        params: ReportParams {
            n: Some(n),
            p: Some(p),
            c: Some(c),
            max_iter: Some(max_iter),
            seed,
        },
        expected: json!({ "disagreements": 0 }),
        observed: json!({ "disagreements": disagreements, "points": points.len(), "members": members }),
        pass: disagreements == 0,
        max_error: disagreements as f64,
    })
}

/// Same-class triples agree on escape iterations at corresponding points.
/// All member pairs are compared at order 3; above that each member is
/// compared with the first member of its class.
pub fn verify_escape_equivalence(
    n: u32,
    p: u32,
    c: f64,
    samples: usize,
    max_iter: u32,
    seed: u64,
) -> Result<VerificationReport> {
    let dp = DynamicsParams::real(n, p, c, max_iter)?;
    let groups = class_members(n, p, c)?;
    let mut pairs: Vec<(SliceTriple, SliceTriple)> = Vec::new();
    for (_, members) in &groups {
        if n == 3 {
            for (i, a) in members.iter().enumerate() {
                for b in &members[i + 1..] {
                    pairs.push((*a, *b));
                }
            }
        } else {
            pairs.extend(members.iter().skip(1).map(|b| (members[0], *b)));
        }
    }
    let reports = pairs
        .par_iter()
        .map(|(a, b)| escape_equivalence_check(a, b, &dp, samples, seed))
        .collect::<Result<Vec<_>>>()?;
    let failing: Vec<_> = reports.iter().filter(|r| !r.pass).take(5).cloned().collect();
    let agreements: usize = reports.iter().map(|r| r.agreements).sum();
    let total: usize = reports.iter().map(|r| r.samples).sum();
    let reflected = reports
        .iter()
        .filter(|r| r.axis_images.iter().any(|s| s.starts_with('-')))
        .count();
    Ok(VerificationReport {
        check: "escape_equivalence".into(),
        params: ReportParams {
            n: Some(n),
            p: Some(p),
            c: Some(c),
            max_iter: Some(max_iter),
            seed,
        },
        expected: json!({ "agreement": 1.0 }),
        observed: json!({
            "classes": groups.len(),
            "pairs": pairs.len(),
            "reflected_pairs": reflected,
            "samples": total,
            "agreements": agreements,
            "failing_pairs": failing,
        }),
        pass: agreements == total,
        max_error: (total - agreements) as f64,
    })
}

/// Containment and rank of iterates for the `L`, `M` and `S` cases on
/// `T(i1, i2, j2)`.
pub fn verify_iterate_spaces(seed: u64) -> Result<Vec<VerificationReport>> {
    let t = SliceTriple::new(3, [UnitMask::I1, UnitMask::I2, UnitMask::J2])?;
    [(2, 0.25, 4), (3, 0.0, 4), (3, 0.25, 8)]
        .into_iter()
        .map(|(p, c, dim)| {
            let r = iterate_span_check(&t, p, c, 20, seed)?;
            Ok(VerificationReport {
                check: "iterate_space".into(),
                params: ReportParams {
                    n: Some(3),
                    p: Some(p),
                    c: Some(c),
                    seed,
                    ..Default::default()
                },
                expected: json!({ "kind": format!("{:?}", r.kind), "rank": dim, "residual_max": crate::slices::SPAN_RESIDUAL_TOL }),
                observed: serde_json::to_value(&r).expect("report serializes"),
                pass: r.pass && r.expected_dimension == dim,
                max_error: r.max_residual,
            })
        })
        .collect()
}

/// Order-1 sanity: the unit disk for `z^2`, and the period-2 orbit of `1`
/// for `z^2 - 1`.
pub fn verify_complex_sanity(samples: usize, seed: u64) -> Result<VerificationReport> {
    let disk = DynamicsParams::real(1, 2, 0.0, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside_fail = 0;
    let mut outside_fail = 0;
    let mut worst_escape = 0;
    for i in 0..samples {
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let r_in = if i == 0 { 0.99 } else { rng.gen_range(0.0..=0.99) };
        let r_out = if i == 0 { 1.01 } else { rng.gen_range(1.01..=4.0) };
        let at = |r: f64| Multicomplex::from_coeffs(1, vec![r * theta.cos(), r * theta.sin()]);
        let z_in = at(r_in)?;
        let z_out = at(r_out)?;
        if z_in.norm() <= 0.99 && !is_member(&z_in, &disk)? {
            inside_fail += 1;
        }
        if z_out.norm() >= 1.01 {
            match escape_time(&z_out, &disk)?.escape_iter() {
                Some(m) if m <= 10 => worst_escape = worst_escape.max(m),
                _ => outside_fail += 1,
            }
        }
    }
    let basilica = DynamicsParams::real(1, 2, -1.0, 100)?;
    let periodic = is_member(&Multicomplex::real(1, 1.0)?, &basilica)?;
    Ok(VerificationReport {
        check: "complex_sanity".into(),
        params: ReportParams {
            n: Some(1),
            p: Some(2),
            max_iter: Some(64),
            seed,
            ..Default::default()
        },
        expected: json!({ "inside_failures": 0, "outside_failures": 0, "max_escape_iter": 10, "z1_member_for_c_minus_1": true }),
        observed: json!({ "inside_failures": inside_fail, "outside_failures": outside_fail, "max_escape_iter": worst_escape, "z1_member_for_c_minus_1": periodic, "samples": samples }),
        pass: inside_fail == 0 && outside_fail == 0 && periodic,
        max_error: (inside_fail + outside_fail) as f64,
    })
}

/// Named groups of checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    All,
    Ring,
    Mul,
    Norms,
    Counts,
    Classification,
    Decomposition,
    Equivalence,
    Spaces,
    Complex,
}

impl Suite {
    pub const NAMES: &'static str =
        "all, ring, mul, norms, counts, classification, decomposition, equivalence, spaces, complex";
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "all" => Suite::All,
            "ring" => Suite::Ring,
            "mul" => Suite::Mul,
            "norms" => Suite::Norms,
            "counts" => Suite::Counts,
            "classification" => Suite::Classification,
            "decomposition" => Suite::Decomposition,
            "equivalence" => Suite::Equivalence,
            "spaces" => Suite::Spaces,
            "complex" => Suite::Complex,
            _ => {
                return Err(Error::Format(format!(
                    "unknown suite {s:?} (expected one of: {})",
                    Suite::NAMES
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format!("{self:?}").to_ascii_lowercase())
    }
}

type Job = Box<dyn Fn() -> Result<Vec<VerificationReport>> + Send + Sync>;

fn one(f: impl Fn() -> Result<VerificationReport> + Send + Sync + 'static) -> Job {
    Box::new(move || f().map(|r| vec![r]))
}

fn jobs(suite: Suite, n_max: u32, seed: u64) -> Vec<Job> {
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut out: Vec<Job> = Vec::new();
    if wants(Suite::Counts) {
        for n in 1..=n_max.clamp(1, 6) {
            out.push(one(move || verify_counts(n)));
        }
    }
    if wants(Suite::Ring) {
        for n in 1..=n_max.clamp(1, 6) {
            out.push(one(move || verify_ring_axioms(n, 1000, seed)));
        }
    }
    if wants(Suite::Mul) {
        for n in 2..=n_max.clamp(2, 5) {
            out.push(one(move || verify_mul_paths(n, 1000, seed)));
        }
    }
    if wants(Suite::Norms) {
        for n in 1..=n_max.clamp(1, 5) {
            out.push(one(move || verify_norms(n, 1000, seed)));
        }
    }
    if wants(Suite::Classification) {
        for n in 3..=n_max.max(3) {
            for (p, c) in [(2, 0.25), (3, 0.0), (3, 0.25)] {
                out.push(one(move || verify_classification(n, p, c)));
            }
        }
        let n = n_max.max(3);
        out.push(one(move || verify_tricomplex_sufficiency(n, 2)));
    }
    if wants(Suite::Decomposition) {
        for (p, c) in [(2, 0.25), (3, 0.25), (3, 0.0)] {
            out.push(one(move || verify_decomposition(3, p, c, 200, 100, seed)));
        }
    }
    if wants(Suite::Equivalence) {
        for n in 3..=n_max.clamp(3, 4) {
            for (p, c) in [(2, 0.25), (3, 0.25), (3, 0.0)] {
                out.push(one(move || verify_escape_equivalence(n, p, c, 1000, 100, seed)));
            }
        }
    }
    if wants(Suite::Spaces) {
        out.push(Box::new(move || verify_iterate_spaces(seed)));
    }
    if wants(Suite::Complex) {
        out.push(one(move || verify_complex_sanity(1000, seed)));
    }
    out
}

/// Runs a suite. Classification goes up to `n_max`; the floating-point
/// suites cap the order at their own limits. Checks run in parallel and
/// come back in a fixed order.
pub fn run_suite(suite: Suite, n_max: u32, seed: u64) -> Result<Vec<VerificationReport>> {
    if !(3..=crate::units::MAX_ORDER).contains(&n_max) {
        return Err(Error::OrderOutOfRange(n_max, "3..=8"));
    }
    let results = jobs(suite, n_max, seed)
        .par_iter()
        .map(|job| job())
        .collect::<Result<Vec<_>>>()?;
    Ok(results.into_iter().flatten().collect())
}

/// Appends reports to a JSON-lines file.
pub fn append_jsonl(reports: &[VerificationReport], path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    for r in reports {
        writeln!(f, "{}", r.to_json_line()).map_err(io)?;
    }
    Ok(())
}
