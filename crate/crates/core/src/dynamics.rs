//! Escape-time iteration of `f_c(ζ) = ζ^p + c` over `MC(n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multicomplex::{pow_in_place, Multicomplex};

/// Largest iteration cutoff; escape codes are stored as `u16` with `0xFFFF`
/// reserved for bounded orbits.
pub const MAX_ITER_LIMIT: u32 = 65534;

pub const DEFAULT_MAX_ITER: u32 = 100;

/// `R = max(‖c‖, 2^{1/(p-1)})`. Any orbit leaving the closed ball of radius
/// `R` diverges.
pub fn escape_radius(p: u32, c: &Multicomplex) -> Result<f64> {
    if p < 2 {
        return Err(Error::PowerOutOfRange { got: p, min: 2 });
    }
    Ok(c.norm().max(2f64.powf(1.0 / f64::from(p - 1))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsParams {
    power: u32,
    c: Multicomplex,
    max_iter: u32,
    escape_radius: f64,
}

impl DynamicsParams {
    pub fn new(power: u32, c: Multicomplex, max_iter: u32) -> Result<Self> {
        let escape_radius = escape_radius(power, &c)?;
        if max_iter == 0 || max_iter > MAX_ITER_LIMIT {
            return Err(Error::IterationsOutOfRange {
                got: max_iter,
                max: MAX_ITER_LIMIT,
            });
        }
        Ok(DynamicsParams {
            power,
            c,
            max_iter,
            escape_radius,
        })
    }

    /// Parameters with a real `c` embedded at the given order.
    pub fn real(order: u32, power: u32, c: f64, max_iter: u32) -> Result<Self> {
        Self::new(power, Multicomplex::real(order, c)?, max_iter)
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn c(&self) -> &Multicomplex {
        &self.c
    }

    pub fn order(&self) -> u32 {
        self.c.order()
    }

    pub fn max_iter(&self) -> u32 {
        self.max_iter
    }

    pub fn escape_radius(&self) -> f64 {
        self.escape_radius
    }

    pub fn with_max_iter(&self, max_iter: u32) -> Result<Self> {
        Self::new(self.power, self.c.clone(), max_iter)
    }

    fn check_point(&self, z: &Multicomplex) -> Result<()> {
        if z.order() != self.c.order() {
            return Err(Error::OrderMismatch {
                left: z.order(),
                right: self.c.order(),
            });
        }
        Ok(())
    }
}

/// Outcome of the escape test at cutoff `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EscapeResult {
    /// All iterates `1..=N` stayed within the escape radius.
    Bounded,
    /// First iterate `m` (1-based) whose norm exceeded the escape radius.
    Escaped(u32),
}

impl EscapeResult {
    pub fn escaped(self) -> bool {
        matches!(self, EscapeResult::Escaped(_))
    }

    pub fn escape_iter(self) -> Option<u32> {
        match self {
            EscapeResult::Escaped(m) => Some(m),
            EscapeResult::Bounded => None,
        }
    }
}

/// Reusable escape-time evaluator. Holds the squared radius and a scratch
/// buffer so the per-point loop does not allocate.
#[derive(Clone, Debug)]
pub struct EscapeKernel<'a> {
    params: &'a DynamicsParams,
    radius_sqr: f64,
    buf: Vec<f64>,
}

impl<'a> EscapeKernel<'a> {
    pub fn new(params: &'a DynamicsParams) -> Self {
        EscapeKernel {
            params,
            radius_sqr: params.escape_radius * params.escape_radius,
            buf: vec![0.0; params.c.coeffs().len()],
        }
    }

    /// Escape time of the point whose coefficients are `start`.
    pub fn run(&mut self, start: &[f64]) -> EscapeResult {
        debug_assert_eq!(start.len(), self.buf.len());
        self.buf.copy_from_slice(start);
        let c = self.params.c.coeffs();
        for m in 1..=self.params.max_iter {
            step(&mut self.buf, self.params.power, c);
            let r2: f64 = self.buf.iter().map(|x| x * x).sum();
            // NaN fails every comparison, so test "not within" explicitly
            if !(r2 <= self.radius_sqr) {
                return EscapeResult::Escaped(m);
            }
        }
        EscapeResult::Bounded
    }
}

#[inline]
fn step(buf: &mut [f64], power: u32, c: &[f64]) {
    pow_in_place(buf, power);
    for (x, ci) in buf.iter_mut().zip(c) {
        *x += ci;
    }
}

/// `f_c(ζ) = ζ^p + c`.
pub fn iterate_once(z: &Multicomplex, params: &DynamicsParams) -> Result<Multicomplex> {
    params.check_point(z)?;
    let mut buf = z.coeffs().to_vec();
    step(&mut buf, params.power, params.c.coeffs());
    Ok(Multicomplex::from_raw(z.order(), buf))
}

/// The first `count` iterates `f_c^1(ζ), …, f_c^count(ζ)`.
pub fn orbit(z: &Multicomplex, params: &DynamicsParams, count: usize) -> Result<Vec<Multicomplex>> {
    params.check_point(z)?;
    let mut out = Vec::with_capacity(count);
    let mut cur = z.clone();
    for _ in 0..count {
        cur = iterate_once(&cur, params)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// First `m <= N` with `‖f_c^m(ζ)‖ > R`. Non-finite iterates count as escaped.
pub fn escape_time(z: &Multicomplex, params: &DynamicsParams) -> Result<EscapeResult> {
    params.check_point(z)?;
    Ok(EscapeKernel::new(params).run(z.coeffs()))
}

/// Bounded for all `N` iterates. Exact when it returns `false`.
pub fn is_member(z: &Multicomplex, params: &DynamicsParams) -> Result<bool> {
    Ok(!escape_time(z, params)?.escaped())
}

/// Membership decided on the two idempotent components at order `n - 1`,
/// each with its own parameter and escape radius, same cutoff.
pub fn membership_via_decomposition(z: &Multicomplex, params: &DynamicsParams) -> Result<bool> {
    params.check_point(z)?;
    if z.order() < 2 {
        return Err(Error::OrderOutOfRange(z.order(), "2..=8"));
    }
    let zs = z.split()?;
    let cs = params.c.split()?;
    let first = DynamicsParams::new(params.power, cs.e_part, params.max_iter)?;
    let second = DynamicsParams::new(params.power, cs.e_conj_part, params.max_iter)?;
    Ok(is_member(&zs.e_part, &first)? && is_member(&zs.e_conj_part, &second)?)
}
