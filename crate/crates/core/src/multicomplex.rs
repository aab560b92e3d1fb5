//! Arithmetic in `MC(n)`.
//!
//! Numbers are stored as flat arrays of `2^n` real coefficients indexed by
//! unit mask. The recursive structure `η = η1 + η2 i_n` only appears inside
//! the idempotent kernels: `η1` is the lower half of the array and `η2` the
//! upper half.

use std::fmt;

use crate::error::{Error, Result};
use crate::slices::SliceTriple;
use crate::units::{check_order, unit_product, Sign, UnitMask};

const STACK_LEN: usize = 32;

/// A multicomplex number of order `n` (`2^n` real coefficients).
///
/// Coefficients supplied by callers must be finite. Arithmetic results are not
/// re-validated, so an overflowing orbit can carry infinities or NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct Multicomplex {
    order: u32,
    coeffs: Vec<f64>,
}

/// The pair `(η_γ, η_γ†)` with `η = η_γ γ_n + η_γ† γ_n†`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdempotentSplit {
    pub e_part: Multicomplex,
    pub e_conj_part: Multicomplex,
}

impl Multicomplex {
    pub fn zero(order: u32) -> Result<Self> {
        check_order(order, 0)?;
        Ok(Multicomplex {
            order,
            coeffs: vec![0.0; 1 << order],
        })
    }

    pub fn real(order: u32, value: f64) -> Result<Self> {
        let mut z = Self::zero(order)?;
        if !value.is_finite() {
            return Err(Error::NonFinite(0));
        }
        z.coeffs[0] = value;
        Ok(z)
    }

    pub fn one(order: u32) -> Result<Self> {
        Self::real(order, 1.0)
    }

    /// The basis element `u` of `I(order)`.
    pub fn unit(order: u32, u: UnitMask) -> Result<Self> {
        let mut z = Self::zero(order)?;
        if !u.is_valid_for(order) {
            return Err(Error::InvalidMask { mask: u.0, order });
        }
        z.coeffs[u.index()] = 1.0;
        Ok(z)
    }

    pub fn from_coeffs(order: u32, coeffs: Vec<f64>) -> Result<Self> {
        check_order(order, 0)?;
        let expected = 1usize << order;
        if coeffs.len() != expected {
            return Err(Error::CoefficientCount {
                order,
                got: coeffs.len(),
                expected,
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Multicomplex { order, coeffs })
    }

    /// Unchecked constructor for kernel output.
    pub(crate) fn from_raw(order: u32, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), 1 << order);
        Multicomplex { order, coeffs }
    }

    /// `γ_n = (1 + i_{n-1} i_n) / 2`.
    pub fn gamma(order: u32) -> Result<Self> {
        Self::idempotent_basis(order, 0.5)
    }

    /// `γ_n† = (1 - i_{n-1} i_n) / 2`.
    pub fn gamma_conj(order: u32) -> Result<Self> {
        Self::idempotent_basis(order, -0.5)
    }

    fn idempotent_basis(order: u32, hyperbolic: f64) -> Result<Self> {
        check_order(order, 2)?;
        let mut z = Self::zero(order)?;
        z.coeffs[0] = 0.5;
        z.coeffs[(0b11 << (order - 2)) as usize] = hyperbolic;
        Ok(z)
    }

    /// `x u1 + y u2 + z u3` for the units of `t`.
    pub fn from_slice_point(x: f64, y: f64, z: f64, t: &SliceTriple) -> Self {
        let mut out = vec![0.0; 1 << t.order()];
        let [u1, u2, u3] = t.units();
        out[u1.index()] = x;
        out[u2.index()] = y;
        out[u3.index()] = z;
        Multicomplex::from_raw(t.order(), out)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, u: UnitMask) -> f64 {
        self.coeffs[u.index()]
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// True when every non-real coefficient is zero.
    pub fn is_real(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    fn check_same_order(&self, other: &Multicomplex) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Multicomplex) -> Result<Multicomplex> {
        self.check_same_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Multicomplex::from_raw(self.order, coeffs))
    }

    pub fn sub(&self, other: &Multicomplex) -> Result<Multicomplex> {
        self.check_same_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Multicomplex::from_raw(self.order, coeffs))
    }

    pub fn scale(&self, k: f64) -> Multicomplex {
        Multicomplex::from_raw(self.order, self.coeffs.iter().map(|c| c * k).collect())
    }

    /// The ring product by signed convolution over all mask pairs, `O(4^n)`.
    pub fn mul_direct(&self, other: &Multicomplex) -> Result<Multicomplex> {
        self.check_same_order(other)?;
        let mut out = vec![0.0; self.coeffs.len()];
        mul_direct_into(&self.coeffs, &other.coeffs, &mut out);
        Ok(Multicomplex::from_raw(self.order, out))
    }

    /// The ring product computed componentwise in the idempotent
    /// representation, `O(n 2^n)`.
    pub fn mul_idempotent(&self, other: &Multicomplex) -> Result<Multicomplex> {
        self.check_same_order(other)?;
        if self.order <= 1 {
            return self.mul_direct(other);
        }
        let len = self.coeffs.len();
        let mut stack = [0.0; STACK_LEN];
        let mut heap = Vec::new();
        let b = if len <= STACK_LEN {
            &mut stack[..len]
        } else {
            heap.resize(len, 0.0);
            &mut heap[..]
        };
        b.copy_from_slice(&other.coeffs);
        let mut a = self.coeffs.clone();
        to_idempotent(&mut a);
        to_idempotent(b);
        let scale = idempotent_scale(len);
        for (x, y) in a.chunks_exact_mut(2).zip(b.chunks_exact(2)) {
            let (re, im) = cmul((x[0], x[1]), (y[0], y[1]));
            x[0] = re * scale;
            x[1] = im * scale;
        }
        from_idempotent_unscaled(&mut a);
        Ok(Multicomplex::from_raw(self.order, a))
    }

    /// Default product: idempotent for `n >= 2`, direct otherwise.
    pub fn mul(&self, other: &Multicomplex) -> Result<Multicomplex> {
        self.mul_idempotent(other)
    }

    /// `self^m` by repeated squaring of each idempotent component.
    pub fn pow(&self, m: u32) -> Result<Multicomplex> {
        if m < 1 {
            return Err(Error::ExponentOutOfRange(m));
        }
        let mut buf = self.coeffs.clone();
        pow_in_place(&mut buf, m);
        Ok(Multicomplex::from_raw(self.order, buf))
    }

    pub fn split(&self) -> Result<IdempotentSplit> {
        check_order(self.order, 2)?;
        let mut buf = self.coeffs.clone();
        split_level(&mut buf);
        let half = buf.split_off(buf.len() / 2);
        Ok(IdempotentSplit {
            e_part: Multicomplex::from_raw(self.order - 1, buf),
            e_conj_part: Multicomplex::from_raw(self.order - 1, half),
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `‖η‖_n = sqrt(‖η1‖²_{n-1} + ‖η2‖²_{n-1})` with `‖a + b i1‖_1 = sqrt(a² + b²)`.
    pub fn norm_recursive(&self) -> f64 {
        fn rec(c: &[f64]) -> f64 {
            match c.len() {
                1 => c[0].abs(),
                2 => (c[0] * c[0] + c[1] * c[1]).sqrt(),
                len => {
                    let (lo, hi) = c.split_at(len / 2);
                    let (a, b) = (rec(lo), rec(hi));
                    (a * a + b * b).sqrt()
                }
            }
        }
        rec(&self.coeffs)
    }

    /// `‖η‖_n = sqrt((‖η_γ‖² + ‖η_γ†‖²) / 2)`, applied down to order 1.
    pub fn norm_idempotent(&self) -> f64 {
        if self.order <= 1 {
            return self.norm();
        }
        let s = self.split().expect("order >= 2");
        let (a, b) = (s.e_part.norm_idempotent(), s.e_conj_part.norm_idempotent());
        ((a * a + b * b) / 2.0).sqrt()
    }
}

impl IdempotentSplit {
    /// `η_γ γ + η_γ† γ†`.
    pub fn join(&self) -> Result<Multicomplex> {
        self.e_part.check_same_order(&self.e_conj_part)?;
        check_order(self.e_part.order + 1, 2)?;
        let mut buf = Vec::with_capacity(2 * self.e_part.coeffs.len());
        buf.extend_from_slice(&self.e_part.coeffs);
        buf.extend_from_slice(&self.e_conj_part.coeffs);
        join_level(&mut buf);
        Ok(Multicomplex::from_raw(self.e_part.order + 1, buf))
    }
}

pub fn join(s: &IdempotentSplit) -> Result<Multicomplex> {
    s.join()
}

impl fmt::Display for Multicomplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let unit = UnitMask(m as u32);
            let mag = c.abs();
            if first {
                if c < 0.0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
            }
            first = false;
            if m == 0 {
                write!(f, "{mag}")?;
            } else if unit.0 < 8 {
                write!(f, "{mag}{unit}")?;
            } else {
                write!(f, "{mag}u[{}]", unit.0)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

pub(crate) fn mul_direct_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|c| *c = 0.0);
    for (p, &ap) in a.iter().enumerate() {
        for (q, &bq) in b.iter().enumerate() {
            let t = ap * bq;
            let s = unit_product(UnitMask(p as u32), UnitMask(q as u32));
            match s.sign {
                Sign::Plus => out[p ^ q] += t,
                Sign::Minus => out[p ^ q] -= t,
            }
        }
    }
}

/// One idempotent split of an order-`k` buffer (`k >= 2`), in place: the
/// lower half becomes `η1 - η2 i_{k-1}` and the upper half `η1 + η2 i_{k-1}`.
#[inline]
pub(crate) fn split_level(buf: &mut [f64]) {
    let (a0, a1, b0, b1) = quarters(buf);
    for r in 0..a0.len() {
        let (x0, x1, y0, y1) = (a0[r], a1[r], b0[r], b1[r]);
        a0[r] = x0 + y1;
        a1[r] = x1 - y0;
        b0[r] = x0 - y1;
        b1[r] = x1 + y0;
    }
}

/// Inverse of [`split_level`].
#[inline]
pub(crate) fn join_level(buf: &mut [f64]) {
    join_level_unscaled(buf);
    buf.iter_mut().for_each(|x| *x *= 0.5);
}

/// [`join_level`] times two.
#[inline]
fn join_level_unscaled(buf: &mut [f64]) {
    let (e0, e1, f0, f1) = quarters(buf);
    for r in 0..e0.len() {
        let (x0, x1, y0, y1) = (e0[r], e1[r], f0[r], f1[r]);
        e0[r] = x0 + y0;
        e1[r] = x1 + y1;
        f0[r] = y1 - x1;
        f1[r] = x0 - y0;
    }
}

#[inline]
fn quarters(buf: &mut [f64]) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64]) {
    let q = buf.len() / 4;
    let (a0, rest) = buf.split_at_mut(q);
    let (a1, rest) = rest.split_at_mut(q);
    let (b0, b1) = rest.split_at_mut(q);
    (a0, &mut a1[..q], &mut b0[..q], &mut b1[..q])
}

/// Splits recursively down to `2^{n-1}` complex components, laid out as
/// consecutive `(re, im)` pairs.
pub(crate) fn to_idempotent(buf: &mut [f64]) {
    let mut size = buf.len();
    while size > 4 {
        buf.chunks_exact_mut(size).for_each(split_level);
        size /= 2;
    }
    for c in buf.chunks_exact_mut(4) {
        let (x0, x1, y0, y1) = (c[0], c[1], c[2], c[3]);
        c[0] = x0 + y1;
        c[1] = x1 - y0;
        c[2] = x0 - y1;
        c[3] = x1 + y0;
    }
}

pub(crate) fn from_idempotent(buf: &mut [f64]) {
    let scale = idempotent_scale(buf.len());
    buf.iter_mut().for_each(|x| *x *= scale);
    from_idempotent_unscaled(buf);
}

/// `from_idempotent` without the `2^{-(n-1)}` factor, which callers fold
/// into an earlier pass. Scaling by a power of two is exact.
fn from_idempotent_unscaled(buf: &mut [f64]) {
    for c in buf.chunks_exact_mut(4) {
        let (x0, x1, y0, y1) = (c[0], c[1], c[2], c[3]);
        c[0] = x0 + y0;
        c[1] = x1 + y1;
        c[2] = y1 - x1;
        c[3] = x0 - y0;
    }
    let mut size = 8;
    while size <= buf.len() {
        buf.chunks_exact_mut(size).for_each(join_level_unscaled);
        size *= 2;
    }
}

fn idempotent_scale(len: usize) -> f64 {
    1.0 / (len / 2) as f64
}

fn cpow(base: (f64, f64), mut e: u32) -> (f64, f64) {
    let mut sq = base;
    let mut acc: Option<(f64, f64)> = None;
    loop {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => sq,
                Some(a) => cmul(a, sq),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        sq = cmul(sq, sq);
    }
    acc.expect("exponent >= 1")
}

fn rpow(base: f64, mut e: u32) -> f64 {
    let mut sq = base;
    let mut acc: Option<f64> = None;
    loop {
        if e & 1 == 1 {
            acc = Some(acc.map_or(sq, |a| a * sq));
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        sq *= sq;
    }
    acc.expect("exponent >= 1")
}

/// `buf <- buf^m` for `m >= 1`, any order.
pub(crate) fn pow_in_place(buf: &mut [f64], m: u32) {
    if buf.len() == 1 {
        buf[0] = rpow(buf[0], m);
        return;
    }
    to_idempotent(buf);
    for z in buf.chunks_exact_mut(2) {
        let (re, im) = cpow((z[0], z[1]), m);
        z[0] = re;
        z[1] = im;
    }
    from_idempotent(buf);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(order: u32, c: &[f64]) -> Multicomplex {
        Multicomplex::from_coeffs(order, c.to_vec()).unwrap()
    }

    #[test]
    fn addition() {
        let a = mc(1, &[1.0, 1.0]);
        let b = mc(1, &[1.0, -1.0]);
        assert_eq!(a.add(&b).unwrap(), mc(1, &[2.0, 0.0]));
        let g = Multicomplex::gamma(2).unwrap();
        let gc = Multicomplex::gamma_conj(2).unwrap();
        assert_eq!(g.add(&gc).unwrap(), Multicomplex::one(2).unwrap());
        let z = Multicomplex::zero(1).unwrap();
        assert_eq!(a.add(&z).unwrap(), a);
        assert!(matches!(
            a.add(&g),
            Err(Error::OrderMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn products_both_paths() {
        let i1 = Multicomplex::unit(2, UnitMask::I1).unwrap();
        let i2 = Multicomplex::unit(2, UnitMask::I2).unwrap();
        let j1 = Multicomplex::unit(2, UnitMask::J1).unwrap();
        let g = Multicomplex::gamma(2).unwrap();
        let gc = Multicomplex::gamma_conj(2).unwrap();
        for mul in [Multicomplex::mul_direct, Multicomplex::mul_idempotent] {
            assert_eq!(mul(&i1, &i2).unwrap(), j1);
            assert!(mul(&g, &gc).unwrap().is_zero());
            assert_eq!(mul(&g, &g).unwrap(), g);
        }
    }

    #[test]
    fn order_one_is_complex_product() {
        let a = mc(1, &[1.5, -2.0]);
        let b = mc(1, &[0.25, 3.0]);
        let expected = mc(1, &[1.5 * 0.25 + 6.0, 4.5 - 0.5]);
        assert_eq!(a.mul_idempotent(&b).unwrap(), expected);
        assert_eq!(a.mul_direct(&b).unwrap(), expected);
    }

    #[test]
    fn powers() {
        let j1 = Multicomplex::unit(2, UnitMask::J1).unwrap();
        assert_eq!(j1.pow(2).unwrap(), Multicomplex::one(2).unwrap());
        let i1 = Multicomplex::unit(3, UnitMask::I1).unwrap();
        assert_eq!(i1.pow(4).unwrap(), Multicomplex::one(3).unwrap());
        assert!(matches!(i1.pow(0), Err(Error::ExponentOutOfRange(0))));
        assert_eq!(mc(0, &[-1.5]).pow(3).unwrap(), mc(0, &[-3.375]));
    }

    #[test]
    fn split_examples() {
        let r = Multicomplex::real(3, 2.5).unwrap();
        let s = r.split().unwrap();
        assert_eq!(s.e_part, Multicomplex::real(2, 2.5).unwrap());
        assert_eq!(s.e_conj_part, Multicomplex::real(2, 2.5).unwrap());
        assert_eq!(s.join().unwrap(), r);

        let s = Multicomplex::gamma(2).unwrap().split().unwrap();
        assert_eq!(s.e_part, mc(1, &[1.0, 0.0]));
        assert_eq!(s.e_conj_part, mc(1, &[0.0, 0.0]));
        assert_eq!(s.join().unwrap(), Multicomplex::gamma(2).unwrap());

        let s = Multicomplex::unit(2, UnitMask::I2).unwrap().split().unwrap();
        assert_eq!(s.e_part, mc(1, &[0.0, -1.0]));
        assert_eq!(s.e_conj_part, mc(1, &[0.0, 1.0]));

        assert!(mc(1, &[1.0, 0.0]).split().is_err());
        let bad = IdempotentSplit {
            e_part: Multicomplex::zero(1).unwrap(),
            e_conj_part: Multicomplex::zero(2).unwrap(),
        };
        assert!(bad.join().is_err());
    }

    #[test]
    fn norm_examples() {
        let a = mc(1, &[1.0, 1.0]);
        assert!((a.norm() - 2f64.sqrt()).abs() < 1e-15);
        let g = Multicomplex::gamma(2).unwrap();
        let h = 0.5f64.sqrt();
        assert!((g.norm() - h).abs() < 1e-15);
        assert!((g.norm_idempotent() - h).abs() < 1e-15);
        assert!((g.norm_recursive() - h).abs() < 1e-15);
        assert_eq!(Multicomplex::zero(4).unwrap().norm(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Multicomplex::from_coeffs(2, vec![0.0; 3]),
            Err(Error::CoefficientCount { .. })
        ));
        assert!(matches!(
            Multicomplex::from_coeffs(1, vec![0.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
        assert!(Multicomplex::unit(2, UnitMask(4)).is_err());
        assert!(Multicomplex::gamma(1).is_err());
    }

    #[test]
    fn display() {
        let z = mc(3, &[1.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.5, 0.0]);
        assert_eq!(z.to_string(), "1 - 2i2 + 0.5j3");
        assert_eq!(Multicomplex::zero(2).unwrap().to_string(), "0");
    }
}
