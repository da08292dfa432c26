//! Exact polynomials and rational functions over `Q`, univariate in `z` or
//! with coefficients in `Q[λ]` (dense in both variables).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Q = BigRational;

/// Univariate polynomials in `z` with coefficients in `Q[λ]`.
pub type BiPoly = Polynomial<Polynomial<Q>>;

/// Coefficient domain for [`Polynomial`]: a commutative GCD domain with a
/// chosen normal form for associates.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `self / other` when the quotient exists in the ring.
    fn exact_div(&self, other: &Self) -> Option<Self>;
    /// Normalized greatest common divisor; zero only when both inputs are.
    fn gcd(&self, other: &Self) -> Self;
    /// The unit `u` such that `self / u` is in normal form (one for zero).
    fn unit_part(&self) -> Self;
    fn inverse(&self) -> Option<Self>;
}

impl Ring for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exact_div(&self, other: &Self) -> Option<Self> {
        if Zero::is_zero(other) {
            None
        } else {
            Some(self / other)
        }
    }
    /// `gcd(numerators) / lcm(denominators)`, so the content of a rational
    /// polynomial is the factor that makes it primitive over the integers.
    fn gcd(&self, other: &Self) -> Self {
        if Zero::is_zero(self) {
            return other.abs();
        }
        if Zero::is_zero(other) {
            return self.abs();
        }
        let num = self.numer().gcd(other.numer());
        let den = self.denom().lcm(other.denom());
        BigRational::new(num, den)
    }
    fn unit_part(&self) -> Self {
        if Zero::is_zero(self) {
            One::one()
        } else {
            self.clone()
        }
    }
    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Dense polynomial, coefficients by ascending power, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial<C> {
    coeffs: Vec<C>,
}

impl<C: Ring> Polynomial<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// The indeterminate `z`.
    pub fn var() -> Self {
        Self::new(vec![C::zero(), C::one()])
    }

    /// `c z^k`
    pub fn monomial(c: C, k: usize) -> Self {
        let mut coeffs = vec![C::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C {
        self.coeffs.last().cloned().unwrap_or_else(C::zero)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.coeffs.iter().map(|x| x.mul(c)).collect())
    }

    fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Polynomial { coeffs }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| {
                let mut acc = C::zero();
                for _ in 0..k {
                    acc = acc.add(c);
                }
                acc
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn eval(&self, x: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc.mul(x).add(c))
    }

    /// `self(inner(z))`
    pub fn compose(&self, inner: &Self) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * inner) + &Self::constant(c.clone()))
    }

    /// Division with remainder. The divisor's leading coefficient must be
    /// invertible in `C`.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let lead_inv = divisor.leading().inverse().ok_or_else(|| {
            Error::Domain("divisor leading coefficient is not invertible".into())
        })?;
        let dd = divisor.degree().unwrap();
        let mut rem = self.clone();
        let mut quot = vec![C::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = rem.leading().mul(&lead_inv);
            let term = Self::monomial(c.clone(), rd - dd);
            rem = &rem - &(&term * divisor);
            quot[rd - dd] = c;
        }
        Ok((Self::new(quot), rem))
    }

    /// Exact quotient over the coefficient ring, `None` if it does not exist.
    fn exact_quotient(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        let dd = divisor.degree().unwrap();
        let lead = divisor.leading();
        let mut rem = self.clone();
        let mut quot = vec![C::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                return None;
            }
            let c = rem.leading().exact_div(&lead)?;
            rem = &rem - &(&Self::monomial(c.clone(), rd - dd) * divisor);
            quot[rd - dd] = c;
        }
        Some(Self::new(quot))
    }

    /// Pseudo-remainder: `lc(b)^k · self mod b`, computed without division.
    fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.degree().expect("nonzero divisor");
        let lb = b.leading();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let lr = r.leading();
            r = &r.scale(&lb) - &b.shift(dr - db).scale(&lr);
        }
        r
    }

    /// Gcd of the coefficients.
    pub fn content(&self) -> C {
        self.coeffs
            .iter()
            .fold(C::zero(), |acc, c| acc.gcd(c))
    }

    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        Self::new(
            self.coeffs
                .iter()
                .map(|x| x.exact_div(&c).expect("content divides"))
                .collect(),
        )
    }

    /// Associate in normal form (e.g. monic over `Q`).
    pub fn normalized(&self) -> Self {
        let u = self.leading().unit_part();
        Self::new(
            self.coeffs
                .iter()
                .map(|x| x.exact_div(&u).expect("unit divides"))
                .collect(),
        )
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }
}

impl Polynomial<Q> {
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Q::from_integer(c.into())).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl BiPoly {
    /// Substitutes a value for `λ`.
    pub fn eval_lambda(&self, lambda: &Q) -> Polynomial<Q> {
        self.map(|c| c.eval(lambda))
    }

    /// The polynomial `λ` as a constant in `z`.
    pub fn lambda() -> Self {
        Polynomial::constant(Polynomial::var())
    }

    /// Lifts a polynomial in `z` with rational coefficients.
    pub fn from_z(p: &Polynomial<Q>) -> Self {
        p.map(|c| Polynomial::constant(c.clone()))
    }
}

impl<C: Ring> Ring for Polynomial<C> {
    fn zero() -> Self {
        Polynomial::zero()
    }
    fn one() -> Self {
        Polynomial::constant(C::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exact_div(&self, other: &Self) -> Option<Self> {
        self.exact_quotient(other)
    }
    /// Primitive polynomial remainder sequence.
    fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.normalized();
        }
        if other.is_zero() {
            return self.normalized();
        }
        let content = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part().scale(&content).normalized()
    }
    fn unit_part(&self) -> Self {
        Polynomial::constant(self.leading().unit_part())
    }
    fn inverse(&self) -> Option<Self> {
        match self.degree() {
            Some(0) => self.coeffs[0].inverse().map(Polynomial::constant),
            _ => None,
        }
    }
}

impl<C: Ring> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                    (Some(a), Some(b)) => a.add(b),
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => unreachable!(),
                })
                .collect(),
        )
    }
}

impl<C: Ring> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        self + &(-rhs)
    }
}

impl<C: Ring> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }
}

impl<C: Ring> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Polynomial::new(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Ring> $tr for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $m(self, rhs: Self) -> Polynomial<C> {
                $tr::$m(&self, &rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Ring + fmt::Display> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        Ok(())
    }
}

impl<C: Ring> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

/// Reduced quotient of polynomials: coprime, denominator in normal form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction<C> {
    num: Polynomial<C>,
    den: Polynomial<C>,
}

impl<C: Ring> RationalFunction<C> {
    /// Builds and reduces `num / den`.
    pub fn new(num: Polynomial<C>, den: Polynomial<C>) -> Result<Self> {
        Self::unreduced(num, den).map(|r| r.reduce())
    }

    /// Keeps the given representation; call [`reduce`](Self::reduce) for the
    /// canonical form.
    pub fn unreduced(num: Polynomial<C>, den: Polynomial<C>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(p: Polynomial<C>) -> Self {
        RationalFunction {
            num: p,
            den: Ring::one(),
        }
    }

    pub fn numerator(&self) -> &Polynomial<C> {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial<C> {
        &self.den
    }

    /// Cancels the gcd and normalizes the denominator.
    pub fn reduce(&self) -> Self {
        if self.num.is_zero() {
            return RationalFunction {
                num: Polynomial::zero(),
                den: Ring::one(),
            };
        }
        let g = Ring::gcd(&self.num, &self.den);
        let num = self.num.exact_quotient(&g).expect("gcd divides numerator");
        let den = self.den.exact_quotient(&g).expect("gcd divides denominator");
        let u = den.unit_part();
        RationalFunction {
            num: num.exact_quotient(&u).expect("unit"),
            den: den.exact_quotient(&u).expect("unit"),
        }
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalFunction {
            num: &(&self.num * &other.den) + &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
        .reduce()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        RationalFunction {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
        .reduce()
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RationalFunction {
            num: &self.num * &other.den,
            den: &self.den * &other.num,
        }
        .reduce())
    }

    pub fn recip(&self) -> Result<Self> {
        RationalFunction::from_poly(Ring::one()).div(self)
    }

    /// Coefficients of the expansion `Σ_{j≥0} c_j z^{-j-1}` up to
    /// `z^{-order-1}`, by long division in descending powers.
    pub fn series_at_infinity(&self, order: usize) -> Result<LaurentSeries<C>> {
        if order == 0 {
            return Err(Error::Domain("series order must be positive".into()));
        }
        if !self.is_proper() {
            return Err(Error::Domain(
                "series at infinity needs a proper rational function".into(),
            ));
        }
        let q = self.den.degree().unwrap();
        let inv = self.den.leading().inverse().ok_or_else(|| {
            Error::Domain("denominator leading coefficient is not invertible".into())
        })?;
        let mut coeffs: Vec<C> = Vec::with_capacity(order + 1);
        for j in 1..=order + 1 {
            // match the coefficient of z^{q-j} in den * series = num
            let mut acc = if j <= q {
                self.num.coeff(q - j)
            } else {
                C::zero()
            };
            for i in 0..q {
                // d_i c_t with t = i - q + j >= 1 and t < j
                if i + j > q {
                    let t = i + j - q;
                    acc = acc.sub(&self.den.coeff(i).mul(&coeffs[t - 1]));
                }
            }
            coeffs.push(acc.mul(&inv));
        }
        Ok(LaurentSeries { coeffs })
    }
}

impl RationalFunction<Q> {
    pub fn eval_f64(&self, z: f64) -> f64 {
        self.num.eval_f64(z) / self.den.eval_f64(z)
    }
}

impl RationalFunction<Polynomial<Q>> {
    pub fn eval_lambda(&self, lambda: &Q) -> Result<RationalFunction<Q>> {
        RationalFunction::new(self.num.eval_lambda(lambda), self.den.eval_lambda(lambda))
    }
}

impl<C: Ring + fmt::Display> fmt::Display for RationalFunction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.num, self.den)
    }
}

impl<C: Ring> fmt::Debug for RationalFunction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} / {:?}", self.num, self.den)
    }
}

/// Expansion at infinity; `coeffs[j]` multiplies `z^{-j-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Ring> LaurentSeries<C> {
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Highest `n` with a known coefficient of `z^{-n-1}`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `z^power` for negative `power`.
    pub fn coefficient(&self, power: i64) -> Option<C> {
        if power >= 0 {
            return Some(C::zero());
        }
        self.coeffs.get((-power - 1) as usize).cloned()
    }
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact conversion of a finite `f64` to a rational.
pub fn q_from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Returns true iff `x` is a non-negative integer-valued rational.
pub fn is_natural(x: &Q) -> bool {
    x.is_integer() && !x.is_negative()
}
