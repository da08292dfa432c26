//! Cauchy transforms of the depth-restricted limit laws.
//!
//! The central-limit transforms satisfy `G_0 = 1/z`,
//! `G_m = 1 / (z - G_{m-1})`. The Poisson generating functions
//! `H^(m)(λ, z)` are carried as the coupled pair `P^(m) / Q^(m)` with
//! `P^(0) = 1`, `Q^(0) = z` and
//!
//! ```text
//! P^(m) = Q^(m-1) - P^(m-1)
//! Q^(m) = (z - λ) Q^(m-1) - z P^(m-1)
//! ```
//!
//! which keeps everything in `Q[λ][z]` (no square roots of `λ`).

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::ratfun::{q, BiPoly, Polynomial, RationalFunction, Ring, Q};
use crate::{Error, Result};

/// Default number of moments extracted from a hierarchy.
pub const DEFAULT_SERIES_ORDER: usize = 16;

/// `G_0, …, G_{m_max}` in reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyHierarchy {
    transforms: Vec<RationalFunction<Q>>,
}

impl CauchyHierarchy {
    pub fn transforms(&self) -> &[RationalFunction<Q>] {
        &self.transforms
    }

    pub fn get(&self, m: usize) -> Option<&RationalFunction<Q>> {
        self.transforms.get(m)
    }

    pub fn m_max(&self) -> usize {
        self.transforms.len() - 1
    }
}

/// `1 / (z - g)`
fn continued_fraction_step(g: &RationalFunction<Q>) -> RationalFunction<Q> {
    let z = RationalFunction::from_poly(Polynomial::var());
    z.sub(g)
        .recip()
        .expect("z - G is never the zero function")
}

pub fn build_clt_hierarchy(m_max: usize) -> CauchyHierarchy {
    let mut transforms = Vec::with_capacity(m_max + 1);
    let g0 = RationalFunction::new(Ring::one(), Polynomial::var()).expect("nonzero");
    transforms.push(g0);
    for m in 1..=m_max {
        let next = continued_fraction_step(&transforms[m - 1]);
        transforms.push(next);
    }
    CauchyHierarchy { transforms }
}

/// The pairs `(P^(m), Q^(m))` for `m = 0..=m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonHierarchy {
    p: Vec<BiPoly>,
    q: Vec<BiPoly>,
}

impl PoissonHierarchy {
    pub fn m_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn numerator(&self, m: usize) -> Option<&BiPoly> {
        self.p.get(m)
    }

    pub fn denominator(&self, m: usize) -> Option<&BiPoly> {
        self.q.get(m)
    }

    /// `H^(m) = P^(m) / Q^(m)` in reduced form.
    pub fn transform(&self, m: usize) -> Option<RationalFunction<Polynomial<Q>>> {
        let (p, q) = (self.p.get(m)?, self.q.get(m)?);
        Some(RationalFunction::new(p.clone(), q.clone()).expect("Q^(m) is nonzero"))
    }
}

pub fn build_poisson_hierarchy(m_max: usize) -> PoissonHierarchy {
    let z = BiPoly::var();
    let lam = BiPoly::lambda();
    let z_minus_lam = &z - &lam;
    let mut p: Vec<BiPoly> = vec![Ring::one()];
    let mut q = vec![z.clone()];
    for m in 1..=m_max {
        let next_p = &q[m - 1] - &p[m - 1];
        let next_q = &(&z_minus_lam * &q[m - 1]) - &(&z * &p[m - 1]);
        p.push(next_p);
        q.push(next_q);
    }
    PoissonHierarchy { p, q }
}

/// One step of the generating-function recurrence
/// `H ↦ (1 - H) / (z - z H - λ)` on reduced rational functions.
pub fn poisson_recurrence_step(
    h: &RationalFunction<Polynomial<Q>>,
) -> Result<RationalFunction<Polynomial<Q>>> {
    let one = RationalFunction::from_poly(Ring::one());
    let z = RationalFunction::from_poly(BiPoly::var());
    let lam = RationalFunction::from_poly(BiPoly::lambda());
    let num = one.sub(h);
    let den = z.sub(&z.mul(h)).sub(&lam);
    num.div(&den)
}

fn to_natural(c: &Q, what: &str) -> Result<BigUint> {
    if !c.is_integer() || c.is_negative() {
        return Err(Error::Domain(format!("{what} coefficient {c} is not a count")));
    }
    Ok(c.to_integer().to_biguint().expect("non-negative"))
}

/// `M^(m)_0, …, M^(m)_{n_max}`: the coefficients of `G_m` at infinity.
pub fn clt_moments(h: &CauchyHierarchy, m: usize, n_max: usize) -> Result<Vec<BigUint>> {
    let g = h
        .get(m)
        .ok_or_else(|| Error::Domain(format!("m = {m} exceeds hierarchy depth {}", h.m_max())))?;
    g.series_at_infinity(n_max.max(1))?
        .coeffs()
        .iter()
        .take(n_max + 1)
        .map(|c| to_natural(c, "moment"))
        .collect()
}

/// Moments of `H^(m)` as polynomials in `λ`; the coefficient of `λ^b` in entry
/// `n` counts non-crossing partitions with `b` blocks and depth `<= m`.
pub fn poisson_moment_polys(
    h: &PoissonHierarchy,
    m: usize,
    n_max: usize,
) -> Result<Vec<Polynomial<Q>>> {
    let f = h
        .transform(m)
        .ok_or_else(|| Error::Domain(format!("m = {m} exceeds hierarchy depth {}", h.m_max())))?;
    let series = f.series_at_infinity(n_max.max(1))?;
    Ok(series.coeffs()[..=n_max].to_vec())
}

pub fn poisson_moments(
    h: &PoissonHierarchy,
    m: usize,
    lambda: &Q,
    n_max: usize,
) -> Result<Vec<Q>> {
    Ok(poisson_moment_polys(h, m, n_max)?
        .iter()
        .map(|p| p.eval(lambda))
        .collect())
}

/// Chebyshev polynomial of the second kind, `U_0 = 1`, `U_1 = 2x`.
pub fn chebyshev_u(m: usize) -> Polynomial<Q> {
    let two_x = Polynomial::from_ints(&[0, 2]);
    let mut prev = Polynomial::from_ints(&[1]);
    if m == 0 {
        return prev;
    }
    let mut cur = two_x.clone();
    for _ in 1..m {
        let next = &(&two_x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `U_m(z / 2)`
pub fn chebyshev_u_half(m: usize) -> Polynomial<Q> {
    chebyshev_u(m).compose(&Polynomial::new(vec![q(0, 1), q(1, 2)]))
}

/// `λ^{m/2} U_m(w / (2√λ))` with `w = z - λ - 1`, which is a polynomial in
/// `λ` and `z` because `U_m` has the parity of `m`.
fn homogenized_chebyshev(m: usize) -> BiPoly {
    let w = &(&BiPoly::var() - &BiPoly::lambda()) - &Ring::one();
    let lam = BiPoly::lambda();
    let mut prev: BiPoly = Ring::one();
    if m == 0 {
        return prev;
    }
    let mut cur = w.clone();
    for _ in 1..m {
        let next = &(&w * &cur) - &(&lam * &prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// The Chebyshev closed form of `(P^(m), Q^(m))` as exact polynomials in
/// `Q[λ][z]`.
pub fn poisson_closed_form(m: usize) -> (BiPoly, BiPoly) {
    let z = BiPoly::var();
    let lam = BiPoly::lambda();
    let vm = homogenized_chebyshev(m);
    let vm1 = homogenized_chebyshev(m + 1);
    let p = &(&(&z - &lam) * &vm) - &vm1;
    let q = &z * &vm;
    (p, q)
}

/// Closed form evaluated numerically at a real `λ > 0`, with the literal
/// square root: coefficient vectors (ascending in `z`) of `P` and `Q`.
pub fn poisson_closed_form_f64(m: usize, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let sqrt_l = lambda.sqrt();
    // x = α z + β
    let alpha = 1.0 / (2.0 * sqrt_l);
    let beta = -(lambda + 1.0) / (2.0 * sqrt_l);
    let compose = |u: &[f64]| -> Vec<f64> {
        let mut acc: Vec<f64> = vec![];
        for &c in u.iter().rev() {
            // acc = acc * (α z + β) + c
            let mut next = vec![0.0; acc.len() + 1];
            for (k, &a) in acc.iter().enumerate() {
                next[k] += a * beta;
                next[k + 1] += a * alpha;
            }
            next[0] += c;
            acc = next;
        }
        acc
    };
    let um = compose(&chebyshev_u(m).to_f64());
    let um1 = compose(&chebyshev_u(m + 1).to_f64());
    let sm = lambda.powf(m as f64 / 2.0);
    let sm1 = lambda.powf((m + 1) as f64 / 2.0);
    let mut p = vec![0.0; um1.len().max(um.len() + 1)];
    let mut qv = vec![0.0; um.len() + 1];
    for (k, &c) in um.iter().enumerate() {
        // (z - λ) U_m and z U_m
        p[k + 1] += sm * c;
        p[k] -= sm * lambda * c;
        qv[k + 1] += sm * c;
    }
    for (k, &c) in um1.iter().enumerate() {
        p[k] -= sm1 * c;
    }
    (p, qv)
}

/// Sampled `λ` values for the numeric closed-form check.
pub fn lambda_samples() -> Vec<Q> {
    vec![q(1, 2), q(1, 1), q(2, 1)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    pub m: usize,
    /// `G_m = U_m(z/2) / U_{m+1}(z/2)` holds exactly.
    pub clt_exact: bool,
    /// `(P^(m), Q^(m))` equals the symbolic Chebyshev expressions.
    pub poisson_exact: bool,
    /// The reduced `P/Q` equals the generating-function recurrence applied
    /// to the previous level.
    pub poisson_recurrence: bool,
    /// Largest relative coefficient deviation between the recurrence pair and
    /// the literal `√λ` closed form over the sampled `λ`.
    pub poisson_numeric_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub tolerance: f64,
    pub checks: Vec<ClosedFormCheck>,
}

impl ClosedFormReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Fails with the first `m` whose identity did not hold.
    pub fn ensure(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.pass) {
            None => Ok(()),
            Some(c) => Err(Error::Verification(format!(
                "closed form identity failed at m = {}",
                c.m
            ))),
        }
    }
}

pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

fn max_rel_deviation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or(0.0);
            let y = b.get(k).copied().unwrap_or(0.0);
            (x - y).abs() / y.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

pub fn verify_closed_forms(m_max: usize) -> ClosedFormReport {
    let clt = build_clt_hierarchy(m_max);
    let poisson = build_poisson_hierarchy(m_max);
    let mut checks = Vec::with_capacity(m_max + 1);
    let mut prev_h: Option<RationalFunction<Polynomial<Q>>> = None;
    for m in 0..=m_max {
        let w = RationalFunction::new(chebyshev_u_half(m), chebyshev_u_half(m + 1))
            .expect("U_{m+1} is nonzero");
        let clt_exact = clt.transforms()[m] == w;

        let (p_cf, q_cf) = poisson_closed_form(m);
        let p = poisson.numerator(m).unwrap();
        let q = poisson.denominator(m).unwrap();
        let poisson_exact = &p_cf == p && &q_cf == q;

        let h = poisson.transform(m).unwrap();
        let poisson_recurrence = match &prev_h {
            None => {
                h == RationalFunction::new(Ring::one(), BiPoly::var()).expect("nonzero")
            }
            Some(prev) => poisson_recurrence_step(prev).is_ok_and(|next| next == h),
        };

        let mut deviation: f64 = 0.0;
        for lam in lambda_samples() {
            let lf = lam.to_f64().unwrap();
            let (pn, qn) = poisson_closed_form_f64(m, lf);
            deviation = deviation
                .max(max_rel_deviation(&pn, &p.eval_lambda(&lam).to_f64()))
                .max(max_rel_deviation(&qn, &q.eval_lambda(&lam).to_f64()));
        }
        let pass = clt_exact
            && poisson_exact
            && poisson_recurrence
            && deviation <= CLOSED_FORM_TOLERANCE;
        checks.push(ClosedFormCheck {
            m,
            clt_exact,
            poisson_exact,
            poisson_recurrence,
            poisson_numeric_deviation: deviation,
            pass,
        });
        prev_h = Some(h);
    }
    ClosedFormReport {
        tolerance: CLOSED_FORM_TOLERANCE,
        checks,
    }
}
