//! Discrete limit measures: the depth-`m` central-limit laws supported on
//! scaled Chebyshev zeros and the depth-`m` Poisson laws.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cauchy::chebyshev_u;
use crate::partitions::{catalan, count_nc};
use crate::ratfun::{Polynomial, RationalFunction, Ring, Q};
use crate::{Error, Result};

/// Tolerance on the total mass of a measure.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Weights below this are dropped from Poisson measures, with a report.
pub const WEIGHT_UNDERFLOW: f64 = 1e-15;
/// Most negative value tolerated for `a_{m,0}(λ)` before it is an error.
pub const NEGATIVE_WEIGHT_SLACK: f64 = -1e-13;

/// Finitely many atoms with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Sorts by atom and validates positivity, strict ordering and mass.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::Domain(
                "atoms and weights must be non-empty and of equal length".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).collect();
        if pairs.iter().any(|(a, w)| !a.is_finite() || !w.is_finite()) {
            return Err(Error::Domain("non-finite atom or weight".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain("atoms must be distinct".into()));
        }
        if let Some((a, w)) = pairs.iter().find(|(_, w)| *w <= 0.0) {
            return Err(Error::Degenerate(format!("weight {w} at atom {a}")));
        }
        let mass: f64 = pairs.iter().map(|(_, w)| w).sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain(format!("total mass {mass} differs from 1")));
        }
        let (atoms, weights) = pairs.into_iter().unzip();
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `Σ_k w_k x_k^n`
    pub fn moment(&self, n: usize) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * x.powi(n as i32))
            .sum()
    }

    /// Largest atom- or weight-wise distance to another measure with the same
    /// number of atoms; `None` if the supports have different sizes.
    pub fn max_deviation(&self, other: &DiscreteMeasure) -> Option<f64> {
        if self.len() != other.len() {
            return None;
        }
        let atoms = self.atoms.iter().zip(&other.atoms).map(|(a, b)| (a - b).abs());
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs());
        Some(atoms.chain(weights).fold(0.0, f64::max))
    }
}

/// `cos(kπ/n)`, exact at multiples of `π/3` and `π/2` and with exact
/// antisymmetry `cos((n-k)π/n) = -cos(kπ/n)`.
fn cos_pi_frac(k: usize, n: usize) -> f64 {
    let g = k.gcd(&n);
    let (k, n) = ((k / g) % (2 * n / g), n / g);
    // fold into [0, π]
    let k = if k > n { 2 * n - k } else { k };
    match (k, n) {
        (0, _) => 1.0,
        (1, 1) => -1.0,
        (1, 2) => 0.0,
        (1, 3) => 0.5,
        (2, 3) => -0.5,
        _ if 2 * k > n => -((n - k) as f64 * PI / n as f64).cos(),
        _ => (k as f64 * PI / n as f64).cos(),
    }
}

/// `sin²(kπ/n) = (1 - cos(2kπ/n)) / 2`
fn sin_sq_pi_frac(k: usize, n: usize) -> f64 {
    (1.0 - cos_pi_frac(2 * k, n)) / 2.0
}

/// The depth-`m` central-limit law: `m + 1` atoms `2cos(kπ/(m+2))` with
/// weights `2 sin²(kπ/(m+2)) / (m+2)`.
pub fn clt_measure(m: usize) -> DiscreteMeasure {
    let n = m + 2;
    let (atoms, weights) = (1..=m + 1)
        .rev()
        .map(|k| {
            (2.0 * cos_pi_frac(k, n), 2.0 * sin_sq_pi_frac(k, n) / n as f64)
        })
        .unzip();
    DiscreteMeasure::new(atoms, weights).expect("closed-form measure is valid")
}

/// An atom removed from a Poisson measure because its weight underflowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DroppedAtom {
    pub atom: f64,
    pub weight: f64,
}

/// `a_{m,0}(λ) = √λ U_{m+1}(x) / U_m(x) - λ`, `x = (λ+1)/(2√λ)`.
pub fn poisson_zero_weight(m: usize, lambda: f64) -> f64 {
    let sl = lambda.sqrt();
    let x = (lambda + 1.0) / (2.0 * sl);
    let um = chebyshev_u(m).eval_f64(x);
    let um1 = chebyshev_u(m + 1).eval_f64(x);
    sl * um1 / um - lambda
}

/// The depth-`m` Poisson law with rate `λ`, plus any atoms whose weight
/// underflowed below [`WEIGHT_UNDERFLOW`].
pub fn poisson_measure_report(
    m: usize,
    lambda: f64,
) -> Result<(DiscreteMeasure, Vec<DroppedAtom>)> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    let sl = lambda.sqrt();
    let mut atoms = vec![0.0];
    let a0 = if m == 0 {
        1.0
    } else {
        poisson_zero_weight(m, lambda)
    };
    if a0 < NEGATIVE_WEIGHT_SLACK {
        return Err(Error::Domain(format!(
            "weight at the origin is negative: {a0} (m = {m}, λ = {lambda})"
        )));
    }
    let mut weights = vec![a0];
    let n = m + 1;
    for k in 1..=m {
        let y = 2.0 * sl * cos_pi_frac(k, n) + lambda + 1.0;
        atoms.push(y);
        weights.push(2.0 * lambda * sin_sq_pi_frac(k, n) / (n as f64 * y));
    }
    let mut dropped = Vec::new();
    let mut kept_atoms = Vec::with_capacity(atoms.len());
    let mut kept_weights = Vec::with_capacity(atoms.len());
    for (a, w) in atoms.into_iter().zip(weights) {
        if w < WEIGHT_UNDERFLOW {
            log::warn!("dropping atom {a} with weight {w} (m = {m}, λ = {lambda})");
            dropped.push(DroppedAtom { atom: a, weight: w });
        } else {
            kept_atoms.push(a);
            kept_weights.push(w);
        }
    }
    Ok((DiscreteMeasure::new(kept_atoms, kept_weights)?, dropped))
}

pub fn poisson_measure(m: usize, lambda: f64) -> Result<DiscreteMeasure> {
    poisson_measure_report(m, lambda).map(|(mu, _)| mu)
}

pub fn moment(d: &DiscreteMeasure, n: usize) -> f64 {
    d.moment(n)
}

/// Even moments are Catalan numbers, odd ones vanish.
pub fn wigner_moment(n: usize) -> BigUint {
    if n % 2 == 1 {
        BigUint::zero()
    } else {
        catalan(n / 2)
    }
}

/// `Σ_b λ^b |NC_n(b)|`
pub fn free_poisson_moment(n: usize, lambda: &Q) -> Q {
    let mut acc = <Q as Zero>::zero();
    let mut power = <Q as Ring>::one();
    for b in 0..=n {
        let c = count_nc(n, b, n);
        acc += &power * Q::from_integer(c.into());
        power *= lambda;
    }
    acc
}

const ROOT_TOLERANCE: f64 = 1e-14;

/// Real roots of a polynomial with only simple real roots, ascending.
///
/// The roots of `p'` interlace those of `p`, so they bracket one root each;
/// every bracket must show a sign change.
fn real_roots(p: &Polynomial<Q>) -> Result<Vec<f64>> {
    let deg = match p.degree() {
        None => return Err(Error::Decomposition("zero polynomial".into())),
        Some(d) => d,
    };
    if deg == 0 {
        return Ok(Vec::new());
    }
    let coeffs = p.to_f64();
    let lead = coeffs[deg];
    // Cauchy bound
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
    let dcoeffs = p.derivative().to_f64();
    let eval = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &a| acc * x + a);

    let crit = real_roots(&p.derivative())?;
    let mut edges = Vec::with_capacity(deg + 1);
    edges.push(-bound);
    edges.extend(crit);
    edges.push(bound);

    let mut roots = Vec::with_capacity(deg);
    for w in edges.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (mut flo, fhi) = (eval(&coeffs, lo), eval(&coeffs, hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if fhi == 0.0 {
            if w[1] == bound {
                roots.push(hi);
            }
            continue;
        }
        if flo.signum() == fhi.signum() {
            return Err(Error::Decomposition(format!(
                "no sign change on [{lo}, {hi}]: repeated or complex roots"
            )));
        }
        while hi - lo > 1e-9 * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            let fm = eval(&coeffs, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        // Newton polish
        let mut x = 0.5 * (lo + hi);
        for _ in 0..50 {
            let d = eval(&dcoeffs, x);
            if d == 0.0 {
                break;
            }
            let step = eval(&coeffs, x) / d;
            x -= step;
            if step.abs() <= ROOT_TOLERANCE * (1.0 + x.abs()) {
                break;
            }
        }
        roots.push(x);
    }
    Ok(roots)
}

/// Recovers a discrete measure from its Cauchy transform by locating the
/// poles numerically and computing residues `N(x) / D'(x)`.
pub fn partial_fractions(r: &RationalFunction<Q>) -> Result<DiscreteMeasure> {
    if !r.is_proper() {
        return Err(Error::Decomposition("rational function is not proper".into()));
    }
    let den = r.denominator();
    // squarefree check, exact
    let g = Ring::gcd(den, &den.derivative());
    if g.degree() != Some(0) {
        return Err(Error::Decomposition("denominator has a repeated root".into()));
    }
    let roots = real_roots(den)?;
    if roots.len() != den.degree().unwrap_or(0) {
        return Err(Error::Decomposition("denominator has complex roots".into()));
    }
    let dprime = den.derivative();
    let weights = roots
        .iter()
        .map(|&x| r.numerator().eval_f64(x) / dprime.eval_f64(x))
        .collect();
    DiscreteMeasure::new(roots, weights)
        .map_err(|e| Error::Decomposition(format!("residues do not form a measure: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureFamily {
    Clt,
    Poisson,
}

/// Export record for a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub family: MeasureFamily,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

/// JSON number with 17 significant digits.
pub fn format_f64_17(x: f64) -> String {
    if x == 0.0 {
        // normalise -0.0 as well
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

impl MeasureRecord {
    pub fn clt(m: usize) -> Self {
        let mu = clt_measure(m);
        MeasureRecord {
            family: MeasureFamily::Clt,
            m,
            lambda: None,
            atoms: mu.atoms().to_vec(),
            weights: mu.weights().to_vec(),
        }
    }

    pub fn poisson(m: usize, lambda: f64) -> Result<Self> {
        let mu = poisson_measure(m, lambda)?;
        Ok(MeasureRecord {
            family: MeasureFamily::Poisson,
            m,
            lambda: Some(lambda),
            atoms: mu.atoms().to_vec(),
            weights: mu.weights().to_vec(),
        })
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.atoms.clone(), self.weights.clone())
    }

    /// Serializes with every float printed to 17 significant digits.
    pub fn to_json(&self) -> String {
        let list = |xs: &[f64]| {
            xs.iter()
                .map(|&x| format_f64_17(x))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let family = match self.family {
            MeasureFamily::Clt => "clt",
            MeasureFamily::Poisson => "poisson",
        };
        let mut out = String::new();
        write!(out, "{{\"family\": \"{family}\", \"m\": {}", self.m).unwrap();
        if let Some(l) = self.lambda {
            write!(out, ", \"lambda\": {}", format_f64_17(l)).unwrap();
        }
        write!(
            out,
            ", \"atoms\": [{}], \"weights\": [{}]}}",
            list(&self.atoms),
            list(&self.weights)
        )
        .unwrap();
        out
    }
}

/// Moment of a measure compared with a reference, as `f64`.
pub fn biguint_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}
