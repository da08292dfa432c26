//! Finite tensor model of the m-free product.
//!
//! Sites are labelled `(l, k)` with outer site `l = 1..=N` and inner site
//! `k = 1..=m`; each carries a copy of the GNS space `C^s` of a state `φ` on
//! `C[x]`. The embedding of `a` at outer site `l` is
//!
//! ```text
//! j_l(a) = Σ_k (Γ_k^(l)(a) - Γ̂_k^(l)(a))
//! ```
//!
//! where `Γ_k` puts `π(a)` at `(l, k)` and vacuum projections at `(r, s)`,
//! `r ≠ l`, `s ≥ k`, and `Γ̂_k` does the same with `s ≥ k - 1` (`Γ̂_1 = 0`).
//! Inner sites beyond `m` are never touched and stay in the vacuum, so the
//! truncation to `m` inner sites is exact.
//!
//! Internally every site uses an orthonormal basis whose first vector is the
//! cyclic vector. A vacuum projection then keeps exactly the coordinates
//! whose digit at that site is zero, and `Γ_k - Γ̂_k` keeps the coordinates
//! whose deepest excited inner site among the other outer sites is `k - 1`.

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::measures::DiscreteMeasure;
use crate::partitions::{
    depth, enumerate_pair_partitions, enumerate_partitions, falling_factorial, is_noncrossing,
    SetPartition,
};
use crate::{Error, Result, DEFAULT_ENTRY_CAP, DEFAULT_WORD_CAP};

/// GNS data of a state on `C[x]`: a symmetric matrix for `x` and a unit
/// cyclic vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GnsData {
    rep_x: DMatrix<f64>,
    omega: DVector<f64>,
}

impl GnsData {
    pub fn new(rep_x: DMatrix<f64>, omega: DVector<f64>) -> Result<Self> {
        let s = omega.len();
        if s == 0 || rep_x.nrows() != s || rep_x.ncols() != s {
            return Err(Error::Size("GNS matrix and vector sizes differ".into()));
        }
        if (&rep_x - rep_x.transpose()).amax() > 1e-12 {
            return Err(Error::Domain("representation of x must be symmetric".into()));
        }
        if (omega.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("cyclic vector must have unit norm".into()));
        }
        Ok(GnsData { rep_x, omega })
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn rep_x(&self) -> &DMatrix<f64> {
        &self.rep_x
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    /// `φ(x^k) = ⟨Ω, X^k Ω⟩`
    pub fn moment(&self, k: usize) -> f64 {
        let mut v = self.omega.clone();
        for _ in 0..k {
            v = &self.rep_x * v;
        }
        self.omega.dot(&v)
    }

    /// `φ(a)`
    pub fn phi(&self, a: &Observable) -> f64 {
        self.omega.dot(&(a.matrix(self) * &self.omega))
    }
}

/// Diagonal GNS representation of a discrete measure: `x` acts by the atoms
/// and the cyclic vector holds the square-rooted weights.
pub fn make_gns(measure: &DiscreteMeasure) -> Result<GnsData> {
    if let Some(w) = measure.weights().iter().find(|&&w| w <= 0.0) {
        return Err(Error::Degenerate(format!("weight {w} is not positive")));
    }
    let rep_x = DMatrix::from_diagonal(&DVector::from_column_slice(measure.atoms()));
    let omega = DVector::from_iterator(measure.len(), measure.weights().iter().map(|w| w.sqrt()));
    // renormalise against rounding in the weights
    let omega = &omega / omega.norm();
    GnsData::new(rep_x, omega)
}

/// Two-point state `(1 - λ/N) δ_0 + (λ/N) δ_1`, whose moments are all `λ/N`.
pub fn poisson_gns(lambda: f64, n: usize) -> Result<GnsData> {
    let p = lambda / n as f64;
    if lambda.is_nan() || lambda <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidState(format!(
            "need 0 < λ < N, got λ = {lambda}, N = {n}"
        )));
    }
    let mu = DiscreteMeasure::new(vec![0.0, 1.0], vec![1.0 - p, p])?;
    make_gns(&mu)
}

/// Centered two-point state `⅕ δ_{-2} + ⅘ δ_{1/2}`: mean 0, variance 1 and
/// fourth moment `13/4`, so finite-`N` central-limit moments differ from
/// their limits.
pub fn default_clt_gns() -> GnsData {
    let mu = DiscreteMeasure::new(vec![-2.0, 0.5], vec![0.2, 0.8]).expect("valid");
    make_gns(&mu).expect("positive weights")
}

/// A polynomial in the generator `x`, coefficients by ascending power.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(pub Vec<f64>);

impl Observable {
    pub fn x() -> Self {
        Observable(vec![0.0, 1.0])
    }

    pub fn x_pow(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Observable(c)
    }

    /// `a - φ(a)·1`
    pub fn centered(&self, gns: &GnsData) -> Self {
        let mut c = self.0.clone();
        if c.is_empty() {
            c.push(0.0);
        }
        c[0] -= gns.phi(self);
        Observable(c)
    }

    pub fn mul(&self, other: &Observable) -> Observable {
        if self.0.is_empty() || other.0.is_empty() {
            return Observable(vec![]);
        }
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Observable(out)
    }

    /// `π(a)` in the GNS representation.
    pub fn matrix(&self, gns: &GnsData) -> DMatrix<f64> {
        let s = gns.dim();
        let mut acc = DMatrix::zeros(s, s);
        for c in self.0.iter().rev() {
            acc = &acc * &gns.rep_x + DMatrix::identity(s, s) * *c;
        }
        acc
    }
}

/// A finite configuration: `N` outer sites, `m` inner sites each.
#[derive(Debug, Clone)]
pub struct SimConfig {
    outer: usize,
    depth: usize,
    gns: GnsData,
    word_cap: usize,
    // orthogonal change of basis sending the cyclic vector to e_0
    basis: DMatrix<f64>,
    dim: usize,
    // for coordinate i and outer site l: deepest excited inner site over the
    // other outer sites, at i * outer + l
    max_other: Vec<u8>,
}

/// State vector of a [`SimConfig`], in the internal vacuum-adapted basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn inner(&self, other: &StateVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Component along the global vacuum.
    pub fn vacuum_component(&self) -> f64 {
        self.0[0]
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl SimConfig {
    pub fn new(outer: usize, depth: usize, gns: GnsData) -> Result<Self> {
        Self::with_caps(outer, depth, gns, DEFAULT_ENTRY_CAP, DEFAULT_WORD_CAP)
    }

    pub fn with_caps(
        outer: usize,
        depth: usize,
        gns: GnsData,
        entry_cap: usize,
        word_cap: usize,
    ) -> Result<Self> {
        if outer == 0 || depth == 0 {
            return Err(Error::Size("need at least one outer and one inner site".into()));
        }
        let s = gns.dim();
        let slots = outer * depth;
        let dim = (0..slots)
            .try_fold(1usize, |acc, _| acc.checked_mul(s))
            .filter(|&d| d <= entry_cap)
            .ok_or(Error::CapExceeded {
                what: "state vector entries",
                cap: entry_cap,
                requested: (s as f64).powi(slots as i32).min(usize::MAX as f64) as usize,
            })?;
        let basis = vacuum_adapted_basis(gns.omega());

        let mut max_other = vec![0u8; dim * outer];
        let mut excited = vec![0u8; outer];
        for i in 0..dim {
            excited.iter_mut().for_each(|e| *e = 0);
            let mut rest = i;
            for slot in 0..slots {
                if rest % s != 0 {
                    let (l, k) = (slot / depth, slot % depth);
                    excited[l] = excited[l].max(k as u8 + 1);
                }
                rest /= s;
            }
            for l in 0..outer {
                max_other[i * outer + l] = (0..outer)
                    .filter(|&r| r != l)
                    .map(|r| excited[r])
                    .max()
                    .unwrap_or(0);
            }
        }
        Ok(SimConfig {
            outer,
            depth,
            gns,
            word_cap,
            basis,
            dim,
            max_other,
        })
    }

    pub fn outer(&self) -> usize {
        self.outer
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn gns(&self) -> &GnsData {
        &self.gns
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vacuum(&self) -> StateVector {
        let mut v = vec![0.0; self.dim];
        v[0] = 1.0;
        StateVector(v)
    }

    /// `π(a)` in the vacuum-adapted basis.
    fn local_matrix(&self, a: &Observable) -> DMatrix<f64> {
        &self.basis * a.matrix(&self.gns) * self.basis.transpose()
    }

    fn check_site(&self, l: usize, k: usize) -> Result<()> {
        if l == 0 || l > self.outer || k == 0 || k > self.depth {
            return Err(Error::SiteOutOfRange(format!(
                "(l, k) = ({l}, {k}) outside 1..={} x 1..={}",
                self.outer, self.depth
            )));
        }
        Ok(())
    }

    /// `j_{l,k}` with a precomputed local matrix; `l`, `k` are 1-based.
    fn apply_local(&self, l: usize, k: usize, mat: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let s = self.gns.dim();
        let slot = (l - 1) * self.depth + (k - 1);
        let stride = s.pow(slot as u32);
        let block = stride * s;
        let mut out = vec![0.0; self.dim];
        let keep = (k - 1) as u8;
        let outer = self.outer;
        for hi in (0..self.dim).step_by(block) {
            for lo in 0..stride {
                let base = hi + lo;
                for i in 0..s {
                    let idx = base + i * stride;
                    if self.max_other[idx * outer + (l - 1)] != keep {
                        continue;
                    }
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += mat[(i, j)] * v[base + j * stride];
                    }
                    out[idx] = acc;
                }
            }
        }
        out
    }
}

/// Householder reflection `H` with `H ω = e_0`.
fn vacuum_adapted_basis(omega: &DVector<f64>) -> DMatrix<f64> {
    let s = omega.len();
    let mut v = omega.clone();
    v[0] -= 1.0;
    let nv = v.norm_squared();
    if nv < 1e-30 {
        return DMatrix::identity(s, s);
    }
    DMatrix::identity(s, s) - (&v * v.transpose()) * (2.0 / nv)
}

/// `j_{l,k}(a) v = (Γ_k^(l)(a) - Γ̂_k^(l)(a)) v`
pub fn apply_j(
    cfg: &SimConfig,
    l: usize,
    k: usize,
    a: &Observable,
    v: &StateVector,
) -> Result<StateVector> {
    cfg.check_site(l, k)?;
    let mat = cfg.local_matrix(a);
    Ok(StateVector(cfg.apply_local(l, k, &mat, &v.0)))
}

/// `j_l^(m)(a) v = Σ_k j_{l,k}(a) v`
pub fn apply_j_sum(cfg: &SimConfig, l: usize, a: &Observable, v: &StateVector) -> Result<StateVector> {
    cfg.check_site(l, 1)?;
    let mat = cfg.local_matrix(a);
    Ok(StateVector(apply_sum(cfg, l, &mat, &v.0)))
}

fn apply_sum(cfg: &SimConfig, l: usize, mat: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cfg.dim];
    for k in 1..=cfg.depth {
        // the k-terms have disjoint supports
        for (o, x) in out.iter_mut().zip(cfg.apply_local(l, k, mat, v)) {
            *o += x;
        }
    }
    out
}

fn check_word(cfg: &SimConfig, word: &[(usize, Observable)]) -> Result<()> {
    if word.len() > cfg.word_cap {
        return Err(Error::CapExceeded {
            what: "word length",
            cap: cfg.word_cap,
            requested: word.len(),
        });
    }
    for (l, _) in word {
        cfg.check_site(*l, 1)?;
    }
    Ok(())
}

/// `Φ(j_{l_1}(a_1) … j_{l_n}(a_n))`, applying the word right-to-left to the
/// vacuum.
pub fn correlation(cfg: &SimConfig, word: &[(usize, Observable)]) -> Result<f64> {
    check_word(cfg, word)?;
    let mut v = cfg.vacuum().0;
    for (l, a) in word.iter().rev() {
        let mat = cfg.local_matrix(a);
        v = apply_sum(cfg, *l, &mat, &v);
    }
    Ok(v[0])
}

/// The single term `Φ(j_{l_1,p_1}(a_1) … j_{l_n,p_n}(a_n))`.
pub fn term_contribution(
    cfg: &SimConfig,
    word: &[(usize, Observable)],
    inner: &[usize],
) -> Result<f64> {
    check_word(cfg, word)?;
    if inner.len() != word.len() {
        return Err(Error::Size("one inner index per word letter".into()));
    }
    let mut v = cfg.vacuum().0;
    for ((l, a), &k) in word.iter().zip(inner).rev() {
        cfg.check_site(*l, k)?;
        v = cfg.apply_local(*l, k, &cfg.local_matrix(a), &v);
    }
    Ok(v[0])
}

/// Symmetric pyramid: `p_k <= min(k, n + 1 - k, m)` for every position.
pub fn in_pyramid(p: &[usize], m: usize) -> bool {
    let n = p.len();
    p.iter()
        .enumerate()
        .all(|(i, &pk)| pk >= 1 && pk <= (i + 1).min(n - i).min(m))
}

/// One-sided set from the filtration argument: `p_i <= min(n - i + 1, m)`.
pub(crate) fn in_theta(p: &[usize], m: usize) -> bool {
    let n = p.len();
    p.iter()
        .enumerate()
        .all(|(i, &pi)| pi >= 1 && pi <= (n - i).min(m))
}

/// The printed index reading: `p_k, p_{n-k} <= min(k, m)` for `k <= n/2`.
pub fn in_pyramid_literal(p: &[usize], m: usize) -> bool {
    let n = p.len();
    if p.iter().any(|&x| x < 1 || x > m) {
        return false;
    }
    (1..=n / 2).all(|k| {
        let bound = k.min(m);
        p[k - 1] <= bound && (n - k == 0 || p[n - k - 1] <= bound)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PyramidReport {
    pub n: usize,
    pub m: usize,
    pub tolerance: f64,
    /// Direct correlation of the full word.
    pub correlation: f64,
    /// Sum of every term in `{1..m}^n`.
    pub expanded_sum: f64,
    /// Sum restricted to the symmetric pyramid.
    pub pyramid_sum: f64,
    pub terms_total: usize,
    /// Terms that survived to the end of the expansion (others vanish
    /// identically along the way).
    pub terms_nonvanishing: usize,
    pub max_outside: f64,
    /// Non-vanishing terms outside the symmetric pyramid.
    pub outside_nonzero: Vec<Vec<usize>>,
    /// Non-vanishing terms that the printed-index reading would exclude.
    pub literal_reading_conflicts: Vec<Vec<usize>>,
    /// Non-vanishing terms outside the one-sided set (never expected).
    pub theta_violations: Vec<Vec<usize>>,
    pub pass: bool,
}

pub const PYRAMID_TOLERANCE: f64 = 1e-12;

/// Expands the correlation over every choice of inner indices and checks
/// that only pyramid tuples contribute.
pub fn pyramid_check(cfg: &SimConfig, word: &[(usize, Observable)]) -> Result<PyramidReport> {
    check_word(cfg, word)?;
    let n = word.len();
    let m = cfg.depth;
    let mats: Vec<DMatrix<f64>> = word.iter().map(|(_, a)| cfg.local_matrix(a)).collect();
    let mut terms: Vec<(Vec<usize>, f64)> = Vec::new();

    // depth-first from the rightmost letter; zero vectors are pruned since
    // every extension of them vanishes
    fn dfs(
        cfg: &SimConfig,
        word: &[(usize, Observable)],
        mats: &[DMatrix<f64>],
        pos: usize,
        v: &[f64],
        chosen: &mut Vec<usize>,
        terms: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if pos == 0 {
            let mut p = chosen.clone();
            p.reverse();
            terms.push((p, v[0]));
            return;
        }
        let i = pos - 1;
        for k in 1..=cfg.depth {
            let w = cfg.apply_local(word[i].0, k, &mats[i], v);
            if w.iter().all(|&x| x == 0.0) {
                continue;
            }
            chosen.push(k);
            dfs(cfg, word, mats, i, &w, chosen, terms);
            chosen.pop();
        }
    }
    dfs(cfg, word, &mats, n, &cfg.vacuum().0, &mut Vec::new(), &mut terms);

    let correlation = correlation(cfg, word)?;
    let mut expanded_sum = 0.0;
    let mut pyramid_sum = 0.0;
    let mut max_outside: f64 = 0.0;
    let mut outside_nonzero = Vec::new();
    let mut literal_reading_conflicts = Vec::new();
    let mut theta_violations = Vec::new();
    for (p, c) in &terms {
        expanded_sum += c;
        let nonzero = c.abs() > PYRAMID_TOLERANCE;
        if in_pyramid(p, m) {
            pyramid_sum += c;
        } else {
            max_outside = max_outside.max(c.abs());
            if nonzero {
                outside_nonzero.push(p.clone());
            }
        }
        if nonzero && !in_pyramid_literal(p, m) {
            literal_reading_conflicts.push(p.clone());
        }
        if nonzero && !in_theta(p, m) {
            theta_violations.push(p.clone());
        }
    }
    let pass = outside_nonzero.is_empty()
        && theta_violations.is_empty()
        && (pyramid_sum - correlation).abs() <= PYRAMID_TOLERANCE
        && (expanded_sum - correlation).abs() <= PYRAMID_TOLERANCE;
    Ok(PyramidReport {
        n,
        m,
        tolerance: PYRAMID_TOLERANCE,
        correlation,
        expanded_sum,
        pyramid_sum,
        terms_total: m.pow(n as u32),
        terms_nonvanishing: terms.len(),
        max_outside,
        outside_nonzero,
        literal_reading_conflicts,
        theta_violations,
        pass,
    })
}

/// Word whose outer-site pattern is the partition `p`: block `i` sits at
/// outer site `i + 1`.
pub fn word_for_partition(p: &SetPartition, letters: &[Observable]) -> Vec<(usize, Observable)> {
    p.labels()
        .into_iter()
        .zip(letters)
        .map(|(b, a)| (b + 1, a.clone()))
        .collect()
}

/// `Σ_{P ∈ P_n} coeff(b(P)) · m(P)` with `m(P)` evaluated on `b(P)` outer
/// sites.
fn partition_sum(
    gns: &GnsData,
    m: usize,
    n: usize,
    a: &Observable,
    coeff: impl Fn(usize) -> f64,
    entry_cap: usize,
) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let mut configs: Vec<Option<SimConfig>> = vec![None; n + 1];
    let letters = vec![a.clone(); n];
    let mut total = 0.0;
    for p in enumerate_partitions(n)? {
        let b = p.num_blocks();
        let c = coeff(b);
        if c == 0.0 {
            continue;
        }
        if configs[b].is_none() {
            configs[b] = Some(SimConfig::with_caps(b, m, gns.clone(), entry_cap, n.max(DEFAULT_WORD_CAP))?);
        }
        let cfg = configs[b].as_ref().unwrap();
        total += c * correlation(cfg, &word_for_partition(&p, &letters))?;
    }
    Ok(total)
}

/// `Φ(S_N^n)` for `S_N = N^{-1/2} Σ_{l ≤ N} j_l(x - φ(x))`, exactly, via the
/// decomposition over set partitions.
pub fn clt_moment_finite(gns: &GnsData, m: usize, n_sites: usize, n: usize) -> Result<f64> {
    clt_moment_finite_capped(gns, m, n_sites, n, DEFAULT_ENTRY_CAP)
}

pub fn clt_moment_finite_capped(
    gns: &GnsData,
    m: usize,
    n_sites: usize,
    n: usize,
    entry_cap: usize,
) -> Result<f64> {
    if n_sites == 0 {
        return Err(Error::Size("need at least one outer site".into()));
    }
    let a = Observable::x().centered(gns);
    let scale = (n_sites as f64).powf(n as f64 / 2.0);
    partition_sum(
        gns,
        m,
        n,
        &a,
        |b| falling_factorial(n_sites as u64, b).to_f64().unwrap() / scale,
        entry_cap,
    )
}

/// `Φ^{(m,N)}(S_{m,N}^n)` with `S = Σ_{l ≤ N} j_l(x)` and the state
/// `(1 - λ/N) δ_0 + (λ/N) δ_1` at every site.
pub fn poisson_moment_finite(m: usize, n_sites: usize, n: usize, lambda: f64) -> Result<f64> {
    poisson_moment_finite_capped(m, n_sites, n, lambda, DEFAULT_ENTRY_CAP)
}

pub fn poisson_moment_finite_capped(
    m: usize,
    n_sites: usize,
    n: usize,
    lambda: f64,
    entry_cap: usize,
) -> Result<f64> {
    if lambda.is_nan() || n_sites as f64 <= lambda {
        return Err(Error::InvalidState(format!(
            "need N > λ, got N = {n_sites}, λ = {lambda}"
        )));
    }
    let gns = poisson_gns(lambda, n_sites)?;
    partition_sum(
        &gns,
        m,
        n,
        &Observable::x(),
        |b| falling_factorial(n_sites as u64, b).to_f64().unwrap(),
        entry_cap,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaKind {
    /// Crossing pair tuples vanish.
    Crossing,
    /// Non-crossing pair tuples deeper than `m` vanish.
    Deep,
    /// Non-crossing pair tuples of depth `<= m` factor into pair moments.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub kind: LemmaKind,
    pub partition: String,
    pub m: usize,
    pub observed: f64,
    pub expected: f64,
    pub deviation: f64,
    pub pass: bool,
}

pub const LEMMA_TOLERANCE: f64 = 1e-12;

/// Mean-zero letters used by the lemma checks: centered `x` and `x²`
/// alternating by position.
pub fn centered_letters(gns: &GnsData, n: usize) -> Vec<Observable> {
    (0..n)
        .map(|i| Observable::x_pow(1 + i % 2).centered(gns))
        .collect()
}

/// Checks vanishing for crossing and too-deep pair tuples and the product
/// formula for the rest, over all pair partitions with `n <= n_max` and
/// depths `1..=m_max`.
pub fn verify_lemmas(gns: &GnsData, n_max: usize, m_max: usize) -> Result<Vec<LemmaCheck>> {
    let mut checks = Vec::new();
    for n in (2..=n_max).step_by(2) {
        let letters = centered_letters(gns, n);
        for p in enumerate_pair_partitions(n) {
            let part = p.partition();
            let word = word_for_partition(part, &letters);
            let crossing = !is_noncrossing(part);
            let d = if crossing { 0 } else { depth(part)? };
            for m in 1..=m_max {
                let cfg = SimConfig::new(part.num_blocks(), m, gns.clone())?;
                let observed = correlation(&cfg, &word)?;
                let (kind, expected) = if crossing {
                    (LemmaKind::Crossing, 0.0)
                } else if d > m {
                    (LemmaKind::Deep, 0.0)
                } else {
                    let prod = p
                        .pairs()
                        .iter()
                        .map(|&(i, j)| gns.phi(&letters[i - 1].mul(&letters[j - 1])))
                        .product();
                    (LemmaKind::Product, prod)
                };
                let deviation = (observed - expected).abs();
                checks.push(LemmaCheck {
                    kind,
                    partition: part.to_string(),
                    m,
                    observed,
                    expected,
                    deviation,
                    pass: deviation < LEMMA_TOLERANCE,
                });
            }
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::clt_measure;
    use crate::partitions::partition_of_tuple;
    use approx::assert_abs_diff_eq;

    fn bernoulli() -> GnsData {
        make_gns(&clt_measure(1)).unwrap()
    }

    #[test]
    fn gns_examples() {
        let g = bernoulli();
        assert_abs_diff_eq!(g.rep_x()[(0, 0)], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.rep_x()[(1, 1)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.omega()[0], 0.5f64.sqrt(), epsilon = 1e-15);

        let g0 = make_gns(&clt_measure(0)).unwrap();
        assert_eq!(g0.dim(), 1);
        assert_eq!(g0.rep_x()[(0, 0)], 0.0);

        let gp = poisson_gns(1.5, 10).unwrap();
        for k in 1..6 {
            assert_abs_diff_eq!(gp.moment(k), 0.15, epsilon = 1e-15);
        }
        assert!(matches!(poisson_gns(3.0, 3), Err(Error::InvalidState(_))));
    }

    #[test]
    fn gns_reproduces_moments() {
        let mu = clt_measure(3);
        let g = make_gns(&mu).unwrap();
        for k in 0..8 {
            assert_abs_diff_eq!(g.moment(k), mu.moment(k), epsilon = 1e-12);
        }
    }

    #[test]
    fn default_clt_state_is_standardised() {
        let g = default_clt_gns();
        assert_abs_diff_eq!(g.moment(1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.moment(2), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.moment(4), 3.25, epsilon = 1e-13);
    }

    #[test]
    fn depth_one_uses_only_gamma_one() {
        // with m = 1, j_l = Γ_1: π(a) at (l, 1) and vacuum projections elsewhere
        let g = default_clt_gns();
        let cfg = SimConfig::new(2, 1, g.clone()).unwrap();
        let a = Observable::x();
        let v = apply_j(&cfg, 1, 1, &a, &cfg.vacuum()).unwrap();
        let w = apply_j_sum(&cfg, 1, &a, &cfg.vacuum()).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn single_outer_site_reduces_to_first_slot() {
        let g = bernoulli();
        let cfg = SimConfig::new(1, 3, g.clone()).unwrap();
        let x = Observable::x();
        let v = apply_j(&cfg, 1, 2, &x, &cfg.vacuum()).unwrap();
        assert!(v.is_zero());
        // moments of j(x) on one site are the moments of φ
        let word: Vec<_> = (0..4).map(|_| (1, x.clone())).collect();
        assert_abs_diff_eq!(correlation(&cfg, &word).unwrap(), g.moment(4), epsilon = 1e-12);
    }

    #[test]
    fn distinct_sites_factorize_means() {
        let g = make_gns(&DiscreteMeasure::new(vec![-1.0, 2.0], vec![0.5, 0.5]).unwrap()).unwrap();
        let x = Observable::x();
        for m in 1..=3 {
            let cfg = SimConfig::new(2, m, g.clone()).unwrap();
            let c = correlation(&cfg, &[(1, x.clone()), (2, x.clone())]).unwrap();
            assert_abs_diff_eq!(c, g.moment(1).powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn site_range_errors() {
        let cfg = SimConfig::new(2, 2, bernoulli()).unwrap();
        let x = Observable::x();
        assert!(matches!(
            apply_j(&cfg, 3, 1, &x, &cfg.vacuum()),
            Err(Error::SiteOutOfRange(_))
        ));
        assert!(matches!(
            apply_j(&cfg, 1, 3, &x, &cfg.vacuum()),
            Err(Error::SiteOutOfRange(_))
        ));
        assert!(matches!(
            correlation(&cfg, &vec![(1, x.clone()); 9]),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            SimConfig::new(7, 3, bernoulli()),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn correlation_examples() {
        let g = bernoulli();
        let x = Observable::x().centered(&g);
        let cfg = SimConfig::new(1, 2, g.clone()).unwrap();
        assert_abs_diff_eq!(
            correlation(&cfg, &[(1, x.clone()), (1, x.clone())]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // depth-3 nest at m = 2
        let nest = partition_of_tuple(&[1, 2, 3, 3, 2, 1]).unwrap();
        let cfg = SimConfig::new(3, 2, g.clone()).unwrap();
        let w = word_for_partition(&nest, &vec![x.clone(); 6]);
        assert_abs_diff_eq!(correlation(&cfg, &w).unwrap(), 0.0, epsilon = 1e-12);
        // crossing
        let cross = partition_of_tuple(&[1, 2, 1, 2]).unwrap();
        let cfg = SimConfig::new(2, 3, g.clone()).unwrap();
        let w = word_for_partition(&cross, &vec![x.clone(); 4]);
        assert_abs_diff_eq!(correlation(&cfg, &w).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pyramid_membership() {
        // n = 2: only (1, 1)
        assert!(in_pyramid(&[1, 1], 3));
        assert!(!in_pyramid(&[1, 2], 3));
        assert!(!in_pyramid(&[2, 1], 3));
        // n = 4, m = 2: (1, p2, p3, 1) with p2, p3 <= 2
        let mut members = Vec::new();
        for a in 1..=2 {
            for b in 1..=2 {
                for c in 1..=2 {
                    for d in 1..=2 {
                        if in_pyramid(&[a, b, c, d], 2) {
                            members.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        assert_eq!(members, vec![[1, 1, 1, 1], [1, 1, 2, 1], [1, 2, 1, 1], [1, 2, 2, 1]]);
        // reversal symmetry
        assert!(in_pyramid(&[1, 2, 3, 2, 1], 3));
        assert!(!in_pyramid(&[1, 2, 3, 3, 1], 3));
        assert!(in_theta(&[3, 3, 2, 1], 3));
        assert!(!in_pyramid_literal(&[1, 2, 2, 1], 2));
    }

    #[test]
    fn pyramid_two_letters() {
        let g = bernoulli();
        let x = Observable::x();
        let cfg = SimConfig::new(1, 3, g).unwrap();
        let r = pyramid_check(&cfg, &[(1, x.clone()), (1, x.clone())]).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.terms_total, 9);
    }

    #[test]
    fn pyramid_holds_for_all_partitions_of_four() {
        let g = default_clt_gns();
        for centered in [false, true] {
            let a = if centered { Observable::x().centered(&g) } else { Observable::x() };
            for p in enumerate_partitions(4).unwrap() {
                let cfg = SimConfig::new(p.num_blocks(), 2, g.clone()).unwrap();
                let r = pyramid_check(&cfg, &word_for_partition(&p, &vec![a.clone(); 4])).unwrap();
                assert!(r.pass, "{p}: {r:?}");
            }
        }
    }

    #[test]
    fn printed_index_reading_is_contradicted() {
        // (1, 2, 2, 1) contributes for the nested pairing at m = 2
        let g = bernoulli();
        let x = Observable::x().centered(&g);
        let nest = partition_of_tuple(&[1, 2, 2, 1]).unwrap();
        let cfg = SimConfig::new(2, 2, g).unwrap();
        let r = pyramid_check(&cfg, &word_for_partition(&nest, &vec![x; 4])).unwrap();
        assert!(r.pass);
        assert!(r.literal_reading_conflicts.contains(&vec![1, 2, 2, 1]));
    }

    #[test]
    fn permutation_invariance_and_factorization() {
        let g = default_clt_gns();
        let x = Observable::x();
        let x2 = Observable::x_pow(2);
        for m in 1..=3 {
            let cfg = SimConfig::new(3, m, g.clone()).unwrap();
            let base = [1, 2, 1, 3, 3, 2];
            let letters = [&x, &x2, &x, &x2, &x, &x];
            let word: Vec<_> = base.iter().zip(letters).map(|(&l, a)| (l, a.clone())).collect();
            let c0 = correlation(&cfg, &word).unwrap();
            for perm in [[2, 3, 1], [3, 1, 2], [1, 3, 2]] {
                let pw: Vec<_> = word.iter().map(|(l, a)| (perm[l - 1], a.clone())).collect();
                assert_abs_diff_eq!(correlation(&cfg, &pw).unwrap(), c0, epsilon = 1e-12);
            }
            // sites {1, 2} then {3}: factorizes
            let left = vec![(1, x.clone()), (2, x2.clone()), (1, x.clone())];
            let right = vec![(3, x.clone()), (3, x2.clone()), (3, x.clone())];
            let mut whole = left.clone();
            whole.extend(right.clone());
            let prod = correlation(&cfg, &left).unwrap() * correlation(&cfg, &right).unwrap();
            assert_abs_diff_eq!(correlation(&cfg, &whole).unwrap(), prod, epsilon = 1e-12);
        }
    }

    #[test]
    fn lemma_checks_pass_at_small_size() {
        let checks = verify_lemmas(&default_clt_gns(), 4, 2).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        assert!(checks.iter().any(|c| c.kind == LemmaKind::Deep));
        assert!(checks.iter().any(|c| c.kind == LemmaKind::Crossing));
    }

    #[test]
    fn finite_clt_examples() {
        let g = default_clt_gns();
        for m in 1..=3 {
            for n_sites in [1, 2, 5] {
                assert_abs_diff_eq!(
                    clt_moment_finite(&g, m, n_sites, 2).unwrap(),
                    1.0,
                    epsilon = 1e-12
                );
            }
        }
        // m = 1: 1 + (φ(x⁴) - 1) / N
        for n_sites in [2, 4, 8] {
            assert_abs_diff_eq!(
                clt_moment_finite(&g, 1, n_sites, 4).unwrap(),
                1.0 + 2.25 / n_sites as f64,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn finite_poisson_examples() {
        for m in 1..=3 {
            for n_sites in [2, 7, 20] {
                assert_abs_diff_eq!(
                    poisson_moment_finite(m, n_sites, 1, 1.5).unwrap(),
                    1.5,
                    epsilon = 1e-12
                );
            }
        }
        assert!(matches!(
            poisson_moment_finite(1, 2, 3, 2.0),
            Err(Error::InvalidState(_))
        ));
        let big = poisson_moment_finite(1, 10_000, 2, 1.0).unwrap();
        assert_abs_diff_eq!(big, 2.0, epsilon = 1e-3);
    }
}
