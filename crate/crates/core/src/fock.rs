//! Truncated m-free Fock space `C ⊕ H ⊕ H^{⊗2} ⊕ … ⊕ H^{⊗m}` over a
//! `d`-dimensional one-particle space of orthonormal unit cells.
//!
//! Creation tensors on the left and is killed on the top grade; annihilation
//! contracts the leftmost slot.

use nalgebra::DMatrix;

use crate::partitions::{depth, enumerate_pair_partitions, is_noncrossing};
use crate::{Error, Result};

/// Largest total dimension for which explicit operator matrices are built.
pub const MATRIX_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    m: usize,
    d: usize,
}

impl FockSpace {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Size("one-particle dimension must be positive".into()));
        }
        Ok(FockSpace { m, d })
    }

    pub fn depth(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> usize {
        self.d
    }

    pub fn grade_dim(&self, k: usize) -> usize {
        self.d.pow(k as u32)
    }

    /// `1 + d + … + d^m`
    pub fn dimension(&self) -> usize {
        (0..=self.m).map(|k| self.grade_dim(k)).sum()
    }

    pub fn vacuum(&self) -> FockVector {
        let mut v = FockVector::zero(self);
        v.blocks[0][0] = 1.0;
        v
    }

    /// Unit cell `e_i` as a one-particle vector.
    pub fn cell(&self, i: usize) -> OneParticleVector {
        let mut c = vec![0.0; self.d];
        c[i] = 1.0;
        OneParticleVector(c)
    }
}

/// Step function on `d` unit cells.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParticleVector(pub Vec<f64>);

impl OneParticleVector {
    pub fn dot(&self, other: &OneParticleVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Graded coefficient blocks; block `k` is a flattened `d^k` tensor with the
/// leftmost slot most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    blocks: Vec<Vec<f64>>,
}

impl FockVector {
    pub fn zero(sp: &FockSpace) -> Self {
        FockVector {
            blocks: (0..=sp.m).map(|k| vec![0.0; sp.grade_dim(k)]).collect(),
        }
    }

    pub fn from_blocks(sp: &FockSpace, blocks: Vec<Vec<f64>>) -> Result<Self> {
        if blocks.len() != sp.m + 1
            || blocks
                .iter()
                .enumerate()
                .any(|(k, b)| b.len() != sp.grade_dim(k))
        {
            return Err(Error::Size("block sizes do not match the Fock space".into()));
        }
        Ok(FockVector { blocks })
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn grade(&self, k: usize) -> &[f64] {
        &self.blocks[k]
    }

    pub fn inner(&self, other: &FockVector) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().flatten().all(|&x| x == 0.0)
    }

    fn add_assign(&mut self, other: &FockVector) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// Flattened coordinates, grade by grade.
    pub fn flatten(&self) -> Vec<f64> {
        self.blocks.iter().flatten().copied().collect()
    }
}

pub fn create(sp: &FockSpace, f: &OneParticleVector, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero(sp);
    for k in 0..sp.m {
        let src = &v.blocks[k];
        let dst = &mut out.blocks[k + 1];
        let stride = src.len();
        for (i, &fi) in f.0.iter().enumerate() {
            if fi == 0.0 {
                continue;
            }
            for (j, &x) in src.iter().enumerate() {
                dst[i * stride + j] = fi * x;
            }
        }
    }
    out
}

pub fn annihilate(sp: &FockSpace, f: &OneParticleVector, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero(sp);
    for k in 1..=sp.m {
        let src = &v.blocks[k];
        let dst = &mut out.blocks[k - 1];
        let stride = dst.len();
        for (i, &fi) in f.0.iter().enumerate() {
            if fi == 0.0 {
                continue;
            }
            for (j, y) in dst.iter_mut().enumerate() {
                *y += fi * src[i * stride + j];
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Create,
    Annihilate,
}

/// A product of creation/annihilation operators, leftmost factor first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorWord(pub Vec<(OpKind, OneParticleVector)>);

impl OperatorWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn kinds(&self) -> Vec<OpKind> {
        self.0.iter().map(|(k, _)| *k).collect()
    }

    /// Applies the word right-to-left to `v`.
    pub fn apply(&self, sp: &FockSpace, v: &FockVector) -> FockVector {
        self.0.iter().rev().fold(v.clone(), |acc, (kind, f)| match kind {
            OpKind::Create => create(sp, f, &acc),
            OpKind::Annihilate => annihilate(sp, f, &acc),
        })
    }
}

/// `⟨Ω, w Ω⟩`
pub fn vacuum_expectation(sp: &FockSpace, w: &OperatorWord) -> f64 {
    let omega = sp.vacuum();
    omega.inner(&w.apply(sp, &omega))
}

/// Sum over non-crossing pair partitions of depth `<= m` whose pairs `(i, j)`
/// join an annihilator at `i` with a creator at `j`, each weighted by the
/// product of one-particle inner products.
pub fn combinatorial_expectation(m: usize, w: &OperatorWord) -> f64 {
    let n = w.len();
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    let creators = w.0.iter().filter(|(k, _)| *k == OpKind::Create).count();
    if 2 * creators != n {
        return 0.0;
    }
    let mut total = 0.0;
    for p in enumerate_pair_partitions(n) {
        let admissible = p.pairs().iter().all(|&(i, j)| {
            w.0[i - 1].0 == OpKind::Annihilate && w.0[j - 1].0 == OpKind::Create
        });
        if !admissible || !is_noncrossing(p.partition()) {
            continue;
        }
        if depth(p.partition()).expect("non-crossing") > m {
            continue;
        }
        total += p
            .pairs()
            .iter()
            .map(|&(i, j)| w.0[i - 1].1.dot(&w.0[j - 1].1))
            .product::<f64>();
    }
    total
}

/// Vacuum moments `⟨Ω, x(f)^n Ω⟩`, `x(f) = a*(f) + a(f)`, for `n = 0..=n_max`.
pub fn field_moments(sp: &FockSpace, f: &OneParticleVector, n_max: usize) -> Result<Vec<f64>> {
    if (f.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "field moments need a unit vector, got norm {}",
            f.norm()
        )));
    }
    let omega = sp.vacuum();
    let mut v = omega.clone();
    let mut out = Vec::with_capacity(n_max + 1);
    for _ in 0..=n_max {
        out.push(omega.inner(&v));
        let mut next = create(sp, f, &v);
        next.add_assign(&annihilate(sp, f, &v));
        v = next;
    }
    Ok(out)
}

fn operator_matrix(
    sp: &FockSpace,
    op: impl Fn(&FockVector) -> FockVector,
) -> Result<DMatrix<f64>> {
    let dim = sp.dimension();
    if dim > MATRIX_DIM_CAP {
        return Err(Error::CapExceeded {
            what: "Fock space dimension",
            cap: MATRIX_DIM_CAP,
            requested: dim,
        });
    }
    let mut mat = DMatrix::zeros(dim, dim);
    let mut col = 0;
    for k in 0..=sp.m {
        for i in 0..sp.grade_dim(k) {
            let mut e = FockVector::zero(sp);
            e.blocks[k][i] = 1.0;
            for (row, x) in op(&e).flatten().into_iter().enumerate() {
                mat[(row, col)] = x;
            }
            col += 1;
        }
    }
    Ok(mat)
}

/// Explicit matrix of `a*(f)` in the graded basis.
pub fn create_matrix(sp: &FockSpace, f: &OneParticleVector) -> Result<DMatrix<f64>> {
    operator_matrix(sp, |v| create(sp, f, v))
}

/// Explicit matrix of `a(f)` in the graded basis.
pub fn annihilate_matrix(sp: &FockSpace, f: &OneParticleVector) -> Result<DMatrix<f64>> {
    operator_matrix(sp, |v| annihilate(sp, f, v))
}

/// `⟨Ω, w Ω⟩` computed from explicit operator matrices; the vacuum is the
/// first basis vector.
pub fn matrix_expectation(sp: &FockSpace, w: &OperatorWord) -> Result<f64> {
    let dim = sp.dimension();
    let mut v = nalgebra::DVector::zeros(dim);
    v[0] = 1.0;
    for (kind, f) in w.0.iter().rev() {
        let mat = match kind {
            OpKind::Create => create_matrix(sp, f)?,
            OpKind::Annihilate => annihilate_matrix(sp, f)?,
        };
        v = mat * v;
    }
    Ok(v[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::clt_measure;
    use approx::assert_abs_diff_eq;

    fn word(items: &[(OpKind, &OneParticleVector)]) -> OperatorWord {
        OperatorWord(items.iter().map(|(k, f)| (*k, (*f).clone())).collect())
    }

    #[test]
    fn dimensions() {
        let sp = FockSpace::new(3, 2).unwrap();
        assert_eq!(sp.dimension(), 1 + 2 + 4 + 8);
        assert!(FockSpace::new(2, 0).is_err());
    }

    #[test]
    fn creation_is_killed_on_top_grade() {
        let sp = FockSpace::new(1, 2).unwrap();
        let f = sp.cell(0);
        let once = create(&sp, &f, &sp.vacuum());
        assert_eq!(once.grade(1), &[1.0, 0.0]);
        assert!(create(&sp, &f, &once).is_zero());
    }

    #[test]
    fn creation_tensors_on_the_left() {
        let sp = FockSpace::new(2, 2).unwrap();
        let (f, g) = (sp.cell(0), sp.cell(1));
        let gf = create(&sp, &g, &create(&sp, &f, &sp.vacuum()));
        // g ⊗ f = e_1 ⊗ e_0 sits at flat index 1 * 2 + 0
        assert_eq!(gf.grade(2), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn annihilation_contracts_first_slot() {
        let sp = FockSpace::new(2, 2).unwrap();
        let (f, g) = (sp.cell(0), sp.cell(1));
        let fg = create(&sp, &f, &create(&sp, &g, &sp.vacuum()));
        let back = annihilate(&sp, &f, &fg);
        assert_eq!(back.grade(1), &[0.0, 1.0]);
        assert!(annihilate(&sp, &f, &sp.vacuum()).is_zero());
        let gg = create(&sp, &g, &create(&sp, &g, &sp.vacuum()));
        assert!(annihilate(&sp, &f, &gg).is_zero());
    }

    #[test]
    fn vacuum_expectation_examples() {
        let sp = FockSpace::new(2, 2).unwrap();
        let f = OneParticleVector(vec![0.6, 0.8]);
        use OpKind::*;
        assert_abs_diff_eq!(
            vacuum_expectation(&sp, &word(&[(Annihilate, &f), (Create, &f)])),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(
            vacuum_expectation(&sp, &word(&[(Create, &f), (Annihilate, &f)])),
            0.0
        );
    }

    #[test]
    fn combinatorial_examples() {
        use OpKind::*;
        let f = OneParticleVector(vec![0.3, 0.4]);
        let g = OneParticleVector(vec![-1.0, 2.0]);
        assert_abs_diff_eq!(
            combinatorial_expectation(1, &word(&[(Annihilate, &f), (Create, &g)])),
            f.dot(&g),
            epsilon = 1e-15
        );
        let f1 = OneParticleVector(vec![1.0, 0.5]);
        let f2 = OneParticleVector(vec![0.2, -1.0]);
        let f3 = OneParticleVector(vec![0.7, 0.1]);
        let f4 = OneParticleVector(vec![-0.4, 0.9]);
        let w = word(&[(Annihilate, &f1), (Annihilate, &f2), (Create, &f3), (Create, &f4)]);
        assert_eq!(combinatorial_expectation(1, &w), 0.0);
        assert_abs_diff_eq!(
            combinatorial_expectation(2, &w),
            f2.dot(&f3) * f1.dot(&f4),
            epsilon = 1e-15
        );
        let odd = word(&[(Annihilate, &f1), (Create, &f2), (Create, &f3)]);
        assert_eq!(combinatorial_expectation(3, &odd), 0.0);
    }

    #[test]
    fn alternating_words_differ_by_deep_pairings() {
        // a a a* a a* a* has the single admissible pairing {1,6}{2,3}{4,5} of depth 2
        use OpKind::*;
        let f = OneParticleVector(vec![1.0]);
        let w = word(&[
            (Annihilate, &f),
            (Annihilate, &f),
            (Create, &f),
            (Annihilate, &f),
            (Create, &f),
            (Create, &f),
        ]);
        let sp1 = FockSpace::new(1, 1).unwrap();
        let sp3 = FockSpace::new(3, 1).unwrap();
        assert_eq!(vacuum_expectation(&sp1, &w), 0.0);
        assert_eq!(vacuum_expectation(&sp3, &w), 1.0);
        assert_eq!(combinatorial_expectation(1, &w), 0.0);
        assert_eq!(combinatorial_expectation(3, &w), 1.0);
    }

    #[test]
    fn field_moment_examples() {
        let sp = FockSpace::new(2, 2).unwrap();
        let f = sp.cell(1);
        let mo = field_moments(&sp, &f, 6).unwrap();
        assert_abs_diff_eq!(mo[4], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mo[2], 1.0, epsilon = 1e-12);
        let sp1 = FockSpace::new(1, 2).unwrap();
        assert_abs_diff_eq!(field_moments(&sp1, &f, 6).unwrap()[6], 1.0, epsilon = 1e-12);
        assert!(field_moments(&sp, &OneParticleVector(vec![1.0, 1.0]), 2).is_err());
    }

    #[test]
    fn matrices_are_adjoint_and_field_spectrum_is_clt_measure() {
        for m in 0..=5 {
            let sp = FockSpace::new(m, 1).unwrap();
            let f = sp.cell(0);
            let c = create_matrix(&sp, &f).unwrap();
            let a = annihilate_matrix(&sp, &f).unwrap();
            assert_eq!(c.transpose(), a);
            let x = &c + &a;
            let mut eig: Vec<f64> = x.symmetric_eigen().eigenvalues.iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            for (e, z) in eig.iter().zip(clt_measure(m).atoms()) {
                assert_abs_diff_eq!(*e, *z, epsilon = 1e-10);
            }
        }
        let big = FockSpace::new(12, 2).unwrap();
        assert!(matches!(
            create_matrix(&big, &big.cell(0)),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn matrix_route_agrees() {
        let sp = FockSpace::new(2, 2).unwrap();
        let f = OneParticleVector(vec![0.3, -0.7]);
        let g = OneParticleVector(vec![0.5, 0.1]);
        let w = word(&[
            (OpKind::Annihilate, &f),
            (OpKind::Annihilate, &g),
            (OpKind::Create, &f),
            (OpKind::Create, &g),
        ]);
        let direct = vacuum_expectation(&sp, &w);
        assert_abs_diff_eq!(matrix_expectation(&sp, &w).unwrap(), direct, epsilon = 1e-14);
        assert_abs_diff_eq!(direct, combinatorial_expectation(2, &w), epsilon = 1e-14);
    }
}
