use mfree::cauchy::{build_poisson_hierarchy, poisson_moments};
use mfree::fock::{annihilate, create};
use mfree::hierarchy_sim::{correlation, default_clt_gns, pyramid_check};
use mfree::measures::{clt_measure, moment, poisson_measure};
use mfree::partitions::{catalan, count_nc, count_nc_pair, depth, is_noncrossing};
use mfree::ratfun::q;
use mfree::{FockSpace, FockVector, Observable, OneParticleVector, PairPartition, SimConfig};
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random non-crossing pairing of `2k` points starting at `offset + 1`.
fn random_nc_pairs(k: usize, offset: usize, rng: &mut ChaCha8Rng, out: &mut Vec<(usize, usize)>) {
    if k == 0 {
        return;
    }
    let inner = rng.gen_range(0..k);
    out.push((offset + 1, offset + 2 * inner + 2));
    random_nc_pairs(inner, offset + 1, rng, out);
    random_nc_pairs(k - 1 - inner, offset + 2 * inner + 2, rng, out);
}

/// Longest chain of nested pairs by dynamic programming over pairs sorted
/// by width.
fn nesting_oracle(pairs: &[(usize, usize)]) -> usize {
    let mut ps = pairs.to_vec();
    ps.sort_by_key(|&(a, b)| b - a);
    let mut best = vec![1; ps.len()];
    for i in 0..ps.len() {
        for j in 0..i {
            if ps[i].0 < ps[j].0 && ps[j].1 < ps[i].1 {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

fn letter() -> impl Strategy<Value = Observable> {
    prop::collection::vec(-1.0f64..1.0, 1..=3).prop_map(Observable)
}

fn random_vector(sp: &FockSpace, rng: &mut ChaCha8Rng) -> FockVector {
    let blocks = (0..=sp.depth())
        .map(|k| (0..sp.grade_dim(k)).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    FockVector::from_blocks(sp, blocks).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_depth_routes_agree(k in 0usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::new();
        random_nc_pairs(k, 0, &mut rng, &mut pairs);
        if k == 0 {
            return Ok(());
        }
        let p = PairPartition::from_pairs(&pairs).unwrap();
        prop_assert!(is_noncrossing(p.partition()));
        let d = depth(p.partition()).unwrap();
        prop_assert_eq!(p.chain_depth().unwrap(), d);
        prop_assert_eq!(nesting_oracle(&pairs), d);
    }

    #[test]
    fn crossing_pairings_have_no_depth(perm in Just((1..=8usize).collect::<Vec<_>>()).prop_shuffle()) {
        let pairs: Vec<(usize, usize)> = perm
            .chunks(2)
            .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
            .collect();
        let p = PairPartition::from_pairs(&pairs).unwrap();
        prop_assert_eq!(is_noncrossing(p.partition()), p.chain_depth().is_ok());
        prop_assert_eq!(is_noncrossing(p.partition()), depth(p.partition()).is_ok());
    }

    #[test]
    fn pair_counts_monotone_and_saturating(n in 0usize..60, m in 0usize..40) {
        let (a, b) = (count_nc_pair(n, m), count_nc_pair(n, m + 1));
        prop_assert!(a <= b);
        if 2 * m >= n {
            prop_assert_eq!(&a, &b);
            let expected = if n % 2 == 0 { catalan(n / 2) } else { 0u32.into() };
            prop_assert_eq!(a, expected);
        }
    }

    #[test]
    fn block_counts_sum_to_catalan(n in 0usize..30, extra in 0usize..3) {
        let total = (0..=n).map(|b| count_nc(n, b, n + extra)).sum::<num_bigint::BigUint>();
        prop_assert_eq!(total, catalan(n));
    }

    #[test]
    fn creation_and_annihilation_are_adjoint(m in 0usize..4, d in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = FockSpace::new(m, d).unwrap();
        let f = OneParticleVector((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let u = random_vector(&sp, &mut rng);
        let v = random_vector(&sp, &mut rng);
        let lhs = create(&sp, &f, &u).inner(&v);
        let rhs = u.inner(&annihilate(&sp, &f, &v));
        prop_assert!((lhs - rhs).abs() < 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn creators_fill_exactly_m_grades(m in 0usize..5, d in 1usize..4, cells in prop::collection::vec(0usize..3, 6)) {
        let sp = FockSpace::new(m, d).unwrap();
        let mut v = sp.vacuum();
        for (i, c) in cells.iter().take(m).enumerate() {
            v = create(&sp, &sp.cell(c % d), &v);
            prop_assert!(!v.is_zero(), "vanished after {} creators", i + 1);
        }
        v = create(&sp, &sp.cell(cells[5] % d), &v);
        prop_assert!(v.is_zero());
    }

    #[test]
    fn clt_measures_are_exactly_symmetric(m in 0usize..60) {
        let mu = clt_measure(m);
        let (a, w) = (mu.atoms(), mu.weights());
        let n = a.len();
        for i in 0..n {
            prop_assert_eq!(a[i], -a[n - 1 - i]);
            prop_assert_eq!(w[i], w[n - 1 - i]);
        }
    }

    #[test]
    fn poisson_measure_moments_match_series(m in 0usize..5, num in 1i64..12, den in 1i64..5) {
        let lam = q(num, den);
        let lf = lam.to_f64().unwrap();
        let h = build_poisson_hierarchy(m);
        let exact = poisson_moments(&h, m, &lam, 8).unwrap();
        let mu = poisson_measure(m, lf).unwrap();
        for (n, e) in exact.iter().enumerate() {
            let e = e.to_f64().unwrap();
            prop_assert!((moment(&mu, n) - e).abs() <= 1e-10 * e.abs().max(1.0), "n={} {} vs {}", n, moment(&mu, n), e);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relabelling_sites_keeps_correlation(
        m in 1usize..=3,
        sites in prop::collection::vec(0usize..3, 1..=6),
        letters in prop::collection::vec(letter(), 6),
        perm in Just(vec![1usize, 2, 3]).prop_shuffle(),
    ) {
        let cfg = SimConfig::new(3, m, default_clt_gns()).unwrap();
        let word: Vec<_> = sites.iter().zip(&letters).map(|(&l, a)| (l + 1, a.clone())).collect();
        let moved: Vec<_> = sites.iter().zip(&letters).map(|(&l, a)| (perm[l], a.clone())).collect();
        let (a, b) = (correlation(&cfg, &word).unwrap(), correlation(&cfg, &moved).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn disjoint_site_sets_factorize(
        m in 1usize..=3,
        left in prop::collection::vec(0usize..2, 1..=3),
        right in prop::collection::vec(2usize..4, 1..=3),
        letters in prop::collection::vec(letter(), 6),
    ) {
        let cfg = SimConfig::new(4, m, default_clt_gns()).unwrap();
        let w1: Vec<_> = left.iter().zip(&letters).map(|(&l, a)| (l + 1, a.clone())).collect();
        let w2: Vec<_> = right.iter().zip(&letters[3..]).map(|(&l, a)| (l + 1, a.clone())).collect();
        let whole: Vec<_> = w1.iter().chain(&w2).cloned().collect();
        let prod = correlation(&cfg, &w1).unwrap() * correlation(&cfg, &w2).unwrap();
        let c = correlation(&cfg, &whole).unwrap();
        prop_assert!((c - prod).abs() < 1e-12, "{} vs {}", c, prod);
    }

    #[test]
    fn only_pyramid_terms_contribute(
        m in 1usize..=3,
        sites in prop::collection::vec(0usize..3, 1..=6),
        letters in prop::collection::vec(letter(), 6),
    ) {
        let cfg = SimConfig::new(3, m, default_clt_gns()).unwrap();
        let word: Vec<_> = sites.iter().zip(&letters).map(|(&l, a)| (l + 1, a.clone())).collect();
        let r = pyramid_check(&cfg, &word).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }
}

#[test]
fn finite_clt_gap_halves_with_doubled_sites() {
    use mfree::hierarchy_sim::clt_moment_finite;
    let gns = default_clt_gns();
    for m in 1..=3 {
        for n in 1..=6 {
            let limit = count_nc_pair(n, m).to_f64().unwrap();
            let gap = |sites| (clt_moment_finite(&gns, m, sites, n).unwrap() - limit).abs();
            for r in [2, 4] {
                let (coarse, fine) = (gap(r), gap(2 * r));
                if n <= 2 {
                    // first and second moments are exact at every N
                    assert!(coarse < 1e-12 && fine < 1e-12, "m={m} n={n}: {coarse} {fine}");
                } else {
                    assert!(fine < coarse, "m={m} n={n} r={r}: {fine} !< {coarse}");
                }
            }
        }
    }
}
