use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

use psc_core::chainops::{self, CyclicHom};
use psc_core::cycles::{toda_cycle, TodaSpec};
use psc_core::exactlin::{self, big_pow, IntMatrix};
use psc_core::grouphom::{self, Chain, GroupSpec, Ring};
use psc_core::positivity;
use psc_core::text::parse_chain;

fn arb_spec(max_n: usize, max_alpha: u32) -> impl Strategy<Value = GroupSpec> {
    (prop_oneof![Just(3u64), Just(5u64)], prop::collection::vec(1..=max_alpha, 1..=max_n)).prop_map(|(p, mut a)| {
        a.sort_unstable();
        GroupSpec::new(p, a).unwrap()
    })
}

/// Chain with small random coefficients on every basis tensor of degree `d`.
fn arb_chain(spec: GroupSpec, ring: Ring, d: u32) -> impl Strategy<Value = Chain> {
    let basis = grouphom::basis(spec.n(), d);
    prop::collection::vec(-4i64..=4, basis.len()).prop_map(move |xs| {
        let mut c = Chain::zero(&spec, ring, d);
        for (e, x) in basis.iter().zip(xs) {
            c.add_term(e.clone(), &BigInt::from(x)).unwrap();
        }
        c
    })
}

fn spec_and_chain(max_n: usize, max_d: u32, ring: Ring) -> impl Strategy<Value = Chain> {
    (arb_spec(max_n, 3), 0..=max_d).prop_flat_map(move |(s, d)| arb_chain(s, ring, d))
}

/// Equal chains, treating zero chains of any degree as equal.
fn same(x: &Chain, y: &Chain) -> bool {
    (x.is_zero() && y.is_zero()) || x == y
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    if m.is_empty() {
        return BigInt::one();
    }
    let mut acc = BigInt::zero();
    for j in 0..m.len() {
        let minor: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let t = &m[0][j] * det(&minor);
        if j % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    psc_core::cycles::subsets(n, k)
}

/// gcd of all `k x k` minors.
fn determinantal_divisor(a: &[Vec<BigInt>], k: usize) -> BigInt {
    let mut g = BigInt::zero();
    for rs in subsets(a.len(), k) {
        for cs in subsets(a[0].len(), k) {
            let sub: Vec<Vec<BigInt>> = rs.iter().map(|&i| cs.iter().map(|&j| a[i][j].clone()).collect()).collect();
            g = g.gcd(&det(&sub));
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn snf_agrees_with_determinantal_divisors(rows in 1usize..=4, cols in 1usize..=4, seed in prop::collection::vec(-6i64..=6, 16)) {
        let dense: Vec<Vec<BigInt>> = (0..rows).map(|i| (0..cols).map(|j| BigInt::from(seed[i * 4 + j])).collect()).collect();
        let m = IntMatrix::from_dense(rows, cols, &dense);
        let snf = exactlin::smith_normal_form(&m);
        let prod = snf.u.mul(&m).unwrap().mul(&snf.v).unwrap();
        for i in 0..rows {
            for j in 0..cols {
                let want = if i == j { snf.d[i].clone() } else { BigInt::zero() };
                prop_assert_eq!(prod.get(i, j), want);
            }
        }
        prop_assert_eq!(snf.u.mul(&snf.u_inv).unwrap(), IntMatrix::identity(rows));
        for w in snf.d.windows(2) {
            prop_assert!(w[1].is_zero() || (!w[0].is_zero() && w[1].is_multiple_of(&w[0])));
        }
        let mut running = BigInt::one();
        for k in 1..=rows.min(cols) {
            running *= &snf.d[k - 1];
            prop_assert_eq!(running.clone(), determinantal_divisor(&dense, k));
        }
    }

    #[test]
    fn boundary_squares_to_zero(c in spec_and_chain(3, 10, Ring::Integers)) {
        prop_assert!(grouphom::boundary(&grouphom::boundary(&c)).is_zero());
    }

    #[test]
    fn mod_boundary_squares_to_zero(c in spec_and_chain(3, 10, Ring::ModPrimePower(2))) {
        prop_assert!(grouphom::boundary(&grouphom::boundary(&c)).is_zero());
    }

    #[test]
    fn homology_order_matches_kunneth(s in arb_spec(3, 3), d in 0u32..=8) {
        let h = grouphom::homology(&s, d, Ring::Integers).unwrap();
        prop_assert_eq!(h.order().unwrap_or_else(BigInt::zero), grouphom::kunneth_order_oracle(&s, d));
    }

    #[test]
    fn boundary_obeys_leibniz(a in spec_and_chain(2, 6, Ring::Integers), b in spec_and_chain(2, 6, Ring::Integers)) {
        prop_assume!(a.spec.p == b.spec.p);
        let lhs = grouphom::boundary(&chainops::cross(&a, &b).unwrap());
        let sign = if a.degree % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let rhs = chainops::cross(&grouphom::boundary(&a), &b).unwrap()
            .add(&chainops::cross(&a, &grouphom::boundary(&b)).unwrap().scale(&sign)).unwrap();
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn bockstein_is_a_left_signed_derivation(a in spec_and_chain(2, 8, Ring::ModPrimePower(1)), b in spec_and_chain(2, 8, Ring::ModPrimePower(1))) {
        prop_assume!(a.spec.p == b.spec.p);
        let ell = 1;
        let beta = |c: &Chain| chainops::bockstein_chain(c, ell).unwrap();
        let lhs = beta(&chainops::cross(&a, &b).unwrap());
        let sign = if a.degree % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let rhs = chainops::cross(&beta(&a), &b).unwrap()
            .add(&chainops::cross(&a, &beta(&b)).unwrap().scale(&sign)).unwrap();
        prop_assert!(same(&lhs, &rhs));
        prop_assert!(beta(&beta(&a)).is_zero());
    }

    #[test]
    fn milnor_is_a_right_signed_derivation(
        a in spec_and_chain(2, 14, Ring::ModPrimePower(1)),
        b in spec_and_chain(2, 14, Ring::ModPrimePower(1)),
    ) {
        prop_assume!(a.spec.p == b.spec.p);
        let mu = |c: &Chain| chainops::milnor_chain(c, 1, 1).unwrap();
        let lhs = mu(&chainops::cross(&a, &b).unwrap());
        let sign = if b.degree % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let left = if mu(&a).is_zero() { None } else { Some(chainops::cross(&mu(&a), &b).unwrap().scale(&sign)) };
        let right = if mu(&b).is_zero() { None } else { Some(chainops::cross(&a, &mu(&b)).unwrap()) };
        let rhs = match (left, right) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some(x),
            (Some(x), Some(y)) => Some(x.add(&y).unwrap()),
        };
        match rhs {
            None => prop_assert!(lhs.is_zero()),
            Some(r) => prop_assert!(same(&lhs, &r)),
        }
        prop_assert!(mu(&mu(&a)).is_zero());
    }

    #[test]
    fn induced_maps_are_functorial(a in 1u32..=3, b in 1u32..=3, c in 1u32..=3, u in 1u64..3, v in 1u64..3, s1 in 0u32..=1, s2 in 0u32..=1, d in 0u32..=12) {
        let p = 3u64;
        let h1 = CyclicHom::new(p, a, b, u * p.pow(b.saturating_sub(a) + s1));
        let h2 = CyclicHom::new(p, b, c, v * p.pow(c.saturating_sub(b) + s2));
        prop_assume!(h1.is_ok() && h2.is_ok());
        let (h1, h2) = (h1.unwrap(), h2.unwrap());
        let m1 = chainops::induced_cyclic_map(&h1, d, Ring::Integers).unwrap();
        let m2 = chainops::induced_cyclic_map(&h2, d, Ring::Integers).unwrap();
        let m12 = chainops::induced_cyclic_map(&h1.then(&h2).unwrap(), d, Ring::Integers).unwrap();
        prop_assert_eq!(m1.then(&m2).unwrap().matrix, m12.matrix);
    }

    #[test]
    fn toda_cycles_satisfy_the_boundary_identity(p in prop_oneof![Just(3u64), Just(5u64)], mut exps in prop::collection::vec(1u32..=3, 1..=4), ms in prop::collection::vec(1u32..=4, 4)) {
        exps.sort_unstable();
        let t = TodaSpec::new(p, exps.clone(), ms[..exps.len()].to_vec()).unwrap();
        let c = toda_cycle(&t).unwrap();
        prop_assert_eq!(c.scale(&big_pow(p, exps[0])), grouphom::boundary(&t.top_tensor()));
        prop_assert!(grouphom::is_cycle(&c));
    }

    #[test]
    fn torality_is_invariant_under_boundaries(s in arb_spec(3, 2), d in 1u32..=4, seed in any::<u64>()) {
        let cycles = grouphom::homology(&s, d, Ring::Integers).unwrap().representatives;
        prop_assume!(!cycles.is_empty());
        let c = cycles[(seed as usize) % cycles.len()].scale(&BigInt::from(1 + (seed % 5) as i64));
        let mut y = Chain::zero(&s, Ring::Integers, d + 1);
        for (i, e) in grouphom::basis(s.n(), d + 1).into_iter().enumerate() {
            y.add_term(e, &BigInt::from(((seed >> (i % 60)) % 7) as i64 - 3)).unwrap();
        }
        let h = c.add(&grouphom::boundary(&y)).unwrap();
        prop_assert_eq!(positivity::is_p_toral(&s, &c).unwrap().toral, positivity::is_p_toral(&s, &h).unwrap().toral);
    }

    #[test]
    fn chain_text_round_trips(c in spec_and_chain(3, 8, Ring::Integers)) {
        let text = c.to_string();
        let back = parse_chain(&c.spec, Ring::Integers, &text).unwrap();
        prop_assert!(same(&back, &c));
    }
}
