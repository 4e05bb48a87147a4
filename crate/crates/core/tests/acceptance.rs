//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines always print; exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psc_core::chainops::{self, Composite, CyclicHom, MatrixPushforward};
use psc_core::cycles::{self, special_basis, special_cycle, toda_cycle, Echelon, TodaSpec};
use psc_core::exactlin::{big_pow, reduce_big};
use psc_core::grouphom::{self, BasisIndex, Chain, GroupSpec, Ring};
use psc_core::positivity::{self, FailureReason, Outcome};
use psc_core::text::parse_chain;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spec(p: u64, a: &[u32]) -> GroupSpec {
    GroupSpec::new(p, a.to_vec()).unwrap()
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

fn cyclic_closed_form() -> Check {
    let mut count = 0;
    for p in [3u64, 5] {
        for alpha in 1..=3u32 {
            let s = spec(p, &[alpha]);
            for d in 0..=20u32 {
                let h = grouphom::homology(&s, d, Ring::Integers).map_err(|e| e.to_string())?;
                let want: Vec<BigInt> = if d == 0 {
                    vec![BigInt::zero()]
                } else if d % 2 == 1 {
                    vec![big_pow(p, alpha)]
                } else {
                    vec![]
                };
                ensure(h.invariant_factors == want, || format!("p={p} a={alpha} d={d}: {:?}", h.invariant_factors))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} (p, a, d) cases"))
}

fn kunneth_cross_check() -> Check {
    let mut count = 0;
    let mut specs = Vec::new();
    for n in 1..=3usize {
        let mut stack = vec![vec![]];
        for _ in 0..n {
            stack = stack
                .into_iter()
                .flat_map(|v: Vec<u32>| {
                    let lo = v.last().copied().unwrap_or(1);
                    (lo..=2).map(move |a| {
                        let mut w = v.clone();
                        w.push(a);
                        w
                    })
                })
                .collect();
        }
        specs.extend(stack);
    }
    for a in specs {
        let s = spec(3, &a);
        for d in 0..=12u32 {
            let h = grouphom::homology(&s, d, Ring::Integers).map_err(|e| e.to_string())?;
            let got = h.order().unwrap_or_else(BigInt::zero);
            let want = grouphom::kunneth_order_oracle(&s, d);
            ensure(got == want, || format!("{s} d={d}: {got} vs {want}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} (spec, d) cases"))
}

fn toda_obstruction() -> Check {
    for (p, kappa, alpha) in [(3u64, 1u32, 1u32), (3, 1, 2), (5, 1, 1)] {
        let s = spec(p, &[alpha, alpha]);
        let m2 = p.pow(kappa) as u32;
        let t = toda_cycle(&TodaSpec::new(p, vec![alpha, alpha], vec![1, m2]).unwrap()).unwrap();
        let got = chainops::milnor_chain(&t, kappa, alpha).map_err(|e| e.to_string())?;
        let want = Chain::basis(&s, Ring::ModPrimePower(alpha), vec![1, 1]).unwrap().scale(&big_pow(p, alpha - 1));
        ensure(got == want, || format!("p={p} k={kappa} a={alpha}: {got}"))?;
    }
    Ok("3 parameter sets".into())
}

fn random_hom(rng: &mut ChaCha8Rng, p: u64, source: u32) -> CyclicHom {
    loop {
        let target = rng.gen_range(1..=3u32);
        let unit = rng.gen_range(1..p);
        let shift = target.saturating_sub(source) + rng.gen_range(0..=1u32);
        let lambda = unit * p.pow(shift);
        if let Ok(h) = CyclicHom::new(p, source, target, lambda) {
            return h;
        }
    }
}

/// `boundary(F_d x) == F_(d-1)(boundary x)` on every basis chain of degree `d`.
fn commutes(f: &dyn Fn(u32) -> chainops::OpMatrix, d: u32) -> bool {
    let m = f(d);
    let lower = (d > 0).then(|| f(d - 1));
    grouphom::basis(m.spec_in.n(), d).into_iter().all(|e| {
        let x = Chain::basis(&m.spec_in, m.ring_in, e).unwrap();
        let left = grouphom::boundary(&m.apply(&x).unwrap());
        let bx = grouphom::boundary(&x);
        match &lower {
            None => left.is_zero(),
            Some(l) => left == l.apply(&bx).unwrap(),
        }
    })
}

fn induced_maps() -> Check {
    let p = 3u64;
    let ring = Ring::Integers;
    let golden = |h: CyclicHom, cases: &[(u32, u64)]| -> Result<(), String> {
        for &(d, k) in cases {
            let m = chainops::induced_cyclic_map(&h, d, ring).map_err(|e| e.to_string())?;
            let si = GroupSpec::cyclic(p, h.source).unwrap();
            let so = GroupSpec::cyclic(p, h.target).unwrap();
            let got = m.apply(&Chain::basis(&si, ring, vec![d]).unwrap()).unwrap();
            let want = Chain::basis(&so, ring, vec![d]).unwrap().scale(&big(k));
            ensure(got == want, || format!("{h:?} d={d}: {got}"))?;
        }
        Ok(())
    };
    golden(CyclicHom::new(p, 2, 2, 1).unwrap(), &[(0, 1), (1, 1), (2, 1), (5, 1), (8, 1)])?;
    golden(CyclicHom::new(p, 1, 2, p).unwrap(), &[(1, p), (2, 1), (3, p), (4, 1)])?;
    golden(CyclicHom::new(p, 2, 1, 1).unwrap(), &[(1, 1), (2, p), (3, p), (4, p * p)])?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let a = rng.gen_range(1..=3u32);
        let h1 = random_hom(&mut rng, p, a);
        let h2 = random_hom(&mut rng, p, h1.target);
        let comp = h1.then(&h2).map_err(|e| e.to_string())?;
        for d in 0..=16u32 {
            let m1 = chainops::induced_cyclic_map(&h1, d, ring).unwrap();
            let m2 = chainops::induced_cyclic_map(&h2, d, ring).unwrap();
            let m12 = chainops::induced_cyclic_map(&comp, d, ring).unwrap();
            ensure(m1.then(&m2).unwrap().matrix == m12.matrix, || format!("functoriality {h1:?} {h2:?} d={d}"))?;
        }
    }

    let mut maps = 0;
    for a in 1..=3u32 {
        for t in 1..=3u32 {
            for k in [1u64, 2, p, p * p] {
                let Ok(h) = CyclicHom::new(p, a, t, k) else { continue };
                let f = |d: u32| chainops::induced_cyclic_map(&h, d, ring).unwrap();
                for d in 0..=16u32 {
                    ensure(commutes(&f, d), || format!("chain map {h:?} d={d}"))?;
                }
                maps += 1;
            }
        }
    }
    let composites: Vec<(GroupSpec, Composite)> = vec![
        chainops::coproduct_composite(p, 1, 1, 1).unwrap(),
        chainops::coproduct_composite(p, 1, 2, p).unwrap(),
        chainops::smash_composite(p, 1, 2).unwrap(),
        (spec(p, &[1, 2]), Composite::Permutation { perm: vec![1, 0] }),
    ];
    for (s, f) in &composites {
        let g = |d: u32| chainops::composite_pushforward(f, s, d, ring).unwrap();
        for d in 0..=16u32 {
            ensure(commutes(&g, d), || format!("chain map {f:?} d={d}"))?;
        }
        maps += 1;
    }
    Ok(format!("3 golden sets, 20 random composites, {maps} maps commute with the boundary in degrees <= 16"))
}

fn reduced(c: &Chain) -> Chain {
    c.filter(|e| e.iter().all(|&x| x > 0))
}

fn toda2(s: &GroupSpec, m1: u32, m2: u32) -> Chain {
    toda_cycle(&TodaSpec::new(s.p, s.alphas.clone(), vec![m1, m2]).unwrap()).unwrap()
}

fn coprod_smash() -> Check {
    let p = 3u64;
    let mut cases = 0;
    for (a1, a2) in [(1u32, 1u32), (1, 2), (2, 2), (1, 3)] {
        let target = spec(p, &[a1, a2]);
        for gamma in [1u64, p] {
            let (src, f) = chainops::coproduct_composite(p, a1, a2, gamma).unwrap();
            for m in 1..=4u32 {
                let x = Chain::basis(&src, Ring::Integers, vec![2 * m + 1]).unwrap();
                let got = reduced(&f.apply(&x).unwrap());
                let mut want = Chain::zero(&target, Ring::Integers, 2 * m + 1);
                for j in 1..=m {
                    want = want.add_scaled(&toda2(&target, m - j + 1, j), &big(gamma.pow(j))).unwrap();
                }
                ensure(got == want, || format!("coprod a=({a1},{a2}) g={gamma} m={m}: {got}"))?;
                cases += 1;
            }
        }
        if a1 < a2 {
            let (src, f) = chainops::smash_composite(p, a1, a2).unwrap();
            for m in 1..=4u32 {
                let x = Chain::basis(&src, Ring::Integers, vec![2 * m + 1]).unwrap();
                let got = reduced(&f.apply(&x).unwrap());
                let mut want = Chain::zero(&target, Ring::Integers, 2 * m + 1);
                for j in 1..=m {
                    let k = big_pow(p, (j - 1) * (a2 - a1));
                    want = want.add_scaled(&toda2(&target, j, m - j + 1), &k).unwrap();
                }
                ensure(got == want, || format!("smash a=({a1},{a2}) m={m}: {got}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} formula instances"))
}

fn structure_map_and_lens_span() -> Check {
    let mut cases = 0;
    for n in 1..=3usize {
        let s = spec(3, &vec![1; n]);
        for d in 1..=14u32 {
            let sm = cycles::structure_map(&s, d).map_err(|e| e.to_string())?;
            ensure(sm.is_bijective(), || {
                format!("n={n} d={d}: structure map rank {} of {}", sm.rank(), sm.source.len())
            })?;
            let cinf = cycles::cinfty_basis(&s, d).map_err(|e| e.to_string())?;
            let lens = cycles::lens_span_basis(&s, d).map_err(|e| e.to_string())?;
            let idx = BasisIndex::reduced(n, d);
            let vec3 =
                |c: &Chain| -> Vec<u64> { c.to_vector(&idx).unwrap().iter().map(|x| reduce_big(x, 3)).collect() };
            let mut joint = Echelon::new(3, idx.len());
            let mut lens_rank = Echelon::new(3, idx.len());
            for c in &lens {
                lens_rank.insert(&vec3(c));
                joint.insert(&vec3(c));
            }
            for c in &cinf {
                joint.insert(&vec3(c));
            }
            ensure(lens_rank.rank() == cinf.len() && joint.rank() == cinf.len(), || {
                format!("n={n} d={d}: lens {} cinf {} joint {}", lens_rank.rank(), cinf.len(), joint.rank())
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (n, d) cases"))
}

fn vandermonde() -> Check {
    let mut cases = 0;
    for n in 1..=2usize {
        for d in 1..=12u32 {
            let (rank, target) = cycles::vandermonde_projection_rank(3, 1, n, d).map_err(|e| e.to_string())?;
            ensure(rank == target, || format!("n={n} d={d}: rank {rank} of {target}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (n, d) cases"))
}

fn toda_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let p = [3u64, 5, 7][rng.gen_range(0..3)];
        let k = rng.gen_range(1..=4usize);
        let mut exps: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
        exps.sort_unstable();
        let ms: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
        let t = TodaSpec::new(p, exps.clone(), ms.clone()).unwrap();
        let c = toda_cycle(&t).unwrap();
        let lhs = c.scale(&big_pow(p, exps[0]));
        let rhs = grouphom::boundary(&t.top_tensor());
        ensure(lhs == rhs, || format!("p={p} a={exps:?} m={ms:?}"))?;
        ensure(grouphom::is_cycle(&c), || format!("not a cycle: p={p} a={exps:?} m={ms:?}"))?;
    }
    Ok("50 random Toda specs".into())
}

fn lens_sweep_classes(s: &GroupSpec, d: u32) -> Vec<Chain> {
    let idx = BasisIndex::full(s.n(), d);
    let mut ech = Echelon::new(s.p, idx.len());
    let mut gens = Vec::new();
    let n = s.n();
    for k in 1..=3usize {
        for code in 0..s.p.pow((n * k) as u32) {
            let mut c = code;
            let mut rows = vec![vec![0u64; k]; n];
            for row in rows.iter_mut() {
                for x in row.iter_mut() {
                    *x = c % s.p;
                    c /= s.p;
                }
            }
            let pf = MatrixPushforward::new(s.p, 1, rows).unwrap();
            for (_, img) in pf.images(d, |e| e.iter().all(|x| x % 2 == 1), |_| true) {
                let y =
                    Chain::from_terms(s, Ring::ModPrimePower(1), d, img.into_iter().map(|(b, x)| (b, big(x)))).unwrap();
                let v: Vec<u64> = y.to_vector(&idx).unwrap().iter().map(|x| reduce_big(x, s.p)).collect();
                if ech.insert(&v) {
                    gens.push(positivity::integral_lift(&y).unwrap().expect("integral lift"));
                }
            }
        }
    }
    gens
}

fn certifier_sweep() -> Check {
    let s = spec(3, &[1, 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut certified, mut toral) = (0usize, 0usize);
    for d in 1..=9u32 {
        let gens = lens_sweep_classes(&s, d);
        let atoral_cycles: Vec<Chain> = special_basis(&s, d)
            .iter()
            .map(|x| special_cycle(&s, x).unwrap())
            .filter(|c| !positivity::is_p_toral(&s, c).unwrap().toral)
            .collect();
        for code in 0..3u64.pow(gens.len() as u32) {
            let mut c = code;
            let mut h = Chain::zero(&s, Ring::Integers, d);
            for g in &gens {
                h = h.add_scaled(g, &BigInt::from((c % 3) as i64 - 1)).unwrap();
                c /= 3;
            }
            if !atoral_cycles.is_empty() && rng.gen_bool(0.5) {
                let extra = &atoral_cycles[rng.gen_range(0..atoral_cycles.len())];
                h = h.add_scaled(extra, &big(3)).unwrap();
            }
            if h.is_zero() {
                continue;
            }
            match positivity::certify_atoral_bordism(&s, &h, true).map_err(|e| e.to_string())? {
                Outcome::Certified(cert) => {
                    ensure(positivity::verify_certificate(&cert), || format!("certificate for {h} does not verify"))?;
                    ensure(cert.root().map(|r| &r.chain) == Some(&h), || format!("root differs for {h}"))?;
                    certified += 1;
                }
                Outcome::Failed(FailureReason::NotAtoral { .. }) => toral += 1,
                Outcome::Failed(f) => return Err(format!("d={d} {h}: {}", f.tag())),
            }
        }
        for x in &atoral_cycles {
            let h = x.scale(&big(3));
            if h.is_zero() {
                continue;
            }
            match positivity::certify_atoral_bordism(&s, &h, true).map_err(|e| e.to_string())? {
                Outcome::Certified(cert) => {
                    ensure(positivity::verify_certificate(&cert), || format!("certificate for {h} does not verify"))?;
                    certified += 1;
                }
                Outcome::Failed(f) => return Err(format!("3 * ({x}): {}", f.tag())),
            }
        }
    }
    let h = parse_chain(&s, Ring::Integers, "T(c1,c5)").unwrap();
    match positivity::certify_atoral_bordism(&s, &h, true).map_err(|e| e.to_string())? {
        Outcome::Failed(FailureReason::ObstructedByMilnorDiff { witness, .. }) => {
            ensure(witness.to_string() == "c1*c1", || format!("witness {witness}"))?
        }
        o => return Err(format!("T(c1,c5) not rejected: {o:?}")),
    }
    match positivity::certify_atoral_bordism(&s, &h, false).map_err(|e| e.to_string())? {
        Outcome::Failed(FailureReason::Incomplete { .. }) => {}
        o => return Err(format!("T(c1,c5) without obstruction: {o:?}")),
    }
    Ok(format!("{certified} atoral classes certified and verified, {toral} toral skipped, T(c1,c5) rejected"))
}

fn torality_suite() -> Check {
    for n in 1..=4usize {
        for a in [1u32, 2] {
            let s = spec(3, &vec![a; n]);
            let c = Chain::basis(&s, Ring::Integers, vec![1; n]).unwrap();
            ensure(positivity::is_p_toral(&s, &c).unwrap().toral, || format!("c1^{n} over {s}"))?;
        }
    }
    let mut checked = 0;
    for a in [vec![1u32, 1], vec![1, 2], vec![1, 1, 1], vec![1, 1, 2], vec![2, 2, 3]] {
        let s = spec(3, &a);
        for d in (s.n() as u32 + 1)..=10 {
            for x in special_basis(&s, d) {
                let c = special_cycle(&s, &x).unwrap();
                ensure(!positivity::is_p_toral(&s, &c).unwrap().toral, || format!("{x} over {s} is toral"))?;
                checked += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let candidates: Vec<(GroupSpec, Chain)> = [vec![1u32, 1], vec![1, 2], vec![1, 1, 1]]
        .iter()
        .flat_map(|a| {
            let s = spec(3, a);
            (1..=5u32).flat_map(move |d| {
                let s2 = s.clone();
                special_basis(&s, d).into_iter().map(move |x| (s2.clone(), special_cycle(&s2, &x).unwrap()))
            })
        })
        .chain([(spec(3, &[1, 1]), parse_chain(&spec(3, &[1, 1]), Ring::Integers, "c1*c1").unwrap())])
        .collect();
    for _ in 0..100 {
        let (s, c) = &candidates[rng.gen_range(0..candidates.len())];
        let before = positivity::is_p_toral(s, c).unwrap().toral;
        let mut y = Chain::zero(s, Ring::Integers, c.degree + 1);
        for e in grouphom::basis(s.n(), c.degree + 1) {
            y.add_term(e, &BigInt::from(rng.gen_range(-3i64..=3))).unwrap();
        }
        let h = c.add(&grouphom::boundary(&y)).unwrap();
        ensure(positivity::is_p_toral(s, &h).unwrap().toral == before, || format!("{c} + boundary changed torality"))?;
    }
    Ok(format!("c1 tensors toral, {checked} special cycles atoral, 100 boundary perturbations invariant"))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("cyclic closed form", Duration::from_secs(5), cyclic_closed_form),
        ("Kunneth cross-check", Duration::from_secs(60), kunneth_cross_check),
        ("obstruction of T(c1, c_(2p^k-1))", Duration::from_secs(1), toda_obstruction),
        ("induced-map formulas", Duration::from_secs(120), induced_maps),
        ("coproduct and smash images", Duration::from_secs(60), coprod_smash),
        ("structure map and lens span", Duration::from_secs(300), structure_map_and_lens_span),
        ("Vandermonde surjectivity", Duration::from_secs(60), vandermonde),
        ("Toda boundary identity", Duration::from_secs(60), toda_identity),
        ("certifier sweep", Duration::from_secs(600), certifier_sweep),
        ("torality suite", Duration::from_secs(60), torality_suite),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let t = start.elapsed();
        let r = match r {
            Ok(msg) if t > limit => {
                Err(format!("{msg}; took {:.1}s over the {}s limit", t.as_secs_f64(), limit.as_secs()))
            }
            other => other,
        };
        match r {
            Ok(msg) => println!("PASS criterion {:>2} {name}: {msg} ({:.2}s)", i + 1, t.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {msg} ({:.2}s)", i + 1, t.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
