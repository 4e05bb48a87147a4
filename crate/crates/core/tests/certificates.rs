use num_bigint::BigInt;

use psc_core::grouphom::{GroupSpec, Ring};
use psc_core::positivity::{self, Certificate, FailureReason, Outcome, Rule};
use psc_core::text::parse_chain;

fn spec(a: &[u32]) -> GroupSpec {
    GroupSpec::new(3, a.to_vec()).unwrap()
}

fn certify(a: &[u32], text: &str) -> Outcome {
    let s = spec(a);
    positivity::certify_atoral_bordism(&s, &parse_chain(&s, Ring::Integers, text).unwrap(), true).unwrap()
}

#[test]
fn certificates_survive_json() {
    let Outcome::Certified(c) = certify(&[1, 1, 2], "c1*T(c1,c3)") else { panic!() };
    let text = serde_json::to_string(&c).unwrap();
    let back: Certificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    assert!(positivity::verify_certificate(&back));
}

#[test]
fn drei_and_toda_of_positives() {
    let Outcome::Certified(c) = certify(&[1, 1], "T(c1,c1)") else { panic!() };
    assert!(c.uses("DreiTriple"));
    let Outcome::Certified(c) = certify(&[1, 1, 1], "T(c1,c1,c1)") else { panic!() };
    assert!(c.uses("DreiTriple"));
    let Outcome::Certified(c) = certify(&[1, 1], "T(c3,c3)") else { panic!() };
    assert!(c.uses("TodaOfPositives"));
}

#[test]
fn p_multiples_use_divisibility_rules() {
    let Outcome::Certified(c) = certify(&[1, 1], "3*T(c1,c5)") else { panic!("3 T(c1,c5)") };
    assert!(positivity::verify_certificate(&c));
    let Outcome::Certified(c) = certify(&[2, 2], "3*T(c1,c5)") else { panic!("3 T(c1,c5) over (2,2)") };
    assert!(c.uses("CalcTimesP"));
    let Outcome::Certified(c) = certify(&[2, 2, 2], "3*T(c1,c3,c1)") else { panic!("3 T(c1,c3,c1)") };
    assert!(c.uses("BplDivisible"));
}

#[test]
fn mixed_exponents_use_bpl() {
    let Outcome::Certified(c) = certify(&[1, 1, 2], "T(c1,c1,c3)") else { panic!() };
    assert!(c.uses("BplMixed"));
}

#[test]
fn toral_classes_are_reported() {
    match certify(&[1, 1], "c1*c1") {
        Outcome::Failed(FailureReason::NotAtoral { subset, ell }) => {
            assert_eq!(subset, vec![0, 1]);
            assert_eq!(ell, Some(1));
        }
        o => panic!("{o:?}"),
    }
}

#[test]
fn axiom_instances_verify() {
    for (a, d) in [(vec![1u32], 3u32), (vec![1, 1], 3), (vec![1, 1], 7), (vec![1, 2], 5), (vec![1, 1, 1], 5)] {
        let s = spec(&a);
        let inst = positivity::axiom_instances(&s, d).unwrap();
        assert!(!inst.is_empty(), "{s} d={d}");
        for (chain, cert) in &inst {
            assert!(positivity::verify_certificate(cert), "{chain}");
            assert_eq!(&cert.root().unwrap().chain, chain);
        }
    }
    let s = spec(&[1, 1]);
    let inst = positivity::axiom_instances(&s, 7).unwrap();
    let want = parse_chain(&s, Ring::Integers, "3*T(c1,c5)").unwrap();
    assert!(inst.iter().any(|(c, cert)| c == &want && cert.uses("CalcTimesP")));
}

#[test]
fn forged_nodes_fail_verification() {
    let s = spec(&[1, 1]);
    let t = parse_chain(&s, Ring::Integers, "T(c1,c5)").unwrap();
    let forged = Certificate {
        schema: 1,
        assume_bordism: true,
        nodes: vec![positivity::Node {
            rule: Rule::BplMixed { ms: vec![1, 3] },
            spec: s.clone(),
            chain: t.clone(),
            children: vec![],
        }],
    };
    assert!(!positivity::verify_certificate(&forged));
    let lc = Certificate {
        schema: 1,
        assume_bordism: true,
        nodes: vec![positivity::Node {
            rule: Rule::LinearCombination { coeffs: vec![] },
            spec: s.clone(),
            chain: t.scale(&BigInt::from(2)),
            children: vec![],
        }],
    };
    assert!(!positivity::verify_certificate(&lc));
}
