mod common;

use std::sync::Arc;

use common::{random_policy, small_alphabet, strings_upto, SMALL};
use num_bigint::BigUint;
use policy_synth::analyzer::{compare, Relation};
use policy_synth::fgdsl::{parse_fgspec, render_fgspec};
use policy_synth::pattern::{count_upto, Alphabet, Dfa};
use policy_synth::policy::{
    evaluate, glob_match, parse_policy, serialize_policy, serialize_policy_pretty, Decision,
    Effect, Matcher, Request, Statement,
};
use policy_synth::synth::extract_policy;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn abc() -> Arc<Alphabet> {
    Arc::new(Alphabet::new(['a', 'b', 'c']).unwrap())
}

fn glob() -> impl Strategy<Value = String> {
    "[abc*?]{0,6}"
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dfa(p: &str) -> Dfa {
    Dfa::compile_glob(p, abc()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dfa_agrees_with_glob_matcher(p in glob()) {
        let d = dfa(&p);
        for s in strings_upto(&['a', 'b', 'c'], 6) {
            prop_assert_eq!(d.accepts(&s), glob_match(&p, &s), "pattern {:?} on {:?}", p, s);
        }
    }

    #[test]
    fn count_equals_enumeration(p in glob(), k in 0usize..=5) {
        let expected = strings_upto(&['a', 'b', 'c'], k).iter().filter(|s| glob_match(&p, s)).count();
        prop_assert_eq!(count_upto(&dfa(&p), k).count, BigUint::from(expected));
    }

    #[test]
    fn de_morgan(p in glob(), q in glob()) {
        let (a, b) = (dfa(&p), dfa(&q));
        prop_assert_eq!(
            a.union(&b).unwrap().complement(),
            a.complement().intersect(&b.complement()).unwrap()
        );
        prop_assert_eq!(
            a.intersect(&b).unwrap().complement(),
            a.complement().union(&b.complement()).unwrap()
        );
        prop_assert_eq!(a.difference(&b).unwrap(), a.intersect(&b.complement()).unwrap());
    }

    #[test]
    fn complement_is_an_involution(p in glob()) {
        let a = dfa(&p);
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert!(a.union(&a.complement()).unwrap().is_universal());
        prop_assert!(a.intersect(&a.complement()).unwrap().is_empty());
    }

    #[test]
    fn codec_round_trip(seed in any::<u64>()) {
        let p = random_policy(&mut rng(seed), &['a', 'B', ':', '/', '-'], 4, 6);
        let text = serialize_policy(&p);
        let back = parse_policy(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(serialize_policy(&back), text);
        prop_assert_eq!(parse_policy(&serialize_policy_pretty(&p)).unwrap(), p);
    }

    #[test]
    fn extraction_inverts_serialization(seed in any::<u64>(), prose in "[A-Za-z ,.]{0,40}") {
        let p = random_policy(&mut rng(seed), &['x', 'Y', ':', '/'], 3, 5);
        let raw = format!("{prose}\n```json\n{}\n```\n{prose}", serialize_policy_pretty(&p));
        prop_assert_eq!(extract_policy(&raw).unwrap(), p);
    }

    #[test]
    fn fgspec_round_trip(
        lines in prop::collection::vec(
            (
                prop::sample::select(vec!["ALLOW", "DENY"]),
                prop::sample::select(vec!["user:alice", "role:ops-team", "service:ec2.amazonaws.com", "account:123456789012", "any"]),
                prop::sample::select(vec!["READ", "WRITE", "DELETE", "LIST", "ACL", "ec2:StartInstances", "iam:GetUser"]),
                prop::sample::select(vec!["*", "bucket:logs", "bucket:logs/", "bucket:data.lake/2024/", "bucket:b/key.txt", "arn:aws:ec2:*:ACCOUNT_ID:instance/*"]),
            ),
            1..6,
        )
    ) {
        let text: String = lines.iter().map(|(e, s, v, o)| format!("{e} {s} {v} {o}\n")).collect();
        let spec = parse_fgspec(&text).unwrap();
        prop_assert_eq!(render_fgspec(&spec), text.clone());
        prop_assert_eq!(parse_fgspec(&render_fgspec(&spec)).unwrap(), spec);
    }

    #[test]
    fn evaluation_ignores_statement_order(seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_policy(&mut g, &SMALL, 4, 3);
        let mut shuffled = p.clone();
        shuffled.statements.shuffle(&mut g);
        for pr in strings_upto(&SMALL, 2) {
            for ac in ["a", "ab", "AB", ""] {
                for re in strings_upto(&SMALL, 2) {
                    let r = Request { principal: pr.clone(), action: ac.into(), resource: re };
                    prop_assert_eq!(evaluate(&p, &r), evaluate(&shuffled, &r));
                }
            }
        }
    }

    #[test]
    fn matching_deny_dominates(seed in any::<u64>(), pr in "[abA]{0,3}", ac in "[abA]{0,3}", re in "[abA]{0,3}") {
        let mut p = random_policy(&mut rng(seed), &SMALL, 3, 3);
        let r = Request { principal: pr.clone(), action: ac.clone(), resource: re.clone() };
        let exact = |s: &str| Matcher::positive([if s.is_empty() { "*".to_string() } else { s.to_string() }]);
        let at = (seed as usize) % (p.statements.len() + 1);
        p.statements.insert(at, Statement {
            sid: None,
            effect: Effect::Deny,
            principal: exact(&pr),
            action: exact(&ac),
            resource: exact(&re),
        });
        prop_assert_eq!(evaluate(&p, &r), Decision::ExplicitDeny);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compare_mirrors(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (p1, p2) = (random_policy(&mut g, &SMALL, 3, 3), random_policy(&mut g, &SMALL, 3, 3));
        let al = small_alphabet();
        let ab = compare(&p1, &p2, &al, 4).unwrap();
        let ba = compare(&p2, &p1, &al, 4).unwrap();
        prop_assert_eq!(ab.relation, ba.relation.mirrored());
        prop_assert_eq!(ab.only_in_first, ba.only_in_second);
        prop_assert_eq!(ab.only_in_second, ba.only_in_first);
    }

    #[test]
    fn adding_an_allow_never_narrows(seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_policy(&mut g, &SMALL, 3, 3);
        let mut wider = p.clone();
        let mut extra = random_policy(&mut g, &SMALL, 1, 3).statements.remove(0);
        extra.effect = Effect::Allow;
        wider.statements.push(extra);
        let v = compare(&wider, &p, &small_alphabet(), 4).unwrap();
        prop_assert!(matches!(v.relation, Relation::Equivalent | Relation::FirstStrictlyMore), "{:?}", v.relation);
    }
}
