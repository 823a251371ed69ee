mod common;

use common::*;
use cwc_sim::syntax::format_multiset;
use cwc_sim::term::Symbols;
use cwc_sim::{format_rule, format_term, parse_model, parse_term, ModelError};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn formatted_terms_parse_back(seed in any::<u64>()) {
        let mut r = rng(seed);
        let text = random_term_text(&mut r, 20);
        let mut s = Symbols::new();
        let t = parse_term(&mut s, &text).unwrap();
        let shown = format_term(&s, &t);
        let mut s2 = Symbols::new();
        let back = parse_term(&mut s2, &shown).unwrap();
        prop_assert_eq!(format_term(&s2, &back), shown.clone());
        for name in ATOMS {
            let a = s.find_atom(name).map_or(0, |a| t.species_total(a));
            let b = s2.find_atom(name).map_or(0, |a| back.species_total(a));
            prop_assert_eq!(a, b, "{} in {}", name, shown);
        }
        prop_assert_eq!(t.compartment_count(), back.compartment_count());
    }

    #[test]
    fn formatted_rules_parse_back(seed in any::<u64>()) {
        let mut r = rng(seed);
        let text = random_rule_text(&mut r);
        let m = parse_model(&format!("%rule {text}")).unwrap();
        let shown = format_rule(&m.symbols, &m.rules[0]);
        let again = parse_model(&format!("%rule {shown}")).unwrap();
        prop_assert_eq!(format_rule(&again.symbols, &again.rules[0]), shown);
        prop_assert_eq!(again.rules[0].k, m.rules[0].k);
    }
}

#[test]
fn canonical_forms() {
    let mut s = Symbols::new();
    let t = parse_term(&mut s, "b a a*2 (x | b)@l ( | )@k").unwrap();
    assert_eq!(format_term(&s, &t), "a*3 b (|)@k (x | b)@l");
    assert_eq!(format_multiset(&s, &t.atoms), "a*3 b");
}

#[test]
fn errors_point_at_the_problem() {
    match parse_model("%term a\n%rule l : a $X => $X @ zero") {
        Err(ModelError::Syntax { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_model("%bogus"),
        Err(ModelError::UnknownDirective { .. })
    ));
    assert!(matches!(
        parse_model("%tstop 1\n%delta 2"),
        Err(ModelError::DeltaExceedsStop { .. })
    ));
    assert!(matches!(
        parse_model("%term a\n%term b"),
        Err(ModelError::DuplicateDirective { .. })
    ));
}
