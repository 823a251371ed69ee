mod common;

use common::*;
use cwc_sim::matcher::{binomial, build_matchset};
use cwc_sim::parse_model;
use num_bigint::BigUint;
use proptest::prelude::*;

fn exact_binomial(n: u64, k: u64) -> BigUint {
    let mut num = BigUint::from(1u32);
    let mut den = BigUint::from(1u32);
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

#[test]
fn binomial_agrees_with_big_integers() {
    for n in 0..=70u64 {
        for k in 0..=n {
            let exact: f64 = exact_binomial(n, k).to_string().parse().unwrap();
            let got = binomial(n, k);
            assert!(
                ((got - exact) / exact).abs() <= 1e-15,
                "C({n},{k}) = {got}, want {exact}"
            );
        }
    }
    assert_eq!(exact_binomial(64, 32).to_string(), "1832624140942590534");
    assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534.0);
    for (n, k) in [(200, 100), (1000, 3), (1000, 500), (100_000, 50)] {
        let exact: f64 = exact_binomial(n, k).to_string().parse().unwrap();
        let got = binomial(n, k);
        assert!(
            ((got - exact) / exact).abs() < 1e-12,
            "C({n},{k}) = {got}, want {exact}"
        );
    }
    assert_eq!(binomial(20_000, 10_000), f64::INFINITY);
}

#[test]
fn two_reactants_in_four_molecules() {
    let m = parse_model("%term a a b b\n%rule TOP : a b $X => c $X @ 0.7").unwrap();
    let ms = build_matchset(&m, &m.initial);
    let e: Vec<_> = ms.iter().collect();
    assert_eq!(e.len(), 1);
    assert_eq!(e[0].combinations, 4.0);
    assert_eq!(e[0].rate, 4.0 * 0.7);
}

#[test]
fn random_pairs_match_enumeration() {
    let mut r = rng(0x5eed);
    for case in 0..300 {
        let text = random_model_text(&mut r, 20, 5);
        let model = parse_model(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        let oracle = oracle_matches(&model);
        let got = matcher_matches(&model, &model.initial);
        let got_counts: std::collections::BTreeMap<_, _> =
            got.iter().map(|(k, &(c, _))| (k.clone(), c as u64)).collect();
        assert_eq!(got_counts, oracle, "case {case}\n{text}");
        for ((rule, _, _), (c, rate)) in &got {
            assert_eq!(*rate, c * model.rules[*rule].k);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rule_order_does_not_change_rates(seed in any::<u64>()) {
        let mut r = rng(seed);
        let text = random_model_text(&mut r, 20, 5);
        let model = parse_model(&text).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let (rules, rest): (Vec<&str>, Vec<&str>) = lines.iter().partition(|l| l.starts_with("%rule"));
        let reversed: Vec<&str> = rest.iter().chain(rules.iter().rev()).copied().collect();
        let flipped = parse_model(&reversed.join("\n")).unwrap();
        let a = build_matchset(&model, &model.initial);
        let b = build_matchset(&flipped, &flipped.initial);
        let mut rb = b.rule_rates().to_vec();
        rb.reverse();
        prop_assert_eq!(a.rule_rates(), &rb[..]);
    }

    #[test]
    fn rates_scale_with_the_constant(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut r = rng(seed);
        let model = parse_model(&random_model_text(&mut r, 20, 5)).unwrap();
        let base = build_matchset(&model, &model.initial);
        let scaled = model.with_rate(0, model.rules[0].k * scale).unwrap();
        let ms = build_matchset(&scaled, &scaled.initial);
        let (x, y) = (base.rule_rates()[0], ms.rule_rates()[0]);
        prop_assert!((y - x * scale).abs() <= 1e-12 * y.abs().max(1.0));
        prop_assert_eq!(&base.rule_rates()[1..], &ms.rule_rates()[1..]);
    }
}
