mod common;

use std::sync::Arc;

use common::*;
use cwc_sim::rule::{Rule, Template};
use cwc_sim::ssa::{exponential_from_uniform, sample_exponential, Prng, StepOutcome};
use cwc_sim::term::{Atom, Multiset};
use cwc_sim::{parse_model, Model, SimulationInstance, Status, TrajectorySample};
use proptest::prelude::*;

fn template_count(t: &Template, atom: Atom) -> i64 {
    t.atoms.count(atom) as i64
        + t.compartments
            .iter()
            .map(|c| c.wrap_atoms.count(atom) as i64 + template_count(&c.content, atom))
            .sum::<i64>()
}

/// Net change of every observable when `rule` fires, for rules whose
/// variables each appear once on the right.
fn rule_delta(model: &Model, rule: &Rule) -> Vec<i64> {
    let lhs = |a: Atom| {
        let m: &Multiset = &rule.lhs.atoms;
        m.count(a) as i64
            + rule
                .lhs
                .compartment
                .as_ref()
                .map_or(0, |c| (c.wrap_atoms.count(a) + c.content.atoms.count(a)) as i64)
    };
    model
        .observables
        .iter()
        .map(|&a| template_count(&rule.rhs, a) - lhs(a))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_step_applies_one_rule_delta(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = Arc::new(parse_model(&random_model_text(&mut r, 20, 5)).unwrap());
        let deltas: Vec<Vec<i64>> = model.rules.iter().map(|rule| rule_delta(&model, rule)).collect();
        let mut inst = SimulationInstance::new(Arc::clone(&model), 0, seed);
        let mut before = inst.observe();
        for _ in 0..60 {
            match inst.step().unwrap() {
                StepOutcome::Stalled => break,
                StepOutcome::Stepped(dt) => {
                    prop_assert!(dt > 0.0);
                    let after = inst.observe();
                    let d: Vec<i64> = after.iter().zip(&before).map(|(&x, &y)| x as i64 - y as i64).collect();
                    prop_assert!(deltas.contains(&d), "change {:?} is not one of {:?}", d, deltas);
                    before = after;
                }
            }
        }
    }

    #[test]
    fn slicing_never_changes_a_trajectory(seed in any::<u64>(), cuts in prop::collection::vec(0.0f64..2.0, 0..6)) {
        let mut r = rng(seed);
        let model = Arc::new(parse_model(&random_model_text(&mut r, 20, 5)).unwrap());
        let whole = SimulationInstance::new(Arc::clone(&model), 3, seed).run_to_end().unwrap();
        let mut bounds = cuts.clone();
        bounds.sort_by(f64::total_cmp);
        bounds.push(model.t_stop);
        let mut inst = SimulationInstance::new(Arc::clone(&model), 3, seed);
        let mut sliced: Vec<TrajectorySample> = Vec::new();
        for b in bounds {
            inst.advance_until(b, &mut sliced).unwrap();
        }
        prop_assert!(inst.is_finished());
        prop_assert_eq!(whole, sliced);
    }
}

#[test]
fn decay_mean_follows_the_exponential_law() {
    let model = Arc::new(parse_model(DECAY).unwrap());
    let n = 400;
    let mut at_one = Vec::with_capacity(n);
    for i in 0..n {
        let samples = SimulationInstance::new(Arc::clone(&model), i, 99).run_to_end().unwrap();
        let s = samples.iter().find(|s| s.time == 1.0).unwrap();
        at_one.push(s.values[0] as f64);
    }
    let mean = at_one.iter().sum::<f64>() / n as f64;
    let var = at_one.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let expect = 1000.0 * (-1.0f64).exp();
    let se = (var / n as f64).sqrt();
    assert!(
        (mean - expect).abs() < 3.0 * se,
        "mean {mean}, expected {expect} ± {se}"
    );
    // Binomial(1000, e^-1) variance.
    let bvar = 1000.0 * (-1.0f64).exp() * (1.0 - (-1.0f64).exp());
    assert!((var / bvar - 1.0).abs() < 0.2, "variance {var} vs {bvar}");
}

#[test]
fn depleted_model_stalls_with_frozen_samples() {
    let model = Arc::new(parse_model("%term a*3\n%rule TOP : a $X => $X @ 50\n%tstop 4\n%delta 1").unwrap());
    let mut inst = SimulationInstance::new(Arc::clone(&model), 0, 1);
    let samples = inst.run_to_end().unwrap();
    assert_eq!(inst.status(), Status::Stalled);
    assert_eq!(samples.len(), 5);
    assert_eq!(samples.last().unwrap().values, vec![0]);
    assert_eq!(inst.events(), 3);
}

#[test]
fn exponential_sampler_moments() {
    let mut p = Prng::seeded(2024);
    let n = 200_000;
    let xs: Vec<f64> = (0..n).map(|_| sample_exponential(&mut p, 2.0)).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((mean / 0.5 - 1.0).abs() < 0.01, "{mean}");
    assert!((var / 0.25 - 1.0).abs() < 0.03, "{var}");
    assert_eq!(exponential_from_uniform(1.0, 3.0), 0.0);
    assert!(xs.iter().all(|x| x.is_finite() && *x >= 0.0));
}

#[test]
fn compartment_model_keeps_membranes_intact() {
    let model = Arc::new(parse_model(CELL).unwrap());
    let mut inst = SimulationInstance::new(Arc::clone(&model), 0, 5);
    inst.run_to_end().unwrap();
    assert_eq!(inst.term().compartment_count(), 2);
    let r = model.symbols.find_atom("r").unwrap();
    let wraps: u64 = inst.term().compartments.iter().map(|c| c.wrap.count(r)).sum();
    assert!(wraps >= 3);
}
