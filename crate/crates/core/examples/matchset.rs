// Inspecting the matchset: which rules apply where, and how fast.

use std::error::Error;

use cwc_sim::{build_matchset, parse_model};

pub fn run() -> Result<(), Box<dyn Error>> {
    // Two a's and two b's can pair up in 2 x 2 = 4 ways.
    let m = parse_model("%term a a b b\n%rule TOP : a b $X => c $X @ 0.1")?;
    let ms = build_matchset(&m, &m.initial);
    for e in ms.iter() {
        println!(
            "rule r{} at {}: {} combinations, rate {}",
            e.rule, e.context, e.combinations, e.rate
        );
    }

    // A rule labelled `l` fires inside every `l` compartment, at any depth.
    let nested = parse_model(
        "%term (| a*3 b (| a b*2)@l)@l (| a)@m\n\
         %rule l : a b $X => c $X @ 1\n\
         %rule TOP : ($W | a $C)@m $X => $X @ 2",
    )?;
    let ms = build_matchset(&nested, &nested.initial);
    for (i, rate) in ms.rule_rates().iter().enumerate() {
        println!("r{i}: total rate {rate}");
        for e in ms.rule_entries(i) {
            println!(
                "    context {:<5} compartment {:?} -> {}",
                e.context.to_string(),
                e.compartment,
                e.combinations
            );
        }
    }
    println!("total propensity {}", ms.total_rate());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
