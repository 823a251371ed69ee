// Parsing, printing and validating models.
//
// ```bash
// cargo run --example model_syntax
// ```

use std::error::Error;

use cwc_sim::{format_rule, format_term, parse_model, ModelError};

const MODEL: &str = "\
%name transport
# a cell with a receptor in its membrane and two proteins inside
%term s*3 (r | p p)@cell
%rule TOP : s (r $W | $C)@cell $X => (r $W | s $C)@cell $X @ 0.5
%rule cell : s p $X => c $X @ 2
%observe s p c
%tstop 10
%delta 0.5
";

pub fn run() -> Result<(), Box<dyn Error>> {
    let model = parse_model(MODEL)?;
    println!(
        "model `{}`: {} rules, t_stop={}, delta={}",
        model.name,
        model.rules.len(),
        model.t_stop,
        model.delta
    );
    println!("initial: {}", format_term(&model.symbols, &model.initial));
    for (i, rule) in model.rules.iter().enumerate() {
        println!("  r{i}: {}", format_rule(&model.symbols, rule));
    }
    println!("observables: {}", model.observable_names().join(", "));

    // Errors carry enough context to point at the offending text.
    for bad in [
        "%rule TOP : a => b @ 1",
        "%rule TOP : a $X => $Y @ 1",
        "%rule TOP : a $X => $X @ 0",
        "%term (a | b",
    ] {
        let err: ModelError = parse_model(bad).unwrap_err();
        println!("{bad:<30} -> {err}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
