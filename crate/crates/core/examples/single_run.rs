// One stochastic trajectory, run straight through and in slices.

use std::error::Error;
use std::sync::Arc;

use cwc_sim::ssa::{FnSink, StepOutcome};
use cwc_sim::{format_term, parse_model, SimulationInstance, TrajectorySample};

const DIMER: &str = "%term m*40\n\
%rule TOP : m m $X => d $X @ 0.01\n\
%rule TOP : d $X => m m $X @ 0.5\n\
%observe d m\n%tstop 5\n%delta 1";

pub fn run() -> Result<(), Box<dyn Error>> {
    let model = Arc::new(parse_model(DIMER)?);

    let mut inst = SimulationInstance::new(Arc::clone(&model), 0, 7);
    for _ in 0..3 {
        if let StepOutcome::Stepped(dt) = inst.step()? {
            println!(
                "t={:.4} (+{dt:.4}) {}",
                inst.clock(),
                format_term(&model.symbols, inst.term())
            );
        }
    }

    let whole = SimulationInstance::new(Arc::clone(&model), 0, 7).run_to_end()?;
    println!("{:>4} {:>4} {:>4}", "t", "d", "m");
    for s in &whole {
        println!("{:>4} {:>4} {:>4}", s.time, s.values[0], s.values[1]);
    }

    // Pausing and resuming never changes the random stream.
    let mut sliced: Vec<TrajectorySample> = Vec::new();
    let mut inst = SimulationInstance::new(Arc::clone(&model), 0, 7);
    for bound in [0.3, 1.7, 2.0, 4.9, 5.0] {
        let mut sink = FnSink(|s: TrajectorySample| {
            sliced.push(s);
            Ok(())
        });
        let status = inst.advance_until(bound, &mut sink)?;
        println!("advanced to {bound}: {status:?}, {} events so far", inst.events());
    }
    assert_eq!(whole, sliced);
    println!("sliced run reproduces the straight run");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
