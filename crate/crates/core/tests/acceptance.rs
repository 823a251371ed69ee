//! Acceptance checks, one PASS/FAIL line each. Exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use common::*;
use cwc_sim::cli::builtin_model;
use cwc_sim::reducer::{ci90_half_width, write_csv};
use cwc_sim::scheduler::{run_sliced, sliced_window_bound};
use cwc_sim::ssa::sample_exponential;
use cwc_sim::streamnet::{channel, Full};
use cwc_sim::{build_matchset, parse_model, simulate, Grid, Prng, Reducer, SchedulerConfig, Schema, Welford};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cores() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

fn combination_counting() -> Outcome {
    let k = 0.37;
    let m = parse_model(&format!("%term a a b b\n%rule l : a b $X => c $X @ {k}")).unwrap();
    let inner = parse_model(&format!("%term (| a a b b)@l\n%rule l : a b $X => c $X @ {k}")).unwrap();
    let ms = build_matchset(&inner, &inner.initial);
    let entries: Vec<_> = ms.iter().collect();
    let top = build_matchset(&m, &m.initial);
    check(
        entries.len() == 1 && entries[0].combinations == 4.0 && entries[0].rate == 4.0 * k && top.is_empty(),
        format!(
            "count={} rate={} (4k={})",
            entries[0].combinations,
            entries[0].rate,
            4.0 * k
        ),
    )
}

fn matchset_oracle() -> Outcome {
    let mut r = rng(0xacce97);
    let mut entries = 0;
    for case in 0..1000 {
        let text = random_model_text(&mut r, 20, 5);
        let model = parse_model(&text).map_err(|e| format!("case {case}: {e}"))?;
        let oracle = oracle_matches(&model);
        let got = matcher_matches(&model, &model.initial);
        if got.len() != oracle.len() {
            return Err(format!(
                "case {case}: {} entries, oracle {}\n{text}",
                got.len(),
                oracle.len()
            ));
        }
        for (key, (c, rate)) in &got {
            let want = oracle.get(key).copied();
            if want != Some(*c as u64) || *rate != c * model.rules[key.0].k {
                return Err(format!("case {case}: {key:?} count {c}, oracle {want:?}\n{text}"));
            }
        }
        entries += got.len();
    }
    Ok(format!("1000 pairs, {entries} entries, all exact"))
}

fn decay_ctmc() -> Outcome {
    let model = Arc::new(parse_model("%term a*1000\n%rule TOP : a $X => $X @ 1\n%tstop 1\n%delta 0.5").unwrap());
    let n = 1000;
    let out =
        simulate(&model, n, &SchedulerConfig::new(Schema::Sliced, cores()).seed(2011)).map_err(|e| e.to_string())?;
    let p = out.points.iter().find(|p| p.time == 1.0).ok_or("no sample at t=1")?;
    let m = p.stats[0];
    let se = (m.variance / n as f64).sqrt();
    let expect = 1000.0 * (-1.0f64).exp();
    let z = (m.mean - expect) / se;
    check(
        z.abs() <= 3.0,
        format!("mean={:.3} expected={expect:.3} se={se:.3} z={z:.2} (|z| <= 3)", m.mean),
    )
}

fn cross_schema() -> Outcome {
    let mut model = builtin_model("lotka-volterra", 2).unwrap();
    model.t_stop = 4.0;
    let names = model
        .observable_names()
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let model = Arc::new(model);
    let mut reference: Option<Vec<u8>> = None;
    let mut runs = 0;
    for schema in Schema::ALL {
        for w in [1, 2, 4, 8] {
            let out = simulate(&model, 32, &SchedulerConfig::new(schema, w).seed(77)).map_err(|e| e.to_string())?;
            let mut csv = Vec::new();
            write_csv(&names, &out.points, &mut csv).unwrap();
            match &reference {
                None => reference = Some(csv),
                Some(r) if *r != csv => return Err(format!("{schema} w={w} differs from static w=1")),
                Some(_) => {}
            }
            runs += 1;
        }
    }
    Ok(format!(
        "{runs} runs byte-identical ({} bytes)",
        reference.unwrap().len()
    ))
}

fn scalability() -> Outcome {
    let model = Arc::new(builtin_model("lotka-volterra", 2).unwrap());
    let cores = cores();
    let mut ws: Vec<usize> = vec![1, 2, 4, 8, 16, 32, 64]
        .into_iter()
        .filter(|&w| w <= cores.max(4))
        .collect();
    if !ws.contains(&cores) && cores > 4 {
        ws.push(cores);
    }
    let mut times = Vec::new();
    for &w in &ws {
        let start = Instant::now();
        simulate(&model, 64, &SchedulerConfig::new(Schema::Sliced, w).seed(5)).map_err(|e| e.to_string())?;
        times.push((w, start.elapsed().as_secs_f64()));
    }
    let t1 = times[0].1;
    let t4 = times.iter().find(|(w, _)| *w == 4).map(|t| t.1).unwrap();
    let monotone = times
        .windows(2)
        .filter(|p| p[1].0 <= cores)
        .all(|p| p[1].1 <= p[0].1 * 1.10);
    let shown: Vec<String> = times.iter().map(|(w, t)| format!("w={w}:{t:.2}s")).collect();
    let detail = format!("cores={cores} {} ratio(w4/w1)={:.2} (<= 0.5)", shown.join(" "), t4 / t1);
    if cores < 4 {
        return Err(format!("{detail}; needs >= 4 cores, this machine has {cores}"));
    }
    check(t4 <= 0.5 * t1 && monotone, detail)
}

fn memory_bound() -> Outcome {
    let model = Arc::new(builtin_model("lotka-volterra", 2).unwrap());
    let n = 64;
    let q = 10;
    let bound = sliced_window_bound(n, q);
    let reducer = Reducer::new(n, model.observables.len(), Grid::for_model(&model)).with_bound(bound);
    let config = SchedulerConfig::new(Schema::Sliced, cores()).quantum(q).seed(9);
    let run = run_sliced(&model, n, &config, reducer).map_err(|e| e.to_string())?;
    let total = n * Grid::for_model(&model).points() as usize;
    check(
        run.peak_resident <= bound,
        format!(
            "peak={} bound={bound} (of {total} samples per observable)",
            run.peak_resident
        ),
    )
}

fn spsc_stress() -> Outcome {
    const N: u64 = 10_000_000;
    let (mut tx, mut rx) = channel::<u64>(1024);
    let producer = thread::spawn(move || {
        for i in 0..N {
            let mut item = i;
            while let Err(Full(back)) = tx.push(item) {
                item = back;
                thread::yield_now();
            }
        }
    });
    let mut expect = 0;
    let mut idle = 0u32;
    while expect < N {
        match rx.pop() {
            Some(v) if v == expect => {
                expect += 1;
                idle = 0;
            }
            Some(v) => return Err(format!("got {v}, expected {expect}")),
            None => {
                idle += 1;
                if idle > 1000 {
                    thread::sleep(Duration::from_micros(20));
                } else {
                    thread::yield_now();
                }
            }
        }
    }
    producer.join().map_err(|_| "producer panicked")?;
    check(
        rx.pop().is_none(),
        format!("{N} items in order, none lost or duplicated"),
    )
}

fn statistics() -> Outcome {
    let h = ci90_half_width(4.0, 100);
    let mut r = rng(0x57a7);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        use rand::Rng;
        let len = r.random_range(2..200);
        let shift: f64 = r.random_range(-1e3..1e3);
        let xs: Vec<f64> = (0..len).map(|_| shift + r.random_range(0.0..100.0)).collect();
        let mut w = Welford::new();
        xs.iter().for_each(|&x| w.push(x));
        let n = len as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let rm = (w.mean() - mean).abs() / mean.abs().max(f64::MIN_POSITIVE);
        let rv = (w.variance() - var).abs() / var;
        worst = worst.max(rm).max(rv);
    }
    check(
        (h - 0.32898).abs() <= 1e-5 && worst <= 1e-9,
        format!("ci90(4,100)={h:.6} (0.32898 ± 1e-5); worst Welford/two-pass rel diff={worst:.2e} (<= 1e-9)"),
    )
}

fn exponential() -> Outcome {
    let mut p = Prng::seeded(4242);
    let n = 1_000_000;
    let mut w = Welford::new();
    for _ in 0..n {
        w.push(sample_exponential(&mut p, 2.0));
    }
    let (m, v) = (w.mean(), w.variance());
    let (dm, dv) = ((m / 0.5 - 1.0).abs(), (v / 0.25 - 1.0).abs());
    check(
        dm <= 0.01 && dv <= 0.03,
        format!(
            "mean={m:.5} ({:.2}% <= 1%) var={v:.5} ({:.2}% <= 3%)",
            dm * 100.0,
            dv * 100.0
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("combination counting", combination_counting),
        ("matchset oracle equivalence", matchset_oracle),
        ("analytic decay CTMC", decay_ctmc),
        ("cross-schema determinism", cross_schema),
        ("scalability", scalability),
        ("sliced memory bound", memory_bound),
        ("SPSC stress", spsc_stress),
        ("statistics", statistics),
        ("exponential sampler", exponential),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} [{name}]: PASS {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
