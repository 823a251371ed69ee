//! Stochastic simulation of the Calculus of Wrapped Compartments on
//! multicore machines.
//!
//! Terms are nested multisets of atoms and labelled compartments; rules
//! rewrite compartment contents at a kinetic rate. Independent Gillespie
//! instances run on a farm of worker threads connected by lock-free queues,
//! and their trajectories are reduced on-line into per-grid-point mean,
//! variance and 90% confidence intervals.
//!
//! ```
//! use std::sync::Arc;
//! use cwc_sim::{parse_model, simulate, Schema, SchedulerConfig};
//!
//! let model = parse_model("%term a*50\n%rule TOP : a $X => $X @ 1\n%tstop 2\n%delta 0.5")?;
//! let out = simulate(&Arc::new(model), 8, &SchedulerConfig::new(Schema::Sliced, 2))?;
//! assert_eq!(out.points.len(), 5);
//! assert_eq!(out.points[0].stats[0].mean, 50.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cli;
pub mod matcher;
pub mod reducer;
pub mod rule;
pub mod scheduler;
pub mod ssa;
pub mod streamnet;
pub mod syntax;
pub mod term;

pub use matcher::{build_matchset, ContextPath, MatchEntry, MatchSet};
pub use reducer::{Moments, ReduceError, Reducer, StatPoint, Welford};
pub use rule::{Model, Rule};
pub use scheduler::{simulate, ScheduleError, SchedulerConfig, Schema, SimulationOutput};
pub use ssa::{Grid, Prng, SimError, SimulationInstance, Status, TrajectorySample};
pub use syntax::{format_rule, format_term, parse_model, parse_term, ModelError};
pub use term::{Atom, Label, Multiset, Symbols, Term};
