//! Evolving routing and sequencing rule pairs for dynamic flexible job
//! shop scheduling.
//!
//! * [`expr`]: the rule language: terminals, functions, parser, printer.
//! * [`sim`]: instance generator and discrete-event shop simulator.
//! * [`gp`]: genetic programming over rule pairs.
//! * [`llm`]: prompt construction, chat providers, reply extraction, reports.
//! * [`analysis`]: rank tests and figure series over multi-run experiments.

pub mod analysis;
pub mod expr;
pub mod gp;
pub mod llm;
pub mod rules;
pub mod seeding;
pub mod sim;
