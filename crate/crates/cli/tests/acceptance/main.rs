//! Acceptance gate: one PASS/FAIL line per criterion.

mod conservation;
mod determinism;
mod util;

use std::process::ExitCode;
use std::time::{Duration, Instant};

pub type Check = Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

const CRITERIA: [Criterion; 8] = [
    Criterion { id: 1, name: "narrative flow", budget: Some(Duration::from_secs(1)), run: lifecycle::narrative },
    Criterion { id: 2, name: "refund orderings", budget: None, run: lifecycle::refund_orderings },
    Criterion { id: 3, name: "conservation suite", budget: Some(Duration::from_secs(60)), run: conservation::run },
    Criterion { id: 4, name: "pause gating", budget: None, run: pause::run },
    Criterion { id: 5, name: "toy commitments", budget: Some(Duration::from_secs(5)), run: toy::run },
    Criterion { id: 6, name: "voting payouts", budget: None, run: voting::run },
    Criterion { id: 7, name: "poe immutability", budget: None, run: poe::run },
    Criterion { id: 8, name: "replay determinism", budget: None, run: determinism::run },
];

fn main() -> ExitCode {
    // cargo passes filter arguments; a filter selects criteria by number
    let filter: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] criterion {} {:<20} {:>9.2?}  {detail}", c.id, c.name, elapsed);
        failed += outcome.is_err() as u32;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
