//! Runs the ten acceptance criteria and prints one line per criterion.
//! Built without the libtest harness so the lines always show.

use std::time::{Duration, Instant};

use krein::selftest::{run_criterion, summary_line};

/// Wall-clock limits for the criteria that carry one.
fn time_limit(id: u32) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(60)),
        7 => Some(Duration::from_secs(120)),
        _ => None,
    }
}

fn main() {
    let mut failed = Vec::new();
    for id in 1..=10 {
        let start = Instant::now();
        let outcome = run_criterion(id);
        let took = start.elapsed();
        match outcome {
            Ok(o) => {
                let mut line = summary_line(&o);
                let mut ok = o.pass || !o.gating;
                if let Some(limit) = time_limit(id) {
                    let in_time = took <= limit;
                    line.push_str(&format!(" [{:.1}s of {}s]", took.as_secs_f64(), limit.as_secs()));
                    ok &= in_time;
                }
                println!("{line}");
                if !ok {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("[FAIL] C{id}: {e}");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all gating criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
