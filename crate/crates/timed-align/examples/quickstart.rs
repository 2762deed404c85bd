//! The README's library round trip: parse a net and a trace, unroll the
//! run, and repair the timestamps. Run from the crate directory so the
//! fixture paths resolve:
//!
//! ```console
//! cargo run --example quickstart
//! ```

use timed_align::{causal, io, stamp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = io::parse_net(&std::fs::read_to_string("fixtures/chain-six.net")?)?;
    let trace = io::parse_trace(&std::fs::read_to_string("fixtures/chain-six-observed.csv")?)?;
    let (run, sigma) = io::resolve_trace(&net, &trace)?;

    let process = causal::unroll(&net, &run)?;
    let intervals = causal::chain_intervals(&net, &process)?;
    let repaired = stamp::align_stamp(&intervals, &sigma)?;

    let gamma: Vec<String> = repaired.gamma.values().iter().map(|t| t.to_string()).collect();
    println!("cost {}, gamma {}", repaired.cost, gamma.join(","));
    Ok(())
}
