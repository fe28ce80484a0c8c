// Turn a timestamped raw edge log into a connected arrival log.

use std::error::Error;

use netgrowth::io::{
    normalize_connected_order, parse_edge_log, render_log, Boundary, EdgeFormat, NormalizeOptions,
};

const RAW: &str = "\
# day  u  v
1 a b
1 b a
2 c d
2 a a
3 b c
3 e f
4 d e
5 g h
";

pub fn run() -> Result<(), Box<dyn Error>> {
    let parsed = parse_edge_log(RAW.as_bytes(), EdgeFormat::Timestamped)?;
    println!(
        "{} records, {} self-loops dropped",
        parsed.records.len(),
        parsed.self_loops
    );

    let options = NormalizeOptions {
        seed: Some(Boundary::Before(3)),
        ..Default::default()
    };
    let (log, report) = normalize_connected_order(&parsed.records, &options)?;
    println!("{report}");
    for (u, v) in &report.unplaced {
        println!("never connected: {u} {v}");
    }
    print!("{}", render_log(&log));
    for e in &log.events {
        println!(
            "{:?} {} {}",
            e.kind,
            log.labels[e.u.index()],
            log.labels[e.v.index()]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
