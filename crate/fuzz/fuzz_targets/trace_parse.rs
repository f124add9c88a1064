#![no_main]

use gcfp::cli::parse_trace;
use gcfp::cli::table::trace_table;
use gcfp::solver::IterationTrace;
use libfuzzer_sys::fuzz_target;

fn same(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan())
}

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = parse_trace(data) else { return };
    // Whatever parses must survive a write/read cycle unchanged.
    let table = trace_table(&IterationTrace {
        rows: rows.clone(),
        initial_gap: None,
    });
    let mut text = table.header.join(",");
    for r in &table.rows {
        text.push('\n');
        text.push_str(&r.join(","));
    }
    let again = parse_trace(text.as_bytes()).expect("rendered trace parses");
    assert_eq!(rows.len(), again.len());
    for (a, b) in rows.iter().zip(&again) {
        assert_eq!(a.k, b.k);
        assert!(same(a.x, b.x) && same(a.residual, b.residual));
        assert_eq!(a.bound.is_some(), b.bound.is_some());
        if let (Some(x), Some(y)) = (a.bound, b.bound) {
            assert!(same(x, y));
        }
    }
});
