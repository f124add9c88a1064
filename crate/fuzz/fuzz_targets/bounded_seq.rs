#![no_main]

use gcfp::metrics::dist_sq;
use gcfp::sequences::{normalize, BoundedSeq};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let Some(tail) = values.pop() else { return };
    let Ok(x) = BoundedSeq::new(values.clone(), tail) else {
        assert!(values.iter().chain([&tail]).any(|v| !v.is_finite()));
        return;
    };
    assert_eq!(normalize(x.prefix(), x.tail()).unwrap(), x);
    for (n, v) in values.iter().enumerate() {
        assert_eq!(x.at(n), *v);
    }
    if let Some(&last) = x.prefix().last() {
        assert_ne!(last, x.tail());
    }
    assert_eq!(dist_sq(&x, &x, 0.5).unwrap(), 0.0);
    let shifted = x.shift_in(tail).unwrap();
    assert_eq!(shifted.at(0), tail);
    assert_eq!(shifted.at(values.len() + 1), tail);
});
