#![no_main]

use h2path::scenarios::{parse_range, SweepParam, SweepSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(values) = parse_range(text) else { return };
    assert!(!values.is_empty() && values.len() <= 10_001);
    assert!(values.iter().all(|v| v.is_finite()));
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    for param in [SweepParam::PPpaMultiplier, SweepParam::StackLifeHours] {
        let _ = SweepSpec::new(param, values.clone());
    }
});
