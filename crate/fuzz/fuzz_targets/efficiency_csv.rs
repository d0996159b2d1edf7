#![no_main]

use h2path::plant::EfficiencyCurve;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(curve) = EfficiencyCurve::parse_csv(text) else {
        return;
    };
    let (lo, hi) = curve
        .points()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, e)| {
            (lo.min(e), hi.max(e))
        });
    for i in 0..=100 {
        let eta = curve.interpolate(i as f64 / 100.0);
        assert!(eta >= lo - 1e-12 && eta <= hi + 1e-12);
    }
});
