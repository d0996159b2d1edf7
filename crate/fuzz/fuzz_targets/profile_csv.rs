#![no_main]

use h2path::profiles::{LoadOptions, WindProfile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let opts = LoadOptions { allow_any_length: true };
    let Ok(profile) = WindProfile::parse_csv(text, 10.0, &opts) else {
        return;
    };
    for farm in profile.farms() {
        assert!(farm.iter().all(|&p| (0.0..=10.0).contains(&p)));
    }
    let cf = profile.capacity_factor();
    assert!((0.0..=1.0).contains(&cf));
    let again = WindProfile::parse_csv(&profile.to_csv(), 10.0, &opts).expect("written profile parses");
    assert_eq!(again, profile);
});
