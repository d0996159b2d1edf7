#![no_main]

use h2path::profiles::ProfileSource;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match text.parse::<ProfileSource>() {
        Ok(ProfileSource::Synth { target_cf, .. }) => assert!((0.0..=1.0).contains(&target_cf)),
        Ok(ProfileSource::File(path)) => assert!(!path.as_os_str().is_empty()),
        Err(_) => {}
    }
});
