#![no_main]

use h2path::scenarios::{preset, Override, UseCase};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(o) = text.parse::<Override>() else { return };
    for u in [UseCase::II, UseCase::IVa, UseCase::VbII] {
        if let Ok(cfg) = preset(u).with_overrides(std::slice::from_ref(&o)) {
            cfg.validate().expect("overridden scenario is valid");
        }
    }
});
