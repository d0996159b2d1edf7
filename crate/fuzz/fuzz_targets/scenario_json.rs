#![no_main]

use h2path::scenarios::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ScenarioConfig::from_json(text) else {
        return;
    };
    ScenarioConfig::from_json(&cfg.to_json()).expect("serialised scenario reloads");
});
