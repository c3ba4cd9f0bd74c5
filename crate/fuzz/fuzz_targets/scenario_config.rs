#![no_main]
use libfuzzer_sys::fuzz_target;
use wsn_sim::{default_scenario, ScenarioPatch, ScenarioSpec, Variant};

fuzz_target!(|data: &[u8]| {
    // Config parsing must never panic, whatever the bytes.
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(patch) = ScenarioPatch::from_json(text) else {
        return;
    };
    let base = default_scenario(Variant::Ms2, 450.0, 7).unwrap();
    if let Ok(spec) = patch.apply(&base) {
        // Anything the validator accepts must survive a JSON round trip.
        let json = spec.to_json();
        let back: ScenarioSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
});
