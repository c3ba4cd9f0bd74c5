#![no_main]
use libfuzzer_sys::fuzz_target;
use wsn_sim::metrics::{read_round_csv, round_csv_string};

fuzz_target!(|data: &[u8]| {
    // The CSV reader must not panic on any input.
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = read_round_csv(text) else {
        return;
    };
    // Rendering accepted records is a fixed point under re-parsing.
    let rendered = round_csv_string(&records);
    let again = read_round_csv(&rendered).expect("rendered csv must parse");
    assert_eq!(round_csv_string(&again), rendered);
});
