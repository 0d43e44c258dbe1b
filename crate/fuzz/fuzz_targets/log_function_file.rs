#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = flagval::io::parse_log_function(text) {
        let written = flagval::io::write_log_function(&f).expect("parsed log functions serialize");
        flagval::io::parse_log_function(&written).expect("written log functions parse");
    }
});
