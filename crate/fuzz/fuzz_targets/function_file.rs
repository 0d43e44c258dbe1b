#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = flagval::io::parse_function(text) {
        // Whatever parses must survive a write and re-read.
        let written = flagval::io::write_function(&f).expect("parsed functions serialize");
        flagval::io::parse_function(&written).expect("written functions parse");
    }
});
