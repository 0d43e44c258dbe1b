#![no_main]

use flagval::field::{BiPoly, Poly};
use libfuzzer_sys::fuzz_target;

// First byte picks the prime, the rest is the polynomial text.
fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let q = [2, 3, 5, 7][pick as usize % 4];
    let _ = Poly::parse(q, text);
    let _ = BiPoly::parse(q, text);
});
