#![no_main]

use flagval::Padic;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let p = [2, 3, 5, 7][pick as usize % 4];
    if let Ok(x) = Padic::from_digit_string(p, text) {
        assert_eq!(Padic::from_digit_string(p, &x.to_digit_string()).ok(), Some(x));
    }
});
