#![no_main]

use flagval::field::FieldModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let q = [2, 3, 5, 7][pick as usize % 4];
    let model = if pick & 4 == 0 { FieldModel::Univariate { q } } else { FieldModel::Bivariate { q } };
    let _ = model.parse(text);
});
