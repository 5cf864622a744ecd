#![no_main]

use koch_core::parse_label;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&m, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let m = u32::from(m % 8);
    if let Ok(label) = parse_label(text, m) {
        // Accepted text is canonical.
        assert_eq!(label.to_string(), text);
        assert_eq!(parse_label(&label.to_string(), m).unwrap(), label);
    }
});
