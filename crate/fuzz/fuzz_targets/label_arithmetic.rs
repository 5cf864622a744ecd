#![no_main]

use koch_core::labels::{children, companion, degree_of, father, validate};
use koch_core::parse_label;
use koch_core::routing::route;
use libfuzzer_sys::fuzz_target;

// Input: m, t, then two labels separated by a space.
fuzz_target!(|data: &[u8]| {
    let [m, t, rest @ ..] = data else {
        return;
    };
    let (m, t) = (u32::from(m % 4) + 1, u32::from(t % 12));
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let Some((a, b)) = text.split_once(' ') else {
        return;
    };
    let (Ok(a), Ok(b)) = (parse_label(a, m), parse_label(b, m)) else {
        return;
    };
    if validate(m, t, &a).is_err() || validate(m, t, &b).is_err() {
        return;
    }
    if !a.is_hub() {
        let c = companion(&a).unwrap();
        assert_eq!(companion(&c).unwrap(), a);
        let f = father(m, &a).unwrap();
        assert!(f.birth_step() < a.birth_step());
        assert!(children(m, t, &f).map_or(true, |sons| sons.contains(&a)));
    }
    if let Ok(sons) = children(m, t, &a) {
        assert_eq!(sons.len() as u64 + 2, degree_of(m, t, &a).unwrap());
    }
    let r = route(m, t, &a, &b).unwrap();
    assert!(r.ops_used <= 2 * t + 3);
    assert!(r.length() <= 2 * t as usize + 1);
});
