#![no_main]

use libfuzzer_sys::fuzz_target;
use manyminds::io::parse_structure;
use manyminds::structures::{canonicalize, validate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(s) = parse_structure(text) else { return };
    let again = parse_structure(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(again, s);
    if validate(&s).is_valid() && s.m() <= 10 {
        let c = canonicalize(&s);
        assert_eq!(canonicalize(c.structure()), c);
    }
});
