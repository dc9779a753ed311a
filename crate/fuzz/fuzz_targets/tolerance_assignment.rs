#![no_main]

use libfuzzer_sys::fuzz_target;
use manyminds::scenarios::Tolerances;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut t = Tolerances::default();
    if t.parse_assignment(text).is_ok() {
        let (name, _) = text.split_once('=').unwrap();
        let v = t.get(name.trim(), -1.0);
        assert!(v.is_finite() && v > 0.0);
    }
});
