#![no_main]

use libfuzzer_sys::fuzz_target;
use manyminds::io::parse_real_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_real_list(text) {
        assert_eq!(v.len(), text.split(',').count());
        assert!(v.iter().all(|x| x.is_finite()));
    }
});
