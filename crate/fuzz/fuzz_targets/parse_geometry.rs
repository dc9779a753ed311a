#![no_main]

use libfuzzer_sys::fuzz_target;
use manyminds::geometry::check_manifestation;
use manyminds::io::parse_geometry;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((m, s)) = parse_geometry(text) {
        let _ = check_manifestation(&m, &s);
    }
});
