#![no_main]

use libfuzzer_sys::fuzz_target;
use manyminds::causal::Docket;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let rows: Vec<String> = text.lines().map(str::to_string).collect();
    if let Ok(d) = Docket::from_grid(&rows) {
        assert_eq!(Docket::from_grid(&d.to_grid()).unwrap(), d);
    }
});
