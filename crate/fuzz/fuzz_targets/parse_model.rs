#![no_main]

use libfuzzer_sys::fuzz_target;
use manyminds::io::parse_model;
use manyminds::process::JumpEvaluator;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(model) = parse_model(text) else { return };
    for name in model.spec().nodes.keys() {
        if let Ok(Some(d)) = model.jumps(name) {
            assert!((d.total() - 1.0).abs() < 1e-9, "{name}: total {}", d.total());
        }
    }
});
