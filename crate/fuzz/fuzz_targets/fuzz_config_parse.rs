#![no_main]

use chemowave::config::{parse_pairs, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let pairs = parse_pairs(text);
    if let Ok(cfg) = RunConfig::parse(text) {
        assert!(pairs.is_ok());
        assert!(cfg.grid_h > 0.0 && cfg.grid_h.is_finite());
    }
});
