#![no_main]

use chemowave::io::{csv_string, parse_csv, parse_field};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Some(v) = parse_field(text) {
        let back = parse_field(&format!("{v:e}")).unwrap();
        assert!(back == v || (v.is_nan() && back.is_nan()));
    }
    if let Ok(t) = parse_csv(text) {
        let header: Vec<&str> = t.header.iter().map(String::as_str).collect();
        let again = parse_csv(&csv_string(&header, &t.rows)).unwrap();
        assert_eq!(again.rows.len(), t.rows.len());
    }
});
