#![no_main]

use hexsurvey::io::{parse_esri_ascii, write_esri_ascii};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(r) = parse_esri_ascii(text) {
        let back = parse_esri_ascii(&write_esri_ascii(&r)).expect("written grids parse");
        assert_eq!((back.nx(), back.ny()), (r.nx(), r.ny()));
    }
});
