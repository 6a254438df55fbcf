#![no_main]

use equifit::stickelberger::{format_places, parse_places};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(places) = parse_places(s) {
            let again = parse_places(&format_places(&places).join(",")).expect("formatted places reparse");
            assert_eq!(places, again);
        }
    }
});
