#![no_main]

use equifit::stickelberger::lvalue_from_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(v) = lvalue_from_json(s) {
            assert_eq!(v.coeffs().len(), v.group().order());
        }
    }
});
