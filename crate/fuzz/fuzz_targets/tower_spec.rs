#![no_main]

use equifit::tower::TowerSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = TowerSpec::from_json(s) {
            let _ = spec.s_places();
            let _ = spec.t_places();
        }
    }
});
