#![no_main]

use equifit::harness::KuriharaConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = KuriharaConfig::from_json(s) {
            let _ = cfg.t_primes();
        }
    }
});
