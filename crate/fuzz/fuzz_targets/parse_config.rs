#![no_main]

use dstbc_core::sim::SimConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = SimConfig::from_toml_str(text) {
            cfg.validate().expect("parsed config must validate");
            assert!(!cfg.snr_db.is_empty() && !cfg.imbalance_db.is_empty());
        }
    }
});
