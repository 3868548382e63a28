#![no_main]

use dstbc_core::sim::{emit_csv, read_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(points) = read_csv(data) {
        let mut out = Vec::new();
        emit_csv(&points, &mut out).expect("re-emit");
        let again = read_csv(out.as_slice()).expect("re-read");
        assert_eq!(again.len(), points.len());
    }
});
