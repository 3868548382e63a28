#![no_main]

use dstbc_core::codes::CodeKind;
use dstbc_core::constellation::ConstellationKind;
use dstbc_core::decode::DecoderKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(c) = s.parse::<CodeKind>() {
            assert_eq!(c.name(), s);
        }
        if let Ok(d) = s.parse::<DecoderKind>() {
            assert_eq!(d.name(), s);
        }
        if let Ok(k) = s.parse::<ConstellationKind>() {
            assert_eq!(k.name(), s);
        }
    }
});
