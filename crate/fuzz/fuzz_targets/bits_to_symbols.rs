#![no_main]

use dstbc_core::constellation::ConstellationKind;
use libfuzzer_sys::fuzz_target;

// First byte picks the constellation, the rest are bits (one per byte).
fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else {
        return;
    };
    let kind = [ConstellationKind::Qpsk, ConstellationKind::Qam16, ConstellationKind::Qam64][pick as usize % 3];
    let c = kind.build();
    let bits: Vec<bool> = rest.iter().map(|b| b & 1 == 1).collect();
    match c.bits_to_symbols(&bits) {
        Ok(symbols) => assert_eq!(c.symbols_to_bits(&symbols), bits),
        Err(_) => assert_ne!(bits.len() % c.bits_per_symbol(), 0),
    }
});
