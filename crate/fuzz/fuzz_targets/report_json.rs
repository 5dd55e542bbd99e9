#![no_main]

use libfuzzer_sys::fuzz_target;
use rnl_core::spectral::FrequencyGrid;
use rnl_core::sweep::{SweepReport, ThresholdScan};

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = serde_json::from_slice::<SweepReport>(data) {
        let _ = serde_json::to_vec(&r);
        let _ = r.to_csv();
    }
    if let Ok(s) = serde_json::from_slice::<ThresholdScan>(data) {
        let _ = serde_json::to_vec(&s);
    }
    if let Ok(g) = serde_json::from_slice::<FrequencyGrid>(data) {
        let back = serde_json::to_vec(&g).unwrap();
        let again: FrequencyGrid = serde_json::from_slice(&back).unwrap();
        assert_eq!(again.dimension(), g.dimension());
    }
});
