#![no_main]

use libfuzzer_sys::fuzz_target;
use rnl_cli::config::ExperimentConfig;
use rnl_cli::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
    let _ = parse_config(&args, |_| Ok(text.to_owned()));
    let mut cfg = ExperimentConfig::default();
    if cfg.apply_file(text).is_ok() {
        let _ = cfg.validate();
    }
});
