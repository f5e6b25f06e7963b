#![no_main]

use floquet_spectra::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_toml(text) {
        let model = cfg.model().expect("validated config yields a model");
        model.layout().expect("validated config yields a layout");
    }
});
