#![no_main]

use libfuzzer_sys::fuzz_target;
use windcast::config::PipelineConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let mut config = PipelineConfig::default();
        if config.apply_file_text(text).is_ok() {
            let _ = config.validate();
            // Whatever parsed must survive a serialize-parse round trip.
            let mut again = PipelineConfig::default();
            again
                .apply_file_text(&config.to_kv_string())
                .expect("serialized config parses");
            assert_eq!(again, config);
        }
    }
});
