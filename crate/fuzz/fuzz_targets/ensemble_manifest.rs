#![no_main]

use libfuzzer_sys::fuzz_target;
use windcast::bagging::EnsembleManifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(manifest) = EnsembleManifest::parse(text) {
            // Render-parse is a fixed point for accepted manifests.
            let reparsed =
                EnsembleManifest::parse(&manifest.render()).expect("rendered manifest parses");
            assert_eq!(reparsed, manifest);
        }
    }
});
