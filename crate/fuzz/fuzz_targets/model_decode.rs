#![no_main]

use libfuzzer_sys::fuzz_target;
use windcast::bpnn::ModelArtifact;

fuzz_target!(|data: &[u8]| {
    if let Ok(artifact) = ModelArtifact::decode(data) {
        // A successful decode must re-encode to the exact input bytes.
        assert_eq!(artifact.encode(), data);
    }
});
