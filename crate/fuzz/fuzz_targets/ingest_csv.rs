#![no_main]

use libfuzzer_sys::fuzz_target;
use windcast::dataset::{ingest_csv_reader, CsvSchema};

fuzz_target!(|data: &[u8]| {
    // Arbitrary bytes must yield records, rejects, or a clean error --
    // never a panic.
    let _ = ingest_csv_reader(data, &CsvSchema::default());
});
