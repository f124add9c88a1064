#![no_main]

use gcfp::cli::ConfigFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = ConfigFile::from_json_slice(data) {
        let echo = cfg.to_json_string();
        let again = ConfigFile::from_json_str(&echo).expect("echoed config parses");
        assert_eq!(cfg, again);
    }
});
