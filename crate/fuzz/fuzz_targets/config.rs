#![no_main]

use libfuzzer_sys::fuzz_target;
use logfeat::pipeline::PipelineConfig;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = PipelineConfig::from_json(text) {
        let json = serde_json::to_string(&cfg).expect("config serializes");
        let back = PipelineConfig::from_json(&json).expect("serialized config parses");
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        let _ = cfg.validate();
    }
});
