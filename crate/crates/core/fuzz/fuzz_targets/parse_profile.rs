#![no_main]

use libfuzzer_sys::fuzz_target;
use qgame::{Move, SourceSpec, StrategyProfile, ThresholdRule, Variant};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(profile) = text.parse::<StrategyProfile>() {
        assert_eq!(profile.to_string().parse::<StrategyProfile>().unwrap(), profile);
    }
    if let Ok(mv) = text.parse::<Move>() {
        assert_eq!(mv.label().parse::<Move>().unwrap(), mv);
    }
    if let Ok(source) = text.parse::<SourceSpec>() {
        assert_eq!(source.name().parse::<SourceSpec>().unwrap(), source);
    }
    if let Ok(variant) = text.parse::<Variant>() {
        assert_eq!(variant.name().parse::<Variant>().unwrap(), variant);
    }
    let _ = text.parse::<ThresholdRule>();
});
