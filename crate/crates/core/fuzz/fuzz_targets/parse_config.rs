#![no_main]

use libfuzzer_sys::fuzz_target;
use qgame::cli::RunConfigFile;
use qgame::PayoffTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = RunConfigFile::parse(text) else {
        return;
    };
    if let Ok(resolved) = file.resolve() {
        for cell in resolved.cells() {
            let _ = resolved.evolution_config(cell, PayoffTable::reference(), true).validate();
        }
    }
});
