#![no_main]

use libfuzzer_sys::fuzz_target;
use qgame::game::{validate_table, PayoffTable};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = PayoffTable::parse(text) {
        // A parsed table must survive a print/parse round trip.
        let again = PayoffTable::parse(&table.to_text()).expect("reparse");
        assert_eq!(table, again);
        let _ = validate_table(&table).to_string();
    }
});
