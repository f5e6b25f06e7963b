#![no_main]

use floquet_core::weingarten::parse_table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // accepted tables re-serialise to an equal table
    if let Ok(table) = parse_table(text) {
        let again = parse_table(&table.to_text()).expect("emitted text parses");
        assert_eq!(again, table);
    }
});
