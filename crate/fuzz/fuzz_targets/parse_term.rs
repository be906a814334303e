#![no_main]

use libfuzzer_sys::fuzz_target;
use vecnorm::term::Signature;
use vecnorm::parse_program;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for sig in [Signature::linear(), Signature::bilinear()] {
        let _ = parse_program(text, &sig);
    }
});
