#![no_main]

use libfuzzer_sys::fuzz_target;
use vecnorm::term::{ac_equal, AcSet, Signature};
use vecnorm::{parse_program, print_program};

// Whatever parses must print to text that parses back to the same class.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let sig = Signature::bilinear();
    let Ok(prog) = parse_program(text, &sig) else { return };
    let printed = print_program(&prog.term);
    let again = parse_program(&printed, &sig).expect("printed program reparses");
    assert!(ac_equal(&prog.term, &again.term, &AcSet::standard()).unwrap());
});
