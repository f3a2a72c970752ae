mod common;

use common::{check_golden, GOLDEN};

#[test]
fn golden_outputs_are_reproduced_byte_for_byte() {
    for name in GOLDEN {
        check_golden(name).unwrap();
    }
}
