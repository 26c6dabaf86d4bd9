//! Seed inequalities: CHSH, the tripartite seed `I_tri`, and the two
//! relabeled three-outcome CGLMP expressions.

use crate::expression::BellExpression;
use crate::scenario::{ev, Scenario};

fn table(scenario: Scenario, label: &str, terms: &[(&str, f64)]) -> BellExpression {
    BellExpression::from_terms(scenario, label, terms.iter().map(|&(e, c)| (ev(e), c)))
        .expect("seed table is well formed")
}

/// `p(00|00) − p(01|01) − p(10|10) − p(00|11) ≤ 0`.
pub fn chsh_seed() -> BellExpression {
    table(
        Scenario::qubits(2),
        "CHSH",
        &[("00|00", 1.0), ("01|01", -1.0), ("10|10", -1.0), ("00|11", -1.0)],
    )
}

/// Seven-term tripartite seed detecting genuine nonlocality of three parties.
pub fn tri_seed() -> BellExpression {
    table(
        Scenario::qubits(3),
        "I_tri",
        &[
            ("000|000", 1.0),
            ("010|111", -1.0),
            ("000|011", -1.0),
            ("001|001", -1.0),
            ("100|110", -1.0),
            ("010|010", -1.0),
            ("100|100", -1.0),
        ],
    )
}

/// `(J₃, J̃₃)` on `(2,2,3)`. `J₃` already has the `0↔2` relabeling of `B₀`
/// applied; `J̃₃` is `J₃` with outcomes `0↔1` swapped for both parties.
pub fn cglmp_seeds() -> (BellExpression, BellExpression) {
    let s = Scenario { n: 2, m: 2, d: 3 };
    let j3 = table(
        s,
        "J3",
        &[
            ("01|00", 1.0),
            ("00|00", 1.0),
            ("10|00", 1.0),
            ("01|01", -1.0),
            ("02|01", -1.0),
            ("12|01", -1.0),
            ("10|11", -1.0),
            ("20|11", -1.0),
            ("21|11", -1.0),
            ("01|10", -1.0),
            ("00|10", -1.0),
            ("10|10", -1.0),
        ],
    );
    let j3_tilde = table(
        s,
        "J3~",
        &[
            ("10|00", 1.0),
            ("11|00", 1.0),
            ("01|00", 1.0),
            ("10|01", -1.0),
            ("12|01", -1.0),
            ("02|01", -1.0),
            ("01|11", -1.0),
            ("21|11", -1.0),
            ("20|11", -1.0),
            ("10|10", -1.0),
            ("11|10", -1.0),
            ("01|10", -1.0),
        ],
    );
    (j3, j3_tilde)
}
