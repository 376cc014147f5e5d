//! Reference systems used by tests, the demo command and the documentation.
//!
//! * `S1`: two-node directed chain, node 1 controlled, `h = 0.1`.
//! * `S2`: the same nodes on a two-node cycle.
//! * `S3`: oscillatory nodes on a two-node cycle sampled at `h = pi`.
//! * `S4`: two-node chain with input only on the second state. The coupling
//!   `H = I`, output `C = diag(1, 0)` and `delta = (1, 1)` are choices made
//!   here; the uncontrollable verdict does not depend on them.

use super::{parse_system, NetworkedSystem};

pub const S1_JSON: &str = r#"{
  "A": [[1, 0], [1, 1]],
  "B": [[1, 0], [0, 1]],
  "C": [[1, 0], [0, 0]],
  "H": [[1, 0], [0, 1]],
  "W": [[0, 0], [1, 0]],
  "delta": [1, 0],
  "h": 0.1
}"#;

pub const S2_JSON: &str = r#"{
  "A": [[1, 0], [1, 1]],
  "B": [[1, 0], [0, 1]],
  "C": [[1, 0], [0, 0]],
  "H": [[1, 0], [0, 1]],
  "W": [[0, 1], [1, 0]],
  "delta": [1, 0],
  "h": 0.1
}"#;

pub const S3_JSON: &str = r#"{
  "A": [[1, 1], [-1, 1]],
  "B": [[1], [0]],
  "C": [[1, 0], [0, 1]],
  "H": [[1, 0], [0, 1]],
  "W": [[0, 1], [1, 0]],
  "delta": [1, 0],
  "h": 3.141592653589793
}"#;

pub const S4_JSON: &str = r#"{
  "A": [[1, 0], [1, 1]],
  "B": [[0, 0], [0, 1]],
  "C": [[1, 0], [0, 0]],
  "H": [[1, 0], [0, 1]],
  "W": [[0, 0], [1, 0]],
  "delta": [1, 1],
  "h": 0.1
}"#;

fn load(text: &str) -> NetworkedSystem {
    parse_system(text.as_bytes())
        .expect("fixture parses")
        .model
        .base()
        .clone()
}

pub fn s1() -> NetworkedSystem {
    load(S1_JSON)
}

pub fn s2() -> NetworkedSystem {
    load(S2_JSON)
}

pub fn s3() -> NetworkedSystem {
    load(S3_JSON)
}

pub fn s4() -> NetworkedSystem {
    load(S4_JSON)
}

/// Fixture source by lowercase name (`"s1"` .. `"s4"`).
pub fn json(name: &str) -> Option<&'static str> {
    match name {
        "s1" => Some(S1_JSON),
        "s2" => Some(S2_JSON),
        "s3" => Some(S3_JSON),
        "s4" => Some(S4_JSON),
        _ => None,
    }
}

pub fn by_name(name: &str) -> Option<NetworkedSystem> {
    json(name).map(load)
}
