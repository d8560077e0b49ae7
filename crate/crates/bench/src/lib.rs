//! Fixtures shared by the criterion benchmarks.

use troprank_core::{case_library, CaseSpec};

/// Looks up a library case by name, panicking on unknown names.
pub fn case(name: &str) -> CaseSpec {
    case_library()
        .into_iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no library case named {name}"))
}
