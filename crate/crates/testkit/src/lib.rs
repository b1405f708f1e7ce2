//! Test support for modlang: a reference evaluator, reference arithmetic,
//! and generators for random programs and ASTs.

pub mod oracle;
pub mod programs;
pub mod reference;
pub mod strategies;

use std::path::PathBuf;

use modlang::ModuleRegistry;

/// Directory holding the shipped `.mod` files.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/modules")
}

/// A registry that resolves modules from the shipped fixtures only.
pub fn fixture_registry() -> ModuleRegistry {
    ModuleRegistry::new(vec![fixtures_dir()])
}
