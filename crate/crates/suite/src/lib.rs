//! Holds the `acceptance` integration test target. The crate sorts after the
//! library and the CLI, so a plain `cargo test --workspace` runs every other
//! target before it.
