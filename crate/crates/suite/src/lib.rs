//! Acceptance suite for depthfill. The checks live in `tests/acceptance.rs`;
//! run them with `cargo test -p depthfill-suite --test acceptance`.
