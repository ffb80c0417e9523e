//! Host package for the acceptance suite in `tests/acceptance.rs`.
