//! Holds the `acceptance` test target. It lives in its own package so
//! `cargo test --workspace` reaches it after every other suite.
