//! Holds the `acceptance` test binary. Run it with
//! `cargo test -p mpsprep-validation --test acceptance`.
