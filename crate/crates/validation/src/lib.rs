//! Desk-scale acceptance suite for the simulator and its front end. The
//! suite itself lives in `tests/acceptance.rs`.
