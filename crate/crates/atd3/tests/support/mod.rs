#![allow(dead_code)]

pub mod fixtures;
#[path = "../../../nn/tests/support/gradcheck.rs"]
pub mod gradcheck;
pub mod netgrad;
pub mod td3_reference;
