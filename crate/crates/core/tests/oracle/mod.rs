//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod alpha;
pub mod features;
pub mod matcher;
