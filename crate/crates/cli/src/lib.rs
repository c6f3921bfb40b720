//! Support code shared by the `stickbreak` binary and its tests.

pub mod record;
