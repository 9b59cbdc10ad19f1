//! Zigzag MDS array codes with optimal single-node rebuild.

pub mod codec;
pub mod construct;
pub mod gf;
pub mod perms;
pub mod analysis;

pub use num_rational;
