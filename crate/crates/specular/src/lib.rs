//! specular: a 2D geometric-optics laboratory.
//!
//! Constructs pre-fractal mirror sets (venetian-blind blocks, the sea-urchin
//! coating F, the permutation-chain invisible mirror G), traces rays under
//! specular reflection, computes projection (shadow) measures exactly, and
//! verifies the corresponding invisibility statements at desk scale.

pub mod block;
pub mod geometry;
pub mod interval;
pub mod io;
pub mod measure;
pub mod mirror;
pub mod projection;
pub mod scene;
pub mod tracer;
pub mod urchin;
