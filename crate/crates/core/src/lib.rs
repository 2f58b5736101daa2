//! Spherical polar decomposition, spherical Aluthge transform and joint
//! radii of tuples of complex matrices.

pub mod aluthge;
pub mod error;
pub mod examples;
pub mod exec;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod polar;
pub mod radii;
pub mod seed;
pub mod tuple;
pub mod verify;
