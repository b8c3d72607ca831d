//! Dynamics on tori: hyperbolic toral automorphisms, derived-from-Anosov
//! perturbations, entropy estimates and the Franks semi-conjugacy.

pub mod cli;
pub mod cones;
pub mod entropy;
pub mod error;
pub mod linear;
pub mod maps;
pub mod semiconj;
pub mod torus;

pub use error::{Error, Result};
pub use linear::{linear_entropy, LinearPart, SpectralSplit};
pub use maps::{MapConfig, MapModel, TorusMap};
pub use torus::{torus_dist, LiftPoint, SampleGrid, TorusPoint};
