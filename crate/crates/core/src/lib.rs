pub mod classify;
pub mod descriptor;
pub mod error;
pub mod exponent;
pub mod family;
pub mod integral_map;
pub mod measure;
pub mod quad;
pub mod simulate;
pub mod special;
pub mod triple;
pub mod verify;

pub use descriptor::Descriptor;
pub use error::{Error, Result};
pub use exponent::{exponent_of, CharFn, Envelope, ProbeGrid};
pub use family::{family_triple, Family};
pub use measure::{Atom, DensityTerm, RadialLevyMeasure, Ray, Shape};
pub use triple::LevyTriple;
pub use integral_map::{
    i_transform, jbeta_transform, map_exponent, u_law, v_law, z_law, IntegralMapSpec, Interval, Kernel, TimeChange,
};
