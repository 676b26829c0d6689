pub mod arcs;
pub mod combi;
pub mod error;
pub mod exactla;
pub mod gf;
pub mod harness;
pub mod sysmat;
pub mod tangents;
