pub mod backlund;
pub mod bloch;
pub mod cli;
pub mod config;
pub mod elliptic;
pub mod family;
pub mod fermi;
pub mod lattice;
pub mod potential;
pub mod resolvent;
pub mod sing;
pub mod spectral;
pub mod table;
pub mod verify;
pub mod weierstrass;
