//! Projective geometric algebra Cl(3,0,1), rigid-body motors, equivariant
//! multivector layers, Clifford frame attention, and SE(3) flow matching for
//! protein backbone frames.
//!
//! The crate is organized bottom-up:
//!
//! - [`pga`]: dense multivector arithmetic with compile-time product tables
//! - [`motor`]: motors, residue frames, SO(3) maps, backbone atom geometry
//! - [`layers`]: equivariant linear, bilinear, and many-body layers
//! - [`cfa`]: the frame-attention block and the full denoising network
//! - [`flow`]: priors, geodesic flows, ODE sampling, Kabsch/RMSD, batch OT
//! - [`io`]: PDB backbone subset, weights files, run configuration
//!
//! Everything runs in f64 on the CPU with deterministic, fixed-order
//! reductions; forward passes are pure functions of (weights, inputs, seed).

pub mod cfa;
pub mod diagnostics;
pub mod flow;
pub mod io;
pub mod layers;
pub mod motor;
pub mod nn;
pub mod pga;
pub mod tensor;
