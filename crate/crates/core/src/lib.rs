//! Multiscale finite element solver for slightly compressible flow in
//! fractured vuggy porous media.
//!
//! The medium is modeled as three coupled continua (matrix, natural
//! fractures, vugs) exchanging mass pointwise, with resolved fractures
//! embedded as conforming one-dimensional elements carrying their own
//! line integrals (a discrete fracture model). The crate provides
//!
//! * a conforming lattice mesher with fracture-edge snapping ([`geometry`]),
//! * coupled P1 mass, stiffness, exchange and load operators ([`assembly`]),
//! * sparse CG and dense generalized symmetric eigensolvers ([`linalg`]),
//! * spectral multiscale coarse spaces built from local coupled snapshot
//!   problems, plus a classical MsFEM baseline ([`multiscale`]),
//! * backward-Euler time integration with lagged-coefficient linearization
//!   or fixed-point iteration, on the fine space or any coarse space
//!   ([`timestepper`]),
//! * legacy-VTK export of meshes and nodal fields ([`vtk`]).

pub mod assembly;
pub mod geometry;
pub mod linalg;
pub mod multiscale;
pub mod physics;
pub mod timestepper;
pub mod vtk;
