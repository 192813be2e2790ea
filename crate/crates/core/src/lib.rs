#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Graph-directed iterated function systems on products of real,
//! complex and p-adic spaces: exact arithmetic, affinity dimensions,
//! attractor covers and pictures.

pub mod algebraic;
pub mod attractor;
pub mod dimension;
pub mod error;
pub mod gifs;
pub mod mixed_space;
pub mod padic;
pub mod render;
pub mod svf;
pub mod verify;

pub use algebraic::{PadicEmbedding, QuadraticNumber};
pub use error::{Error, Result};
pub use gifs::GifsGraph;
pub use mixed_space::{AffineMap, Ball, DiagonalMap, Interval, Point, ProductBox, SpaceSignature};
pub use padic::PadicNumber;
