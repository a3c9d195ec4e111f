//! Numerical machinery for the GL(4,R) Kuznetsov trace formula.

pub mod cli;
pub mod eisenstein;
pub mod intbounds;
pub mod kloosterman;
pub mod lp;
pub mod params;
pub mod real;
pub mod special;
pub mod testfn;
pub mod verify;
pub mod whittaker;
pub mod zeroset;
