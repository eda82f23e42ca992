//! Numerical toolkit for the Wiener-type boundary regularity condition of
//! `Q`-quasiminimizers of the `p`-energy.
//!
//! * [`exponents`]: the power exponents `alpha <= 1 <= alpha_bar` attached to
//!   `(Q, p)`, their duals, `p_1`, and the resulting Wiener exponent.
//! * [`capacity`]: exact radial `p`-capacities, a discrete energy-minimizing
//!   oracle, and capacity-density profiles.
//! * [`wiener`]: partial sums, divergence classification and the iterated
//!   potential lower bound.
//! * [`onedim`]: brute-force best quasiminimizer constant of `x^alpha` on `(0, 1)`.
//! * [`sharpness`]: the `|x|^{-gamma}` potentials showing the exponent cannot
//!   be improved.
//! * [`acceptance`]: end-to-end checks shared by the test suite and the CLI.

pub mod acceptance;
pub mod capacity;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod onedim;
pub mod par;
pub mod roots;
pub mod sharpness;
pub mod summation;
pub mod wiener;

pub use error::{Error, Result};
