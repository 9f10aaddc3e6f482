//! Design automation for adjustable constant-torque mechanisms.
//!
//! A constant output torque is produced by pairing an ordinary positive
//! spring with a compliant *negative-stiffness* element: a slender elastic
//! beam whose endpoints are pinned between a fixed anchor and a crank pin.
//! As the crank rotates, the distance between the pins changes, the beam is
//! compressed through a snap-through regime, and the force it exerts on the
//! crank produces a torque that rises with the crank angle. When that rising
//! torque cancels the falling torque of the positive spring, the net output
//! is flat, and shifting the spring pre-load moves the flat level up or down
//! without re-tuning the elastic element.
//!
//! The crate is organised around that pipeline:
//!
//! * [`geometry`] - crank kinematics: pin distance, the torque produced by a
//!   given element force, and the inverse (force required for a torque).
//! * [`beam_fem`] - a geometrically nonlinear planar beam solver
//!   (corotational two-node elements) that turns a beam centerline into a
//!   force-deflection curve with stress tracking.
//! * [`ga`] - a small genetic algorithm over five-point beam centerlines.
//! * [`synthesis`] - composition of spring, pre-load, and elastic element
//!   into net torque curves, with pre-load calibration, section scaling and
//!   stress checks.
//! * [`presets`] - the reference forceps-sized mechanism used by the
//!   examples and the command line tool.
//!
//! Everything internal is SI (meters, newtons, pascals, radians). Degrees,
//! millimeters and millinewton-meters appear only at file-format and
//! command-line boundaries.

pub mod beam_fem;
pub mod ga;
pub mod geometry;
pub mod presets;
pub mod synthesis;

/// The crate-wide deterministic generator: one fixed algorithm so that a
/// seed means the same stream on every platform and in every build.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
