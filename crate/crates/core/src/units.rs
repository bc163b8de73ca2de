//! Scaled-unit ↔ SI conversions.
//!
//! The model works in scaled units with ħ = 1 and t_f = 1. Mapping one
//! scaled time unit to 20 ns fixes the remaining factors:
//!
//! | quantity          | one scaled unit |
//! |-------------------|-----------------|
//! | time              | 2.0e-8 s        |
//! | energy            | 5.273e-27 J     |
//! | angular momentum  | 1.055e-34 J·s   |

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Physical quantity being converted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Time,
    Energy,
    AngularMomentum,
}

/// Conversion direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ScaledToSi,
    SiToScaled,
}

/// SI value of one scaled unit.
pub fn si_factor(quantity: Quantity) -> f64 {
    match quantity {
        Quantity::Time => 2.0e-8,
        Quantity::Energy => 5.273e-27,
        Quantity::AngularMomentum => 1.055e-34,
    }
}

/// Convert `value` between scaled and SI units.
pub fn convert_units<S: Real>(value: S, quantity: Quantity, direction: Direction) -> S {
    let factor = S::of(si_factor(quantity));
    match direction {
        Direction::ScaledToSi => value * factor,
        Direction::SiToScaled => value / factor,
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Quantity::Time),
            "energy" => Ok(Quantity::Energy),
            "angular-momentum" => Ok(Quantity::AngularMomentum),
            other => Err(Error::invalid(format!("unknown quantity '{other}'"))),
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaled-to-si" => Ok(Direction::ScaledToSi),
            "si-to-scaled" => Ok(Direction::SiToScaled),
            other => Err(Error::invalid(format!("unknown direction '{other}'"))),
        }
    }
}
