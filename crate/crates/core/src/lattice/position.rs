use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A lattice site `(k, l)`: `k` counts `T` moves, `l` counts `S` moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub k: i64,
    pub l: i64,
}

impl Position {
    pub const ORIGIN: Position = Position { k: 0, l: 0 };

    #[inline]
    pub const fn new(k: i64, l: i64) -> Self {
        Self { k, l }
    }

    /// `k + l`; raised by one by either move.
    #[inline]
    pub const fn level(self) -> i64 {
        self.k + self.l
    }

    /// `k - l`; `+1` under `T`, `-1` under `S`.
    #[inline]
    pub const fn cross(self) -> i64 {
        self.k - self.l
    }

    /// The site with the given level and cross. Both must have equal parity.
    pub fn from_level_cross(level: i64, cross: i64) -> Option<Self> {
        if (level - cross).rem_euclid(2) != 0 {
            return None;
        }
        Some(Self::new((level + cross) / 2, (level - cross) / 2))
    }

    #[inline]
    pub const fn step(self, mv: Move) -> Self {
        match mv {
            Move::T => Self::new(self.k + 1, self.l),
            Move::S => Self::new(self.k, self.l + 1),
        }
    }

    /// `T^h S^{-h}` applied to this site: the same level, cross shifted by `2h`.
    #[inline]
    pub const fn diagonal(self, h: i64) -> Self {
        Self::new(self.k + h, self.l - h)
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, o: Position) -> Position {
        Position::new(self.k + o.k, self.l + o.l)
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, o: Position) -> Position {
        Position::new(self.k - o.k, self.l - o.l)
    }
}

impl Neg for Position {
    type Output = Position;
    fn neg(self) -> Position {
        Position::new(-self.k, -self.l)
    }
}

impl From<(i64, i64)> for Position {
    fn from((k, l): (i64, i64)) -> Self {
        Self::new(k, l)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

/// Parses `k,l`, optionally wrapped in parentheses.
impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = t
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected `k,l`, got `{s}`")))?;
        let k = a.trim().parse().map_err(|_| Error::Parse(format!("bad k in `{s}`")))?;
        let l = b.trim().parse().map_err(|_| Error::Parse(format!("bad l in `{s}`")))?;
        Ok(Self::new(k, l))
    }
}

/// One of the two generators of the lattice action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    /// `(k, l) -> (k + 1, l)`
    T,
    /// `(k, l) -> (k, l + 1)`
    S,
}

impl Move {
    pub const fn other(self) -> Self {
        match self {
            Move::T => Move::S,
            Move::S => Move::T,
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Move::T => 'T',
            Move::S => 'S',
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}
