//! Text syntax for geometries, positions and ranges on the command line.
//!
//! ```text
//! triangle:N[@K,L]          Δ_N based at (K,L), default (0,0)
//! band:MLO..MHI/CLO..CHI    levels MLO..=MHI, cross CLO..=CHI
//! rect:K0..K1/L0..L1        K0..=K1 by L0..=L1
//! ```

use std::ops::RangeInclusive;

use tridot::{Geometry, Position};

use crate::error::{usage, CliError};

pub fn parse_range(s: &str) -> Result<RangeInclusive<i64>, CliError> {
    let (a, b) = s.split_once("..").ok_or_else(|| usage(format!("expected LO..HI, got `{s}`")))?;
    let num = |t: &str| t.trim().parse::<i64>().map_err(|_| usage(format!("bad integer `{t}` in `{s}`")));
    let (a, b) = (num(a)?, num(b)?);
    if a > b {
        return Err(usage(format!("empty range `{s}`")));
    }
    Ok(a..=b)
}

pub fn parse_position(s: &str) -> Result<Position, CliError> {
    s.parse().map_err(|e: tridot::Error| usage(format!("{e}")))
}

pub fn parse_geometry(s: &str) -> Result<Geometry, CliError> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| usage(format!("geometry `{s}` lacks a `kind:` prefix")))?;
    match kind {
        "triangle" => {
            let (n, base) = match rest.split_once('@') {
                Some((n, b)) => (n, parse_position(b)?),
                None => (rest, Position::ORIGIN),
            };
            let n: u32 = n.trim().parse().map_err(|_| usage(format!("bad triangle side `{n}`")))?;
            Ok(Geometry::triangle(base, n))
        }
        "band" | "rect" => {
            let (a, b) = rest.split_once('/').ok_or_else(|| usage(format!("geometry `{s}` needs two ranges")))?;
            let (a, b) = (parse_range(a)?, parse_range(b)?);
            let g = if kind == "band" { Geometry::band(a, b) } else { Geometry::rect(a, b) };
            g.map_err(|e| usage(e.to_string()))
        }
        _ => Err(usage(format!("unknown geometry kind `{kind}` (expected triangle, band or rect)"))),
    }
}

/// `K,L:STEPS`.
pub fn parse_trace(s: &str) -> Result<(Position, usize), CliError> {
    let (p, n) = s.split_once(':').ok_or_else(|| usage(format!("expected K,L:STEPS, got `{s}`")))?;
    let n = n.trim().parse().map_err(|_| usage(format!("bad step count in `{s}`")))?;
    Ok((parse_position(p)?, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometries() {
        assert_eq!(parse_geometry("triangle:4").unwrap(), Geometry::triangle(Position::ORIGIN, 4));
        assert_eq!(parse_geometry("triangle:2@-1,3").unwrap(), Geometry::triangle(Position::new(-1, 3), 2));
        assert_eq!(parse_geometry("rect:0..3/1..2").unwrap().len(), 8);
        assert!(!parse_geometry("band:0..4/-3..3").unwrap().is_empty());
        for bad in ["triangle", "hex:3", "rect:3..1/0..1", "band:0..4"] {
            assert!(parse_geometry(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn traces() {
        assert_eq!(parse_trace("1,-1:20").unwrap(), (Position::new(1, -1), 20));
        assert!(parse_trace("1,-1").is_err());
    }
}
