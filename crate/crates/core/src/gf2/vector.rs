use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest dimension a packed vector supports.
pub const MAX_VECTOR_DIM: u32 = 62;

/// A point of F₂ⁿ packed into one word; coordinate 1 is the lowest bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gf2Vector {
    n: u32,
    bits: u64,
}

pub(crate) fn mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn check_vector_dim(n: u32) -> Result<()> {
    if n == 0 {
        return Err(LabError::invalid("n", "dimension must be at least 1"));
    }
    if n > MAX_VECTOR_DIM {
        return Err(LabError::capacity("vector", n, MAX_VECTOR_DIM));
    }
    Ok(())
}

impl Gf2Vector {
    pub fn new(n: u32, bits: u64) -> Result<Self> {
        check_vector_dim(n)?;
        if bits & !mask(n) != 0 {
            return Err(LabError::invalid(
                "vector",
                format!("{bits:#x} has bits above dimension {n}"),
            ));
        }
        Ok(Self { n, bits })
    }

    /// Builds a vector, discarding bits above `n`.
    pub fn truncated(n: u32, bits: u64) -> Result<Self> {
        check_vector_dim(n)?;
        Ok(Self {
            n,
            bits: bits & mask(n),
        })
    }

    pub fn zero(n: u32) -> Result<Self> {
        Self::new(n, 0)
    }

    /// The standard basis vector `e_i` (1-based).
    pub fn unit(n: u32, i: u32) -> Result<Self> {
        if i == 0 || i > n {
            return Err(LabError::invalid(
                "coordinate",
                format!("{i} not in 1..={n}"),
            ));
        }
        Self::new(n, 1 << (i - 1))
    }

    /// Parses the coordinate string `x₁x₂…xₙ`, e.g. `"110"`.
    pub fn from_coords(s: &str) -> Result<Self> {
        let n = s.len() as u32;
        check_vector_dim(n)?;
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                other => return Err(LabError::Parse(format!("unexpected coordinate {other:?}"))),
            }
        }
        Ok(Self { n, bits })
    }

    pub fn dim(self) -> u32 {
        self.n
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    /// Coordinate `x_i`, 1-based.
    pub fn coord(self, i: u32) -> bool {
        debug_assert!(i >= 1 && i <= self.n);
        (self.bits >> (i - 1)) & 1 == 1
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn checked_add(self, other: Self) -> Result<Self> {
        crate::error::check_same_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            bits: self.bits ^ other.bits,
        })
    }
}

impl Add for Gf2Vector {
    type Output = Gf2Vector;

    fn add(self, other: Self) -> Self {
        assert_eq!(self.n, other.n, "adding vectors of different dimension");
        Self {
            n: self.n,
            bits: self.bits ^ other.bits,
        }
    }
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if (self.bits >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vector({self})")
    }
}
