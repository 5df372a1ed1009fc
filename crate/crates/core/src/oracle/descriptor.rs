use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Backend;
use crate::error::{LabError, Result};
use crate::gf2::{check_vector_dim, Gf2Set, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Explicit,
    LazyRandom,
    Noisy,
    Shifted,
    Embedded,
}

/// JSON description of an oracle. Explicit sets are referenced by `path`;
/// an in-memory set serializes without one and cannot be rebuilt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleDescriptor {
    pub kind: OracleKind,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_num: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_den: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<OracleDescriptor>>,
    /// Second operand of an embedding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<Box<OracleDescriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<u64>,
}

impl OracleDescriptor {
    fn bare(kind: OracleKind, n: u32) -> Self {
        Self {
            kind,
            n,
            eps_num: None,
            eps_den: None,
            seed: None,
            base: None,
            other: None,
            path: None,
            shift: None,
            extra: None,
        }
    }

    pub fn explicit_file(n: u32, path: impl Into<String>) -> Self {
        Self {
            path: Some(path.into()),
            ..Self::bare(OracleKind::Explicit, n)
        }
    }

    pub fn lazy_random(n: u32, density: Rational, seed: u64) -> Self {
        Self {
            eps_num: Some(*density.numer()),
            eps_den: Some(*density.denom()),
            seed: Some(seed),
            ..Self::bare(OracleKind::LazyRandom, n)
        }
    }

    pub(crate) fn of(n: u32, backend: &Backend) -> Self {
        match backend {
            Backend::Explicit(_) => Self::bare(OracleKind::Explicit, n),
            Backend::LazyRandom { density, seed, .. } => Self::lazy_random(n, *density, *seed),
            Backend::Noisy {
                base, eps, seed, ..
            } => Self {
                eps_num: Some(*eps.numer()),
                eps_den: Some(*eps.denom()),
                seed: Some(*seed),
                base: Some(Box::new(Self::of(n, base))),
                ..Self::bare(OracleKind::Noisy, n)
            },
            Backend::Shifted { base, shift } => Self {
                base: Some(Box::new(Self::of(n, base))),
                shift: Some(*shift),
                ..Self::bare(OracleKind::Shifted, n)
            },
            Backend::Embedded { a, b, extra } => Self {
                base: Some(Box::new(Self::of(n - 2, a))),
                other: Some(Box::new(Self::of(n - 2, b))),
                extra: *extra,
                ..Self::bare(OracleKind::Embedded, n)
            },
        }
    }

    fn rate(&self) -> Result<Rational> {
        match (self.eps_num, self.eps_den) {
            (Some(_), Some(0)) => Err(LabError::invalid("eps_den", "zero denominator")),
            (Some(p), Some(q)) => Ok(Rational::new(p, q)),
            _ => Err(LabError::invalid("eps_num", "missing rate")),
        }
    }

    fn need<'a, T>(field: &'static str, v: &'a Option<T>) -> Result<&'a T> {
        v.as_ref()
            .ok_or_else(|| LabError::invalid(field, "missing"))
    }

    pub(crate) fn build(&self) -> Result<(u32, Backend)> {
        check_vector_dim(self.n)?;
        let backend = match self.kind {
            OracleKind::Explicit => {
                let set = Gf2Set::load(Self::need("path", &self.path)?)?;
                if set.dim() != self.n {
                    return Err(LabError::DimensionMismatch {
                        left: self.n,
                        right: set.dim(),
                    });
                }
                Backend::Explicit(Arc::new(set))
            }
            OracleKind::LazyRandom => {
                let density = self.rate()?;
                if density > Rational::from_integer(1) {
                    return Err(LabError::invalid("eps_num", "density exceeds 1"));
                }
                Backend::lazy_random(density, *Self::need("seed", &self.seed)?)
            }
            OracleKind::Noisy => {
                let eps = self.rate()?;
                if eps > Rational::new(1, 2) {
                    return Err(LabError::invalid("eps_num", "flip rate exceeds 1/2"));
                }
                let base = self.child(Self::need("base", &self.base)?, self.n)?;
                Backend::noisy(base, eps, *Self::need("seed", &self.seed)?)
            }
            OracleKind::Shifted => {
                let shift = *Self::need("shift", &self.shift)?;
                if shift >> self.n != 0 {
                    return Err(LabError::invalid("shift", "outside the index space"));
                }
                Backend::Shifted {
                    base: Box::new(self.child(Self::need("base", &self.base)?, self.n)?),
                    shift,
                }
            }
            OracleKind::Embedded => {
                if self.n < 3 {
                    return Err(LabError::invalid(
                        "n",
                        "an embedding has dimension at least 3",
                    ));
                }
                let a = self.child(Self::need("base", &self.base)?, self.n - 2)?;
                let b = self.child(Self::need("other", &self.other)?, self.n - 2)?;
                Backend::Embedded {
                    a: Box::new(a),
                    b: Box::new(b),
                    extra: self.extra,
                }
            }
        };
        Ok((self.n, backend))
    }

    fn child(&self, desc: &OracleDescriptor, n: u32) -> Result<Backend> {
        if desc.n != n {
            return Err(LabError::DimensionMismatch {
                left: n,
                right: desc.n,
            });
        }
        Ok(desc.build()?.1)
    }
}
