//! Finite topological groupoids: their equivariant sheaves, criteria for
//! subgroupoid inclusions to be weak equivalences, logical topologies on
//! groupoids of indexed models, and cospans localised at weak equivalences.

pub mod closure;
pub mod frac;
pub mod fintop;
pub mod grpd;
pub mod logic;
pub mod sheaf;
pub mod weq;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    mod spaces {}
    #[doc = include_str!("../../../book/src/groupoids.md")]
    mod groupoids {}
    #[doc = include_str!("../../../book/src/sheaves.md")]
    mod sheaves {}
    #[doc = include_str!("../../../book/src/weak-equivalences.md")]
    mod weak_equivalences {}
    #[doc = include_str!("../../../book/src/logical-topologies.md")]
    mod logical_topologies {}
    #[doc = include_str!("../../../book/src/fractions.md")]
    mod fractions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
