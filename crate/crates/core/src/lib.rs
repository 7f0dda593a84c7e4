//! Finitely generated subgroups of the modular group `PSL(2,Z) = <a, b | a^2 = b^3 = 1>`.
//!
//! Subgroups are represented by Stallings graphs: finite rooted graphs whose
//! edges carry the labels `a` and `b`, folded and completed so that reading
//! loops at the root spells out exactly the elements of the subgroup.  On top
//! of that representation the crate provides
//!
//! * word normalisation and the word problem ([`words`]),
//! * construction, folding, completion, conjugation and canonical forms of
//!   subgroup graphs ([`stallings`]),
//! * structural queries: index, isomorphism type, freeness, bases
//!   ([`subgroup_props`]),
//! * exact subgroup counting by size across several families
//!   ([`enumeration`]), backed by a generic engine for labeled combinatorial
//!   structures ([`species`]),
//! * exact uniform random generation of subgroups ([`sampler`]),
//! * asymptotic estimates and statistical diagnostics ([`asymptotics`]),
//! * an independent brute-force cross-check ([`oracle`]).

pub mod asymptotics;
pub mod enumeration;
mod fastconv;
pub mod oracle;
pub mod sampler;
pub mod species;
pub mod stallings;
pub mod subgroup_props;
pub mod words;
