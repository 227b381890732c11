//! Exact arithmetic for the exponent-p theory of local fields.

pub mod class_spaces;
pub mod element;
pub mod error;
pub mod extensions;
pub mod field;
pub mod fp_linalg;
pub mod literal;
pub mod pairings;
pub mod residue;
pub mod verify;

pub use class_spaces::{as_class_reduce, unit_class_reduce, AdaptedBasis, ClassStatus, Space};
pub use element::{residue_trace, series_residue_and_dlog, teichmuller, LocalElement};
pub use error::{Error, Result};
pub use extensions::{attach_extension, DegreePExtension, ExtElement, ExtensionKind, Line};
pub use field::{bp_index, make_field, Characteristic, Field, FieldDescriptor};
pub use fp_linalg::{FpSubspace, FpVector};
pub use literal::parse_element;
pub use pairings::{hilbert_symbol_q2, norm_class_subgroup, PairingContext};
pub use residue::{ResidueElement, ResidueField};
pub use verify::{
    applicable_claims, describe, Claim, Outcome, PairingReport, VerificationReport, Verifier,
    VerifyOptions,
};
