//! Algorithms for restricted wreath products `A wr B` of finitely generated groups:
//! arithmetic, conjugacy decisions, finite quotients and separability depths.

pub mod conjugacy;
pub mod error;
pub mod groups;
pub mod lattice;
pub mod magnus;
pub mod quotients;
pub mod separability;
pub mod syntax;
pub mod wreath;

pub use conjugacy::{
    conj_abelian_a_wreath, conj_bruteforce, conj_finite_wreath, malcev_mostowski, ConjStatus, ConjVerdict,
    NotConjReason,
};
pub use error::{Error, Result};
pub use groups::{centralizer_contains, CayleyTable, Elem, Group, GroupElement, GroupKind, DEFAULT_CAP};
pub use lattice::Hnf;
pub use magnus::{magnus_embed, magnus_group, metabelian_conjugate, metabelian_is_identity, FreeWord};
pub use quotients::{
    enumerate_coc, extend_quotient, in_kn, product_quotient, wreath_quotients, Family, QuotientMap, WreathQuotientMap,
};
pub use separability::{
    closed_form_bound, conj_profile, cyclic_profile, depth_conjugacy, depth_cyclic, girth_profile,
    pro_p_nonsep_witness, residual_girth, short_profile, shortest_conjugator, Bound, BoundFormula, BoundParams, Depth,
    DepthProfile, Growth, MeasureConfig, NonSepReport, ProfileKind, ProfileRow,
};
pub use syntax::{parse_element, parse_group, parse_wreath_element, GroupSpec};
pub use wreath::{BaseMap, WreathElement, WreathProduct};
