//! Metamorphic testing domain model: relations, groups, the association
//! relation between source inputs and MRs, and suites.

mod association;
mod group;
pub mod relation;
mod suite;

pub use association::{build_association, AssociationRelation};
pub use group::{build_mg, derive_followups, is_eligible, DeriveError, MetamorphicGroup};
pub use relation::{
    Arity, Edit, FollowupTemplate, HookRef, InputRelation, MetamorphicRelation, Output, OutputRelation, Pick,
    PluginCommand, RelationError, TransformHook, VerifyHook, DEFAULT_TOLERANCE,
};
pub use suite::{SuiteError, TestSuite};
