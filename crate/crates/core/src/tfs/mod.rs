//! Typed feature structures over a bounded-complete type hierarchy.

mod fs;
mod hierarchy;

pub use fs::{
    isomorphic, subsumes, unify, unify_at, AvmDisplay, FailureKind, FeaturePath, FeatureStructure, FsBuilder, FsError,
    NodeId, UnifyFailure,
};
pub use hierarchy::{
    validate, Feature, HierarchySpec, TypeDecl, TypeHierarchy, TypeId, UnknownType, ValidationReport, Violation,
};
