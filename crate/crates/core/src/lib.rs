//! Core pipeline for turning a source repository into UML-ready data.
//!
//! The stages are independent and communicate only through the types in
//! [`ir`]:
//!
//! - [`extract`] runs error-tolerant grammar parsers over a file tree and
//!   produces a raw [`ir::ProjectIr`];
//! - [`normalize`] rewrites a raw IR into the canonical schema;
//! - [`view`] compacts a normalized IR into a byte-bounded, diagram-specific
//!   [`view::IrView`];
//! - [`puml`] parses and lints generated PlantUML;
//! - [`metrics`] scores generated diagrams against the IR.
//!
//! [`synth`] generates seeded raw IRs for fuzzing and benchmarks.

pub mod canonical;
pub mod diagram;
pub mod extract;
pub mod ir;
pub mod metrics;
pub mod normalize;
pub mod puml;
pub mod synth;
pub mod view;

pub use diagram::{DiagramType, Route};
pub use ir::{ClassDef, ClassKind, FunctionDef, IrError, Language, ProjectIr, Visibility};
