//! Agent sessions over a sandboxed filesystem, model backends, and the
//! orchestration that turns compact views into PlantUML diagrams.

pub mod analyze;
pub mod api;
pub mod backend;
pub mod context;
pub mod deps;
pub mod events;
pub mod generate;
pub mod orchestrate;
pub mod plan;
pub mod prompts;
pub mod sandbox;
pub mod scripted;
pub mod session;
pub mod synthetic;

pub use backend::{Backend, BackendError, BackendRecord, BackendRequest, Role, Tool};
pub use context::RunContext;
pub use events::{EventKind, EventLog, RunEvent};
pub use orchestrate::{orchestrate, GeneratedDiagram, Orchestration};
pub use sandbox::Sandbox;
pub use synthetic::SyntheticBackend;
pub use scripted::{Script, ScriptTurn, ScriptedBackend};
pub use session::{run_session, AgentError, AgentSession, SessionHooks, SessionSpec};
