//! Role agents: the edit line grammar, role prompts, scripted and template
//! agents, and a chat-completion backend.

pub mod agent;
pub mod backend;
pub mod chat;
pub mod embedder;
pub mod error;
pub mod grammar;
pub mod mock;
pub mod prompt;
pub mod request;
pub mod scripted;
pub mod template;

pub use agent::{Agent, Proposals};
pub use backend::{BackendConfig, ChatClient, Completion, Sleeper, TextBackend, ThreadSleeper};
pub use chat::ChatAgent;
pub use embedder::RemoteEmbedder;
pub use error::{AgentError, Result};
pub use grammar::{format_line, parse_line, parse_reply, NodeDraft};
pub use prompt::{build_role_prompt, ChatMessage};
pub use request::{AgentRequest, Phase};
pub use scripted::{ScriptEntry, ScriptedAgent};
pub use template::TemplateAgent;
