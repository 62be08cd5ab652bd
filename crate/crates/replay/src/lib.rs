//! Episode traces, weak-label curation, group-level splits and round-wise
//! action audits.

pub mod audit;
pub mod curate;
pub mod error;
pub mod record;
pub mod split;
pub mod trace;

pub use audit::{audit_actions, ActionAudit, AuditRow};
pub use curate::{curate_labels, CurateConfig, Curated, RejectReason, Rejection};
pub use error::{ReplayError, Result};
pub use record::{RecordBody, ReplayRecord};
pub use split::{audit_split, split_groups, GroupSplit, SplitAudit};
pub use trace::{read_trace_dir, read_traces, Trace};
