//! Parse profiles, gold decisions, cross-version comparison and
//! evaluation metrics.

pub mod compare;
mod lock;
pub mod metrics;
pub mod profile;
pub mod suite;

pub use compare::{compare_profiles, Category, CompareError, ComparisonReport};
pub use lock::{ProfileLock, LOCK_TIMEOUT_ENV};
pub use metrics::{compute_metrics, render_report, MetricsReport, MetricsRow, ReportFormat};
pub use profile::{Decision, Item, ItemRun, LimitsRecord, Profile, ProfileError, ResultRecord, RunInfo, Verdict};
pub use suite::{SuiteError, SuiteItem, TestSuite};
