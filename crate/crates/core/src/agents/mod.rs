// SPDX-License-Identifier: Apache-2.0

//! Holder and verifier agents: authenticated envelopes, simulated
//! constrained links, edge status caches, and scripted exchanges under the
//! three delegation strategies.

mod cache;
mod envelope;
mod link;
mod scenario;

pub use cache::{CachedRegistry, CachedStatus, CachedVerdict, EdgeCache, SyncSummary};
pub use envelope::{open, receive, seal, SecureEnvelope, NONCE_LEN};
pub use link::{load_link_profiles, transmit, LinkProfile, Transmission};
pub use scenario::{
    run_scenario, write_metrics_csv, Counters, DelegationStrategy, LinkPlan, MetricsRow, Participant, ScenarioMetrics,
    Script,
};

use crate::lifecycle::LifecycleError;
use crate::model::{Did, ModelError};
use crate::registry::RegistryError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("{0} publishes no key-agreement key")]
    NoAgreementKey(Did),
    #[error("envelope failed authenticated decryption")]
    AuthenticationFailure,
    #[error("envelope signature does not verify")]
    BadSignature,
    #[error("envelope is addressed to {0}")]
    Misaddressed(Did),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unknown script {0:?}")]
    UnknownScript(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("invalid link profile: {0}")]
    InvalidLink(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Lifecycle(#[from] LifecycleError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
