// SPDX-License-Identifier: Apache-2.0

//! Identifiers, documents, key material, credentials and presentations.

pub mod bytes;
mod credential;
mod did;
mod document;
mod keys;
mod time;

pub use credential::{
    sign_credential, sign_presentation, Proof, ProofType, SchemaRef, StatusRef, VerifiableCredential,
    VerifiablePresentation, CREDENTIALS_CONTEXT, VERIFIABLE_CREDENTIAL, VERIFIABLE_PRESENTATION,
};
pub use did::{Did, DidUrl};
pub use document::{
    build_did_document, DidDocument, ServiceEndpoint, VerificationMethod, DID_CORE_CONTEXT, ED25519_2018_CONTEXT,
    X25519_2019_CONTEXT,
};
pub use keys::{
    generate_key_pair, verify_signature, KeyPair, KeyType, Signer, PUBLIC_KEY_LEN, SEED_LEN, SIGNATURE_LEN,
};
pub use time::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("malformed DID {input:?}: {reason}")]
    MalformedDid { input: String, reason: &'static str },
    #[error("malformed DID URL {0:?}")]
    MalformedDidUrl(String),
    #[error("malformed timestamp {0:?}")]
    MalformedTimestamp(String),
    #[error("key seed must be 32 bytes, got {0}")]
    BadSeedLength(usize),
    #[error("document needs at least one signing key")]
    EmptyKeyList,
    #[error("fragment #{0} appears more than once")]
    DuplicateFragment(String),
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("malformed credential: {0}")]
    MalformedCredential(String),
    #[error("presentation challenge is empty")]
    EmptyChallenge,
    #[error("presentation carries no credentials")]
    EmptyCredentialList,
}
