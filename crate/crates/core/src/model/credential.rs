// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{verify_signature, Did, DidUrl, ModelError, Signer, Timestamp, SIGNATURE_LEN};
use crate::codec::{self, encode_canonical_text};
use crate::policy::IssuanceProfile;
use crate::schemas::{CredentialKind, CredentialSubject};

pub const CREDENTIALS_CONTEXT: &str = "https://www.w3.org/2018/credentials/v1";
pub const VERIFIABLE_CREDENTIAL: &str = "VerifiableCredential";
pub const VERIFIABLE_PRESENTATION: &str = "VerifiablePresentation";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProofType {
    #[serde(rename = "Ed25519Signature2018")]
    EdDsaSignature,
}

impl ProofType {
    pub fn signature_len(self) -> usize {
        SIGNATURE_LEN
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    #[serde(rename = "type")]
    pub proof_type: ProofType,
    pub created: Timestamp,
    #[serde(rename = "verificationMethod")]
    pub verification_method: DidUrl,
    #[serde(rename = "proofValue", with = "super::bytes")]
    pub proof_value: Vec<u8>,
}

#[derive(Serialize)]
struct ProofOptions<'a> {
    #[serde(rename = "type")]
    proof_type: ProofType,
    created: Timestamp,
    #[serde(rename = "verificationMethod")]
    verification_method: &'a DidUrl,
}

// The signature covers the proof's own metadata as well as the document, so
// neither `created` nor `verificationMethod` can be swapped after the fact.
fn proof_message(proof_type: ProofType, created: Timestamp, method: &DidUrl, signing_input: &[u8]) -> Vec<u8> {
    let options = encode_canonical_text(&ProofOptions {
        proof_type,
        created,
        verification_method: method,
    });
    let mut message = Vec::with_capacity(64);
    message.extend_from_slice(&Sha256::digest(options));
    message.extend_from_slice(&Sha256::digest(signing_input));
    message
}

impl Proof {
    /// Sign `signing_input` with `signer` at `created`.
    pub fn create(signing_input: &[u8], signer: &Signer, created: Timestamp) -> Self {
        let proof_type = ProofType::EdDsaSignature;
        let message = proof_message(proof_type, created, &signer.method, signing_input);
        Self {
            proof_type,
            created,
            verification_method: signer.method.clone(),
            proof_value: signer.keys.sign(&message).to_vec(),
        }
    }

    /// Pure check of this proof over `signing_input` with `public_key`.
    pub fn verify(&self, signing_input: &[u8], public_key: &[u8]) -> bool {
        if self.proof_value.len() != self.proof_type.signature_len() {
            return false;
        }
        let message = proof_message(self.proof_type, self.created, &self.verification_method, signing_input);
        verify_signature(public_key, &message, &self.proof_value)
    }

    pub fn signer(&self) -> &Did {
        self.verification_method.did()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaRef {
    pub id: String,
    #[serde(rename = "type")]
    pub schema_type: String,
}

impl SchemaRef {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            schema_type: "JsonSchema".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusRef {
    pub id: String,
    #[serde(rename = "type")]
    pub status_type: String,
}

impl StatusRef {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            status_type: "IoTRegistryStatus".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifiableCredential {
    #[serde(rename = "@context")]
    pub context: Vec<String>,
    pub id: String,
    #[serde(rename = "type")]
    pub types: Vec<String>,
    pub issuer: Did,
    pub valid_from: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_until: Option<Timestamp>,
    pub credential_subject: CredentialSubject,
    pub credential_schema: SchemaRef,
    pub credential_status: StatusRef,
    pub design_matrix: IssuanceProfile,
    #[serde(rename = "proof", default, skip_serializing_if = "Vec::is_empty")]
    pub proofs: Vec<Proof>,
}

impl VerifiableCredential {
    /// Kind named by the second type tag.
    pub fn kind(&self) -> Option<CredentialKind> {
        self.types.iter().find_map(|t| CredentialKind::from_type_tag(t))
    }

    pub fn subject_did(&self) -> &Did {
        self.credential_subject.subject_did()
    }

    pub fn signing_input(&self) -> Vec<u8> {
        codec::signing_input(self)
    }

    pub fn unsigned(&self) -> Self {
        Self {
            proofs: Vec::new(),
            ..self.clone()
        }
    }

    /// Structural invariants that hold independently of any registry.
    pub fn check_envelope(&self) -> Result<(), ModelError> {
        if !self.types.iter().any(|t| t == VERIFIABLE_CREDENTIAL) {
            return Err(ModelError::MalformedCredential(
                "types lacks VerifiableCredential".into(),
            ));
        }
        if let Some(until) = self.valid_until {
            if until <= self.valid_from {
                return Err(ModelError::MalformedCredential(
                    "validUntil must be after validFrom".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Append a proof over the credential's proof-less canonical form.
pub fn sign_credential(mut vc: VerifiableCredential, signer: &Signer, at: Timestamp) -> VerifiableCredential {
    let proof = Proof::create(&vc.signing_input(), signer, at);
    vc.proofs.push(proof);
    vc
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifiablePresentation {
    #[serde(rename = "@context")]
    pub context: Vec<String>,
    pub id: String,
    #[serde(rename = "type")]
    pub types: Vec<String>,
    pub holder: Did,
    pub verifiable_credential: Vec<VerifiableCredential>,
    #[serde(with = "super::bytes")]
    pub challenge: Vec<u8>,
    pub audience: Did,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof: Option<Proof>,
}

impl VerifiablePresentation {
    pub fn signing_input(&self) -> Vec<u8> {
        if self.proof.is_none() {
            return encode_canonical_text(self);
        }
        encode_canonical_text(&Self {
            proof: None,
            ..self.clone()
        })
    }

    /// True when the proof was made by a key outside the holder's own DID.
    pub fn is_controller_signed(&self) -> bool {
        self.proof.as_ref().is_some_and(|p| p.signer() != &self.holder)
    }
}

/// Wrap credentials for `audience`, binding the verifier-supplied challenge.
pub fn sign_presentation(
    credentials: Vec<VerifiableCredential>,
    holder: Did,
    signer: &Signer,
    challenge: &[u8],
    audience: Did,
    at: Timestamp,
) -> Result<VerifiablePresentation, ModelError> {
    if challenge.is_empty() {
        return Err(ModelError::EmptyChallenge);
    }
    if credentials.is_empty() {
        return Err(ModelError::EmptyCredentialList);
    }
    let mut seed = Vec::new();
    seed.extend_from_slice(holder.to_string().as_bytes());
    seed.push(0);
    seed.extend_from_slice(audience.to_string().as_bytes());
    seed.push(0);
    seed.extend_from_slice(challenge);
    let mut vp = VerifiablePresentation {
        context: vec![CREDENTIALS_CONTEXT.to_owned()],
        id: format!("urn:iotssi:vp:{}", codec::short_digest(&seed)),
        types: vec![VERIFIABLE_PRESENTATION.to_owned()],
        holder,
        verifiable_credential: credentials,
        challenge: challenge.to_vec(),
        audience,
        proof: None,
    };
    vp.proof = Some(Proof::create(&vp.signing_input(), signer, at));
    Ok(vp)
}
