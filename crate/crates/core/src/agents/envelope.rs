// SPDX-License-Identifier: Apache-2.0

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Nonce};
use hkdf::Hkdf;
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use super::AgentError;
use crate::codec::{decode_binary, encode_canonical_text};
use crate::model::{Did, DidDocument, KeyPair, Proof, Signer, Timestamp};
use crate::registry::Registry;

pub const NONCE_LEN: usize = 12;
const KDF_INFO: &[u8] = b"iotssi/envelope/v1";

/// Encrypted, signed message between two DIDs. Only the recipient's
/// agreement key decrypts it; the proof binds sender, recipient, nonce and
/// ciphertext.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecureEnvelope {
    pub from: Did,
    pub to: Did,
    #[serde(with = "crate::model::bytes")]
    pub nonce: Vec<u8>,
    #[serde(with = "crate::model::bytes")]
    pub ciphertext: Vec<u8>,
    pub proof: Proof,
}

#[derive(Serialize)]
struct SignedPart<'a> {
    from: &'a Did,
    to: &'a Did,
    #[serde(with = "crate::model::bytes")]
    nonce: &'a [u8],
    #[serde(with = "crate::model::bytes")]
    ciphertext: &'a [u8],
}

impl SecureEnvelope {
    fn signing_input(&self) -> Vec<u8> {
        signing_input(&self.from, &self.to, &self.nonce, &self.ciphertext)
    }
}

fn signing_input(from: &Did, to: &Did, nonce: &[u8], ciphertext: &[u8]) -> Vec<u8> {
    encode_canonical_text(&SignedPart {
        from,
        to,
        nonce,
        ciphertext,
    })
}

fn cipher(shared: &[u8; 32], nonce: &[u8]) -> ChaCha20Poly1305 {
    let mut key = [0u8; 32];
    Hkdf::<Sha256>::new(Some(nonce), shared)
        .expand(KDF_INFO, &mut key)
        .expect("32 bytes is a valid HKDF-SHA256 output length");
    ChaCha20Poly1305::new(&key.into())
}

fn aad(from: &Did, nonce: &[u8]) -> Vec<u8> {
    let mut out = from.to_string().into_bytes();
    out.push(0);
    out.extend_from_slice(nonce);
    out
}

fn agreement_public(doc: &DidDocument) -> Result<[u8; 32], AgentError> {
    doc.agreement_key()
        .and_then(|k| <[u8; 32]>::try_from(k.public_key.as_slice()).ok())
        .ok_or_else(|| AgentError::NoAgreementKey(doc.id.clone()))
}

pub fn seal(
    sender: &Signer,
    recipient: &DidDocument,
    payload: &[u8],
    nonce: [u8; NONCE_LEN],
    at: Timestamp,
) -> Result<SecureEnvelope, AgentError> {
    let peer = agreement_public(recipient)?;
    let shared = sender.keys.agree(&peer);
    let from = sender.did().clone();
    let ciphertext = cipher(&shared, &nonce)
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: payload,
                aad: &aad(&from, &nonce),
            },
        )
        .expect("in-memory encryption cannot fail");
    let proof = Proof::create(&signing_input(&from, &recipient.id, &nonce, &ciphertext), sender, at);
    Ok(SecureEnvelope {
        from,
        to: recipient.id.clone(),
        nonce: nonce.to_vec(),
        ciphertext,
        proof,
    })
}

/// Decrypt with the recipient's key, then check the sender's proof.
pub fn open(recipient: &KeyPair, sender: &DidDocument, envelope: &SecureEnvelope) -> Result<Vec<u8>, AgentError> {
    if sender.id != envelope.from {
        return Err(AgentError::BadSignature);
    }
    if envelope.nonce.len() != NONCE_LEN {
        return Err(AgentError::AuthenticationFailure);
    }
    let peer = agreement_public(sender)?;
    let shared = recipient.agree(&peer);
    let payload = cipher(&shared, &envelope.nonce)
        .decrypt(
            Nonce::from_slice(&envelope.nonce),
            Payload {
                msg: &envelope.ciphertext,
                aad: &aad(&envelope.from, &envelope.nonce),
            },
        )
        .map_err(|_| AgentError::AuthenticationFailure)?;
    let key = (envelope.proof.signer() == &envelope.from)
        .then(|| sender.authentication_key(&envelope.proof.verification_method))
        .flatten()
        .ok_or(AgentError::BadSignature)?;
    if !envelope.proof.verify(&envelope.signing_input(), &key.public_key) {
        return Err(AgentError::BadSignature);
    }
    Ok(payload)
}

/// Decode wire bytes addressed to `recipient`, resolve the sender, and open.
pub fn receive(
    bytes: &[u8],
    recipient: &Signer,
    registry: &dyn Registry,
) -> Result<(SecureEnvelope, Vec<u8>), AgentError> {
    let envelope: SecureEnvelope = decode_binary(bytes).map_err(|e| AgentError::Malformed(e.to_string()))?;
    let sender = registry.resolve(&envelope.from)?;
    let payload = open(&recipient.keys, &sender, &envelope)?;
    if &envelope.to != recipient.did() {
        return Err(AgentError::Misaddressed(envelope.to));
    }
    Ok((envelope, payload))
}
