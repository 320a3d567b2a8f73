// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use ed25519_dalek::{Signature, Signer as _, SigningKey, VerifyingKey};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use x25519_dalek::{PublicKey as AgreementPublic, StaticSecret};

use super::{DidUrl, ModelError};

pub const PUBLIC_KEY_LEN: usize = 32;
pub const SEED_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;

const AGREEMENT_DOMAIN: &[u8] = b"iotssi/x25519-agreement/v1";

/// Key families a verification method may carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KeyType {
    #[serde(rename = "Ed25519VerificationKey2018")]
    Ed25519Verification,
    #[serde(rename = "X25519KeyAgreementKey2019")]
    X25519KeyAgreement,
}

impl KeyType {
    pub fn key_len(self) -> usize {
        PUBLIC_KEY_LEN
    }
}

/// Ed25519 signing pair plus an X25519 agreement pair, both derived from one
/// 32-byte seed.
#[derive(Clone)]
pub struct KeyPair {
    seed: [u8; SEED_LEN],
    signing: SigningKey,
    agreement: StaticSecret,
}

impl KeyPair {
    pub fn from_seed(seed: &[u8]) -> Result<Self, ModelError> {
        let seed: [u8; SEED_LEN] = seed.try_into().map_err(|_| ModelError::BadSeedLength(seed.len()))?;
        let mut hasher = Sha256::new();
        hasher.update(AGREEMENT_DOMAIN);
        hasher.update(seed);
        let agreement_seed: [u8; 32] = hasher.finalize().into();
        Ok(Self {
            seed,
            signing: SigningKey::from_bytes(&seed),
            agreement: StaticSecret::from(agreement_seed),
        })
    }

    /// Fresh pair from the operating system's RNG.
    pub fn random() -> Self {
        let mut seed = [0u8; SEED_LEN];
        rand::rngs::OsRng.fill_bytes(&mut seed);
        Self::from_seed(&seed).expect("seed has the right length")
    }

    pub fn key_type(&self) -> KeyType {
        KeyType::Ed25519Verification
    }

    pub fn seed(&self) -> &[u8; SEED_LEN] {
        &self.seed
    }

    pub fn public_key(&self) -> [u8; PUBLIC_KEY_LEN] {
        self.signing.verifying_key().to_bytes()
    }

    pub fn agreement_public_key(&self) -> [u8; PUBLIC_KEY_LEN] {
        AgreementPublic::from(&self.agreement).to_bytes()
    }

    pub fn sign(&self, message: &[u8]) -> [u8; SIGNATURE_LEN] {
        self.signing.sign(message).to_bytes()
    }

    /// X25519 shared secret with a peer's agreement public key.
    pub fn agree(&self, peer_public: &[u8; PUBLIC_KEY_LEN]) -> [u8; 32] {
        self.agreement
            .diffie_hellman(&AgreementPublic::from(*peer_public))
            .to_bytes()
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public_key", &bs58::encode(self.public_key()).into_string())
            .finish_non_exhaustive()
    }
}

impl PartialEq for KeyPair {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
    }
}

impl Eq for KeyPair {}

/// Same as [`KeyPair::from_seed`].
pub fn generate_key_pair(seed: &[u8]) -> Result<KeyPair, ModelError> {
    KeyPair::from_seed(seed)
}

/// Strict Ed25519 verification. A pure function of its inputs.
pub fn verify_signature(public_key: &[u8], message: &[u8], signature: &[u8]) -> bool {
    let Ok(public_key) = <[u8; PUBLIC_KEY_LEN]>::try_from(public_key) else {
        return false;
    };
    let Ok(signature) = <[u8; SIGNATURE_LEN]>::try_from(signature) else {
        return false;
    };
    let Ok(key) = VerifyingKey::from_bytes(&public_key) else {
        return false;
    };
    key.verify_strict(message, &Signature::from_bytes(&signature)).is_ok()
}

/// A key pair bound to the DID URL under which its public half is published.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signer {
    pub method: DidUrl,
    pub keys: KeyPair,
}

impl Signer {
    pub fn new(method: DidUrl, keys: KeyPair) -> Self {
        Self { method, keys }
    }

    pub fn did(&self) -> &super::Did {
        self.method.did()
    }
}
