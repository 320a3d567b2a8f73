// SPDX-License-Identifier: Apache-2.0

//! Credential life cycle: issuance, revocation, dynamic-identity reissue,
//! dual-signed ownership transfer, state queries and verification.

mod store;
mod verify;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codec::{encode_canonical_text, short_digest};
use crate::model::{sign_credential, Did, Proof, Signer, Timestamp, VerifiableCredential};
use crate::policy::{check_admissible, IssuanceProfile, IssuerKind, MatrixPoint, PolicyViolations};
use crate::registry::{authorize, Registry, RegistryError, StatusChange};
use crate::schemas::{
    build_credential, CredentialDraft, CredentialKind, CredentialSubject, FirmwareUpdate, OwnershipSubject,
    SchemaError, ValidityWindow,
};

pub use store::{CredentialStore, DirectoryStore, MemoryStore};
pub use verify::{verify_credential, verify_presentation, Check, CheckName, Verdict, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LifecycleState {
    Issued,
    Active,
    Expired,
    Revoked,
}

impl fmt::Display for LifecycleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LifecycleState::Issued => "Issued",
            LifecycleState::Active => "Active",
            LifecycleState::Expired => "Expired",
            LifecycleState::Revoked => "Revoked",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LifecycleError {
    #[error("policy violation: {0}")]
    PolicyViolation(PolicyViolations),
    #[error(transparent)]
    SubjectInvalid(SchemaError),
    #[error("{device} already holds active {kind} credential {existing}")]
    AlreadyActive {
        kind: CredentialKind,
        device: Did,
        existing: String,
    },
    #[error("{0} has no active dynamic identity")]
    NoExistingIdentity(Did),
    #[error("firmware is already {0}")]
    FirmwareUnchanged(String),
    #[error("{0} does not own the device")]
    NotCurrentOwner(Did),
    #[error("seller proof missing or invalid")]
    BadSellerProof,
    #[error("buyer proof missing or invalid")]
    BadBuyerProof,
    #[error("ownership credential {0} is no longer active")]
    OwnershipRevoked(String),
    #[error("{0} is not the issuer of {1}")]
    IssuerMismatch(Did, String),
    #[error("credential {0} is not of the expected kind")]
    WrongKind(String),
    #[error("credential {0} not found")]
    NotFound(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("credential store: {0}")]
    Store(String),
}

/// An issuing party: its role in the design matrix and its signing key.
#[derive(Clone, Debug)]
pub struct Issuer {
    pub kind: IssuerKind,
    pub signer: Signer,
}

impl Issuer {
    pub fn new(kind: IssuerKind, signer: Signer) -> Self {
        Self { kind, signer }
    }

    pub fn did(&self) -> &Did {
        self.signer.did()
    }
}

/// What to issue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssueRequest {
    pub kind: CredentialKind,
    pub subject: CredentialSubject,
    pub point: MatrixPoint,
    pub window: ValidityWindow,
    pub trusted_hardware: bool,
}

/// Seller-to-buyer transfer of a device's ownership credential. Each party
/// signs the signing input of the successor credential, which
/// [`TransferRequest::successor`] derives from the current credential and
/// the request alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransferRequest {
    pub current_ownership_vc_id: String,
    pub seller: Did,
    pub buyer: Did,
    pub device: Did,
    pub at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seller_proof: Option<Proof>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buyer_proof: Option<Proof>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TransferTerms<'a> {
    current_ownership_vc_id: &'a str,
    seller: &'a Did,
    buyer: &'a Did,
    device: &'a Did,
    at: Timestamp,
}

impl TransferRequest {
    pub fn new(current: &VerifiableCredential, buyer: Did, at: Timestamp) -> Result<Self, LifecycleError> {
        let CredentialSubject::Ownership(subject) = &current.credential_subject else {
            return Err(LifecycleError::WrongKind(current.id.clone()));
        };
        Ok(Self {
            current_ownership_vc_id: current.id.clone(),
            seller: subject.owner.clone(),
            buyer,
            device: subject.device_id.clone(),
            at,
            seller_proof: None,
            buyer_proof: None,
        })
    }

    fn terms(&self) -> Vec<u8> {
        encode_canonical_text(&TransferTerms {
            current_ownership_vc_id: &self.current_ownership_vc_id,
            seller: &self.seller,
            buyer: &self.buyer,
            device: &self.device,
            at: self.at,
        })
    }

    /// The unsigned ownership credential this transfer would produce.
    pub fn successor(&self, current: &VerifiableCredential) -> Result<VerifiableCredential, LifecycleError> {
        let window = ValidityWindow::new(
            self.at,
            current
                .valid_until
                .and_then(|until| self.at.checked_add_secs(until.seconds_since(current.valid_from))),
        );
        let draft = CredentialDraft {
            id: format!("urn:iotvc:ownership:{}", short_digest(&self.terms())),
            issuer: current.issuer.clone(),
            profile: current.design_matrix,
            window,
            subject: CredentialSubject::Ownership(OwnershipSubject {
                device_id: self.device.clone(),
                owner: self.buyer.clone(),
                purchased_date: self.at.date(),
                transaction_ref: None,
                previous_credential: Some(self.current_ownership_vc_id.clone()),
            }),
        };
        build_credential(CredentialKind::Ownership, draft).map_err(LifecycleError::SubjectInvalid)
    }

    /// Proof over the successor credential, made by `signer` at the
    /// request's instant.
    pub fn sign(&self, current: &VerifiableCredential, signer: &Signer) -> Result<Proof, LifecycleError> {
        Ok(Proof::create(
            &self.successor(current)?.signing_input(),
            signer,
            self.at,
        ))
    }
}

/// State of `vc` at `now`. Expiry is derived from the clock.
pub fn state_of_credential(
    vc: &VerifiableCredential,
    now: Timestamp,
    registry: &dyn Registry,
) -> Result<LifecycleState, LifecycleError> {
    let record = match registry.check_status(&vc.credential_status.id) {
        Ok(record) => record,
        Err(RegistryError::NotFound(_)) => return Ok(LifecycleState::Issued),
        Err(e) => return Err(e.into()),
    };
    if !record.is_active() {
        return Ok(LifecycleState::Revoked);
    }
    if vc.valid_until.is_some_and(|until| now > until) {
        return Ok(LifecycleState::Expired);
    }
    Ok(LifecycleState::Active)
}

/// Issuer-side engine over a registry and a credential store.
pub struct Lifecycle {
    registry: Arc<dyn Registry>,
    store: Arc<dyn CredentialStore>,
}

impl fmt::Debug for Lifecycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lifecycle").finish_non_exhaustive()
    }
}

impl Lifecycle {
    pub fn new(registry: Arc<dyn Registry>, store: Arc<dyn CredentialStore>) -> Self {
        Self { registry, store }
    }

    pub fn registry(&self) -> &dyn Registry {
        self.registry.as_ref()
    }

    pub fn store(&self) -> &dyn CredentialStore {
        self.store.as_ref()
    }

    pub fn credential(&self, id: &str) -> Result<VerifiableCredential, LifecycleError> {
        self.store
            .get(id)
            .ok_or_else(|| LifecycleError::NotFound(id.to_owned()))
    }

    pub fn state_of(&self, credential_id: &str, now: Timestamp) -> Result<LifecycleState, LifecycleError> {
        state_of_credential(&self.credential(credential_id)?, now, self.registry())
    }

    /// Active credentials of `kind` about `device` at `now`.
    pub fn active(&self, kind: CredentialKind, device: &Did, now: Timestamp) -> Vec<VerifiableCredential> {
        self.store
            .all()
            .into_iter()
            .filter(|vc| vc.kind() == Some(kind) && vc.subject_did() == device)
            .filter(|vc| {
                matches!(
                    state_of_credential(vc, now, self.registry()),
                    Ok(LifecycleState::Active)
                )
            })
            .collect()
    }

    fn prepare(&self, issuer: &Issuer, req: IssueRequest) -> Result<VerifiableCredential, LifecycleError> {
        check_admissible(issuer.kind, req.kind, req.point, req.trusted_hardware)
            .map_err(LifecycleError::PolicyViolation)?;
        let draft = CredentialDraft {
            id: String::new(),
            issuer: issuer.did().clone(),
            profile: IssuanceProfile {
                issuer_kind: issuer.kind,
                point: req.point,
                trusted_hardware: req.trusted_hardware,
            },
            window: req.window,
            subject: req.subject,
        };
        let mut vc = build_credential(req.kind, draft).map_err(LifecycleError::SubjectInvalid)?;
        vc.id = format!("urn:iotvc:{}:{}", req.kind, short_digest(&vc.signing_input()));
        vc.credential_status.id = vc.id.clone();
        Ok(vc)
    }

    fn ensure_unique(&self, vc: &VerifiableCredential, at: Timestamp) -> Result<(), LifecycleError> {
        let kind = vc.kind().ok_or_else(|| LifecycleError::WrongKind(vc.id.clone()))?;
        if !matches!(kind, CredentialKind::Ownership | CredentialKind::DynamicIdentity) {
            return Ok(());
        }
        match self.active(kind, vc.subject_did(), at).into_iter().next() {
            Some(existing) => Err(LifecycleError::AlreadyActive {
                kind,
                device: vc.subject_did().clone(),
                existing: existing.id,
            }),
            None => Ok(()),
        }
    }

    fn activate(
        &self,
        vc: VerifiableCredential,
        signer: &Signer,
        at: Timestamp,
    ) -> Result<VerifiableCredential, LifecycleError> {
        let proof = StatusChange::activate(&vc.id, at).sign(signer);
        self.registry.create_status(&vc.id, &vc.issuer, &proof, at)?;
        self.store.put(vc.clone()).map_err(LifecycleError::Store)?;
        Ok(vc)
    }

    /// Issue, sign, and register an Active status entry.
    pub fn issue(
        &self,
        issuer: &Issuer,
        req: IssueRequest,
        at: Timestamp,
    ) -> Result<VerifiableCredential, LifecycleError> {
        let vc = self.prepare(issuer, req)?;
        self.ensure_unique(&vc, at)?;
        let vc = sign_credential(vc, &issuer.signer, at);
        self.activate(vc, &issuer.signer, at)
    }

    pub fn revoke(
        &self,
        credential_id: &str,
        signer: &Signer,
        at: Timestamp,
        reason: Option<String>,
    ) -> Result<(), LifecycleError> {
        let proof = StatusChange::revoke(credential_id, at, reason.clone()).sign(signer);
        self.registry.set_status(credential_id, &proof, at, reason)?;
        Ok(())
    }

    /// Replace the device's dynamic identity after a firmware change. The
    /// previous version is appended to the update history and the old
    /// credential is revoked before the new one becomes active.
    pub fn reissue_dynamic_identity(
        &self,
        device: &Did,
        new_firmware: &str,
        at: Timestamp,
        issuer: &Issuer,
    ) -> Result<(VerifiableCredential, String), LifecycleError> {
        let old = self
            .active(CredentialKind::DynamicIdentity, device, at)
            .into_iter()
            .next()
            .ok_or_else(|| LifecycleError::NoExistingIdentity(device.clone()))?;
        let CredentialSubject::DynamicIdentity(subject) = &old.credential_subject else {
            return Err(LifecycleError::WrongKind(old.id.clone()));
        };
        if subject.firmware_version == new_firmware {
            return Err(LifecycleError::FirmwareUnchanged(new_firmware.to_owned()));
        }
        if &old.issuer != issuer.did() {
            return Err(LifecycleError::IssuerMismatch(issuer.did().clone(), old.id.clone()));
        }
        let mut next = subject.clone();
        next.update_history.push(FirmwareUpdate {
            version: subject.firmware_version.clone(),
            date: subject.last_updated_date,
        });
        next.firmware_version = new_firmware.to_owned();
        next.last_updated_date = at;
        let until = old
            .valid_until
            .and_then(|u| at.checked_add_secs(u.seconds_since(old.valid_from)));
        let req = IssueRequest {
            kind: CredentialKind::DynamicIdentity,
            subject: CredentialSubject::DynamicIdentity(next),
            point: old.design_matrix.point,
            window: ValidityWindow::new(at, until),
            trusted_hardware: old.design_matrix.trusted_hardware,
        };
        let vc = self.prepare(issuer, req)?;
        self.revoke(
            &old.id,
            &issuer.signer,
            at,
            Some(format!("firmware updated to {new_firmware}")),
        )?;
        let vc = sign_credential(vc, &issuer.signer, at);
        Ok((self.activate(vc, &issuer.signer, at)?, old.id))
    }

    /// Execute a countersigned transfer on the manufacturer's side. The new
    /// credential carries the issuer's, buyer's and seller's proofs, in that
    /// order.
    pub fn transfer_ownership(
        &self,
        req: &TransferRequest,
        manufacturer: &Issuer,
    ) -> Result<VerifiableCredential, LifecycleError> {
        let current = self.credential(&req.current_ownership_vc_id)?;
        let CredentialSubject::Ownership(subject) = &current.credential_subject else {
            return Err(LifecycleError::WrongKind(current.id.clone()));
        };
        if state_of_credential(&current, req.at, self.registry())? != LifecycleState::Active {
            return Err(LifecycleError::OwnershipRevoked(current.id.clone()));
        }
        if subject.owner != req.seller || subject.device_id != req.device {
            return Err(LifecycleError::NotCurrentOwner(req.seller.clone()));
        }
        if &current.issuer != manufacturer.did() {
            return Err(LifecycleError::IssuerMismatch(
                manufacturer.did().clone(),
                current.id.clone(),
            ));
        }
        let successor = req.successor(&current)?;
        let signing_input = successor.signing_input();
        let seller_proof = req
            .seller_proof
            .as_ref()
            .filter(|p| authorize(self.registry(), &req.seller, p, &signing_input).is_some())
            .ok_or(LifecycleError::BadSellerProof)?;
        let buyer_proof = req
            .buyer_proof
            .as_ref()
            .filter(|p| authorize(self.registry(), &req.buyer, p, &signing_input).is_some())
            .ok_or(LifecycleError::BadBuyerProof)?;
        let profile = &successor.design_matrix;
        check_admissible(
            profile.issuer_kind,
            CredentialKind::Ownership,
            profile.point,
            profile.trusted_hardware,
        )
        .map_err(LifecycleError::PolicyViolation)?;

        self.revoke(
            &current.id,
            &manufacturer.signer,
            req.at,
            Some(format!("ownership transferred to {}", req.buyer)),
        )?;
        let mut vc = sign_credential(successor, &manufacturer.signer, req.at);
        vc.proofs.push(buyer_proof.clone());
        vc.proofs.push(seller_proof.clone());
        self.activate(vc, &manufacturer.signer, req.at)
    }
}
