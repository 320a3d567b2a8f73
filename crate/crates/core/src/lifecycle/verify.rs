// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Did, Timestamp, VerifiableCredential, VerifiablePresentation};
use crate::policy::check_admissible;
use crate::registry::{authority_key, Registry};
use crate::schemas::{validate_subject, CredentialSubject};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CheckName {
    Schema,
    Signature,
    Window,
    Status,
    Policy,
    HolderBinding,
    Challenge,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Schema => "schema",
            CheckName::Signature => "signature",
            CheckName::Window => "window",
            CheckName::Status => "status",
            CheckName::Policy => "policy",
            CheckName::HolderBinding => "holderBinding",
            CheckName::Challenge => "challenge",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "Accept",
            Verdict::Reject => "Reject",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: CheckName,
    pub passed: bool,
    pub detail: String,
    /// Credential the check concerns, for presentation-level reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn from_checks(checks: Vec<Check>) -> Self {
        let verdict = if checks.iter().all(|c| c.passed) {
            Verdict::Accept
        } else {
            Verdict::Reject
        };
        Self { verdict, checks }
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    pub fn failed(&self) -> Vec<CheckName> {
        let mut names = Vec::new();
        for c in self.checks.iter().filter(|c| !c.passed) {
            if !names.contains(&c.name) {
                names.push(c.name);
            }
        }
        names
    }

    pub fn check(&self, name: CheckName) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        for c in &self.checks {
            let mark = if c.passed { "pass" } else { "FAIL" };
            match &c.credential {
                Some(id) => writeln!(f, "{mark} {} [{id}] {}", c.name, c.detail)?,
                None => writeln!(f, "{mark} {} {}", c.name, c.detail)?,
            }
        }
        Ok(())
    }
}

fn check(name: CheckName, result: Result<String, String>) -> Check {
    let (passed, detail) = match result {
        Ok(detail) => (true, detail),
        Err(detail) => (false, detail),
    };
    Check {
        name,
        passed,
        detail,
        credential: None,
    }
}

fn schema_check(vc: &VerifiableCredential, registry: &dyn Registry) -> Result<String, String> {
    vc.check_envelope().map_err(|e| e.to_string())?;
    let kind = vc.kind().ok_or("no known credential type")?;
    let schema = registry
        .schema(&vc.credential_schema.id)
        .map_err(|e| format!("schema unavailable: {e}"))?;
    if schema.kind != kind || schema.type_tag != kind.type_tag() {
        return Err(format!("schema {} describes {}, not {kind}", schema.id, schema.kind));
    }
    let mut violations = validate_subject(kind, &vc.credential_subject);
    if let CredentialSubject::StaticIdentity(s) = &vc.credential_subject {
        if s.manufacturer != vc.issuer {
            violations.push(crate::schemas::SubjectViolation {
                field: "manufacturer".into(),
                problem: "must match the credential issuer".into(),
            });
        }
    }
    if !violations.is_empty() {
        let list: Vec<_> = violations.iter().map(ToString::to_string).collect();
        return Err(list.join("; "));
    }
    Ok(schema.id)
}

fn signature_check(vc: &VerifiableCredential, registry: &dyn Registry) -> Result<String, String> {
    let first = vc.proofs.first().ok_or("credential carries no proof")?;
    if first.signer() != &vc.issuer {
        return Err(format!("first proof is by {}, not the issuer", first.signer()));
    }
    let signing_input = vc.signing_input();
    for proof in &vc.proofs {
        let doc = registry
            .resolve(proof.signer())
            .map_err(|e| format!("cannot resolve {}: {e}", proof.signer()))?;
        let key = doc
            .signing_key(&proof.verification_method)
            .ok_or_else(|| format!("{} is not a signing key", proof.verification_method))?;
        if !proof.verify(&signing_input, &key.public_key) {
            return Err(format!("proof by {} does not verify", proof.verification_method));
        }
    }
    Ok(format!("{} proof(s) verified", vc.proofs.len()))
}

fn window_check(vc: &VerifiableCredential, now: Timestamp) -> Result<String, String> {
    if now < vc.valid_from {
        return Err(format!("not valid before {}", vc.valid_from));
    }
    match vc.valid_until {
        Some(until) if now > until => Err(format!("expired at {until}")),
        Some(until) => Ok(format!("valid until {until}")),
        None => Ok("no expiry".into()),
    }
}

fn status_check(vc: &VerifiableCredential, registry: &dyn Registry) -> Result<String, String> {
    let record = registry
        .check_status(&vc.credential_status.id)
        .map_err(|e| format!("status unavailable: {e}"))?;
    if record.issuer != vc.issuer {
        return Err(format!("status entry belongs to {}", record.issuer));
    }
    match record.revoked_at {
        None => Ok(record.state.to_string()),
        Some(at) => Err(format!("revoked at {at}")),
    }
}

fn policy_check(vc: &VerifiableCredential) -> Result<String, String> {
    let kind = vc.kind().ok_or("no known credential type")?;
    let profile = &vc.design_matrix;
    check_admissible(profile.issuer_kind, kind, profile.point, profile.trusted_hardware)
        .map(|()| format!("{} at {}", profile.issuer_kind, profile.point))
        .map_err(|v| v.to_string())
}

/// Check a credential using only the registry. Every check always runs.
pub fn verify_credential(vc: &VerifiableCredential, now: Timestamp, registry: &dyn Registry) -> VerificationReport {
    VerificationReport::from_checks(credential_checks(vc, now, registry))
}

fn credential_checks(vc: &VerifiableCredential, now: Timestamp, registry: &dyn Registry) -> Vec<Check> {
    vec![
        check(CheckName::Schema, schema_check(vc, registry)),
        check(CheckName::Signature, signature_check(vc, registry)),
        check(CheckName::Window, window_check(vc, now)),
        check(CheckName::Status, status_check(vc, registry)),
        check(CheckName::Policy, policy_check(vc)),
    ]
}

fn holder_binding_check(vp: &VerifiablePresentation, registry: &dyn Registry) -> Result<String, String> {
    let proof = vp.proof.as_ref().ok_or("presentation is unsigned")?;
    let holder_doc = registry
        .resolve(&vp.holder)
        .map_err(|e| format!("cannot resolve holder: {e}"))?;
    let (key, authority) = authority_key(&holder_doc, &proof.verification_method, |d| registry.resolve(d).ok())
        .ok_or_else(|| format!("{} may not sign for {}", proof.verification_method, vp.holder))?;
    if !proof.verify(&vp.signing_input(), &key.public_key) {
        return Err("presentation proof does not verify".into());
    }
    if let Some(vc) = vp
        .verifiable_credential
        .iter()
        .find(|vc| !vc.credential_subject.names(&vp.holder))
    {
        return Err(format!("{} is not about {}", vc.id, vp.holder));
    }
    Ok(authority.to_string())
}

fn challenge_check(vp: &VerifiablePresentation, challenge: &[u8], audience: &Did) -> Result<String, String> {
    if vp.challenge != challenge {
        return Err("challenge does not match".into());
    }
    if &vp.audience != audience {
        return Err(format!("addressed to {}", vp.audience));
    }
    Ok(format!("bound to {audience}"))
}

/// Check every embedded credential, the holder's proof, and the
/// verifier-supplied challenge and audience.
pub fn verify_presentation(
    vp: &VerifiablePresentation,
    expected_challenge: &[u8],
    expected_audience: &Did,
    now: Timestamp,
    registry: &dyn Registry,
) -> VerificationReport {
    let mut checks = Vec::new();
    if vp.verifiable_credential.is_empty() {
        checks.push(check(
            CheckName::Schema,
            Err("presentation carries no credentials".into()),
        ));
    }
    for vc in &vp.verifiable_credential {
        checks.extend(credential_checks(vc, now, registry).into_iter().map(|c| Check {
            credential: Some(vc.id.clone()),
            ..c
        }));
    }
    checks.push(check(CheckName::HolderBinding, holder_binding_check(vp, registry)));
    checks.push(check(
        CheckName::Challenge,
        challenge_check(vp, expected_challenge, expected_audience),
    ));
    VerificationReport::from_checks(checks)
}
