// SPDX-License-Identifier: Apache-2.0

//! The seven IoT credential kinds: subject bodies, validation, and the
//! credential builder.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::{
    Did, SchemaRef, StatusRef, Timestamp, VerifiableCredential, CREDENTIALS_CONTEXT, VERIFIABLE_CREDENTIAL,
};
use crate::policy::{labelled_enum, IssuanceProfile, UnknownLabel};

labelled_enum!(
    CredentialKind {
        StaticIdentity => "static-identity",
        DynamicIdentity => "dynamic-identity",
        Ownership => "ownership",
        Communication => "communication",
        Capability => "capability",
        Configuration => "configuration",
        Onboarding => "onboarding",
    }
);

impl CredentialKind {
    pub fn type_tag(self) -> &'static str {
        match self {
            CredentialKind::StaticIdentity => "StaticIoTIdentityVC",
            CredentialKind::DynamicIdentity => "DynamicIoTIdentityVC",
            CredentialKind::Ownership => "IoTOwnershipVC",
            // Spelling follows the published sample credential.
            CredentialKind::Communication => "IoTComunicationVC",
            CredentialKind::Capability => "IoTCapabilityVC",
            CredentialKind::Configuration => "IoTConfigVC",
            CredentialKind::Onboarding => "IoTOnboardingVC",
        }
    }

    pub fn from_type_tag(tag: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.type_tag() == tag)
    }

    pub fn schema_uri(self) -> String {
        format!("schema:iot:{}:v1", self.as_str())
    }

    /// Kinds that describe properties shared by a whole model or batch.
    pub fn is_batchable(self) -> bool {
        matches!(self, CredentialKind::Communication | CredentialKind::Capability)
    }
}

pub type Attributes = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StaticIdentitySubject {
    pub id: Did,
    pub serial_no: String,
    pub manufactured_date: Timestamp,
    pub manufacturer: Did,
    pub model_no: String,
    pub batch_no: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FirmwareUpdate {
    pub version: String,
    pub date: Timestamp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DynamicIdentitySubject {
    pub id: Did,
    pub firmware_version: String,
    pub last_updated_date: Timestamp,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub update_history: Vec<FirmwareUpdate>,
    /// Form-factor dependent extras such as geolocation or operating system.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: Attributes,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OwnershipSubject {
    pub device_id: Did,
    pub owner: Did,
    pub purchased_date: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transaction_ref: Option<String>,
    /// Ownership credential this one supersedes after a transfer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub previous_credential: Option<String>,
}

/// Supported link technologies by category. Entries may carry a version
/// suffix, e.g. `bluetooth/4.0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CommunicationSubject {
    pub device_id: Did,
    pub wired: Vec<String>,
    pub wireless: Vec<String>,
    pub cellular: Vec<String>,
    pub satellite: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Computation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock_speed_hz: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_arch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_of_cores: Option<u64>,
}

impl Computation {
    fn is_empty(&self) -> bool {
        self.clock_speed_hz.is_none() && self.cpu_arch.is_none() && self.no_of_cores.is_none()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Memory {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ram_bytes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flash_bytes: Option<u64>,
}

impl Memory {
    fn is_empty(&self) -> bool {
        self.ram_bytes.is_none() && self.flash_bytes.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CapabilitySubject {
    pub device_id: Did,
    pub computation: Computation,
    pub memory: Memory,
    pub other: Attributes,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConfigurationSubject {
    pub device_id: Did,
    pub thresholds: Attributes,
    pub security: Attributes,
    pub communication: Attributes,
    pub user: Attributes,
    pub other: Attributes,
    /// Opaque remote-attestation evidence; its production is out of scope.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::model::bytes::option"
    )]
    pub attestation_evidence: Option<Vec<u8>>,
    #[serde(default)]
    pub trusted_hardware: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Onboardee {
    pub identity: Attributes,
    pub configuration: Attributes,
    pub ownership: Attributes,
    pub other: Attributes,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Onboarder {
    /// Must include `id`, the onboarder's DID.
    pub identity: Attributes,
    pub other: Attributes,
}

impl Onboarder {
    pub fn did(&self) -> Option<Did> {
        self.identity.get("id").and_then(|s| Did::parse(s).ok())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OnboardingSubject {
    pub device_id: Did,
    pub onboardee: Onboardee,
    pub onboarder: Onboarder,
}

/// Kind-specific credential subject. The encoded form carries no tag: the
/// field sets are disjoint, and the credential's type list names the kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CredentialSubject {
    StaticIdentity(StaticIdentitySubject),
    DynamicIdentity(DynamicIdentitySubject),
    Ownership(OwnershipSubject),
    Communication(CommunicationSubject),
    Capability(CapabilitySubject),
    Configuration(ConfigurationSubject),
    Onboarding(OnboardingSubject),
}

impl CredentialSubject {
    pub fn kind(&self) -> CredentialKind {
        match self {
            CredentialSubject::StaticIdentity(_) => CredentialKind::StaticIdentity,
            CredentialSubject::DynamicIdentity(_) => CredentialKind::DynamicIdentity,
            CredentialSubject::Ownership(_) => CredentialKind::Ownership,
            CredentialSubject::Communication(_) => CredentialKind::Communication,
            CredentialSubject::Capability(_) => CredentialKind::Capability,
            CredentialSubject::Configuration(_) => CredentialKind::Configuration,
            CredentialSubject::Onboarding(_) => CredentialKind::Onboarding,
        }
    }

    /// The device (or other subject) the claims are about.
    pub fn subject_did(&self) -> &Did {
        match self {
            CredentialSubject::StaticIdentity(s) => &s.id,
            CredentialSubject::DynamicIdentity(s) => &s.id,
            CredentialSubject::Ownership(s) => &s.device_id,
            CredentialSubject::Communication(s) => &s.device_id,
            CredentialSubject::Capability(s) => &s.device_id,
            CredentialSubject::Configuration(s) => &s.device_id,
            CredentialSubject::Onboarding(s) => &s.device_id,
        }
    }

    /// Whether `did` is a party the credential speaks for: its subject, the
    /// owner of an ownership credential, or the onboarder of an onboarding one.
    pub fn names(&self, did: &Did) -> bool {
        if self.subject_did() == did {
            return true;
        }
        match self {
            CredentialSubject::Onboarding(s) => s.onboarder.did().as_ref() == Some(did),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectViolation {
    pub field: String,
    pub problem: String,
}

impl SubjectViolation {
    fn new(field: impl Into<String>, problem: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            problem: problem.into(),
        }
    }
}

impl fmt::Display for SubjectViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.problem)
    }
}

fn is_dotted_version(v: &str) -> bool {
    !v.is_empty()
        && v.split('.')
            .all(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_digit()))
}

fn check_attributes(field: &str, attrs: &Attributes, out: &mut Vec<SubjectViolation>) {
    if attrs.keys().any(|k| k.is_empty()) {
        out.push(SubjectViolation::new(field, "attribute names must be non-empty"));
    }
}

fn check_technologies(field: &str, entries: &[String], out: &mut Vec<SubjectViolation>) {
    let mut seen = BTreeSet::new();
    for entry in entries {
        if !seen.insert(entry.as_str()) {
            out.push(SubjectViolation::new(field, format!("duplicate entry {entry:?}")));
        }
        let well_formed = match entry.split_once('/') {
            Some((name, version)) => !name.is_empty() && !version.is_empty() && !version.contains('/'),
            None => !entry.is_empty(),
        };
        if !well_formed || entry.chars().any(char::is_whitespace) {
            out.push(SubjectViolation::new(field, format!("malformed entry {entry:?}")));
        }
    }
}

fn positive(field: &str, value: Option<u64>, out: &mut Vec<SubjectViolation>) {
    if value == Some(0) {
        out.push(SubjectViolation::new(field, "must be positive"));
    }
}

/// Structural validation of a subject body against `kind`. Returns every
/// problem found.
pub fn validate_subject(kind: CredentialKind, subject: &CredentialSubject) -> Vec<SubjectViolation> {
    let mut out = Vec::new();
    if subject.kind() != kind {
        out.push(SubjectViolation::new(
            "credentialSubject",
            format!("body is {} but credential kind is {kind}", subject.kind()),
        ));
    }
    match subject {
        CredentialSubject::StaticIdentity(s) => {
            if s.serial_no.is_empty() {
                out.push(SubjectViolation::new("serialNo", "must be non-empty"));
            }
            if s.model_no.is_empty() {
                out.push(SubjectViolation::new("modelNo", "must be non-empty"));
            }
        }
        CredentialSubject::DynamicIdentity(s) => {
            if !is_dotted_version(&s.firmware_version) {
                out.push(SubjectViolation::new(
                    "firmwareVersion",
                    "must be a dotted numeric version",
                ));
            }
            for update in &s.update_history {
                if !is_dotted_version(&update.version) {
                    out.push(SubjectViolation::new(
                        "updateHistory",
                        format!("{:?} is not a dotted numeric version", update.version),
                    ));
                }
            }
            if s.update_history.windows(2).any(|w| w[0].date >= w[1].date) {
                out.push(SubjectViolation::new(
                    "updateHistory",
                    "dates must be strictly increasing",
                ));
            }
            check_attributes("attributes", &s.attributes, &mut out);
        }
        CredentialSubject::Ownership(s) => {
            if s.device_id == s.owner {
                out.push(SubjectViolation::new("owner", "a device cannot own itself"));
            }
        }
        CredentialSubject::Communication(s) => {
            let categories = [
                ("wired", &s.wired),
                ("wireless", &s.wireless),
                ("cellular", &s.cellular),
                ("satellite", &s.satellite),
            ];
            if categories.iter().all(|(_, entries)| entries.is_empty()) {
                out.push(SubjectViolation::new(
                    "credentialSubject",
                    "at least one category must be non-empty",
                ));
            }
            for (field, entries) in categories {
                check_technologies(field, entries, &mut out);
            }
        }
        CredentialSubject::Capability(s) => {
            if s.computation.is_empty() && s.memory.is_empty() && s.other.is_empty() {
                out.push(SubjectViolation::new(
                    "credentialSubject",
                    "at least one section must be non-empty",
                ));
            }
            positive("computation.clockSpeedHz", s.computation.clock_speed_hz, &mut out);
            positive("computation.noOfCores", s.computation.no_of_cores, &mut out);
            positive("memory.ramBytes", s.memory.ram_bytes, &mut out);
            positive("memory.flashBytes", s.memory.flash_bytes, &mut out);
            if s.computation.cpu_arch.as_deref() == Some("") {
                out.push(SubjectViolation::new(
                    "computation.cpuArch",
                    "must be non-empty when present",
                ));
            }
            check_attributes("other", &s.other, &mut out);
        }
        CredentialSubject::Configuration(s) => {
            let categories = [
                ("thresholds", &s.thresholds),
                ("security", &s.security),
                ("communication", &s.communication),
                ("user", &s.user),
                ("other", &s.other),
            ];
            if categories.iter().all(|(_, a)| a.is_empty()) {
                out.push(SubjectViolation::new(
                    "credentialSubject",
                    "at least one category must be non-empty",
                ));
            }
            for (field, attrs) in categories {
                check_attributes(field, attrs, &mut out);
            }
            let attested = s.attestation_evidence.as_ref().is_some_and(|e| !e.is_empty());
            if !attested && !s.trusted_hardware {
                out.push(SubjectViolation::new(
                    "attestationEvidence",
                    "required unless the device has trusted hardware",
                ));
            }
        }
        CredentialSubject::Onboarding(s) => {
            if s.onboardee.identity.is_empty() {
                out.push(SubjectViolation::new("onboardee.identity", "must be non-empty"));
            }
            if s.onboarder.identity.is_empty() {
                out.push(SubjectViolation::new("onboarder.identity", "must be non-empty"));
            } else if s.onboarder.did().is_none() {
                out.push(SubjectViolation::new(
                    "onboarder.identity.id",
                    "must hold the onboarder's DID",
                ));
            }
            for (field, attrs) in [
                ("onboardee.identity", &s.onboardee.identity),
                ("onboardee.configuration", &s.onboardee.configuration),
                ("onboardee.ownership", &s.onboardee.ownership),
                ("onboardee.other", &s.onboardee.other),
                ("onboarder.identity", &s.onboarder.identity),
                ("onboarder.other", &s.onboarder.other),
            ] {
                check_attributes(field, attrs, &mut out);
            }
        }
    }
    out
}

/// A dynamic identity cannot predate the device it describes.
pub fn check_dynamic_against_static(
    dynamic: &DynamicIdentitySubject,
    static_identity: &StaticIdentitySubject,
) -> Vec<SubjectViolation> {
    let mut out = Vec::new();
    if dynamic.id != static_identity.id {
        out.push(SubjectViolation::new(
            "id",
            "dynamic and static identity name different devices",
        ));
    }
    if dynamic.last_updated_date < static_identity.manufactured_date {
        out.push(SubjectViolation::new(
            "lastUpdatedDate",
            "precedes the manufacturing date",
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("invalid subject: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    SubjectInvalid(Vec<SubjectViolation>),
    #[error("validity window does not match validity class {validity}: {reason}")]
    WindowValidityMismatch {
        validity: crate::policy::Validity,
        reason: &'static str,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidityWindow {
    pub valid_from: Timestamp,
    pub valid_until: Option<Timestamp>,
}

impl ValidityWindow {
    pub fn new(valid_from: Timestamp, valid_until: Option<Timestamp>) -> Self {
        Self {
            valid_from,
            valid_until,
        }
    }

    pub fn contains(&self, at: Timestamp) -> bool {
        self.valid_from <= at && self.valid_until.is_none_or(|until| at <= until)
    }
}

/// Registry-published description of one credential kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemaDefinition {
    pub id: String,
    pub kind: CredentialKind,
    pub type_tag: String,
}

pub fn schema_definition(kind: CredentialKind) -> SchemaDefinition {
    SchemaDefinition {
        id: kind.schema_uri(),
        kind,
        type_tag: kind.type_tag().to_owned(),
    }
}

/// Unsigned credential content.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CredentialDraft {
    pub id: String,
    pub issuer: Did,
    pub profile: IssuanceProfile,
    pub window: ValidityWindow,
    pub subject: CredentialSubject,
}

/// Assemble an unsigned credential of `kind`. The status reference is the
/// credential id itself.
pub fn build_credential(kind: CredentialKind, draft: CredentialDraft) -> Result<VerifiableCredential, SchemaError> {
    let mut violations = validate_subject(kind, &draft.subject);
    if let CredentialSubject::StaticIdentity(s) = &draft.subject {
        if s.manufacturer != draft.issuer {
            violations.push(SubjectViolation::new(
                "manufacturer",
                "must match the credential issuer",
            ));
        }
    }
    if !violations.is_empty() {
        return Err(SchemaError::SubjectInvalid(violations));
    }
    let validity = draft.profile.point.validity;
    match (validity.requires_expiry(), draft.window.valid_until) {
        (true, None) => {
            return Err(SchemaError::WindowValidityMismatch {
                validity,
                reason: "a bounded validity class needs validUntil",
            })
        }
        (false, Some(_)) => {
            return Err(SchemaError::WindowValidityMismatch {
                validity,
                reason: "indefinite credentials carry no validUntil",
            })
        }
        (_, Some(until)) if until <= draft.window.valid_from => {
            return Err(SchemaError::WindowValidityMismatch {
                validity,
                reason: "validUntil must be after validFrom",
            })
        }
        _ => {}
    }
    Ok(VerifiableCredential {
        context: vec![CREDENTIALS_CONTEXT.to_owned()],
        credential_status: StatusRef::new(draft.id.clone()),
        id: draft.id,
        types: vec![VERIFIABLE_CREDENTIAL.to_owned(), kind.type_tag().to_owned()],
        issuer: draft.issuer,
        valid_from: draft.window.valid_from,
        valid_until: draft.window.valid_until,
        credential_subject: draft.subject,
        credential_schema: SchemaRef::new(kind.schema_uri()),
        design_matrix: draft.profile,
        proofs: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode_binary, decode_canonical_text, encode_binary, encode_canonical_text};
    use crate::policy::{IssuerKind, MatrixPoint, Scope, TrustLevel, Validity};

    fn did(s: &str) -> Did {
        Did::parse(s).unwrap()
    }

    fn ts(s: &str) -> Timestamp {
        Timestamp::parse(s).unwrap()
    }

    fn static_subject() -> StaticIdentitySubject {
        StaticIdentitySubject {
            id: did("did:iot:device:123456789"),
            serial_no: "123456789".into(),
            manufactured_date: ts("2022-12-01T00:01:02Z"),
            manufacturer: did("did:iot:manufacturer:123456789"),
            model_no: "XYZ".into(),
            batch_no: "12345".into(),
        }
    }

    fn profile(validity: Validity) -> IssuanceProfile {
        IssuanceProfile {
            issuer_kind: IssuerKind::Manufacturer,
            point: MatrixPoint::new(TrustLevel::Verified, Scope::GeneralPublic, validity),
            trusted_hardware: false,
        }
    }

    fn draft(subject: CredentialSubject, validity: Validity, until: Option<Timestamp>) -> CredentialDraft {
        CredentialDraft {
            id: "did:iot:device:vc:123456789".into(),
            issuer: did("did:iot:manufacturer:123456789"),
            profile: profile(validity),
            window: ValidityWindow::new(ts("2023-04-01T10:11:12Z"), until),
            subject,
        }
    }

    #[test]
    fn static_identity_type_tag() {
        let vc = build_credential(
            CredentialKind::StaticIdentity,
            draft(
                CredentialSubject::StaticIdentity(static_subject()),
                Validity::Indefinite,
                None,
            ),
        )
        .unwrap();
        assert_eq!(vc.types, ["VerifiableCredential", "StaticIoTIdentityVC"]);
        assert_eq!(vc.kind(), Some(CredentialKind::StaticIdentity));
        let text = String::from_utf8(encode_canonical_text(&vc)).unwrap();
        assert!(text.contains(r#""serialNo":"123456789""#));
        assert!(text.contains(r#""issuer":"did:iot:manufacturer:123456789""#));
        assert!(text.contains(r#""validFrom":"2023-04-01T10:11:12Z""#));
    }

    #[test]
    fn ownership_type_tag_and_date() {
        let subject = CredentialSubject::Ownership(OwnershipSubject {
            device_id: did("did:iot:device:123456789"),
            owner: did("did:iot:user:123456789"),
            purchased_date: NaiveDate::from_ymd_opt(2022, 1, 1).unwrap(),
            transaction_ref: None,
            previous_credential: None,
        });
        let vc = build_credential(
            CredentialKind::Ownership,
            draft(subject, Validity::LongTerm, Some(ts("2033-04-01T10:11:12Z"))),
        )
        .unwrap();
        assert_eq!(vc.types[1], "IoTOwnershipVC");
        let text = String::from_utf8(encode_canonical_text(&vc)).unwrap();
        assert!(text.contains(r#""purchasedDate":"2022-01-01""#));
    }

    #[test]
    fn indefinite_with_expiry_is_rejected() {
        let err = build_credential(
            CredentialKind::StaticIdentity,
            draft(
                CredentialSubject::StaticIdentity(static_subject()),
                Validity::Indefinite,
                Some(ts("2030-01-01T00:00:00Z")),
            ),
        )
        .unwrap_err();
        assert!(matches!(err, SchemaError::WindowValidityMismatch { .. }));
    }

    #[test]
    fn bounded_without_expiry_is_rejected() {
        let err = build_credential(
            CredentialKind::StaticIdentity,
            draft(
                CredentialSubject::StaticIdentity(static_subject()),
                Validity::Session,
                None,
            ),
        )
        .unwrap_err();
        assert!(matches!(err, SchemaError::WindowValidityMismatch { .. }));
    }

    #[test]
    fn manufacturer_must_match_issuer() {
        let mut s = static_subject();
        s.manufacturer = did("did:iot:manufacturer:other");
        let err = build_credential(
            CredentialKind::StaticIdentity,
            draft(CredentialSubject::StaticIdentity(s), Validity::Indefinite, None),
        )
        .unwrap_err();
        assert!(matches!(err, SchemaError::SubjectInvalid(v) if v[0].field == "manufacturer"));
    }

    #[test]
    fn empty_communication_is_a_violation() {
        let body = CredentialSubject::Communication(CommunicationSubject {
            device_id: did("did:iot:device:1"),
            wired: vec![],
            wireless: vec![],
            cellular: vec![],
            satellite: vec![],
        });
        assert!(!validate_subject(CredentialKind::Communication, &body).is_empty());
    }

    #[test]
    fn communication_duplicates_and_versions() {
        let body = CredentialSubject::Communication(CommunicationSubject {
            device_id: did("did:iot:device:1"),
            wired: vec!["ethernet".into()],
            wireless: vec!["bluetooth/4.0".into(), "bluetooth/4.0".into(), "zigbee/".into()],
            cellular: vec![],
            satellite: vec![],
        });
        let v = validate_subject(CredentialKind::Communication, &body);
        assert_eq!(v.len(), 2, "{v:?}");
    }

    #[test]
    fn zero_cores_is_a_violation() {
        let body = CredentialSubject::Capability(CapabilitySubject {
            device_id: did("did:iot:device:1"),
            computation: Computation {
                no_of_cores: Some(0),
                ..Default::default()
            },
            memory: Memory::default(),
            other: Attributes::new(),
        });
        let v = validate_subject(CredentialKind::Capability, &body);
        assert_eq!(
            v,
            vec![SubjectViolation::new("computation.noOfCores", "must be positive")]
        );
    }

    #[test]
    fn configuration_needs_attestation_or_hardware() {
        let mut body = ConfigurationSubject {
            device_id: did("did:iot:device:1"),
            thresholds: [("maxKbps".to_owned(), "250".to_owned())].into(),
            security: Attributes::new(),
            communication: Attributes::new(),
            user: Attributes::new(),
            other: Attributes::new(),
            attestation_evidence: None,
            trusted_hardware: false,
        };
        let v = validate_subject(
            CredentialKind::Configuration,
            &CredentialSubject::Configuration(body.clone()),
        );
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "attestationEvidence");
        body.trusted_hardware = true;
        assert!(validate_subject(
            CredentialKind::Configuration,
            &CredentialSubject::Configuration(body.clone())
        )
        .is_empty());
        body.trusted_hardware = false;
        body.attestation_evidence = Some(vec![1, 2, 3]);
        assert!(validate_subject(CredentialKind::Configuration, &CredentialSubject::Configuration(body)).is_empty());
    }

    #[test]
    fn kind_mismatch_is_a_violation() {
        let body = CredentialSubject::StaticIdentity(static_subject());
        assert!(!validate_subject(CredentialKind::Ownership, &body).is_empty());
    }

    #[test]
    fn dynamic_history_must_increase() {
        let body = DynamicIdentitySubject {
            id: did("did:iot:device:1"),
            firmware_version: "1.2.4".into(),
            last_updated_date: ts("2023-05-01T00:00:00Z"),
            update_history: vec![
                FirmwareUpdate {
                    version: "1.2.3".into(),
                    date: ts("2023-04-01T00:00:00Z"),
                },
                FirmwareUpdate {
                    version: "1.2.2".into(),
                    date: ts("2023-04-01T00:00:00Z"),
                },
            ],
            attributes: Attributes::new(),
        };
        let v = validate_subject(
            CredentialKind::DynamicIdentity,
            &CredentialSubject::DynamicIdentity(body),
        );
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "updateHistory");
    }

    #[test]
    fn dynamic_cannot_predate_manufacture() {
        let dynamic = DynamicIdentitySubject {
            id: did("did:iot:device:123456789"),
            firmware_version: "1.2.3".into(),
            last_updated_date: ts("2020-01-01T00:00:00Z"),
            update_history: vec![],
            attributes: Attributes::new(),
        };
        assert_eq!(check_dynamic_against_static(&dynamic, &static_subject()).len(), 1);
    }

    #[test]
    fn onboarder_needs_did() {
        let body = OnboardingSubject {
            device_id: did("did:iot:device:1"),
            onboardee: Onboardee {
                identity: [("serialNo".to_owned(), "1".to_owned())].into(),
                ..Default::default()
            },
            onboarder: Onboarder {
                identity: [("name".to_owned(), "gateway".to_owned())].into(),
                other: Attributes::new(),
            },
        };
        let v = validate_subject(CredentialKind::Onboarding, &CredentialSubject::Onboarding(body));
        assert_eq!(v[0].field, "onboarder.identity.id");
    }

    #[test]
    fn subject_kind_survives_both_encodings() {
        let subjects = [
            CredentialSubject::StaticIdentity(static_subject()),
            CredentialSubject::Capability(CapabilitySubject {
                device_id: did("did:iot:device:1"),
                computation: Computation::default(),
                memory: Memory::default(),
                other: [("sensor".to_owned(), "humidity".to_owned())].into(),
            }),
            CredentialSubject::Configuration(ConfigurationSubject {
                device_id: did("did:iot:device:1"),
                thresholds: Attributes::new(),
                security: Attributes::new(),
                communication: Attributes::new(),
                user: Attributes::new(),
                other: [("k".to_owned(), "v".to_owned())].into(),
                attestation_evidence: Some(vec![9; 4]),
                trusted_hardware: false,
            }),
        ];
        for s in subjects {
            let text: CredentialSubject = decode_canonical_text(&encode_canonical_text(&s)).unwrap();
            assert_eq!(text.kind(), s.kind());
            assert_eq!(text, s);
            let bin: CredentialSubject = decode_binary(&encode_binary(&s)).unwrap();
            assert_eq!(bin, s);
        }
    }

    #[test]
    fn type_tags_are_distinct() {
        let tags: BTreeSet<_> = CredentialKind::ALL.iter().map(|k| k.type_tag()).collect();
        assert_eq!(tags.len(), 7);
        for &k in CredentialKind::ALL {
            assert_eq!(CredentialKind::from_type_tag(k.type_tag()), Some(k));
        }
    }
}
