// SPDX-License-Identifier: Apache-2.0

//! Deterministic sample world: parties with fixed keys, their DID documents,
//! and one signed credential per kind.

use chrono::NaiveDate;
use sha2::{Digest, Sha256};

use crate::codec::encode_canonical_text;
use crate::model::{
    build_did_document, sign_credential, Did, DidDocument, KeyPair, Proof, ServiceEndpoint, Signer, Timestamp,
    VerifiableCredential, VerificationMethod,
};
use crate::policy::{IssuanceProfile, IssuerKind, MatrixPoint, Scope, TrustLevel, Validity};
use crate::registry::{Registry, RegistryError, StatusChange};
use crate::schemas::{
    build_credential, schema_definition, Attributes, CapabilitySubject, CommunicationSubject, Computation,
    ConfigurationSubject, CredentialDraft, CredentialKind, CredentialSubject, DynamicIdentitySubject, Memory,
    Onboardee, Onboarder, OnboardingSubject, OwnershipSubject, StaticIdentitySubject, ValidityWindow,
};

pub const SIGNING_FRAGMENT: &str = "key-1";
pub const AGREEMENT_FRAGMENT: &str = "key-agreement-1";

/// Instant inside every fixture credential's validity window.
pub fn fixture_clock() -> Timestamp {
    ts("2023-04-01T10:30:00Z")
}

/// Issuance instant shared by the corpus.
pub fn fixture_issued_at() -> Timestamp {
    ts("2023-04-01T10:11:12Z")
}

fn ts(text: &str) -> Timestamp {
    Timestamp::parse(text).expect("fixture timestamps are well formed")
}

fn did(text: &str) -> Did {
    Did::parse(text).expect("fixture DIDs are well formed")
}

pub fn seed_for(role: &str) -> [u8; 32] {
    Sha256::digest(format!("iotssi fixture seed/{role}").as_bytes()).into()
}

/// One participant: a DID with a signing and an agreement key.
#[derive(Clone, Debug)]
pub struct Party {
    pub signer: Signer,
    pub controller: Option<Did>,
    pub services: Vec<ServiceEndpoint>,
}

impl Party {
    pub fn new(did: Did, seed: &[u8]) -> Self {
        let keys = KeyPair::from_seed(seed).expect("fixture seeds are 32 bytes");
        let method = did.with_fragment(SIGNING_FRAGMENT).expect("fragment is well formed");
        Self {
            signer: Signer::new(method, keys),
            controller: None,
            services: Vec::new(),
        }
    }

    pub fn did(&self) -> &Did {
        self.signer.did()
    }

    pub fn keys(&self) -> &KeyPair {
        &self.signer.keys
    }

    pub fn document(&self) -> DidDocument {
        let did = self.did().clone();
        let keys = vec![
            VerificationMethod::ed25519(self.signer.method.clone(), self.keys()),
            VerificationMethod::x25519(
                did.with_fragment(AGREEMENT_FRAGMENT).expect("fragment is well formed"),
                self.keys(),
            ),
        ];
        build_did_document(did, self.controller.clone(), keys, self.services.clone())
            .expect("fixture documents are well formed")
    }

    /// Self-signed registration of this party's document.
    pub fn register(&self, registry: &dyn Registry, at: Timestamp) -> Result<(), RegistryError> {
        let doc = self.document();
        let proof = sign_document(&doc, &self.signer, at);
        registry.register_did_document(doc, &proof)
    }
}

/// Proof authorizing registration or update of `doc`.
pub fn sign_document(doc: &DidDocument, signer: &Signer, at: Timestamp) -> Proof {
    Proof::create(&encode_canonical_text(doc), signer, at)
}

fn service(owner: &Did, fragment: &str, kind: &str, endpoint: &str) -> ServiceEndpoint {
    ServiceEndpoint {
        id: owner.with_fragment(fragment).expect("fragment is well formed"),
        service_type: kind.to_owned(),
        endpoint: endpoint.to_owned(),
    }
}

/// The participants of every scenario.
#[derive(Clone, Debug)]
pub struct FixtureWorld {
    pub manufacturer: Party,
    pub service_provider: Party,
    pub regulator: Party,
    pub device: Party,
    pub owner: Party,
    pub buyer: Party,
    pub edge: Party,
    pub verifier: Party,
}

impl Default for FixtureWorld {
    fn default() -> Self {
        Self::new()
    }
}

impl FixtureWorld {
    pub fn new() -> Self {
        let party = |role: &str, id: &str| Party::new(did(id), &seed_for(role));
        let mut device = party("device", "did:iot:device:123456789");
        let mut owner = party("owner", "did:iot:user:123456789");
        device.controller = Some(owner.did().clone());
        device.services = vec![service(device.did(), "mqtt", "MqttEndpoint", "broker.example.mqtt.com")];
        owner.services = vec![service(owner.did(), "http", "HttpEndpoint", "example.com")];
        Self {
            manufacturer: party("manufacturer", "did:iot:manufacturer:123456789"),
            service_provider: party("service-provider", "did:iot:provider:123456789"),
            regulator: party("regulator", "did:iot:regulator:123456789"),
            device,
            owner,
            buyer: party("buyer", "did:iot:user:987654321"),
            edge: party("edge", "did:iot:edge:123456789"),
            verifier: party("verifier", "did:iot:verifier:123456789"),
        }
    }

    pub fn parties(&self) -> [&Party; 8] {
        [
            &self.manufacturer,
            &self.service_provider,
            &self.regulator,
            &self.owner,
            &self.buyer,
            &self.edge,
            &self.verifier,
            &self.device,
        ]
    }

    pub fn party(&self, did: &Did) -> Option<&Party> {
        self.parties().into_iter().find(|p| p.did() == did)
    }

    /// Register every document (controllers first) and every schema.
    pub fn register_all(&self, registry: &dyn Registry) -> Result<(), RegistryError> {
        let at = fixture_issued_at();
        for party in self.parties() {
            party.register(registry, at)?;
        }
        for &kind in CredentialKind::ALL {
            registry.register_schema(schema_definition(kind))?;
        }
        Ok(())
    }

    /// Create Active status entries for `credentials`, signed by their issuers.
    pub fn publish_statuses<'a>(
        &self,
        registry: &dyn Registry,
        credentials: impl IntoIterator<Item = &'a VerifiableCredential>,
    ) -> Result<(), RegistryError> {
        for vc in credentials {
            let issuer = self
                .party(&vc.issuer)
                .ok_or_else(|| RegistryError::NotFound(vc.issuer.to_string()))?;
            let proof = StatusChange::activate(&vc.id, vc.valid_from).sign(&issuer.signer);
            registry.create_status(&vc.id, &vc.issuer, &proof, vc.valid_from)?;
        }
        Ok(())
    }
}

fn attrs(pairs: &[(&str, &str)]) -> Attributes {
    pairs.iter().map(|(k, v)| ((*k).to_owned(), (*v).to_owned())).collect()
}

struct Sample {
    name: CredentialKind,
    id: &'static str,
    issuer: IssuerKind,
    point: MatrixPoint,
    until: Option<&'static str>,
    subject: CredentialSubject,
}

/// One signed credential per kind, named by kind label. Deterministic.
pub fn build_fixture_corpus(world: &FixtureWorld) -> Vec<(String, VerifiableCredential)> {
    let device = world.device.did().clone();
    let manufacturer = world.manufacturer.did().clone();
    let provider = world.service_provider.did().clone();
    let issued = fixture_issued_at();
    let samples = vec![
        Sample {
            name: CredentialKind::StaticIdentity,
            id: "did:iot:device:vc:123456789",
            issuer: IssuerKind::Manufacturer,
            point: MatrixPoint::new(TrustLevel::Verified, Scope::GeneralPublic, Validity::Indefinite),
            until: None,
            subject: CredentialSubject::StaticIdentity(StaticIdentitySubject {
                id: device.clone(),
                serial_no: "123456789".into(),
                manufactured_date: ts("2022-12-01T00:01:02Z"),
                manufacturer: manufacturer.clone(),
                model_no: "XYZ".into(),
                batch_no: "12345".into(),
            }),
        },
        Sample {
            name: CredentialKind::DynamicIdentity,
            id: "did:iot:device:vc:dyn:123456789",
            issuer: IssuerKind::Manufacturer,
            point: MatrixPoint::new(TrustLevel::Verified, Scope::ConnectedNetworks, Validity::MediumTerm),
            until: Some("2024-04-01T10:11:12Z"),
            subject: CredentialSubject::DynamicIdentity(DynamicIdentitySubject {
                id: device.clone(),
                firmware_version: "1.2.3".into(),
                last_updated_date: ts("2023-04-01T00:01:02Z"),
                update_history: Vec::new(),
                attributes: attrs(&[("os", "zephyr-3.3")]),
            }),
        },
        Sample {
            name: CredentialKind::Ownership,
            id: "did:iot:device:vc:own:123456789",
            issuer: IssuerKind::Manufacturer,
            point: MatrixPoint::new(TrustLevel::Verified, Scope::Individual, Validity::LongTerm),
            until: Some("2033-04-01T10:11:12Z"),
            subject: CredentialSubject::Ownership(OwnershipSubject {
                device_id: device.clone(),
                owner: world.owner.did().clone(),
                purchased_date: NaiveDate::from_ymd_opt(2022, 1, 1).expect("valid date"),
                transaction_ref: None,
                previous_credential: None,
            }),
        },
        Sample {
            name: CredentialKind::Communication,
            id: "did:iot:device:vc:comm:123456789",
            issuer: IssuerKind::Manufacturer,
            point: MatrixPoint::new(TrustLevel::Verified, Scope::GeneralPublic, Validity::LongTerm),
            until: Some("2033-04-01T10:11:12Z"),
            subject: CredentialSubject::Communication(CommunicationSubject {
                device_id: device.clone(),
                wired: vec!["ethernet".into()],
                wireless: vec!["bluetooth/4.0".into(), "zigbee".into()],
                cellular: vec!["lte-m".into()],
                satellite: Vec::new(),
            }),
        },
        Sample {
            name: CredentialKind::Capability,
            id: "did:iot:device:vc:cap:123456789",
            issuer: IssuerKind::Manufacturer,
            point: MatrixPoint::new(TrustLevel::Consortium, Scope::GeneralPublic, Validity::Indefinite),
            until: None,
            subject: CredentialSubject::Capability(CapabilitySubject {
                device_id: device.clone(),
                computation: Computation {
                    clock_speed_hz: Some(240_000_000),
                    cpu_arch: Some("xtensa-lx6".into()),
                    no_of_cores: Some(2),
                },
                memory: Memory {
                    ram_bytes: Some(520 * 1024),
                    flash_bytes: Some(4 * 1024 * 1024),
                },
                other: attrs(&[("sensor", "temperature")]),
            }),
        },
        Sample {
            name: CredentialKind::Configuration,
            id: "did:iot:device:vc:config:123456789",
            issuer: IssuerKind::Manufacturer,
            point: MatrixPoint::new(TrustLevel::Verified, Scope::SameNetwork, Validity::Session),
            until: Some("2023-04-01T11:11:12Z"),
            subject: CredentialSubject::Configuration(ConfigurationSubject {
                device_id: device.clone(),
                thresholds: attrs(&[("maxThroughputKbps", "250")]),
                security: attrs(&[("encryption", "aes-128-ccm")]),
                communication: attrs(&[("mqttPort", "8883")]),
                user: attrs(&[("deviceName", "greenhouse-sensor")]),
                other: Attributes::new(),
                attestation_evidence: Some(Sha256::digest(b"attestation evidence").to_vec()),
                trusted_hardware: false,
            }),
        },
        Sample {
            name: CredentialKind::Onboarding,
            id: "did:iot:device:vc:onboard:123456789",
            issuer: IssuerKind::ServiceProvider,
            point: MatrixPoint::new(TrustLevel::Anchored, Scope::SameNetwork, Validity::Session),
            until: Some("2023-04-01T11:11:12Z"),
            subject: CredentialSubject::Onboarding(OnboardingSubject {
                device_id: device.clone(),
                onboardee: Onboardee {
                    identity: attrs(&[
                        ("serialNo", "123456789"),
                        ("staticIdentity", "did:iot:device:vc:123456789"),
                    ]),
                    configuration: attrs(&[("protocol", "mqtt")]),
                    ownership: attrs(&[("owner", "did:iot:user:123456789")]),
                    other: Attributes::new(),
                },
                onboarder: Onboarder {
                    identity: attrs(&[
                        ("id", "did:iot:provider:123456789"),
                        ("service", "greenhouse-onboarding"),
                    ]),
                    other: Attributes::new(),
                },
            }),
        },
    ];
    samples
        .into_iter()
        .map(|s| {
            let (issuer_did, signer) = match s.issuer {
                IssuerKind::ServiceProvider => (provider.clone(), &world.service_provider.signer),
                _ => (manufacturer.clone(), &world.manufacturer.signer),
            };
            let draft = CredentialDraft {
                id: s.id.to_owned(),
                issuer: issuer_did,
                profile: IssuanceProfile {
                    issuer_kind: s.issuer,
                    point: s.point,
                    trusted_hardware: false,
                },
                window: ValidityWindow::new(issued, s.until.map(ts)),
                subject: s.subject,
            };
            let vc = build_credential(s.name, draft).expect("fixture credentials are well formed");
            (s.name.to_string(), sign_credential(vc, signer, issued))
        })
        .collect()
}
