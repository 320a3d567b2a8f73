// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{receive, seal, transmit, AgentError, EdgeCache, LinkProfile, NONCE_LEN};
use crate::codec::{decode_binary, encode_binary};
use crate::fixtures::{build_fixture_corpus, sign_document, FixtureWorld};
use crate::lifecycle::{
    verify_credential, verify_presentation, CredentialStore, Issuer, Lifecycle, MemoryStore, TransferRequest,
    VerificationReport,
};
use crate::model::{
    sign_presentation, Did, Signer, Timestamp, VerifiableCredential, VerifiablePresentation, VerificationMethod,
};
use crate::policy::{labelled_enum, IssuerKind, UnknownLabel};
use crate::registry::{MemoryRegistry, Registry, StatusChange};
use crate::schemas::CredentialKind;

labelled_enum!(
    /// Who stores credentials and answers presentation requests for a device.
    DelegationStrategy {
        Autonomous => "autonomous",
        EdgeProxy => "edge-proxy",
        OwnerWallet => "owner-wallet",
    }
);

labelled_enum!(
    Script {
        PresentIdentity => "present-identity",
        OnboardDevice => "onboard-device",
        TransferOwnership => "transfer-ownership",
    }
);

labelled_enum!(
    Participant {
        Device => "device",
        Edge => "edge",
        Owner => "owner",
        Verifier => "verifier",
        ServiceProvider => "service-provider",
        Buyer => "buyer",
        Manufacturer => "manufacturer",
        Registry => "registry",
    }
);

impl Script {
    pub fn parse(name: &str) -> Result<Self, AgentError> {
        name.parse().map_err(|_| AgentError::UnknownScript(name.to_owned()))
    }
}

impl DelegationStrategy {
    pub fn parse(name: &str) -> Result<Self, AgentError> {
        name.parse().map_err(|_| AgentError::UnknownStrategy(name.to_owned()))
    }

    fn agent(self) -> Participant {
        match self {
            DelegationStrategy::Autonomous => Participant::Device,
            DelegationStrategy::EdgeProxy => Participant::Edge,
            DelegationStrategy::OwnerWallet => Participant::Owner,
        }
    }
}

/// Link used on each hop: any hop touching the device uses `device`, all
/// others use `backhaul`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkPlan {
    pub device: LinkProfile,
    pub backhaul: LinkProfile,
}

impl Default for LinkPlan {
    fn default() -> Self {
        Self {
            device: LinkProfile::ble_like(),
            backhaul: LinkProfile::mqtt_like(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Counters {
    pub messages_sent: u64,
    pub payload_bytes: u64,
    pub bytes_sent: u64,
    pub fragments_sent: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioMetrics {
    pub strategy: DelegationStrategy,
    pub script: Script,
    pub counters: BTreeMap<Participant, Counters>,
    pub report: VerificationReport,
}

impl ScenarioMetrics {
    pub fn sent_by(&self, participant: Participant) -> Counters {
        self.counters.get(&participant).copied().unwrap_or_default()
    }

    pub fn rows(&self) -> Vec<MetricsRow> {
        self.counters
            .iter()
            .map(|(p, c)| MetricsRow {
                strategy: self.strategy.to_string(),
                participant: p.to_string(),
                messages: c.messages_sent,
                bytes: c.bytes_sent,
                fragments: c.fragments_sent,
                verdict: self.report.verdict.to_string(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub strategy: String,
    pub participant: String,
    pub messages: u64,
    pub bytes: u64,
    pub fragments: u64,
    pub verdict: String,
}

pub fn write_metrics_csv(path: &Path, metrics: &[ScenarioMetrics]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in metrics.iter().flat_map(ScenarioMetrics::rows) {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct PresentationRequest {
    #[serde(with = "crate::model::bytes")]
    challenge: Vec<u8>,
    audience: Did,
    kinds: Vec<CredentialKind>,
}

const EDGE_FRAGMENT: &str = "edge-1";

struct Sim {
    world: FixtureWorld,
    registry: Arc<MemoryRegistry>,
    engine: Lifecycle,
    links: LinkPlan,
    clock: Timestamp,
    seq: u64,
    counters: BTreeMap<Participant, Counters>,
    /// Edge key published in the device's document by its controller.
    edge_for_device: Signer,
    cache: EdgeCache,
}

impl Sim {
    fn new(links: LinkPlan, clock: Timestamp) -> Result<Self, AgentError> {
        let world = FixtureWorld::new();
        let registry = Arc::new(MemoryRegistry::new());
        world.register_all(registry.as_ref())?;

        let device = world.device.did();
        let edge_method = device.with_fragment(EDGE_FRAGMENT)?;
        let mut doc = world.device.document();
        doc.verification_methods
            .push(VerificationMethod::ed25519(edge_method.clone(), world.edge.keys()));
        doc.authentication.push(edge_method.clone());
        let proof = sign_document(&doc, &world.owner.signer, crate::fixtures::fixture_issued_at());
        registry.register_did_document(doc, &proof)?;

        let corpus = build_fixture_corpus(&world);
        world.publish_statuses(registry.as_ref(), corpus.iter().map(|(_, vc)| vc))?;
        let store = Arc::new(MemoryStore::new());
        for (_, vc) in corpus {
            store.put(vc).map_err(AgentError::Malformed)?;
        }
        let engine = Lifecycle::new(registry.clone(), store);
        let counters = Participant::ALL.iter().map(|&p| (p, Counters::default())).collect();
        Ok(Self {
            edge_for_device: Signer::new(edge_method, world.edge.keys().clone()),
            world,
            registry,
            engine,
            links,
            clock,
            seq: 0,
            counters,
            cache: EdgeCache::new(24 * 3600),
        })
    }

    fn credential(&self, kind: CredentialKind) -> VerifiableCredential {
        self.engine
            .store()
            .all()
            .into_iter()
            .find(|vc| vc.kind() == Some(kind))
            .expect("corpus holds every kind")
    }

    fn signer(&self, p: Participant) -> &Signer {
        let w = &self.world;
        match p {
            Participant::Device => &w.device.signer,
            Participant::Edge => &w.edge.signer,
            Participant::Owner => &w.owner.signer,
            Participant::Verifier => &w.verifier.signer,
            Participant::ServiceProvider => &w.service_provider.signer,
            Participant::Buyer => &w.buyer.signer,
            Participant::Manufacturer => &w.manufacturer.signer,
            Participant::Registry => unreachable!("the registry holds no keys"),
        }
    }

    fn did(&self, p: Participant) -> Did {
        self.signer(p).did().clone()
    }

    /// Key that signs presentations about the device under `strategy`.
    fn presenter(&self, strategy: DelegationStrategy) -> &Signer {
        match strategy {
            DelegationStrategy::Autonomous => &self.world.device.signer,
            DelegationStrategy::EdgeProxy => &self.edge_for_device,
            DelegationStrategy::OwnerWallet => &self.world.owner.signer,
        }
    }

    fn next_bytes(&mut self, label: &str) -> [u8; 32] {
        self.seq += 1;
        Sha256::digest(format!("iotssi scenario/{label}/{}", self.seq).as_bytes()).into()
    }

    fn record(&mut self, from: Participant, to: Participant, len: usize) {
        let link = if from == Participant::Device || to == Participant::Device {
            &self.links.device
        } else {
            &self.links.backhaul
        };
        let sent = transmit(link, len as u64);
        let c = self.counters.entry(from).or_default();
        c.messages_sent += 1;
        c.payload_bytes += len as u64;
        c.bytes_sent += sent.bytes;
        c.fragments_sent += sent.fragments;
    }

    /// Seal, account, deliver and open one message.
    fn send(&mut self, from: Participant, to: Participant, payload: &[u8]) -> Result<Vec<u8>, AgentError> {
        let nonce: [u8; NONCE_LEN] = self.next_bytes("nonce")[..NONCE_LEN].try_into().expect("12 bytes");
        let recipient = self.registry.resolve(&self.did(to))?;
        let envelope = seal(self.signer(from), &recipient, payload, nonce, self.clock)?;
        let wire = encode_binary(&envelope);
        self.record(from, to, wire.len());
        let (_, opened) = receive(&wire, self.signer(to), self.registry.as_ref())?;
        Ok(opened)
    }

    fn query(&mut self, who: Participant, request: &[u8], response: &[u8]) {
        self.record(who, Participant::Registry, request.len());
        self.record(Participant::Registry, who, response.len());
    }

    fn fetch_status(&mut self, who: Participant, id: &str) -> Result<(), AgentError> {
        let record = self.registry.check_status(id)?;
        self.query(who, id.as_bytes(), &encode_binary(&record));
        Ok(())
    }

    fn fetch_document(&mut self, who: Participant, did: &Did) -> Result<(), AgentError> {
        let doc = self.registry.resolve(did)?;
        self.query(who, did.to_string().as_bytes(), &encode_binary(&doc));
        Ok(())
    }

    /// Registry traffic a verifier needs for `vp`. Status comes from the
    /// edge cache when the edge verifies.
    fn lookups(&mut self, who: Participant, vp: &VerifiablePresentation) -> Result<(), AgentError> {
        let mut dids = vec![vp.holder.clone()];
        if let Some(controller) = self.registry.resolve(&vp.holder)?.controller.clone() {
            dids.push(controller);
        }
        for vc in &vp.verifiable_credential {
            dids.extend(vc.proofs.iter().map(|p| p.signer().clone()));
            let schema = self.registry.schema(&vc.credential_schema.id)?;
            self.query(who, vc.credential_schema.id.as_bytes(), &encode_binary(&schema));
            if who != Participant::Edge {
                self.fetch_status(who, &vc.credential_status.id)?;
            }
        }
        dids.sort();
        dids.dedup();
        for did in dids {
            self.fetch_document(who, &did)?;
        }
        Ok(())
    }

    fn request(
        &mut self,
        from: Participant,
        to: Participant,
        audience: Did,
        kinds: Vec<CredentialKind>,
    ) -> Result<Vec<u8>, AgentError> {
        let challenge = self.next_bytes("challenge")[..16].to_vec();
        let request = PresentationRequest {
            challenge: challenge.clone(),
            audience,
            kinds,
        };
        self.send(from, to, &encode_binary(&request))?;
        Ok(challenge)
    }

    /// Edge asks the device to approve acting on its behalf.
    fn consent(&mut self, strategy: DelegationStrategy, what: &[u8]) -> Result<(), AgentError> {
        if strategy == DelegationStrategy::EdgeProxy {
            let digest = Sha256::digest(what);
            self.send(Participant::Edge, Participant::Device, &digest[..16])?;
            self.send(Participant::Device, Participant::Edge, &digest[..8])?;
        }
        Ok(())
    }

    fn present(
        &mut self,
        strategy: DelegationStrategy,
        to: Participant,
        credentials: Vec<VerifiableCredential>,
        challenge: &[u8],
    ) -> Result<VerifiablePresentation, AgentError> {
        let holder = self.world.device.did().clone();
        match strategy {
            DelegationStrategy::Autonomous | DelegationStrategy::OwnerWallet => {
                for vc in &credentials {
                    self.fetch_status(strategy.agent(), &vc.credential_status.id)?;
                }
            }
            DelegationStrategy::EdgeProxy => {}
        }
        let vp = sign_presentation(
            credentials,
            holder,
            self.presenter(strategy),
            challenge,
            self.did(to),
            self.clock,
        )?;
        let delivered = self.send(strategy.agent(), to, &encode_binary(&vp))?;
        decode_binary(&delivered).map_err(|e| AgentError::Malformed(e.to_string()))
    }

    fn verify_as(
        &mut self,
        who: Participant,
        vp: &VerifiablePresentation,
        challenge: &[u8],
    ) -> Result<VerificationReport, AgentError> {
        self.lookups(who, vp)?;
        let audience = match who {
            Participant::Edge | Participant::Owner => self.world.device.did().clone(),
            other => self.did(other),
        };
        Ok(if who == Participant::Edge {
            verify_presentation(
                vp,
                challenge,
                &audience,
                self.clock,
                &self.cache.view(self.registry.as_ref()),
            )
        } else {
            verify_presentation(vp, challenge, &audience, self.clock, self.registry.as_ref())
        })
    }

    fn sync_edge(&mut self) -> Result<(), AgentError> {
        let ids: Vec<String> = self.engine.store().all().into_iter().map(|vc| vc.id).collect();
        for id in ids {
            let record = self.registry.check_status(&id)?;
            self.query(Participant::Edge, id.as_bytes(), &encode_binary(&record));
            self.cache.track(&id, self.registry.as_ref(), self.clock)?;
        }
        Ok(())
    }

    fn present_identity(&mut self, strategy: DelegationStrategy) -> Result<VerificationReport, AgentError> {
        let verifier = self.did(Participant::Verifier);
        let challenge = self.request(
            Participant::Verifier,
            strategy.agent(),
            verifier,
            vec![CredentialKind::StaticIdentity],
        )?;
        self.consent(strategy, &challenge)?;
        let identity = self.credential(CredentialKind::StaticIdentity);
        let vp = self.present(strategy, Participant::Verifier, vec![identity], &challenge)?;
        self.verify_as(Participant::Verifier, &vp, &challenge)
    }

    fn onboard_device(&mut self, strategy: DelegationStrategy) -> Result<VerificationReport, AgentError> {
        let agent = strategy.agent();
        let device = self.world.device.did().clone();
        let provider = self.did(Participant::ServiceProvider);
        let onboarding = self.credential(CredentialKind::Onboarding);

        let to_provider = self.request(
            agent,
            Participant::ServiceProvider,
            device.clone(),
            vec![CredentialKind::Onboarding],
        )?;
        let provider_vp = sign_presentation(
            vec![onboarding.clone()],
            provider.clone(),
            &self.world.service_provider.signer,
            &to_provider,
            device,
            self.clock,
        )?;
        let delivered = self.send(Participant::ServiceProvider, agent, &encode_binary(&provider_vp))?;
        let provider_vp: VerifiablePresentation =
            decode_binary(&delivered).map_err(|e| AgentError::Malformed(e.to_string()))?;
        let inbound = self.verify_as(agent, &provider_vp, &to_provider)?;

        let to_device = self.request(
            Participant::ServiceProvider,
            agent,
            provider,
            vec![CredentialKind::StaticIdentity, CredentialKind::Onboarding],
        )?;
        self.consent(strategy, &to_device)?;
        let identity = self.credential(CredentialKind::StaticIdentity);
        let device_vp = self.present(
            strategy,
            Participant::ServiceProvider,
            vec![identity, onboarding],
            &to_device,
        )?;
        let outbound = self.verify_as(Participant::ServiceProvider, &device_vp, &to_device)?;
        if agent != Participant::Device && inbound.accepted() && outbound.accepted() {
            self.send(agent, Participant::Device, b"onboarded")?;
        }
        Ok(merge(inbound, outbound))
    }

    fn transfer_ownership(&mut self, strategy: DelegationStrategy) -> Result<VerificationReport, AgentError> {
        let agent = strategy.agent();
        let buyer = self.did(Participant::Buyer);
        let challenge = self.request(
            Participant::Buyer,
            agent,
            buyer.clone(),
            vec![CredentialKind::Ownership],
        )?;
        self.consent(strategy, &challenge)?;
        let current = self.credential(CredentialKind::Ownership);
        let vp = self.present(strategy, Participant::Buyer, vec![current.clone()], &challenge)?;
        let proof_of_ownership = self.verify_as(Participant::Buyer, &vp, &challenge)?;

        let mut request = TransferRequest::new(&current, buyer, self.clock)?;
        request.seller_proof = Some(request.sign(&current, &self.world.owner.signer)?);
        let delivered = self.send(Participant::Owner, Participant::Buyer, &encode_binary(&request))?;
        let mut request: TransferRequest =
            decode_binary(&delivered).map_err(|e| AgentError::Malformed(e.to_string()))?;
        request.buyer_proof = Some(request.sign(&current, &self.world.buyer.signer)?);
        let delivered = self.send(Participant::Buyer, Participant::Manufacturer, &encode_binary(&request))?;
        let request: TransferRequest = decode_binary(&delivered).map_err(|e| AgentError::Malformed(e.to_string()))?;

        let manufacturer = Issuer::new(IssuerKind::Manufacturer, self.world.manufacturer.signer.clone());
        let next = self.engine.transfer_ownership(&request, &manufacturer)?;
        for change in [
            StatusChange::revoke(current.id.as_str(), self.clock, None),
            StatusChange::activate(next.id.as_str(), self.clock),
        ] {
            let proof = change.sign(&self.world.manufacturer.signer);
            let record = self.registry.check_status(&change.credential_id)?;
            self.query(
                Participant::Manufacturer,
                &encode_binary(&(change, proof)),
                &encode_binary(&record),
            );
        }
        self.send(Participant::Manufacturer, Participant::Buyer, &encode_binary(&next))?;
        if agent != Participant::Owner {
            self.send(Participant::Manufacturer, agent, &encode_binary(&next))?;
        }
        for proof in &next.proofs {
            self.fetch_document(Participant::Buyer, proof.signer())?;
        }
        self.fetch_status(Participant::Buyer, &next.id)?;
        let issued = verify_credential(&next, self.clock, self.registry.as_ref());
        Ok(merge(proof_of_ownership, issued))
    }
}

fn merge(a: VerificationReport, b: VerificationReport) -> VerificationReport {
    VerificationReport::from_checks(a.checks.into_iter().chain(b.checks).collect())
}

/// Run `script` in a fresh fixture world with the device's credentials
/// managed under `strategy`.
pub fn run_scenario(
    strategy: DelegationStrategy,
    script: Script,
    links: &LinkPlan,
    clock: Timestamp,
) -> Result<ScenarioMetrics, AgentError> {
    let mut sim = Sim::new(links.clone(), clock)?;
    if strategy == DelegationStrategy::EdgeProxy {
        sim.sync_edge()?;
    }
    let report = match script {
        Script::PresentIdentity => sim.present_identity(strategy)?,
        Script::OnboardDevice => sim.onboard_device(strategy)?,
        Script::TransferOwnership => sim.transfer_ownership(strategy)?,
    };
    Ok(ScenarioMetrics {
        strategy,
        script,
        counters: sim.counters,
        report,
    })
}
