// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context as _;
use iotssi::agents::{
    load_link_profiles, run_scenario, write_metrics_csv, DelegationStrategy, LinkPlan, LinkProfile, Script,
};
use iotssi::codec::{encode_canonical_text, size_report as measure};
use iotssi::fixtures::{build_fixture_corpus, sign_document, FixtureWorld, AGREEMENT_FRAGMENT, SIGNING_FRAGMENT};
use iotssi::lifecycle::{
    verify_credential, verify_presentation, DirectoryStore, IssueRequest, Issuer, Lifecycle, LifecycleState,
    TransferRequest, VerificationReport,
};
use iotssi::model::{
    build_did_document, sign_presentation, Did, DidDocument, ServiceEndpoint, Timestamp, VerifiableCredential,
    VerifiablePresentation, VerificationMethod,
};
use iotssi::policy::{
    enumerate_admissible_with, issuer_region, kind_rule, policy_table, IssuerKind, MatrixPoint, PolicyRule,
};
use iotssi::registry::{CredentialState, FileRegistry, Registry};
use iotssi::schemas::{CredentialKind, CredentialSubject, ValidityWindow};
use serde::Serialize;

use crate::output::{
    parse_hex, parse_seed, read_canonical, read_key, table, write_canonical, Failure, KeyFile, Outcome, Output,
};
use crate::{Context, KeyArgs};

const REJECT: u8 = 3;

struct Backend {
    registry: Arc<FileRegistry>,
    lifecycle: Lifecycle,
}

fn open(ctx: &Context) -> anyhow::Result<Backend> {
    let registry = Arc::new(FileRegistry::open(&ctx.registry)?);
    let store = DirectoryStore::open(ctx.registry.join("credentials"))
        .with_context(|| format!("opening credential store under {}", ctx.registry.display()))?;
    let lifecycle = Lifecycle::new(registry.clone(), Arc::new(store));
    Ok(Backend { registry, lifecycle })
}

/// Serialized label of a unit enum value.
fn label<T: Serialize>(value: &T) -> String {
    String::from_utf8(encode_canonical_text(value))
        .expect("canonical text is UTF-8")
        .trim_matches('"')
        .to_owned()
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_out<T: Serialize + ?Sized>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    match out {
        Some(path) => write_canonical(path, value),
        None => Ok(()),
    }
}

fn render_doc(doc: &DidDocument) -> String {
    let mut s = format!("id: {}\n", doc.id);
    if let Some(controller) = &doc.controller {
        let _ = writeln!(s, "controller: {controller}");
    }
    for m in &doc.verification_methods {
        let _ = writeln!(
            s,
            "verificationMethod: {} {} {}",
            m.id,
            label(&m.key_type),
            bs58::encode(&m.public_key).into_string()
        );
    }
    let _ = writeln!(s, "authentication: {}", join(&doc.authentication));
    if !doc.key_agreement.is_empty() {
        let _ = writeln!(s, "keyAgreement: {}", join(&doc.key_agreement));
    }
    for svc in &doc.services {
        let _ = writeln!(s, "service: {} {} {}", svc.id, svc.service_type, svc.endpoint);
    }
    s
}

fn render_vc(vc: &VerifiableCredential) -> String {
    let kind = vc.kind().map_or_else(|| "unknown".to_owned(), |k| k.to_string());
    let m = &vc.design_matrix;
    let mut s = format!(
        "id: {}\nkind: {kind}\nissuer: {}\nsubject: {}\n",
        vc.id,
        vc.issuer,
        vc.subject_did()
    );
    let _ = writeln!(s, "validFrom: {}", vc.valid_from);
    let _ = writeln!(
        s,
        "validUntil: {}",
        vc.valid_until.map_or_else(|| "-".to_owned(), |t| t.to_string())
    );
    let _ = writeln!(
        s,
        "matrix: {} {} {} {}{}",
        m.issuer_kind,
        m.point.trust,
        m.point.scope,
        m.point.validity,
        if m.trusted_hardware { " trusted-hardware" } else { "" }
    );
    for p in &vc.proofs {
        let _ = writeln!(s, "proof: {} {}", p.verification_method, p.created);
    }
    s
}

fn report_outcome(report: VerificationReport) -> Outcome {
    let code = if report.accepted() { 0 } else { REJECT };
    Outcome {
        output: Output::new(&report, report.to_string()),
        code,
    }
}

pub fn keygen(seed: &str, did: Option<Did>, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let keys = parse_seed(seed)?;
    let file = KeyFile::new(&keys, did);
    write_out(out, &file)?;
    let mut s = String::new();
    if let Some(did) = &file.did {
        let _ = writeln!(s, "did: {did}");
        let _ = writeln!(s, "signing: {did}#{SIGNING_FRAGMENT}");
        let _ = writeln!(s, "agreement: {did}#{AGREEMENT_FRAGMENT}");
    }
    let _ = writeln!(s, "publicKeyBase58: {}", file.public_key_base58);
    let _ = writeln!(s, "agreementPublicKeyBase58: {}", file.agreement_public_key_base58);
    Ok(Outcome::ok(Output::new(&file, s)))
}

fn parse_service(did: &Did, spec: &str) -> anyhow::Result<ServiceEndpoint> {
    let parts: Vec<&str> = spec.splitn(3, ',').collect();
    let [fragment, service_type, endpoint] = parts[..] else {
        return Err(Failure::Malformed(format!("service {spec:?} is not fragment,type,endpoint")).into());
    };
    Ok(ServiceEndpoint {
        id: did.with_fragment(fragment)?,
        service_type: service_type.to_owned(),
        endpoint: endpoint.to_owned(),
    })
}

pub fn did_create(
    ctx: &Context,
    key: &KeyArgs,
    controller: Option<Did>,
    controller_key: Option<&Path>,
    services: &[String],
    out: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let (file, own_signer) = read_key(key)?;
    let did = file.did()?.clone();
    let keys = file.keys()?;
    let methods = vec![
        VerificationMethod::ed25519(did.with_fragment(SIGNING_FRAGMENT)?, &keys),
        VerificationMethod::x25519(did.with_fragment(AGREEMENT_FRAGMENT)?, &keys),
    ];
    let services = services
        .iter()
        .map(|s| parse_service(&did, s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let signer = match (&controller, controller_key) {
        (Some(_), Some(path)) => {
            read_key(&KeyArgs {
                key: path.to_path_buf(),
                method: None,
            })?
            .1
        }
        (Some(_), None) => return Err(Failure::Malformed("--controller needs --controller-key".into()).into()),
        (None, _) => own_signer,
    };
    let doc = build_did_document(did, controller, methods, services)?;
    let backend = open(ctx)?;
    let proof = sign_document(&doc, &signer, ctx.clock);
    backend.registry.register_did_document(doc.clone(), &proof)?;
    write_out(out, &doc)?;
    Ok(Outcome::ok(Output::new(&doc, render_doc(&doc))))
}

pub fn did_resolve(ctx: &Context, did: &Did) -> anyhow::Result<Outcome> {
    let doc = open(ctx)?.registry.resolve(did)?;
    Ok(Outcome::ok(Output::new(&doc, render_doc(&doc))))
}

pub fn did_update(ctx: &Context, document: &Path, key: &KeyArgs) -> anyhow::Result<Outcome> {
    let doc: DidDocument = read_canonical(document)?;
    let (_, signer) = read_key(key)?;
    let backend = open(ctx)?;
    let proof = sign_document(&doc, &signer, ctx.clock);
    backend.registry.register_did_document(doc.clone(), &proof)?;
    Ok(Outcome::ok(Output::new(&doc, render_doc(&doc))))
}

pub struct IssueArgs {
    pub kind: CredentialKind,
    pub issuer_kind: IssuerKind,
    pub point: MatrixPoint,
    pub subject: PathBuf,
    pub valid_until: Option<Timestamp>,
    pub trusted_hardware: bool,
}

pub fn vc_issue(ctx: &Context, args: IssueArgs, key: &KeyArgs, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let (_, signer) = read_key(key)?;
    let subject: CredentialSubject = read_canonical(&args.subject)?;
    let backend = open(ctx)?;
    let request = IssueRequest {
        kind: args.kind,
        subject,
        point: args.point,
        window: ValidityWindow::new(ctx.clock, args.valid_until),
        trusted_hardware: args.trusted_hardware,
    };
    let vc = backend
        .lifecycle
        .issue(&Issuer::new(args.issuer_kind, signer), request, ctx.clock)?;
    write_out(out, &vc)?;
    Ok(Outcome::ok(Output::new(&vc, render_vc(&vc))))
}

fn load_credential(backend: &Backend, target: &str) -> anyhow::Result<VerifiableCredential> {
    let path = Path::new(target);
    if path.is_file() {
        return read_canonical(path);
    }
    Ok(backend.lifecycle.credential(target)?)
}

pub fn vc_verify(ctx: &Context, target: &str) -> anyhow::Result<Outcome> {
    let backend = open(ctx)?;
    let vc = load_credential(&backend, target)?;
    Ok(report_outcome(verify_credential(
        &vc,
        ctx.clock,
        backend.registry.as_ref(),
    )))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StatusView {
    id: String,
    state: LifecycleState,
    issuer: Did,
    #[serde(skip_serializing_if = "Option::is_none")]
    revoked_at: Option<Timestamp>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

fn status_outcome(ctx: &Context, backend: &Backend, id: &str) -> anyhow::Result<Outcome> {
    let record = backend.registry.check_status(id)?;
    let state = match backend.lifecycle.state_of(id, ctx.clock) {
        Ok(state) => state,
        Err(_) if record.state == CredentialState::Revoked => LifecycleState::Revoked,
        Err(_) => LifecycleState::Active,
    };
    let view = StatusView {
        id: id.to_owned(),
        state,
        issuer: record.issuer,
        revoked_at: record.revoked_at,
        reason: record.reason,
    };
    let mut s = format!("id: {}\nstate: {}\nissuer: {}\n", view.id, view.state, view.issuer);
    if let Some(at) = view.revoked_at {
        let _ = writeln!(s, "revokedAt: {at}");
    }
    if let Some(reason) = &view.reason {
        let _ = writeln!(s, "reason: {reason}");
    }
    Ok(Outcome::ok(Output::new(&view, s)))
}

pub fn vc_status(ctx: &Context, id: &str) -> anyhow::Result<Outcome> {
    status_outcome(ctx, &open(ctx)?, id)
}

pub fn vc_revoke(ctx: &Context, id: &str, key: &KeyArgs, reason: Option<String>) -> anyhow::Result<Outcome> {
    let (_, signer) = read_key(key)?;
    let backend = open(ctx)?;
    backend.lifecycle.revoke(id, &signer, ctx.clock, reason)?;
    status_outcome(ctx, &backend, id)
}

fn render_request(req: &TransferRequest) -> String {
    let signed = |p: &Option<_>| if p.is_some() { "signed" } else { "missing" };
    format!(
        "current: {}\ndevice: {}\nseller: {}\nbuyer: {}\nat: {}\nsellerProof: {}\nbuyerProof: {}\n",
        req.current_ownership_vc_id,
        req.device,
        req.seller,
        req.buyer,
        req.at,
        signed(&req.seller_proof),
        signed(&req.buyer_proof),
    )
}

pub fn vc_transfer_sign(
    ctx: &Context,
    credential: Option<String>,
    buyer: Option<Did>,
    request: Option<&Path>,
    key: &KeyArgs,
    out: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let (_, signer) = read_key(key)?;
    let backend = open(ctx)?;
    let (mut req, current) = match (credential, buyer, request) {
        (Some(id), Some(buyer), None) => {
            let current = backend.lifecycle.credential(&id)?;
            (TransferRequest::new(&current, buyer, ctx.clock)?, current)
        }
        (None, _, Some(path)) => {
            let req: TransferRequest = read_canonical(path)?;
            let current = backend.lifecycle.credential(&req.current_ownership_vc_id)?;
            (req, current)
        }
        _ => return Err(Failure::Malformed("give --credential with --buyer, or --request".into()).into()),
    };
    let proof = Some(req.sign(&current, &signer)?);
    if signer.did() == &req.seller {
        req.seller_proof = proof;
    } else if signer.did() == &req.buyer {
        req.buyer_proof = proof;
    } else {
        return Err(Failure::Malformed(format!("{} is neither seller nor buyer", signer.did())).into());
    }
    write_out(out, &req)?;
    Ok(Outcome::ok(Output::new(&req, render_request(&req))))
}

pub fn vc_transfer(ctx: &Context, request: &Path, key: &KeyArgs, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let req: TransferRequest = read_canonical(request)?;
    let (_, signer) = read_key(key)?;
    let backend = open(ctx)?;
    let vc = backend
        .lifecycle
        .transfer_ownership(&req, &Issuer::new(IssuerKind::Manufacturer, signer))?;
    write_out(out, &vc)?;
    Ok(Outcome::ok(Output::new(&vc, render_vc(&vc))))
}

pub fn vp_create(
    ctx: &Context,
    ids: &[String],
    holder: Did,
    challenge: &str,
    audience: Did,
    key: &KeyArgs,
    out: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let challenge = parse_hex("challenge", challenge)?;
    let (_, signer) = read_key(key)?;
    let backend = open(ctx)?;
    let credentials = ids
        .iter()
        .map(|id| load_credential(&backend, id))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let vp = sign_presentation(credentials, holder, &signer, &challenge, audience, ctx.clock)?;
    write_out(out, &vp)?;
    let mut s = format!("id: {}\nholder: {}\naudience: {}\n", vp.id, vp.holder, vp.audience);
    let _ = writeln!(s, "challenge: {}", hex::encode(&vp.challenge));
    for vc in &vp.verifiable_credential {
        let _ = writeln!(s, "credential: {}", vc.id);
    }
    if let Some(proof) = &vp.proof {
        let _ = writeln!(s, "proof: {} {}", proof.verification_method, proof.created);
    }
    Ok(Outcome::ok(Output::new(&vp, s)))
}

pub fn vp_verify(ctx: &Context, presentation: &Path, challenge: &str, audience: &Did) -> anyhow::Result<Outcome> {
    let challenge = parse_hex("challenge", challenge)?;
    let vp: VerifiablePresentation = read_canonical(presentation)?;
    let backend = open(ctx)?;
    Ok(report_outcome(verify_presentation(
        &vp,
        &challenge,
        audience,
        ctx.clock,
        backend.registry.as_ref(),
    )))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RuleView {
    rule: PolicyRule,
    summary: &'static str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Explanation {
    kind: CredentialKind,
    rule: iotssi::policy::KindRule,
    rules: Vec<RuleView>,
    regions: Vec<iotssi::policy::IssuerRegion>,
    admissible_cells: usize,
}

pub fn policy_explain(kind: CredentialKind) -> Outcome {
    let rule = kind_rule(kind);
    let regions: Vec<_> = rule.issuers.iter().map(|&i| issuer_region(i)).collect();
    let mut rules = vec![PolicyRule::for_kind(kind)];
    rules.extend(rule.issuers.iter().map(|&i| PolicyRule::for_issuer(i)));
    let cells = enumerate_admissible_with(kind, false).len();

    let mut s = format!("kind: {kind} ({})\n", kind.type_tag());
    let _ = writeln!(s, "issuers: {}", join(&rule.issuers));
    let plain = rule.trust.labels(false);
    let hardware = rule.trust.labels(true);
    let _ = writeln!(s, "trust: {}", join(&plain));
    if hardware != plain {
        let extra: BTreeSet<_> = hardware.difference(&plain).collect();
        let _ = writeln!(s, "trust with trusted hardware: also {}", join(extra));
    }
    let _ = writeln!(s, "scopes: {}", join(&rule.scopes));
    let _ = writeln!(s, "validities: {}", join(&rule.validities));
    for region in &regions {
        let _ = writeln!(
            s,
            "region {}: trust {}; scopes {}; validities {}",
            region.issuer,
            join(region.trust.labels()),
            join(&region.scopes),
            join(&region.validities)
        );
    }
    for r in &rules {
        let _ = writeln!(s, "rule {r}: {}", r.summary());
    }
    let _ = writeln!(s, "admissible cells: {cells}");

    let explanation = Explanation {
        kind,
        rule,
        rules: rules
            .into_iter()
            .map(|rule| RuleView {
                rule,
                summary: rule.summary(),
            })
            .collect(),
        regions,
        admissible_cells: cells,
    };
    Outcome::ok(Output::new(&explanation, s))
}

#[derive(Serialize)]
struct Cell {
    issuer: IssuerKind,
    #[serde(flatten)]
    point: MatrixPoint,
}

pub fn policy_export(out: Option<&Path>) -> anyhow::Result<Outcome> {
    let table = policy_table();
    write_out(out, &table)?;
    let mut s = String::new();
    for rule in PolicyRule::ALL {
        let _ = writeln!(s, "{rule}: {}", rule.summary());
    }
    Ok(Outcome::ok(Output::new(&table, s)))
}

pub fn policy_enumerate(kind: CredentialKind, trusted_hardware: bool) -> Outcome {
    let cells: Vec<Cell> = enumerate_admissible_with(kind, trusted_hardware)
        .into_iter()
        .map(|(issuer, point)| Cell { issuer, point })
        .collect();
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.issuer.to_string(),
                c.point.trust.to_string(),
                c.point.scope.to_string(),
                c.point.validity.to_string(),
            ]
        })
        .collect();
    let mut s = table(&["issuer", "trust", "scope", "validity"], &rows);
    let _ = writeln!(s, "{} admissible cells", cells.len());
    Outcome::ok(Output::new(&cells, s))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SizeRow {
    name: String,
    text_bytes: usize,
    binary_bytes: usize,
}

pub fn size_report(ctx: &Context, corpus: bool) -> anyhow::Result<Outcome> {
    let entries: Vec<(String, VerifiableCredential)> = if corpus {
        build_fixture_corpus(&FixtureWorld::new())
    } else {
        open(ctx)?
            .lifecycle
            .store()
            .all()
            .into_iter()
            .map(|vc| (vc.id.clone(), vc))
            .collect()
    };
    let sizes: Vec<SizeRow> = entries
        .iter()
        .map(|(name, vc)| {
            let r = measure(vc);
            SizeRow {
                name: name.clone(),
                text_bytes: r.text_bytes,
                binary_bytes: r.binary_bytes,
            }
        })
        .collect();
    let rows: Vec<Vec<String>> = sizes
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                r.text_bytes.to_string(),
                r.binary_bytes.to_string(),
                format!("{:.2}", r.text_bytes as f64 / r.binary_bytes as f64),
            ]
        })
        .collect();
    let s = table(&["name", "text", "binary", "ratio"], &rows);
    Ok(Outcome::ok(Output::new(&sizes, s)))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ScenarioView {
    strategy: DelegationStrategy,
    script: Script,
    device_link: String,
    backhaul_link: String,
    rows: Vec<iotssi::agents::MetricsRow>,
    report: VerificationReport,
}

pub fn scenario_run(
    ctx: &Context,
    strategy: DelegationStrategy,
    script: Script,
    link: &str,
    backhaul: &str,
    links: Option<&Path>,
    csv: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let mut profiles = LinkProfile::defaults();
    if let Some(path) = links {
        let text = fs::read_to_string(path).map_err(|e| Failure::NotFound(format!("{}: {e}", path.display())))?;
        profiles.extend(load_link_profiles(&text)?);
    }
    let plan = LinkPlan {
        device: LinkProfile::by_name(link, &profiles)?,
        backhaul: LinkProfile::by_name(backhaul, &profiles)?,
    };
    let metrics = run_scenario(strategy, script, &plan, ctx.clock)?;
    if let Some(path) = csv {
        write_metrics_csv(path, std::slice::from_ref(&metrics))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let rows = metrics.rows();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.participant.clone(),
                r.messages.to_string(),
                r.bytes.to_string(),
                r.fragments.to_string(),
            ]
        })
        .collect();
    let mut s = format!("strategy: {strategy}\nscript: {script}\nlinks: device {link}, backhaul {backhaul}\n");
    s += &table(&["participant", "messages", "bytes", "fragments"], &cells);
    s += &metrics.report.to_string();
    let code = if metrics.report.accepted() { 0 } else { REJECT };
    let view = ScenarioView {
        strategy,
        script,
        device_link: link.to_owned(),
        backhaul_link: backhaul.to_owned(),
        rows,
        report: metrics.report,
    };
    Ok(Outcome {
        output: Output::new(&view, s),
        code,
    })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct InstalledParty {
    role: &'static str,
    did: Did,
    key_file: String,
}

pub fn fixtures_install(ctx: &Context, keys: &Path) -> anyhow::Result<Outcome> {
    let world = FixtureWorld::new();
    let backend = open(ctx)?;
    world.register_all(backend.registry.as_ref())?;
    let corpus = build_fixture_corpus(&world);
    for (_, vc) in &corpus {
        backend
            .lifecycle
            .store()
            .put(vc.clone())
            .map_err(|e| anyhow::anyhow!("credential store: {e}"))?;
    }
    world.publish_statuses(backend.registry.as_ref(), corpus.iter().map(|(_, vc)| vc))?;

    fs::create_dir_all(keys).with_context(|| format!("creating {}", keys.display()))?;
    let parties = [
        ("manufacturer", &world.manufacturer),
        ("service-provider", &world.service_provider),
        ("regulator", &world.regulator),
        ("owner", &world.owner),
        ("buyer", &world.buyer),
        ("edge", &world.edge),
        ("verifier", &world.verifier),
        ("device", &world.device),
    ];
    let mut installed = Vec::new();
    for (role, party) in parties {
        let key_file = format!("{role}.json");
        write_canonical(
            &keys.join(&key_file),
            &KeyFile::new(party.keys(), Some(party.did().clone())),
        )?;
        installed.push(InstalledParty {
            role,
            did: party.did().clone(),
            key_file,
        });
    }
    let mut rows: Vec<Vec<String>> = installed
        .iter()
        .map(|p| vec![p.role.to_owned(), p.did.to_string(), p.key_file.clone()])
        .collect();
    let mut s = table(&["role", "did", "key"], &rows);
    rows = corpus
        .iter()
        .map(|(name, vc)| vec![name.clone(), vc.id.clone()])
        .collect();
    s += &table(&["credential", "id"], &rows);
    Ok(Outcome::ok(Output::new(&installed, s)))
}
