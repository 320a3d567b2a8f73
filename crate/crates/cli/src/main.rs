// SPDX-License-Identifier: Apache-2.0

//! `iotssi`: keys, DID documents, credentials, presentations, policy
//! exploration, size reports and agent scenarios over a file-backed registry.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iotssi::agents::{AgentError, DelegationStrategy, Script};
use iotssi::codec::CodecError;
use iotssi::lifecycle::LifecycleError;
use iotssi::model::{Did, DidUrl, ModelError, Timestamp};
use iotssi::policy::{IssuerKind, Scope, TrustLevel, Validity};
use iotssi::registry::RegistryError;
use iotssi::schemas::CredentialKind;

use output::Failure;

#[derive(Parser, Debug)]
#[command(name = "iotssi", version, about = "Self-sovereign identity toolkit for IoT devices")]
struct Cli {
    /// Registry directory; created on first use.
    #[arg(long, global = true, env = "IOTSSI_REGISTRY", default_value = "iotssi-registry")]
    registry: PathBuf,
    /// Fixed current time (RFC 3339). Defaults to the system clock.
    #[arg(long, global = true)]
    clock: Option<Timestamp>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    CanonicalText,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive key material from a 32-byte hex seed.
    Keygen {
        /// 64 hex digits.
        #[arg(long)]
        seed: String,
        /// DID the keys will be published under.
        #[arg(long)]
        did: Option<Did>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Register, resolve and update DID documents.
    #[command(subcommand)]
    Did(DidCommand),
    /// Issue, verify, revoke and transfer credentials.
    #[command(subcommand)]
    Vc(VcCommand),
    /// Create and verify presentations.
    #[command(subcommand)]
    Vp(VpCommand),
    /// Inspect the design-matrix policy.
    #[command(subcommand)]
    Policy(PolicyCommand),
    /// Encoding size accounting.
    #[command(subcommand)]
    Size(SizeCommand),
    /// Simulated delegation scenarios over constrained links.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Args, Debug, Clone)]
pub struct KeyArgs {
    /// Key file written by `keygen`.
    #[arg(long)]
    key: PathBuf,
    /// Verification method to sign under; defaults to `<did>#key-1`.
    #[arg(long)]
    method: Option<DidUrl>,
}

#[derive(Subcommand, Debug)]
enum DidCommand {
    /// Build, sign and register a document for the key file's DID.
    Create {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        controller: Option<Did>,
        /// Controller's key file; required with --controller.
        #[arg(long)]
        controller_key: Option<PathBuf>,
        /// Service as `fragment,type,endpoint`. Repeatable.
        #[arg(long = "service")]
        services: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the registered document.
    Resolve { did: Did },
    /// Replace a registered document with the one in `--document`.
    Update {
        #[arg(long)]
        document: PathBuf,
        #[command(flatten)]
        key: KeyArgs,
    },
}

#[derive(Subcommand, Debug)]
enum VcCommand {
    /// Check policy, sign, register an Active status and store the credential.
    Issue {
        #[arg(long)]
        kind: CredentialKind,
        #[arg(long)]
        issuer_kind: IssuerKind,
        #[arg(long)]
        trust: TrustLevel,
        #[arg(long)]
        scope: Scope,
        #[arg(long)]
        validity: Validity,
        /// Credential subject in canonical text.
        #[arg(long)]
        subject: PathBuf,
        #[arg(long)]
        valid_until: Option<Timestamp>,
        #[arg(long)]
        trusted_hardware: bool,
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a stored credential by id, or a credential file.
    Verify { target: String },
    /// Registry status of a credential.
    Status { id: String },
    /// Revoke a credential as its issuer.
    Revoke {
        id: String,
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        reason: Option<String>,
    },
    /// Start a transfer as seller (`--credential`, `--buyer`) or countersign
    /// an existing request (`--request`).
    TransferSign {
        #[arg(long, conflicts_with = "request", requires = "buyer")]
        credential: Option<String>,
        #[arg(long)]
        buyer: Option<Did>,
        #[arg(long)]
        request: Option<PathBuf>,
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a countersigned transfer as the issuing manufacturer.
    Transfer {
        #[arg(long)]
        request: PathBuf,
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum VpCommand {
    /// Wrap stored credentials in a presentation signed by the holder.
    Create {
        #[arg(long = "credential", required = true)]
        credentials: Vec<String>,
        #[arg(long)]
        holder: Did,
        /// Hex-encoded challenge.
        #[arg(long)]
        challenge: String,
        #[arg(long)]
        audience: Did,
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a presentation file against a challenge and audience.
    Verify {
        presentation: PathBuf,
        #[arg(long)]
        challenge: String,
        #[arg(long)]
        audience: Did,
    },
}

#[derive(Subcommand, Debug)]
enum PolicyCommand {
    /// Print the kind rule and every issuer region that bears on it.
    Explain {
        #[arg(long)]
        kind: CredentialKind,
    },
    /// List every admissible (issuer, trust, scope, validity) cell.
    Enumerate {
        #[arg(long)]
        kind: CredentialKind,
        #[arg(long)]
        trusted_hardware: bool,
    },
    /// The full region and rule table as canonical text.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SizeCommand {
    /// Text and binary sizes of the stored credentials, or of the fixture
    /// corpus with `--corpus`.
    Report {
        #[arg(long)]
        corpus: bool,
    },
}

#[derive(Subcommand, Debug)]
enum ScenarioCommand {
    /// Run one script under one delegation strategy and report per-participant traffic.
    Run {
        /// autonomous, edge-proxy or owner-wallet.
        #[arg(long)]
        strategy: DelegationStrategy,
        /// present-identity, onboard-device or transfer-ownership.
        #[arg(long)]
        script: Script,
        /// Link profile for hops that touch the device.
        #[arg(long, default_value = "ble-like")]
        link: String,
        /// Link profile for every other hop.
        #[arg(long, default_value = "mqtt-like")]
        backhaul: String,
        /// TOML file with extra `[[link]]` profiles.
        #[arg(long)]
        links: Option<PathBuf>,
        /// Write the metrics rows to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum FixturesCommand {
    /// Populate the registry with the fixture parties and credential corpus,
    /// writing one key file per party into `--keys`.
    Install {
        #[arg(long)]
        keys: PathBuf,
    },
}

pub struct Context {
    pub registry: PathBuf,
    pub clock: Timestamp,
    pub format: Format,
}

fn run(cli: Cli) -> anyhow::Result<output::Outcome> {
    let ctx = Context {
        registry: cli.registry,
        clock: cli.clock.unwrap_or_else(Timestamp::now),
        format: cli.format,
    };
    match cli.command {
        Command::Keygen { seed, did, out } => commands::keygen(&seed, did, out.as_deref()),
        Command::Did(cmd) => match cmd {
            DidCommand::Create {
                key,
                controller,
                controller_key,
                services,
                out,
            } => commands::did_create(
                &ctx,
                &key,
                controller,
                controller_key.as_deref(),
                &services,
                out.as_deref(),
            ),
            DidCommand::Resolve { did } => commands::did_resolve(&ctx, &did),
            DidCommand::Update { document, key } => commands::did_update(&ctx, &document, &key),
        },
        Command::Vc(cmd) => match cmd {
            VcCommand::Issue {
                kind,
                issuer_kind,
                trust,
                scope,
                validity,
                subject,
                valid_until,
                trusted_hardware,
                key,
                out,
            } => commands::vc_issue(
                &ctx,
                commands::IssueArgs {
                    kind,
                    issuer_kind,
                    point: iotssi::policy::MatrixPoint::new(trust, scope, validity),
                    subject,
                    valid_until,
                    trusted_hardware,
                },
                &key,
                out.as_deref(),
            ),
            VcCommand::Verify { target } => commands::vc_verify(&ctx, &target),
            VcCommand::Status { id } => commands::vc_status(&ctx, &id),
            VcCommand::Revoke { id, key, reason } => commands::vc_revoke(&ctx, &id, &key, reason),
            VcCommand::TransferSign {
                credential,
                buyer,
                request,
                key,
                out,
            } => commands::vc_transfer_sign(&ctx, credential, buyer, request.as_deref(), &key, out.as_deref()),
            VcCommand::Transfer { request, key, out } => commands::vc_transfer(&ctx, &request, &key, out.as_deref()),
        },
        Command::Vp(cmd) => match cmd {
            VpCommand::Create {
                credentials,
                holder,
                challenge,
                audience,
                key,
                out,
            } => commands::vp_create(&ctx, &credentials, holder, &challenge, audience, &key, out.as_deref()),
            VpCommand::Verify {
                presentation,
                challenge,
                audience,
            } => commands::vp_verify(&ctx, &presentation, &challenge, &audience),
        },
        Command::Policy(cmd) => match cmd {
            PolicyCommand::Explain { kind } => Ok(commands::policy_explain(kind)),
            PolicyCommand::Enumerate { kind, trusted_hardware } => {
                Ok(commands::policy_enumerate(kind, trusted_hardware))
            }
            PolicyCommand::Export { out } => commands::policy_export(out.as_deref()),
        },
        Command::Size(SizeCommand::Report { corpus }) => commands::size_report(&ctx, corpus),
        Command::Scenario(ScenarioCommand::Run {
            strategy,
            script,
            link,
            backhaul,
            links,
            csv,
        }) => commands::scenario_run(
            &ctx,
            strategy,
            script,
            &link,
            &backhaul,
            links.as_deref(),
            csv.as_deref(),
        ),
        Command::Fixtures(FixturesCommand::Install { keys }) => commands::fixtures_install(&ctx, &keys),
    }
}

/// The error chain joined by ": ", skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in err.chain() {
        let message = cause.to_string();
        if !text.ends_with(&message) {
            if !text.is_empty() {
                text += ": ";
            }
            text += &message;
        }
    }
    text
}

/// Exit code and stderr lines for a failed command.
fn classify(err: &anyhow::Error) -> (u8, Vec<String>) {
    const POLICY: u8 = 2;
    const NOT_FOUND: u8 = 4;
    const MALFORMED: u8 = 5;
    let lines = |header: &str, rest: Vec<String>| {
        let mut out = vec![format!("error: {header}")];
        out.extend(rest);
        out
    };
    let single = || vec![format!("error: {}", describe(err))];
    for cause in err.chain() {
        if let Some(failure) = cause.downcast_ref::<Failure>() {
            let code = match failure {
                Failure::NotFound(_) => NOT_FOUND,
                Failure::Malformed(_) => MALFORMED,
            };
            return (code, single());
        }
        if let Some(e) = cause.downcast_ref::<LifecycleError>() {
            return match e {
                LifecycleError::PolicyViolation(v) => (
                    POLICY,
                    lines("policy violation", v.0.iter().map(ToString::to_string).collect()),
                ),
                LifecycleError::SubjectInvalid(_) | LifecycleError::WrongKind(_) => (MALFORMED, single()),
                LifecycleError::NotFound(_) | LifecycleError::Registry(RegistryError::NotFound(_)) => {
                    (NOT_FOUND, single())
                }
                _ => (1, single()),
            };
        }
        if let Some(e) = cause.downcast_ref::<RegistryError>() {
            return match e {
                RegistryError::NotFound(_) => (NOT_FOUND, single()),
                RegistryError::MalformedDocument(_) | RegistryError::MalformedBatchKey => (MALFORMED, single()),
                _ => (1, single()),
            };
        }
        if let Some(e) = cause.downcast_ref::<AgentError>() {
            return match e {
                AgentError::Registry(RegistryError::NotFound(_)) => (NOT_FOUND, single()),
                AgentError::UnknownScript(_) | AgentError::UnknownStrategy(_) | AgentError::InvalidLink(_) => {
                    (MALFORMED, single())
                }
                _ => (1, single()),
            };
        }
        if cause.downcast_ref::<CodecError>().is_some() || cause.downcast_ref::<ModelError>().is_some() {
            return (MALFORMED, single());
        }
    }
    (1, single())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 5 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.output.render(format));
            ExitCode::from(outcome.code)
        }
        Err(err) => {
            let (code, lines) = classify(&err);
            for line in lines {
                eprintln!("{line}");
            }
            ExitCode::from(code)
        }
    }
}
