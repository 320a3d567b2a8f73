// SPDX-License-Identifier: Apache-2.0

//! The credential design matrix as executable policy.
//!
//! A credential sits at a point on three axes (trust, scope, validity). Each
//! issuer kind may only issue inside its region of the matrix, and each
//! credential kind narrows that region further. A triple is admissible iff
//! the point lies in the intersection of the two.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::schemas::CredentialKind;

macro_rules! labelled_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $label)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownLabel;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| UnknownLabel {
                        axis: stringify!($name),
                        label: s.to_owned(),
                    })
            }
        }
    };
}
pub(crate) use labelled_enum;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {axis} label {label:?}")]
pub struct UnknownLabel {
    pub axis: &'static str,
    pub label: String,
}

labelled_enum!(
    /// Trust and interoperability level. Variant order is label order; compare
    /// trust with [`TrustLevel::rank`], under which `Anchored` and `Linked` tie.
    TrustLevel {
        SelfIssued => "self-issued",
        Verified => "verified",
        Anchored => "anchored",
        Linked => "linked",
        CrossVerified => "cross-verified",
        Consortium => "consortium",
        Regulator => "regulator",
    }
);

impl TrustLevel {
    pub fn rank(self) -> u8 {
        match self {
            TrustLevel::SelfIssued => 0,
            TrustLevel::Verified => 1,
            TrustLevel::Anchored | TrustLevel::Linked => 2,
            TrustLevel::CrossVerified => 3,
            TrustLevel::Consortium => 4,
            TrustLevel::Regulator => 5,
        }
    }
}

labelled_enum!(
    /// Audience breadth, narrowest first.
    Scope {
        Individual => "individual",
        SameNetwork => "same-network",
        ConnectedNetworks => "connected-networks",
        GeneralPublic => "general-public",
    }
);

labelled_enum!(
    /// Validity class, shortest first.
    Validity {
        PerCall => "per-call",
        Session => "session",
        MediumTerm => "medium-term",
        LongTerm => "long-term",
        Indefinite => "indefinite",
    }
);

impl Validity {
    /// Every class except `Indefinite` carries a concrete expiry.
    pub fn requires_expiry(self) -> bool {
        self != Validity::Indefinite
    }
}

labelled_enum!(
    IssuerKind {
        Manufacturer => "manufacturer",
        Regulator => "regulator",
        ServiceProvider => "service-provider",
        Owner => "owner",
    }
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatrixPoint {
    pub trust: TrustLevel,
    pub scope: Scope,
    pub validity: Validity,
}

impl MatrixPoint {
    pub fn new(trust: TrustLevel, scope: Scope, validity: Validity) -> Self {
        Self { trust, scope, validity }
    }

    /// All 7 × 4 × 5 points.
    pub fn all() -> impl Iterator<Item = MatrixPoint> {
        TrustLevel::ALL.iter().flat_map(|&trust| {
            Scope::ALL.iter().flat_map(move |&scope| {
                Validity::ALL
                    .iter()
                    .map(move |&validity| MatrixPoint::new(trust, scope, validity))
            })
        })
    }
}

impl fmt::Display for MatrixPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.trust, self.scope, self.validity)
    }
}

/// What an issuer recorded about a credential at issuance time. Verifiers
/// re-run the admissibility check against it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IssuanceProfile {
    pub issuer_kind: IssuerKind,
    pub point: MatrixPoint,
    #[serde(default)]
    pub trusted_hardware: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "camelCase")]
pub enum TrustSpan {
    /// Every label whose rank lies in `[lowest, highest]`.
    Ranks { lowest: TrustLevel, highest: TrustLevel },
    /// Exactly these labels.
    Labels { labels: BTreeSet<TrustLevel> },
}

impl TrustSpan {
    pub fn contains(&self, trust: TrustLevel) -> bool {
        match self {
            TrustSpan::Ranks { lowest, highest } => (lowest.rank()..=highest.rank()).contains(&trust.rank()),
            TrustSpan::Labels { labels } => labels.contains(&trust),
        }
    }

    pub fn labels(&self) -> BTreeSet<TrustLevel> {
        match self {
            TrustSpan::Ranks { lowest, highest } => TrustLevel::ALL
                .iter()
                .copied()
                .filter(|t| t.rank() >= lowest.rank() && t.rank() <= highest.rank())
                .collect(),
            TrustSpan::Labels { labels } => labels.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IssuerRegion {
    pub issuer: IssuerKind,
    pub trust: TrustSpan,
    pub scopes: BTreeSet<Scope>,
    pub validities: BTreeSet<Validity>,
}

impl IssuerRegion {
    pub fn contains(&self, point: MatrixPoint) -> bool {
        self.trust.contains(point.trust)
            && self.scopes.contains(&point.scope)
            && self.validities.contains(&point.validity)
    }
}

fn set<T: Ord + Copy>(items: &[T]) -> BTreeSet<T> {
    items.iter().copied().collect()
}

pub fn issuer_region(issuer: IssuerKind) -> IssuerRegion {
    use Scope::*;
    use Validity::*;
    let (trust, scopes, validities) = match issuer {
        IssuerKind::Manufacturer => (
            TrustSpan::Ranks {
                lowest: TrustLevel::Verified,
                highest: TrustLevel::Consortium,
            },
            set(Scope::ALL),
            set(Validity::ALL),
        ),
        IssuerKind::Regulator => (
            TrustSpan::Ranks {
                lowest: TrustLevel::CrossVerified,
                highest: TrustLevel::Regulator,
            },
            set(&[ConnectedNetworks, GeneralPublic]),
            set(&[MediumTerm, LongTerm]),
        ),
        IssuerKind::ServiceProvider => (
            TrustSpan::Ranks {
                lowest: TrustLevel::Verified,
                highest: TrustLevel::Anchored,
            },
            set(&[SameNetwork, ConnectedNetworks]),
            set(&[PerCall, Session, MediumTerm]),
        ),
        IssuerKind::Owner => (
            TrustSpan::Labels {
                labels: set(&[TrustLevel::SelfIssued, TrustLevel::Linked]),
            },
            set(&[Individual, SameNetwork]),
            set(Validity::ALL),
        ),
    };
    IssuerRegion {
        issuer,
        trust,
        scopes,
        validities,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "camelCase")]
pub enum TrustRequirement {
    Any,
    /// Anything ranked above self-issued.
    AboveSelfIssued,
    /// Ranks in `[lowest, highest]`, or self-issued when the subject device
    /// has trusted hardware.
    RanksOrHardwareSelfIssued {
        lowest: TrustLevel,
        highest: TrustLevel,
    },
}

impl TrustRequirement {
    pub fn allows(&self, trust: TrustLevel, trusted_hardware: bool) -> bool {
        match self {
            TrustRequirement::Any => true,
            TrustRequirement::AboveSelfIssued => trust.rank() > TrustLevel::SelfIssued.rank(),
            TrustRequirement::RanksOrHardwareSelfIssued { lowest, highest } => {
                (lowest.rank()..=highest.rank()).contains(&trust.rank())
                    || (trusted_hardware && trust == TrustLevel::SelfIssued)
            }
        }
    }

    pub fn labels(&self, trusted_hardware: bool) -> BTreeSet<TrustLevel> {
        TrustLevel::ALL
            .iter()
            .copied()
            .filter(|&t| self.allows(t, trusted_hardware))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KindRule {
    pub kind: CredentialKind,
    pub issuers: BTreeSet<IssuerKind>,
    pub trust: TrustRequirement,
    pub scopes: BTreeSet<Scope>,
    pub validities: BTreeSet<Validity>,
}

pub fn kind_rule(kind: CredentialKind) -> KindRule {
    use IssuerKind::*;
    use Scope::*;
    use Validity::*;
    let all_issuers = set(IssuerKind::ALL);
    let all_scopes = set(Scope::ALL);
    let beyond_individual = set(&[SameNetwork, ConnectedNetworks, GeneralPublic]);
    let (issuers, trust, scopes, validities) = match kind {
        CredentialKind::StaticIdentity => (
            set(&[Manufacturer]),
            TrustRequirement::Any,
            all_scopes,
            set(&[Indefinite]),
        ),
        CredentialKind::DynamicIdentity => (
            set(&[Manufacturer]),
            TrustRequirement::Any,
            all_scopes,
            set(&[Session, MediumTerm, LongTerm]),
        ),
        CredentialKind::Ownership => (
            set(&[Manufacturer]),
            TrustRequirement::AboveSelfIssued,
            all_scopes,
            set(&[Session, MediumTerm, LongTerm, Indefinite]),
        ),
        CredentialKind::Communication | CredentialKind::Capability => (
            all_issuers,
            TrustRequirement::Any,
            beyond_individual,
            set(&[LongTerm, Indefinite]),
        ),
        CredentialKind::Configuration => (
            all_issuers,
            TrustRequirement::RanksOrHardwareSelfIssued {
                lowest: TrustLevel::Verified,
                highest: TrustLevel::Consortium,
            },
            set(&[SameNetwork, ConnectedNetworks]),
            set(&[PerCall, Session]),
        ),
        CredentialKind::Onboarding => (
            set(&[Manufacturer, ServiceProvider]),
            TrustRequirement::Any,
            set(&[SameNetwork]),
            set(&[PerCall, Session]),
        ),
    };
    KindRule {
        kind,
        issuers,
        trust,
        scopes,
        validities,
    }
}

/// The prose rules the tables encode, one per issuer region and one per
/// credential-kind family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyRule {
    ManufacturerRegion,
    RegulatorRegion,
    ServiceProviderRegion,
    OwnerRegion,
    StaticIdentity,
    DynamicIdentity,
    Ownership,
    CommunicationCapability,
    Configuration,
    Onboarding,
}

impl PolicyRule {
    pub const ALL: [PolicyRule; 10] = [
        PolicyRule::ManufacturerRegion,
        PolicyRule::RegulatorRegion,
        PolicyRule::ServiceProviderRegion,
        PolicyRule::OwnerRegion,
        PolicyRule::StaticIdentity,
        PolicyRule::DynamicIdentity,
        PolicyRule::Ownership,
        PolicyRule::CommunicationCapability,
        PolicyRule::Configuration,
        PolicyRule::Onboarding,
    ];

    pub fn for_issuer(issuer: IssuerKind) -> Self {
        match issuer {
            IssuerKind::Manufacturer => PolicyRule::ManufacturerRegion,
            IssuerKind::Regulator => PolicyRule::RegulatorRegion,
            IssuerKind::ServiceProvider => PolicyRule::ServiceProviderRegion,
            IssuerKind::Owner => PolicyRule::OwnerRegion,
        }
    }

    pub fn for_kind(kind: CredentialKind) -> Self {
        match kind {
            CredentialKind::StaticIdentity => PolicyRule::StaticIdentity,
            CredentialKind::DynamicIdentity => PolicyRule::DynamicIdentity,
            CredentialKind::Ownership => PolicyRule::Ownership,
            CredentialKind::Communication | CredentialKind::Capability => PolicyRule::CommunicationCapability,
            CredentialKind::Configuration => PolicyRule::Configuration,
            CredentialKind::Onboarding => PolicyRule::Onboarding,
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            PolicyRule::ManufacturerRegion => {
                "manufacturers issue from verified up to consortium trust, at any scope and any validity"
            }
            PolicyRule::RegulatorRegion => {
                "regulators issue from cross-verified up to regulator trust, for connected networks or the \
                 general public, with medium- or long-term validity"
            }
            PolicyRule::ServiceProviderRegion => {
                "service providers issue from verified up to anchored trust, within their own or affiliated \
                 networks, with per-call, session or medium-term validity"
            }
            PolicyRule::OwnerRegion => {
                "owners issue self-issued or linked credentials for individual or same-network use, at any validity"
            }
            PolicyRule::StaticIdentity => "static identity comes only from the manufacturer and never expires",
            PolicyRule::DynamicIdentity => {
                "dynamic identity comes only from the manufacturer with session to long-term validity"
            }
            PolicyRule::Ownership => "ownership is issued by the manufacturer, never self-issued, and never per-call",
            PolicyRule::CommunicationCapability => {
                "communication and capability credentials are long-term or indefinite and reach beyond one individual"
            }
            PolicyRule::Configuration => {
                "configuration lasts one call or one session, stays within one or a few connected networks, and \
                 needs verified to consortium trust unless trusted hardware self-issues it"
            }
            PolicyRule::Onboarding => {
                "onboarding is issued by a manufacturer or service provider, lasts one call or session, and is \
                 limited to the network being joined"
            }
        }
    }
}

impl fmt::Display for PolicyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = serde_json::to_value(self).expect("unit variant serializes");
        f.write_str(label.as_str().expect("unit variants serialize as strings"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    OutsideIssuerTrust { issuer: IssuerKind, trust: TrustLevel },
    OutsideIssuerScope { issuer: IssuerKind, scope: Scope },
    OutsideIssuerValidity { issuer: IssuerKind, validity: Validity },
    IssuerNotPermitted { kind: CredentialKind, issuer: IssuerKind },
    SelfIssuedOwnership,
    TrustNotPermitted { kind: CredentialKind, trust: TrustLevel },
    ScopeNotPermitted { kind: CredentialKind, scope: Scope },
    ValidityNotPermitted { kind: CredentialKind, validity: Validity },
}

impl Violation {
    pub fn rule(&self) -> PolicyRule {
        match self {
            Violation::OutsideIssuerTrust { issuer, .. }
            | Violation::OutsideIssuerScope { issuer, .. }
            | Violation::OutsideIssuerValidity { issuer, .. } => PolicyRule::for_issuer(*issuer),
            Violation::SelfIssuedOwnership => PolicyRule::Ownership,
            Violation::IssuerNotPermitted { kind, .. }
            | Violation::TrustNotPermitted { kind, .. }
            | Violation::ScopeNotPermitted { kind, .. }
            | Violation::ValidityNotPermitted { kind, .. } => PolicyRule::for_kind(*kind),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutsideIssuerTrust { issuer, trust } => write!(f, "{issuer} cannot issue at trust {trust}"),
            Violation::OutsideIssuerScope { issuer, scope } => write!(f, "{issuer} cannot issue with scope {scope}"),
            Violation::OutsideIssuerValidity { issuer, validity } => {
                write!(f, "{issuer} cannot issue with validity {validity}")
            }
            Violation::IssuerNotPermitted { kind, issuer } => {
                write!(f, "{kind} credentials cannot be issued by {issuer}")
            }
            Violation::SelfIssuedOwnership => f.write_str("ownership must not be self-issued"),
            Violation::TrustNotPermitted { kind, trust } => write!(f, "{kind} credentials cannot carry trust {trust}"),
            Violation::ScopeNotPermitted { kind, scope } => write!(f, "{kind} credentials cannot have scope {scope}"),
            Violation::ValidityNotPermitted { kind, validity } => {
                write!(f, "{kind} credentials cannot have validity {validity}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct PolicyViolations(pub Vec<Violation>);

/// Every violation of the issuer region and the kind rule, in table order.
pub fn check_admissible(
    issuer: IssuerKind,
    kind: CredentialKind,
    point: MatrixPoint,
    trusted_hardware: bool,
) -> Result<(), PolicyViolations> {
    let mut violations = Vec::new();
    let region = issuer_region(issuer);
    if !region.trust.contains(point.trust) {
        violations.push(Violation::OutsideIssuerTrust {
            issuer,
            trust: point.trust,
        });
    }
    if !region.scopes.contains(&point.scope) {
        violations.push(Violation::OutsideIssuerScope {
            issuer,
            scope: point.scope,
        });
    }
    if !region.validities.contains(&point.validity) {
        violations.push(Violation::OutsideIssuerValidity {
            issuer,
            validity: point.validity,
        });
    }

    let rule = kind_rule(kind);
    if !rule.issuers.contains(&issuer) {
        violations.push(Violation::IssuerNotPermitted { kind, issuer });
    }
    if !rule.trust.allows(point.trust, trusted_hardware) {
        violations.push(match (kind, point.trust) {
            (CredentialKind::Ownership, TrustLevel::SelfIssued) => Violation::SelfIssuedOwnership,
            _ => Violation::TrustNotPermitted {
                kind,
                trust: point.trust,
            },
        });
    }
    if !rule.scopes.contains(&point.scope) {
        violations.push(Violation::ScopeNotPermitted {
            kind,
            scope: point.scope,
        });
    }
    if !rule.validities.contains(&point.validity) {
        violations.push(Violation::ValidityNotPermitted {
            kind,
            validity: point.validity,
        });
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(PolicyViolations(violations))
    }
}

/// The admissible cells for `kind`, built directly from the two tables.
pub fn enumerate_admissible(kind: CredentialKind) -> Vec<(IssuerKind, MatrixPoint)> {
    enumerate_admissible_with(kind, false)
}

pub fn enumerate_admissible_with(kind: CredentialKind, trusted_hardware: bool) -> Vec<(IssuerKind, MatrixPoint)> {
    let rule = kind_rule(kind);
    let mut out = Vec::new();
    for &issuer in &rule.issuers {
        let region = issuer_region(issuer);
        let trusts = region.trust.labels();
        let trusts = trusts
            .intersection(&rule.trust.labels(trusted_hardware))
            .copied()
            .collect::<Vec<_>>();
        let scopes = region.scopes.intersection(&rule.scopes).copied().collect::<Vec<_>>();
        let validities = region
            .validities
            .intersection(&rule.validities)
            .copied()
            .collect::<Vec<_>>();
        for &trust in &trusts {
            for &scope in &scopes {
                for &validity in &validities {
                    out.push((issuer, MatrixPoint::new(trust, scope, validity)));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyTable {
    pub regions: Vec<IssuerRegion>,
    pub kinds: Vec<KindRule>,
}

pub fn policy_table() -> PolicyTable {
    PolicyTable {
        regions: IssuerKind::ALL.iter().map(|&i| issuer_region(i)).collect(),
        kinds: CredentialKind::ALL.iter().map(|&k| kind_rule(k)).collect(),
    }
}
