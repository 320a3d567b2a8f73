// SPDX-License-Identifier: Apache-2.0

//! Life-cycle over the on-disk registry and credential store, across reopens.

mod support;

use std::sync::Arc;

use iotssi::agents::EdgeCache;
use iotssi::lifecycle::{verify_credential, CheckName, DirectoryStore, Lifecycle, LifecycleState, TransferRequest};
use iotssi::registry::FileRegistry;
use iotssi::schemas::CredentialKind;

use support::{at, Setup};

fn reopen(root: &std::path::Path) -> Lifecycle {
    Lifecycle::new(
        Arc::new(FileRegistry::open(root).unwrap()),
        Arc::new(DirectoryStore::open(root.join("credentials")).unwrap()),
    )
}

#[test]
fn transfer_and_revocation_survive_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let (old_id, new_id, static_id) = {
        let s = Setup::over(
            Arc::new(FileRegistry::open(dir.path()).unwrap()),
            Arc::new(DirectoryStore::open(dir.path().join("credentials")).unwrap()),
        );
        let old = s.vc("ownership").clone();
        let mut req = TransferRequest::new(&old, s.world.buyer.did().clone(), at(10)).unwrap();
        req.seller_proof = Some(req.sign(&old, &s.world.owner.signer).unwrap());
        req.buyer_proof = Some(req.sign(&old, &s.world.buyer.signer).unwrap());
        let new = s.engine.transfer_ownership(&req, &s.manufacturer()).unwrap();
        let static_id = s.vc("static-identity").id.clone();
        s.engine
            .revoke(
                &static_id,
                &s.world.manufacturer.signer,
                at(20),
                Some("decommissioned".into()),
            )
            .unwrap();
        (old.id, new.id, static_id)
    };

    let engine = reopen(dir.path());
    assert_eq!(engine.state_of(&old_id, at(30)).unwrap(), LifecycleState::Revoked);
    assert_eq!(engine.state_of(&new_id, at(30)).unwrap(), LifecycleState::Active);
    assert_eq!(engine.state_of(&static_id, at(30)).unwrap(), LifecycleState::Revoked);
    let record = engine.registry().check_status(&static_id).unwrap();
    assert_eq!(record.reason.as_deref(), Some("decommissioned"));

    let device = iotssi::fixtures::FixtureWorld::new().device.did().clone();
    let active = engine.active(CredentialKind::Ownership, &device, at(30));
    assert_eq!(active.len(), 1);
    assert_eq!(active[0].id, new_id);
    let report = verify_credential(&active[0], at(30), engine.registry());
    assert!(report.accepted(), "{report}");
}

#[test]
fn edge_cache_serves_stale_status_until_synced() {
    let dir = tempfile::tempdir().unwrap();
    let s = Setup::over(
        Arc::new(FileRegistry::open(dir.path()).unwrap()),
        Arc::new(DirectoryStore::open(dir.path().join("credentials")).unwrap()),
    );
    let vc = s.vc("capability").clone();
    let mut cache = EdgeCache::new(3_600);
    cache.track(&vc.id, s.engine.registry(), at(0)).unwrap();

    s.engine
        .revoke(&vc.id, &s.world.manufacturer.signer, at(60), None)
        .unwrap();
    let registry = reopen(dir.path());
    let cached = cache.verify(&vc, at(120), registry.registry());
    assert!(cached.report.accepted(), "cache predates the revocation");
    assert!(!cached.stale);
    assert_eq!(cached.cache_age_secs, Some(120));
    assert!(cache.verify(&vc, at(7_200), registry.registry()).stale);

    let summary = cache.sync(registry.registry(), at(7_200));
    assert_eq!(summary.newly_revoked, vec![vc.id.clone()]);
    let fresh = cache.verify(&vc, at(7_260), registry.registry());
    assert!(!fresh.stale);
    assert_eq!(fresh.report.failed(), vec![CheckName::Status]);
}
