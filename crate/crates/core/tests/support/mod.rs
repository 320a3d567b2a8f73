// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::sync::Arc;

use iotssi::fixtures::{build_fixture_corpus, fixture_clock, FixtureWorld};
use iotssi::lifecycle::{CredentialStore, Issuer, Lifecycle, MemoryStore};
use iotssi::model::{Timestamp, VerifiableCredential};
use iotssi::policy::IssuerKind;
use iotssi::registry::{MemoryRegistry, Registry};

/// Fixture world over a fresh in-memory registry, with the corpus stored
/// and its statuses published.
pub struct Setup {
    pub world: FixtureWorld,
    pub engine: Lifecycle,
    pub corpus: Vec<(String, VerifiableCredential)>,
}

impl Setup {
    pub fn new() -> Self {
        let registry = Arc::new(MemoryRegistry::new());
        let store = Arc::new(MemoryStore::new());
        Self::over(registry, store)
    }

    pub fn over(registry: Arc<dyn Registry>, store: Arc<dyn CredentialStore>) -> Self {
        let world = FixtureWorld::new();
        world.register_all(registry.as_ref()).expect("fixture registration");
        let corpus = build_fixture_corpus(&world);
        world
            .publish_statuses(registry.as_ref(), corpus.iter().map(|(_, vc)| vc))
            .expect("fixture statuses");
        for (_, vc) in &corpus {
            store.put(vc.clone()).expect("fixture store");
        }
        Self {
            engine: Lifecycle::new(registry, store),
            world,
            corpus,
        }
    }

    pub fn vc(&self, name: &str) -> &VerifiableCredential {
        &self.corpus.iter().find(|(n, _)| n == name).expect("corpus entry").1
    }

    pub fn manufacturer(&self) -> Issuer {
        Issuer::new(IssuerKind::Manufacturer, self.world.manufacturer.signer.clone())
    }
}

/// Fixture clock shifted by `secs`.
pub fn at(secs: i64) -> Timestamp {
    fixture_clock().checked_add_secs(secs).expect("in range")
}
