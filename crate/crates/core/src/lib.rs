// SPDX-License-Identifier: Apache-2.0

//! Self-sovereign identity for IoT devices: DID documents, the seven device
//! credential kinds, issuance policy, a verifiable data registry, credential
//! lifecycle, and agent deployment models.

pub mod agents;
pub mod codec;
pub mod fixtures;
pub mod lifecycle;
pub mod model;
pub mod policy;
pub mod registry;
pub mod schemas;
