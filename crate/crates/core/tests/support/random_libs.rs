//! Randomized method libraries with scripted validity, shared by the reuse
//! tests and the acceptance target.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reuse_forge::gateway::{FnBackend, Gateway};
use reuse_forge::{Method, MethodLibrary, Prompt};

const VOCAB: &[&str] = &[
    "banana", "apple", "fresh", "picking", "time", "disk", "reset", "usage", "tool", "mp3", "slow", "copy", "website",
    "server", "load", "judge", "ripe", "drive", "file", "buy",
];

pub struct Case {
    pub query: String,
    pub library: MethodLibrary,
    /// Ids whose solutions the validity backend accepts.
    pub valid: BTreeSet<String>,
}

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=6);
    (0..n)
        .map(|_| *VOCAB.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Library of 1..=10 methods; each solution carries a unique marker the
/// validity backend keys on.
pub fn random_case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=10);
    let mut library = MethodLibrary::new();
    let mut valid = BTreeSet::new();
    for i in 0..n {
        let id = format!("m{i:02}");
        let method = Method::new(id.clone(), sentence(&mut rng), format!("apply marker{i:02}z"));
        library.add(method).unwrap();
        if rng.random_bool(0.35) {
            valid.insert(id);
        }
    }
    Case {
        query: sentence(&mut rng),
        library,
        valid,
    }
}

/// Validity backend: "yes" iff the prompt carries the marker of a valid id.
pub fn validity_gateway(valid: &BTreeSet<String>) -> Gateway {
    let markers: Arc<Vec<String>> = Arc::new(
        valid
            .iter()
            .map(|id| format!("marker{}z", id.trim_start_matches('m')))
            .collect(),
    );
    Gateway::new(FnBackend::new(move |p: &Prompt| {
        let yes = markers.iter().any(|m| p.rendered.contains(m.as_str()));
        Ok(if yes { "yes".into() } else { "no".into() })
    }))
}
