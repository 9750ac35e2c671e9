#![allow(dead_code)]

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdllf::catalog::{self, Example};
use rdllf::llf::{certify, GridSettings, LevelSetConstants, LlfCandidate, LlfCertification, Verdict};
use rdllf::model::{DiscretizedSystem, RationalTermFunction};

pub const SEED: u64 = 0x5eed_1234;

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

pub fn schnakenberg_llf() -> RationalTermFunction {
    catalog::example_llf(43.0).unwrap()
}

/// Certification of the Schnakenberg example LLF, computed once per binary.
pub fn schnakenberg_certification() -> &'static LlfCertification {
    static CERT: OnceLock<LlfCertification> = OnceLock::new();
    CERT.get_or_init(|| {
        let r = catalog::schnakenberg_reactions(0.1, 1.0).unwrap();
        let c = certify(&schnakenberg_llf(), &r, &GridSettings::default());
        assert_eq!(c.verdict, Verdict::Verified, "{:?}", c.notes);
        c
    })
}

pub fn schnakenberg_candidate() -> (LlfCandidate, LevelSetConstants) {
    let c = schnakenberg_certification();
    (c.candidate.clone().unwrap(), c.constants.clone().unwrap())
}

/// The reference two-compartment Schnakenberg system.
pub fn schnakenberg_system() -> DiscretizedSystem {
    let ex = Example::Schnakenberg;
    let (g, d, u0, v0) = ex.default_setup();
    catalog::build_system(ex, &[], g, d, u0, v0).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
