//! Inputs shared by the criterion benchmarks in `benches/`.

use segcodec_core::{
    build_palette, degrade, encode, generate_scene, suite_profile, CollisionPolicy, Colormap,
    EntityMaskSet, SceneSpec,
};

/// A default 512x512 synthetic scene.
pub fn scene(seed: u64) -> EntityMaskSet {
    generate_scene(&SceneSpec::default(), seed).expect("default scene spec is valid")
}

pub fn clean_colormap(scene: &EntityMaskSet) -> Colormap {
    let palette = build_palette(11).expect("grid 11 is valid");
    encode(scene, &palette, CollisionPolicy::Share).expect("scene encodes").0
}

/// The scene's colormap under a suite profile.
pub fn degraded(scene: &EntityMaskSet, profile: &str, seed: u64) -> Colormap {
    let profile = suite_profile(profile).expect("suite profile").with_seed(seed);
    degrade(&clean_colormap(scene), &profile).expect("profile is valid")
}
