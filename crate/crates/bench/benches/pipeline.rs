//! Hot-path benchmarks: design enumeration, feature derivation, document
//! rendering, and the clustered regression fit.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use hireaudit_core::config::ConfigBundle;
use hireaudit_core::design::{
    derive_features, enumerate_briefs, enumerate_pairs, enumerate_profiles, PairFeatures,
};
use hireaudit_core::harness::{Rounding, SyntheticEvaluator, SyntheticEvaluatorSpec};
use hireaudit_core::render::render_profile;
use hireaudit_core::stats::{fit, ModelSpec};

fn small_dataset() -> (Vec<PairFeatures>, Vec<f64>, Vec<String>) {
    let bundle = ConfigBundle::load("desk-en").unwrap();
    let profiles = enumerate_profiles(&bundle.design).unwrap();
    let briefs = enumerate_briefs(&bundle.design).unwrap();
    let spec = SyntheticEvaluatorSpec {
        intercept: 7.0,
        weights: [("exp:below", -2.0), ("skill:far", -0.7), ("rate:100", -0.4)]
            .into_iter()
            .map(|(n, w)| (n.to_string(), w))
            .collect(),
        interaction_weights: Vec::new(),
        noise_sd: 0.0,
        rounding: Rounding::None,
        seed: 0,
    };
    let eval = SyntheticEvaluator::new(spec).unwrap();
    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut clusters = Vec::new();
    for (p, b) in enumerate_pairs(&profiles, &briefs) {
        let f = derive_features(&bundle.design.features, p, b).unwrap();
        y.push(eval.utility(&f));
        clusters.push(f.pair_id.brief_id.clone());
        data.push(f);
    }
    (data, y, clusters)
}

fn bench_enumeration(c: &mut Criterion) {
    let bundle = ConfigBundle::load("paper-fullstack").unwrap();
    c.bench_function("enumerate_full_factorial", |b| {
        b.iter(|| {
            let profiles = enumerate_profiles(&bundle.design).unwrap();
            let briefs = enumerate_briefs(&bundle.design).unwrap();
            (profiles.len(), briefs.len())
        })
    });
}

fn bench_features(c: &mut Criterion) {
    let bundle = ConfigBundle::load("desk-en").unwrap();
    let profiles = enumerate_profiles(&bundle.design).unwrap();
    let briefs = enumerate_briefs(&bundle.design).unwrap();
    c.bench_function("derive_features_1620_pairs", |b| {
        b.iter(|| {
            for (p, bf) in enumerate_pairs(&profiles, &briefs) {
                std::hint::black_box(derive_features(&bundle.design.features, p, bf).unwrap());
            }
        })
    });
}

fn bench_render(c: &mut Criterion) {
    let bundle = ConfigBundle::load("paper-fullstack").unwrap();
    let profiles = enumerate_profiles(&bundle.design).unwrap();
    c.bench_function("render_profile", |b| {
        let mut it = profiles.iter().cycle();
        b.iter(|| render_profile(it.next().unwrap(), &bundle.design, &bundle.templates).unwrap())
    });
}

fn bench_fit(c: &mut Criterion) {
    let (data, y, clusters) = small_dataset();
    let spec = ModelSpec::main_effects("mean_score");
    c.bench_function("fit_main_effects_1620", |b| {
        b.iter_batched(
            || (),
            |()| fit(&spec, &data, &y, &clusters).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_enumeration, bench_features, bench_render, bench_fit);
criterion_main!(benches);
