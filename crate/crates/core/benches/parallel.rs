use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use arnli_core::contra::{build_contra_batch, ContraResources};
use arnli_core::exec::Exec;
use arnli_core::learn::tree::{GrowParams, MaxFeatures};
use arnli_core::learn::{Knn, RandomForest};
use arnli_core::model::PairFeatures;
use arnli_core::synth;
use arnli_core::textproc::Preprocessor;
use arnli_core::vectorize::{FitOptions, FittedVectorizer, VectorizerSpec};

struct Fixture {
    features: PairFeatures,
    vectorizer: FittedVectorizer,
    x: Vec<arnli_core::sparse::SparseVec>,
    y: Vec<usize>,
}

fn fixture() -> Fixture {
    let pairs = synth::generate(1500, 3);
    let pre = Preprocessor::default();
    let res = ContraResources::builtin(&pre);
    let features = PairFeatures::from_dataset(&pairs, &pre, &res, Exec::Parallel);
    let spec: VectorizerSpec = "bow-char".parse().unwrap();
    let vectorizer =
        FittedVectorizer::fit(spec, &features.analyzed, res.dimension(), &FitOptions::default()).unwrap();
    let x = vectorizer
        .transform_pairs(&features.analyzed, &features.contra, Exec::Parallel)
        .unwrap();
    let y = pairs.iter().map(|p| p.label.index()).collect();
    Fixture {
        features,
        vectorizer,
        x,
        y,
    }
}

fn bench(c: &mut Criterion) {
    let f = fixture();
    let params = GrowParams {
        max_features: MaxFeatures::Sqrt,
        ..GrowParams::default()
    };
    let knn = Knn::fit(&f.x, &f.y, 5);
    let res = ContraResources::builtin(&Preprocessor::default());
    let mut group = c.benchmark_group("exec");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let id = format!("{exec:?}").to_lowercase();
        group.bench_with_input(BenchmarkId::new("forest_fit_32", &id), &exec, |b, &e| {
            b.iter(|| black_box(RandomForest::fit(&f.x, &f.y, 32, true, params, 42, e)))
        });
        group.bench_with_input(BenchmarkId::new("knn_scores_300", &id), &exec, |b, &e| {
            b.iter(|| black_box(e.map_slice(&f.x[..300], |q| knn.scores(q))))
        });
        group.bench_with_input(BenchmarkId::new("transform_pairs", &id), &exec, |b, &e| {
            b.iter(|| {
                black_box(
                    f.vectorizer
                        .transform_pairs(&f.features.analyzed, &f.features.contra, e)
                        .unwrap(),
                )
            })
        });
        group.bench_with_input(BenchmarkId::new("contra_batch", &id), &exec, |b, &e| {
            b.iter(|| black_box(build_contra_batch(&f.features.analyzed, &res, e)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
