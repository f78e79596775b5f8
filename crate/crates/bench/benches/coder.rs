use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rdhei::coder::{self, ScanMode};
use rdhei::predictor::{predict_image, OrderTable, ReferencePlan};
use rdhei::{Backend, BlockGrid};
use rdhei_bench::standard_or_fixture;

fn threshold_scan(c: &mut Criterion) {
    let image = standard_or_fixture();
    let grid = BlockGrid::whole(image.height(), image.width()).unwrap();
    let plan = ReferencePlan::top_left(&grid);
    let prediction = predict_image(&image, &grid, &plan, &OrderTable::new(&grid, &plan));
    let mut group = c.benchmark_group("threshold_scan");
    group.sample_size(10);
    for backend in [Backend::Arithmetic, Backend::Huffman] {
        for mode in [ScanMode::Exact, ScanMode::Estimate] {
            group.bench_with_input(BenchmarkId::new(backend.to_string(), format!("{mode:?}")), &mode, |b, &mode| {
                b.iter(|| coder::optimize_threshold(&prediction, image.len(), backend, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn encode_decode(c: &mut Criterion) {
    let image = standard_or_fixture();
    let grid = BlockGrid::whole(image.height(), image.width()).unwrap();
    let plan = ReferencePlan::top_left(&grid);
    let prediction = predict_image(&image, &grid, &plan, &OrderTable::new(&grid, &plan));
    let mut group = c.benchmark_group("description");
    group.sample_size(10);
    for backend in [Backend::Arithmetic, Backend::Huffman] {
        let stream = coder::encode(&prediction, 40, image.len(), backend).unwrap();
        let bits = stream.to_bits();
        group.bench_function(BenchmarkId::new("encode", backend), |b| {
            b.iter(|| coder::encode(&prediction, 40, image.len(), backend).unwrap())
        });
        group.bench_function(BenchmarkId::new("decode", backend), |b| {
            b.iter(|| coder::decode(&bits, prediction.len(), image.len(), backend).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, threshold_scan, encode_decode);
criterion_main!(benches);
