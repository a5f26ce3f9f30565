use criterion::{black_box, criterion_group, criterion_main, Criterion};
use loomscan::defect::{edge_detect, segment_defects};
use loomscan::density::measure_density;
use loomscan::fixtures::{canonical_tile, hole_fixture};
use loomscan::imgcore::{niblack_threshold, otsu_threshold};
use loomscan::spectral::{fft2, reconstruct_axis};
use loomscan::synthgen::render_fabric;
use loomscan::weave::{analyze_weave, WeaveOptions};
use loomscan::wiener::directional_filter;
use loomscan::{DensityParams, EdgeMethod, GrayImage, NiblackParams, SynthSpec, WeaveClass, YarnAxis};

fn fabric() -> GrayImage {
    let spec = SynthSpec::new(canonical_tile(WeaveClass::Twill31).unwrap(), 40.0, 30.0).with_noise(6.0, 1);
    render_fabric(&spec).unwrap()
}

fn primitives(c: &mut Criterion) {
    let img = fabric();
    c.bench_function("otsu 512x384", |b| b.iter(|| otsu_threshold(black_box(&img)).unwrap()));
    let p = NiblackParams::default();
    c.bench_function("niblack 33x33", |b| b.iter(|| niblack_threshold(black_box(&img), &p).unwrap()));
    c.bench_function("fft2 512x384", |b| b.iter(|| fft2(black_box(&img))));
    c.bench_function("band reconstruction", |b| b.iter(|| reconstruct_axis(black_box(&img), YarnAxis::Warp, 3).unwrap()));
    c.bench_function("wiener warp window", |b| b.iter(|| directional_filter(black_box(&img), YarnAxis::Warp).unwrap()));
    c.bench_function("canny", |b| b.iter(|| edge_detect(black_box(&img), EdgeMethod::Canny)));
}

fn pipelines(c: &mut Criterion) {
    let img = fabric();
    let p = DensityParams::default();
    c.bench_function("density warp+weft", |b| {
        b.iter(|| {
            measure_density(black_box(&img), YarnAxis::Warp, &p).unwrap();
            measure_density(black_box(&img), YarnAxis::Weft, &p).unwrap()
        })
    });
    let opts = WeaveOptions::default();
    c.bench_function("weave analysis", |b| b.iter(|| analyze_weave(black_box(&img), &opts).unwrap()));
    let (hole, _) = hole_fixture().unwrap();
    c.bench_function("defect segmentation", |b| b.iter(|| segment_defects(black_box(&hole), 9).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = primitives, pipelines
}
criterion_main!(benches);
