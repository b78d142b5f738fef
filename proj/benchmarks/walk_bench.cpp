#include <benchmark/benchmark.h>

#include "strider/datagen.hpp"
#include "strider/walker.hpp"

using namespace strider;

namespace {

Mesh sphere(std::size_t subdivisions) {
    ShapeSpec s;
    s.subdivisions = subdivisions;
    return generate_shape(s).mesh;
}

void BM_GenerateWalk(benchmark::State& state) {
    const Mesh mesh = sphere(static_cast<std::size_t>(state.range(0)));
    const MeshGraph graph(mesh);
    const std::size_t length = default_walk_length(mesh.vertex_count());
    Rng rng(1);
    for (auto _ : state) {
        const Walk w = generate_walk(graph, rng.uniform_index(mesh.vertex_count()), length, rng);
        benchmark::DoNotOptimize(w.vertices.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
    state.counters["V"] = static_cast<double>(mesh.vertex_count());
}
BENCHMARK(BM_GenerateWalk)->DenseRange(2, 4);

void BM_WalkFeatures(benchmark::State& state) {
    const Mesh mesh = sphere(3);
    Rng rng(2);
    const Walk w = generate_walk(mesh, 0, default_walk_length(mesh.vertex_count()), rng);
    for (auto _ : state) {
        WalkFeatures f = walk_features(mesh, w);
        benchmark::DoNotOptimize(f.data());
    }
}
BENCHMARK(BM_WalkFeatures);

}  // namespace
