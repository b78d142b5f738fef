#include <benchmark/benchmark.h>

#include <vector>

#include "strider/datagen.hpp"
#include "strider/model.hpp"
#include "strider/walker.hpp"

using namespace strider;

namespace {

std::vector<WalkFeatures> sample_walks(std::size_t count, std::size_t length) {
    ShapeSpec s;
    s.subdivisions = 3;
    const Mesh mesh = generate_shape(s).mesh;
    Rng rng(5);
    std::vector<WalkFeatures> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(walk_features(mesh, generate_walk(mesh, rng.uniform_index(mesh.vertex_count()), length, rng)));
    }
    return out;
}

ModelConfig config_for(std::int64_t which) {
    return which == 0 ? ModelConfig::tiny(3, TaskKind::classification) : ModelConfig::full(3, TaskKind::classification);
}

// Arg 0: tiny model, 1: full model. Batches of 32 walks of 60 steps.
void BM_Forward(benchmark::State& state) {
    Rng rng(1);
    const NetParams params = NetParams::initialize(config_for(state.range(0)), rng);
    const auto walks = sample_walks(32, 60);
    for (auto _ : state) {
        ForwardCache cache = forward_batch(params, walks);
        benchmark::DoNotOptimize(cache.logits.data());
    }
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
    Rng rng(1);
    const NetParams params = NetParams::initialize(config_for(state.range(0)), rng);
    const auto walks = sample_walks(32, 60);
    NetParams grads = params.zeros_like();
    for (auto _ : state) {
        const ForwardCache cache = forward_batch(params, walks);
        const Matrix dlogits = Matrix::Constant(cache.logits.rows(), cache.logits.cols(), 1e-3);
        backward_batch(params, cache, dlogits, grads);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
