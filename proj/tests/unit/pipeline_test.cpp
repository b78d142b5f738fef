#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "grad_suite.hpp"
#include "strider/datagen.hpp"
#include "strider/errors.hpp"
#include "strider/pipeline.hpp"

using namespace strider;

namespace {

Dataset small_dataset(std::size_t per_class = 5) {
    DatasetSpec spec;
    spec.families = {ShapeFamily::icosphere, ShapeFamily::box, ShapeFamily::torus};
    spec.per_class = per_class;
    spec.target_faces = 150;
    spec.seed = 3;
    return generate_dataset(spec);
}

TrainConfig quick_config(std::size_t iterations, std::uint64_t seed) {
    TrainConfig c = TrainConfig::classification_defaults();
    c.meshes_per_batch = 4;
    c.iterations = iterations;
    c.schedule.min_rate = 1e-5;
    c.schedule.max_rate = 2e-3;
    c.schedule.cycle_size = std::max<std::size_t>(iterations, 2);
    c.seed = seed;
    return c;
}

}  // namespace

TEST(Preprocess, SimplifiesNormalizesAndTags) {
    const GeneratedShape g = generate_shape(random_instance(ShapeFamily::dumbbell, 0, 0.1, 2));
    Sample s{"db", g.mesh, MeshLabels::segmentation(*g.segments), Split::train, "raw"};
    const Sample out = preprocess_sample(s, 300);
    EXPECT_LE(out.mesh.face_count(), 300u);
    EXPECT_EQ(out.variant, "f300");
    EXPECT_EQ(out.labels.vertex_segments.size(), out.mesh.vertex_count());
    double max_norm = 0.0;
    for (const Vec3& p : out.mesh.vertices()) max_norm = std::max(max_norm, p.norm());
    EXPECT_NEAR(max_norm, 1.0, 1e-12);
}

TEST(Preprocess, MeshBelowTargetIsOnlyNormalized) {
    ShapeSpec spec;
    spec.subdivisions = 1;
    spec.extents = Vec3(3, 3, 3);
    const Mesh m = generate_shape(spec).mesh;
    const Sample out = preprocess_sample({"s", m, MeshLabels::classification(0), Split::test, "raw"}, 300);
    EXPECT_EQ(out.mesh.faces(), m.faces());
    EXPECT_EQ(out.split, Split::test);
    EXPECT_EQ(out.mesh.content_hash(), normalize_unit_sphere(m).content_hash());
    EXPECT_EQ(preprocess_sample({"s", m, MeshLabels::classification(0), Split::test, "raw"}, 0).variant, "raw");
}

TEST(Preprocess, OneVariantPerTarget) {
    const Dataset in = small_dataset(2);
    const Dataset out = preprocess_dataset(in, {100, 60});
    ASSERT_EQ(out.samples.size(), 2 * in.samples.size());
    EXPECT_EQ(out.samples[0].name, in.samples[0].name + "_f100");
    EXPECT_EQ(out.samples[1].name, in.samples[0].name + "_f60");
    EXPECT_LE(out.samples[1].mesh.face_count(), 60u);
    EXPECT_THROW(preprocess_dataset(in, {}), std::invalid_argument);
}

TEST(Perturb, ZeroFractionIsIdentity) {
    const Mesh m = small_dataset(1).samples[0].mesh;
    Rng rng(1);
    EXPECT_EQ(perturb_triangulation(m, 0.0, rng).content_hash(), m.content_hash());
}

TEST(Perturb, FullFractionMovesEveryVertexTowardANeighbor) {
    const Mesh m = small_dataset(1).samples[0].mesh;
    Rng rng(2);
    const Mesh p = perturb_triangulation(m, 1.0, rng);
    EXPECT_EQ(p.faces(), m.faces());
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        const Vec3 delta = p.position(v) - m.position(v);
        ASSERT_GT(delta.norm(), 0.0) << v;
        // some neighbor u has p(v) = m(v) + f (m(u) - m(v)) with f in (0, 0.5]
        bool found = false;
        for (std::size_t u : m.neighbors(v)) {
            const Vec3 dir = m.position(u) - m.position(v);
            const double f = delta.dot(dir) / dir.squaredNorm();
            if (f > 0.0 && f <= 0.5 + 1e-12 && (delta - f * dir).norm() < 1e-12) found = true;
        }
        ASSERT_TRUE(found) << v;
    }
    EXPECT_THROW(perturb_triangulation(m, 1.5, rng), std::invalid_argument);
}

TEST(Perturb, FractionSelectsRoundedCount) {
    const Mesh m = small_dataset(1).samples[0].mesh;
    Rng rng(3);
    const Mesh p = perturb_triangulation(m, 0.3, rng);
    std::size_t moved = 0;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) moved += p.position(v) != m.position(v);
    EXPECT_EQ(moved, static_cast<std::size_t>(std::llround(0.3 * m.vertex_count())));
}

TEST(TrainConfig, Defaults) {
    const TrainConfig c = TrainConfig::classification_defaults();
    EXPECT_EQ(c.batch_walks(), 32u);
    EXPECT_EQ(c.walks_per_mesh, 1u);
    EXPECT_TRUE(c.rotate);
    EXPECT_EQ(c.schedule.max_rate, 5e-4);
    EXPECT_EQ(c.schedule.cycle_size, 20000u);
    const TrainConfig s = TrainConfig::segmentation_defaults();
    EXPECT_EQ(s.meshes_per_batch, 8u);
    EXPECT_EQ(s.walks_per_mesh, 4u);
    TrainConfig bad = c;
    bad.threads = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(MetricsCsv, RowFormat) {
    EXPECT_EQ(metrics_csv_header(), "iteration,loss,rate,eval_accuracy");
    EXPECT_EQ(metrics_csv_row({5, 0.5, 1e-3, std::nullopt}), "5,0.5,0.001,");
    EXPECT_EQ(metrics_csv_row({10, 1.25, 2e-4, 0.75}), "10,1.25,0.0002,0.75");
}

TEST(Train, SameSeedSameCheckpoint) {
    const Dataset ds = small_dataset();
    const ModelConfig model = grad_suite::small_config();
    const TrainResult a = train(ds, model, quick_config(3, 9));
    const TrainResult b = train(ds, model, quick_config(3, 9));
    const TrainResult c = train(ds, model, quick_config(3, 10));
    EXPECT_EQ(checkpoint_hash(a.checkpoint), checkpoint_hash(b.checkpoint));
    EXPECT_NE(checkpoint_hash(a.checkpoint), checkpoint_hash(c.checkpoint));
    ASSERT_EQ(a.metrics.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.metrics[i].loss, b.metrics[i].loss);
    EXPECT_EQ(a.checkpoint.iteration, 3u);
}

TEST(Train, FixedThreadCountIsReproducible) {
    const Dataset ds = small_dataset();
    const ModelConfig model = grad_suite::small_config();
    TrainConfig cfg = quick_config(3, 4);
    cfg.threads = 3;
    EXPECT_EQ(checkpoint_hash(train(ds, model, cfg).checkpoint), checkpoint_hash(train(ds, model, cfg).checkpoint));
}

TEST(Train, ResumeMatchesUninterruptedRun) {
    const Dataset ds = small_dataset();
    const ModelConfig model = grad_suite::small_config();
    const TrainResult full = train(ds, model, quick_config(6, 2));
    TrainConfig first = quick_config(6, 2);
    first.iterations = 3;
    const TrainResult half = train(ds, model, first);
    const TrainResult resumed = train(ds, model, quick_config(6, 2), {}, &half.checkpoint);
    EXPECT_EQ(resumed.metrics.size(), 3u);
    EXPECT_EQ(resumed.metrics.front().iteration, 3u);
    EXPECT_EQ(checkpoint_hash(resumed.checkpoint), checkpoint_hash(full.checkpoint));
}

TEST(Train, ObserverSeesEveryIterationAndEval) {
    const Dataset ds = small_dataset();
    TrainConfig cfg = quick_config(4, 1);
    cfg.eval_every = 2;
    cfg.eval.n_walks = 2;
    std::vector<MetricsRow> seen;
    train(ds, grad_suite::small_config(), cfg, [&](const MetricsRow& r) { seen.push_back(r); });
    ASSERT_EQ(seen.size(), 4u);
    EXPECT_FALSE(seen[0].eval_accuracy.has_value());
    EXPECT_TRUE(seen[1].eval_accuracy.has_value());
    EXPECT_TRUE(seen[3].eval_accuracy.has_value());
    for (const auto& r : seen) EXPECT_TRUE(std::isfinite(r.loss));
}

TEST(Train, NonFiniteParametersRaiseNumericalError) {
    const Dataset ds = small_dataset();
    Checkpoint bad = train(ds, grad_suite::small_config(), quick_config(1, 1)).checkpoint;
    bad.params.fc1.weight.values()[0] = std::nan("");
    try {
        train(ds, grad_suite::small_config(), quick_config(3, 1), {}, &bad);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos) << e.what();
    }
}

TEST(Train, RejectsMismatchedTaskOrClasses) {
    const Dataset ds = small_dataset(2);
    EXPECT_THROW(train(ds, grad_suite::small_config(TaskKind::segmentation), quick_config(1, 0)), DataError);
    ModelConfig wrong = grad_suite::small_config();
    wrong.num_classes = 5;
    EXPECT_THROW(train(ds, wrong, quick_config(1, 0)), DataError);
}

TEST(Train, OverfitsTwoMeshes) {
    // Two training meshes of different classes: loss must collapse well below
    // chance (ln 2) for most seeds.
    Dataset ds = small_dataset(1);
    ds.samples.erase(std::remove_if(ds.samples.begin(), ds.samples.end(),
                                    [](const Sample& s) { return s.labels.class_id == 2; }),
                     ds.samples.end());
    for (auto& s : ds.samples) s.split = Split::train;
    ds.num_classes = 2;
    ds.class_names.resize(2);
    ModelConfig model = grad_suite::small_config();
    model.num_classes = 2;
    std::vector<double> final_losses;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        TrainConfig cfg = quick_config(200, seed);
        cfg.meshes_per_batch = 2;
        cfg.walks_per_mesh = 4;
        cfg.rotate = false;
        const TrainResult r = train(ds, model, cfg);
        double tail = 0.0;
        for (std::size_t i = r.metrics.size() - 20; i < r.metrics.size(); ++i) tail += r.metrics[i].loss;
        final_losses.push_back(tail / 20.0);
    }
    std::sort(final_losses.begin(), final_losses.end());
    EXPECT_LT(final_losses[2], 0.25 * std::log(2.0));
}

TEST(TrainStep, BatchGradientIsMeanOfSingles) {
    const Dataset ds = small_dataset(1);
    Rng rng(5);
    const NetParams params = NetParams::initialize(grad_suite::small_config(), rng);
    std::vector<BatchItem> batch;
    for (const Sample& s : ds.samples) {
        Rng wr(batch.size());
        Walk w = generate_walk(s.mesh, 0, 20, wr);
        batch.push_back({walk_features(s.mesh, w), w, &s.labels});
    }
    NetParams together = params.zeros_like();
    const double loss = batch_loss_and_gradient(params, batch, together, 2);
    NetParams separate = params.zeros_like();
    double loss_sum = 0.0;
    for (const BatchItem& item : batch) {
        NetParams g = params.zeros_like();
        loss_sum += batch_loss_and_gradient(params, std::span<const BatchItem>(&item, 1), g, 1);
        separate.accumulate(g);
    }
    separate.scale(1.0 / static_cast<double>(batch.size()));
    EXPECT_NEAR(loss, loss_sum / static_cast<double>(batch.size()), 1e-12);
    const auto a = std::as_const(together).tensors();
    const auto b = std::as_const(separate).tensors();
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < a[i]->size(); ++k) ASSERT_NEAR(a[i]->values()[k], b[i]->values()[k], 1e-12);
    }
}

TEST(Sweep, SinglePointGivesOneRow) {
    const Dataset ds = small_dataset(3);
    Rng rng(1);
    const NetParams p = NetParams::initialize(grad_suite::small_config(), rng);
    SweepOptions opt;
    opt.axis = SweepAxis::n_walks;
    opt.values = {4};
    opt.seeds = 3;
    const auto points = ablation_sweep(ds, &p, opt);
    ASSERT_EQ(points.size(), 1u);
    EXPECT_EQ(points[0].per_seed.size(), 3u);
    const std::string csv = sweep_csv(points, SweepAxis::n_walks);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
    EXPECT_EQ(csv.rfind("n_walks,mean_accuracy,std_accuracy\n", 0), 0u);
}

TEST(Sweep, MeanAndSampleStd) {
    const Dataset ds = small_dataset(3);
    Rng rng(2);
    const NetParams p = NetParams::initialize(grad_suite::small_config(), rng);
    SweepOptions opt;
    opt.axis = SweepAxis::walk_length;
    opt.values = {0.1, 0.5};
    opt.seeds = 4;
    for (const SweepPoint& pt : ablation_sweep(ds, &p, opt)) {
        double mean = 0.0;
        for (double a : pt.per_seed) mean += a;
        mean /= 4.0;
        double ss = 0.0;
        for (double a : pt.per_seed) ss += (a - mean) * (a - mean);
        EXPECT_NEAR(pt.mean, mean, 1e-15);
        EXPECT_NEAR(pt.stddev, std::sqrt(ss / 3.0), 1e-15);
    }
    EXPECT_THROW(ablation_sweep(ds, nullptr, opt), std::invalid_argument);
    EXPECT_EQ(sweep_axis_from_string("train_size"), SweepAxis::train_size);
}
