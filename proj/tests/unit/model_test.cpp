#include <gtest/gtest.h>

#include <cmath>

#include "grad_suite.hpp"
#include "strider/model.hpp"

using namespace strider;

namespace {

/// Parameter count from layer widths: FC in*out+out, norm 2*ch, GRU
/// 3H(in+H+1).
std::size_t count_from_widths(std::size_t in, std::size_t f1, std::size_t f2, const std::vector<std::size_t>& gru,
                              std::size_t classes) {
    std::size_t n = in * f1 + f1 + 2 * f1 + f1 * f2 + f2 + 2 * f2;
    std::size_t prev = f2;
    for (std::size_t h : gru) {
        n += 3 * h * (prev + h + 1);
        prev = h;
    }
    return n + prev * classes + classes;
}

WalkFeatures random_walk(std::size_t len, Rng& rng) {
    WalkFeatures f(static_cast<Eigen::Index>(len), 3);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.uniform(-0.2, 0.2);
    f.row(0).setZero();
    return f;
}

Walk path_walk(std::size_t len) {
    Walk w;
    for (std::size_t i = 0; i < len; ++i) {
        w.vertices.push_back(i);
        w.jump_flags.push_back(false);
    }
    return w;
}

}  // namespace

TEST(ParamCount, FullConfigMatchesWidthFormula) {
    const ModelConfig c = ModelConfig::full(30);
    const std::size_t expected = count_from_widths(3, 128, 256, {1024, 1024, 512}, 30);
    EXPECT_EQ(expected, 12640286u);
    EXPECT_EQ(param_count(c), expected);
    EXPECT_LT(std::abs(static_cast<double>(expected) - 12.7e6) / 12.7e6, 0.01);
    Rng rng(0);
    EXPECT_EQ(param_count(NetParams::initialize(c, rng)), expected);
}

TEST(ParamCount, EachClassAddsOutputRow) {
    EXPECT_EQ(param_count(ModelConfig::full(31)) - param_count(ModelConfig::full(30)), 513u);
    const ModelConfig tiny = ModelConfig::tiny(4);
    EXPECT_EQ(param_count(tiny), count_from_widths(3, 32, 64, {128, 128, 64}, 4));
}

TEST(ParamCount, SmallerGruMeansFewerParameters) {
    ModelConfig half = ModelConfig::full(30);
    for (auto& h : half.gru) h /= 2;
    EXPECT_LT(param_count(half), param_count(ModelConfig::full(30)));
}

TEST(ModelConfig, ValidateRejectsBadWidths) {
    ModelConfig c = ModelConfig::tiny(3);
    EXPECT_NO_THROW(c.validate());
    c.gru.clear();
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = ModelConfig::tiny(1);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(task_from_string("detection"), std::invalid_argument);
    EXPECT_EQ(task_from_string("segmentation"), TaskKind::segmentation);
}

TEST(NetParams, InitializationIsSeededAndNormGainsAreOne) {
    const ModelConfig c = grad_suite::small_config();
    Rng a(5), b(5), d(6);
    const NetParams pa = NetParams::initialize(c, a), pb = NetParams::initialize(c, b), pd = NetParams::initialize(c, d);
    EXPECT_EQ(pa.fc1.weight.values(), pb.fc1.weight.values());
    EXPECT_NE(pa.fc1.weight.values(), pd.fc1.weight.values());
    for (double g : pa.in1.gain.values()) EXPECT_EQ(g, 1.0);
    for (double s : pa.in2.shift.values()) EXPECT_EQ(s, 0.0);
    EXPECT_EQ(pa.tensors().size(), pa.tensor_names().size());
}

TEST(Forward, OneRowOfLogitsPerStep) {
    Rng rng(1);
    const NetParams p = NetParams::initialize(grad_suite::small_config(), rng);
    const StepLogits l = forward(random_walk(7, rng), p);
    EXPECT_EQ(l.rows(), 7);
    EXPECT_EQ(l.cols(), 3);
    EXPECT_TRUE(l.allFinite());
}

TEST(Forward, BatchEqualsIndividualWalksInAnyOrder) {
    Rng rng(2);
    const NetParams p = NetParams::initialize(grad_suite::small_config(), rng);
    std::vector<WalkFeatures> walks;
    for (std::size_t len : {5u, 9u, 1u, 9u, 3u}) walks.push_back(random_walk(len, rng));
    const ForwardCache batch = forward_batch(p, walks);
    std::vector<WalkFeatures> reversed(walks.rbegin(), walks.rend());
    const ForwardCache rev = forward_batch(p, reversed);
    for (std::size_t i = 0; i < walks.size(); ++i) {
        const StepLogits single = forward(walks[i], p);
        EXPECT_LT((batch.walk_logits(i) - single).cwiseAbs().maxCoeff(), 1e-12) << i;
        EXPECT_LT((rev.walk_logits(walks.size() - 1 - i) - single).cwiseAbs().maxCoeff(), 1e-12) << i;
    }
}

TEST(Forward, StepOrderMatters) {
    Rng rng(3);
    const NetParams p = NetParams::initialize(grad_suite::small_config(), rng);
    const WalkFeatures f = random_walk(8, rng);
    const WalkFeatures r = f.colwise().reverse();
    EXPECT_GT((forward(f, p).bottomRows(1) - forward(r, p).bottomRows(1)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Loss, ClassificationUsesFinalStepOnly) {
    StepLogits logits = StepLogits::Zero(4, 4);
    logits(0, 1) = 50.0;
    const LossResult r = classification_loss(logits, 2);
    EXPECT_NEAR(r.loss, std::log(4.0), 1e-12);
    EXPECT_TRUE(r.grad.topRows(3).isZero(0.0));
    EXPECT_NEAR(r.grad(3, 2), 0.25 - 1.0, 1e-12);
}

TEST(Loss, SegmentationCoversSecondHalf) {
    EXPECT_EQ(second_half_begin(2), 1u);
    EXPECT_EQ(second_half_begin(5), 3u);
    EXPECT_EQ(second_half_begin(1), 1u);
    EXPECT_EQ(second_half_begin(4), 2u);

    const std::vector<int> seg{0, 1, 2, 1, 0};
    StepLogits logits = StepLogits::Zero(5, 3);
    logits(3, 1) = 40.0;  // step 3 visits vertex 3 (label 1): near-zero loss
    const LossResult r = segmentation_loss(logits, path_walk(5), seg);
    EXPECT_NEAR(r.loss, 0.5 * std::log(3.0), 1e-9);
    EXPECT_TRUE(r.grad.topRows(3).isZero(0.0));
    EXPECT_NEAR(r.grad(4, 0), 0.5 * (1.0 / 3.0 - 1.0), 1e-12);

    const LossResult two = segmentation_loss(StepLogits::Zero(2, 3), path_walk(2), seg);
    EXPECT_NEAR(two.loss, std::log(3.0), 1e-12);
    EXPECT_TRUE(two.grad.row(0).isZero(0.0));
}

TEST(Backward, FullNetworkMatchesFiniteDifferences) {
    for (const auto& r : grad_suite::full_network(17)) {
        EXPECT_LT(r.report.max_error, 1e-4) << r.name << " worst " << r.report.worst_index;
    }
}

TEST(Backward, NonFinalStepsGetNoGradientInClassification) {
    Rng rng(4);
    const NetParams p = NetParams::initialize(grad_suite::small_config(), rng);
    std::vector<WalkFeatures> walks{random_walk(6, rng)};
    const ForwardCache cache = forward_batch(p, walks);
    const LossResult loss = classification_loss(cache.walk_logits(0), 1);
    // a packed batch of one walk has the same row order as the walk
    NetParams grads = p.zeros_like();
    backward_batch(p, cache, loss.grad, grads);
    EXPECT_TRUE(grads.all_finite());
    EXPECT_GT(grads.out.weight.matrix().cwiseAbs().maxCoeff(), 0.0);
}
