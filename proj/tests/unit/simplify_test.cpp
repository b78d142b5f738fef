#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "strider/datagen.hpp"
#include "strider/simplify.hpp"

using namespace strider;

namespace {

Mesh icosphere(std::size_t subdivisions) {
    ShapeSpec s;
    s.family = ShapeFamily::icosphere;
    s.subdivisions = subdivisions;
    return generate_shape(s).mesh;
}

/// [p 1] Q [p 1]^T written out term by term.
double direct_quadric_error(const Eigen::Matrix4d& q, const Vec3& p) {
    const double h[4] = {p.x(), p.y(), p.z(), 1.0};
    double e = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) e += h[i] * q(i, j) * h[j];
    }
    return e;
}

VertexQuadric random_planes(Rng& rng, int count) {
    VertexQuadric q;
    for (int i = 0; i < count; ++i) {
        const Vec3 n(rng.normal(), rng.normal(), rng.normal());
        q += VertexQuadric::from_plane(n, rng.uniform(-1, 1));
    }
    return q;
}

}  // namespace

TEST(Quadric, PlaneQuadricMeasuresSquaredDistance) {
    const VertexQuadric q = VertexQuadric::from_plane(Vec3(0, 0, 2), -2.0);  // z = 1
    EXPECT_NEAR(q.error(Vec3(5, -3, 1)), 0.0, 1e-15);
    EXPECT_NEAR(q.error(Vec3(0, 0, 4)), 9.0, 1e-12);
    EXPECT_TRUE(q.is_valid());
}

TEST(Quadric, DegenerateTriangleGivesZero) {
    const VertexQuadric q = VertexQuadric::from_triangle(Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2));
    EXPECT_TRUE(q.matrix().isZero(0.0));
}

TEST(CollapseCost, CoplanarNeighborhoodCostsNothing) {
    VertexQuadric q1 = VertexQuadric::from_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
    q1 += VertexQuadric::from_triangle(Vec3(0, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0));
    const VertexQuadric q2 = VertexQuadric::from_triangle(Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0));
    const CollapseCandidate c = collapse_cost(q1, q2, Vec3(0, 0, 0), Vec3(1, 0, 0));
    EXPECT_NEAR(c.cost, 0.0, 1e-15);
    EXPECT_NEAR(c.position.z(), 0.0, 1e-12);
    // planes alone leave the 3x3 system singular, so the optimum is skipped
    EXPECT_NE(c.placement, Placement::optimal);
}

TEST(CollapseCost, SinglePlanePlacesOnPlane) {
    const VertexQuadric q = VertexQuadric::from_plane(Vec3(0, 0, 1), 0.0);
    const CollapseCandidate c = collapse_cost(q, VertexQuadric{}, Vec3(0, 0, 0.5), Vec3(1, 0, -0.1));
    EXPECT_EQ(c.placement, Placement::endpoint_b);
    EXPECT_NEAR(c.cost, 0.01, 1e-12);
}

TEST(CollapseCost, RandomQuadricsMatchDirectEvaluationAndAreMinimal) {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const VertexQuadric q1 = random_planes(rng, 3), q2 = random_planes(rng, 3);
        ASSERT_TRUE(q1.is_valid());
        const Vec3 pa(rng.normal(), rng.normal(), rng.normal()), pb(rng.normal(), rng.normal(), rng.normal());
        const CollapseCandidate c = collapse_cost(q1, q2, pa, pb);
        const Eigen::Matrix4d q = q1.matrix() + q2.matrix();
        const double scale = std::max(1.0, std::abs(c.cost));
        ASSERT_NEAR(c.cost, direct_quadric_error(q, c.position), 1e-10 * scale);
        for (const Vec3& other : {pa, pb, Vec3(0.5 * (pa + pb))}) {
            ASSERT_LE(c.cost, direct_quadric_error(q, other) + 1e-10 * scale);
        }
        if (c.placement == Placement::optimal) {
            for (int k = 0; k < 10; ++k) {
                const Vec3 nudge = c.position + 1e-3 * Vec3(rng.normal(), rng.normal(), rng.normal());
                ASSERT_LE(c.cost, direct_quadric_error(q, nudge) + 1e-10 * scale);
            }
        }
    }
}

TEST(CollapseCost, EndpointsOnlyNeverMovesVertex) {
    Rng rng(2);
    const VertexQuadric q1 = random_planes(rng, 4), q2 = random_planes(rng, 4);
    const Vec3 pa(0.1, 0.2, 0.3), pb(-0.3, 0.0, 0.9);
    const CollapseCandidate c = collapse_cost(q1, q2, pa, pb, true);
    EXPECT_TRUE(c.placement == Placement::endpoint_a || c.placement == Placement::endpoint_b);
    EXPECT_TRUE(c.position == pa || c.position == pb);
}

TEST(Simplify, TargetAtOrAboveFaceCountIsIdentity) {
    const Mesh m = fixtures::tetrahedron();
    for (std::size_t target : {4u, 5u, 1000u}) {
        const SimplifyResult r = simplify_to_face_count(m, target);
        EXPECT_EQ(r.mesh.vertices(), m.vertices());
        EXPECT_EQ(r.mesh.faces(), m.faces());
        EXPECT_EQ(r.collapses, 0u);
        EXPECT_TRUE(r.reached_target);
    }
    EXPECT_THROW(simplify_to_face_count(m, 0), std::invalid_argument);
}

TEST(Simplify, IcosphereStaysClosedManifold) {
    for (auto [subdiv, target] : {std::pair<std::size_t, std::size_t>{2, 80}, {3, 320}}) {
        const Mesh in = icosphere(subdiv);
        const SimplifyResult r = simplify_to_face_count(in, target);
        EXPECT_TRUE(r.reached_target);
        EXPECT_LE(r.mesh.face_count(), target);
        EXPECT_GE(r.mesh.face_count(), target - 2);
        EXPECT_TRUE(fixtures::is_closed_manifold(r.mesh));
        EXPECT_TRUE(fixtures::is_consistently_oriented(r.mesh));
        EXPECT_EQ(fixtures::euler_characteristic(r.mesh), 2);
        EXPECT_FALSE(fixtures::has_degenerate_face(r.mesh));
        for (const Vec3& p : r.mesh.vertices()) EXPECT_NEAR(p.norm(), 1.0, 0.1);
    }
}

TEST(Simplify, CorpusKeepsTopologyAndAvoidsDegenerateFaces) {
    const ShapeFamily families[] = {ShapeFamily::icosphere, ShapeFamily::box, ShapeFamily::torus, ShapeFamily::cylinder,
                                    ShapeFamily::dumbbell};
    for (std::size_t i = 0; i < 100; ++i) {
        const ShapeSpec spec = random_instance(families[i % 5], i, 0.3, 1234);
        const Mesh in = generate_shape(spec).mesh;
        const std::size_t target = std::max<std::size_t>(in.face_count() / (2 + i % 4), 40);
        const SimplifyResult r = simplify_to_face_count(in, target);
        SCOPED_TRACE(to_string(spec.family) + std::string(" #") + std::to_string(i));
        ASSERT_LE(r.mesh.face_count(), target);
        ASSERT_TRUE(fixtures::is_closed_manifold(r.mesh));
        ASSERT_TRUE(fixtures::is_consistently_oriented(r.mesh));
        ASSERT_EQ(fixtures::euler_characteristic(r.mesh), fixtures::euler_characteristic(in));
        ASSERT_FALSE(fixtures::has_degenerate_face(r.mesh));
        ASSERT_EQ(r.source_vertex.size(), r.mesh.vertex_count());
        for (std::size_t v = 0; v < r.mesh.vertex_count(); ++v) {
            ASSERT_LT(r.source_vertex[v], in.vertex_count());
            ASSERT_TRUE(r.mesh.position(v).allFinite());
        }
    }
}

TEST(Simplify, Deterministic) {
    const Mesh in = generate_shape(random_instance(ShapeFamily::dumbbell, 3, 0.2, 8)).mesh;
    const SimplifyResult a = simplify_to_face_count(in, 200);
    const SimplifyResult b = simplify_to_face_count(in, 200);
    EXPECT_EQ(a.mesh.content_hash(), b.mesh.content_hash());
    EXPECT_EQ(a.source_vertex, b.source_vertex);
}

TEST(Simplify, LabelsFollowSurvivingVertices) {
    const GeneratedShape g = generate_shape(random_instance(ShapeFamily::dumbbell, 0, 0.0, 1));
    const SimplifyResult r = simplify_to_face_count(g.mesh, 300);
    const std::vector<int> labels = transfer_vertex_labels(r, *g.segments);
    ASSERT_EQ(labels.size(), r.mesh.vertex_count());
    for (std::size_t v = 0; v < labels.size(); ++v) EXPECT_EQ(labels[v], (*g.segments)[r.source_vertex[v]]);
    std::set<int> parts(labels.begin(), labels.end());
    EXPECT_EQ(parts.size(), 3u);
}
