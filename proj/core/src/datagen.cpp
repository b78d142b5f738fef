#include "strider/datagen.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "strider/pipeline.hpp"

namespace strider {

const char* to_string(ShapeFamily family) {
    switch (family) {
        case ShapeFamily::icosphere: return "icosphere";
        case ShapeFamily::box: return "box";
        case ShapeFamily::torus: return "torus";
        case ShapeFamily::cylinder: return "cylinder";
        case ShapeFamily::dumbbell: return "dumbbell";
    }
    return "?";
}

ShapeFamily family_from_string(const std::string& name) {
    for (auto f : {ShapeFamily::icosphere, ShapeFamily::box, ShapeFamily::torus, ShapeFamily::cylinder, ShapeFamily::dumbbell}) {
        if (name == to_string(f)) return f;
    }
    throw std::invalid_argument("unknown shape family '" + name + "' (expected icosphere, box, torus, cylinder or dumbbell)");
}

void ShapeSpec::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("ShapeSpec: " + what); };
    if (!(jitter >= 0.0 && jitter <= 0.5)) fail("jitter must be in [0, 0.5]");
    switch (family) {
        case ShapeFamily::icosphere:
        case ShapeFamily::box:
            if (!(extents.minCoeff() > 0.0)) fail("extents must be positive");
            if (family == ShapeFamily::box && box_cells == 0) fail("box_cells must be positive");
            if (family == ShapeFamily::icosphere && subdivisions > 7) fail("subdivisions above 7 are not supported");
            break;
        case ShapeFamily::torus:
            if (!(radius > 0.0)) fail("radius must be positive");
            if (!(tube_ratio > 0.0 && tube_ratio < 1.0)) fail("tube_ratio must be in (0, 1)");
            if (around < 3 || along < 3) fail("torus needs at least 3 segments each way");
            break;
        case ShapeFamily::cylinder:
            if (!(radius > 0.0 && aspect > 0.0)) fail("radius and aspect must be positive");
            if (around < 3 || along < 1) fail("cylinder needs around >= 3 and along >= 1");
            break;
        case ShapeFamily::dumbbell:
            if (!(radius > 0.0 && aspect > 0.0)) fail("radius and aspect must be positive");
            if (!(bulb_ratio > 0.0)) fail("bulb_ratio must be positive");
            if (!(handle_ratio > 0.0 && handle_ratio < std::min(1.0, bulb_ratio))) {
                fail("handle_ratio must be positive and thinner than both bulbs");
            }
            if (around < 3 || along < 8) fail("dumbbell needs around >= 3 and along >= 8");
            break;
    }
}

namespace {

constexpr double pi = std::numbers::pi;

struct RawMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
};

/// Flips every face if the enclosed signed volume is negative.
void orient_outward(RawMesh& m) {
    double volume = 0.0;
    for (const Face& f : m.faces) volume += m.vertices[f[0]].dot(m.vertices[f[1]].cross(m.vertices[f[2]]));
    if (volume < 0.0) {
        for (Face& f : m.faces) std::swap(f[1], f[2]);
    }
}

RawMesh icosphere(std::size_t subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    RawMesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3& v : m.vertices) v.normalize();
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
               {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (std::size_t level = 0; level < subdivisions; ++level) {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoint;
        auto mid = [&](std::size_t a, std::size_t b) {
            const auto key = std::minmax(a, b);
            auto [it, inserted] = midpoint.try_emplace({key.first, key.second}, m.vertices.size());
            if (inserted) m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
            return it->second;
        };
        std::vector<Face> next;
        next.reserve(m.faces.size() * 4);
        for (const Face& f : m.faces) {
            const std::size_t ab = mid(f[0], f[1]);
            const std::size_t bc = mid(f[1], f[2]);
            const std::size_t ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    return m;
}

RawMesh box(std::size_t n) {
    RawMesh m;
    std::map<std::array<std::size_t, 3>, std::size_t> index;
    auto vertex = [&](const std::array<std::size_t, 3>& c) {
        auto [it, inserted] = index.try_emplace(c, m.vertices.size());
        if (inserted) {
            m.vertices.emplace_back(static_cast<double>(c[0]) / static_cast<double>(n) - 0.5,
                                    static_cast<double>(c[1]) / static_cast<double>(n) - 0.5,
                                    static_cast<double>(c[2]) / static_cast<double>(n) - 0.5);
        }
        return it->second;
    };
    for (std::size_t d = 0; d < 3; ++d) {
        const std::size_t u = (d + 1) % 3;
        const std::size_t v = (d + 2) % 3;
        for (std::size_t side : {std::size_t{0}, n}) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    auto at = [&](std::size_t a, std::size_t b) {
                        std::array<std::size_t, 3> c{};
                        c[d] = side;
                        c[u] = a;
                        c[v] = b;
                        return vertex(c);
                    };
                    const std::size_t p00 = at(i, j), p10 = at(i + 1, j), p11 = at(i + 1, j + 1), p01 = at(i, j + 1);
                    if (side == n) {
                        m.faces.push_back({p00, p10, p11});
                        m.faces.push_back({p00, p11, p01});
                    } else {
                        m.faces.push_back({p00, p11, p10});
                        m.faces.push_back({p00, p01, p11});
                    }
                }
            }
        }
    }
    return m;
}

RawMesh torus(double major, double minor, std::size_t around, std::size_t along) {
    RawMesh m;
    for (std::size_t i = 0; i < around; ++i) {
        const double theta = 2.0 * pi * static_cast<double>(i) / static_cast<double>(around);
        for (std::size_t j = 0; j < along; ++j) {
            const double phi = 2.0 * pi * static_cast<double>(j) / static_cast<double>(along);
            const double r = major + minor * std::cos(phi);
            m.vertices.emplace_back(r * std::cos(theta), r * std::sin(theta), minor * std::sin(phi));
        }
    }
    auto id = [&](std::size_t i, std::size_t j) { return (i % around) * along + (j % along); };
    for (std::size_t i = 0; i < around; ++i) {
        for (std::size_t j = 0; j < along; ++j) {
            m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    orient_outward(m);
    return m;
}

/// Closed surface of revolution about the x axis. `profile` holds (x, radius)
/// rings from one pole to the other; the poles sit at `x_start` and `x_end`.
RawMesh revolve(double x_start, const std::vector<Eigen::Vector2d>& profile, double x_end, std::size_t around) {
    RawMesh m;
    m.vertices.emplace_back(x_start, 0.0, 0.0);
    for (const auto& ring : profile) {
        for (std::size_t i = 0; i < around; ++i) {
            const double theta = 2.0 * pi * static_cast<double>(i) / static_cast<double>(around);
            m.vertices.emplace_back(ring.x(), ring.y() * std::cos(theta), ring.y() * std::sin(theta));
        }
    }
    const std::size_t end_pole = m.vertices.size();
    m.vertices.emplace_back(x_end, 0.0, 0.0);
    auto id = [&](std::size_t k, std::size_t i) { return 1 + k * around + (i % around); };
    const std::size_t last = profile.size() - 1;
    for (std::size_t i = 0; i < around; ++i) {
        m.faces.push_back({0, id(0, i), id(0, i + 1)});
        for (std::size_t k = 0; k < last; ++k) {
            m.faces.push_back({id(k, i), id(k + 1, i), id(k + 1, i + 1)});
            m.faces.push_back({id(k, i), id(k + 1, i + 1), id(k, i + 1)});
        }
        m.faces.push_back({end_pole, id(last, i + 1), id(last, i)});
    }
    orient_outward(m);
    return m;
}

RawMesh cylinder(double radius, double height, std::size_t around, std::size_t along) {
    const std::size_t cap_rings = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                                               static_cast<double>(along) * radius / height)));
    std::vector<Eigen::Vector2d> profile;
    const double h = height / 2.0;
    for (std::size_t k = 1; k <= cap_rings; ++k) profile.emplace_back(-h, radius * static_cast<double>(k) / static_cast<double>(cap_rings));
    for (std::size_t k = 1; k < along; ++k) profile.emplace_back(-h + height * static_cast<double>(k) / static_cast<double>(along), radius);
    for (std::size_t k = cap_rings; k >= 1; --k) profile.emplace_back(h, radius * static_cast<double>(k) / static_cast<double>(cap_rings));
    return revolve(-h, profile, h, around);
}

struct Dumbbell {
    RawMesh mesh;
    std::vector<int> segments;
};

Dumbbell dumbbell(const ShapeSpec& s) {
    const double ra = s.radius;
    const double rb = s.bulb_ratio * s.radius;
    const double rh = s.handle_ratio * s.radius;
    const double half = s.aspect * s.radius / 2.0;
    const double xa = -half;  // junction of bulb A and the handle
    const double xb = half;
    const double ca = xa - std::sqrt(ra * ra - rh * rh);
    const double cb = xb + std::sqrt(rb * rb - rh * rh);
    const double ta = pi - std::asin(rh / ra);
    const double tb = pi - std::asin(rh / rb);

    const std::size_t bulb_rings = std::max<std::size_t>(3, s.along * 3 / 8);
    const std::size_t handle_rings = std::max<std::size_t>(2, s.along - 2 * bulb_rings);

    std::vector<Eigen::Vector2d> profile;
    for (std::size_t k = 1; k <= bulb_rings; ++k) {
        const double t = ta * static_cast<double>(k) / static_cast<double>(bulb_rings);
        profile.emplace_back(ca - ra * std::cos(t), ra * std::sin(t));
    }
    for (std::size_t k = 1; k < handle_rings; ++k) {
        profile.emplace_back(xa + (xb - xa) * static_cast<double>(k) / static_cast<double>(handle_rings), rh);
    }
    for (std::size_t k = bulb_rings; k >= 1; --k) {
        const double t = tb * static_cast<double>(k) / static_cast<double>(bulb_rings);
        profile.emplace_back(cb + rb * std::cos(t), rb * std::sin(t));
    }

    Dumbbell out;
    out.mesh = revolve(ca - ra, profile, cb + rb, s.around);
    const double tol = 1e-9 * s.radius;
    for (const Vec3& v : out.mesh.vertices) {
        if (v.x() <= xa + tol) {
            out.segments.push_back(bulb_a);
        } else if (v.x() >= xb - tol) {
            out.segments.push_back(bulb_b);
        } else {
            out.segments.push_back(handle);
        }
    }
    return out;
}

Vec3 face_normal(const std::vector<Vec3>& p, const Face& f) { return (p[f[1]] - p[f[0]]).cross(p[f[2]] - p[f[0]]); }

void apply_jitter(RawMesh& m, double jitter, Rng& rng) {
    if (jitter <= 0.0) return;
    const std::size_t n = m.vertices.size();
    std::vector<double> shortest(n, std::numeric_limits<double>::infinity());
    for (const Face& f : m.faces) {
        for (int k = 0; k < 3; ++k) {
            const std::size_t a = f[k], b = f[(k + 1) % 3];
            const double len = (m.vertices[a] - m.vertices[b]).norm();
            shortest[a] = std::min(shortest[a], len);
            shortest[b] = std::min(shortest[b], len);
        }
    }
    std::vector<Vec3> offset(n, Vec3::Zero());
    for (std::size_t v = 0; v < n; ++v) {
        Vec3 dir(rng.normal(), rng.normal(), rng.normal());
        const double norm = dir.norm();
        if (norm == 0.0 || !std::isfinite(shortest[v])) continue;
        offset[v] = (jitter * shortest[v] * rng.uniform01() / norm) * dir;
    }
    // Shrink the offsets around any face that would flip until none does.
    std::vector<Vec3> moved(n);
    for (int round = 0; round < 60; ++round) {
        for (std::size_t v = 0; v < n; ++v) moved[v] = m.vertices[v] + offset[v];
        bool flipped = false;
        for (const Face& f : m.faces) {
            if (face_normal(m.vertices, f).dot(face_normal(moved, f)) > 0.0) continue;
            flipped = true;
            for (std::size_t v : f) offset[v] *= 0.5;
        }
        if (!flipped) break;
    }
    for (std::size_t v = 0; v < n; ++v) m.vertices[v] += offset[v];
}

}  // namespace

GeneratedShape generate_shape(const ShapeSpec& spec) {
    spec.validate();
    RawMesh raw;
    GeneratedShape out;
    switch (spec.family) {
        case ShapeFamily::icosphere:
            raw = icosphere(spec.subdivisions);
            for (Vec3& v : raw.vertices) v = v.cwiseProduct(spec.extents);
            break;
        case ShapeFamily::box:
            raw = box(spec.box_cells);
            for (Vec3& v : raw.vertices) v = v.cwiseProduct(spec.extents);
            break;
        case ShapeFamily::torus:
            raw = torus(spec.radius, spec.tube_ratio * spec.radius, spec.around, spec.along);
            break;
        case ShapeFamily::cylinder:
            raw = cylinder(spec.radius, spec.aspect * spec.radius, spec.around, spec.along);
            break;
        case ShapeFamily::dumbbell: {
            Dumbbell d = dumbbell(spec);
            raw = std::move(d.mesh);
            out.segments = std::move(d.segments);
            break;
        }
    }
    Rng rng = Rng::stream(spec.seed, 0x7177);
    apply_jitter(raw, spec.jitter, rng);
    out.mesh = Mesh(std::move(raw.vertices), std::move(raw.faces));
    return out;
}

ShapeSpec random_instance(ShapeFamily family, std::size_t index, double jitter, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(family) + 1, index);
    ShapeSpec s;
    s.family = family;
    switch (family) {
        case ShapeFamily::icosphere:
            s.subdivisions = 3;
            s.extents = Vec3(rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2));
            break;
        case ShapeFamily::box:
            s.box_cells = 10;
            s.extents = Vec3(rng.uniform(0.6, 1.4), rng.uniform(0.6, 1.4), rng.uniform(0.6, 1.4));
            break;
        case ShapeFamily::torus:
            s.tube_ratio = rng.uniform(0.25, 0.45);
            s.around = 32;
            s.along = 18;
            break;
        case ShapeFamily::cylinder:
            s.aspect = rng.uniform(1.5, 3.0);
            s.around = 24;
            s.along = 16;
            break;
        case ShapeFamily::dumbbell:
            s.aspect = rng.uniform(1.0, 2.0);
            s.bulb_ratio = rng.uniform(0.6, 0.85);
            s.handle_ratio = rng.uniform(0.25, 0.4);
            s.around = 24;
            s.along = 24;
            break;
    }
    s.jitter = jitter * rng.uniform(0.5, 1.0);
    s.seed = rng.next_u64();
    return s;
}

void DatasetSpec::validate() const {
    if (families.empty()) throw std::invalid_argument("DatasetSpec: no families");
    if (per_class == 0) throw std::invalid_argument("DatasetSpec: per_class must be at least 1");
    if (!(jitter >= 0.0 && jitter <= 0.5)) throw std::invalid_argument("DatasetSpec: jitter must be in [0, 0.5]");
    for (std::size_t i = 0; i < families.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (families[i] == families[j]) throw std::invalid_argument(std::string("DatasetSpec: duplicate family ") + to_string(families[i]));
        }
    }
    if (task == TaskKind::segmentation && (families.size() != 1 || families[0] != ShapeFamily::dumbbell)) {
        throw std::invalid_argument("DatasetSpec: segmentation datasets use the dumbbell family only");
    }
}

Dataset generate_dataset(const DatasetSpec& spec) {
    spec.validate();
    Dataset ds;
    ds.task = spec.task;
    if (spec.task == TaskKind::segmentation) {
        ds.num_classes = 3;
        ds.class_names = {"bulb_a", "handle", "bulb_b"};
    } else {
        ds.num_classes = static_cast<int>(spec.families.size());
        for (auto f : spec.families) ds.class_names.emplace_back(to_string(f));
    }

    const std::size_t n = spec.per_class;
    const std::size_t n_train = (4 * n + 4) / 5;  // ceil(0.8 n)
    for (std::size_t c = 0; c < spec.families.size(); ++c) {
        const ShapeFamily family = spec.families[c];
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng split_rng = Rng::stream(spec.seed, 0x5911, c);
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[split_rng.uniform_index(i)]);
        std::vector<Split> split(n, Split::test);
        for (std::size_t k = 0; k < n_train; ++k) split[order[k]] = Split::train;

        for (std::size_t i = 0; i < n; ++i) {
            GeneratedShape shape = generate_shape(random_instance(family, i, spec.jitter, spec.seed));
            Sample s;
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%03zu", to_string(family), i);
            s.name = name;
            s.mesh = std::move(shape.mesh);
            s.labels = spec.task == TaskKind::segmentation ? MeshLabels::segmentation(std::move(*shape.segments))
                                                           : MeshLabels::classification(static_cast<int>(c));
            s.split = split[i];
            Sample p = preprocess_sample(s, spec.target_faces);
            p.name = s.name;
            ds.samples.push_back(std::move(p));
        }
    }
    return ds;
}

}  // namespace strider
