#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "strider/datagen.hpp"
#include "strider/dataset.hpp"
#include "strider/errors.hpp"

using namespace strider;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Dataset, SaveLoadRoundTrip) {
    DatasetSpec spec;
    spec.families = {ShapeFamily::dumbbell};
    spec.task = TaskKind::segmentation;
    spec.per_class = 3;
    spec.target_faces = 120;
    const Dataset ds = generate_dataset(spec);
    const fs::path dir = fresh_dir("strider_dataset_rt");
    save_dataset(ds, dir);
    const Dataset back = load_dataset(dir);
    EXPECT_EQ(back.task, ds.task);
    EXPECT_EQ(back.num_classes, ds.num_classes);
    EXPECT_EQ(back.class_names, ds.class_names);
    ASSERT_EQ(back.samples.size(), ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        EXPECT_EQ(back.samples[i].name, ds.samples[i].name);
        EXPECT_EQ(back.samples[i].split, ds.samples[i].split);
        EXPECT_EQ(back.samples[i].variant, ds.samples[i].variant);
        EXPECT_EQ(back.samples[i].mesh.faces(), ds.samples[i].mesh.faces());
        EXPECT_EQ(back.samples[i].labels.vertex_segments, ds.samples[i].labels.vertex_segments);
    }
    EXPECT_EQ(load_dataset(dir / manifest_filename).samples.size(), ds.samples.size());
}

TEST(Dataset, SplitCounts) {
    DatasetSpec spec;
    spec.families = {ShapeFamily::icosphere, ShapeFamily::box};
    spec.per_class = 5;
    spec.target_faces = 0;
    const Dataset ds = generate_dataset(spec);
    EXPECT_EQ(ds.count(Split::train), 8u);
    EXPECT_EQ(ds.count(Split::test), 2u);
    EXPECT_EQ(ds.split(Split::test).size(), 2u);
}

TEST(Manifest, UnknownKeyReportsLine) {
    const fs::path dir = fresh_dir("strider_manifest_bad");
    write(dir / manifest_filename, "strider-manifest 1\ntask classification\nclasses 2\nshape foo\n");
    try {
        load_dataset(dir);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
        EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos);
    }
}

TEST(Manifest, HeaderAndTaskRequired) {
    const fs::path dir = fresh_dir("strider_manifest_header");
    write(dir / manifest_filename, "task classification\n");
    EXPECT_THROW(load_dataset(dir), ParseError);
    write(dir / manifest_filename, "strider-manifest 2\n");
    EXPECT_THROW(load_dataset(dir), ParseError);
    write(dir / manifest_filename, "# nothing\n");
    EXPECT_THROW(load_dataset(dir), DataError);
    EXPECT_THROW(load_dataset(dir / "missing"), DataError);
}

TEST(Manifest, LabelOutOfRangeIsDataError) {
    const fs::path dir = fresh_dir("strider_manifest_label");
    write(dir / "t.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    write(dir / "t.txt", "class 5\n");
    write(dir / manifest_filename, "strider-manifest 1\ntask classification\nclasses 2 a b\nsample train raw t.off t.txt\n");
    EXPECT_THROW(load_dataset(dir), DataError);
}

TEST(Dataset, ValidateCatchesTaskMismatch) {
    Dataset ds;
    ds.task = TaskKind::segmentation;
    ds.num_classes = 2;
    ds.samples.push_back({"a", Mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}}),
                          MeshLabels::classification(1), Split::train, "raw"});
    EXPECT_THROW(ds.validate(), DataError);
    EXPECT_THROW(split_from_string("validation"), DataError);
}
