#include "strider/dataset.hpp"

#include <fstream>
#include <sstream>

#include "strider/errors.hpp"

namespace strider {

const char* to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    throw DataError("unknown split '" + name + "' (expected train or test)");
}

std::vector<const Sample*> Dataset::split(Split which) const {
    std::vector<const Sample*> out;
    for (const Sample& s : samples) {
        if (s.split == which) out.push_back(&s);
    }
    return out;
}

std::size_t Dataset::count(Split which) const {
    std::size_t n = 0;
    for (const Sample& s : samples) n += s.split == which ? 1 : 0;
    return n;
}

void Dataset::validate() const {
    if (num_classes < 2) throw DataError("dataset declares fewer than 2 classes");
    if (!class_names.empty() && class_names.size() != static_cast<std::size_t>(num_classes)) {
        throw DataError("dataset class name count does not match class count");
    }
    for (const Sample& s : samples) {
        const bool seg = s.labels.is_segmentation();
        if (seg != (task == TaskKind::segmentation)) {
            throw DataError("sample '" + s.name + "' has " + (seg ? "segmentation" : "classification") +
                            " labels but the dataset task is " + strider::to_string(task));
        }
        try {
            s.labels.validate(num_classes, s.mesh.vertex_count());
        } catch (const DataError& e) {
            throw DataError("sample '" + s.name + "': " + e.what());
        }
    }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "meshes");
    fs::create_directories(dir / "labels");
    std::ofstream manifest(dir / manifest_filename, std::ios::binary);
    if (!manifest) throw DataError("cannot write manifest in " + dir.string());
    manifest << "strider-manifest 1\n";
    manifest << "task " << to_string(dataset.task) << '\n';
    manifest << "classes " << dataset.num_classes;
    for (const auto& name : dataset.class_names) manifest << ' ' << name;
    manifest << '\n';
    for (const Sample& s : dataset.samples) {
        const fs::path mesh_rel = fs::path("meshes") / (s.name + ".off");
        const fs::path label_rel = fs::path("labels") / (s.name + ".txt");
        save_off(s.mesh, dir / mesh_rel);
        save_labels(s.labels, dir / label_rel);
        manifest << "sample " << to_string(s.split) << ' ' << s.variant << ' ' << mesh_rel.generic_string() << ' '
                 << label_rel.generic_string() << '\n';
    }
    if (!manifest) throw DataError("failed writing manifest in " + dir.string());
}

Dataset load_dataset(const std::filesystem::path& manifest_or_dir) {
    namespace fs = std::filesystem;
    const fs::path manifest_path =
        fs::is_directory(manifest_or_dir) ? manifest_or_dir / manifest_filename : manifest_or_dir;
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest " + manifest_path.string());
    const fs::path base = manifest_path.parent_path();

    Dataset ds;
    bool have_header = false;
    bool have_task = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;
        auto fail = [&](const std::string& what) { throw ParseError(manifest_path.string(), line_no, what); };
        if (!have_header) {
            int version = 0;
            if (key != "strider-manifest" || !(ss >> version)) fail("missing 'strider-manifest <version>' header");
            if (version != 1) fail("unsupported manifest version " + std::to_string(version));
            have_header = true;
        } else if (key == "task") {
            std::string task;
            if (!(ss >> task)) fail("expected task name");
            try {
                ds.task = task_from_string(task);
            } catch (const std::invalid_argument& e) {
                fail(e.what());
            }
            have_task = true;
        } else if (key == "classes") {
            if (!(ss >> ds.num_classes)) fail("expected class count");
            std::string name;
            while (ss >> name) ds.class_names.push_back(name);
        } else if (key == "sample") {
            std::string split;
            std::string variant;
            std::string mesh_rel;
            std::string label_rel;
            if (!(ss >> split >> variant >> mesh_rel >> label_rel)) fail("expected 'sample <split> <variant> <mesh> <labels>'");
            Sample s;
            s.split = split_from_string(split);
            s.variant = variant;
            s.name = fs::path(mesh_rel).stem().string();
            s.mesh = load_mesh(base / mesh_rel);
            s.labels = load_labels(base / label_rel);
            ds.samples.push_back(std::move(s));
        } else {
            fail("unknown manifest key '" + key + "'");
        }
    }
    if (!have_header) throw DataError("empty manifest " + manifest_path.string());
    if (!have_task) throw DataError("manifest " + manifest_path.string() + " has no task line");
    ds.validate();
    return ds;
}

}  // namespace strider
