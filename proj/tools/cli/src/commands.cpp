#include "strider_cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "strider/checkpoint.hpp"
#include "strider/datagen.hpp"
#include "strider/errors.hpp"
#include "strider/pipeline.hpp"
#include "strider_cli/config.hpp"
#include "strider_cli/plot.hpp"

namespace fs = std::filesystem;

namespace strider::cli {

namespace {

/// Every option any subcommand understands; each subcommand binds a subset.
struct Options {
    std::string config;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::string out;

    // gendata
    std::vector<std::string> families{"icosphere", "box", "torus"};
    std::string task = "classification";
    std::size_t per_class = 20;
    double jitter = 0.1;
    std::size_t target_faces = 300;

    // preprocess
    std::string input;
    std::vector<std::size_t> targets;

    // train / eval / classify / segment / sweep
    std::string dataset;
    std::string checkpoint;
    std::string resume;
    std::string model = "full";
    std::size_t iterations = 1000;
    double min_rate = CyclicSchedule{}.min_rate;
    double max_rate = CyclicSchedule{}.max_rate;
    std::uint64_t cycle = CyclicSchedule{}.cycle_size;
    std::size_t meshes_per_batch = 0;
    std::size_t walks_per_mesh = 0;
    double walk_length = 0.0;
    bool rotate = true;
    std::size_t eval_every = 0;
    std::size_t walks = 32;
    std::size_t seg_walks = 0;
    std::string split = "test";
    std::size_t rotations = 0;
    std::vector<std::string> meshes;

    // sweep
    std::string axis = "n_walks";
    std::vector<double> values;
    std::size_t seeds = 3;

    // plot
    std::string title;
    std::vector<std::string> columns;
};

void add_common(CLI::App* sub, Options& o, bool with_seed, bool with_threads) {
    sub->add_option("--config", o.config, "Key-value config file; command-line flags take precedence");
    if (with_seed) sub->add_option("--seed", o.seed, "Random seed");
    if (with_threads) sub->add_option("--threads", o.threads, "Worker threads (1 is bitwise reproducible)")->check(CLI::PositiveNumber);
}

void add_training(CLI::App* sub, Options& o) {
    sub->add_option("--model", o.model, "Network size: full or tiny")->check(CLI::IsMember({"full", "tiny"}));
    sub->add_option("--iterations", o.iterations, "Total optimizer steps (a resumed run continues up to this count)");
    sub->add_option("--min-rate", o.min_rate, "Cyclic learning rate minimum");
    sub->add_option("--max-rate", o.max_rate, "Cyclic learning rate maximum");
    sub->add_option("--cycle", o.cycle, "Cyclic learning rate period in iterations");
    sub->add_option("--meshes-per-batch", o.meshes_per_batch, "Meshes per batch (0: 32 for classification, 8 for segmentation)");
    sub->add_option("--walks-per-mesh", o.walks_per_mesh, "Walks per mesh (0: 1 for classification, 4 for segmentation)");
    sub->add_option("--rotate", o.rotate, "Random rotation augmentation (true/false)");
}

std::optional<double> walk_fraction(const Options& o) {
    if (o.walk_length <= 0.0) return std::nullopt;
    return o.walk_length;
}

void require(const std::string& value, const std::string& key) {
    if (value.empty()) throw ConfigError("missing required option '" + key + "'");
}

void require_path(const std::string& value, const std::string& key) {
    require(value, key);
    if (!fs::exists(value)) throw ConfigError(key + ": '" + value + "' does not exist");
}

fs::path prepare_out_dir(const std::string& dir) {
    require(dir, "out");
    const fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw ConfigError("out: cannot create directory '" + dir + "'");
    return p;
}

/// Writes every option of `sub` as a config file that reproduces the run.
void echo_config(const CLI::App* sub, const fs::path& dir) {
    std::ofstream f(dir / "run_config.txt");
    f << "# strider " << sub->get_name() << "\n";
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto& results = opt->results();
            for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
        } else {
            value = opt->get_default_str();
            if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
        }
        if (value.empty()) continue;
        f << name << " = " << value << "\n";
    }
}

TrainConfig train_config(const Options& o, TaskKind task) {
    TrainConfig tc = task == TaskKind::segmentation ? TrainConfig::segmentation_defaults() : TrainConfig::classification_defaults();
    tc.iterations = o.iterations;
    tc.schedule.min_rate = o.min_rate;
    tc.schedule.max_rate = o.max_rate;
    tc.schedule.cycle_size = o.cycle;
    if (o.meshes_per_batch) tc.meshes_per_batch = o.meshes_per_batch;
    if (o.walks_per_mesh) tc.walks_per_mesh = o.walks_per_mesh;
    tc.walk_length_fraction = walk_fraction(o);
    tc.rotate = o.rotate;
    tc.seed = o.seed;
    tc.threads = o.threads;
    tc.eval_every = o.eval_every;
    tc.eval.n_walks = o.walks;
    tc.eval.seg_walks = o.seg_walks;
    tc.eval.walk_length_fraction = walk_fraction(o);
    tc.eval.seed = o.seed;
    return tc;
}

ModelConfig model_config(const Options& o, const Dataset& ds) {
    const auto classes = static_cast<std::size_t>(ds.num_classes);
    return o.model == "tiny" ? ModelConfig::tiny(classes, ds.task) : ModelConfig::full(classes, ds.task);
}

EvalOptions eval_options(const Options& o) {
    EvalOptions e;
    e.n_walks = o.walks;
    e.seg_walks = o.seg_walks;
    e.walk_length_fraction = walk_fraction(o);
    e.seed = o.seed;
    e.threads = o.threads;
    return e;
}

void check_compatible(const NetParams& params, const Dataset& ds) {
    if (params.config.task != ds.task) {
        throw DataError(std::string("checkpoint was trained for ") + to_string(params.config.task) + " but the dataset is " +
                        to_string(ds.task));
    }
    if (params.config.num_classes != static_cast<std::size_t>(ds.num_classes)) {
        throw DataError("checkpoint has " + std::to_string(params.config.num_classes) + " classes, dataset has " +
                        std::to_string(ds.num_classes));
    }
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// ---------------------------------------------------------------------------

int cmd_gendata(const CLI::App* sub, const Options& o, std::ostream& out) {
    const fs::path dir = prepare_out_dir(o.out);
    DatasetSpec spec;
    for (const auto& f : o.families) spec.families.push_back(family_from_string(f));
    spec.task = task_from_string(o.task);
    spec.per_class = o.per_class;
    spec.jitter = o.jitter;
    spec.seed = o.seed;
    spec.target_faces = o.target_faces;
    spec.validate();
    const Dataset ds = generate_dataset(spec);
    save_dataset(ds, dir);
    echo_config(sub, dir);
    out << "wrote " << ds.samples.size() << " meshes (" << ds.count(Split::train) << " train, " << ds.count(Split::test)
        << " test) to " << (dir / manifest_filename).string() << "\n";
    return exit_ok;
}

struct LooseMesh {
    fs::path path;
    std::string class_name;
    Split split = Split::train;
};

std::vector<LooseMesh> scan_meshes(const fs::path& root) {
    std::vector<LooseMesh> found;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext != ".off" && ext != ".obj" && ext != ".OFF" && ext != ".OBJ") continue;
        LooseMesh m;
        m.path = entry.path();
        // <root>/<class>/[train|test/]<mesh>
        fs::path parent = fs::relative(entry.path().parent_path(), root);
        if (parent.filename() == "train" || parent.filename() == "test") {
            m.split = parent.filename() == "test" ? Split::test : Split::train;
            parent = parent.parent_path();
        }
        m.class_name = parent.empty() || parent == "." ? "unlabeled" : parent.generic_string();
        found.push_back(std::move(m));
    }
    std::sort(found.begin(), found.end(), [](const LooseMesh& a, const LooseMesh& b) { return a.path < b.path; });
    return found;
}

int cmd_preprocess(const CLI::App* sub, const Options& o, std::ostream& out, std::ostream& err) {
    require_path(o.input, "input");
    if (!fs::is_directory(o.input)) throw ConfigError("input: '" + o.input + "' is not a directory");
    if (o.targets.empty()) throw ConfigError("missing required option 'targets'");
    const fs::path dir = prepare_out_dir(o.out);

    Dataset result;
    std::size_t inputs = 0;
    std::size_t failures = 0;
    if (fs::exists(fs::path(o.input) / manifest_filename)) {
        const Dataset ds = load_dataset(o.input);
        inputs = ds.samples.size();
        result = preprocess_dataset(ds, o.targets);
    } else {
        const auto found = scan_meshes(o.input);
        if (found.empty()) throw DataError("input: no .off or .obj meshes found in '" + o.input + "'");
        inputs = found.size();
        std::vector<std::string> names;
        for (const auto& m : found) {
            if (std::find(names.begin(), names.end(), m.class_name) == names.end()) names.push_back(m.class_name);
        }
        std::sort(names.begin(), names.end());
        result.task = TaskKind::classification;
        result.num_classes = static_cast<int>(names.size());
        result.class_names = names;
        for (const auto& m : found) {
            try {
                Sample s;
                s.mesh = load_mesh(m.path);
                s.name = fs::relative(m.path, o.input).replace_extension().generic_string();
                std::replace(s.name.begin(), s.name.end(), '/', '_');
                s.split = m.split;
                const auto cls = std::find(names.begin(), names.end(), m.class_name) - names.begin();
                s.labels = MeshLabels::classification(static_cast<int>(cls));
                for (std::size_t target : o.targets) {
                    Sample p = preprocess_sample(s, target);
                    p.name = s.name + "_" + p.variant;
                    result.samples.push_back(std::move(p));
                }
            } catch (const DataError& e) {
                ++failures;
                err << "skipping " << m.path.string() << ": " << e.what() << "\n";
            }
        }
        if (failures == inputs) throw DataError("all " + std::to_string(inputs) + " input meshes failed to load");
    }
    save_dataset(result, dir);
    echo_config(sub, dir);
    out << "preprocessed " << (inputs - failures) << " of " << inputs << " meshes into " << result.samples.size()
        << " variants at " << (dir / manifest_filename).string() << "\n";
    return exit_ok;
}

int cmd_train(const CLI::App* sub, const Options& o, std::ostream& out) {
    require_path(o.dataset, "dataset");
    if (!o.resume.empty()) require_path(o.resume, "resume");
    const fs::path dir = prepare_out_dir(o.out);
    const Dataset ds = load_dataset(o.dataset);

    std::optional<Checkpoint> resume;
    ModelConfig mc = model_config(o, ds);
    if (!o.resume.empty()) {
        resume = load_checkpoint(o.resume);
        mc = resume->params.config;
    }
    const TrainConfig tc = train_config(o, ds.task);
    tc.validate();
    echo_config(sub, dir);

    const fs::path metrics_path = dir / "metrics.csv";
    const bool append = resume && fs::exists(metrics_path);
    std::ofstream metrics(metrics_path, append ? std::ios::app : std::ios::trunc);
    if (!append) metrics << metrics_csv_header() << "\n";
    const std::size_t report_every = std::max<std::size_t>(1, tc.iterations / 20);
    std::size_t seen = 0;
    const TrainResult result = train(ds, mc, tc,
                                     [&](const MetricsRow& row) {
                                         metrics << metrics_csv_row(row) << "\n" << std::flush;
                                         if (++seen % report_every == 0 || row.eval_accuracy) {
                                             out << "iteration " << row.iteration + 1 << " loss " << fmt(row.loss);
                                             if (row.eval_accuracy) out << " eval_accuracy " << fmt(*row.eval_accuracy);
                                             out << "\n" << std::flush;
                                         }
                                     },
                                     resume ? &*resume : nullptr);
    save_checkpoint(result.checkpoint, dir / "checkpoint.bin");
    out << "checkpoint " << (dir / "checkpoint.bin").string() << " hash " << hex64(checkpoint_hash(result.checkpoint)) << "\n";
    return exit_ok;
}

int cmd_eval(const CLI::App* sub, const Options& o, std::ostream& out) {
    require_path(o.dataset, "dataset");
    require_path(o.checkpoint, "checkpoint");
    std::optional<fs::path> dir;
    if (!o.out.empty()) dir = prepare_out_dir(o.out);
    const Dataset ds = load_dataset(o.dataset);
    const Checkpoint ck = load_checkpoint(o.checkpoint);
    check_compatible(ck.params, ds);
    const Split split = split_from_string(o.split);

    EvalOptions e = eval_options(o);
    const EvalResult base = evaluate(ds, split, ck.params, e);
    out << "accuracy " << fmt(base.accuracy) << " over " << base.meshes.size() << " meshes\n";
    if (o.rotations > 0) {
        Rng rng = Rng::stream(o.seed, 0x707);
        double sum = 0.0;
        for (std::size_t r = 0; r < o.rotations; ++r) {
            e.rotation = random_rotation_matrix(rng);
            sum += evaluate(ds, split, ck.params, e).accuracy;
        }
        out << "rotated_accuracy " << fmt(sum / static_cast<double>(o.rotations)) << " over " << o.rotations << " rotations\n";
    }
    if (dir) {
        echo_config(sub, *dir);
        std::ofstream f(*dir / "eval.csv");
        f << "name,accuracy\n";
        for (const auto& m : base.meshes) f << m.name << "," << fmt(m.accuracy) << "\n";
    }
    return exit_ok;
}

/// Samples to run inference on: explicit mesh files or a dataset split.
std::vector<Sample> inference_inputs(const Options& o, std::optional<Dataset>& ds) {
    std::vector<Sample> samples;
    if (!o.meshes.empty()) {
        for (const auto& path : o.meshes) {
            if (!fs::exists(path)) throw ConfigError("mesh: '" + path + "' does not exist");
        }
        for (const auto& path : o.meshes) {
            Sample s;
            s.name = fs::path(path).stem().string();
            s.mesh = normalize_unit_sphere(load_mesh(path));
            samples.push_back(std::move(s));
        }
        return samples;
    }
    require_path(o.dataset, "dataset");
    ds = load_dataset(o.dataset);
    for (const Sample* s : ds->split(split_from_string(o.split))) samples.push_back(*s);
    return samples;
}

int cmd_classify(const CLI::App* sub, const Options& o, std::ostream& out) {
    require_path(o.checkpoint, "checkpoint");
    const fs::path dir = prepare_out_dir(o.out);
    std::optional<Dataset> ds;
    const auto samples = inference_inputs(o, ds);
    const Checkpoint ck = load_checkpoint(o.checkpoint);
    if (ck.params.config.task != TaskKind::classification) throw DataError("checkpoint is not a classification model");
    if (ds) check_compatible(ck.params, *ds);
    echo_config(sub, dir);

    std::ofstream f(dir / "predictions.csv");
    f << "name,truth,predicted";
    for (std::size_t c = 0; c < ck.params.config.num_classes; ++c) {
        f << ",p_" << (ds && c < ds->class_names.size() ? ds->class_names[c] : std::to_string(c));
    }
    f << "\n";
    std::size_t correct = 0;
    std::size_t labeled = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Rng rng = Rng::stream(o.seed, i);
        const ClassifyResult r = classify(samples[i].mesh, ck.params, rng, {o.walks, walk_fraction(o)});
        f << samples[i].name << ",";
        if (samples[i].labels.class_id) {
            f << *samples[i].labels.class_id;
            ++labeled;
            if (static_cast<int>(r.predicted) == *samples[i].labels.class_id) ++correct;
        }
        f << "," << r.predicted;
        for (Eigen::Index c = 0; c < r.probabilities.size(); ++c) f << "," << fmt(r.probabilities(c));
        f << "\n";
    }
    out << "classified " << samples.size() << " meshes -> " << (dir / "predictions.csv").string() << "\n";
    if (labeled > 0) out << "accuracy " << fmt(static_cast<double>(correct) / static_cast<double>(labeled)) << "\n";
    return exit_ok;
}

int cmd_segment(const CLI::App* sub, const Options& o, std::ostream& out) {
    require_path(o.checkpoint, "checkpoint");
    const fs::path dir = prepare_out_dir(o.out);
    std::optional<Dataset> ds;
    const auto samples = inference_inputs(o, ds);
    const Checkpoint ck = load_checkpoint(o.checkpoint);
    if (ck.params.config.task != TaskKind::segmentation) throw DataError("checkpoint is not a segmentation model");
    if (ds) check_compatible(ck.params, *ds);
    echo_config(sub, dir);

    fs::create_directories(dir / "labels");
    std::ofstream summary(dir / "segment.csv");
    summary << "name,edge_accuracy\n";
    double sum = 0.0;
    std::size_t labeled = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Rng rng = Rng::stream(o.seed, i);
        const SegmentResult r = segment(samples[i].mesh, ck.params, rng, {o.seg_walks, walk_fraction(o)});
        save_labels(MeshLabels::segmentation(r.labels), dir / "labels" / (samples[i].name + ".txt"));
        summary << samples[i].name << ",";
        if (samples[i].labels.is_segmentation() && !samples[i].labels.vertex_segments.empty()) {
            const auto truth = ground_truth_edge_labels(samples[i].mesh, samples[i].labels.vertex_segments);
            const double acc = edge_accuracy(samples[i].mesh, r.labels, r.confidence, truth);
            summary << fmt(acc);
            sum += acc;
            ++labeled;
        }
        summary << "\n";
    }
    out << "segmented " << samples.size() << " meshes -> " << (dir / "labels").string() << "\n";
    if (labeled > 0) out << "edge_accuracy " << fmt(sum / static_cast<double>(labeled)) << "\n";
    return exit_ok;
}

int cmd_sweep(const CLI::App* sub, const Options& o, std::ostream& out) {
    require_path(o.dataset, "dataset");
    const SweepAxis axis = sweep_axis_from_string(o.axis);
    if (axis != SweepAxis::train_size) require_path(o.checkpoint, "checkpoint");
    if (o.values.empty()) throw ConfigError("missing required option 'values'");
    const fs::path dir = prepare_out_dir(o.out);
    const Dataset ds = load_dataset(o.dataset);

    SweepOptions so;
    so.axis = axis;
    so.values = o.values;
    so.seeds = o.seeds;
    so.base_seed = o.seed;
    so.eval = eval_options(o);
    std::optional<Checkpoint> ck;
    if (axis == SweepAxis::train_size) {
        so.model = model_config(o, ds);
        so.train = train_config(o, ds.task);
    } else {
        ck = load_checkpoint(o.checkpoint);
        check_compatible(ck->params, ds);
    }
    echo_config(sub, dir);
    const auto points = ablation_sweep(ds, ck ? &ck->params : nullptr, so);
    const fs::path csv = dir / ("sweep_" + std::string(to_string(axis)) + ".csv");
    std::ofstream(csv) << sweep_csv(points, axis);
    for (const auto& p : points) out << to_string(axis) << " " << p.value << " mean " << fmt(p.mean) << " std " << fmt(p.stddev) << "\n";
    out << "wrote " << csv.string() << "\n";
    return exit_ok;
}

int cmd_plot(const Options& o, std::ostream& out) {
    require_path(o.input, "input");
    require(o.out, "out");
    std::ifstream in(o.input);
    std::ostringstream text;
    text << in.rdbuf();
    const CsvTable table = parse_csv(text.str());
    PlotOptions po;
    po.title = o.title.empty() ? fs::path(o.input).stem().string() : o.title;
    po.columns = o.columns;
    const std::string svg = render_svg(table, po);
    const fs::path target(o.out);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    std::ofstream(target) << svg;
    out << "wrote " << target.string() << "\n";
    return exit_ok;
}

/// Inserts config-file entries as `--key=value` arguments after the
/// subcommand, skipping keys the user also passed as flags.
std::vector<std::string> merge_config(const CLI::App& app, const std::vector<std::string>& args) {
    const auto sub_it = std::find_if(args.begin(), args.end(), [](const std::string& a) { return !a.starts_with("-"); });
    if (sub_it == args.end()) return args;
    const CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(*sub_it);
    } catch (const CLI::OptionNotFound&) {
        return args;
    }
    std::string config_path;
    for (auto it = sub_it + 1; it != args.end(); ++it) {
        if (*it == "--config" && it + 1 != args.end()) config_path = *(it + 1);
        if (it->starts_with("--config=")) config_path = it->substr(9);
    }
    if (config_path.empty()) return args;

    std::vector<std::string> injected;
    for (const ConfigEntry& e : load_config_file(config_path)) {
        const std::string flag = "--" + e.key;
        if (e.key == "config" || e.key == "help" || sub->get_option_no_throw(flag) == nullptr) {
            throw ConfigError(config_path + ":" + std::to_string(e.line) + ": unknown config key '" + e.key + "' for command '" +
                              sub->get_name() + "'");
        }
        const bool on_command_line = std::any_of(sub_it + 1, args.end(), [&](const std::string& a) {
            return a == flag || a.starts_with(flag + "=");
        });
        if (!on_command_line) injected.push_back(flag + "=" + e.value);
    }
    std::vector<std::string> merged(args.begin(), sub_it + 1);
    merged.insert(merged.end(), injected.begin(), injected.end());
    merged.insert(merged.end(), sub_it + 1, args.end());
    return merged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random-walk mesh classification and segmentation", "strider"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    Options o;

    auto* gendata = app.add_subcommand("gendata", "Generate a synthetic mesh dataset");
    add_common(gendata, o, true, false);
    gendata->add_option("--out", o.out, "Output dataset directory");
    gendata->add_option("--families", o.families, "Shape families (icosphere, box, torus, cylinder, dumbbell)")->delimiter(',');
    gendata->add_option("--task", o.task, "classification or segmentation (dumbbell only)");
    gendata->add_option("--per-class", o.per_class, "Instances per family");
    gendata->add_option("--jitter", o.jitter, "Vertex jitter as a fraction of the shortest incident edge, in [0, 0.5]");
    gendata->add_option("--target-faces", o.target_faces, "Simplification target (0 keeps generated meshes)");

    auto* preprocess = app.add_subcommand("preprocess", "Simplify and normalize a directory of meshes");
    add_common(preprocess, o, false, false);
    preprocess->add_option("--input", o.input, "Input directory (a dataset or loose .off/.obj files)");
    preprocess->add_option("--targets", o.targets, "Target face counts")->delimiter(',');
    preprocess->add_option("--out", o.out, "Output dataset directory");

    auto* train_cmd = app.add_subcommand("train", "Train a walk network");
    add_common(train_cmd, o, true, true);
    train_cmd->add_option("--dataset", o.dataset, "Dataset directory or manifest");
    train_cmd->add_option("--out", o.out, "Run directory for checkpoint, metrics and config echo");
    add_training(train_cmd, o);
    train_cmd->add_option("--walk-length", o.walk_length, "Walk length as a fraction of the vertex count (0: V/2.5)");
    train_cmd->add_option("--eval-every", o.eval_every, "Evaluate the test split every N iterations (0: never)");
    train_cmd->add_option("--walks", o.walks, "Walks per mesh when evaluating classification");
    train_cmd->add_option("--seg-walks", o.seg_walks, "Walks per mesh when evaluating segmentation (0: 32 per class)");
    train_cmd->add_option("--resume", o.resume, "Checkpoint to continue from");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    add_common(eval_cmd, o, true, true);
    eval_cmd->add_option("--dataset", o.dataset, "Dataset directory or manifest");
    eval_cmd->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
    eval_cmd->add_option("--split", o.split, "train or test");
    eval_cmd->add_option("--walks", o.walks, "Walks per mesh (classification)");
    eval_cmd->add_option("--seg-walks", o.seg_walks, "Walks per mesh (segmentation; 0: 32 per class)");
    eval_cmd->add_option("--walk-length", o.walk_length, "Walk length as a fraction of the vertex count (0: V/2.5)");
    eval_cmd->add_option("--rotations", o.rotations, "Also report mean accuracy under N random rotations");
    eval_cmd->add_option("--out", o.out, "Optional directory for per-mesh results");

    auto* classify_cmd = app.add_subcommand("classify", "Predict classes and write per-mesh probabilities");
    add_common(classify_cmd, o, true, false);
    classify_cmd->add_option("--checkpoint", o.checkpoint, "Trained classification checkpoint");
    classify_cmd->add_option("--dataset", o.dataset, "Dataset directory or manifest");
    classify_cmd->add_option("--split", o.split, "train or test");
    classify_cmd->add_option("--mesh", o.meshes, "Mesh files to classify instead of a dataset")->delimiter(',');
    classify_cmd->add_option("--walks", o.walks, "Walks per mesh");
    classify_cmd->add_option("--walk-length", o.walk_length, "Walk length as a fraction of the vertex count (0: V/2.5)");
    classify_cmd->add_option("--out", o.out, "Output directory");

    auto* segment_cmd = app.add_subcommand("segment", "Predict per-vertex segment labels");
    add_common(segment_cmd, o, true, false);
    segment_cmd->add_option("--checkpoint", o.checkpoint, "Trained segmentation checkpoint");
    segment_cmd->add_option("--dataset", o.dataset, "Dataset directory or manifest");
    segment_cmd->add_option("--split", o.split, "train or test");
    segment_cmd->add_option("--mesh", o.meshes, "Mesh files to segment instead of a dataset")->delimiter(',');
    segment_cmd->add_option("--seg-walks", o.seg_walks, "Walks per mesh (0: 32 per class)");
    segment_cmd->add_option("--walk-length", o.walk_length, "Walk length as a fraction of the vertex count (0: V/2.5)");
    segment_cmd->add_option("--out", o.out, "Output directory");

    auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy over a grid of walk counts, walk lengths or training-set sizes");
    add_common(sweep_cmd, o, true, true);
    sweep_cmd->add_option("--axis", o.axis, "n_walks, walk_length or train_size")
        ->check(CLI::IsMember({"n_walks", "walk_length", "train_size"}));
    sweep_cmd->add_option("--values", o.values, "Grid values")->delimiter(',');
    sweep_cmd->add_option("--seeds", o.seeds, "Seeds per grid value")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--dataset", o.dataset, "Dataset directory or manifest");
    sweep_cmd->add_option("--checkpoint", o.checkpoint, "Trained checkpoint (n_walks and walk_length axes)");
    sweep_cmd->add_option("--walks", o.walks, "Walks per mesh for classification evaluation");
    sweep_cmd->add_option("--seg-walks", o.seg_walks, "Walks per mesh for segmentation evaluation");
    sweep_cmd->add_option("--walk-length", o.walk_length, "Walk length fraction for the other axes (0: V/2.5)");
    add_training(sweep_cmd, o);
    sweep_cmd->add_option("--out", o.out, "Output directory");

    auto* plot_cmd = app.add_subcommand("plot", "Render a metrics or sweep CSV as an SVG line chart");
    plot_cmd->add_option("--input", o.input, "CSV file");
    plot_cmd->add_option("--out", o.out, "SVG file to write");
    plot_cmd->add_option("--title", o.title, "Chart title (default: file stem)");
    plot_cmd->add_option("--columns", o.columns, "Columns to draw (default: all but the first)")->delimiter(',');

    try {
        const std::vector<std::string> merged = merge_config(app, args);
        std::vector<std::string> reversed(merged.rbegin(), merged.rend());
        app.parse(reversed);

        if (gendata->parsed()) return cmd_gendata(gendata, o, out);
        if (preprocess->parsed()) return cmd_preprocess(preprocess, o, out, err);
        if (train_cmd->parsed()) return cmd_train(train_cmd, o, out);
        if (eval_cmd->parsed()) return cmd_eval(eval_cmd, o, out);
        if (classify_cmd->parsed()) return cmd_classify(classify_cmd, o, out);
        if (segment_cmd->parsed()) return cmd_segment(segment_cmd, o, out);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_cmd, o, out);
        if (plot_cmd->parsed()) return cmd_plot(o, out);
        return exit_usage;
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const PlotError& e) {
        err << "bad CSV: " << e.what() << "\n";
        return exit_data;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const fs::filesystem_error& e) {
        err << "file error: " << e.what() << "\n";
        return exit_data;
    } catch (const std::invalid_argument& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_data;
    }
}

}  // namespace strider::cli
