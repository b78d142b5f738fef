#include "strider/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "strider/errors.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace strider {
namespace {

constexpr char magic[8] = {'S', 'T', 'R', 'I', 'D', 'C', 'K', 'P'};

class Writer {
public:
    template <typename T>
    void put(T value) {
        const auto* p = reinterpret_cast<const char*>(&value);
        bytes_.append(p, sizeof(T));
    }
    void put_bytes(const void* data, std::size_t n) { bytes_.append(static_cast<const char*>(data), n); }
    std::string& bytes() { return bytes_; }

private:
    std::string bytes_;
};

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        T value;
        get_bytes(&value, sizeof(T));
        return value;
    }
    void get_bytes(void* out, std::size_t n) {
        if (pos_ + n > bytes_.size()) throw DataError("checkpoint truncated");
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::size_t position() const { return pos_; }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
    const ModelConfig& cfg = ck.params.config;
    Writer w;
    w.put_bytes(magic, sizeof(magic));
    w.put<std::uint32_t>(Checkpoint::version);
    w.put<std::uint32_t>(cfg.task == TaskKind::classification ? 0u : 1u);
    w.put<std::uint64_t>(cfg.input_dim);
    w.put<std::uint64_t>(cfg.fc1);
    w.put<std::uint64_t>(cfg.fc2);
    w.put<std::uint64_t>(cfg.gru.size());
    for (std::size_t h : cfg.gru) w.put<std::uint64_t>(h);
    w.put<std::uint64_t>(cfg.num_classes);
    w.put<double>(cfg.norm_eps);
    w.put<std::uint64_t>(ck.iteration);
    w.put<std::uint64_t>(ck.adam.step);

    const auto tensors = ck.params.tensors();
    const auto names = ck.params.tensor_names();
    const bool has_moments = ck.adam.first_moment.size() == tensors.size() && !tensors.empty();
    w.put<std::uint8_t>(has_moments ? 1 : 0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const Tensor& t = *tensors[i];
        w.put<std::uint32_t>(static_cast<std::uint32_t>(names[i].size()));
        w.put_bytes(names[i].data(), names[i].size());
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) w.put<std::uint64_t>(d);
        w.put_bytes(t.data(), t.size() * sizeof(double));
        if (has_moments) {
            w.put_bytes(ck.adam.first_moment[i].data(), t.size() * sizeof(double));
            w.put_bytes(ck.adam.second_moment[i].data(), t.size() * sizeof(double));
        }
    }
    const std::uint64_t digest = fnv1a64(w.bytes().data(), w.bytes().size());
    w.put<std::uint64_t>(digest);
    return std::move(w.bytes());
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
    if (bytes.size() < sizeof(magic) + sizeof(std::uint64_t)) throw DataError("checkpoint too short");
    const std::size_t body = bytes.size() - sizeof(std::uint64_t);
    std::uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + body, sizeof(stored));
    if (stored != fnv1a64(bytes.data(), body)) throw DataError("checkpoint checksum mismatch");

    Reader r(bytes);
    char head[8];
    r.get_bytes(head, sizeof(head));
    if (std::memcmp(head, magic, sizeof(magic)) != 0) throw DataError("not a strider checkpoint (bad magic)");
    const auto version = r.get<std::uint32_t>();
    if (version != Checkpoint::version) throw DataError("unsupported checkpoint version " + std::to_string(version));

    ModelConfig cfg;
    const auto task = r.get<std::uint32_t>();
    if (task > 1) throw DataError("checkpoint: unknown task kind");
    cfg.task = task == 0 ? TaskKind::classification : TaskKind::segmentation;
    cfg.input_dim = r.get<std::uint64_t>();
    cfg.fc1 = r.get<std::uint64_t>();
    cfg.fc2 = r.get<std::uint64_t>();
    const auto gru_count = r.get<std::uint64_t>();
    if (gru_count > 64) throw DataError("checkpoint: implausible GRU layer count");
    cfg.gru.clear();
    for (std::uint64_t i = 0; i < gru_count; ++i) cfg.gru.push_back(r.get<std::uint64_t>());
    cfg.num_classes = r.get<std::uint64_t>();
    cfg.norm_eps = r.get<double>();

    Checkpoint ck;
    try {
        ck.params = NetParams::zeros(cfg);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("checkpoint: invalid model config: ") + e.what());
    }
    ck.iteration = r.get<std::uint64_t>();
    ck.adam.step = r.get<std::uint64_t>();
    const bool has_moments = r.get<std::uint8_t>() != 0;
    const auto count = r.get<std::uint32_t>();
    auto tensors = ck.params.tensors();
    const auto names = ck.params.tensor_names();
    if (count != tensors.size()) throw DataError("checkpoint: tensor count does not match model config");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        Tensor& t = *tensors[i];
        const auto name_len = r.get<std::uint32_t>();
        std::string name(name_len, '\0');
        r.get_bytes(name.data(), name_len);
        if (name != names[i]) throw DataError("checkpoint: expected tensor '" + names[i] + "', found '" + name + "'");
        const auto rank = r.get<std::uint32_t>();
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = r.get<std::uint64_t>();
        if (shape != t.shape()) throw DataError("checkpoint: shape mismatch for '" + name + "'");
        r.get_bytes(t.data(), t.size() * sizeof(double));
        if (has_moments) {
            ck.adam.first_moment.emplace_back(t.size());
            ck.adam.second_moment.emplace_back(t.size());
            r.get_bytes(ck.adam.first_moment.back().data(), t.size() * sizeof(double));
            r.get_bytes(ck.adam.second_moment.back().data(), t.size() * sizeof(double));
        }
    }
    if (r.position() != body) throw DataError("checkpoint: trailing bytes");
    return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    const std::string bytes = serialize_checkpoint(checkpoint);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_checkpoint(ss.str());
}

std::uint64_t checkpoint_hash(const Checkpoint& checkpoint) {
    const std::string bytes = serialize_checkpoint(checkpoint);
    return fnv1a64(bytes.data(), bytes.size());
}

}  // namespace strider
