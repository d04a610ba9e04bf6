#include "slr/train/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "slr/error.hpp"
#include "slr/train/trainer.hpp"

namespace slr {

static_assert(std::endian::native == std::endian::little, "model blobs are written little-endian");

namespace {

constexpr char kMagic[8] = {'S', 'L', 'R', 'M', 'O', 'D', 'E', 'L'};

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_str(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
public:
    Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

    template <class T>
    T get() {
        T v;
        std::memcpy(&v, take(sizeof v), sizeof v);
        return v;
    }
    std::string str() {
        const auto n = get<std::uint32_t>();
        return std::string(take(n), n);
    }
    const char* take(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw IoError("model: " + path_ + " is truncated");
        const char* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::string bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

void save_model(const std::string& path, const SkeletonEncoder& model, const TrainConfig& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("model: cannot write " + path);
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kModelFormatVersion);
    put<std::uint64_t>(out, config_hash(config));
    put_str(out, config.to_kv());
    put_str(out, model.layout().to_json());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.parameters().size()));
    for (const auto& p : model.parameters()) {
        put_str(out, p.name);
        put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.rows()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.cols()));
        out.write(reinterpret_cast<const char*>(p.value.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p.value.size())));
    }
    if (!out) throw IoError("model: write failed for " + path);
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("model: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    Reader r(ss.str(), path);

    if (std::memcmp(r.take(sizeof kMagic), kMagic, sizeof kMagic) != 0) throw IoError("model: " + path + " has a bad magic");
    const auto version = r.get<std::uint32_t>();
    if (version != kModelFormatVersion) {
        throw IoError("model: unsupported format version " + std::to_string(version));
    }
    const auto hash = r.get<std::uint64_t>();
    const std::string config_text = r.str();
    TrainConfig config = TrainConfig::from_kv(config_text);
    if (config_hash(config) != hash) throw IoError("model: config hash mismatch in " + path);
    SkeletonEncoder model(SkeletonLayout::from_json(r.str()), encoder_config(config));

    const auto count = r.get<std::uint32_t>();
    if (count != model.parameters().size()) throw IoError("model: tensor count does not match the configuration");
    for (auto& p : model.parameters()) {
        const std::string name = r.str();
        const auto rows = r.get<std::uint64_t>();
        const auto cols = r.get<std::uint64_t>();
        if (name != p.name || static_cast<Index>(rows) != p.value.rows() || static_cast<Index>(cols) != p.value.cols()) {
            throw IoError("model: unexpected tensor '" + name + "'");
        }
        std::memcpy(p.value.data(), r.take(sizeof(double) * rows * cols), sizeof(double) * rows * cols);
    }
    if (!r.done()) throw IoError("model: trailing bytes in " + path);
    return {std::move(config), std::move(model)};
}

} // namespace slr
