#include "slr/train/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "slr/error.hpp"
#include "slr/text/text_encoder.hpp"

namespace slr {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw ParameterError("config: bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    const std::string v = trim(value);
    T out{};
    if constexpr (std::is_floating_point_v<T>) {
        std::size_t used = 0;
        try {
            out = static_cast<T>(std::stod(v, &used));
        } catch (const std::exception&) {
            bad_value(key, value);
        }
        if (used != v.size() || !std::isfinite(out)) bad_value(key, value);
    } else {
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, value);
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, value);
}

std::vector<int> parse_int_list(std::string_view key, std::string_view value) {
    std::string v = trim(value);
    if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_number<int>(key, item));
    }
    return out;
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

void TrainConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ParameterError(std::string("config: ") + what);
    };
    require(epochs >= 1, "epochs must be at least 1");
    require(batch_size >= 1, "batch_size must be at least 1");
    require(lr > 0, "lr must be positive");
    require(warmup_epochs >= 0 && warmup_epochs < epochs, "warmup_epochs must be below epochs");
    for (std::size_t i = 1; i < decay_epochs.size(); ++i) {
        require(decay_epochs[i] > decay_epochs[i - 1], "decay_epochs must be strictly increasing");
    }
    require(decay_factor > 0 && decay_factor <= 1, "decay_factor must be in (0, 1]");
    require(weight_decay >= 0, "weight_decay must be nonnegative");
    require(temperature > 0, "temperature must be positive");
    require(alpha >= 0, "alpha must be nonnegative");
    require(embed_dim >= 8, "embed_dim must be at least 8");
    require(num_classes >= 2, "num_classes must be at least 2");
    require(samples_per_class >= 2, "samples_per_class must be at least 2");
    require(frames >= 2, "frames must be at least 2");
    require(layers >= 1 && channels >= 1, "layers and channels must be positive");
    require(noise >= 0, "noise must be nonnegative");
    require(train_fraction > 0 && train_fraction < 1, "train_fraction must be in (0, 1)");
    require(synonym_count >= 1 || !use_synonym, "use_synonym needs synonym_count >= 1");
}

void TrainConfig::set(std::string_view key_in, std::string_view value) {
    const std::string key = trim(key_in);
    if (key == "epochs") epochs = parse_number<int>(key, value);
    else if (key == "batch_size") batch_size = parse_number<int>(key, value);
    else if (key == "lr") lr = parse_number<double>(key, value);
    else if (key == "warmup_epochs") warmup_epochs = parse_number<int>(key, value);
    else if (key == "decay_epochs") decay_epochs = parse_int_list(key, value);
    else if (key == "decay_factor") decay_factor = parse_number<double>(key, value);
    else if (key == "weight_decay") weight_decay = parse_number<double>(key, value);
    else if (key == "temperature") temperature = parse_number<double>(key, value);
    else if (key == "alpha") alpha = parse_number<double>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "embed_dim") embed_dim = parse_number<int>(key, value);
    else if (key == "stream") {
        try {
            stream = parse_stream(trim(value));
        } catch (const std::exception&) {
            bad_value(key, value);
        }
    }
    else if (key == "num_classes") num_classes = parse_number<int>(key, value);
    else if (key == "samples_per_class") samples_per_class = parse_number<int>(key, value);
    else if (key == "frames") frames = parse_number<int>(key, value);
    else if (key == "layers") layers = parse_number<int>(key, value);
    else if (key == "channels") channels = parse_number<int>(key, value);
    else if (key == "noise") noise = parse_number<double>(key, value);
    else if (key == "train_fraction") train_fraction = parse_number<double>(key, value);
    else if (key == "use_global") use_global = parse_bool(key, value);
    else if (key == "use_synonym") use_synonym = parse_bool(key, value);
    else if (key == "use_parts") use_parts = parse_bool(key, value);
    else if (key == "synonym_count") synonym_count = parse_number<int>(key, value);
    else if (key == "cache_text_features") cache_text_features = parse_bool(key, value);
    else throw ParameterError("config: unknown key '" + key + "'");
}

std::string TrainConfig::to_kv() const {
    std::ostringstream os;
    std::string decays;
    for (std::size_t i = 0; i < decay_epochs.size(); ++i) decays += (i ? "," : "") + std::to_string(decay_epochs[i]);
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "epochs = " << epochs << '\n'
       << "batch_size = " << batch_size << '\n'
       << "lr = " << format_double(lr) << '\n'
       << "warmup_epochs = " << warmup_epochs << '\n'
       << "decay_epochs = " << decays << '\n'
       << "decay_factor = " << format_double(decay_factor) << '\n'
       << "weight_decay = " << format_double(weight_decay) << '\n'
       << "temperature = " << format_double(temperature) << '\n'
       << "alpha = " << format_double(alpha) << '\n'
       << "seed = " << seed << '\n'
       << "embed_dim = " << embed_dim << '\n'
       << "stream = " << stream_name(stream) << '\n'
       << "num_classes = " << num_classes << '\n'
       << "samples_per_class = " << samples_per_class << '\n'
       << "frames = " << frames << '\n'
       << "layers = " << layers << '\n'
       << "channels = " << channels << '\n'
       << "noise = " << format_double(noise) << '\n'
       << "train_fraction = " << format_double(train_fraction) << '\n'
       << "use_global = " << b(use_global) << '\n'
       << "use_synonym = " << b(use_synonym) << '\n'
       << "use_parts = " << b(use_parts) << '\n'
       << "synonym_count = " << synonym_count << '\n'
       << "cache_text_features = " << b(cache_text_features) << '\n';
    return os.str();
}

TrainConfig TrainConfig::from_kv(std::string_view text, TrainConfig base) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("config: line " + std::to_string(lineno) + " is not key = value");
        }
        base.set(std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
    }
    return base;
}

TrainConfig TrainConfig::load(const std::string& path, TrainConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_kv(ss.str(), std::move(base));
}

TrainConfig TrainConfig::from_kv(std::string_view text) { return from_kv(text, TrainConfig{}); }

TrainConfig TrainConfig::load(const std::string& path) { return load(path, TrainConfig{}); }

std::uint64_t config_hash(const TrainConfig& config) { return stable_hash(config.to_kv()); }

double lr_at(int epoch, const TrainConfig& config) {
    if (epoch < 0) throw ParameterError("lr_at: negative epoch");
    if (epoch < config.warmup_epochs) {
        return config.lr * static_cast<double>(epoch + 1) / static_cast<double>(config.warmup_epochs);
    }
    double rate = config.lr;
    for (int d : config.decay_epochs) {
        if (epoch >= d) rate *= config.decay_factor;
    }
    return rate;
}

} // namespace slr
