#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "slr/skeleton/sequence.hpp"

namespace slr {

/// Every key of the key-value config file. Defaults are the desk-scale setup.
struct TrainConfig {
    int epochs = 30;
    int batch_size = 16;
    double lr = 0.06;
    int warmup_epochs = 3;
    std::vector<int> decay_epochs{20, 25};
    double decay_factor = 0.1;
    double weight_decay = 5e-4;
    double temperature = 0.1;
    double alpha = 0.5;
    std::uint64_t seed = 1;
    int embed_dim = 256;
    Stream stream = Stream::Joint;
    int num_classes = 10;
    int samples_per_class = 20;
    int frames = 16;
    int layers = 3;
    int channels = 32;
    double noise = 0.05;
    double train_fraction = 0.8;
    bool use_global = true;
    bool use_synonym = true;
    bool use_parts = true;
    int synonym_count = 2;
    bool cache_text_features = false;

    /// Throws ParameterError on an inconsistent configuration.
    void validate() const;

    bool uses_contrastive() const noexcept { return use_global || use_synonym || use_parts; }

    /// Canonical "key = value" lines in a fixed key order.
    std::string to_kv() const;

    /// Applies "key = value" lines on top of `base`. '#' starts a comment.
    static TrainConfig from_kv(std::string_view text, TrainConfig base);
    static TrainConfig from_kv(std::string_view text);
    static TrainConfig load(const std::string& path, TrainConfig base);
    static TrainConfig load(const std::string& path);

    /// Applies a single key. Throws ParameterError on an unknown key or bad value.
    void set(std::string_view key, std::string_view value);
};

/// FNV-1a of the canonical config text.
std::uint64_t config_hash(const TrainConfig& config);

/// Linear ramp base*(epoch+1)/warmup during warmup, then base * factor^(decays passed).
double lr_at(int epoch, const TrainConfig& config);

} // namespace slr
