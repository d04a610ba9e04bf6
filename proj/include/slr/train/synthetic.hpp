#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "slr/skeleton/layout.hpp"
#include "slr/skeleton/sequence.hpp"

namespace slr {

/// Circular joint trajectory of one body part around its rest position.
struct PartMotion {
    double amplitude = 0.0;
    double frequency = 1.0; // cycles over the clip
    double phase = 0.0;
    double offset_x = 0.0;
    double offset_y = 0.0;

    friend bool operator==(const PartMotion&, const PartMotion&) = default;
};

struct SyntheticSignSpec {
    int class_id = 0;
    std::array<PartMotion, kPartCount> motion{};
    std::array<bool, kPartCount> active{};
    double noise = 0.05;

    void validate() const;
    const PartMotion& operator[](Part p) const { return motion[static_cast<std::size_t>(p)]; }
    bool is_active(Part p) const { return active[static_cast<std::size_t>(p)]; }

    friend bool operator==(const SyntheticSignSpec&, const SyntheticSignSpec&) = default;
};

/// Random pairwise-distinct classes, each with at least one active part.
std::vector<SyntheticSignSpec> make_sign_specs(int num_classes, std::uint64_t seed, double noise);

enum class SplitPool { Train, Test };

/// One clip. All random draws depend on `sample_seed` and `pool` only, so two
/// specs differing in one part's motion yield clips differing only on that part.
SkeletonSequence generate_sample(const SyntheticSignSpec& spec, const SkeletonLayout& layout, int frames,
                                 std::uint64_t sample_seed, SplitPool pool);

struct Dataset {
    std::vector<SkeletonSequence> train;
    std::vector<SkeletonSequence> test;
};

/// Per class, the first round(train_fraction * samples_per_class) clips go to
/// train. Train and test clips draw phase jitter and placement from disjoint pools.
Dataset generate_dataset(const std::vector<SyntheticSignSpec>& specs, const SkeletonLayout& layout,
                         int samples_per_class, int frames, std::uint64_t seed, double train_fraction = 0.8);

} // namespace slr
