#include "slr/train/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "slr/error.hpp"

namespace slr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Anchor {
    double x, y;
};

constexpr std::array<Anchor, kPartCount> kAnchors{{{0.0, 0.4}, {-0.6, 0.0}, {0.6, 0.0}, {0.0, 1.0}, {0.0, 1.25}}};

// Placement pools: train offsets sit on even eighths of a circle, test on odd ones.
Anchor placement(SplitPool pool, int slot) {
    const double angle = (2.0 * slot + (pool == SplitPool::Test ? 1.0 : 0.0)) * kTwoPi / 16.0;
    return {0.03 * std::cos(angle), 0.03 * std::sin(angle)};
}

double phase_jitter(SplitPool pool, int slot) {
    static constexpr double train[] = {-0.45, -0.15, 0.15, 0.45};
    static constexpr double test[] = {-0.3, 0.0, 0.3};
    return pool == SplitPool::Train ? train[slot % 4] : test[slot % 3];
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2);
    return a;
}

} // namespace

void SyntheticSignSpec::validate() const {
    if (class_id < 0) throw LabelError("sign spec: negative class id");
    if (std::none_of(active.begin(), active.end(), [](bool a) { return a; })) {
        throw ParameterError("sign spec " + std::to_string(class_id) + ": no active part");
    }
    if (noise < 0) throw ParameterError("sign spec: noise must be nonnegative");
    for (const auto& m : motion) {
        if (m.amplitude < 0 || m.frequency < 0) throw ParameterError("sign spec: negative amplitude or frequency");
    }
}

std::vector<SyntheticSignSpec> make_sign_specs(int num_classes, std::uint64_t seed, double noise) {
    if (num_classes < 1) throw ParameterError("make_sign_specs: need at least one class");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::uniform_real_distribution<double> offset(-0.3, 0.3);
    std::uniform_int_distribution<int> amp_level(0, 2);
    std::uniform_int_distribution<int> freq_level(1, 3);
    static constexpr double amplitudes[] = {0.1, 0.25, 0.45};
    static constexpr double activity[] = {0.4, 0.6, 0.7, 0.4, 0.35};

    std::vector<SyntheticSignSpec> specs;
    while (static_cast<int>(specs.size()) < num_classes) {
        SyntheticSignSpec s;
        s.class_id = static_cast<int>(specs.size());
        s.noise = noise;
        for (std::size_t p = 0; p < kPartCount; ++p) {
            s.active[p] = std::bernoulli_distribution(activity[p])(rng);
            PartMotion m;
            m.amplitude = amplitudes[amp_level(rng)];
            m.frequency = freq_level(rng);
            m.phase = phase(rng);
            m.offset_x = offset(rng);
            m.offset_y = offset(rng);
            if (s.active[p]) s.motion[p] = m;
        }
        if (std::none_of(s.active.begin(), s.active.end(), [](bool a) { return a; })) continue;
        const bool duplicate = std::any_of(specs.begin(), specs.end(), [&](const SyntheticSignSpec& o) {
            return o.motion == s.motion && o.active == s.active;
        });
        if (!duplicate) specs.push_back(s);
    }
    return specs;
}

SkeletonSequence generate_sample(const SyntheticSignSpec& spec, const SkeletonLayout& layout, int frames,
                                 std::uint64_t sample_seed, SplitPool pool) {
    spec.validate();
    if (frames < 2) throw ParameterError("generate_sample: need at least two frames");
    std::mt19937_64 rng(sample_seed);
    std::uniform_int_distribution<int> slot(0, 7);
    std::uniform_real_distribution<double> scale(0.9, 1.1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double jitter = phase_jitter(pool, slot(rng));
    const Anchor shift = placement(pool, slot(rng));
    const double size = scale(rng);

    const Index n = layout.joint_count();
    Tensor values({SkeletonSequence::kChannels, n, frames});
    for (const PartRange& range : layout.parts()) {
        const auto p = static_cast<std::size_t>(range.part);
        const Anchor anchor = kAnchors[p];
        const PartMotion& m = spec.motion[p];
        const auto members = layout.joints(range.part);
        for (std::size_t r = 0; r < members.size(); ++r) {
            const double ring = kTwoPi * static_cast<double>(r) / static_cast<double>(members.size());
            const double rest_x = anchor.x + 0.08 * std::cos(ring);
            const double rest_y = anchor.y + 0.08 * std::sin(ring);
            for (int t = 0; t < frames; ++t) {
                double x = rest_x + shift.x;
                double y = rest_y + shift.y;
                if (spec.active[p]) {
                    const double theta = kTwoPi * m.frequency * t / frames + m.phase + jitter + 0.25 * static_cast<double>(r);
                    x += m.offset_x + size * m.amplitude * std::cos(theta);
                    y += m.offset_y + size * m.amplitude * std::sin(theta);
                }
                const double nx = gauss(rng), ny = gauss(rng), nc = gauss(rng);
                values.set(SkeletonSequence::kX, members[r], t, x + spec.noise * nx);
                values.set(SkeletonSequence::kY, members[r], t, y + spec.noise * ny);
                values.set(SkeletonSequence::kConfidence, members[r], t,
                           std::clamp(1.0 - std::abs(spec.noise * nc), 0.0, 1.0));
            }
        }
    }
    return SkeletonSequence(std::move(values), spec.class_id);
}

Dataset generate_dataset(const std::vector<SyntheticSignSpec>& specs, const SkeletonLayout& layout,
                         int samples_per_class, int frames, std::uint64_t seed, double train_fraction) {
    if (samples_per_class < 2) throw ParameterError("generate_dataset: need at least two samples per class");
    if (!(train_fraction > 0 && train_fraction < 1)) throw ParameterError("generate_dataset: bad train fraction");
    const int n_train = std::clamp(static_cast<int>(std::lround(train_fraction * samples_per_class)), 1,
                                   samples_per_class - 1);
    Dataset out;
    for (const auto& spec : specs) {
        for (int i = 0; i < samples_per_class; ++i) {
            const std::uint64_t s = mix(mix(seed, static_cast<std::uint64_t>(spec.class_id)), static_cast<std::uint64_t>(i));
            if (i < n_train) {
                out.train.push_back(generate_sample(spec, layout, frames, s, SplitPool::Train));
            } else {
                out.test.push_back(generate_sample(spec, layout, frames, s, SplitPool::Test));
            }
        }
    }
    return out;
}

} // namespace slr
