#pragma once

#include <atomic>

namespace slr {

/// Process-wide call counters used to prove which branches a code path touches.
struct Instrumentation {
    static inline std::atomic<long> text_encoder_calls{0};
    static inline std::atomic<long> part_branch_calls{0};

    struct Snapshot {
        long text_encoder_calls;
        long part_branch_calls;
    };
    static Snapshot snapshot() { return {text_encoder_calls.load(), part_branch_calls.load()}; }
};

} // namespace slr
