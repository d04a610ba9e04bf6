#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slr/numerics/tensor.hpp"

namespace slr {

enum class Part : int { Body = 0, LeftHand = 1, RightHand = 2, Mouth = 3, Face = 4 };

inline constexpr std::array<Part, 5> kAllParts{Part::Body, Part::LeftHand, Part::RightHand, Part::Mouth,
                                               Part::Face};
inline constexpr int kPartCount = 5;

std::string_view part_name(Part p);
std::optional<Part> parse_part(std::string_view name);

struct PartRange {
    Part part;
    Index begin = 0;
    Index size = 0;
    Index end() const { return begin + size; }
    friend bool operator==(const PartRange&, const PartRange&) = default;
};

using Edge = std::pair<Index, Index>;

/// Joint partition and bone list. Edges are oriented (parent, child).
class SkeletonLayout {
public:
    SkeletonLayout(Index joint_count, std::vector<PartRange> parts, std::vector<Edge> edges);

    /// The 87-joint layout: body 15, left hand 21, right hand 21, mouth 10, face 20.
    static SkeletonLayout standard();

    static SkeletonLayout from_json(const std::string& text);
    static SkeletonLayout load(const std::string& path);
    std::string to_json() const;

    Index joint_count() const noexcept { return joint_count_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<PartRange>& parts() const noexcept { return parts_; }
    const PartRange& range(Part p) const { return parts_[static_cast<std::size_t>(p)]; }
    Part part_of(Index joint) const;

    /// Joint indices of one part, ascending.
    std::vector<Index> joints(Part p) const;

    /// Same layout with joint j renamed to perm[j]. Part membership moves with the
    /// joints, so the result is stored as explicit joint lists.
    SkeletonLayout permuted(const std::vector<Index>& perm) const;

    friend bool operator==(const SkeletonLayout&, const SkeletonLayout&) = default;

private:
    SkeletonLayout() = default;
    void validate() const;

    Index joint_count_ = 0;
    std::vector<PartRange> parts_;
    std::vector<Edge> edges_;
    // Non-empty only for permuted layouts, where parts are not contiguous.
    std::vector<std::vector<Index>> explicit_joints_;
};

} // namespace slr
