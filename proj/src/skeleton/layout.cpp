#include "slr/skeleton/layout.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "slr/error.hpp"

namespace slr {

namespace {

constexpr std::array<std::string_view, kPartCount> kPartNames{"body", "left_hand", "right_hand", "mouth", "face"};

// Union-find connectivity of `joints` using only edges inside the set.
bool connected(const std::vector<Index>& joints, const std::vector<Edge>& edges, Index joint_count) {
    if (joints.size() <= 1) return true;
    std::vector<Index> parent(static_cast<std::size_t>(joint_count));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    std::vector<bool> member(static_cast<std::size_t>(joint_count), false);
    for (Index j : joints) member[static_cast<std::size_t>(j)] = true;
    for (const auto& [a, b] : edges) {
        if (member[static_cast<std::size_t>(a)] && member[static_cast<std::size_t>(b)]) {
            parent[static_cast<std::size_t>(find(a))] = find(b);
        }
    }
    const Index root = find(joints.front());
    return std::all_of(joints.begin(), joints.end(), [&](Index j) { return find(j) == root; });
}

// 21-joint hand: wrist then four joints per finger.
void add_hand(std::vector<Edge>& e, Index base) {
    for (Index finger = 0; finger < 5; ++finger) {
        Index prev = base;
        for (Index k = 1; k <= 4; ++k) {
            const Index j = base + finger * 4 + k;
            e.emplace_back(prev, j);
            prev = j;
        }
    }
}

} // namespace

std::string_view part_name(Part p) { return kPartNames[static_cast<std::size_t>(p)]; }

std::optional<Part> parse_part(std::string_view name) {
    for (Part p : kAllParts) {
        if (part_name(p) == name) return p;
    }
    return std::nullopt;
}

SkeletonLayout::SkeletonLayout(Index joint_count, std::vector<PartRange> parts, std::vector<Edge> edges)
    : joint_count_(joint_count), parts_(std::move(parts)), edges_(std::move(edges)) {
    std::sort(parts_.begin(), parts_.end(),
              [](const PartRange& a, const PartRange& b) { return a.part < b.part; });
    validate();
}

SkeletonLayout SkeletonLayout::standard() {
    std::vector<PartRange> parts{{Part::Body, 0, 15},
                                 {Part::LeftHand, 15, 21},
                                 {Part::RightHand, 36, 21},
                                 {Part::Mouth, 57, 10},
                                 {Part::Face, 67, 20}};
    std::vector<Edge> e;
    // body: 0 nose, 1 neck, 2-4 right arm, 5-7 left arm, 8 mid hip,
    // 9/10 eyes, 11/12 ears, 13/14 hips
    for (auto [a, b] : std::initializer_list<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 5},
                                                                  {5, 6}, {6, 7}, {1, 8}, {0, 9}, {0, 10},
                                                                  {9, 11}, {10, 12}, {8, 13}, {8, 14}}) {
        e.emplace_back(a, b);
    }
    add_hand(e, 15);
    add_hand(e, 36);
    for (Index k = 0; k < 10; ++k) e.emplace_back(57 + k, 57 + (k + 1) % 10); // lip contour ring
    for (Index k = 0; k + 1 < 20; ++k) e.emplace_back(67 + k, 68 + k);        // face contour chain
    // cross-part attachments
    e.emplace_back(7, 15);  // left wrist -> left hand root
    e.emplace_back(4, 36);  // right wrist -> right hand root
    e.emplace_back(0, 57);  // nose -> mouth
    e.emplace_back(0, 67);  // nose -> face
    return SkeletonLayout(87, std::move(parts), std::move(e));
}

void SkeletonLayout::validate() const {
    if (joint_count_ <= 0) throw LayoutError("layout: joint count must be positive");
    if (parts_.size() != kPartCount) throw LayoutError("layout: exactly five parts required");
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (parts_[i].part != kAllParts[i]) throw LayoutError("layout: each part must appear exactly once");
    }
    std::vector<int> owner(static_cast<std::size_t>(joint_count_), 0);
    for (Part p : kAllParts) {
        const auto js = joints(p);
        if (js.empty()) throw LayoutError("layout: part " + std::string(part_name(p)) + " is empty");
        for (Index j : js) {
            if (j < 0 || j >= joint_count_) throw LayoutError("layout: part joint out of range");
            ++owner[static_cast<std::size_t>(j)];
        }
    }
    if (std::any_of(owner.begin(), owner.end(), [](int c) { return c != 1; })) {
        throw LayoutError("layout: parts must be disjoint and cover every joint");
    }
    for (const auto& [a, b] : edges_) {
        if (a < 0 || b < 0 || a >= joint_count_ || b >= joint_count_) {
            throw LayoutError("layout: edge endpoint out of range (" + std::to_string(a) + ", " +
                              std::to_string(b) + ")");
        }
        if (a == b) throw LayoutError("layout: self edge");
    }
    for (Part p : kAllParts) {
        if (!connected(joints(p), edges_, joint_count_)) {
            throw LayoutError("layout: part " + std::string(part_name(p)) + " is not connected");
        }
    }
}

std::vector<Index> SkeletonLayout::joints(Part p) const {
    if (!explicit_joints_.empty()) return explicit_joints_[static_cast<std::size_t>(p)];
    const PartRange& r = range(p);
    std::vector<Index> out(static_cast<std::size_t>(r.size));
    std::iota(out.begin(), out.end(), r.begin);
    return out;
}

Part SkeletonLayout::part_of(Index joint) const {
    for (Part p : kAllParts) {
        const auto js = joints(p);
        if (std::find(js.begin(), js.end(), joint) != js.end()) return p;
    }
    throw LayoutError("layout: joint " + std::to_string(joint) + " out of range");
}

SkeletonLayout SkeletonLayout::permuted(const std::vector<Index>& perm) const {
    if (static_cast<Index>(perm.size()) != joint_count_) throw LayoutError("layout: permutation size");
    SkeletonLayout out = *this;
    out.explicit_joints_.assign(kPartCount, {});
    for (Part p : kAllParts) {
        for (Index j : joints(p)) out.explicit_joints_[static_cast<std::size_t>(p)].push_back(perm[static_cast<std::size_t>(j)]);
        std::sort(out.explicit_joints_[static_cast<std::size_t>(p)].begin(),
                  out.explicit_joints_[static_cast<std::size_t>(p)].end());
    }
    for (auto& [a, b] : out.edges_) {
        a = perm[static_cast<std::size_t>(a)];
        b = perm[static_cast<std::size_t>(b)];
    }
    out.validate();
    return out;
}

SkeletonLayout SkeletonLayout::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        const Index n = j.at("joint_count").get<Index>();
        std::vector<PartRange> parts;
        std::vector<std::vector<Index>> lists(kPartCount);
        bool explicit_lists = false;
        for (const auto& pj : j.at("parts")) {
            const auto name = pj.at("name").get<std::string>();
            const auto part = parse_part(name);
            if (!part) throw LayoutError("layout: unknown part '" + name + "'");
            if (pj.contains("joints")) {
                explicit_lists = true;
                lists[static_cast<std::size_t>(*part)] = pj.at("joints").get<std::vector<Index>>();
                parts.push_back({*part, 0, static_cast<Index>(lists[static_cast<std::size_t>(*part)].size())});
            } else {
                parts.push_back({*part, pj.at("begin").get<Index>(), pj.at("size").get<Index>()});
            }
        }
        std::vector<Edge> edges;
        for (const auto& ej : j.at("edges")) edges.emplace_back(ej.at(0).get<Index>(), ej.at(1).get<Index>());
        if (!explicit_lists) return SkeletonLayout(n, std::move(parts), std::move(edges));

        // Build through an identity layout, then install the lists and revalidate.
        std::vector<PartRange> contiguous;
        Index begin = 0;
        for (Part p : kAllParts) {
            const Index size = static_cast<Index>(lists[static_cast<std::size_t>(p)].size());
            contiguous.push_back({p, begin, size});
            begin += size;
        }
        SkeletonLayout out;
        out.joint_count_ = n;
        out.parts_ = std::move(contiguous);
        out.edges_ = std::move(edges);
        for (auto& l : lists) std::sort(l.begin(), l.end());
        out.explicit_joints_ = std::move(lists);
        out.validate();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw LayoutError(std::string("layout: malformed JSON: ") + e.what());
    }
}

SkeletonLayout SkeletonLayout::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("layout: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string SkeletonLayout::to_json() const {
    nlohmann::ordered_json j;
    j["joint_count"] = joint_count_;
    j["parts"] = nlohmann::ordered_json::array();
    for (Part p : kAllParts) {
        nlohmann::ordered_json pj;
        pj["name"] = part_name(p);
        if (explicit_joints_.empty()) {
            pj["begin"] = range(p).begin;
            pj["size"] = range(p).size;
        } else {
            pj["joints"] = joints(p);
        }
        j["parts"].push_back(pj);
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : edges_) j["edges"].push_back({a, b});
    return j.dump(2) + "\n";
}

} // namespace slr
