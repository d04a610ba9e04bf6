#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include "slr/numerics/grad_check.hpp"
#include "slr/skeleton/encoder.hpp"
#include "slr/skeleton/graph_conv.hpp"
#include "slr/skeleton/layout.hpp"
#include "slr/skeleton/sequence.hpp"

using namespace slr;

namespace {

SkeletonSequence random_sequence(Index joints, Index frames, std::mt19937_64& rng, int label = 0) {
    std::uniform_real_distribution<double> pos(-1.0, 1.0), conf(0.0, 1.0);
    Tensor t({3, joints, frames});
    for (Index j = 0; j < joints; ++j) {
        for (Index f = 0; f < frames; ++f) {
            t.set(0, j, f, pos(rng));
            t.set(1, j, f, pos(rng));
            t.set(2, j, f, conf(rng));
        }
    }
    return SkeletonSequence(std::move(t), label);
}

SkeletonSequence permute_joints(const SkeletonSequence& s, const std::vector<Index>& perm) {
    Tensor t({3, s.joints(), s.frames()});
    for (Index c = 0; c < 3; ++c) {
        for (Index j = 0; j < s.joints(); ++j) {
            for (Index f = 0; f < s.frames(); ++f) t.set(c, perm[static_cast<std::size_t>(j)], f, s(c, j, f));
        }
    }
    return SkeletonSequence(std::move(t), s.label());
}

bool connected(const std::vector<Index>& members, const std::vector<Edge>& edges) {
    std::vector<Index> seen{members.front()};
    std::queue<Index> todo;
    todo.push(members.front());
    auto in_part = [&](Index j) { return std::find(members.begin(), members.end(), j) != members.end(); };
    while (!todo.empty()) {
        const Index j = todo.front();
        todo.pop();
        for (const auto& [a, b] : edges) {
            for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
                if (from == j && in_part(to) && std::find(seen.begin(), seen.end(), to) == seen.end()) {
                    seen.push_back(to);
                    todo.push(to);
                }
            }
        }
    }
    return seen.size() == members.size();
}

EncoderConfig small_config(int classes = 4) {
    EncoderConfig c;
    c.layers = 2;
    c.channels = 5;
    c.embed_dim = 8;
    c.num_classes = classes;
    c.seed = 7;
    return c;
}

} // namespace

TEST_CASE("standard layout has five disjoint connected parts over 87 joints") {
    const SkeletonLayout layout = SkeletonLayout::standard();
    CHECK(layout.joint_count() == 87);
    const std::vector<Index> sizes{15, 21, 21, 10, 20};
    std::vector<int> owner(87, 0);
    for (Part p : kAllParts) {
        const auto js = layout.joints(p);
        CHECK(static_cast<Index>(js.size()) == sizes[static_cast<std::size_t>(p)]);
        for (Index j : js) ++owner[static_cast<std::size_t>(j)];
        CHECK(connected(js, layout.edges()));
        for (Index j : js) CHECK(layout.part_of(j) == p);
    }
    CHECK(std::all_of(owner.begin(), owner.end(), [](int n) { return n == 1; }));
    for (const auto& [a, b] : layout.edges()) {
        CHECK(a < 87);
        CHECK(b < 87);
    }
}

TEST_CASE("layout JSON round trip and validation") {
    const SkeletonLayout layout = SkeletonLayout::standard();
    CHECK(SkeletonLayout::from_json(layout.to_json()) == layout);
    CHECK(SkeletonLayout::load(std::string(SLR_DATA_DIR) + "/layout_87.json") == layout);

    const std::string overlap =
        R"({"joint_count": 5, "parts": [{"name": "body", "begin": 0, "size": 2}, {"name": "left_hand", "begin": 1, "size": 1},
            {"name": "right_hand", "begin": 2, "size": 1}, {"name": "mouth", "begin": 3, "size": 1},
            {"name": "face", "begin": 4, "size": 1}], "edges": [[0, 1]]})";
    CHECK_THROWS_AS(SkeletonLayout::from_json(overlap), LayoutError);
    const std::string bad_edge =
        R"({"joint_count": 5, "parts": [{"name": "body", "begin": 0, "size": 1}, {"name": "left_hand", "begin": 1, "size": 1},
            {"name": "right_hand", "begin": 2, "size": 1}, {"name": "mouth", "begin": 3, "size": 1},
            {"name": "face", "begin": 4, "size": 1}], "edges": [[0, 9]]})";
    CHECK_THROWS_AS(SkeletonLayout::from_json(bad_edge), LayoutError);
    CHECK_THROWS_AS(SkeletonLayout::from_json("{"), LayoutError);
    CHECK_THROWS_AS(SkeletonLayout::load("/nonexistent/layout.json"), IoError);
}

TEST_CASE("sequence invariants") {
    Tensor t({3, 2, 2});
    t.set(2, 1, 1, 1.5);
    CHECK_THROWS_AS(SkeletonSequence(t, 0), DimensionError);
    CHECK_THROWS_AS(SkeletonSequence(Tensor({3, 2, 1}), 0), DimensionError);
    CHECK_THROWS_AS(SkeletonSequence(Tensor({2, 2, 2}), 0), DimensionError);
}

TEST_CASE("normalized adjacency: hand value, symmetry and spectral bound") {
    const Matrix two = normalized_adjacency(std::vector<Edge>{{0, 1}}, 2);
    CHECK(two.isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));
    CHECK(normalized_adjacency(std::vector<Edge>{}, 3).isIdentity(0));
    CHECK_THROWS_AS(normalized_adjacency(std::vector<Edge>{{0, 3}}, 3), LayoutError);

    const SkeletonLayout layout = SkeletonLayout::standard();
    const Matrix a = normalized_adjacency(layout.edges(), layout.joint_count());
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    CHECK(eig.eigenvalues().minCoeff() >= -1.0 - 1e-12);
    CHECK(eig.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("graph convolution on a two joint chain") {
    Matrix x(2, 2), theta(2, 1);
    x << 1, 2, 3, -4;
    theta << 1, 1;
    const GraphConvLayer layer{theta, normalized_adjacency(std::vector<Edge>{{0, 1}}, 2)};
    ad::Tape tape;
    const ad::Var out = graph_conv_forward(tape, layer, tape.constant(x));
    // X Theta = (3, -1); averaging both joints gives 1 everywhere.
    CHECK(out.value().isApprox(Matrix::Ones(2, 1), 1e-15));

    Matrix wide(2, 3);
    wide.setOnes();
    CHECK_THROWS_AS(graph_conv_forward(tape, layer, tape.constant(wide)), DimensionError);
}

TEST_CASE("graph convolution gradient wrt theta") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    const Matrix adj = normalized_adjacency(std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}}, 4);
    Matrix x(8, 3), theta(3, 5), w(8, 5);
    for (Matrix* m : {&x, &theta, &w}) {
        for (Index i = 0; i < m->size(); ++i) m->data()[i] = g(rng);
    }
    auto build = [&](ad::Tape& t, ad::Var th) {
        return t.sum(t.mul(graph_conv_forward(t.constant(adj), th, t.constant(x)), t.constant(w)));
    };
    ad::Tape tape;
    const ad::Var th = tape.parameter(theta);
    const Matrix analytic = tape.backward(build(tape, th))[th];
    auto f = [&] {
        ad::Tape t;
        return build(t, t.parameter(theta)).scalar();
    };
    CHECK(finite_diff_check(f, {{"theta", &theta, analytic}}, 1e-5).max_relative_error < 1e-4);
}

TEST_CASE("pooling over one joint is that joint's row; identity adjacency pools as plain averages") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    const Index joints = 6, frames = 3;
    Matrix x(2 * frames * joints, 3), theta(3, 4);
    for (Matrix* m : {&x, &theta}) {
        for (Index i = 0; i < m->size(); ++i) m->data()[i] = g(rng);
    }
    ad::Tape tape;
    const ad::Var h = graph_conv_forward(tape.constant(Matrix::Identity(joints, joints)), tape.constant(theta),
                                         tape.constant(x));
    const Matrix direct = (x * theta).cwiseMax(0.0);

    // One group per (sample, frame) block.
    const ad::Var one = tape.segment_mean(h, pooling_groups(2 * frames, 1, joints, {4}));
    CHECK(one.value().row(0).isApprox(direct.row(4), 1e-14));
    CHECK(one.value().row(frames).isApprox(direct.row(frames * joints + 4), 1e-14));

    const std::vector<Index> members{1, 2, 5};
    const ad::Var part = tape.segment_mean(h, pooling_groups(2, frames, joints, members));
    for (Index b = 0; b < 2; ++b) {
        Eigen::RowVectorXd avg = Eigen::RowVectorXd::Zero(4);
        for (Index t = 0; t < frames; ++t) {
            for (Index j : members) avg += direct.row((b * frames + t) * joints + j);
        }
        avg /= double(frames * members.size());
        CHECK(part.value().row(b).isApprox(avg, 1e-13));
    }
}

TEST_CASE("classify loss") {
    CHECK(classify_loss(Vector::Zero(7), 3) == doctest::Approx(std::log(7.0)).epsilon(1e-14));
    Vector logits(3);
    logits << 1.0, 2.0, -0.5;
    const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(-0.5));
    CHECK(classify_loss(logits, 0) == doctest::Approx(lse - 1.0).epsilon(1e-14));
    CHECK(classify_loss(logits, 2) >= 0.0);
    CHECK_THROWS_AS(classify_loss(logits, 3), LabelError);
}

TEST_CASE("bone and motion streams match direct loops") {
    std::mt19937_64 rng(12);
    const SkeletonLayout layout = SkeletonLayout::standard();
    const SkeletonSequence s = random_sequence(87, 5, rng, 3);
    const SkeletonSequence bone = bone_stream(s, layout);
    const SkeletonSequence motion = motion_stream(s);
    std::vector<Index> parent(87, -1);
    for (const auto& [a, b] : layout.edges()) {
        if (parent[static_cast<std::size_t>(b)] < 0) parent[static_cast<std::size_t>(b)] = a;
    }
    for (Index j = 0; j < 87; ++j) {
        const Index p = parent[static_cast<std::size_t>(j)];
        for (Index t = 0; t < 5; ++t) {
            const double dx = p < 0 ? 0.0 : s(0, j, t) - s(0, p, t);
            const double conf = p < 0 ? s(2, j, t) : std::min(s(2, j, t), s(2, p, t));
            CHECK(bone(0, j, t) == dx);
            CHECK(bone(2, j, t) == conf);
            const double mx = t == 4 ? 0.0 : s(1, j, t + 1) - s(1, j, t);
            CHECK(motion(1, j, t) == mx);
            CHECK(motion(2, j, t) == s(2, j, t));
        }
    }
    CHECK(bone.label() == 3);
    CHECK(apply_stream(s, layout, Stream::BoneMotion) == motion_stream(bone));
    CHECK(parse_stream(stream_name(Stream::JointMotion)) == Stream::JointMotion);
}

TEST_CASE("encoder outputs are unit length and inference matches training logits") {
    std::mt19937_64 rng(1);
    const SkeletonEncoder enc(SkeletonLayout::standard(), small_config());
    const std::vector<SkeletonSequence> batch{random_sequence(87, 3, rng), random_sequence(87, 3, rng)};
    const EncodedSkeleton e = enc.encode(batch[0]);
    CHECK(std::abs(e.global.norm() - 1.0) < 1e-9);
    for (const Vector& p : e.parts) CHECK(std::abs(p.norm() - 1.0) < 1e-9);
    const Matrix logits = enc.predict_logits(batch);
    CHECK(logits.row(0).transpose().isApprox(e.logits, 1e-13));
    CHECK(logits.rows() == 2);
    CHECK(logits.cols() == 4);
}

TEST_CASE("encoding is consistent under joint relabeling") {
    std::mt19937_64 rng(31);
    SkeletonEncoder enc(SkeletonLayout::standard(), small_config());
    // Non-zero learned offsets make the check cover them too.
    std::normal_distribution<double> g(0.0, 0.05);
    for (auto& p : enc.parameters()) {
        if (p.name.rfind("adjacency_offset", 0) == 0) {
            for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = g(rng);
        }
    }
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Index> perm(87);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const SkeletonSequence s = random_sequence(87, 3, rng);
        const EncodedSkeleton a = enc.encode(s);
        const EncodedSkeleton b = enc.permuted(perm).encode(permute_joints(s, perm));
        CHECK((a.global - b.global).cwiseAbs().maxCoeff() < 1e-12);
        for (std::size_t p = 0; p < a.parts.size(); ++p) CHECK((a.parts[p] - b.parts[p]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("classification gradient through the encoder matches finite differences") {
    std::mt19937_64 rng(17);
    SkeletonEncoder enc(SkeletonLayout::standard(), small_config(3));
    const std::vector<SkeletonSequence> batch{random_sequence(87, 2, rng, 0), random_sequence(87, 2, rng, 2)};
    ad::Tape tape;
    const auto bound = enc.bind(tape);
    const auto out = enc.forward(tape, bound, batch, false);
    const ad::Gradients g = tape.backward(tape.cross_entropy(out.logits, {0, 2}));
    std::vector<CheckedParameter> params;
    for (std::size_t i = 0; i < enc.parameters().size(); ++i) {
        auto& p = enc.parameters()[i];
        if (p.name.find("proj") != std::string::npos) continue;
        params.push_back({p.name, &p.value, g[bound.vars[i]]});
    }
    auto f = [&] {
        ad::Tape t;
        const auto b = enc.bind(t);
        return t.cross_entropy(enc.forward(t, b, batch, false).logits, {0, 2}).scalar();
    };
    const auto report = finite_diff_check(f, params, 1e-5);
    for (const auto& e : report.entries) {
        INFO(e.name);
        CHECK(e.max_relative_error < 1e-4);
    }
}
