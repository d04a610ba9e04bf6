#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "slr/contrastive/contrastive.hpp"
#include "slr/error.hpp"
#include "slr/numerics/grad_check.hpp"
#include "slr/numerics/kernels.hpp"

using namespace slr;

namespace {

Matrix unit_rows(Index n, Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(n, d);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return l2_normalize(m, 1);
}

// Label-closed batch: every skeleton label has at least one text.
BatchPairing random_pairing(std::mt19937_64& rng, Index b, Index m, int classes, Index d = 6) {
    std::uniform_int_distribution<int> cls(0, classes - 1);
    BatchPairing p;
    for (Index i = 0; i < b; ++i) p.skeleton_labels.push_back(cls(rng));
    for (Index j = 0; j < m; ++j) {
        p.text_labels.push_back(j < b ? p.skeleton_labels[static_cast<std::size_t>(j)]
                                      : p.skeleton_labels[std::uniform_int_distribution<std::size_t>(0, b - 1)(rng)]);
    }
    p.skeleton_features = unit_rows(b, d, rng);
    p.text_features = unit_rows(m, d, rng);
    return p;
}

// Independent long double version of the two-sided soft-target loss.
long double oracle_loss(const BatchPairing& p, long double tau) {
    const auto b = p.skeleton_features.rows(), m = p.text_features.rows();
    std::vector<std::vector<long double>> sim(b, std::vector<long double>(m));
    for (Index i = 0; i < b; ++i) {
        for (Index j = 0; j < m; ++j) {
            long double s = 0;
            for (Index k = 0; k < p.skeleton_features.cols(); ++k) {
                s += static_cast<long double>(p.skeleton_features(i, k)) * p.text_features(j, k);
            }
            sim[i][j] = s / tau;
        }
    }
    long double s2t = 0, t2s = 0;
    for (Index i = 0; i < b; ++i) {
        long double z = 0;
        int n = 0;
        for (Index j = 0; j < m; ++j) {
            z += std::exp(sim[i][j]);
            n += p.text_labels[j] == p.skeleton_labels[i];
        }
        for (Index j = 0; j < m; ++j) {
            if (p.text_labels[j] != p.skeleton_labels[i]) continue;
            const long double pij = 1.0L / n;
            s2t += pij * std::log(pij / (std::exp(sim[i][j]) / z));
        }
    }
    for (Index j = 0; j < m; ++j) {
        long double z = 0;
        int n = 0;
        for (Index i = 0; i < b; ++i) {
            z += std::exp(sim[i][j]);
            n += p.text_labels[j] == p.skeleton_labels[i];
        }
        for (Index i = 0; i < b; ++i) {
            if (p.text_labels[j] != p.skeleton_labels[i]) continue;
            const long double pji = 1.0L / n;
            t2s += pji * std::log(pji / (std::exp(sim[i][j]) / z));
        }
    }
    return 0.5L * (s2t / b + t2s / m);
}

} // namespace

TEST_CASE("similarity is the explicit cosine") {
    std::mt19937_64 rng(1);
    const Matrix s = unit_rows(3, 4, rng), t = unit_rows(5, 4, rng);
    const Matrix sim = similarity_matrix(s, t);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 5; ++j) {
            double dot = 0, ns = 0, nt = 0;
            for (Index k = 0; k < 4; ++k) {
                dot += s(i, k) * t(j, k);
                ns += s(i, k) * s(i, k);
                nt += t(j, k) * t(j, k);
            }
            CHECK(sim(i, j) == doctest::Approx(dot / std::sqrt(ns * nt)).epsilon(1e-14));
            CHECK(std::abs(sim(i, j)) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("q_s2t on a one-row case at extended precision") {
    Matrix sim(1, 3);
    sim << 1, 0, 0;
    const Matrix q = q_s2t(sim, 0.1);
    const long double z = std::exp(10.0L) + 2.0L;
    CHECK(std::abs(q(0, 0) - static_cast<double>(std::exp(10.0L) / z)) < 1e-15);
    CHECK(std::abs(q(0, 1) - static_cast<double>(1.0L / z)) < 1e-15);
    CHECK_THROWS_AS(q_s2t(sim, 0.0), ParameterError);
}

TEST_CASE("q_t2s is a column softmax presented text by skeleton") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix sim(2, 3);
    for (Index i = 0; i < sim.size(); ++i) sim.data()[i] = u(rng);
    const Matrix q = q_t2s(sim, 0.1);
    REQUIRE(q.rows() == 3);
    REQUIRE(q.cols() == 2);
    for (Index j = 0; j < 3; ++j) {
        const long double z = std::exp(sim(0, j) / 0.1L) + std::exp(sim(1, j) / 0.1L);
        for (Index i = 0; i < 2; ++i) {
            CHECK(std::abs(q(j, i) - static_cast<double>(std::exp(sim(i, j) / 0.1L) / z)) < 1e-15);
        }
    }
}

TEST_CASE("match distribution by indicator counting") {
    const std::vector<int> skel{4, 2, 4};
    const std::vector<int> text{4, 2, 4, 2, 2};
    const Matrix p = match_distribution(skel, text);
    CHECK(p.row(0) == p.row(2));
    for (Index i = 0; i < 3; ++i) {
        int n = 0;
        for (int t : text) n += t == skel[static_cast<std::size_t>(i)];
        for (Index j = 0; j < 5; ++j) CHECK(p(i, j) == (text[static_cast<std::size_t>(j)] == skel[static_cast<std::size_t>(i)] ? 1.0 / n : 0.0));
    }
    const std::vector<int> missing{4, 7};
    CHECK_THROWS_AS(match_distribution(missing, text), DegeneratePairingError);
}

TEST_CASE("loss equals a direct long double evaluation") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const BatchPairing p = random_pairing(rng, 4, 9, 3);
        const double got = contrastive_loss(p, {0.1, 0.5});
        CHECK(std::abs(got - static_cast<double>(oracle_loss(p, 0.1L))) < 1e-11);
        CHECK(got >= 0.0);
    }
}

TEST_CASE("rows of every distribution sum to one") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const BatchPairing p = random_pairing(rng, 5, 12, 4);
        const Matrix sim = similarity_matrix(p.skeleton_features, p.text_features);
        for (const Matrix& m : {q_s2t(sim, 0.1), q_t2s(sim, 0.1), match_distribution(p.skeleton_labels, p.text_labels),
                                match_distribution(p.text_labels, p.skeleton_labels)}) {
            CHECK((m.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("permuting texts with their labels leaves the loss unchanged") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const BatchPairing p = random_pairing(rng, 4, 10, 3);
        std::vector<Index> perm(10);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        BatchPairing q = p;
        for (Index j = 0; j < 10; ++j) {
            q.text_features.row(j) = p.text_features.row(perm[static_cast<std::size_t>(j)]);
            q.text_labels[static_cast<std::size_t>(j)] = p.text_labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
        }
        CHECK(std::abs(contrastive_loss(p, {}) - contrastive_loss(q, {})) < 1e-12);
    }
}

TEST_CASE("duplicating the whole batch changes the loss by less than 1e-9") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const BatchPairing p = random_pairing(rng, 3, 7, 3);
        BatchPairing d;
        d.skeleton_features.resize(6, p.skeleton_features.cols());
        d.skeleton_features << p.skeleton_features, p.skeleton_features;
        d.text_features.resize(14, p.text_features.cols());
        d.text_features << p.text_features, p.text_features;
        d.skeleton_labels = p.skeleton_labels;
        d.skeleton_labels.insert(d.skeleton_labels.end(), p.skeleton_labels.begin(), p.skeleton_labels.end());
        d.text_labels = p.text_labels;
        d.text_labels.insert(d.text_labels.end(), p.text_labels.begin(), p.text_labels.end());
        CHECK(std::abs(contrastive_loss(p, {}) - contrastive_loss(d, {})) < 1e-9);
    }
}

TEST_CASE("matched pairs below their target are pulled together") {
    std::mt19937_64 rng(7);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const BatchPairing p = random_pairing(rng, 4, 8, 3);
        const Matrix sim = similarity_matrix(p.skeleton_features, p.text_features);
        const Matrix target = match_distribution(p.skeleton_labels, p.text_labels);
        ad::Tape tape;
        const ad::Var s = tape.parameter(sim);
        const ad::Var term = tape.mean(tape.kl_divergence(tape.constant(target), tape.softmax(s, 1, 0.1), 1));
        const Matrix g = tape.backward(term)[s];
        const Matrix q = q_s2t(sim, 0.1);
        for (Index i = 0; i < sim.rows(); ++i) {
            for (Index j = 0; j < sim.cols(); ++j) {
                if (target(i, j) > 0 && q(i, j) < target(i, j)) {
                    CHECK(g(i, j) <= 0.0);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("gradient wrt skeleton features matches finite differences") {
    std::mt19937_64 rng(8);
    const BatchPairing p = random_pairing(rng, 4, 9, 3);
    Matrix raw = p.skeleton_features * 1.7;
    auto build = [&](ad::Tape& t, ad::Var x) {
        return contrastive_loss(t.l2_normalize(x, 1), p.text_features, p.skeleton_labels, p.text_labels, {});
    };
    ad::Tape tape;
    const ad::Var x = tape.parameter(raw);
    const ad::Var loss = build(tape, x);
    CHECK(loss.scalar() == doctest::Approx(contrastive_loss(p, {})).epsilon(1e-12));
    const Matrix analytic = tape.backward(loss)[x];
    auto f = [&] {
        ad::Tape t;
        return build(t, t.parameter(raw)).scalar();
    };
    CHECK(finite_diff_check(f, {{"skeleton", &raw, analytic}}, 1e-5).max_relative_error < 1e-4);
}

TEST_CASE("multipart loss averages only evaluated terms") {
    ad::Tape tape;
    const std::vector<ad::Var> terms{tape.constant(Matrix::Constant(1, 1, 0.2)), tape.constant(Matrix::Constant(1, 1, 0.4)),
                                     tape.constant(Matrix::Constant(1, 1, 0.6))};
    CHECK(multipart_loss(terms).scalar() == doctest::Approx(0.4).epsilon(1e-15));
    CHECK_THROWS_AS(multipart_loss(std::span<const ad::Var>{}), ContractError);

    std::mt19937_64 rng(9);
    const BatchPairing g = random_pairing(rng, 3, 5, 2), s = random_pairing(rng, 3, 6, 2), h = random_pairing(rng, 2, 4, 2);
    const ContrastiveConfig cfg;
    const double expected = (contrastive_loss(g, cfg) + contrastive_loss(s, cfg) + contrastive_loss(h, cfg)) / 3.0;
    CHECK(multipart_loss(g, s, {{Part::LeftHand, h}}, cfg) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(multipart_loss(std::nullopt, std::nullopt, {{Part::Face, h}}, cfg) ==
          doctest::Approx(contrastive_loss(h, cfg)).epsilon(1e-14));
}

TEST_CASE("total loss and configuration checks") {
    CHECK(total_loss(1.0, 0.4, {0.1, 0.5}) == doctest::Approx(1.2));
    CHECK_THROWS_AS(ContrastiveConfig({0.0, 0.5}).validate(), ParameterError);
    std::mt19937_64 rng(10);
    BatchPairing p = random_pairing(rng, 2, 3, 2);
    p.skeleton_features(0, 0) += 0.1;
    CHECK_THROWS(p.validate());
    BatchPairing q = random_pairing(rng, 2, 3, 2);
    q.text_labels.pop_back();
    CHECK_THROWS(q.validate());
}
