#include "slr/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "slr/contrastive/contrastive.hpp"
#include "slr/error.hpp"
#include "slr/text/text_encoder.hpp"
#include "slr/train/evaluation.hpp"

namespace slr {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string RunMetrics::to_csv() const {
    std::string out = std::string(kMetricsHeader) + "\n";
    for (const auto& e : epochs) {
        out += std::to_string(e.epoch) + "," + num(e.loss_cls) + "," + num(e.loss_con) + "," + num(e.loss_total) +
               "," + num(e.train_top1) + "," + num(e.eval_top1) + "," + num(e.eval_top5) + "\n";
    }
    return out;
}

void RunMetrics::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("metrics: cannot write " + path);
    out << to_csv();
}

TextFeatureSource::TextFeatureSource(Index dim, bool cache, std::uint64_t seed)
    : dim_(dim), cache_(cache), seed_(seed) {}

const Vector& TextFeatureSource::operator()(const std::string& text) {
    if (!cache_) {
        scratch_ = encode_text(text, dim_, seed_);
        return scratch_;
    }
    auto it = memo_.find(text);
    if (it == memo_.end()) it = memo_.emplace(text, encode_text(text, dim_, seed_)).first;
    return it->second;
}

ObjectiveTerms batch_objective(ad::Tape& tape, const SkeletonEncoder& model, const SkeletonEncoder::Bound& bound,
                               std::span<const SkeletonSequence> batch, const std::vector<ClassTexts>& texts,
                               const TrainConfig& config, TextFeatureSource& text_features, int synonym_offset) {
    const auto out = model.forward(tape, bound, batch, config.use_parts);
    std::vector<int> labels;
    for (const auto& s : batch) {
        if (s.label() < 0 || static_cast<std::size_t>(s.label()) >= texts.size()) {
            throw LabelError("batch_objective: label " + std::to_string(s.label()) + " has no descriptions");
        }
        labels.push_back(s.label());
    }
    const ad::Var cls = tape.cross_entropy(out.logits, labels);
    ObjectiveTerms terms{cls, std::nullopt, cls, out.logits, 0};
    const ContrastiveConfig cc{config.temperature, config.alpha};
    const Index d = text_features.dim();
    std::vector<ad::Var> con;

    auto feature_matrix = [&](const std::vector<std::string>& rows) {
        Matrix m(static_cast<Index>(rows.size()), d);
        for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = text_features(rows[i]).transpose();
        return m;
    };

    if (config.use_global) {
        std::vector<std::string> rows;
        for (int c : labels) rows.push_back(texts[static_cast<std::size_t>(c)].refined);
        con.push_back(contrastive_loss(out.global, feature_matrix(rows), labels, labels, cc));
    }
    if (config.use_synonym) {
        std::vector<std::string> rows;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto& syn = texts[static_cast<std::size_t>(labels[i])].synonyms;
            if (syn.empty()) throw LabelError("batch_objective: class " + std::to_string(labels[i]) + " has no synonyms");
            rows.push_back(syn[(i + static_cast<std::size_t>(synonym_offset)) % syn.size()]);
        }
        con.push_back(contrastive_loss(out.global, feature_matrix(rows), labels, labels, cc));
    }
    if (config.use_parts) {
        for (Part p : kAllParts) {
            std::vector<Index> skeleton_rows;
            std::vector<int> skeleton_labels, text_labels;
            std::vector<std::string> rows;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                bool any = false;
                for (const auto& r : texts[static_cast<std::size_t>(labels[i])].parts) {
                    if (std::find(r.parts.begin(), r.parts.end(), p) == r.parts.end()) continue;
                    rows.push_back(r.text);
                    text_labels.push_back(labels[i]);
                    any = true;
                }
                if (any) {
                    skeleton_rows.push_back(static_cast<Index>(i));
                    skeleton_labels.push_back(labels[i]);
                }
            }
            if (rows.empty()) continue;
            const ad::Var part_features = tape.select_rows(*out.parts[static_cast<std::size_t>(p)], skeleton_rows);
            con.push_back(contrastive_loss(part_features, feature_matrix(rows), skeleton_labels, text_labels, cc));
        }
    }

    terms.contrastive_terms = static_cast<int>(con.size());
    if (con.empty()) {
        terms.total = terms.cls;
    } else {
        terms.con = multipart_loss(con);
        terms.total = total_loss(terms.cls, *terms.con, cc);
    }
    return terms;
}

EncoderConfig encoder_config(const TrainConfig& config) {
    return {config.layers, config.channels, config.embed_dim, config.num_classes, config.seed};
}

Dataset stream_view(const Dataset& data, const SkeletonLayout& layout, Stream stream) {
    if (stream == Stream::Joint) return data;
    Dataset out;
    for (const auto& s : data.train) out.train.push_back(apply_stream(s, layout, stream));
    for (const auto& s : data.test) out.test.push_back(apply_stream(s, layout, stream));
    return out;
}

TrainResult train(const TrainConfig& config, const SkeletonLayout& layout, const Dataset& data,
                  const std::vector<ClassTexts>& texts) {
    config.validate();
    if (data.train.empty() || data.test.empty()) throw ParameterError("train: empty split");
    SkeletonEncoder model(layout, encoder_config(config));
    TextFeatureSource text_features(config.embed_dim, config.cache_text_features);
    RunMetrics metrics;

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed * 0x2545F4914F6CDD1Dull + 17);
    const auto batch_size = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const double lr = lr_at(epoch, config);
        EpochMetrics em;
        em.epoch = epoch;
        std::size_t correct = 0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            std::vector<SkeletonSequence> batch;
            for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
                batch.push_back(data.train[order[i]]);
            }
            ad::Tape tape;
            const auto bound = model.bind(tape);
            const std::string where = " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches);
            std::optional<ObjectiveTerms> recorded;
            try {
                recorded = batch_objective(tape, model, bound, batch, texts, config, text_features, epoch);
            } catch (const EvaluationError& e) {
                // Overflowing activations surface here before any loss exists.
                throw TrainingDivergence("train: " + std::string(e.what()) + where);
            } catch (const DivergenceError& e) {
                throw TrainingDivergence("train: " + std::string(e.what()) + where);
            }
            const ObjectiveTerms& terms = *recorded;
            const double total = terms.total.scalar();
            if (!std::isfinite(total)) throw TrainingDivergence("train: non-finite loss" + where);
            em.loss_cls += terms.cls.scalar();
            em.loss_con += terms.con ? terms.con->scalar() : 0.0;
            em.loss_total += total;

            const auto preds = predictions(terms.logits.value());
            for (std::size_t i = 0; i < batch.size(); ++i) correct += preds[i] == batch[i].label();

            const ad::Gradients grads = tape.backward(terms.total);
            auto& params = model.parameters();
            for (std::size_t k = 0; k < params.size(); ++k) {
                Matrix& w = params[k].value;
                w -= lr * (grads[bound.vars[k]] + config.weight_decay * w);
                if (!w.allFinite()) {
                    throw TrainingDivergence("train: non-finite " + params[k].name + " after update" + where);
                }
            }
            ++batches;
        }
        em.loss_cls /= batches;
        em.loss_con /= batches;
        em.loss_total /= batches;
        em.train_top1 = static_cast<double>(correct) / static_cast<double>(order.size());
        const TopK eval = evaluate(model, data.test);
        em.eval_top1 = eval.top1;
        em.eval_top5 = eval.top5;
        metrics.epochs.push_back(em);
    }
    return {std::move(model), std::move(metrics)};
}

GradCheckReport objective_grad_check(std::uint64_t seed, double eps) {
    TrainConfig cfg;
    cfg.num_classes = 2;
    cfg.frames = 4;
    cfg.layers = 2;
    cfg.channels = 6;
    cfg.embed_dim = 16;
    cfg.seed = seed;

    auto specs = make_sign_specs(cfg.num_classes, seed, 0.05);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> amp(0.08, 0.3);
    for (auto& s : specs) {
        for (std::size_t p = 0; p < kPartCount; ++p) {
            if (s.active[p]) continue;
            s.active[p] = true;
            s.motion[p] = {amp(rng), 2.0, amp(rng) * 10.0, 0.05, -0.05};
        }
    }
    const SkeletonLayout layout = SkeletonLayout::standard();
    const auto data = generate_dataset(specs, layout, 4, cfg.frames, seed, 0.5);
    const auto texts = group_descriptions(build_description_set(specs, cfg.synonym_count, seed).records, cfg.num_classes);
    std::vector<SkeletonSequence> batch = data.train;

    SkeletonEncoder model(layout, encoder_config(cfg));
    TextFeatureSource text_features(cfg.embed_dim, true);
    auto objective = [&](ad::Tape& tape, const SkeletonEncoder::Bound& bound) {
        return batch_objective(tape, model, bound, batch, texts, cfg, text_features).total;
    };

    ad::Tape tape;
    const auto bound = model.bind(tape);
    const ad::Var total = objective(tape, bound);
    const ad::Gradients grads = tape.backward(total);
    std::vector<CheckedParameter> params;
    for (std::size_t k = 0; k < model.parameters().size(); ++k) {
        auto& p = model.parameters()[k];
        params.push_back({p.name, &p.value, grads[bound.vars[k]]});
    }
    return finite_diff_check(
        [&] {
            ad::Tape t;
            const auto b = model.bind(t);
            return objective(t, b).scalar();
        },
        std::move(params), eps);
}

} // namespace slr
