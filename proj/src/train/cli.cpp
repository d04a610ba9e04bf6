#include "slr/train/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "slr/error.hpp"
#include "slr/gsp/backend.hpp"
#include "slr/gsp/pipeline.hpp"
#include "slr/train/ablation.hpp"
#include "slr/train/evaluation.hpp"
#include "slr/train/model_io.hpp"
#include "slr/train/trainer.hpp"

namespace slr {

namespace {

namespace fs = std::filesystem;

// Every TrainConfig key except seed, which is a common flag.
constexpr const char* kConfigKeys[] = {
    "epochs",       "batch_size", "lr",          "warmup_epochs",     "decay_epochs", "decay_factor",
    "weight_decay", "temperature", "alpha",      "embed_dim",         "stream",       "num_classes",
    "samples_per_class", "frames", "layers",     "channels",          "noise",        "train_fraction",
    "use_global",   "use_synonym", "use_parts",  "synonym_count",     "cache_text_features",
};

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out_dir = ".";
};

struct ConfigFlags {
    Common common;
    std::map<std::string, std::string> values;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--config", c.config, "Key-value config file")->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", c.out_dir, "Output directory");
}

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    add_common(cmd, f.common);
    for (const char* key : kConfigKeys) {
        std::string flag = std::string("--") + key;
        for (char& ch : flag) if (ch == '_') ch = '-';
        cmd->add_option(flag, f.values[key], std::string("Overrides config key ") + key);
    }
}

// File values first, then flags given on the command line.
TrainConfig resolve_config(const ConfigFlags& f, const CLI::App* cmd) {
    TrainConfig cfg = f.common.config.empty() ? TrainConfig{} : TrainConfig::load(f.common.config);
    for (const char* key : kConfigKeys) {
        std::string flag = std::string("--") + key;
        for (char& ch : flag) if (ch == '_') ch = '-';
        if (cmd->count(flag) > 0) cfg.set(key, f.values.at(key));
    }
    if (f.common.seed) cfg.seed = *f.common.seed;
    cfg.validate();
    return cfg;
}

fs::path out_path(const Common& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return fs::path(c.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

struct Prepared {
    SkeletonLayout layout;
    std::vector<SyntheticSignSpec> specs;
    Dataset data;
};

Prepared prepare(const TrainConfig& cfg, const std::string& layout_path) {
    SkeletonLayout layout = layout_path.empty() ? SkeletonLayout::standard() : SkeletonLayout::load(layout_path);
    auto specs = make_sign_specs(cfg.num_classes, cfg.seed, cfg.noise);
    Dataset raw = generate_dataset(specs, layout, cfg.samples_per_class, cfg.frames, cfg.seed, cfg.train_fraction);
    Dataset data = stream_view(raw, layout, cfg.stream);
    return {std::move(layout), std::move(specs), std::move(data)};
}

std::vector<ClassTexts> load_texts(const TrainConfig& cfg, const Prepared& p, const std::string& descriptions) {
    if (!descriptions.empty()) return group_descriptions(read_records(descriptions), cfg.num_classes);
    auto set = build_description_set(p.specs, cfg.synonym_count, cfg.seed);
    for (const auto& w : set.warnings) std::cerr << "warning: " << w << '\n';
    return group_descriptions(set.records, cfg.num_classes);
}

std::string scores_csv(const Matrix& scores, const std::vector<int>& labels) {
    std::string out = "label";
    for (Index c = 0; c < scores.cols(); ++c) out += ",class_" + std::to_string(c);
    out += '\n';
    char buf[32];
    for (Index i = 0; i < scores.rows(); ++i) {
        out += std::to_string(labels[static_cast<std::size_t>(i)]);
        for (Index c = 0; c < scores.cols(); ++c) {
            std::snprintf(buf, sizeof buf, ",%.17g", scores(i, c));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::pair<Matrix, std::vector<int>> read_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        labels.push_back(std::stoi(cell));
        rows.emplace_back();
        while (std::getline(ss, cell, ',')) rows.back().push_back(std::stod(cell));
        if (rows.back().size() != rows.front().size()) throw IoError(path + ": ragged score rows");
    }
    if (rows.empty()) throw IoError(path + ": no score rows");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) m(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
    }
    return {std::move(m), std::move(labels)};
}

std::string clip_json(const SkeletonSequence& s, const char* split) {
    nlohmann::ordered_json j;
    j["split"] = split;
    j["label"] = s.label();
    j["joints"] = s.joints();
    j["frames"] = s.frames();
    j["values"] = std::vector<double>(s.values().values().begin(), s.values().values().end());
    return j.dump();
}

} // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Skeleton sign recognition with description-guided contrastive training"};
    app.require_subcommand(1);

    ConfigFlags train_flags;
    std::string train_layout, train_descriptions;
    auto* train_cmd = app.add_subcommand("train", "Train on a synthetic corpus; writes metrics.csv, model.bin, scores");
    add_config_flags(train_cmd, train_flags);
    train_cmd->add_option("--layout", train_layout, "Layout JSON (default: built-in 87-joint layout)");
    train_cmd->add_option("--descriptions", train_descriptions, "Description JSONL (default: generated offline)");

    Common eval_common;
    std::string eval_model;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a saved model on its test split");
    add_common(eval_cmd, eval_common);
    eval_cmd->add_option("--model", eval_model, "Model file")->required()->check(CLI::ExistingFile);

    ConfigFlags ablate_flags;
    std::string ablate_layout;
    auto* ablate_cmd = app.add_subcommand("ablate", "Run the five-row ablation; writes ablation.csv");
    add_config_flags(ablate_cmd, ablate_flags);
    ablate_cmd->add_option("--layout", ablate_layout, "Layout JSON");

    Common fuse_common;
    std::vector<std::string> fuse_inputs;
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse per-stream score CSVs by summing softmax scores");
    add_common(fuse_cmd, fuse_common);
    fuse_cmd->add_option("--scores", fuse_inputs, "Score CSV files")->required()->check(CLI::ExistingFile);

    ConfigFlags data_flags;
    std::string data_layout;
    auto* data_cmd = app.add_subcommand("generate-data", "Write the synthetic dataset, its corpus and knowledge base");
    add_config_flags(data_cmd, data_flags);
    data_cmd->add_option("--layout", data_layout, "Layout JSON");

    Common gen_common;
    std::string corpus_path, kb_path, backend = "mock", desc_out, http_url = "http://127.0.0.1:8080/generate";
    double http_timeout = 30.0;
    int http_retries = 2, synonyms = 2;
    auto* gen_cmd = app.add_subcommand("generate-descriptions", "Run the description pipeline over a corpus");
    add_common(gen_cmd, gen_common);
    gen_cmd->add_option("--corpus", corpus_path, "Corpus JSONL {class_id, gloss}")->required()->check(CLI::ExistingFile);
    gen_cmd->add_option("--kb", kb_path, "Knowledge base JSONL {key, text}")->required()->check(CLI::ExistingFile);
    gen_cmd->add_option("--backend", backend, "mock or http")->check(CLI::IsMember({"mock", "http"}));
    gen_cmd->add_option("--out", desc_out, "Output JSONL")->required();
    gen_cmd->add_option("--synonyms", synonyms, "Synonym descriptions per sign")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--http-url", http_url, "Generation endpoint");
    gen_cmd->add_option("--http-timeout", http_timeout, "Seconds per request")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--http-retries", http_retries, "Retries after a failed request")->check(CLI::NonNegativeNumber);

    Common grad_common;
    double grad_eps = 1e-5, grad_tol = 1e-4;
    auto* grad_cmd = app.add_subcommand("grad-check", "Finite-difference check of the full training objective");
    add_common(grad_cmd, grad_common);
    grad_cmd->add_option("--eps", grad_eps, "Central difference step")->check(CLI::Range(1e-7, 1e-3));
    grad_cmd->add_option("--tolerance", grad_tol, "Largest accepted relative error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*train_cmd) {
            const TrainConfig cfg = resolve_config(train_flags, train_cmd);
            const Prepared p = prepare(cfg, train_layout);
            const auto texts = load_texts(cfg, p, train_descriptions);
            const TrainResult result = train(cfg, p.layout, p.data, texts);
            const Common& c = train_flags.common;
            result.metrics.write_csv(out_path(c, "metrics.csv").string());
            save_model(out_path(c, "model.bin").string(), result.model, cfg);
            write_text(out_path(c, "config.cfg"), cfg.to_kv());
            const std::string stream = stream_name(cfg.stream);
            write_text(out_path(c, "scores_" + stream + ".csv"),
                       scores_csv(class_scores(result.model, p.data.test), labels_of(p.data.test)));
            const auto& last = result.metrics.epochs.back();
            std::printf("stream=%s epochs=%d loss_total=%.6f eval_top1=%.4f eval_top5=%.4f\n", stream.c_str(),
                        cfg.epochs, last.loss_total, last.eval_top1, last.eval_top5);
        } else if (*eval_cmd) {
            const LoadedModel loaded = load_model(eval_model);
            TrainConfig cfg = loaded.config;
            if (eval_common.seed) cfg.seed = *eval_common.seed;
            auto specs = make_sign_specs(cfg.num_classes, cfg.seed, cfg.noise);
            const Dataset raw = generate_dataset(specs, loaded.model.layout(), cfg.samples_per_class, cfg.frames,
                                                 cfg.seed, cfg.train_fraction);
            const Dataset data = stream_view(raw, loaded.model.layout(), cfg.stream);
            const TopK r = evaluate(loaded.model, data.test);
            write_text(out_path(eval_common, std::string("scores_") + stream_name(cfg.stream) + ".csv"),
                       scores_csv(class_scores(loaded.model, data.test), labels_of(data.test)));
            std::printf("top1=%.4f top5=%.4f samples=%zu\n", r.top1, r.top5, data.test.size());
        } else if (*ablate_cmd) {
            const TrainConfig cfg = resolve_config(ablate_flags, ablate_cmd);
            const Prepared p = prepare(cfg, ablate_layout);
            const auto texts = load_texts(cfg, p, "");
            const std::string csv = ablation_csv(run_ablation(cfg, p.layout, p.data, texts));
            write_text(out_path(ablate_flags.common, "ablation.csv"), csv);
            std::fputs(csv.c_str(), stdout);
        } else if (*fuse_cmd) {
            std::vector<Matrix> scores;
            std::vector<int> labels;
            for (const auto& path : fuse_inputs) {
                auto [m, l] = read_scores(path);
                if (!labels.empty() && l != labels) throw LabelError("fuse: " + path + " lists different labels");
                labels = std::move(l);
                scores.push_back(std::move(m));
            }
            const FusionResult r = fuse_streams(scores, labels);
            std::string out = "label,prediction\n";
            for (std::size_t i = 0; i < labels.size(); ++i) {
                out += std::to_string(labels[i]) + "," + std::to_string(r.predictions[i]) + "\n";
            }
            write_text(out_path(fuse_common, "fused_predictions.csv"), out);
            std::printf("streams=%zu fused_top1=%.4f\n", scores.size(), r.accuracy);
        } else if (*data_cmd) {
            const TrainConfig cfg = resolve_config(data_flags, data_cmd);
            const Prepared p = prepare(cfg, data_layout);
            const Common& c = data_flags.common;
            std::string clips;
            for (const auto& s : p.data.train) clips += clip_json(s, "train") + "\n";
            for (const auto& s : p.data.test) clips += clip_json(s, "test") + "\n";
            write_text(out_path(c, "clips.jsonl"), clips);
            std::string kb;
            const KnowledgeBase knowledge = synthetic_knowledge_base(p.specs);
            for (const auto& passage : knowledge.passages()) {
                nlohmann::ordered_json j;
                j["key"] = passage.key;
                j["text"] = passage.text;
                kb += j.dump() + "\n";
            }
            write_text(out_path(c, "kb.jsonl"), kb);
            std::string corpus;
            for (const auto& e : synthetic_corpus(p.specs)) {
                nlohmann::ordered_json j;
                j["class_id"] = e.class_id;
                j["gloss"] = e.gloss;
                corpus += j.dump() + "\n";
            }
            write_text(out_path(c, "corpus.jsonl"), corpus);
            write_text(out_path(c, "layout.json"), p.layout.to_json());
            std::printf("train=%zu test=%zu classes=%d\n", p.data.train.size(), p.data.test.size(), cfg.num_classes);
        } else if (*gen_cmd) {
            const KnowledgeBase kb = KnowledgeBase::load(kb_path);
            const auto corpus = read_corpus(corpus_path);
            std::unique_ptr<GeneratorBackend> engine;
            if (backend == "mock") {
                engine = std::make_unique<MockBackend>(gen_common.seed.value_or(1), &kb);
            } else {
                engine = std::make_unique<HttpBackend>(http_url, http_timeout, http_retries);
            }
            PipelineOptions options;
            options.synonym_count = synonyms;
            const GspPipeline pipeline(kb, *engine, options);
            const PipelineOutput result = pipeline.run(corpus);
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
            write_records(desc_out, result.records);
            std::printf("signs=%zu records=%zu warnings=%zu\n", corpus.size(), result.records.size(),
                        result.warnings.size());
        } else if (*grad_cmd) {
            const GradCheckReport report = objective_grad_check(grad_common.seed.value_or(1), grad_eps);
            for (const auto& e : report.entries) {
                std::printf("%-24s max_rel_err=%.3e analytic=%.6e numeric=%.6e\n", e.name.c_str(), e.max_relative_error, e.analytic, e.numeric);
            }
            std::printf("max_rel_err=%.3e tolerance=%.1e\n", report.max_relative_error, grad_tol);
            return report.max_relative_error < grad_tol ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace slr
