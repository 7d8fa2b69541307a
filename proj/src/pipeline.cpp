#include "rpe/pipeline.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rpe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(16) << v;
    return out.str();
}

std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

// Reads just enough of a cache file to decide whether it matches.
bool cache_header_ok(const std::string& path, std::uint64_t expected_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::uint32_t magic = 0;
    std::uint32_t version = 0;
    std::uint64_t hash = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
    return in.good() && hash == expected_hash;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path);
    out << content;
    if (!out.good()) throw DataError("write failed: " + path);
}

}  // namespace

std::uint64_t PipelineManifest::preprocess_hash() const {
    std::ostringstream key;
    key << tool_version << '|' << hex64(train.hash) << '|' << hex64(valid.hash) << '|' << hex64(test.hash) << '|'
        << max_path_len << '|' << std::setprecision(17) << eta;
    return fnv1a64(key.str());
}

void PipelineManifest::save(const std::string& path) const {
    json j;
    j["tool_version"] = tool_version;
    j["max_path_len"] = max_path_len;
    j["eta"] = eta;
    auto ref = [](const DatasetRef& d) {
        return json{{"path", d.path}, {"hash", d.path.empty() ? "" : hex64(d.hash)}};
    };
    j["train"] = ref(train);
    j["valid"] = ref(valid);
    j["test"] = ref(test);
    j["preprocess_hash"] = hex64(preprocess_hash());
    write_text_file(path, j.dump(2) + "\n");
}

PipelineManifest PipelineManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("corrupt manifest " + path + ": " + e.what());
    }
    PipelineManifest m;
    try {
        m.tool_version = j.at("tool_version").get<std::string>();
        m.max_path_len = j.at("max_path_len").get<int>();
        m.eta = j.at("eta").get<double>();
        auto ref = [&](const char* key) {
            DatasetRef d;
            d.path = j.at(key).at("path").get<std::string>();
            const std::string h = j.at(key).at("hash").get<std::string>();
            if (!h.empty()) d.hash = parse_hex64(h);
            return d;
        };
        m.train = ref("train");
        m.valid = ref("valid");
        m.test = ref("test");
    } catch (const json::exception& e) {
        throw DataError("corrupt manifest " + path + ": " + e.what());
    }
    return m;
}

std::string resolve_cache_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("RPE_CACHE_DIR"); env != nullptr && *env != '\0') return env;
    return "rpe_cache";
}

PreprocessResult cmd_preprocess(const PreprocessOptions& options, std::ostream& out) {
    if (options.eta <= 0 || options.eta >= 1) throw ConfigError("eta must lie in (0,1)");
    if (options.max_path_len < 1) throw ConfigError("max path length must be >= 1");
    if (options.train_path.empty()) throw ConfigError("preprocess needs --train");

    PipelineManifest manifest;
    manifest.train = {options.train_path, hash_file(options.train_path)};
    if (!options.valid_path.empty()) manifest.valid = {options.valid_path, hash_file(options.valid_path)};
    if (!options.test_path.empty()) manifest.test = {options.test_path, hash_file(options.test_path)};
    manifest.max_path_len = options.max_path_len;
    manifest.eta = options.eta;
    const std::uint64_t key = manifest.preprocess_hash();

    CachePaths cache{resolve_cache_dir(options.cache_dir)};
    fs::create_directories(cache.dir);

    if (fs::exists(cache.manifest())) {
        bool stale = true;
        try {
            const PipelineManifest existing = PipelineManifest::load(cache.manifest());
            stale = existing.preprocess_hash() != key;
        } catch (const DataError&) {
            stale = true;
        }
        if (!stale && cache_header_ok(cache.store(), key) && cache_header_ok(cache.evidence(), key)) {
            out << "preprocess: up to date (" << cache.dir << ")\n";
            PreprocessResult r;
            r.up_to_date = true;
            return r;
        }
        out << "preprocess: cache is stale, rebuilding\n";
    }

    TripleStore store;
    auto report_load = [&](const std::string& path, Split split) {
        if (path.empty()) return;
        const LoadReport r = store.load_triples(path, split);
        out << "loaded " << split_name(split) << ": " << r.added << " triples";
        if (r.duplicates > 0) out << ", " << r.duplicates << " duplicates dropped";
        if (!r.skipped.empty()) out << ", " << r.skipped.size() << " skipped (unseen entity/relation)";
        out << '\n';
    };
    report_load(options.train_path, Split::Train);
    report_load(options.valid_path, Split::Valid);
    report_load(options.test_path, Split::Test);

    store.add_inverses();
    out << "vocab: " << store.entity_count() << " entities, " << store.original_relation_count()
        << " relations (" << store.relation_count() << " with inverses)\n";

    store.save_id_maps(cache.dir);
    store.save_cache(cache.store(), key);

    AdjacencyIndex index(store);
    MiningConfig mining{options.max_path_len, options.eta, options.threads};
    const PathEvidence evidence = mine_evidence(store, index, mining);
    evidence.save(cache.evidence(), key);
    manifest.save(cache.manifest());

    PreprocessResult r;
    r.entities = store.entity_count();
    r.relations = store.relation_count();
    r.train_triples = store.triples(Split::Train).size();
    r.evidence_triples = evidence.triple_count();
    out << "mined evidence for " << r.evidence_triples << " training triples (L<=" << options.max_path_len
        << ", eta=" << options.eta << ")\n";
    return r;
}

LoadedArtifacts load_artifacts(const CachePaths& cache, bool need_evidence) {
    LoadedArtifacts a{PipelineManifest::load(cache.manifest()), TripleStore{}, std::nullopt};
    const std::uint64_t key = a.manifest.preprocess_hash();
    a.store = TripleStore::load_cache(cache.store(), key);
    if (need_evidence) {
        if (!fs::exists(cache.evidence()))
            throw DataError("missing path evidence cache " + cache.evidence() +
                            "; run `rpe preprocess` with the dataset first");
        a.evidence = PathEvidence::load(cache.evidence(), key);
    }
    return a;
}

namespace {

void write_checkpoint_sidecar(const std::string& checkpoint_path, const TrainConfig& config,
                              const PipelineManifest& manifest, int epoch) {
    json j;
    j["tool_version"] = kToolVersion;
    j["epoch"] = epoch;
    j["seed"] = config.seed;
    j["mode"] = mode_name(config.mode);
    j["config_hash"] = hex64(config.content_hash());
    j["preprocess_hash"] = hex64(manifest.preprocess_hash());
    write_text_file(checkpoint_path + ".meta.json", j.dump(2) + "\n");
}

std::uint64_t sidecar_preprocess_hash(const std::string& checkpoint_path) {
    const std::string sidecar = checkpoint_path + ".meta.json";
    std::ifstream in(sidecar);
    if (!in) throw DataError("missing checkpoint sidecar: " + sidecar);
    json j;
    try {
        in >> j;
        return parse_hex64(j.at("preprocess_hash").get<std::string>());
    } catch (const std::exception& e) {
        throw DataError("corrupt checkpoint sidecar " + sidecar + ": " + e.what());
    }
}

// Checkpoint and caches must descend from the same preprocess run.
void check_lineage(const std::string& checkpoint_path, const PipelineManifest& manifest) {
    if (sidecar_preprocess_hash(checkpoint_path) != manifest.preprocess_hash())
        throw DataError("checkpoint " + checkpoint_path +
                        " was trained on different preprocess artifacts than the cache directory holds");
}

}  // namespace

TrainOutcome cmd_train(const TrainOptions& options, std::ostream& out) {
    options.config.validate();
    CachePaths cache{resolve_cache_dir(options.cache_dir)};

    const bool needs_evidence = options.config.lambda > 0;
    LoadedArtifacts artifacts = [&] {
        try {
            return load_artifacts(cache, needs_evidence);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) +
                            (needs_evidence ? "\nhint: `rpe preprocess --train ... --max-path-len 2 --eta 0.05`"
                                            : ""));
        }
    }();

    fs::create_directories(options.out_dir);
    const std::string checkpoint_path = options.out_dir + "/checkpoint.bin";

    std::optional<TypeConstraintIndex> types;
    if (options.config.effective_sampling() != Sampling::Uniform || options.config.early_stop)
        types.emplace(artifacts.store);

    std::ofstream log(options.out_dir + "/training_log.tsv");
    if (!log) throw DataError("cannot write training log in " + options.out_dir);

    std::function<double(const ModelParams&)> metric;
    if (options.config.early_stop) {
        if (artifacts.store.triples(Split::Valid).empty())
            throw DataError("early stopping needs a validation split");
        const auto categories = classify_relations(artifacts.store);
        metric = [&artifacts, categories, &options](const ModelParams& params) {
            EvalScorer scorer{&params, artifacts.evidence ? &*artifacts.evidence : nullptr};
            const auto report = link_prediction(artifacts.store, std::cref(scorer), categories,
                                                TieRule::Optimistic, options.config.threads, Split::Valid);
            return report.hits10_filter;
        };
    }

    auto on_checkpoint = [&](const ModelParams& params, int epoch) {
        const std::string path = options.out_dir + "/checkpoint_epoch" + std::to_string(epoch) + ".bin";
        params.save(path);
        write_checkpoint_sidecar(path, options.config, artifacts.manifest, epoch);
    };

    const TrainResult result =
        train_model(artifacts.store, artifacts.evidence ? &*artifacts.evidence : nullptr,
                    types ? &*types : nullptr, options.config, &log, metric, on_checkpoint);

    result.params.save(checkpoint_path);
    write_checkpoint_sidecar(checkpoint_path, options.config, artifacts.manifest, result.stopped_at);
    write_text_file(options.out_dir + "/config_used.txt", options.config.to_text());

    TrainOutcome outcome;
    outcome.checkpoint_path = checkpoint_path;
    outcome.epochs_run = result.stopped_at;
    outcome.final_loss = result.epochs.empty() ? 0 : result.epochs.back().loss;
    out << "trained " << mode_name(options.config.mode) << " for " << outcome.epochs_run
        << " epochs; final epoch loss " << outcome.final_loss << '\n';
    out << "checkpoint: " << checkpoint_path << '\n';
    return outcome;
}

LinkPredictionReport cmd_eval_lp(const EvalLpOptions& options, std::ostream& out) {
    CachePaths cache{resolve_cache_dir(options.cache_dir)};
    LoadedArtifacts artifacts = load_artifacts(cache, fs::exists(cache.evidence()));
    check_lineage(options.checkpoint, artifacts.manifest);
    const ModelParams params = ModelParams::load(options.checkpoint);
    if (params.entity_count() != artifacts.store.entity_count() ||
        params.relation_count() != artifacts.store.relation_count())
        throw DataError("checkpoint vocabulary does not match the cached store");
    if (artifacts.store.triples(Split::Test).empty()) throw DataError("no test triples to evaluate");

    const auto categories = classify_relations(artifacts.store);
    EvalScorer scorer{&params, artifacts.evidence ? &*artifacts.evidence : nullptr};
    const LinkPredictionReport report =
        link_prediction(artifacts.store, std::cref(scorer), categories, options.tie, options.threads);

    const std::string out_dir = options.out_dir.empty() ? fs::path(options.checkpoint).parent_path().string()
                                                        : options.out_dir;
    if (!out_dir.empty()) fs::create_directories(out_dir);
    write_text_file((out_dir.empty() ? "." : out_dir) + "/lp_report.tsv", report.to_tsv());

    std::ostringstream pretty;
    pretty << std::fixed << std::setprecision(1);
    pretty << "Link prediction (" << report.queries << " queries)\n";
    if (options.setting != EvalSetting::Filter)
        pretty << "  raw     Mean Rank " << std::setw(8) << report.mean_rank_raw << "   Hits@10 " << std::setw(6)
               << report.hits10_raw << "%\n";
    if (options.setting != EvalSetting::Raw)
        pretty << "  filter  Mean Rank " << std::setw(8) << report.mean_rank_filter << "   Hits@10 " << std::setw(6)
               << report.hits10_filter << "%\n";
    out << pretty.str();
    if (options.by_category) {
        out << "  Hits@10(%) by relation category (filter)\n";
        out << "    side      1-1     1-N     N-1     N-N\n";
        for (int s = 0; s < 2; ++s) {
            out << "    " << (s == 0 ? "head" : "tail") << "  ";
            for (int c = 0; c < 4; ++c)
                out << std::setw(8) << std::fixed << std::setprecision(1) << report.by_category[c][s].percent();
            out << '\n';
        }
    }
    return report;
}

double cmd_eval_tc(const EvalTcOptions& options, std::ostream& out) {
    CachePaths cache{resolve_cache_dir(options.cache_dir)};
    LoadedArtifacts artifacts = load_artifacts(cache, fs::exists(cache.evidence()));
    check_lineage(options.checkpoint, artifacts.manifest);
    const ModelParams params = ModelParams::load(options.checkpoint);
    const TripleStore& store = artifacts.store;
    if (store.triples(Split::Valid).empty()) throw DataError("triple classification needs a validation split");
    if (store.triples(Split::Test).empty()) throw DataError("triple classification needs a test split");

    EvalScorer scorer{&params, artifacts.evidence ? &*artifacts.evidence : nullptr};
    TypeConstraintIndex types(store);

    auto labeled = [&](Split split, std::uint64_t seed_offset) {
        if (store.has_negatives(split)) {
            LabeledSplit s;
            s.triples = store.triples(split);
            s.labels = store.labels(split);
            return s;
        }
        Rng rng(options.seed + seed_offset);
        LabeledSplit s = generate_classification_negatives(store, split, types, rng);
        out << "generated " << s.triples.size() / 2 << " negatives for " << split_name(split);
        if (s.skipped > 0) out << " (" << s.skipped << " positives skipped: pool exhausted)";
        out << '\n';
        return s;
    };

    const LabeledSplit valid = labeled(Split::Valid, 0);
    const LabeledSplit test = labeled(Split::Test, 1);

    const ThresholdSet thresholds = tune_thresholds(valid.triples, valid.labels, std::cref(scorer));
    const double accuracy = triple_classification(test.triples, test.labels, std::cref(scorer), thresholds);

    const std::string out_dir = options.out_dir.empty() ? fs::path(options.checkpoint).parent_path().string()
                                                        : options.out_dir;
    if (!out_dir.empty()) fs::create_directories(out_dir);
    {
        std::ostringstream tsv;
        tsv << "relation\tdelta\n";
        std::vector<RelationId> rels;
        for (const auto& [r, d] : thresholds.per_relation) rels.push_back(r);
        std::sort(rels.begin(), rels.end());
        tsv << std::setprecision(17);
        for (RelationId r : rels)
            tsv << store.relation_name(r) << '\t' << thresholds.per_relation.at(r) << '\n';
        tsv << "(global)\t" << thresholds.global << '\n';
        write_text_file((out_dir.empty() ? "." : out_dir) + "/thresholds.tsv", tsv.str());
    }
    {
        std::ostringstream tsv;
        tsv << "metric\tvalue\n";
        tsv << std::setprecision(17) << "accuracy\t" << accuracy << '\n';
        write_text_file((out_dir.empty() ? "." : out_dir) + "/tc_report.tsv", tsv.str());
    }
    out << "triple classification accuracy: " << std::fixed << std::setprecision(1) << accuracy << "%\n";
    return accuracy;
}

namespace {

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

void cmd_inspect(const InspectOptions& options, std::ostream& out) {
    if (options.top_k < 1) throw ConfigError("--top must be >= 1");
    CachePaths cache{resolve_cache_dir(options.cache_dir)};
    LoadedArtifacts artifacts = load_artifacts(cache, true);
    const TripleStore& store = artifacts.store;

    const auto rel = store.find_relation(options.relation);
    if (!rel) {
        std::vector<std::pair<std::size_t, std::string>> near;
        for (const std::string& name : store.relation_names())
            near.emplace_back(levenshtein(options.relation, name), name);
        std::sort(near.begin(), near.end());
        std::ostringstream msg;
        msg << "unknown relation '" << options.relation << "'; nearest names:";
        for (std::size_t i = 0; i < near.size() && i < 5; ++i) msg << "\n  " << near[i].second;
        throw DataError(msg.str());
    }

    const auto top = artifacts.evidence->top_paths(*rel, static_cast<std::size_t>(options.top_k));
    if (top.empty()) {
        out << "no reliable paths for " << options.relation << '\n';
        return;
    }
    out << "top paths for " << options.relation << ":\n";
    for (const auto& [path, confidence] : top) {
        out << "  " << std::fixed << std::setprecision(4) << confidence << "  (n="
            << artifacts.evidence->marginal(path) << ")  ";
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i > 0) out << " -> ";
            out << store.relation_name(path[i]);
        }
        out << '\n';
    }
}

void cmd_export(const ExportOptions& options, std::ostream& out) {
    CachePaths cache{resolve_cache_dir(options.cache_dir)};
    LoadedArtifacts artifacts = load_artifacts(cache, false);
    check_lineage(options.checkpoint, artifacts.manifest);
    const ModelParams params = ModelParams::load(options.checkpoint);
    if (params.entity_count() != artifacts.store.entity_count())
        throw DataError("checkpoint vocabulary does not match the cached store");

    fs::create_directories(options.out_dir);
    auto dump = [&](const std::string& file, const std::vector<Eigen::VectorXd>& vectors,
                    auto&& name_of) {
        std::ofstream o(options.out_dir + "/" + file);
        if (!o) throw DataError("cannot write " + file + " in " + options.out_dir);
        o << std::setprecision(9);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            o << name_of(i);
            for (Eigen::Index j = 0; j < vectors[i].size(); ++j) o << '\t' << vectors[i][j];
            o << '\n';
        }
    };
    dump("entity2vec.tsv", params.entity,
         [&](std::size_t i) { return artifacts.store.entity_name(static_cast<EntityId>(i)); });
    dump("relation2vec.tsv", params.relation,
         [&](std::size_t i) { return artifacts.store.relation_name(static_cast<RelationId>(i)); });

    if (options.projections) {
        std::ofstream o(options.out_dir + "/projection2mat.tsv");
        if (!o) throw DataError("cannot write projection2mat.tsv in " + options.out_dir);
        o << std::setprecision(9);
        for (std::size_t r = 0; r < params.proj.size(); ++r) {
            const auto& M = params.proj[r];
            o << artifacts.store.relation_name(static_cast<RelationId>(r));
            for (Eigen::Index i = 0; i < M.rows(); ++i)
                for (Eigen::Index j = 0; j < M.cols(); ++j) o << '\t' << M(i, j);
            o << '\n';
        }
    }
    out << "exported embeddings to " << options.out_dir << '\n';
}

}  // namespace rpe
