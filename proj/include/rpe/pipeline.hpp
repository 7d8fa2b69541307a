#pragma once
// Reproducible pipeline commands: preprocess -> train -> evaluate/inspect.
// Every artifact carries the content hash of its inputs; stale caches are
// detected before use and rebuilt with a notice.

#include "rpe/evaluator.hpp"

#include <iosfwd>

namespace rpe {

inline constexpr char kToolVersion[] = "0.1.0";

struct DatasetRef {
    std::string path;
    std::uint64_t hash = 0;
};

struct PipelineManifest {
    std::string tool_version = kToolVersion;
    DatasetRef train;
    DatasetRef valid;
    DatasetRef test;
    int max_path_len = 2;
    double eta = 0.05;

    // Keys the store/evidence caches; any input or parameter change moves it.
    std::uint64_t preprocess_hash() const;

    void save(const std::string& path) const;
    static PipelineManifest load(const std::string& path);
};

struct CachePaths {
    std::string dir;
    std::string manifest() const { return dir + "/manifest.json"; }
    std::string store() const { return dir + "/store.bin"; }
    std::string evidence() const { return dir + "/evidence.bin"; }
};

// Cache directory resolution: explicit flag, else $RPE_CACHE_DIR, else
// ./rpe_cache.
std::string resolve_cache_dir(const std::string& flag_value);

struct PreprocessOptions {
    std::string train_path;
    std::string valid_path;  // optional
    std::string test_path;   // optional
    std::string cache_dir;
    int max_path_len = 2;
    double eta = 0.05;
    int threads = 1;
};

struct PreprocessResult {
    bool up_to_date = false;
    EntityId entities = 0;
    RelationId relations = 0;  // after inverse augmentation
    std::size_t train_triples = 0;
    std::size_t evidence_triples = 0;
};

PreprocessResult cmd_preprocess(const PreprocessOptions& options, std::ostream& out);

struct LoadedArtifacts {
    PipelineManifest manifest;
    TripleStore store;
    std::optional<PathEvidence> evidence;
};

// Loads the cached store (always) and evidence (when `need_evidence`),
// verifying both against the manifest.
LoadedArtifacts load_artifacts(const CachePaths& cache, bool need_evidence);

struct TrainOptions {
    std::string cache_dir;
    std::string out_dir;
    TrainConfig config;
};

struct TrainOutcome {
    std::string checkpoint_path;
    int epochs_run = 0;
    double final_loss = 0;
};

TrainOutcome cmd_train(const TrainOptions& options, std::ostream& out);

enum class EvalSetting { Raw, Filter, Both };

struct EvalLpOptions {
    std::string cache_dir;
    std::string checkpoint;
    EvalSetting setting = EvalSetting::Both;
    bool by_category = false;
    TieRule tie = TieRule::Optimistic;
    int threads = 1;
    std::string out_dir;  // default: directory of the checkpoint
};

LinkPredictionReport cmd_eval_lp(const EvalLpOptions& options, std::ostream& out);

struct EvalTcOptions {
    std::string cache_dir;
    std::string checkpoint;
    std::uint64_t seed = 1;  // negative generation when labels are absent
    std::string out_dir;
};

double cmd_eval_tc(const EvalTcOptions& options, std::ostream& out);

struct InspectOptions {
    std::string cache_dir;
    std::string relation;
    int top_k = 10;
};

void cmd_inspect(const InspectOptions& options, std::ostream& out);

struct ExportOptions {
    std::string cache_dir;
    std::string checkpoint;
    std::string out_dir;
    bool projections = false;
};

void cmd_export(const ExportOptions& options, std::ostream& out);

}  // namespace rpe
