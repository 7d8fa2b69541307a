#pragma once
// Margin-based SGD. Each positive triple contributes a relation hinge and,
// when reliable paths exist, weighted path hinges that reuse the same
// corrupted entities. Every processed triple is paired with its reverse.
// Gradients are exact subgradients of the implemented objective, except
// that the Frobenius rescale factor of a composed path projection is held
// constant within a step.

#include "rpe/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>

namespace rpe {

enum class Sampling { Uniform, Bernoulli, TypeConstrained };

Sampling parse_sampling(const std::string& s);
std::string sampling_name(Sampling s);

enum class InitScheme { Random, WarmStart };

struct TrainConfig {
    int entity_dim = 100;
    int relation_dim = 100;
    double gamma1 = 2.0;  // relation margin
    double gamma2 = 5.0;  // path margin
    double alpha = 0.0001;
    int batch_size = 4800;
    double lambda = 1.0;
    double eta = 0.05;
    int epochs = 500;
    std::optional<Sampling> sampling;  // unset: mode decides (PC variants -> type-constrained)
    Mode mode = Mode::ACOM;
    Norm norm = Norm::L1;
    std::uint64_t seed = 1;
    InitScheme init = InitScheme::Random;
    std::string warm_start_path;
    int threads = 1;
    int checkpoint_every = 0;  // 0: only final
    bool early_stop = false;
    int early_stop_patience = 50;
    int early_stop_every = 10;

    Sampling effective_sampling() const {
        if (sampling) return *sampling;
        return mode_type_constrained(mode) ? Sampling::TypeConstrained : Sampling::Uniform;
    }
    ModelHyper hyper() const { return {entity_dim, relation_dim, lambda, mode, norm}; }

    void validate() const;

    // Flat `key = value` file; unknown keys are errors.
    static TrainConfig from_file(const std::string& path);
    std::string to_text() const;
    std::uint64_t content_hash() const { return fnv1a64(to_text()); }
};

enum class CorruptSide { Head, Tail };

struct CorruptedTriple {
    Triple original;
    CorruptSide side = CorruptSide::Head;
    EntityId replacement = -1;
    bool valid = false;

    Triple corrupted() const {
        return side == CorruptSide::Head ? Triple{replacement, original.r, original.t}
                                         : Triple{original.h, original.r, replacement};
    }
};

// Bernoulli side choice (uniform strategy: fair coin), replacement drawn
// from the allowed pool, re-drawn while the result is a known training
// positive. Bounded retries, then a deterministic pool scan; `valid` is
// false when the pool is exhausted.
CorruptedTriple sample_negative(const Triple& triple, Sampling strategy, const TripleStore& store,
                                const TypeConstraintIndex* types, Rng& rng);

inline double margin_loss(double pos, double neg, double gamma) {
    const double v = pos + gamma - neg;
    return v > 0 ? v : 0;
}

// Sparse gradient accumulator for one minibatch.
struct GradAccum {
    std::unordered_map<EntityId, Eigen::VectorXd> entity;
    std::unordered_map<RelationId, Eigen::VectorXd> relation;
    std::unordered_map<RelationId, Eigen::MatrixXd> proj;

    void add_entity(EntityId id, const Eigen::VectorXd& g);
    void add_relation(RelationId id, const Eigen::VectorXd& g);
    void add_proj(RelationId id, const Eigen::MatrixXd& g);
};

struct ObjectiveStats {
    double loss = 0;
    int violations = 0;  // active hinges
};

// Loss and gradients of one positive/negative pair, including the weighted
// path hinges driven by the triple's evidence entry (may be null).
ObjectiveStats triple_objective(const Triple& pos, const CorruptedTriple& neg, const TripleEvidence* evidence,
                                const PathEvidence* table, const ModelParams& params, double gamma1, double gamma2,
                                GradAccum* grads);

struct EpochStats {
    double loss = 0;
    std::int64_t violations = 0;
    std::int64_t skipped = 0;  // triples with no legal negative
    double max_entity_norm = 0;
    double max_relation_norm = 0;
    double seconds = 0;
};

// One pass over the (augmented) training split: shuffle, minibatch
// accumulation, one update per batch, norm projection of touched vectors.
// Throws NumericError when the loss stops being finite.
EpochStats sgd_epoch(const TripleStore& store, const PathEvidence* evidence, const TypeConstraintIndex* types,
                     ModelParams& params, const TrainConfig& config, Rng& rng);

// Random init (uniform in [-6/sqrt(dim), 6/sqrt(dim)], normalized to the
// unit sphere) or vectors copied from a warm-start checkpoint. Projection
// matrices always start as the identity pattern.
ModelParams initialize(const TripleStore& store, const TrainConfig& config);

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> epochs;
    int stopped_at = 0;  // last epoch actually run
};

// Full training driver. `log` gets one TSV row per epoch (epoch, loss,
// violations, wall seconds). `validation_metric` (higher is better) enables
// plateau early stopping when configured. `on_checkpoint` fires every
// `checkpoint_every` epochs; the caller persists the final parameters.
TrainResult train_model(const TripleStore& store, const PathEvidence* evidence, const TypeConstraintIndex* types,
                        const TrainConfig& config, std::ostream* log = nullptr,
                        const std::function<double(const ModelParams&)>& validation_metric = {},
                        const std::function<void(const ModelParams&, int)>& on_checkpoint = {});

}  // namespace rpe
