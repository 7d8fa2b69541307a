#pragma once
// Benchmark protocols. Link prediction replaces each side of every test
// triple with every entity, ranks the true entity (raw and filtered), and
// reports Mean Rank / Hits@10 plus the per-category breakdown. Triple
// classification tunes per-relation thresholds on validation scores and
// measures accuracy on test.

#include "rpe/trainer.hpp"

#include <functional>
#include <unordered_set>

namespace rpe {

using ScoreFn = std::function<double(const Triple&)>;

// Model evaluation score: F(h,r,t) with evidence looked up from the mined
// cache; candidates without an entry fall back to the direct terms.
struct EvalScorer {
    const ModelParams* params = nullptr;
    const PathEvidence* evidence = nullptr;  // optional

    double operator()(const Triple& x) const { return score_final(x.h, x.r, x.t, evidence, *params); }
};

// Optimistic counts only strictly better candidates; pessimistic also
// counts ties. The choice shifts Mean Rank, so it is always explicit.
enum class TieRule { Optimistic, Pessimistic };

struct RankResult {
    Triple triple;
    CorruptSide side = CorruptSide::Head;
    int raw_rank = 1;
    int filtered_rank = 1;
};

RankResult rank_entity(const Triple& triple, CorruptSide side, const ScoreFn& score, EntityId entity_count,
                       const std::unordered_set<Triple, TripleHash>& known_positives, TieRule tie);

struct CategoryHits {
    std::int64_t queries = 0;
    std::int64_t hits = 0;
    double percent() const { return queries == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(queries); }
};

struct LinkPredictionReport {
    std::int64_t queries = 0;  // 2 per evaluated test triple
    double mean_rank_raw = 0;
    double mean_rank_filter = 0;
    double hits10_raw = 0;     // percent
    double hits10_filter = 0;  // percent
    // Filtered Hits@10 by relation category; side 0 predicts heads, 1 tails.
    CategoryHits by_category[4][2];

    std::string to_tsv() const;
    std::string to_pretty() const;
};

LinkPredictionReport link_prediction(const TripleStore& store, const ScoreFn& score,
                                     const std::unordered_map<RelationId, RelationCategory>& categories,
                                     TieRule tie, int threads = 1, Split split = Split::Test);

struct ThresholdSet {
    std::unordered_map<RelationId, double> per_relation;
    double global = 0;  // fallback for relations absent from validation

    double for_relation(RelationId r) const {
        auto it = per_relation.find(r);
        return it == per_relation.end() ? global : it->second;
    }
};

// Sweeps candidate thresholds at midpoints between consecutive distinct
// validation scores (plus sentinels below and above); picks the
// accuracy-maximizing threshold, ties resolved to the smallest.
ThresholdSet tune_thresholds(const std::vector<Triple>& triples, const std::vector<std::int8_t>& labels,
                             const ScoreFn& score);

// Accuracy (percent): predict positive iff score < threshold(r).
double triple_classification(const std::vector<Triple>& triples, const std::vector<std::int8_t>& labels,
                             const ScoreFn& score, const ThresholdSet& thresholds);

struct LabeledSplit {
    std::vector<Triple> triples;
    std::vector<std::int8_t> labels;
    std::int64_t skipped = 0;
};

// One negative per positive: corrupt head or tail (Bernoulli per relation),
// replacement drawn from entities observed in that argument position in
// training, rejecting known positives. Deterministic under a fixed seed.
LabeledSplit generate_classification_negatives(const TripleStore& store, Split split,
                                               const TypeConstraintIndex& types, Rng& rng);

}  // namespace rpe
