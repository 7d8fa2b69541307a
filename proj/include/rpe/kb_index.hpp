#pragma once
// Read-only indices derived from the training split: adjacency for random
// walks, LCWA domain/range statistics for type-constrained sampling, and
// the 1-1 / 1-N / N-1 / N-N relation categories.

#include "rpe/triple_store.hpp"

#include <span>
#include <unordered_map>
#include <vector>

namespace rpe {

class AdjacencyIndex {
public:
    explicit AdjacencyIndex(const TripleStore& store);
    AdjacencyIndex(const std::vector<Triple>& triples, EntityId entities, RelationId relations);

    // Sorted, duplicate-free tails of (h, r, *) in training.
    std::span<const EntityId> successors(EntityId h, RelationId r) const;
    std::size_t out_degree(EntityId h, RelationId r) const { return successors(h, r).size(); }

    // Sorted, duplicate-free heads of (*, r, t) in training.
    std::span<const EntityId> predecessors(EntityId t, RelationId r) const;

    // Sorted relation ids leaving h.
    std::span<const RelationId> out_relations(EntityId h) const;

    bool has_edge(EntityId h, RelationId r, EntityId t) const;

    EntityId entity_count() const { return entity_count_; }
    RelationId relation_count() const { return relation_count_; }

private:
    struct PairHash {
        std::size_t operator()(const std::pair<EntityId, RelationId>& p) const {
            return hash_combine(std::hash<std::int64_t>{}(p.first), std::hash<std::int64_t>{}(p.second));
        }
    };

    EntityId entity_count_ = 0;
    RelationId relation_count_ = 0;
    std::unordered_map<std::pair<EntityId, RelationId>, std::vector<EntityId>, PairHash> succ_;
    std::unordered_map<std::pair<EntityId, RelationId>, std::vector<EntityId>, PairHash> pred_;
    std::vector<std::vector<RelationId>> out_rels_;
};

// Per-relation LCWA statistics over training triples. teh/het count distinct
// (h,t) pairs per distinct head/tail; head_replace_prob = teh/(teh+het).
class TypeConstraintIndex {
public:
    explicit TypeConstraintIndex(const TripleStore& store);

    bool has(RelationId r) const;
    const std::vector<EntityId>& domain(RelationId r) const;  // sorted
    const std::vector<EntityId>& range(RelationId r) const;   // sorted
    double teh(RelationId r) const;
    double het(RelationId r) const;
    double head_replace_prob(RelationId r) const;

private:
    struct Stats {
        std::vector<EntityId> domain;
        std::vector<EntityId> range;
        double teh = 0;
        double het = 0;
    };
    const Stats& stats(RelationId r) const;
    std::unordered_map<RelationId, Stats> by_relation_;
};

enum class RelationCategory { OneToOne, OneToN, NToOne, NToN };

constexpr const char* category_name(RelationCategory c) {
    switch (c) {
        case RelationCategory::OneToOne: return "1-1";
        case RelationCategory::OneToN: return "1-N";
        case RelationCategory::NToOne: return "N-1";
        case RelationCategory::NToN: return "N-N";
    }
    return "?";
}

// tph/hpt averages with the conventional 1.5 cutoffs, training split only.
std::unordered_map<RelationId, RelationCategory> classify_relations(const TripleStore& store);

}  // namespace rpe
