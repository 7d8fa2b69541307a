#pragma once
// PRA-style path mining. Walk probabilities follow the uniform one-step
// kernel P(t|t', r) = 1/outdeg_r(t'); a path's probability is the chance a
// random walker following its relation sequence ends at the target. Paths
// at or above the threshold eta form the reliable evidence set; the global
// co-occurrence table supports P_r(r | p) = cooc(p, r) / marginal(p).

#include "rpe/kb_index.hpp"

#include <map>
#include <unordered_map>
#include <vector>

namespace rpe {

using RelationPath = std::vector<RelationId>;

struct PathHash {
    std::size_t operator()(const RelationPath& p) const {
        return fnv1a64(p.data(), p.size() * sizeof(RelationId));
    }
};

struct PathProb {
    RelationPath path;
    double prob = 0;
};

// Reliable paths for one training triple, direct relation excluded.
struct TripleEvidence {
    std::vector<PathProb> paths;
    double z = 0;  // sum of path probabilities; 0 when no path survived
};

struct MiningConfig {
    int max_path_len = 2;
    double eta = 0.05;
    int threads = 1;
};

class PathEvidence {
public:
    const TripleEvidence* find(const Triple& x) const;
    std::size_t triple_count() const { return per_triple_.size(); }

    std::int64_t cooc(const RelationPath& p, RelationId r) const;
    std::int64_t marginal(const RelationPath& p) const;

    // P_r(r | p). Throws DataError for a path absent from the marginals.
    double confidence(RelationId r, const RelationPath& p) const;

    // Top-k paths by confidence; ties broken by higher marginal count, then
    // lexicographic path order. Empty when r never co-occurs with a path.
    std::vector<std::pair<RelationPath, double>> top_paths(RelationId r, std::size_t k) const;

    void save(const std::string& path, std::uint64_t manifest_hash) const;
    static PathEvidence load(const std::string& path, std::uint64_t expected_manifest_hash);

    // Direct construction, used by the loader and by test fixtures.
    void set_evidence(const Triple& x, TripleEvidence evidence);
    void set_counts(const RelationPath& p, std::int64_t marginal, std::map<RelationId, std::int64_t> cooc_row);

    friend PathEvidence mine_evidence(const TripleStore&, const AdjacencyIndex&, const MiningConfig&);

private:
    std::unordered_map<Triple, TripleEvidence, TripleHash> per_triple_;
    std::map<RelationPath, std::int64_t> marginal_;
    std::map<RelationPath, std::map<RelationId, std::int64_t>> cooc_;
};

// P(t|h, p) for every reachable t. Empty path returns {h: 1}.
std::map<EntityId, double> path_probability(EntityId h, const RelationPath& p, const AdjacencyIndex& index);

// All relation sequences of length 1..max_len with at least one walk from h
// to t, ordered by length then lexicographically.
std::vector<RelationPath> enumerate_paths(EntityId h, EntityId t, int max_len, const AdjacencyIndex& index);

// Mines reliable paths for every training triple of the (augmented) store
// and fills the co-occurrence table, counting each entity pair once.
// Deterministic for any thread count.
PathEvidence mine_evidence(const TripleStore& store, const AdjacencyIndex& index, const MiningConfig& config);

}  // namespace rpe
