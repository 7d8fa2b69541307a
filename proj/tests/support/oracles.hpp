#pragma once
// Independent reference implementations the library is checked against.
// Each oracle works from raw triple lists or plain score callables and
// shares no code with the implementation path it verifies.

#include "rpe/evaluator.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace rpe::testing {

// All uniform random walks from h following the relation sequence p,
// enumerated recursively over the raw triple list. Returns the end-node
// probability mass.
inline void walk_oracle_rec(EntityId node, const RelationPath& p, std::size_t depth, double prob,
                            const std::vector<Triple>& triples, std::map<EntityId, double>& out) {
    if (depth == p.size()) {
        out[node] += prob;
        return;
    }
    std::set<EntityId> succs;
    for (const Triple& x : triples)
        if (x.h == node && x.r == p[depth]) succs.insert(x.t);
    if (succs.empty()) return;
    const double step = prob / static_cast<double>(succs.size());
    for (EntityId next : succs) walk_oracle_rec(next, p, depth + 1, step, triples, out);
}

inline std::map<EntityId, double> walk_oracle(EntityId h, const RelationPath& p,
                                              const std::vector<Triple>& triples) {
    std::map<EntityId, double> out;
    walk_oracle_rec(h, p, 0, 1.0, triples, out);
    return out;
}

// Exhaustive DFS over relation sequences of length <= max_len that admit a
// walk from h to t.
inline void dfs_paths(EntityId node, EntityId target, int max_len, RelationPath& current,
                      const std::vector<Triple>& triples, std::set<RelationPath>& found) {
    if (!current.empty() && node == target) found.insert(current);
    if (static_cast<int>(current.size()) == max_len) return;
    for (const Triple& x : triples) {
        if (x.h != node) continue;
        current.push_back(x.r);
        dfs_paths(x.t, target, max_len, current, triples, found);
        current.pop_back();
    }
}

inline std::vector<RelationPath> path_oracle(EntityId h, EntityId t, int max_len,
                                             const std::vector<Triple>& triples) {
    std::set<RelationPath> found;
    RelationPath current;
    dfs_paths(h, t, max_len, current, triples, found);
    std::vector<RelationPath> out(found.begin(), found.end());
    std::sort(out.begin(), out.end(), [](const RelationPath& a, const RelationPath& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

// Rank of the true entity by scoring every candidate and sorting, with
// binary search for the tie handling. Returns {raw, filtered}.
inline std::pair<int, int> rank_oracle(const Triple& triple, CorruptSide side, const ScoreFn& score,
                                       EntityId entity_count,
                                       const std::unordered_set<Triple, TripleHash>& known, TieRule tie) {
    const double target = score(triple);
    std::vector<double> raw_scores;
    std::vector<double> filt_scores;
    for (EntityId e = 0; e < entity_count; ++e) {
        const Triple c = side == CorruptSide::Head ? Triple{e, triple.r, triple.t} : Triple{triple.h, triple.r, e};
        if (c == triple) continue;
        const double s = score(c);
        raw_scores.push_back(s);
        if (!known.contains(c)) filt_scores.push_back(s);
    }
    auto rank_in = [&](std::vector<double>& scores) {
        std::sort(scores.begin(), scores.end());
        const auto it = tie == TieRule::Optimistic
                            ? std::lower_bound(scores.begin(), scores.end(), target)
                            : std::upper_bound(scores.begin(), scores.end(), target);
        return static_cast<int>(it - scores.begin()) + 1;
    };
    return {rank_in(raw_scores), rank_in(filt_scores)};
}

// Central finite differences of `loss` over every parameter coordinate,
// compared against the analytic gradients in `analytic` (missing keys are
// treated as zero). Returns the relative error ||ga-gf|| / (||ga||+||gf||).
template <typename LossFn>
double gradient_check(ModelParams& params, const GradAccum& analytic, const LossFn& loss, double step) {
    double dot_diff = 0;
    double norm_a = 0;
    double norm_f = 0;

    auto probe = [&](double& coord, double analytic_value) {
        const double saved = coord;
        coord = saved + step;
        const double up = loss();
        coord = saved - step;
        const double down = loss();
        coord = saved;
        const double fd = (up - down) / (2 * step);
        dot_diff += (analytic_value - fd) * (analytic_value - fd);
        norm_a += analytic_value * analytic_value;
        norm_f += fd * fd;
    };

    for (std::size_t e = 0; e < params.entity.size(); ++e) {
        const auto it = analytic.entity.find(static_cast<EntityId>(e));
        for (Eigen::Index i = 0; i < params.entity[e].size(); ++i)
            probe(params.entity[e][i], it == analytic.entity.end() ? 0.0 : it->second[i]);
    }
    for (std::size_t r = 0; r < params.relation.size(); ++r) {
        const auto it = analytic.relation.find(static_cast<RelationId>(r));
        for (Eigen::Index i = 0; i < params.relation[r].size(); ++i)
            probe(params.relation[r][i], it == analytic.relation.end() ? 0.0 : it->second[i]);
    }
    for (std::size_t r = 0; r < params.proj.size(); ++r) {
        const auto it = analytic.proj.find(static_cast<RelationId>(r));
        for (Eigen::Index i = 0; i < params.proj[r].rows(); ++i)
            for (Eigen::Index j = 0; j < params.proj[r].cols(); ++j)
                probe(params.proj[r](i, j), it == analytic.proj.end() ? 0.0 : it->second(i, j));
    }

    const double denom = std::sqrt(norm_a) + std::sqrt(norm_f);
    if (denom < 1e-12) return 0.0;  // both zero: inactive hinge
    return std::sqrt(dot_diff) / denom;
}

}  // namespace rpe::testing
