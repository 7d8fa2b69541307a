#pragma once
// Deterministic toy knowledge bases and randomized test instances.

#include "rpe/trainer.hpp"

#include <set>
#include <string>
#include <vector>

namespace rpe::testing {

struct RawGraph {
    std::vector<Triple> triples;
    EntityId entities = 0;
    RelationId relations = 0;
};

// Sparse random multigraph; duplicate edges removed.
inline RawGraph random_graph(Rng& rng, EntityId max_entities, RelationId max_relations, double edges_per_entity) {
    RawGraph g;
    g.entities = static_cast<EntityId>(2 + rng.uniform_index(static_cast<std::uint64_t>(max_entities - 1)));
    g.relations = static_cast<RelationId>(1 + rng.uniform_index(static_cast<std::uint64_t>(max_relations)));
    const auto target_edges = static_cast<std::size_t>(edges_per_entity * static_cast<double>(g.entities)) + 1;
    std::set<Triple> seen;
    for (std::size_t i = 0; i < target_edges; ++i) {
        Triple x;
        x.h = static_cast<EntityId>(rng.uniform_index(static_cast<std::uint64_t>(g.entities)));
        x.r = static_cast<RelationId>(rng.uniform_index(static_cast<std::uint64_t>(g.relations)));
        x.t = static_cast<EntityId>(rng.uniform_index(static_cast<std::uint64_t>(g.entities)));
        if (seen.insert(x).second) g.triples.push_back(x);
    }
    return g;
}

// Compositional KB: r3 holds exactly where some b links a --r1--> b --r2--> c.
// The r3 pairs are split train/valid/test by the given fractions; r1/r2
// edges always train. The returned store is inverse-augmented.
struct CompositionalKb {
    TripleStore store;
    std::size_t r3_pairs = 0;
};

inline CompositionalKb make_compositional_kb(std::uint64_t seed, int na, int nb, int nc, double train_frac,
                                             double valid_frac) {
    Rng rng(seed);
    auto an = [](int i) { return "a" + std::to_string(i); };
    auto bn = [](int i) { return "b" + std::to_string(i); };
    auto cn = [](int i) { return "c" + std::to_string(i); };

    std::vector<std::pair<int, int>> r1_edges;
    std::vector<std::pair<int, int>> r2_edges;
    for (int a = 0; a < na; ++a) {
        const int deg = 1 + static_cast<int>(rng.uniform_index(3));
        std::set<int> picked;
        while (static_cast<int>(picked.size()) < deg)
            picked.insert(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nb))));
        for (int b : picked) r1_edges.emplace_back(a, b);
    }
    for (int b = 0; b < nb; ++b) {
        const int deg = 1 + static_cast<int>(rng.uniform_index(3));
        std::set<int> picked;
        while (static_cast<int>(picked.size()) < deg)
            picked.insert(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nc))));
        for (int c : picked) r2_edges.emplace_back(b, c);
    }

    std::set<std::pair<int, int>> r3_pairs;
    for (const auto& [a, b] : r1_edges)
        for (const auto& [b2, c] : r2_edges)
            if (b == b2) r3_pairs.insert({a, c});

    std::vector<std::pair<int, int>> pairs(r3_pairs.begin(), r3_pairs.end());
    rng.shuffle(pairs);
    const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(pairs.size()));
    const auto n_valid = static_cast<std::size_t>(valid_frac * static_cast<double>(pairs.size()));

    CompositionalKb kb;
    kb.r3_pairs = pairs.size();
    for (const auto& [a, b] : r1_edges) kb.store.add_triple(an(a), "r1", bn(b), Split::Train);
    for (const auto& [b, c] : r2_edges) kb.store.add_triple(bn(b), "r2", cn(c), Split::Train);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [a, c] = pairs[i];
        const Split split = i < n_train ? Split::Train : (i < n_train + n_valid ? Split::Valid : Split::Test);
        if (split == Split::Train) {
            kb.store.add_triple(an(a), "r3", cn(c), Split::Train);
        }
    }
    // Valid/test added after train so their vocabulary lookups succeed.
    for (std::size_t i = n_train; i < pairs.size(); ++i) {
        const auto& [a, c] = pairs[i];
        kb.store.add_triple(an(a), "r3", cn(c), i < n_train + n_valid ? Split::Valid : Split::Test);
    }
    kb.store.add_inverses();
    return kb;
}

// Random parameters with feasible norms and gently perturbed projections.
inline ModelParams random_params(Rng& rng, EntityId entities, RelationId relations, const ModelHyper& hyper,
                                 double proj_noise = 0.2) {
    ModelParams p = ModelParams::create(entities, relations, hyper);
    for (auto& v : p.entity) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1, 1);
        const double n = v.norm();
        if (n > 1) v /= n;
    }
    for (auto& v : p.relation) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1, 1);
        const double n = v.norm();
        if (n > 1) v /= n;
    }
    for (auto& M : p.proj)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) += rng.uniform(-proj_noise, proj_noise);
    return p;
}

// One randomized objective instance for finite-difference checks: small
// dimensions, 1-2 evidence paths, kink-free by construction. Composed
// projections stay strictly under the Frobenius cap, where the frozen
// rescale factor is the exact gradient; the unit-ball clip may be active
// (its Jacobian is exact) when `clip_active` asks for it.
struct GradScenario {
    ModelParams params;
    Triple pos;
    CorruptedTriple neg;
    TripleEvidence evidence;
    PathEvidence table;
    double gamma1 = 1;
    double gamma2 = 1;
};

namespace detail {

inline Eigen::VectorXd clip_vec(Eigen::VectorXd v) {
    const double n = v.norm();
    if (n > 1) v /= n;
    return v;
}

// Smallest safety margin across every non-differentiable surface touched
// by the objective: hinge boundaries, L1 coordinate zeros, L2 zeros,
// unit-norm clip boundaries, and the Frobenius cap (which must also be
// inactive so the frozen factor is exact).
inline double kink_margin(const GradScenario& s) {
    const ModelParams& p = s.params;
    const Norm norm = p.hyper.norm;
    double margin = 1e9;
    auto update = [&](double v) { margin = std::min(margin, v); };

    const Triple nt = s.neg.corrupted();
    auto term = [&](EntityId h, EntityId t, const Eigen::VectorXd& w, const Eigen::MatrixXd* M) {
        const auto& hv = p.entity[static_cast<std::size_t>(h)];
        const auto& tv = p.entity[static_cast<std::size_t>(t)];
        Eigen::VectorXd a = M ? Eigen::VectorXd(*M * hv) : hv;
        Eigen::VectorXd b = M ? Eigen::VectorXd(*M * tv) : tv;
        if (M) {
            update(std::abs(a.norm() - 1.0));
            update(std::abs(b.norm() - 1.0));
            a = clip_vec(a);
            b = clip_vec(b);
        }
        const Eigen::VectorXd x = a + w - b;
        if (norm == Norm::L1) {
            for (Eigen::Index i = 0; i < x.size(); ++i) update(std::abs(x[i]));
            return x.lpNorm<1>();
        }
        update(x.norm());
        return x.norm();
    };

    const bool projected = mode_uses_projection(p.hyper.mode);
    const auto& rv = p.relation[static_cast<std::size_t>(s.pos.r)];
    const Eigen::MatrixXd* Mr = projected ? &p.proj[static_cast<std::size_t>(s.pos.r)] : nullptr;
    const double sp = term(s.pos.h, s.pos.t, rv, Mr);
    const double sn = term(nt.h, nt.t, rv, Mr);
    update(std::abs(sp + s.gamma1 - sn));

    for (const PathProb& pp : s.evidence.paths) {
        Eigen::VectorXd pstar = Eigen::VectorXd::Zero(p.hyper.relation_dim);
        for (RelationId r : pp.path) pstar += p.relation[static_cast<std::size_t>(r)];
        Eigen::MatrixXd composed;
        const Eigen::MatrixXd* Mp = nullptr;
        if (projected) {
            composed = p.proj[static_cast<std::size_t>(pp.path[0])];
            for (std::size_t i = 1; i < pp.path.size(); ++i) {
                const auto& next = p.proj[static_cast<std::size_t>(pp.path[i])];
                if (mode_multiplicative(p.hyper.mode)) {
                    composed = composed * next;
                } else {
                    composed += next;
                }
            }
            const double cap = std::sqrt(static_cast<double>(composed.rows()));
            update(cap - composed.norm());  // negative: cap active -> reject
            Mp = &composed;
        }
        const double psp = term(s.pos.h, s.pos.t, pstar, Mp);
        const double psn = term(nt.h, nt.t, pstar, Mp);
        update(std::abs(psp + s.gamma2 - psn));
    }
    return margin;
}

}  // namespace detail

inline GradScenario make_grad_scenario(Rng& rng, Mode mode, Norm norm, bool clip_active) {
    constexpr EntityId kEntities = 6;
    constexpr RelationId kRelations = 4;
    constexpr int kDim = 4;

    for (int attempt = 0; attempt < 2000; ++attempt) {
        GradScenario s;
        ModelHyper hyper{kDim, kDim, rng.uniform(0.5, 1.5), mode, norm};
        s.params = ModelParams::create(kEntities, kRelations, hyper);
        const double entity_scale = clip_active ? 2.5 : 0.8;
        for (auto& v : s.params.entity)
            for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-entity_scale, entity_scale);
        for (auto& v : s.params.relation)
            for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-0.8, 0.8);
        for (auto& M : s.params.proj)
            for (Eigen::Index i = 0; i < M.rows(); ++i)
                for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = rng.uniform(-0.3, 0.3);

        s.gamma1 = rng.uniform(0.5, 2.0);
        s.gamma2 = rng.uniform(0.5, 2.0);
        s.pos = {0, static_cast<RelationId>(rng.uniform_index(kRelations)), 1};
        s.neg.original = s.pos;
        s.neg.side = rng.bernoulli(0.5) ? CorruptSide::Head : CorruptSide::Tail;
        s.neg.replacement = static_cast<EntityId>(2 + rng.uniform_index(kEntities - 2));
        s.neg.valid = true;

        const int n_paths = 1 + static_cast<int>(rng.uniform_index(2));
        for (int k = 0; k < n_paths; ++k) {
            PathProb pp;
            const int len = 1 + static_cast<int>(rng.uniform_index(2));
            for (int i = 0; i < len; ++i)
                pp.path.push_back(static_cast<RelationId>(rng.uniform_index(kRelations)));
            pp.prob = rng.uniform(0.2, 1.0);
            s.evidence.z += pp.prob;
            const auto cooc = static_cast<std::int64_t>(1 + rng.uniform_index(4));
            s.table.set_counts(pp.path, 4, {{s.pos.r, cooc}});
            s.evidence.paths.push_back(std::move(pp));
        }

        if (clip_active && mode_uses_projection(mode)) {
            // Want at least one active clip so its Jacobian is exercised.
            const auto& M = s.params.proj[static_cast<std::size_t>(s.pos.r)];
            if ((M * s.params.entity[0]).norm() <= 1.05) continue;
        }
        if (detail::kink_margin(s) > 1e-3) return s;
    }
    throw std::runtime_error("could not build a kink-free gradient scenario");
}

}  // namespace rpe::testing
