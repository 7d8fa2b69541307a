#include "rpe/path_miner.hpp"

#include <algorithm>
#include <thread>

namespace rpe {

namespace {

constexpr std::uint32_t kEvidenceMagic = 0x56455052;  // "RPEV"
constexpr std::uint32_t kEvidenceVersion = 1;

}  // namespace

std::map<EntityId, double> path_probability(EntityId h, const RelationPath& p, const AdjacencyIndex& index) {
    std::map<EntityId, double> dist;
    dist[h] = 1.0;
    for (RelationId r : p) {
        std::map<EntityId, double> next;
        for (const auto& [node, prob] : dist) {
            auto tails = index.successors(node, r);
            if (tails.empty()) continue;  // walk dies here
            const double step = prob / static_cast<double>(tails.size());
            for (EntityId t : tails) next[t] += step;
        }
        dist = std::move(next);
        if (dist.empty()) break;
    }
    return dist;
}

std::vector<RelationPath> enumerate_paths(EntityId h, EntityId t, int max_len, const AdjacencyIndex& index) {
    if (max_len < 1) throw ConfigError("enumerate_paths: max_len must be >= 1");

    std::vector<RelationPath> found;
    // Frontier of (path, reachable set); expanding one relation at a time.
    std::map<RelationPath, std::vector<EntityId>> frontier;
    frontier[{}] = {h};
    for (int len = 1; len <= max_len; ++len) {
        std::map<RelationPath, std::vector<EntityId>> next;
        for (const auto& [path, nodes] : frontier) {
            std::vector<RelationId> rels;
            for (EntityId node : nodes) {
                auto out = index.out_relations(node);
                rels.insert(rels.end(), out.begin(), out.end());
            }
            std::sort(rels.begin(), rels.end());
            rels.erase(std::unique(rels.begin(), rels.end()), rels.end());
            for (RelationId r : rels) {
                std::vector<EntityId> reach;
                for (EntityId node : nodes) {
                    auto tails = index.successors(node, r);
                    reach.insert(reach.end(), tails.begin(), tails.end());
                }
                std::sort(reach.begin(), reach.end());
                reach.erase(std::unique(reach.begin(), reach.end()), reach.end());
                if (reach.empty()) continue;
                RelationPath extended = path;
                extended.push_back(r);
                if (std::binary_search(reach.begin(), reach.end(), t)) found.push_back(extended);
                if (len < max_len) next.emplace(std::move(extended), std::move(reach));
            }
        }
        frontier = std::move(next);
    }
    std::sort(found.begin(), found.end(), [](const RelationPath& a, const RelationPath& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return found;
}

namespace {

// Per-head forward expansion: probabilities of every path of length <= L
// restricted to the head's training-pair targets.
struct HeadEvidence {
    // target -> (path -> prob), paths already filtered by eta.
    std::map<EntityId, std::vector<PathProb>> reliable;
};

HeadEvidence expand_head(EntityId h, const std::vector<EntityId>& targets, const AdjacencyIndex& index,
                         int max_len, double eta) {
    HeadEvidence out;
    std::map<RelationPath, std::map<EntityId, double>> frontier;
    frontier[{}] = {{h, 1.0}};
    for (int len = 1; len <= max_len; ++len) {
        std::map<RelationPath, std::map<EntityId, double>> next;
        for (const auto& [path, dist] : frontier) {
            // Successor relations over the whole frontier distribution.
            std::vector<RelationId> rels;
            for (const auto& [node, prob] : dist) {
                auto o = index.out_relations(node);
                rels.insert(rels.end(), o.begin(), o.end());
            }
            std::sort(rels.begin(), rels.end());
            rels.erase(std::unique(rels.begin(), rels.end()), rels.end());

            for (RelationId r : rels) {
                std::map<EntityId, double> stepped;
                for (const auto& [node, prob] : dist) {
                    auto tails = index.successors(node, r);
                    if (tails.empty()) continue;
                    const double step = prob / static_cast<double>(tails.size());
                    for (EntityId t : tails) stepped[t] += step;
                }
                if (stepped.empty()) continue;
                RelationPath extended = path;
                extended.push_back(r);
                for (EntityId target : targets) {
                    auto it = stepped.find(target);
                    if (it != stepped.end() && it->second >= eta)
                        out.reliable[target].push_back({extended, it->second});
                }
                if (len < max_len) next.emplace(std::move(extended), std::move(stepped));
            }
        }
        frontier = std::move(next);
    }
    // Deterministic order: length, then lexicographic (map iteration above
    // is lexicographic only; enforce the length-major order here).
    for (auto& [target, paths] : out.reliable) {
        std::sort(paths.begin(), paths.end(), [](const PathProb& a, const PathProb& b) {
            if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
            return a.path < b.path;
        });
    }
    return out;
}

}  // namespace

PathEvidence mine_evidence(const TripleStore& store, const AdjacencyIndex& index, const MiningConfig& config) {
    if (config.eta <= 0.0 || config.eta >= 1.0) throw ConfigError("eta must lie in (0,1)");
    if (config.max_path_len < 1) throw ConfigError("max_path_len must be >= 1");

    // Group training triples by head: head -> target -> relations.
    std::map<EntityId, std::map<EntityId, std::vector<RelationId>>> by_head;
    for (const Triple& x : store.triples(Split::Train)) by_head[x.h][x.t].push_back(x.r);

    std::vector<EntityId> heads;
    heads.reserve(by_head.size());
    for (const auto& [h, _] : by_head) heads.push_back(h);

    struct Shard {
        std::unordered_map<Triple, TripleEvidence, TripleHash> per_triple;
        std::map<RelationPath, std::int64_t> marginal;
        std::map<RelationPath, std::map<RelationId, std::int64_t>> cooc;
    };

    const int threads = std::max(1, config.threads);
    std::vector<Shard> shards(static_cast<std::size_t>(threads));

    auto work = [&](int shard_idx) {
        Shard& shard = shards[static_cast<std::size_t>(shard_idx)];
        for (std::size_t i = static_cast<std::size_t>(shard_idx); i < heads.size(); i += static_cast<std::size_t>(threads)) {
            const EntityId h = heads[i];
            const auto& pair_rels = by_head.at(h);
            std::vector<EntityId> targets;
            targets.reserve(pair_rels.size());
            for (const auto& [t, _] : pair_rels) targets.push_back(t);

            HeadEvidence he = expand_head(h, targets, index, config.max_path_len, config.eta);
            for (const auto& [t, rels] : pair_rels) {
                auto it = he.reliable.find(t);
                const std::vector<PathProb>* reliable = it == he.reliable.end() ? nullptr : &it->second;

                // Pair-level counting: each (h,t) pair contributes once per
                // reliable path, co-occurring with every relation of the pair.
                if (reliable) {
                    for (const PathProb& pp : *reliable) {
                        shard.marginal[pp.path] += 1;
                        auto& row = shard.cooc[pp.path];
                        for (RelationId r : rels) row[r] += 1;
                    }
                }

                for (RelationId r : rels) {
                    TripleEvidence ev;
                    if (reliable) {
                        for (const PathProb& pp : *reliable) {
                            if (pp.path.size() == 1 && pp.path[0] == r) continue;  // direct link excluded
                            ev.z += pp.prob;
                            ev.paths.push_back(pp);
                        }
                    }
                    shard.per_triple.emplace(Triple{h, r, t}, std::move(ev));
                }
            }
        }
    };

    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(work, i);
        for (auto& th : pool) th.join();
    }

    // Shards touch disjoint heads, so merging is a disjoint union for the
    // per-triple map and an integer sum for the counts — order-independent.
    PathEvidence out;
    for (Shard& shard : shards) {
        out.per_triple_.merge(shard.per_triple);
        for (auto& [path, count] : shard.marginal) out.marginal_[path] += count;
        for (auto& [path, row] : shard.cooc) {
            auto& dst = out.cooc_[path];
            for (auto& [r, count] : row) dst[r] += count;
        }
    }
    return out;
}

const TripleEvidence* PathEvidence::find(const Triple& x) const {
    auto it = per_triple_.find(x);
    return it == per_triple_.end() ? nullptr : &it->second;
}

void PathEvidence::set_evidence(const Triple& x, TripleEvidence evidence) {
    per_triple_[x] = std::move(evidence);
}

void PathEvidence::set_counts(const RelationPath& p, std::int64_t marginal, std::map<RelationId, std::int64_t> cooc_row) {
    marginal_[p] = marginal;
    cooc_[p] = std::move(cooc_row);
}

std::int64_t PathEvidence::cooc(const RelationPath& p, RelationId r) const {
    auto it = cooc_.find(p);
    if (it == cooc_.end()) return 0;
    auto jt = it->second.find(r);
    return jt == it->second.end() ? 0 : jt->second;
}

std::int64_t PathEvidence::marginal(const RelationPath& p) const {
    auto it = marginal_.find(p);
    return it == marginal_.end() ? 0 : it->second;
}

double PathEvidence::confidence(RelationId r, const RelationPath& p) const {
    auto it = marginal_.find(p);
    if (it == marginal_.end()) throw DataError("path never observed in mining");
    return static_cast<double>(cooc(p, r)) / static_cast<double>(it->second);
}

std::vector<std::pair<RelationPath, double>> PathEvidence::top_paths(RelationId r, std::size_t k) const {
    if (k < 1) throw ConfigError("top_paths: k must be >= 1");
    std::vector<std::pair<RelationPath, double>> scored;
    for (const auto& [path, row] : cooc_) {
        auto it = row.find(r);
        if (it == row.end() || it->second == 0) continue;
        scored.emplace_back(path, static_cast<double>(it->second) / static_cast<double>(marginal_.at(path)));
    }
    std::sort(scored.begin(), scored.end(), [this](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        const auto ma = marginal_.at(a.first);
        const auto mb = marginal_.at(b.first);
        if (ma != mb) return ma > mb;
        return a.first < b.first;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

void PathEvidence::save(const std::string& path, std::uint64_t manifest_hash) const {
    BinaryWriter w(path);
    w.write(kEvidenceMagic);
    w.write(kEvidenceVersion);
    w.write(manifest_hash);

    // Sorted triple order keeps the file byte-stable across runs.
    std::vector<const std::pair<const Triple, TripleEvidence>*> entries;
    entries.reserve(per_triple_.size());
    for (const auto& kv : per_triple_) entries.push_back(&kv);
    std::sort(entries.begin(), entries.end(), [](const auto* a, const auto* b) { return a->first < b->first; });

    w.write<std::uint64_t>(entries.size());
    for (const auto* kv : entries) {
        w.write(kv->first.h);
        w.write(kv->first.r);
        w.write(kv->first.t);
        w.write(kv->second.z);
        w.write<std::uint32_t>(static_cast<std::uint32_t>(kv->second.paths.size()));
        for (const PathProb& pp : kv->second.paths) {
            w.write<std::uint32_t>(static_cast<std::uint32_t>(pp.path.size()));
            w.write_span(pp.path.data(), pp.path.size());
            w.write(pp.prob);
        }
    }

    w.write<std::uint64_t>(marginal_.size());
    for (const auto& [p, count] : marginal_) {
        w.write<std::uint32_t>(static_cast<std::uint32_t>(p.size()));
        w.write_span(p.data(), p.size());
        w.write(count);
        auto it = cooc_.find(p);
        const std::uint32_t rows = it == cooc_.end() ? 0 : static_cast<std::uint32_t>(it->second.size());
        w.write(rows);
        if (it != cooc_.end()) {
            for (const auto& [r, c] : it->second) {
                w.write(r);
                w.write(c);
            }
        }
    }
    w.finish();
}

PathEvidence PathEvidence::load(const std::string& path, std::uint64_t expected_manifest_hash) {
    BinaryReader r(path);
    if (r.read<std::uint32_t>() != kEvidenceMagic) throw DataError("not an evidence cache: " + path);
    if (r.read<std::uint32_t>() != kEvidenceVersion) throw DataError("unsupported evidence cache version: " + path);
    if (r.read<std::uint64_t>() != expected_manifest_hash)
        throw DataError("evidence cache is stale (input hash mismatch): " + path);

    PathEvidence out;
    const auto n_triples = r.read<std::uint64_t>();
    out.per_triple_.reserve(n_triples);
    for (std::uint64_t i = 0; i < n_triples; ++i) {
        Triple x;
        x.h = r.read<EntityId>();
        x.r = r.read<RelationId>();
        x.t = r.read<EntityId>();
        TripleEvidence ev;
        ev.z = r.read<double>();
        const auto n_paths = r.read<std::uint32_t>();
        ev.paths.reserve(n_paths);
        for (std::uint32_t j = 0; j < n_paths; ++j) {
            PathProb pp;
            pp.path.resize(r.read<std::uint32_t>());
            r.read_span(pp.path.data(), pp.path.size());
            pp.prob = r.read<double>();
            ev.paths.push_back(std::move(pp));
        }
        out.per_triple_.emplace(x, std::move(ev));
    }

    const auto n_marginals = r.read<std::uint64_t>();
    for (std::uint64_t i = 0; i < n_marginals; ++i) {
        RelationPath p(r.read<std::uint32_t>());
        r.read_span(p.data(), p.size());
        const auto count = r.read<std::int64_t>();
        const auto rows = r.read<std::uint32_t>();
        auto& row = out.cooc_[p];
        for (std::uint32_t j = 0; j < rows; ++j) {
            const auto rel = r.read<RelationId>();
            row[rel] = r.read<std::int64_t>();
        }
        out.marginal_.emplace(std::move(p), count);
    }
    return out;
}

}  // namespace rpe
