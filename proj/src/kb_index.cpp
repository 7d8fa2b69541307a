#include "rpe/kb_index.hpp"

#include <algorithm>
#include <set>

namespace rpe {

namespace {

void sort_unique(std::vector<EntityId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

AdjacencyIndex::AdjacencyIndex(const TripleStore& store)
    : AdjacencyIndex(store.triples(Split::Train), store.entity_count(), store.relation_count()) {}

AdjacencyIndex::AdjacencyIndex(const std::vector<Triple>& triples, EntityId entities, RelationId relations)
    : entity_count_(entities), relation_count_(relations) {
    out_rels_.resize(static_cast<std::size_t>(entity_count_));
    for (const Triple& x : triples) {
        succ_[{x.h, x.r}].push_back(x.t);
        pred_[{x.t, x.r}].push_back(x.h);
        out_rels_[static_cast<std::size_t>(x.h)].push_back(x.r);
    }
    for (auto& [key, tails] : succ_) sort_unique(tails);
    for (auto& [key, heads] : pred_) sort_unique(heads);
    for (auto& rels : out_rels_) {
        std::sort(rels.begin(), rels.end());
        rels.erase(std::unique(rels.begin(), rels.end()), rels.end());
    }
}

std::span<const EntityId> AdjacencyIndex::successors(EntityId h, RelationId r) const {
    auto it = succ_.find({h, r});
    if (it == succ_.end()) return {};
    return it->second;
}

std::span<const EntityId> AdjacencyIndex::predecessors(EntityId t, RelationId r) const {
    auto it = pred_.find({t, r});
    if (it == pred_.end()) return {};
    return it->second;
}

std::span<const RelationId> AdjacencyIndex::out_relations(EntityId h) const {
    if (h < 0 || h >= entity_count_) return {};
    return out_rels_[static_cast<std::size_t>(h)];
}

bool AdjacencyIndex::has_edge(EntityId h, RelationId r, EntityId t) const {
    auto tails = successors(h, r);
    return std::binary_search(tails.begin(), tails.end(), t);
}

TypeConstraintIndex::TypeConstraintIndex(const TripleStore& store) {
    if (store.triples(Split::Train).empty())
        throw DataError("type constraints need a nonempty training split");

    struct Acc {
        std::set<std::pair<EntityId, EntityId>> pairs;
    };
    std::unordered_map<RelationId, Acc> acc;
    for (const Triple& x : store.triples(Split::Train))
        acc[x.r].pairs.insert({x.h, x.t});

    for (auto& [r, a] : acc) {
        Stats s;
        for (const auto& [h, t] : a.pairs) {
            s.domain.push_back(h);
            s.range.push_back(t);
        }
        sort_unique(s.domain);
        sort_unique(s.range);
        const double pairs = static_cast<double>(a.pairs.size());
        s.teh = pairs / static_cast<double>(s.domain.size());
        s.het = pairs / static_cast<double>(s.range.size());
        by_relation_.emplace(r, std::move(s));
    }
}

bool TypeConstraintIndex::has(RelationId r) const { return by_relation_.contains(r); }

const TypeConstraintIndex::Stats& TypeConstraintIndex::stats(RelationId r) const {
    auto it = by_relation_.find(r);
    if (it == by_relation_.end())
        throw DataError("relation " + std::to_string(r) + " has no training triples");
    return it->second;
}

const std::vector<EntityId>& TypeConstraintIndex::domain(RelationId r) const { return stats(r).domain; }
const std::vector<EntityId>& TypeConstraintIndex::range(RelationId r) const { return stats(r).range; }
double TypeConstraintIndex::teh(RelationId r) const { return stats(r).teh; }
double TypeConstraintIndex::het(RelationId r) const { return stats(r).het; }

double TypeConstraintIndex::head_replace_prob(RelationId r) const {
    const Stats& s = stats(r);
    return s.teh / (s.teh + s.het);
}

std::unordered_map<RelationId, RelationCategory> classify_relations(const TripleStore& store) {
    if (store.triples(Split::Train).empty())
        throw DataError("relation categories need a nonempty training split");

    TypeConstraintIndex index(store);
    std::unordered_map<RelationId, RelationCategory> out;
    for (RelationId r = 0; r < store.relation_count(); ++r) {
        if (!index.has(r)) continue;
        const double tph = index.teh(r);
        const double hpt = index.het(r);
        RelationCategory c;
        if (tph < 1.5 && hpt < 1.5) {
            c = RelationCategory::OneToOne;
        } else if (tph >= 1.5 && hpt < 1.5) {
            c = RelationCategory::OneToN;
        } else if (tph < 1.5 && hpt >= 1.5) {
            c = RelationCategory::NToOne;
        } else {
            c = RelationCategory::NToN;
        }
        out.emplace(r, c);
    }
    return out;
}

}  // namespace rpe
