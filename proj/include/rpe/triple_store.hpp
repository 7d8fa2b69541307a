#pragma once
// Triple ingestion and vocabularies.
//
// Ids are dense and assigned in first-seen file order so that repeated runs
// over the same inputs produce identical id maps. After inverse augmentation
// the relation vocabulary doubles: relation r < R has inverse r + R, and the
// training split holds (t, r+R, h) for every (h, r, t).

#include "rpe/common.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rpe {

enum class Split { Train = 0, Valid = 1, Test = 2 };

constexpr const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Valid: return "valid";
        case Split::Test: return "test";
    }
    return "?";
}

// Lines of valid/test whose entity or relation never occurs in train are
// excluded from evaluation denominators; the report records why.
struct LoadReport {
    std::size_t lines = 0;
    std::size_t added = 0;
    std::size_t duplicates = 0;
    std::vector<std::string> skipped;  // "file:line: reason"
};

class TripleStore {
public:
    // Parses `head<TAB>relation<TAB>tail[<TAB>label]`, label in {1,-1}.
    LoadReport load_triples(const std::string& path, Split split);

    // In-memory ingestion of one triple. Train extends the vocabularies
    // (first-seen order); valid/test require known names. Returns the id
    // triple; duplicates within a split are ignored.
    Triple add_triple(const std::string& head, const std::string& relation, const std::string& tail, Split split,
                      std::int8_t label = 1);

    // Doubles the relation vocabulary and mirrors every training triple.
    // Valid/test stay untouched; evaluation runs on original triples.
    void add_inverses();
    bool augmented() const { return augmented_; }

    EntityId entity_count() const { return static_cast<EntityId>(entity_names_.size()); }
    RelationId relation_count() const { return static_cast<RelationId>(relation_names_.size()); }
    RelationId original_relation_count() const { return original_relations_; }

    RelationId inverse(RelationId r) const {
        if (!augmented_) throw DataError("inverse() before add_inverses()");
        return r < original_relations_ ? r + original_relations_ : r - original_relations_;
    }

    std::optional<EntityId> find_entity(const std::string& name) const;
    std::optional<RelationId> find_relation(const std::string& name) const;
    const std::string& entity_name(EntityId id) const { return entity_names_.at(static_cast<std::size_t>(id)); }
    const std::string& relation_name(RelationId id) const { return relation_names_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::string>& entity_names() const { return entity_names_; }
    const std::vector<std::string>& relation_names() const { return relation_names_; }

    const std::vector<Triple>& triples(Split s) const { return triples_[static_cast<int>(s)]; }
    // Parallel to triples(s); +1 unless the file carried an explicit -1.
    const std::vector<std::int8_t>& labels(Split s) const { return labels_[static_cast<int>(s)]; }
    bool has_negatives(Split s) const;

    // Positive membership only; labeled negatives never count.
    bool contains(Split s, const Triple& x) const {
        return seen_pos_[static_cast<int>(s)].contains(x);
    }

    // All positive triples across splits; the link-prediction filter set.
    std::unordered_set<Triple, TripleHash> all_positives() const;

    // `name<TAB>id` maps for round-tripping ids outside the binary cache.
    void save_id_maps(const std::string& dir) const;

    void save_cache(const std::string& path, std::uint64_t manifest_hash) const;
    static TripleStore load_cache(const std::string& path, std::uint64_t expected_manifest_hash);

private:
    EntityId intern_entity(const std::string& name);
    RelationId intern_relation(const std::string& name);

    std::vector<std::string> entity_names_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, EntityId> entity_ids_;
    std::unordered_map<std::string, RelationId> relation_ids_;
    RelationId original_relations_ = 0;
    bool augmented_ = false;

    std::vector<Triple> triples_[3];
    std::vector<std::int8_t> labels_[3];
    std::unordered_set<Triple, TripleHash> seen_pos_[3];
    std::unordered_set<Triple, TripleHash> seen_neg_[3];
};

}  // namespace rpe
