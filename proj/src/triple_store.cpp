#include "rpe/triple_store.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace rpe {

namespace {

constexpr std::uint32_t kStoreMagic = 0x4b455052;  // "RPEK"
constexpr std::uint32_t kStoreVersion = 1;

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for hashing: " + path);
    char buf[1 << 16];
    std::uint64_t h = 0xcbf29ce484222325ULL;
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

EntityId TripleStore::intern_entity(const std::string& name) {
    auto it = entity_ids_.find(name);
    if (it != entity_ids_.end()) return it->second;
    auto id = static_cast<EntityId>(entity_names_.size());
    entity_names_.push_back(name);
    entity_ids_.emplace(name, id);
    return id;
}

RelationId TripleStore::intern_relation(const std::string& name) {
    auto it = relation_ids_.find(name);
    if (it != relation_ids_.end()) return it->second;
    auto id = static_cast<RelationId>(relation_names_.size());
    relation_names_.push_back(name);
    relation_ids_.emplace(name, id);
    original_relations_ = static_cast<RelationId>(relation_names_.size());
    return id;
}

std::optional<EntityId> TripleStore::find_entity(const std::string& name) const {
    auto it = entity_ids_.find(name);
    if (it == entity_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> TripleStore::find_relation(const std::string& name) const {
    auto it = relation_ids_.find(name);
    if (it == relation_ids_.end()) return std::nullopt;
    return it->second;
}

Triple TripleStore::add_triple(const std::string& head, const std::string& relation, const std::string& tail,
                               Split split, std::int8_t label) {
    if (label != 1 && label != -1) throw DataError("label must be 1 or -1");
    Triple x;
    if (split == Split::Train) {
        if (augmented_) throw DataError("cannot add training triples after add_inverses()");
        x.h = intern_entity(head);
        x.r = intern_relation(relation);
        x.t = intern_entity(tail);
    } else {
        auto h = find_entity(head);
        auto r = find_relation(relation);
        auto t = find_entity(tail);
        if (!h || !r || !t) throw DataError("unseen entity or relation in " + std::string(split_name(split)));
        x = Triple{*h, *r, *t};
    }
    const int si = static_cast<int>(split);
    auto& seen = label > 0 ? seen_pos_[si] : seen_neg_[si];
    if (seen.insert(x).second) {
        triples_[si].push_back(x);
        labels_[si].push_back(label);
    }
    return x;
}

LoadReport TripleStore::load_triples(const std::string& path, Split split) {
    if (split == Split::Train && augmented_)
        throw DataError("cannot load training triples after add_inverses()");

    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);

    LoadReport report;
    const int si = static_cast<int>(split);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++report.lines;

        auto fields = split_tabs(line);
        if (fields.size() != 3 && fields.size() != 4) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": expected 3 or 4 tab-separated fields, got " << fields.size();
            throw DataError(msg.str());
        }

        std::int8_t label = 1;
        if (fields.size() == 4) {
            if (fields[3] == "1") {
                label = 1;
            } else if (fields[3] == "-1") {
                label = -1;
            } else {
                std::ostringstream msg;
                msg << path << ":" << lineno << ": label must be 1 or -1, got '" << fields[3] << "'";
                throw DataError(msg.str());
            }
        }

        Triple x;
        if (split == Split::Train) {
            x.h = intern_entity(fields[0]);
            x.r = intern_relation(fields[1]);
            x.t = intern_entity(fields[2]);
        } else {
            auto h = find_entity(fields[0]);
            auto r = find_relation(fields[1]);
            auto t = find_entity(fields[2]);
            if (!h || !r || !t) {
                std::ostringstream msg;
                msg << path << ":" << lineno << ": unseen "
                    << (!h ? "head entity '" + fields[0] : !r ? "relation '" + fields[1] : "tail entity '" + fields[2])
                    << "'";
                report.skipped.push_back(msg.str());
                continue;
            }
            x = Triple{*h, *r, *t};
        }

        auto& seen = label > 0 ? seen_pos_[si] : seen_neg_[si];
        if (!seen.insert(x).second) {
            ++report.duplicates;
            continue;
        }
        triples_[si].push_back(x);
        labels_[si].push_back(label);
        ++report.added;
    }
    return report;
}

void TripleStore::add_inverses() {
    if (augmented_) throw DataError("store already inverse-augmented");
    if (original_relations_ == 0) throw DataError("add_inverses() on a store with no relations");

    const RelationId r0 = original_relations_;
    for (RelationId r = 0; r < r0; ++r) {
        const std::string inv_name = relation_names_[static_cast<std::size_t>(r)] + "^-1";
        relation_names_.push_back(inv_name);
        relation_ids_.emplace(inv_name, r + r0);
    }

    const int si = static_cast<int>(Split::Train);
    const std::size_t n = triples_[si].size();
    triples_[si].reserve(2 * n);
    labels_[si].reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const Triple& x = triples_[si][i];
        Triple inv{x.t, x.r + r0, x.h};
        if (seen_pos_[si].insert(inv).second) {
            triples_[si].push_back(inv);
            labels_[si].push_back(1);
        }
    }
    augmented_ = true;
}

bool TripleStore::has_negatives(Split s) const {
    const auto& l = labels_[static_cast<int>(s)];
    return std::any_of(l.begin(), l.end(), [](std::int8_t v) { return v < 0; });
}

std::unordered_set<Triple, TripleHash> TripleStore::all_positives() const {
    std::unordered_set<Triple, TripleHash> out;
    for (int si = 0; si < 3; ++si) {
        out.insert(seen_pos_[si].begin(), seen_pos_[si].end());
    }
    return out;
}

void TripleStore::save_id_maps(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/entity2id.tsv");
        if (!out) throw DataError("cannot write entity2id.tsv in " + dir);
        for (std::size_t i = 0; i < entity_names_.size(); ++i)
            out << entity_names_[i] << '\t' << i << '\n';
    }
    {
        std::ofstream out(dir + "/relation2id.tsv");
        if (!out) throw DataError("cannot write relation2id.tsv in " + dir);
        for (std::size_t i = 0; i < relation_names_.size(); ++i)
            out << relation_names_[i] << '\t' << i << '\n';
    }
}

void TripleStore::save_cache(const std::string& path, std::uint64_t manifest_hash) const {
    BinaryWriter w(path);
    w.write(kStoreMagic);
    w.write(kStoreVersion);
    w.write(manifest_hash);
    w.write<std::uint64_t>(entity_names_.size());
    for (const auto& name : entity_names_) w.write_string(name);
    w.write<std::uint64_t>(relation_names_.size());
    w.write<std::int32_t>(original_relations_);
    w.write<std::uint8_t>(augmented_ ? 1 : 0);
    for (const auto& name : relation_names_) w.write_string(name);
    for (int si = 0; si < 3; ++si) {
        w.write<std::uint64_t>(triples_[si].size());
        for (std::size_t i = 0; i < triples_[si].size(); ++i) {
            const Triple& x = triples_[si][i];
            w.write(x.h);
            w.write(x.r);
            w.write(x.t);
            w.write(labels_[si][i]);
        }
    }
    w.finish();
}

TripleStore TripleStore::load_cache(const std::string& path, std::uint64_t expected_manifest_hash) {
    BinaryReader r(path);
    if (r.read<std::uint32_t>() != kStoreMagic) throw DataError("not a store cache: " + path);
    if (r.read<std::uint32_t>() != kStoreVersion) throw DataError("unsupported store cache version: " + path);
    const auto manifest_hash = r.read<std::uint64_t>();
    if (manifest_hash != expected_manifest_hash)
        throw DataError("store cache is stale (input hash mismatch): " + path);

    TripleStore s;
    const auto n_entities = r.read<std::uint64_t>();
    s.entity_names_.reserve(n_entities);
    for (std::uint64_t i = 0; i < n_entities; ++i) {
        std::string name = r.read_string();
        s.entity_ids_.emplace(name, static_cast<EntityId>(i));
        s.entity_names_.push_back(std::move(name));
    }
    const auto n_relations = r.read<std::uint64_t>();
    s.original_relations_ = r.read<std::int32_t>();
    s.augmented_ = r.read<std::uint8_t>() != 0;
    s.relation_names_.reserve(n_relations);
    for (std::uint64_t i = 0; i < n_relations; ++i) {
        std::string name = r.read_string();
        s.relation_ids_.emplace(name, static_cast<RelationId>(i));
        s.relation_names_.push_back(std::move(name));
    }
    for (int si = 0; si < 3; ++si) {
        const auto count = r.read<std::uint64_t>();
        s.triples_[si].reserve(count);
        s.labels_[si].reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            Triple x;
            x.h = r.read<EntityId>();
            x.r = r.read<RelationId>();
            x.t = r.read<EntityId>();
            auto label = r.read<std::int8_t>();
            s.triples_[si].push_back(x);
            s.labels_[si].push_back(label);
            (label > 0 ? s.seen_pos_[si] : s.seen_neg_[si]).insert(x);
        }
    }
    return s;
}

}  // namespace rpe
