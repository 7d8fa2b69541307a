#include "rpe/evaluator.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <thread>

namespace rpe {

RankResult rank_entity(const Triple& triple, CorruptSide side, const ScoreFn& score, EntityId entity_count,
                       const std::unordered_set<Triple, TripleHash>& known_positives, TieRule tie) {
    RankResult out;
    out.triple = triple;
    out.side = side;

    const double target = score(triple);
    int raw = 0;
    int filtered = 0;
    for (EntityId e = 0; e < entity_count; ++e) {
        Triple candidate = side == CorruptSide::Head ? Triple{e, triple.r, triple.t} : Triple{triple.h, triple.r, e};
        if (candidate == triple) continue;
        const double s = score(candidate);
        const bool ahead = tie == TieRule::Optimistic ? s < target : s <= target;
        if (!ahead) continue;
        ++raw;
        if (!known_positives.contains(candidate)) ++filtered;
    }
    out.raw_rank = raw + 1;
    out.filtered_rank = filtered + 1;
    return out;
}

LinkPredictionReport link_prediction(const TripleStore& store, const ScoreFn& score,
                                     const std::unordered_map<RelationId, RelationCategory>& categories,
                                     TieRule tie, int threads, Split split) {
    const auto& test = store.triples(split);
    const auto known = store.all_positives();
    const EntityId entities = store.entity_count();

    struct Partial {
        std::int64_t queries = 0;
        std::int64_t raw_rank_sum = 0;
        std::int64_t filt_rank_sum = 0;
        std::int64_t raw_hits = 0;
        std::int64_t filt_hits = 0;
        CategoryHits by_category[4][2];
    };

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(test.size()) + 1));
    std::vector<Partial> parts(static_cast<std::size_t>(workers));

    auto run = [&](int w) {
        Partial& p = parts[static_cast<std::size_t>(w)];
        for (std::size_t i = static_cast<std::size_t>(w); i < test.size(); i += static_cast<std::size_t>(workers)) {
            const Triple& x = test[i];
            const auto cat_it = categories.find(x.r);
            for (CorruptSide side : {CorruptSide::Head, CorruptSide::Tail}) {
                const RankResult r = rank_entity(x, side, score, entities, known, tie);
                ++p.queries;
                p.raw_rank_sum += r.raw_rank;
                p.filt_rank_sum += r.filtered_rank;
                if (r.raw_rank <= 10) ++p.raw_hits;
                if (r.filtered_rank <= 10) ++p.filt_hits;
                if (cat_it != categories.end()) {
                    auto& cell = p.by_category[static_cast<int>(cat_it->second)][side == CorruptSide::Head ? 0 : 1];
                    ++cell.queries;
                    if (r.filtered_rank <= 10) ++cell.hits;
                }
            }
        }
    };

    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& th : pool) th.join();
    }

    Partial total;
    for (const Partial& p : parts) {
        total.queries += p.queries;
        total.raw_rank_sum += p.raw_rank_sum;
        total.filt_rank_sum += p.filt_rank_sum;
        total.raw_hits += p.raw_hits;
        total.filt_hits += p.filt_hits;
        for (int c = 0; c < 4; ++c) {
            for (int s = 0; s < 2; ++s) {
                total.by_category[c][s].queries += p.by_category[c][s].queries;
                total.by_category[c][s].hits += p.by_category[c][s].hits;
            }
        }
    }

    LinkPredictionReport report;
    report.queries = total.queries;
    if (total.queries > 0) {
        const double q = static_cast<double>(total.queries);
        report.mean_rank_raw = static_cast<double>(total.raw_rank_sum) / q;
        report.mean_rank_filter = static_cast<double>(total.filt_rank_sum) / q;
        report.hits10_raw = 100.0 * static_cast<double>(total.raw_hits) / q;
        report.hits10_filter = 100.0 * static_cast<double>(total.filt_hits) / q;
    }
    for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 2; ++s) report.by_category[c][s] = total.by_category[c][s];
    return report;
}

namespace {

constexpr RelationCategory kCategories[4] = {RelationCategory::OneToOne, RelationCategory::OneToN,
                                             RelationCategory::NToOne, RelationCategory::NToN};

}  // namespace

std::string LinkPredictionReport::to_tsv() const {
    std::ostringstream out;
    out << "metric\tvalue\n";
    out << "queries\t" << queries << '\n';
    out << "mean_rank_raw\t" << mean_rank_raw << '\n';
    out << "mean_rank_filter\t" << mean_rank_filter << '\n';
    out << "hits10_raw\t" << hits10_raw << '\n';
    out << "hits10_filter\t" << hits10_filter << '\n';
    for (int s = 0; s < 2; ++s) {
        for (int c = 0; c < 4; ++c) {
            const auto& cell = by_category[c][s];
            out << "hits10_filter_" << (s == 0 ? "head" : "tail") << '_' << category_name(kCategories[c]) << '\t'
                << cell.percent() << '\n';
        }
    }
    return out.str();
}

std::string LinkPredictionReport::to_pretty() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    out << "Link prediction (" << queries << " queries)\n";
    out << "  Mean Rank   raw " << std::setw(8) << mean_rank_raw << "   filter " << std::setw(8) << mean_rank_filter
        << '\n';
    out << "  Hits@10(%)  raw " << std::setw(8) << hits10_raw << "   filter " << std::setw(8) << hits10_filter
        << '\n';
    out << "  Hits@10(%) by relation category (filter)\n";
    out << "    side      1-1     1-N     N-1     N-N\n";
    for (int s = 0; s < 2; ++s) {
        out << "    " << (s == 0 ? "head" : "tail") << "  ";
        for (int c = 0; c < 4; ++c) out << std::setw(8) << by_category[c][s].percent();
        out << '\n';
    }
    return out.str();
}

namespace {

struct Scored {
    double score;
    bool positive;
};

// Best threshold for `predict positive iff score < threshold`, ties going
// to the smallest candidate. Candidates: below the minimum, midpoints
// between distinct consecutive scores, above the maximum.
std::pair<double, std::int64_t> sweep_threshold(std::vector<Scored>& items) {
    std::sort(items.begin(), items.end(), [](const Scored& a, const Scored& b) { return a.score < b.score; });
    std::int64_t total_neg = 0;
    for (const Scored& it : items)
        if (!it.positive) ++total_neg;

    double best_delta = items.front().score - 1.0;
    std::int64_t best_correct = total_neg;  // everything predicted negative

    std::int64_t pos_below = 0;
    std::int64_t neg_below = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].positive) {
            ++pos_below;
        } else {
            ++neg_below;
        }
        const bool last = i + 1 == items.size();
        if (!last && items[i + 1].score == items[i].score) continue;
        const double delta = last ? items[i].score + 1.0 : (items[i].score + items[i + 1].score) / 2.0;
        const std::int64_t correct = pos_below + (total_neg - neg_below);
        if (correct > best_correct) {
            best_correct = correct;
            best_delta = delta;
        }
    }
    return {best_delta, best_correct};
}

}  // namespace

ThresholdSet tune_thresholds(const std::vector<Triple>& triples, const std::vector<std::int8_t>& labels,
                             const ScoreFn& score) {
    if (triples.empty()) throw DataError("threshold tuning needs a nonempty labeled validation split");
    if (triples.size() != labels.size()) throw DataError("triples/labels size mismatch");

    std::unordered_map<RelationId, std::vector<Scored>> by_relation;
    std::vector<Scored> pooled;
    pooled.reserve(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const Scored s{score(triples[i]), labels[i] > 0};
        by_relation[triples[i].r].push_back(s);
        pooled.push_back(s);
    }

    ThresholdSet out;
    out.global = sweep_threshold(pooled).first;
    for (auto& [r, items] : by_relation) out.per_relation[r] = sweep_threshold(items).first;
    return out;
}

double triple_classification(const std::vector<Triple>& triples, const std::vector<std::int8_t>& labels,
                             const ScoreFn& score, const ThresholdSet& thresholds) {
    if (triples.empty()) throw DataError("classification needs a nonempty labeled split");
    if (triples.size() != labels.size()) throw DataError("triples/labels size mismatch");

    std::int64_t correct = 0;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const bool predicted_positive = score(triples[i]) < thresholds.for_relation(triples[i].r);
        if (predicted_positive == (labels[i] > 0)) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(triples.size());
}

LabeledSplit generate_classification_negatives(const TripleStore& store, Split split,
                                               const TypeConstraintIndex& types, Rng& rng) {
    // Position-compatible pools over the training split.
    std::vector<EntityId> head_pool;
    std::vector<EntityId> tail_pool;
    for (const Triple& x : store.triples(Split::Train)) {
        head_pool.push_back(x.h);
        tail_pool.push_back(x.t);
    }
    auto dedup = [](std::vector<EntityId>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedup(head_pool);
    dedup(tail_pool);

    const auto known = store.all_positives();
    const auto& positives = store.triples(split);
    const auto& labels = store.labels(split);

    LabeledSplit out;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        if (labels[i] < 0) continue;  // already a negative; keep source splits positive-only
        const Triple& x = positives[i];
        out.triples.push_back(x);
        out.labels.push_back(1);

        const double p_head = types.has(x.r) ? types.head_replace_prob(x.r) : 0.5;
        const bool corrupt_head = rng.bernoulli(p_head);
        const auto& pool = corrupt_head ? head_pool : tail_pool;
        if (pool.empty()) {
            ++out.skipped;
            continue;
        }

        auto corrupted_with = [&](EntityId e) {
            return corrupt_head ? Triple{e, x.r, x.t} : Triple{x.h, x.r, e};
        };
        bool found = false;
        Triple negative;
        for (int tries = 0; tries < 100 && !found; ++tries) {
            negative = corrupted_with(pool[rng.uniform_index(pool.size())]);
            found = !known.contains(negative);
        }
        if (!found) {
            for (EntityId e : pool) {
                negative = corrupted_with(e);
                if (!known.contains(negative)) {
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            ++out.skipped;
            continue;
        }
        out.triples.push_back(negative);
        out.labels.push_back(-1);
    }
    return out;
}

}  // namespace rpe
