// Python bindings for the core operations: stores and indices, path
// mining, scoring, training, and both evaluation protocols.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rpe/pipeline.hpp"

#include <sstream>

namespace py = pybind11;
using namespace rpe;

namespace {

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "valid") return Split::Valid;
    if (s == "test") return Split::Test;
    throw ConfigError("split must be train, valid, or test");
}

TieRule parse_tie(const std::string& s) {
    if (s == "optimistic") return TieRule::Optimistic;
    if (s == "pessimistic") return TieRule::Pessimistic;
    throw ConfigError("tie must be optimistic or pessimistic");
}

std::vector<Triple> to_triples(const std::vector<std::tuple<EntityId, RelationId, EntityId>>& raw) {
    std::vector<Triple> out;
    out.reserve(raw.size());
    for (const auto& [h, r, t] : raw) out.push_back({h, r, t});
    return out;
}

}  // namespace

PYBIND11_MODULE(_rpe, m) {
    m.doc() = "Knowledge base completion with relation path embeddings";
    m.attr("__version__") = kToolVersion;

    py::register_exception<ConfigError>(m, "RpeConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "RpeDataError", PyExc_RuntimeError);
    py::register_exception<NumericError>(m, "RpeNumericError", PyExc_ArithmeticError);

    py::class_<LoadReport>(m, "LoadReport")
        .def_readonly("lines", &LoadReport::lines)
        .def_readonly("added", &LoadReport::added)
        .def_readonly("duplicates", &LoadReport::duplicates)
        .def_readonly("skipped", &LoadReport::skipped);

    py::class_<TripleStore>(m, "TripleStore")
        .def(py::init<>())
        .def("load_triples",
             [](TripleStore& s, const std::string& path, const std::string& split) {
                 return s.load_triples(path, parse_split(split));
             },
             py::arg("path"), py::arg("split"))
        .def("add_triple",
             [](TripleStore& s, const std::string& h, const std::string& r, const std::string& t,
                const std::string& split, int label) {
                 const Triple x = s.add_triple(h, r, t, parse_split(split), static_cast<std::int8_t>(label));
                 return py::make_tuple(x.h, x.r, x.t);
             },
             py::arg("head"), py::arg("relation"), py::arg("tail"), py::arg("split") = "train",
             py::arg("label") = 1)
        .def("add_inverses", &TripleStore::add_inverses)
        .def_property_readonly("augmented", &TripleStore::augmented)
        .def_property_readonly("entity_count", &TripleStore::entity_count)
        .def_property_readonly("relation_count", &TripleStore::relation_count)
        .def_property_readonly("original_relation_count", &TripleStore::original_relation_count)
        .def("inverse", &TripleStore::inverse, py::arg("relation"))
        .def("entity_id",
             [](const TripleStore& s, const std::string& name) -> py::object {
                 auto id = s.find_entity(name);
                 return id ? py::cast(*id) : py::none();
             },
             py::arg("name"))
        .def("relation_id",
             [](const TripleStore& s, const std::string& name) -> py::object {
                 auto id = s.find_relation(name);
                 return id ? py::cast(*id) : py::none();
             },
             py::arg("name"))
        .def("entity_name", &TripleStore::entity_name, py::arg("id"))
        .def("relation_name", &TripleStore::relation_name, py::arg("id"))
        .def("triples",
             [](const TripleStore& s, const std::string& split) {
                 std::vector<std::tuple<EntityId, RelationId, EntityId>> out;
                 for (const Triple& x : s.triples(parse_split(split))) out.emplace_back(x.h, x.r, x.t);
                 return out;
             },
             py::arg("split"))
        .def("labels",
             [](const TripleStore& s, const std::string& split) {
                 const auto& l = s.labels(parse_split(split));
                 return std::vector<int>(l.begin(), l.end());
             },
             py::arg("split"))
        .def("save_cache", &TripleStore::save_cache, py::arg("path"), py::arg("manifest_hash") = 0)
        .def_static("load_cache", &TripleStore::load_cache, py::arg("path"), py::arg("manifest_hash") = 0)
        .def("save_id_maps", &TripleStore::save_id_maps, py::arg("dir"));

    py::class_<AdjacencyIndex>(m, "AdjacencyIndex")
        .def(py::init<const TripleStore&>(), py::arg("store"), py::keep_alive<1, 2>())
        .def("successors",
             [](const AdjacencyIndex& idx, EntityId h, RelationId r) {
                 auto s = idx.successors(h, r);
                 return std::vector<EntityId>(s.begin(), s.end());
             })
        .def("out_relations", [](const AdjacencyIndex& idx, EntityId h) {
            auto s = idx.out_relations(h);
            return std::vector<RelationId>(s.begin(), s.end());
        });

    py::class_<TypeConstraintIndex>(m, "TypeConstraintIndex")
        .def(py::init<const TripleStore&>(), py::arg("store"))
        .def("has", &TypeConstraintIndex::has)
        .def("domain", &TypeConstraintIndex::domain, py::return_value_policy::copy)
        .def("range", &TypeConstraintIndex::range, py::return_value_policy::copy)
        .def("teh", &TypeConstraintIndex::teh)
        .def("het", &TypeConstraintIndex::het)
        .def("head_replace_prob", &TypeConstraintIndex::head_replace_prob);

    m.def("classify_relations", [](const TripleStore& store) {
        std::map<RelationId, std::string> out;
        for (const auto& [r, c] : classify_relations(store)) out[r] = category_name(c);
        return out;
    });

    m.def(
        "path_probability",
        [](EntityId h, const RelationPath& p, const AdjacencyIndex& index) {
            return path_probability(h, p, index);
        },
        py::arg("head"), py::arg("path"), py::arg("index"));
    m.def("enumerate_paths", &enumerate_paths, py::arg("head"), py::arg("tail"), py::arg("max_len"),
          py::arg("index"));

    py::class_<PathEvidence>(m, "PathEvidence")
        .def("find",
             [](const PathEvidence& ev, EntityId h, RelationId r, EntityId t) -> py::object {
                 const TripleEvidence* e = ev.find({h, r, t});
                 if (e == nullptr) return py::none();
                 py::list paths;
                 for (const PathProb& pp : e->paths) paths.append(py::make_tuple(pp.path, pp.prob));
                 return py::make_tuple(paths, e->z);
             })
        .def_property_readonly("triple_count", &PathEvidence::triple_count)
        .def("cooc", &PathEvidence::cooc, py::arg("path"), py::arg("relation"))
        .def("marginal", &PathEvidence::marginal, py::arg("path"))
        .def("confidence", &PathEvidence::confidence, py::arg("relation"), py::arg("path"))
        .def("top_paths", &PathEvidence::top_paths, py::arg("relation"), py::arg("k"))
        .def("save", &PathEvidence::save, py::arg("path"), py::arg("manifest_hash") = 0)
        .def_static("load", &PathEvidence::load, py::arg("path"), py::arg("manifest_hash") = 0);

    m.def(
        "mine_evidence",
        [](const TripleStore& store, const AdjacencyIndex& index, int max_path_len, double eta, int threads) {
            MiningConfig config{max_path_len, eta, threads};
            py::gil_scoped_release release;
            return mine_evidence(store, index, config);
        },
        py::arg("store"), py::arg("index"), py::arg("max_path_len") = 2, py::arg("eta") = 0.05,
        py::arg("threads") = 1);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("dim_entity", &TrainConfig::entity_dim)
        .def_readwrite("dim_relation", &TrainConfig::relation_dim)
        .def_readwrite("gamma1", &TrainConfig::gamma1)
        .def_readwrite("gamma2", &TrainConfig::gamma2)
        .def_readwrite("alpha", &TrainConfig::alpha)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("lambda_", &TrainConfig::lambda)
        .def_readwrite("eta", &TrainConfig::eta)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("threads", &TrainConfig::threads)
        .def_readwrite("warm_start", &TrainConfig::warm_start_path)
        .def_property(
            "mode", [](const TrainConfig& c) { return mode_name(c.mode); },
            [](TrainConfig& c, const std::string& v) { c.mode = parse_mode(v); })
        .def_property(
            "sampling",
            [](const TrainConfig& c) { return c.sampling ? sampling_name(*c.sampling) : std::string("auto"); },
            [](TrainConfig& c, const std::string& v) {
                c.sampling = v == "auto" ? std::nullopt : std::optional(parse_sampling(v));
            })
        .def_property(
            "norm", [](const TrainConfig& c) { return c.norm == Norm::L1 ? "l1" : "l2"; },
            [](TrainConfig& c, const std::string& v) {
                if (v != "l1" && v != "l2") throw ConfigError("norm must be l1 or l2");
                c.norm = v == "l1" ? Norm::L1 : Norm::L2;
            })
        .def_property(
            "init", [](const TrainConfig& c) { return c.init == InitScheme::Random ? "random" : "warmstart"; },
            [](TrainConfig& c, const std::string& v) {
                if (v != "random" && v != "warmstart") throw ConfigError("init must be random or warmstart");
                c.init = v == "random" ? InitScheme::Random : InitScheme::WarmStart;
            })
        .def("validate", &TrainConfig::validate)
        .def_static("from_file", &TrainConfig::from_file, py::arg("path"))
        .def("to_text", &TrainConfig::to_text);

    py::class_<ModelParams>(m, "ModelParams")
        .def_property_readonly("entity_count", &ModelParams::entity_count)
        .def_property_readonly("relation_count", &ModelParams::relation_count)
        .def_property_readonly("mode", [](const ModelParams& p) { return mode_name(p.hyper.mode); })
        .def_property_readonly("dim_entity", [](const ModelParams& p) { return p.hyper.entity_dim; })
        .def_property_readonly("dim_relation", [](const ModelParams& p) { return p.hyper.relation_dim; })
        .def_property_readonly("lambda_", [](const ModelParams& p) { return p.hyper.lambda; })
        .def("entity_vector",
             [](const ModelParams& p, EntityId e) {
                 const auto& v = p.entity.at(static_cast<std::size_t>(e));
                 return std::vector<double>(v.data(), v.data() + v.size());
             })
        .def("relation_vector",
             [](const ModelParams& p, RelationId r) {
                 const auto& v = p.relation.at(static_cast<std::size_t>(r));
                 return std::vector<double>(v.data(), v.data() + v.size());
             })
        .def("save", &ModelParams::save, py::arg("path"))
        .def_static("load", &ModelParams::load, py::arg("path"));

    m.def("initialize", &initialize, py::arg("store"), py::arg("config"));

    m.def(
        "score_relation",
        [](const ModelParams& p, EntityId h, RelationId r, EntityId t) { return score_relation(h, r, t, p); },
        py::arg("params"), py::arg("head"), py::arg("relation"), py::arg("tail"));
    m.def(
        "score_path",
        [](const ModelParams& p, EntityId h, const RelationPath& path, EntityId t) {
            return score_path(h, path, t, p);
        },
        py::arg("params"), py::arg("head"), py::arg("path"), py::arg("tail"));
    m.def(
        "score_goal",
        [](const ModelParams& p, EntityId h, RelationId r, EntityId t, const PathEvidence* ev) {
            const TripleEvidence* entry = ev ? ev->find({h, r, t}) : nullptr;
            const ScoreBreakdown b = score_goal(h, r, t, entry, ev, p);
            py::list terms;
            for (const PathTerm& pt : b.path_terms)
                terms.append(py::make_tuple(pt.path, pt.weight, pt.distance));
            py::dict out;
            out["direct"] = b.direct;
            out["path_terms"] = terms;
            out["combined"] = b.combined;
            return out;
        },
        py::arg("params"), py::arg("head"), py::arg("relation"), py::arg("tail"),
        py::arg("evidence") = nullptr);
    m.def(
        "score_final",
        [](const ModelParams& p, EntityId h, RelationId r, EntityId t, const PathEvidence* ev) {
            return score_final(h, r, t, ev, p);
        },
        py::arg("params"), py::arg("head"), py::arg("relation"), py::arg("tail"),
        py::arg("evidence") = nullptr);

    py::class_<EpochStats>(m, "EpochStats")
        .def_readonly("loss", &EpochStats::loss)
        .def_readonly("violations", &EpochStats::violations)
        .def_readonly("skipped", &EpochStats::skipped)
        .def_readonly("max_entity_norm", &EpochStats::max_entity_norm)
        .def_readonly("max_relation_norm", &EpochStats::max_relation_norm)
        .def_readonly("seconds", &EpochStats::seconds);

    m.def(
        "train",
        [](const TripleStore& store, const PathEvidence* evidence, const TrainConfig& config) {
            std::optional<TypeConstraintIndex> types;
            if (config.effective_sampling() != Sampling::Uniform) types.emplace(store);
            TrainResult r = [&] {
                py::gil_scoped_release release;
                return train_model(store, evidence, types ? &*types : nullptr, config);
            }();
            return py::make_tuple(std::move(r.params), r.epochs);
        },
        py::arg("store"), py::arg("evidence") = nullptr, py::arg("config") = TrainConfig{},
        "Train a model; returns (params, per-epoch stats).");

    py::class_<LinkPredictionReport>(m, "LinkPredictionReport")
        .def_readonly("queries", &LinkPredictionReport::queries)
        .def_readonly("mean_rank_raw", &LinkPredictionReport::mean_rank_raw)
        .def_readonly("mean_rank_filter", &LinkPredictionReport::mean_rank_filter)
        .def_readonly("hits10_raw", &LinkPredictionReport::hits10_raw)
        .def_readonly("hits10_filter", &LinkPredictionReport::hits10_filter)
        .def("category_hits10",
             [](const LinkPredictionReport& r, const std::string& category, const std::string& side) {
                 int ci = -1;
                 for (int c = 0; c < 4; ++c) {
                     const RelationCategory cat = static_cast<RelationCategory>(c);
                     if (category == category_name(cat)) ci = c;
                 }
                 if (ci < 0) throw ConfigError("category must be 1-1, 1-N, N-1, or N-N");
                 if (side != "head" && side != "tail") throw ConfigError("side must be head or tail");
                 return r.by_category[ci][side == "head" ? 0 : 1].percent();
             })
        .def("to_tsv", &LinkPredictionReport::to_tsv)
        .def("to_pretty", &LinkPredictionReport::to_pretty);

    m.def(
        "link_prediction",
        [](const TripleStore& store, const ModelParams& params, const PathEvidence* evidence,
           const std::string& tie, int threads, const std::string& split) {
            const auto categories = classify_relations(store);
            EvalScorer scorer{&params, evidence};
            const TieRule rule = parse_tie(tie);
            const Split sp = parse_split(split);
            py::gil_scoped_release release;
            return link_prediction(store, std::cref(scorer), categories, rule, threads, sp);
        },
        py::arg("store"), py::arg("params"), py::arg("evidence") = nullptr, py::arg("tie") = "optimistic",
        py::arg("threads") = 1, py::arg("split") = "test");

    py::class_<ThresholdSet>(m, "ThresholdSet")
        .def_readonly("per_relation", &ThresholdSet::per_relation)
        .def_readonly("global_", &ThresholdSet::global)
        .def("for_relation", &ThresholdSet::for_relation);

    m.def(
        "tune_thresholds",
        [](const std::vector<std::tuple<EntityId, RelationId, EntityId>>& triples,
           const std::vector<int>& labels, const ModelParams& params, const PathEvidence* evidence) {
            EvalScorer scorer{&params, evidence};
            return tune_thresholds(to_triples(triples), std::vector<std::int8_t>(labels.begin(), labels.end()),
                                   std::cref(scorer));
        },
        py::arg("triples"), py::arg("labels"), py::arg("params"), py::arg("evidence") = nullptr);

    m.def(
        "triple_classification",
        [](const std::vector<std::tuple<EntityId, RelationId, EntityId>>& triples,
           const std::vector<int>& labels, const ModelParams& params, const PathEvidence* evidence,
           const ThresholdSet& thresholds) {
            EvalScorer scorer{&params, evidence};
            return triple_classification(to_triples(triples),
                                         std::vector<std::int8_t>(labels.begin(), labels.end()),
                                         std::cref(scorer), thresholds);
        },
        py::arg("triples"), py::arg("labels"), py::arg("params"), py::arg("evidence") = nullptr,
        py::arg("thresholds") = ThresholdSet{});

    m.def(
        "generate_classification_negatives",
        [](const TripleStore& store, const std::string& split, std::uint64_t seed) {
            TypeConstraintIndex types(store);
            Rng rng(seed);
            const LabeledSplit s = generate_classification_negatives(store, parse_split(split), types, rng);
            std::vector<std::tuple<EntityId, RelationId, EntityId>> triples;
            for (const Triple& x : s.triples) triples.emplace_back(x.h, x.r, x.t);
            return py::make_tuple(triples, std::vector<int>(s.labels.begin(), s.labels.end()));
        },
        py::arg("store"), py::arg("split"), py::arg("seed") = 1);
}
