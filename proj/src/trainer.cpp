#include "rpe/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace rpe {

Sampling parse_sampling(const std::string& s) {
    if (s == "uniform") return Sampling::Uniform;
    if (s == "bernoulli") return Sampling::Bernoulli;
    if (s == "type_constrained") return Sampling::TypeConstrained;
    throw ConfigError("unknown sampling '" + s + "' (expected uniform|bernoulli|type_constrained)");
}

std::string sampling_name(Sampling s) {
    switch (s) {
        case Sampling::Uniform: return "uniform";
        case Sampling::Bernoulli: return "bernoulli";
        case Sampling::TypeConstrained: return "type_constrained";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (entity_dim < 1 || relation_dim < 1) throw ConfigError("embedding dimensions must be >= 1");
    if (gamma1 <= 0 || gamma2 <= 0) throw ConfigError("margins must be > 0");
    if (alpha <= 0) throw ConfigError("learning rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (lambda < 0) throw ConfigError("lambda must be >= 0");
    if (eta <= 0 || eta >= 1) throw ConfigError("eta must lie in (0,1)");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
    if (early_stop && (early_stop_patience < 1 || early_stop_every < 1))
        throw ConfigError("early-stop patience and interval must be >= 1");
    if (init == InitScheme::WarmStart && warm_start_path.empty())
        throw ConfigError("warm start requires a checkpoint path");
    if (mode_multiplicative(mode) && entity_dim != relation_dim)
        throw ConfigError("MCOM composes projection chains and needs square matrices (entity dim == relation dim)");
    if (!mode_uses_projection(mode) && entity_dim != relation_dim)
        throw ConfigError("unprojected modes translate in one space and need entity dim == relation dim");
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        T out;
        if constexpr (std::is_floating_point_v<T>) {
            out = static_cast<T>(std::stod(value, &pos));
        } else if constexpr (std::is_signed_v<T>) {
            out = static_cast<T>(std::stoll(value, &pos));
        } else {
            out = static_cast<T>(std::stoull(value, &pos));
        }
        if (pos != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    }
}

}  // namespace

TrainConfig TrainConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    TrainConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        if (key == "dim_entity") {
            c.entity_dim = parse_number<int>(key, value);
        } else if (key == "dim_relation") {
            c.relation_dim = parse_number<int>(key, value);
        } else if (key == "gamma1") {
            c.gamma1 = parse_number<double>(key, value);
        } else if (key == "gamma2") {
            c.gamma2 = parse_number<double>(key, value);
        } else if (key == "alpha") {
            c.alpha = parse_number<double>(key, value);
        } else if (key == "batch_size") {
            c.batch_size = parse_number<int>(key, value);
        } else if (key == "lambda") {
            c.lambda = parse_number<double>(key, value);
        } else if (key == "eta") {
            c.eta = parse_number<double>(key, value);
        } else if (key == "epochs") {
            c.epochs = parse_number<int>(key, value);
        } else if (key == "sampling") {
            c.sampling = value == "auto" ? std::nullopt : std::optional(parse_sampling(value));
        } else if (key == "mode") {
            c.mode = parse_mode(value);
        } else if (key == "norm") {
            if (value == "l1") {
                c.norm = Norm::L1;
            } else if (value == "l2") {
                c.norm = Norm::L2;
            } else {
                throw ConfigError("norm must be l1 or l2");
            }
        } else if (key == "seed") {
            c.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "init") {
            if (value == "random") {
                c.init = InitScheme::Random;
            } else if (value == "warmstart") {
                c.init = InitScheme::WarmStart;
            } else {
                throw ConfigError("init must be random or warmstart");
            }
        } else if (key == "warm_start") {
            c.warm_start_path = value;
        } else if (key == "threads") {
            c.threads = parse_number<int>(key, value);
        } else if (key == "checkpoint_every") {
            c.checkpoint_every = parse_number<int>(key, value);
        } else if (key == "early_stop") {
            c.early_stop = parse_number<int>(key, value) != 0;
        } else if (key == "early_stop_patience") {
            c.early_stop_patience = parse_number<int>(key, value);
        } else if (key == "early_stop_every") {
            c.early_stop_every = parse_number<int>(key, value);
        } else {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
        }
    }
    return c;
}

std::string TrainConfig::to_text() const {
    std::ostringstream out;
    out << "dim_entity = " << entity_dim << '\n';
    out << "dim_relation = " << relation_dim << '\n';
    out << "gamma1 = " << gamma1 << '\n';
    out << "gamma2 = " << gamma2 << '\n';
    out << "alpha = " << alpha << '\n';
    out << "batch_size = " << batch_size << '\n';
    out << "lambda = " << lambda << '\n';
    out << "eta = " << eta << '\n';
    out << "epochs = " << epochs << '\n';
    out << "sampling = " << (sampling ? sampling_name(*sampling) : "auto") << '\n';
    out << "mode = " << mode_name(mode) << '\n';
    out << "norm = " << (norm == Norm::L1 ? "l1" : "l2") << '\n';
    out << "seed = " << seed << '\n';
    out << "init = " << (init == InitScheme::Random ? "random" : "warmstart") << '\n';
    out << "warm_start = " << warm_start_path << '\n';
    out << "threads = " << threads << '\n';
    out << "checkpoint_every = " << checkpoint_every << '\n';
    out << "early_stop = " << (early_stop ? 1 : 0) << '\n';
    out << "early_stop_patience = " << early_stop_patience << '\n';
    out << "early_stop_every = " << early_stop_every << '\n';
    return out.str();
}

CorruptedTriple sample_negative(const Triple& triple, Sampling strategy, const TripleStore& store,
                                const TypeConstraintIndex* types, Rng& rng) {
    CorruptedTriple out;
    out.original = triple;

    double p_head = 0.5;
    if (strategy != Sampling::Uniform) {
        if (types == nullptr) throw ConfigError("bernoulli/type-constrained sampling needs a type index");
        p_head = types->head_replace_prob(triple.r);
    }
    out.side = rng.bernoulli(p_head) ? CorruptSide::Head : CorruptSide::Tail;

    const std::vector<EntityId>* pool = nullptr;
    if (strategy == Sampling::TypeConstrained) {
        if (types == nullptr) throw ConfigError("type-constrained sampling needs a type index");
        pool = out.side == CorruptSide::Head ? &types->domain(triple.r) : &types->range(triple.r);
    }
    const std::size_t pool_size = pool ? pool->size() : static_cast<std::size_t>(store.entity_count());
    if (pool_size == 0) return out;
    auto candidate_at = [&](std::size_t i) { return pool ? (*pool)[i] : static_cast<EntityId>(i); };

    for (int tries = 0; tries < 100; ++tries) {
        out.replacement = candidate_at(rng.uniform_index(pool_size));
        if (!store.contains(Split::Train, out.corrupted())) {
            out.valid = true;
            return out;
        }
    }
    // Pool almost exhausted by positives; scan it deterministically.
    for (std::size_t i = 0; i < pool_size; ++i) {
        out.replacement = candidate_at(i);
        if (!store.contains(Split::Train, out.corrupted())) {
            out.valid = true;
            return out;
        }
    }
    out.valid = false;
    return out;
}

void GradAccum::add_entity(EntityId id, const Eigen::VectorXd& g) {
    auto [it, inserted] = entity.try_emplace(id, g);
    if (!inserted) it->second += g;
}

void GradAccum::add_relation(RelationId id, const Eigen::VectorXd& g) {
    auto [it, inserted] = relation.try_emplace(id, g);
    if (!inserted) it->second += g;
}

void GradAccum::add_proj(RelationId id, const Eigen::MatrixXd& g) {
    auto [it, inserted] = proj.try_emplace(id, g);
    if (!inserted) it->second += g;
}

namespace {

Eigen::VectorXd distance_grad(const Eigen::VectorXd& x, Norm norm) {
    if (norm == Norm::L1) {
        Eigen::VectorXd g(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0);
        return g;
    }
    const double n = x.norm();
    if (n == 0) return Eigen::VectorXd::Zero(x.size());
    return x / n;
}

// Unit-ball clip pi(v) with enough state to backpropagate through it.
struct Clip {
    Eigen::VectorXd value;
    Eigen::VectorXd unit;
    double norm = 0;
    bool active = false;
};

Clip clip(Eigen::VectorXd v) {
    Clip c;
    c.norm = v.norm();
    c.active = c.norm > 1.0;
    if (c.active) {
        c.unit = v / c.norm;
        c.value = c.unit;
    } else {
        c.value = std::move(v);
    }
    return c;
}

// Jacobian-transpose product of the clip: (I - u u^T)/||v|| inside the
// rescaled branch, identity otherwise.
Eigen::VectorXd clip_back(const Clip& c, const Eigen::VectorXd& g) {
    if (!c.active) return g;
    return (g - c.unit * c.unit.dot(g)) / c.norm;
}

// Composed path projection with its (frozen) rescale factor.
struct Composition {
    Eigen::MatrixXd tilde;
    double factor = 1.0;
};

Composition compose_with_factor(const RelationPath& p, const ModelParams& params) {
    Eigen::MatrixXd raw = params.proj.at(static_cast<std::size_t>(p[0]));
    for (std::size_t i = 1; i < p.size(); ++i) {
        const auto& next = params.proj.at(static_cast<std::size_t>(p[i]));
        if (mode_multiplicative(params.hyper.mode)) {
            raw = raw * next;
        } else {
            raw += next;
        }
    }
    Composition c;
    const double cap = std::sqrt(static_cast<double>(raw.rows()));
    const double f = raw.norm();
    if (f > cap) {
        c.factor = cap / f;
        c.tilde = raw * c.factor;
    } else {
        c.tilde = std::move(raw);
    }
    return c;
}

// Distributes dL/d(raw composition) onto the per-relation matrices:
// sum rule for the additive composition, product rule for chains.
void backprop_composition(const RelationPath& p, const ModelParams& params, const Eigen::MatrixXd& g_raw,
                          GradAccum& acc) {
    if (!mode_multiplicative(params.hyper.mode)) {
        for (RelationId r : p) acc.add_proj(r, g_raw);
        return;
    }
    const std::size_t k = p.size();
    const int m = params.hyper.relation_dim;
    std::vector<Eigen::MatrixXd> prefix(k + 1), suffix(k + 1);
    prefix[0] = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t i = 0; i < k; ++i) prefix[i + 1] = prefix[i] * params.proj.at(static_cast<std::size_t>(p[i]));
    suffix[k] = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t i = k; i > 0; --i) suffix[i - 1] = params.proj.at(static_cast<std::size_t>(p[i - 1])) * suffix[i];
    for (std::size_t i = 0; i < k; ++i)
        acc.add_proj(p[i], prefix[i].transpose() * g_raw * suffix[i + 1].transpose());
}

// ||pi(M h) + r - pi(M t)|| (or the unprojected form) with optional scaled
// gradient accumulation.
double relation_term(EntityId h, RelationId r, EntityId t, const ModelParams& params, double scale,
                     GradAccum* acc) {
    const auto& hv = params.entity.at(static_cast<std::size_t>(h));
    const auto& tv = params.entity.at(static_cast<std::size_t>(t));
    const auto& rv = params.relation.at(static_cast<std::size_t>(r));

    if (!mode_uses_projection(params.hyper.mode)) {
        const Eigen::VectorXd x = hv + rv - tv;
        const double s = params.hyper.norm == Norm::L1 ? x.lpNorm<1>() : x.norm();
        if (acc) {
            const Eigen::VectorXd g = scale * distance_grad(x, params.hyper.norm);
            acc->add_entity(h, g);
            acc->add_relation(r, g);
            acc->add_entity(t, -g);
        }
        return s;
    }

    const auto& M = params.proj.at(static_cast<std::size_t>(r));
    const Clip ca = clip(M * hv);
    const Clip cb = clip(M * tv);
    const Eigen::VectorXd x = ca.value + rv - cb.value;
    const double s = params.hyper.norm == Norm::L1 ? x.lpNorm<1>() : x.norm();
    if (acc) {
        const Eigen::VectorXd g = distance_grad(x, params.hyper.norm);
        const Eigen::VectorXd ga = clip_back(ca, g);
        const Eigen::VectorXd gb = clip_back(cb, g);
        acc->add_relation(r, scale * g);
        acc->add_entity(h, scale * (M.transpose() * ga));
        acc->add_entity(t, -scale * (M.transpose() * gb));
        acc->add_proj(r, scale * (ga * hv.transpose() - gb * tv.transpose()));
    }
    return s;
}

// ||pi(M_p h) + p* - pi(M_p t)|| against a precomputed composition (null in
// the unprojected modes).
double path_term(EntityId h, EntityId t, const RelationPath& path, const Eigen::VectorXd& pstar,
                 const Composition* comp, const ModelParams& params, double scale, GradAccum* acc) {
    const auto& hv = params.entity.at(static_cast<std::size_t>(h));
    const auto& tv = params.entity.at(static_cast<std::size_t>(t));

    if (comp == nullptr) {
        const Eigen::VectorXd x = hv + pstar - tv;
        const double s = params.hyper.norm == Norm::L1 ? x.lpNorm<1>() : x.norm();
        if (acc) {
            const Eigen::VectorXd g = scale * distance_grad(x, params.hyper.norm);
            acc->add_entity(h, g);
            for (RelationId r : path) acc->add_relation(r, g);
            acc->add_entity(t, -g);
        }
        return s;
    }

    const Clip ca = clip(comp->tilde * hv);
    const Clip cb = clip(comp->tilde * tv);
    const Eigen::VectorXd x = ca.value + pstar - cb.value;
    const double s = params.hyper.norm == Norm::L1 ? x.lpNorm<1>() : x.norm();
    if (acc) {
        const Eigen::VectorXd g = distance_grad(x, params.hyper.norm);
        const Eigen::VectorXd ga = clip_back(ca, g);
        const Eigen::VectorXd gb = clip_back(cb, g);
        for (RelationId r : path) acc->add_relation(r, scale * g);
        acc->add_entity(h, scale * (comp->tilde.transpose() * ga));
        acc->add_entity(t, -scale * (comp->tilde.transpose() * gb));
        const Eigen::MatrixXd g_tilde = ga * hv.transpose() - gb * tv.transpose();
        backprop_composition(path, params, scale * comp->factor * g_tilde, *acc);
    }
    return s;
}

}  // namespace

ObjectiveStats triple_objective(const Triple& pos, const CorruptedTriple& neg, const TripleEvidence* evidence,
                                const PathEvidence* table, const ModelParams& params, double gamma1, double gamma2,
                                GradAccum* grads) {
    ObjectiveStats stats;
    if (!neg.valid) return stats;
    const Triple nt = neg.corrupted();

    const double sp = relation_term(pos.h, pos.r, pos.t, params, 0, nullptr);
    const double sn = relation_term(nt.h, nt.r, nt.t, params, 0, nullptr);
    const double hinge = sp + gamma1 - sn;
    if (hinge > 0) {
        stats.loss += hinge;
        ++stats.violations;
        if (grads) {
            relation_term(pos.h, pos.r, pos.t, params, 1.0, grads);
            relation_term(nt.h, nt.r, nt.t, params, -1.0, grads);
        }
    }

    if (params.hyper.lambda == 0 || evidence == nullptr || evidence->paths.empty() || evidence->z <= 0)
        return stats;
    if (table == nullptr) throw ConfigError("path evidence present but no co-occurrence table supplied");

    for (const PathProb& pp : evidence->paths) {
        const double weight = pp.prob * table->confidence(pos.r, pp.path);
        const double coef = params.hyper.lambda * weight / evidence->z;
        if (coef == 0) continue;

        const Eigen::VectorXd pstar = path_representation(pp.path, params);
        Composition comp_storage;
        const Composition* comp = nullptr;
        if (mode_uses_projection(params.hyper.mode)) {
            comp_storage = compose_with_factor(pp.path, params);
            comp = &comp_storage;
        }

        const double psp = path_term(pos.h, pos.t, pp.path, pstar, comp, params, 0, nullptr);
        const double psn = path_term(nt.h, nt.t, pp.path, pstar, comp, params, 0, nullptr);
        const double ph = psp + gamma2 - psn;
        if (ph > 0) {
            stats.loss += coef * ph;
            ++stats.violations;
            if (grads) {
                path_term(pos.h, pos.t, pp.path, pstar, comp, params, coef, grads);
                path_term(nt.h, nt.t, pp.path, pstar, comp, params, -coef, grads);
            }
        }
    }
    return stats;
}

namespace {

struct Example {
    Triple pos;
    CorruptedTriple neg;
};

void apply_and_project(ModelParams& params, const GradAccum& acc, double alpha, EpochStats& stats) {
    for (const auto& [id, g] : acc.entity) params.entity[static_cast<std::size_t>(id)] -= alpha * g;
    for (const auto& [id, g] : acc.relation) params.relation[static_cast<std::size_t>(id)] -= alpha * g;
    for (const auto& [id, g] : acc.proj) params.proj[static_cast<std::size_t>(id)] -= alpha * g;

    for (const auto& [id, g] : acc.entity) {
        auto& v = params.entity[static_cast<std::size_t>(id)];
        double n = v.norm();
        if (n > 1.0) {
            v /= n;
            n = v.norm();
        }
        stats.max_entity_norm = std::max(stats.max_entity_norm, n);
    }
    for (const auto& [id, g] : acc.relation) {
        auto& v = params.relation[static_cast<std::size_t>(id)];
        double n = v.norm();
        if (n > 1.0) {
            v /= n;
            n = v.norm();
        }
        stats.max_relation_norm = std::max(stats.max_relation_norm, n);
    }
}

}  // namespace

EpochStats sgd_epoch(const TripleStore& store, const PathEvidence* evidence, const TypeConstraintIndex* types,
                     ModelParams& params, const TrainConfig& config, Rng& rng) {
    if (!store.augmented()) throw DataError("training needs an inverse-augmented store");
    const auto& train = store.triples(Split::Train);
    if (train.empty()) throw DataError("empty training split");

    const auto t0 = std::chrono::steady_clock::now();
    const Sampling strategy = config.effective_sampling();

    std::vector<std::uint32_t> order(train.size());
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);

    EpochStats stats;
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);
    std::vector<Example> examples;
    examples.reserve(2 * batch);

    for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t end = std::min(order.size(), start + batch);

        // Negatives drawn sequentially so the random stream is independent
        // of the worker count.
        examples.clear();
        for (std::size_t i = start; i < end; ++i) {
            const Triple fwd = train[order[i]];
            const Triple rev{fwd.t, store.inverse(fwd.r), fwd.h};
            for (const Triple& x : {fwd, rev}) {
                Example ex{x, sample_negative(x, strategy, store, types, rng)};
                if (!ex.neg.valid) {
                    ++stats.skipped;
                    continue;
                }
                examples.push_back(std::move(ex));
            }
        }

        GradAccum acc;
        double batch_loss = 0;
        auto run_range = [&](std::size_t lo, std::size_t hi, GradAccum& into, double& loss_out,
                             std::int64_t& violations_out) {
            for (std::size_t i = lo; i < hi; ++i) {
                const TripleEvidence* ev = evidence ? evidence->find(examples[i].pos) : nullptr;
                auto os = triple_objective(examples[i].pos, examples[i].neg, ev, evidence, params, config.gamma1,
                                           config.gamma2, &into);
                loss_out += os.loss;
                violations_out += os.violations;
            }
        };

        if (config.threads <= 1 || examples.size() < 2) {
            run_range(0, examples.size(), acc, batch_loss, stats.violations);
        } else {
            const int workers = std::min<int>(config.threads, static_cast<int>(examples.size()));
            std::vector<GradAccum> parts(static_cast<std::size_t>(workers));
            std::vector<double> losses(static_cast<std::size_t>(workers), 0);
            std::vector<std::int64_t> violations(static_cast<std::size_t>(workers), 0);
            std::vector<std::thread> pool;
            const std::size_t chunk = (examples.size() + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
            for (int w = 0; w < workers; ++w) {
                const std::size_t lo = static_cast<std::size_t>(w) * chunk;
                const std::size_t hi = std::min(examples.size(), lo + chunk);
                pool.emplace_back([&, w, lo, hi] {
                    run_range(lo, hi, parts[static_cast<std::size_t>(w)], losses[static_cast<std::size_t>(w)],
                              violations[static_cast<std::size_t>(w)]);
                });
            }
            for (auto& th : pool) th.join();
            // Merge in worker order; summation order is fixed for a given
            // thread count but may differ from the single-threaded result.
            for (int w = 0; w < workers; ++w) {
                for (auto& [id, g] : parts[static_cast<std::size_t>(w)].entity) acc.add_entity(id, g);
                for (auto& [id, g] : parts[static_cast<std::size_t>(w)].relation) acc.add_relation(id, g);
                for (auto& [id, g] : parts[static_cast<std::size_t>(w)].proj) acc.add_proj(id, g);
                batch_loss += losses[static_cast<std::size_t>(w)];
                stats.violations += violations[static_cast<std::size_t>(w)];
            }
        }

        if (!std::isfinite(batch_loss)) {
            std::ostringstream msg;
            msg << "non-finite loss in batch starting at triple " << start << " (batch loss " << batch_loss
                << ", alpha " << config.alpha << "); try a smaller learning rate";
            throw NumericError(msg.str());
        }
        stats.loss += batch_loss;
        apply_and_project(params, acc, config.alpha, stats);
    }

    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
}

namespace {

ModelParams initialize_with(const TripleStore& store, const TrainConfig& config, Rng& rng) {
    config.validate();
    ModelParams params = ModelParams::create(store.entity_count(), store.relation_count(), config.hyper());

    if (config.init == InitScheme::WarmStart) {
        ModelParams prior = ModelParams::load(config.warm_start_path);
        if (prior.hyper.entity_dim != config.entity_dim || prior.hyper.relation_dim != config.relation_dim)
            throw ConfigError("warm-start checkpoint dimension mismatch (got " +
                              std::to_string(prior.hyper.entity_dim) + "x" + std::to_string(prior.hyper.relation_dim) +
                              ", need " + std::to_string(config.entity_dim) + "x" +
                              std::to_string(config.relation_dim) + ")");
        if (prior.entity_count() != params.entity_count() || prior.relation_count() != params.relation_count())
            throw ConfigError("warm-start checkpoint vocabulary mismatch");
        params.entity = std::move(prior.entity);
        params.relation = std::move(prior.relation);
        return params;  // projections stay identity
    }

    const double eb = 6.0 / std::sqrt(static_cast<double>(config.entity_dim));
    for (auto& v : params.entity) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-eb, eb);
        const double n = v.norm();
        if (n > 0) v /= n;
    }
    const double rb = 6.0 / std::sqrt(static_cast<double>(config.relation_dim));
    for (auto& v : params.relation) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-rb, rb);
        const double n = v.norm();
        if (n > 0) v /= n;
    }
    return params;
}

}  // namespace

ModelParams initialize(const TripleStore& store, const TrainConfig& config) {
    Rng rng(config.seed);
    return initialize_with(store, config, rng);
}

TrainResult train_model(const TripleStore& store, const PathEvidence* evidence, const TypeConstraintIndex* types,
                        const TrainConfig& config, std::ostream* log,
                        const std::function<double(const ModelParams&)>& validation_metric,
                        const std::function<void(const ModelParams&, int)>& on_checkpoint) {
    config.validate();
    if (config.lambda > 0 && evidence == nullptr)
        throw ConfigError("path-weighted training (lambda > 0) needs mined path evidence; run `preprocess` first");
    if (config.effective_sampling() != Sampling::Uniform && types == nullptr)
        throw ConfigError("bernoulli/type-constrained sampling needs a type-constraint index");

    Rng rng(config.seed);
    TrainResult result;
    result.params = initialize_with(store, config, rng);

    if (log) *log << "epoch\tloss\tviolations\tseconds\n";

    double best_metric = -1;
    int best_epoch = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochStats st = sgd_epoch(store, evidence, types, result.params, config, rng);
        result.epochs.push_back(st);
        result.stopped_at = epoch;
        if (log) {
            *log << epoch << '\t' << st.loss << '\t' << st.violations << '\t' << st.seconds << '\n';
            log->flush();
        }
        if (config.checkpoint_every > 0 && on_checkpoint && epoch % config.checkpoint_every == 0)
            on_checkpoint(result.params, epoch);

        if (config.early_stop && validation_metric && epoch % config.early_stop_every == 0) {
            const double metric = validation_metric(result.params);
            if (metric > best_metric) {
                best_metric = metric;
                best_epoch = epoch;
            } else if (epoch - best_epoch >= config.early_stop_patience) {
                break;
            }
        }
    }
    return result;
}

}  // namespace rpe
