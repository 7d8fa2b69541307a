#include "rpe/model.hpp"

#include <algorithm>
#include <cmath>

namespace rpe {

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x43455052;  // "RPEC"
constexpr std::uint32_t kCheckpointVersion = 1;

double distance(const Eigen::VectorXd& x, Norm norm) {
    return norm == Norm::L1 ? x.lpNorm<1>() : x.norm();
}

}  // namespace

Mode parse_mode(const std::string& s) {
    if (s == "initial") return Mode::Initial;
    if (s == "pc") return Mode::PC;
    if (s == "acom") return Mode::ACOM;
    if (s == "mcom") return Mode::MCOM;
    if (s == "pc+acom") return Mode::PCACOM;
    if (s == "pc+mcom") return Mode::PCMCOM;
    throw ConfigError("unknown mode '" + s + "' (expected initial|pc|acom|mcom|pc+acom|pc+mcom)");
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::Initial: return "initial";
        case Mode::PC: return "pc";
        case Mode::ACOM: return "acom";
        case Mode::MCOM: return "mcom";
        case Mode::PCACOM: return "pc+acom";
        case Mode::PCMCOM: return "pc+mcom";
    }
    return "?";
}

Eigen::MatrixXd identity_pattern(int rows, int cols) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
    for (int i = 0; i < std::min(rows, cols); ++i) M(i, i) = 1.0;
    return M;
}

ModelParams ModelParams::create(EntityId entities, RelationId relations, const ModelHyper& hyper) {
    if (hyper.entity_dim < 1 || hyper.relation_dim < 1)
        throw ConfigError("embedding dimensions must be >= 1");
    if (mode_multiplicative(hyper.mode) && hyper.entity_dim != hyper.relation_dim)
        throw ConfigError("MCOM composes projection chains and needs square matrices (entity dim == relation dim)");
    if (!mode_uses_projection(hyper.mode) && hyper.entity_dim != hyper.relation_dim)
        throw ConfigError("unprojected modes translate in one space and need entity dim == relation dim");

    ModelParams p;
    p.hyper = hyper;
    p.entity.assign(static_cast<std::size_t>(entities), Eigen::VectorXd::Zero(hyper.entity_dim));
    p.relation.assign(static_cast<std::size_t>(relations), Eigen::VectorXd::Zero(hyper.relation_dim));
    p.proj.assign(static_cast<std::size_t>(relations), identity_pattern(hyper.relation_dim, hyper.entity_dim));
    return p;
}

Eigen::VectorXd project(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) {
    if (M.cols() != v.size()) throw ConfigError("projection shape mismatch");
    Eigen::VectorXd w = M * v;
    const double n = w.norm();
    if (n > 1.0) w /= n;
    return w;
}

Eigen::MatrixXd normalize_projection(Eigen::MatrixXd M) {
    const double cap = std::sqrt(static_cast<double>(M.rows()));
    const double f = M.norm();
    if (f > cap) M *= cap / f;
    return M;
}

Eigen::MatrixXd compose_projection(const RelationPath& p, const ModelParams& params) {
    if (p.empty()) throw ConfigError("cannot compose an empty path");
    Eigen::MatrixXd M = params.proj.at(static_cast<std::size_t>(p[0]));
    for (std::size_t i = 1; i < p.size(); ++i) {
        const auto& next = params.proj.at(static_cast<std::size_t>(p[i]));
        if (mode_multiplicative(params.hyper.mode)) {
            M = M * next;
        } else {
            M += next;
        }
    }
    return normalize_projection(std::move(M));
}

Eigen::VectorXd path_representation(const RelationPath& p, const ModelParams& params) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(params.hyper.relation_dim);
    for (RelationId r : p) v += params.relation.at(static_cast<std::size_t>(r));
    return v;
}

double score_relation(EntityId h, RelationId r, EntityId t, const ModelParams& params) {
    const auto& hv = params.entity.at(static_cast<std::size_t>(h));
    const auto& tv = params.entity.at(static_cast<std::size_t>(t));
    const auto& rv = params.relation.at(static_cast<std::size_t>(r));
    if (mode_uses_projection(params.hyper.mode)) {
        const auto& M = params.proj.at(static_cast<std::size_t>(r));
        return distance(project(M, hv) + rv - project(M, tv), params.hyper.norm);
    }
    return distance(hv + rv - tv, params.hyper.norm);
}

double score_path(EntityId h, const RelationPath& p, EntityId t, const ModelParams& params) {
    const auto& hv = params.entity.at(static_cast<std::size_t>(h));
    const auto& tv = params.entity.at(static_cast<std::size_t>(t));
    const Eigen::VectorXd pv = path_representation(p, params);
    if (mode_uses_projection(params.hyper.mode)) {
        const Eigen::MatrixXd M = compose_projection(p, params);
        return distance(project(M, hv) + pv - project(M, tv), params.hyper.norm);
    }
    return distance(hv + pv - tv, params.hyper.norm);
}

ScoreBreakdown score_goal(EntityId h, RelationId r, EntityId t, const TripleEvidence* evidence,
                          const PathEvidence* table, const ModelParams& params) {
    ScoreBreakdown out;
    out.direct = score_relation(h, r, t, params);
    out.combined = out.direct;
    if (params.hyper.lambda == 0.0 || evidence == nullptr || evidence->paths.empty() || evidence->z <= 0.0)
        return out;
    if (table == nullptr) throw ConfigError("path evidence present but no co-occurrence table supplied");

    double weighted = 0;
    for (const PathProb& pp : evidence->paths) {
        PathTerm term;
        term.path = pp.path;
        term.weight = pp.prob * table->confidence(r, pp.path);
        term.distance = score_path(h, pp.path, t, params);
        weighted += term.weight * term.distance;
        out.path_terms.push_back(std::move(term));
    }
    out.combined += params.hyper.lambda / evidence->z * weighted;
    return out;
}

double score_final(EntityId h, RelationId r, EntityId t, const PathEvidence* table, const ModelParams& params) {
    const RelationId rinv = params.inverse(r);
    const TripleEvidence* fwd = table ? table->find({h, r, t}) : nullptr;
    const TripleEvidence* rev = table ? table->find({t, rinv, h}) : nullptr;
    return score_goal(h, r, t, fwd, table, params).combined +
           score_goal(t, rinv, h, rev, table, params).combined;
}

void ModelParams::save(const std::string& path) const {
    BinaryWriter w(path);
    w.write(kCheckpointMagic);
    w.write(kCheckpointVersion);
    w.write<std::uint32_t>(static_cast<std::uint32_t>(hyper.entity_dim));
    w.write<std::uint32_t>(static_cast<std::uint32_t>(hyper.relation_dim));
    w.write<std::uint32_t>(static_cast<std::uint32_t>(entity.size()));
    w.write<std::uint32_t>(static_cast<std::uint32_t>(relation.size()));
    w.write<std::uint32_t>(static_cast<std::uint32_t>(hyper.mode));
    w.write<std::uint32_t>(static_cast<std::uint32_t>(hyper.norm));
    w.write(hyper.lambda);

    std::vector<float> row;
    auto write_vector = [&](const Eigen::VectorXd& v) {
        row.resize(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) row[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
        w.write_span(row.data(), row.size());
    };
    for (const auto& v : entity) write_vector(v);
    for (const auto& v : relation) write_vector(v);
    for (const auto& M : proj) {
        row.resize(static_cast<std::size_t>(M.size()));
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index j = 0; j < M.cols(); ++j) row[k++] = static_cast<float>(M(i, j));
        w.write_span(row.data(), row.size());
    }
    w.finish();
}

ModelParams ModelParams::load(const std::string& path) {
    BinaryReader r(path);
    if (r.read<std::uint32_t>() != kCheckpointMagic) throw DataError("not a checkpoint: " + path);
    if (r.read<std::uint32_t>() != kCheckpointVersion) throw DataError("unsupported checkpoint version: " + path);

    ModelHyper hyper;
    hyper.entity_dim = static_cast<int>(r.read<std::uint32_t>());
    hyper.relation_dim = static_cast<int>(r.read<std::uint32_t>());
    const auto entities = r.read<std::uint32_t>();
    const auto relations = r.read<std::uint32_t>();
    hyper.mode = static_cast<Mode>(r.read<std::uint32_t>());
    hyper.norm = static_cast<Norm>(r.read<std::uint32_t>());
    hyper.lambda = r.read<double>();

    ModelParams p = create(static_cast<EntityId>(entities), static_cast<RelationId>(relations), hyper);
    std::vector<float> row;
    auto read_vector = [&](Eigen::VectorXd& v) {
        row.resize(static_cast<std::size_t>(v.size()));
        r.read_span(row.data(), row.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(row[static_cast<std::size_t>(i)]);
    };
    for (auto& v : p.entity) read_vector(v);
    for (auto& v : p.relation) read_vector(v);
    for (auto& M : p.proj) {
        row.resize(static_cast<std::size_t>(M.size()));
        r.read_span(row.data(), row.size());
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = static_cast<double>(row[k++]);
    }
    return p;
}

}  // namespace rpe
