#pragma once
// Learnable parameters and score functions. Entities live in R^n, relations
// in R^m, and each relation owns an m x n projection matrix. Path
// projections are composed from the per-relation matrices (additive or
// multiplicative), capped at Frobenius norm sqrt(m) so the identity pattern
// is a fixed point. Projected vectors are clipped to the unit ball at score
// time; lower scores mean more plausible triples.

#include "rpe/path_miner.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rpe {

enum class Mode { Initial, PC, ACOM, MCOM, PCACOM, PCMCOM };
enum class Norm { L1, L2 };

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

// Initial and PC score with the raw (unprojected) vectors.
constexpr bool mode_uses_projection(Mode m) {
    return m == Mode::ACOM || m == Mode::MCOM || m == Mode::PCACOM || m == Mode::PCMCOM;
}
constexpr bool mode_multiplicative(Mode m) { return m == Mode::MCOM || m == Mode::PCMCOM; }
// PC variants default to type-constrained negative sampling.
constexpr bool mode_type_constrained(Mode m) {
    return m == Mode::PC || m == Mode::PCACOM || m == Mode::PCMCOM;
}

struct ModelHyper {
    int entity_dim = 100;    // n
    int relation_dim = 100;  // m
    double lambda = 1.0;
    Mode mode = Mode::ACOM;
    Norm norm = Norm::L1;
};

struct ModelParams {
    ModelHyper hyper;
    std::vector<Eigen::VectorXd> entity;    // E vectors, dim n
    std::vector<Eigen::VectorXd> relation;  // 2R vectors, dim m
    std::vector<Eigen::MatrixXd> proj;      // 2R matrices, m x n

    EntityId entity_count() const { return static_cast<EntityId>(entity.size()); }
    RelationId relation_count() const { return static_cast<RelationId>(relation.size()); }
    RelationId inverse(RelationId r) const {
        const auto half = static_cast<RelationId>(relation.size() / 2);
        return r < half ? r + half : r - half;
    }

    // Zero vectors, identity-pattern projections. MCOM requires square
    // projections; rejected here so misconfigurations fail at startup.
    static ModelParams create(EntityId entities, RelationId relations, const ModelHyper& hyper);

    void save(const std::string& path) const;
    static ModelParams load(const std::string& path);
};

// Identity-pattern m x n matrix: ones on the main diagonal.
Eigen::MatrixXd identity_pattern(int rows, int cols);

// M*v, rescaled onto the unit sphere when its norm exceeds 1.
Eigen::VectorXd project(const Eigen::MatrixXd& M, const Eigen::VectorXd& v);

// Frobenius cap: rescale to norm sqrt(m) when above it; identity unchanged.
Eigen::MatrixXd normalize_projection(Eigen::MatrixXd M);

// Composed, normalized path projection per the model mode.
Eigen::MatrixXd compose_projection(const RelationPath& p, const ModelParams& params);

// p* = r1 + r2 + ... (unnormalized, PTransE convention).
Eigen::VectorXd path_representation(const RelationPath& p, const ModelParams& params);

// ||M_r h + r - M_r t|| with clipping; identity projection in Initial/PC.
double score_relation(EntityId h, RelationId r, EntityId t, const ModelParams& params);

// ||M_p h + p* - M_p t|| with clipping; identity projection in Initial/PC.
double score_path(EntityId h, const RelationPath& p, EntityId t, const ModelParams& params);

struct PathTerm {
    RelationPath path;
    double weight = 0;    // P(t|h,p) * P_r(r|p)
    double distance = 0;  // score_path value
};

// G = S(h,r,t) + (lambda/Z) * sum_i weight_i * distance_i; path term
// vanishes when the evidence list is empty (Z = 0).
struct ScoreBreakdown {
    double direct = 0;
    std::vector<PathTerm> path_terms;
    double combined = 0;
};

ScoreBreakdown score_goal(EntityId h, RelationId r, EntityId t, const TripleEvidence* evidence,
                          const PathEvidence* table, const ModelParams& params);

// F = G(h,r,t) + G(t, r^-1, h); both evidence entries looked up from the
// mined table, absent entries contribute the direct term only.
double score_final(EntityId h, RelationId r, EntityId t, const PathEvidence* table, const ModelParams& params);

}  // namespace rpe
