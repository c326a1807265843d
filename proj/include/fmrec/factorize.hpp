#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fmrec {

/// User × feature relevance observations. Missing cells are NaN.
struct InteractionMatrix {
    std::vector<std::string> users;
    std::vector<std::string> features;
    Eigen::MatrixXd values;

    static bool is_missing(double v) { return v != v; }
    bool observed(Eigen::Index u, Eigen::Index f) const { return !is_missing(values(u, f)); }
    std::size_t observed_count() const;
    /// Throws InvalidArgument when shapes and labels disagree.
    void check() const;
};

/// UA (users × k) and AF (k × features); T' = UA · AF.
struct FactorPair {
    std::vector<std::string> users;
    std::vector<std::string> features;
    Eigen::MatrixXd user_aspects;
    Eigen::MatrixXd aspect_features;

    Eigen::Index rank() const { return user_aspects.cols(); }
};

struct TrainConfig {
    int k = 2;
    double rate = 0.05;
    double lambda = 0.0;
    int epochs = 2000;
    std::uint64_t seed = 42;
};

/// Factors plus diagnostics gathered during training.
struct TrainResult {
    FactorPair factors;
    std::vector<double> loss_history;  // regularized loss after each epoch
    std::size_t loss_increases = 0;    // epochs whose loss exceeded the previous one
    double rmse = 0.0;                 // over observed cells, final factors
};

/// Exact product UA · AF. Throws InvalidArgument on an inner-dimension
/// mismatch.
Eigen::MatrixXd predict(const Eigen::MatrixXd& user_aspects, const Eigen::MatrixXd& aspect_features);
Eigen::MatrixXd predict(const FactorPair& f);

/// 1 where value >= threshold, else 0.
Eigen::MatrixXi binarize(const Eigen::MatrixXd& scores, double threshold);

/// Root mean squared error over the observed cells of `observed`. Throws
/// InvalidArgument on a shape mismatch or when nothing is observed.
double rmse(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& predicted);

/// Σ_observed (T − UA·AF)² + λ(‖UA‖² + ‖AF‖²).
double regularized_loss(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& user_aspects,
                        const Eigen::MatrixXd& aspect_features, double lambda);

/// Analytic gradients of regularized_loss with respect to UA and AF.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> loss_gradient(const Eigen::MatrixXd& observed,
                                                          const Eigen::MatrixXd& user_aspects,
                                                          const Eigen::MatrixXd& aspect_features, double lambda);

/// Stochastic gradient descent on the observed cells, visited in a freshly
/// shuffled order each epoch. Factors start uniform in [0, 0.1]. All
/// randomness comes from a generator seeded with cfg.seed, so results are
/// reproducible. Throws InvalidArgument for an empty observation set or an
/// invalid configuration.
TrainResult train(const InteractionMatrix& t, const TrainConfig& cfg);

struct ScoredFeature {
    std::string feature;
    double score = 0.0;
};

/// Candidates ordered by predicted score (descending, then by column order).
/// Throws UnknownName for unknown users or features.
std::vector<ScoredFeature> relevance_ranking(const Eigen::MatrixXd& scores, const std::vector<std::string>& users,
                                             const std::vector<std::string>& features, const std::string& user,
                                             const std::vector<std::string>& candidates);

}  // namespace fmrec
