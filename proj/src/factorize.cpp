#include "fmrec/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fmrec/error.hpp"

namespace fmrec {

std::size_t InteractionMatrix::observed_count() const {
    std::size_t n = 0;
    for (Eigen::Index u = 0; u < values.rows(); ++u)
        for (Eigen::Index f = 0; f < values.cols(); ++f)
            if (observed(u, f)) ++n;
    return n;
}

void InteractionMatrix::check() const {
    if (static_cast<Eigen::Index>(users.size()) != values.rows() ||
        static_cast<Eigen::Index>(features.size()) != values.cols())
        throw InvalidArgument("interaction matrix labels do not match its shape");
}

Eigen::MatrixXd predict(const Eigen::MatrixXd& user_aspects, const Eigen::MatrixXd& aspect_features) {
    if (user_aspects.cols() != aspect_features.rows())
        throw InvalidArgument("factor dimensions do not match: UA has " + std::to_string(user_aspects.cols()) +
                              " columns, AF has " + std::to_string(aspect_features.rows()) + " rows");
    // Plain triple loop so every cell is the same left-to-right dot product.
    Eigen::MatrixXd out(user_aspects.rows(), aspect_features.cols());
    for (Eigen::Index u = 0; u < out.rows(); ++u) {
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
            double s = 0.0;
            for (Eigen::Index a = 0; a < user_aspects.cols(); ++a) s += user_aspects(u, a) * aspect_features(a, i);
            out(u, i) = s;
        }
    }
    return out;
}

Eigen::MatrixXd predict(const FactorPair& f) {
    return predict(f.user_aspects, f.aspect_features);
}

Eigen::MatrixXi binarize(const Eigen::MatrixXd& scores, double threshold) {
    return (scores.array() >= threshold).cast<int>().matrix();
}

double rmse(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& predicted) {
    if (observed.rows() != predicted.rows() || observed.cols() != predicted.cols())
        throw InvalidArgument("rmse needs matrices of equal shape");
    double sum = 0.0;
    std::size_t n = 0;
    for (Eigen::Index u = 0; u < observed.rows(); ++u) {
        for (Eigen::Index i = 0; i < observed.cols(); ++i) {
            double t = observed(u, i);
            if (InteractionMatrix::is_missing(t)) continue;
            double e = t - predicted(u, i);
            sum += e * e;
            ++n;
        }
    }
    if (n == 0) throw InvalidArgument("rmse needs at least one observed cell");
    return std::sqrt(sum / static_cast<double>(n));
}

double regularized_loss(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& user_aspects,
                        const Eigen::MatrixXd& aspect_features, double lambda) {
    Eigen::MatrixXd p = predict(user_aspects, aspect_features);
    double loss = 0.0;
    for (Eigen::Index u = 0; u < observed.rows(); ++u)
        for (Eigen::Index i = 0; i < observed.cols(); ++i)
            if (!InteractionMatrix::is_missing(observed(u, i))) {
                double e = observed(u, i) - p(u, i);
                loss += e * e;
            }
    return loss + lambda * (user_aspects.squaredNorm() + aspect_features.squaredNorm());
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> loss_gradient(const Eigen::MatrixXd& observed,
                                                          const Eigen::MatrixXd& user_aspects,
                                                          const Eigen::MatrixXd& aspect_features, double lambda) {
    Eigen::MatrixXd p = predict(user_aspects, aspect_features);
    Eigen::MatrixXd err = Eigen::MatrixXd::Zero(observed.rows(), observed.cols());
    for (Eigen::Index u = 0; u < observed.rows(); ++u)
        for (Eigen::Index i = 0; i < observed.cols(); ++i)
            if (!InteractionMatrix::is_missing(observed(u, i))) err(u, i) = observed(u, i) - p(u, i);
    Eigen::MatrixXd gu = -2.0 * err * aspect_features.transpose() + 2.0 * lambda * user_aspects;
    Eigen::MatrixXd ga = -2.0 * user_aspects.transpose() * err + 2.0 * lambda * aspect_features;
    return {gu, ga};
}

TrainResult train(const InteractionMatrix& t, const TrainConfig& cfg) {
    t.check();
    if (cfg.k < 1) throw InvalidArgument("latent dimension k must be at least 1");
    if (!(cfg.rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (!(cfg.lambda >= 0.0)) throw InvalidArgument("regularization weight must be non-negative");
    if (cfg.epochs < 1) throw InvalidArgument("epoch count must be at least 1");

    std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
    for (Eigen::Index u = 0; u < t.values.rows(); ++u)
        for (Eigen::Index i = 0; i < t.values.cols(); ++i)
            if (t.observed(u, i)) cells.emplace_back(u, i);
    if (cells.empty()) throw InvalidArgument("interaction matrix has no observed cells");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> init(0.0, 0.1);
    const Eigen::Index k = cfg.k;
    Eigen::MatrixXd ua(t.values.rows(), k);
    Eigen::MatrixXd af(k, t.values.cols());
    for (Eigen::Index r = 0; r < ua.rows(); ++r)
        for (Eigen::Index c = 0; c < k; ++c) ua(r, c) = init(rng);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < af.cols(); ++c) af(r, c) = init(rng);

    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(cells.begin(), cells.end(), rng);
        for (const auto& [u, i] : cells) {
            double p = 0.0;
            for (Eigen::Index a = 0; a < k; ++a) p += ua(u, a) * af(a, i);
            double e = t.values(u, i) - p;
            for (Eigen::Index a = 0; a < k; ++a) {
                double uv = ua(u, a);
                double av = af(a, i);
                ua(u, a) += cfg.rate * (e * av - cfg.lambda * uv);
                af(a, i) += cfg.rate * (e * uv - cfg.lambda * av);
            }
        }
        double loss = regularized_loss(t.values, ua, af, cfg.lambda);
        if (!result.loss_history.empty() && loss > result.loss_history.back()) ++result.loss_increases;
        result.loss_history.push_back(loss);
    }

    result.factors = FactorPair{t.users, t.features, std::move(ua), std::move(af)};
    result.rmse = rmse(t.values, predict(result.factors));
    return result;
}

std::vector<ScoredFeature> relevance_ranking(const Eigen::MatrixXd& scores, const std::vector<std::string>& users,
                                             const std::vector<std::string>& features, const std::string& user,
                                             const std::vector<std::string>& candidates) {
    auto u = std::find(users.begin(), users.end(), user);
    if (u == users.end()) throw UnknownName("unknown user '" + user + "'");
    auto row = static_cast<Eigen::Index>(u - users.begin());

    std::vector<std::pair<ScoredFeature, std::size_t>> out;
    for (const auto& c : candidates) {
        auto f = std::find(features.begin(), features.end(), c);
        if (f == features.end()) throw UnknownName("unknown feature '" + c + "'");
        auto col = static_cast<std::size_t>(f - features.begin());
        out.push_back({{c, scores(row, static_cast<Eigen::Index>(col))}, col});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.first.score != b.first.score) return a.first.score > b.first.score;
        return a.second < b.second;
    });
    std::vector<ScoredFeature> ranked;
    for (auto& [s, col] : out) ranked.push_back(std::move(s));
    return ranked;
}

}  // namespace fmrec
