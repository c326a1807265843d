#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "fmrec/error.hpp"
#include "fmrec/factorize.hpp"
#include "support/fixtures.hpp"

using namespace fmrec;
using namespace fmrec::testing;
using Catch::Matchers::WithinAbs;

namespace {

const double kMissing = std::numeric_limits<double>::quiet_NaN();

// Columns: advancedlicense, basiclicense, ABtesting, statistics, multimediaQA, basicQA, share.
const std::vector<std::string> kFeatures{"advancedlicense", "basiclicense", "ABtesting", "statistics",
                                         "multimediaQA",    "basicQA",      "share"};

Eigen::MatrixXd ua_matrix() {
    Eigen::MatrixXd m(2, 2);
    m << 0.8, 0.2, 0.2, 0.8;
    return m;
}

Eigen::MatrixXd af_matrix() {
    Eigen::MatrixXd m(2, 7);
    m << 1.0, 0.1, 1.0, 1.0, 1.0, 1.0, 0.7,
         0.1, 1.0, 0.3, 0.5, 0.3, 1.0, 1.0;
    return m;
}

// Loss evaluated cell by cell with plain loops.
double loss_oracle(const Eigen::MatrixXd& t, const Eigen::MatrixXd& ua, const Eigen::MatrixXd& af, double lambda) {
    double s = 0;
    for (int u = 0; u < t.rows(); ++u)
        for (int i = 0; i < t.cols(); ++i) {
            if (std::isnan(t(u, i))) continue;
            double p = 0;
            for (int a = 0; a < ua.cols(); ++a) p += ua(u, a) * af(a, i);
            s += (t(u, i) - p) * (t(u, i) - p);
        }
    double reg = 0;
    for (int r = 0; r < ua.rows(); ++r)
        for (int c = 0; c < ua.cols(); ++c) reg += ua(r, c) * ua(r, c);
    for (int r = 0; r < af.rows(); ++r)
        for (int c = 0; c < af.cols(); ++c) reg += af(r, c) * af(r, c);
    return s + lambda * reg;
}

InteractionMatrix exact_product() {
    return InteractionMatrix{{"ua", "ub"}, kFeatures, predict(ua_matrix(), af_matrix())};
}

}  // namespace

TEST_CASE("prediction reproduces the consistent cells", "[factorize][predict]") {
    auto t = predict(ua_matrix(), af_matrix());
    CHECK_THAT(t(0, 0), WithinAbs(0.82, 1e-12));
    CHECK_THAT(t(0, 1), WithinAbs(0.28, 1e-12));
    CHECK_THAT(t(1, 1), WithinAbs(0.82, 1e-12));
    CHECK_THAT(t(0, 5), WithinAbs(1.0, 1e-12));
    CHECK_THAT(t(1, 5), WithinAbs(1.0, 1e-12));
    CHECK_THAT(t(0, 6), WithinAbs(0.76, 1e-12));
    CHECK_THAT(t(1, 6), WithinAbs(0.94, 1e-12));
    // Exact products where the printed table differs.
    CHECK_THAT(t(0, 3), WithinAbs(0.90, 1e-12));
    CHECK_THAT(t(0, 2), WithinAbs(0.86, 1e-12));

    Eigen::MatrixXd row(1, 2);
    row << 1.0, 0.0;
    CHECK(predict(row, af_matrix()).row(0) == af_matrix().row(0));

    CHECK_THROWS_AS(predict(Eigen::MatrixXd(2, 3), af_matrix()), InvalidArgument);
}

TEST_CASE("prediction is bilinear in user rows", "[factorize][predict][property]") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int i = 0; i < 50; ++i) {
        Eigen::MatrixXd ua = Eigen::MatrixXd::NullaryExpr(3, 2, [&] { return d(rng); });
        Eigen::MatrixXd af = Eigen::MatrixXd::NullaryExpr(2, 4, [&] { return d(rng); });
        double alpha = d(rng);
        auto base = predict(ua, af);
        ua.row(1) *= alpha;
        auto scaled = predict(ua, af);
        for (int c = 0; c < 4; ++c) CHECK_THAT(scaled(1, c), WithinAbs(alpha * base(1, c), 1e-12));
        CHECK(scaled.row(0) == base.row(0));
    }
}

TEST_CASE("binarize at 0.8", "[factorize][binarize]") {
    auto b = binarize(predict(ua_matrix(), af_matrix()), 0.8);
    // adlic, baslic, basQA, share
    CHECK(b(0, 0) == 1);
    CHECK(b(0, 1) == 0);
    CHECK(b(0, 5) == 1);
    CHECK(b(0, 6) == 0);
    CHECK(b(1, 0) == 0);
    CHECK(b(1, 1) == 1);
    CHECK(b(1, 5) == 1);
    CHECK(b(1, 6) == 1);

    Eigen::MatrixXd m(1, 3);
    m << 0.5, 0.9999, 1.0;
    auto hi = binarize(m, 1.0 - 1e-12);
    CHECK(hi(0, 0) == 0);
    CHECK(hi(0, 1) == 0);
    CHECK(hi(0, 2) == 1);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(0, 1);
    Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(5, 5, [&] { return d(rng); });
    for (double t = 0.0; t < 1.0; t += 0.05) {
        auto lo = binarize(r, t), up = binarize(r, t + 0.05);
        CHECK((up.array() <= lo.array()).all());
    }
}

TEST_CASE("rmse over observed cells", "[factorize][rmse]") {
    Eigen::MatrixXd a(1, 2), b(1, 2);
    a << 0.3, 0.4;
    CHECK(rmse(a, a) == 0.0);
    b << 0.3, 0.9;
    CHECK_THAT(rmse(a, b), WithinAbs(std::sqrt(0.25 / 2), 1e-15));
    Eigen::MatrixXd one(1, 2), p1(1, 2);
    one << 0.2, kMissing;
    p1 << 0.7, 5.0;
    CHECK_THAT(rmse(one, p1), WithinAbs(0.5, 1e-15));
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 2);
    CHECK_THAT(rmse(a, z), WithinAbs(0.35355339059327373, 1e-15));
    Eigen::MatrixXd none(1, 1);
    none << kMissing;
    CHECK_THROWS_AS(rmse(none, none), InvalidArgument);
}

TEST_CASE("analytic gradient matches central differences", "[factorize][gradient][property]") {
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> d(-1, 1), lam(0, 0.5);
    std::uniform_int_distribution<int> dim(1, 4);
    const double h = 1e-5;
    for (int inst = 0; inst < 20; ++inst) {
        int users = dim(rng), features = dim(rng) + 1, k = dim(rng);
        Eigen::MatrixXd t = Eigen::MatrixXd::NullaryExpr(users, features, [&] { return (d(rng) + 1) / 2; });
        t(0, features - 1) = kMissing;
        Eigen::MatrixXd ua = Eigen::MatrixXd::NullaryExpr(users, k, [&] { return d(rng); });
        Eigen::MatrixXd af = Eigen::MatrixXd::NullaryExpr(k, features, [&] { return d(rng); });
        double lambda = lam(rng);
        CHECK_THAT(regularized_loss(t, ua, af, lambda), WithinAbs(loss_oracle(t, ua, af, lambda), 1e-10));

        auto [gua, gaf] = loss_gradient(t, ua, af, lambda);
        auto check = [&](Eigen::MatrixXd& m, const Eigen::MatrixXd& g) {
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) {
                    double keep = m(r, c);
                    m(r, c) = keep + h;
                    double up = loss_oracle(t, ua, af, lambda);
                    m(r, c) = keep - h;
                    double down = loss_oracle(t, ua, af, lambda);
                    m(r, c) = keep;
                    double fd = (up - down) / (2 * h);
                    double scale = std::max({std::abs(fd), std::abs(g(r, c)), 1e-3});
                    CHECK(std::abs(fd - g(r, c)) / scale < 1e-4);
                }
        };
        check(ua, gua);
        check(af, gaf);
    }
}

TEST_CASE("training recovers the exact product", "[factorize][train]") {
    auto res = train(exact_product(), TrainConfig{});
    CHECK(res.rmse < 0.05);
    CHECK(res.loss_history.size() == 2000);
    CHECK(res.loss_history.back() < res.loss_history.front());
    CHECK(res.factors.rank() == 2);
    CHECK(res.factors.users == std::vector<std::string>{"ua", "ub"});

    auto again = train(exact_product(), TrainConfig{});
    CHECK(again.factors.user_aspects == res.factors.user_aspects);
    CHECK(again.factors.aspect_features == res.factors.aspect_features);

    TrainConfig other;
    other.seed = 7;
    CHECK(train(exact_product(), other).factors.user_aspects != res.factors.user_aspects);
}

TEST_CASE("rank-one matrices are recovered with k=1", "[factorize][train]") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(0.3, 1.0);
    for (int i = 0; i < 5; ++i) {
        Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(4, [&] { return d(rng); });
        Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(5, [&] { return d(rng); });
        InteractionMatrix m{{"a", "b", "c", "d"}, {"p", "q", "r", "s", "t"}, a * b.transpose()};
        TrainConfig cfg;
        cfg.k = 1;
        cfg.seed = static_cast<std::uint64_t>(i);
        CHECK(train(m, cfg).rmse < 0.01);
    }
}

TEST_CASE("heavy regularization shrinks factors", "[factorize][train]") {
    TrainConfig cfg;
    cfg.lambda = 1e3;
    cfg.rate = 1e-4;
    cfg.epochs = 200;
    auto res = train(exact_product(), cfg);
    CHECK(res.factors.user_aspects.cwiseAbs().maxCoeff() < 1e-3);
    CHECK(res.factors.aspect_features.cwiseAbs().maxCoeff() < 1e-3);
    CHECK(predict(res.factors).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("missing cells are ignored by training", "[factorize][train]") {
    auto m = io::parse_matrix(io::read_file(data_path("share_matrix.csv")));
    CHECK(m.observed_count() == 34);
    auto res = train(m, TrainConfig{});
    CHECK(std::isfinite(res.rmse));
    CHECK(res.rmse < 0.2);
    CHECK(res.loss_history.back() < res.loss_history.front());
    auto p = predict(res.factors);
    CHECK(p.allFinite());
}

TEST_CASE("training validates its inputs", "[factorize][train]") {
    Eigen::MatrixXd all_missing(1, 1);
    all_missing << kMissing;
    CHECK_THROWS_AS(train(InteractionMatrix{{"u"}, {"f"}, all_missing}, TrainConfig{}), InvalidArgument);
    TrainConfig bad;
    bad.rate = 0;
    CHECK_THROWS_AS(train(exact_product(), bad), InvalidArgument);
    bad = TrainConfig{};
    bad.lambda = -1;
    CHECK_THROWS_AS(train(exact_product(), bad), InvalidArgument);
    bad = TrainConfig{};
    bad.epochs = 0;
    CHECK_THROWS_AS(train(exact_product(), bad), InvalidArgument);
    bad = TrainConfig{};
    bad.k = 0;
    CHECK_THROWS_AS(train(exact_product(), bad), InvalidArgument);
    CHECK_THROWS_AS(train(InteractionMatrix{{"u"}, {"f", "g"}, Eigen::MatrixXd::Zero(1, 1)}, TrainConfig{}),
                    InvalidArgument);
}

TEST_CASE("relevance ranking for the new feature", "[factorize][ranking]") {
    auto t = predict(ua_matrix(), af_matrix());
    std::vector<std::string> users{"ua", "ub"};
    auto b = relevance_ranking(t, users, kFeatures, "ub", {"share"});
    REQUIRE(b.size() == 1);
    CHECK_THAT(b[0].score, WithinAbs(0.94, 1e-12));
    auto a = relevance_ranking(t, users, kFeatures, "ua", {"share"});
    CHECK(a[0].score < b[0].score);
    CHECK(relevance_ranking(t, users, kFeatures, "ua", {}).empty());

    auto all = relevance_ranking(t, users, kFeatures, "ua", kFeatures);
    CHECK(all.front().feature == "basicQA");
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);
    // Ties keep column order: ABtesting and multimediaQA both score 0.86.
    auto tie = std::find_if(all.begin(), all.end(), [](const ScoredFeature& s) { return s.feature == "ABtesting"; });
    REQUIRE(tie + 1 != all.end());
    CHECK((tie + 1)->feature == "multimediaQA");

    CHECK_THROWS_AS(relevance_ranking(t, users, kFeatures, "nobody", {"share"}), UnknownName);
    CHECK_THROWS_AS(relevance_ranking(t, users, kFeatures, "ua", {"nosuch"}), UnknownName);
}
