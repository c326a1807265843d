#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fmrec/error.hpp"
#include "fmrec/solver.hpp"
#include "support/fixtures.hpp"

using namespace fmrec;
using namespace fmrec::testing;

namespace {

ConfigurationTask survey_task() { return translate(survey_model()); }

Assignment names(const ConfigurationTask& t, std::vector<std::pair<std::string, bool>> v) {
    return Assignment::from_names(t, v);
}

}  // namespace

TEST_CASE("is_consistent on the survey model", "[solver]") {
    auto t = survey_task();
    CHECK(is_consistent(t, Assignment(t.size())));
    CHECK_FALSE(is_consistent(t, names(t, {{"basiclicense", true}, {"ABtesting", true}})));
    CHECK_FALSE(is_consistent(t, names(t, {{"survey", false}})));
    CHECK_THROWS_AS(is_consistent(t, Assignment(3)), InvalidArgument);
    CHECK_THROWS_AS(names(t, {{"nosuch", true}}), UnknownName);
}

TEST_CASE("solve picks the 1-first configuration", "[solver]") {
    auto t = survey_task();
    auto c = solve(t, names(t, {{"ABtesting", true}}));
    REQUIRE(c);
    CHECK(c->bits() == "111011111");  // both QA children selected
    CHECK(satisfies(t, *c));

    CHECK_FALSE(solve(t, names(t, {{"ABtesting", true}, {"basiclicense", true}})));

    auto full = c->as_assignment();
    auto same = solve(t, full);
    REQUIRE(same);
    CHECK(*same == *c);
}

TEST_CASE("enumerate is lexicographic with 1 before 0", "[solver]") {
    auto t = survey_task();
    auto all = enumerate(t);
    std::vector<std::string> bits;
    for (const auto& c : all) bits.push_back(c.bits());
    // Frozen from an exhaustive Python evaluation of the hand-written constraints.
    CHECK(bits == std::vector<std::string>{"111011111", "111011110", "111011101", "111001111", "111001110",
                                           "111001101", "111000111", "111000110", "111000101", "110101110",
                                           "110100110"});
    CHECK(all.size() == brute_force_solutions(t).size());

    auto ab = enumerate(t.with_requirements({t.requirement("ABtesting", true)}));
    REQUIRE(ab.size() == 3);
    CHECK(ab[0].bits() == "111011111");
    CHECK(ab[1].bits() == "111011110");
    CHECK(ab[2].bits() == "111011101");

    CHECK(enumerate(t, 4).size() == 4);
    CHECK(enumerate(t.with_requirements({t.requirement("survey", false)})).empty());

    auto zero_first = Solver(t).enumerate(Assignment(t.size()), ValueOrdering::all(t.size(), false));
    REQUIRE(zero_first.size() == 11);
    CHECK(zero_first.front().bits() == "110100110");
}

TEST_CASE("propagate reaches the unit fixpoint", "[solver]") {
    auto t = survey_task();
    auto p = propagate(t, Assignment(t.size()));
    REQUIRE(p);
    CHECK(p->named(t) == FeatureValues{{"survey", true}, {"license", true}, {"QA", true}});

    auto q = propagate(t, names(t, {{"ABtesting", true}}));
    REQUIRE(q);
    CHECK(q->named(t) == FeatureValues{{"survey", true}, {"license", true}, {"QA", true}, {"ABtesting", true},
                                       {"statistics", true}, {"basiclicense", false}, {"advancedlicense", true}});
    // Every solution with AB=1 agrees with the forced values.
    for (const auto& row : brute_force_solutions(t.with_requirements({t.requirement("ABtesting", true)})))
        for (const auto& l : q->literals()) CHECK((row[l.var] != 0) == l.value);

    CHECK_FALSE(propagate(t, names(t, {{"basiclicense", true}, {"multimediaQA", true}})));
}

TEST_CASE("consistent_completion follows preference scores", "[solver]") {
    auto t = survey_task();
    auto c = consistent_completion(t, names(t, {{"advancedlicense", true}}),
                                   {{"ABtesting", 0.9}, {"multimediaQA", 0.1}, {"basicQA", 0.9}, {"statistics", 0.9}});
    REQUIRE(c);
    CHECK(satisfies(t, *c));
    auto v = c->named(t);
    CHECK(v["ABtesting"]);
    CHECK(v["statistics"]);
    CHECK(v["basicQA"]);
    CHECK_FALSE(v["multimediaQA"]);

    std::map<std::string, double> zeros;
    for (const auto& n : t.variables()) zeros[n] = 0.0;
    auto z = consistent_completion(t, Assignment(t.size()), zeros);
    REQUIRE(z);
    CHECK(z->named(t) == FeatureValues{{"survey", true}, {"license", true}, {"advancedlicense", false},
                                       {"basiclicense", true}, {"ABtesting", false}, {"statistics", false},
                                       {"QA", true}, {"basicQA", true}, {"multimediaQA", false}});

    CHECK_FALSE(consistent_completion(t, names(t, {{"QA", false}}), {}));
    CHECK_THROWS_AS(consistent_completion(t, Assignment(t.size()), {{"QA", 1.5}}), InvalidArgument);
    CHECK_THROWS_AS(consistent_completion(t, Assignment(t.size()), {{"nosuch", 0.5}}), UnknownName);
}

TEST_CASE("score threshold: exactly 0.5 prefers 1", "[solver]") {
    auto t = survey_task();
    auto order = ValueOrdering::from_scores(t, {{"ABtesting", 0.5}, {"statistics", 0.4999}});
    CHECK(order.preferred(t.index_of("ABtesting")));
    CHECK_FALSE(order.preferred(t.index_of("statistics")));
    CHECK(order.preferred(t.index_of("QA")));
}

TEST_CASE("solver agrees with brute force on random models", "[solver][property]") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        auto m = random_model(rng, 12);
        auto t = translate(m);
        auto truth = brute_force_solutions(t);
        Solver s(t);
        auto sols = s.enumerate(Assignment(t.size()));
        std::set<std::vector<std::uint8_t>> got;
        for (const auto& c : sols) {
            got.insert(std::vector<std::uint8_t>(c.values().begin(), c.values().end()));
            REQUIRE(model_accepts(m, std::vector<std::uint8_t>(c.values().begin(), c.values().end())));
        }
        REQUIRE(got.size() == sols.size());
        REQUIRE(got == truth);
        REQUIRE(std::is_sorted(sols.begin(), sols.end(), [](const Configuration& a, const Configuration& b) {
            return a > b;  // 1-first lexicographic == descending byte order
        }));
        CHECK(s.enumerate(Assignment(t.size())) == sols);

        // solve != none <=> consistent, and propagation is sound and monotone.
        std::uniform_int_distribution<std::size_t> var(0, t.size() - 1);
        for (int k = 0; k < 5; ++k) {
            Assignment a(t.size());
            for (int j = 0; j < 2; ++j) a.set(var(rng), rng() % 2);
            auto sol = s.solve(a);
            bool any = std::any_of(truth.begin(), truth.end(), [&](const auto& row) {
                for (const auto& l : a.literals())
                    if ((row[l.var] != 0) != l.value) return false;
                return true;
            });
            REQUIRE(sol.has_value() == any);
            REQUIRE(s.is_consistent(a) == any);
            auto p = s.propagate(a);
            if (p) {
                REQUIRE(a.is_extended_by(*p));
                if (sol) REQUIRE(p->is_extended_by(sol->as_assignment()));
            } else {
                REQUIRE_FALSE(any);
            }
        }
    }
}
