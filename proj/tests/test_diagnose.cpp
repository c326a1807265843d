#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fmrec/diagnose.hpp"
#include "fmrec/error.hpp"
#include "fmrec/solver.hpp"
#include "support/fixtures.hpp"

using namespace fmrec;
using namespace fmrec::testing;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<Formula> formulas(const ConfigurationTask& t) {
    std::vector<Formula> out;
    for (const auto& c : t.model_constraints()) out.push_back(c.formula);
    return out;
}

// Truth-table consistency of background plus a subset of requirements.
bool tt_consistent(const ConfigurationTask& t, const std::vector<Formula>& bg, const std::vector<Requirement>& reqs) {
    for (const auto& row : truth_table(t.size())) {
        if (!all_hold(bg, row)) continue;
        bool ok = std::all_of(reqs.begin(), reqs.end(), [&](const Requirement& r) { return (row[r.var] != 0) == r.value; });
        if (ok) return true;
    }
    return false;
}

std::vector<Requirement> pick(const std::vector<Requirement>& c, std::uint32_t mask) {
    std::vector<Requirement> out;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (mask >> i & 1u) out.push_back(c[i]);
    return out;
}

// Minimal removal sets by enumerating every subset of the candidates.
std::set<std::set<std::pair<std::size_t, bool>>> brute_force_diagnoses(const ConfigurationTask& t,
                                                                       const std::vector<Formula>& bg,
                                                                       const std::vector<Requirement>& c) {
    const std::uint32_t full = (1u << c.size()) - 1;
    std::vector<std::uint32_t> repairing;
    for (std::uint32_t removed = 0; removed <= full; ++removed)
        if (tt_consistent(t, bg, pick(c, full & ~removed))) repairing.push_back(removed);
    std::set<std::set<std::pair<std::size_t, bool>>> out;
    if (!repairing.empty() && repairing.front() == 0) return out;
    for (auto d : repairing) {
        bool minimal = std::none_of(repairing.begin(), repairing.end(),
                                    [&](std::uint32_t o) { return o != d && (o & d) == o; });
        if (!minimal) continue;
        std::set<std::pair<std::size_t, bool>> s;
        for (const auto& r : pick(c, d)) s.emplace(r.var, r.value);
        out.insert(s);
    }
    return out;
}

std::set<std::pair<std::size_t, bool>> as_set(const std::vector<Requirement>& rs) {
    std::set<std::pair<std::size_t, bool>> s;
    for (const auto& r : rs) s.emplace(r.var, r.value);
    return s;
}

ConfigurationTask scenario() {
    auto t = translate(survey_model());
    return t.with_requirements({t.requirement("advancedlicense", false), t.requirement("basiclicense", true),
                                t.requirement("ABtesting", true)});
}

}  // namespace

TEST_CASE("QuickXplain finds the first conflict of the reconfiguration scenario", "[diagnose][conflict]") {
    auto t = scenario();
    auto cs = min_conflict(t);
    REQUIRE(cs);
    CHECK(*cs == std::vector<Requirement>{t.requirement("advancedlicense", false), t.requirement("ABtesting", true)});

    auto base = translate(survey_model());
    CHECK_FALSE(min_conflict(base.with_requirements({base.requirement("ABtesting", true)})));

    auto single = min_conflict(base.with_requirements({base.requirement("ABtesting", true),
                                                       base.requirement("survey", false)}));
    REQUIRE(single);
    CHECK(*single == std::vector<Requirement>{base.requirement("survey", false)});
}

TEST_CASE("conflict detection rejects an inconsistent background", "[diagnose]") {
    std::vector<Formula> bg{Formula::lit(0), Formula::lit(0, false)};
    std::vector<Requirement> c{{1, true, ""}};
    CHECK_THROWS_AS(min_conflict(2, bg, c), InconsistentBackground);
    CHECK_THROWS_AS(all_diagnoses(2, bg, c), InconsistentBackground);
}

TEST_CASE("diagnoses of the reconfiguration scenario", "[diagnose][hsdag]") {
    auto t = scenario();
    auto ds = all_diagnoses(t);
    REQUIRE(ds.size() == 2);
    CHECK(ds[0] == std::vector<Requirement>{t.requirement("ABtesting", true)});
    CHECK(ds[1] == std::vector<Requirement>{t.requirement("advancedlicense", false), t.requirement("basiclicense", true)});

    auto bg = formulas(t);
    auto truth = brute_force_diagnoses(t, bg, t.requirements());
    std::set<std::set<std::pair<std::size_t, bool>>> got;
    for (const auto& d : ds) got.insert(as_set(d));
    CHECK(got == truth);

    auto conflicts = all_conflicts(t.size(), bg, t.requirements());
    REQUIRE(conflicts.size() == 2);
    CHECK(as_set(conflicts[0]) == as_set({t.requirement("advancedlicense", false), t.requirement("ABtesting", true)}));
    CHECK(as_set(conflicts[1]) == as_set({t.requirement("basiclicense", true), t.requirement("ABtesting", true)}));

    auto base = translate(survey_model());
    CHECK(all_diagnoses(base.with_requirements({base.requirement("QA", true)})).empty());
    auto one = all_diagnoses(base.with_requirements({base.requirement("QA", false)}));
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::vector<Requirement>{base.requirement("QA", false)});
}

TEST_CASE("conflicts and diagnoses match brute force on random instances", "[diagnose][property]") {
    std::mt19937_64 rng(77);
    int checked = 0;
    for (int i = 0; i < 300 && checked < 120; ++i) {
        auto m = random_model(rng, 9);
        if (m.size() < 3) continue;
        auto t = translate(m);
        if (brute_force_solutions(t).empty()) continue;
        auto bg = formulas(t);
        std::vector<Requirement> cands;
        std::size_t n = 1 + rng() % std::min<std::size_t>(t.size(), 10);
        for (std::size_t k = 0; k < n; ++k) cands.push_back({rng() % t.size(), static_cast<bool>(rng() % 2), ""});
        if (tt_consistent(t, bg, cands)) continue;
        ++checked;
        INFO(serialize_model(m));

        auto cs = min_conflict(t.size(), bg, cands);
        REQUIRE(cs);
        CHECK_FALSE(tt_consistent(t, bg, *cs));
        if (cs->size() <= 4) {
            for (std::uint32_t mask = 0; mask + 1 < (1u << cs->size()); ++mask)
                CHECK(tt_consistent(t, bg, pick(*cs, mask)));
        }

        auto ds = all_diagnoses(t.size(), bg, cands);
        std::set<std::set<std::pair<std::size_t, bool>>> got;
        for (const auto& d : ds) got.insert(as_set(d));
        CHECK(got == brute_force_diagnoses(t, bg, cands));
        for (std::size_t k = 1; k < ds.size(); ++k) CHECK(ds[k - 1].size() <= ds[k].size());
    }
    CHECK(checked >= 50);
}

TEST_CASE("repairs realize the two change alternatives", "[diagnose][repair]") {
    auto t = scenario();
    auto ds = all_diagnoses(t);
    auto rs = repairs(t, ds);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].changes == FeatureValues{{"ABtesting", false}});
    CHECK(rs[0].assignment ==
          FeatureValues{{"advancedlicense", false}, {"basiclicense", true}, {"ABtesting", false}});
    CHECK(rs[1].changes == FeatureValues{{"advancedlicense", true}, {"basiclicense", false}});
    CHECK(rs[1].assignment ==
          FeatureValues{{"advancedlicense", true}, {"basiclicense", false}, {"ABtesting", true}});
    for (const auto& r : rs) CHECK(satisfies(t.with_requirements({}), r.witness));

    CHECK(repairs(t, {}).empty());

    auto ranked = rank_repairs(rs, survey_utilities(), profile_ua());
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].changes == FeatureValues{{"ABtesting", false}});
    CHECK_THAT(ranked[0].utility, WithinAbs(0.82, 1e-9));
    CHECK_THAT(ranked[1].utility, WithinAbs(0.72, 1e-9));

    Repair off;
    off.assignment = {{"advancedlicense", false}, {"ABtesting", false}};
    CHECK(rank_repairs({off}, survey_utilities(), profile_ua())[0].utility == 0.0);

    // Positive scaling of the profile keeps the order.
    InterestProfile scaled{"ua", {{"simplicity", 0.4}, {"productivity", 0.1}}};
    auto r2 = rank_repairs(rs, survey_utilities(), scaled);
    CHECK(r2[0].changes == ranked[0].changes);
}

TEST_CASE("every repair is consistent with the kept requirements", "[diagnose][repair][property]") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        auto m = random_model(rng, 9);
        auto t0 = translate(m);
        if (brute_force_solutions(t0).empty()) continue;
        std::vector<Requirement> cands;
        for (std::size_t k = 0; k < 4; ++k) cands.push_back({rng() % t0.size(), static_cast<bool>(rng() % 2), ""});
        auto t = t0.with_requirements(cands);
        auto ds = all_diagnoses(t);
        for (const auto& r : repairs(t, ds)) {
            CHECK(model_accepts(m, std::vector<std::uint8_t>(r.witness.values().begin(), r.witness.values().end())));
            const auto& d = ds[r.diagnosis];
            for (const auto& req : cands)
                if (std::find(d.begin(), d.end(), req) == d.end()) CHECK(r.witness[req.var] == req.value);
        }
    }
}
