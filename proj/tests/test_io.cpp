#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fmrec/error.hpp"
#include "fmrec/io.hpp"
#include "support/fixtures.hpp"

using namespace fmrec;
using namespace fmrec::testing;

TEST_CASE("csv reader handles quotes and blank lines", "[io][csv]") {
    auto rows = io::read_csv("a,b\n\n\"x,y\",\"he said \"\"hi\"\"\"\r\nlast,\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1] == std::vector<std::string>{"x,y", "he said \"hi\""});
    CHECK(rows[2] == std::vector<std::string>{"last", ""});
    CHECK_THROWS_AS(io::read_csv("\"open"), DataError);
}

TEST_CASE("session logs", "[io][sessions]") {
    auto logs = survey_sessions();
    REQUIRE(logs.size() == 3);
    CHECK(logs[0].session == "u1");
    CHECK(logs[0].completed);
    CHECK(logs[0].values.size() == 8);
    CHECK(logs[1].ranks.at("ABtesting") == 1);
    CHECK(logs[1].values.at("advancedlicense"));

    auto again = io::parse_sessions(io::sessions_to_csv(logs));
    REQUIRE(again.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(again[i].values == logs[i].values);
        CHECK(again[i].ranks == logs[i].ranks);
        CHECK(again[i].user == logs[i].user);
    }

    CHECK_THROWS_AS(io::parse_sessions("wrong,header\n"), DataError);
    CHECK_THROWS_AS(io::parse_sessions("session_id,user_id,feature,value,rank\ns,u,f,2,1\n"), DataError);
    CHECK_THROWS_AS(io::parse_sessions("session_id,user_id,feature,value,rank\ns,u,f,1,x\n"), DataError);
    CHECK_THROWS_AS(io::parse_sessions("session_id,user_id,feature,value,rank\ns,u,f,1,1\ns,u,g,1,1\n"), DataError);
    CHECK_THROWS_AS(io::parse_sessions("session_id,user_id,feature,value,rank\ns,u,f\n"), DataError);
}

TEST_CASE("data errors name the line", "[io]") {
    try {
        io::parse_sessions("session_id,user_id,feature,value,rank\ns,u,f,1,1\ns,u,g,yes,2\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(io::read_file("/nonexistent/file.csv"), DataError);
}

TEST_CASE("edit logs", "[io][edits]") {
    auto edits = io::parse_edits(io::read_file(data_path("edits.csv")));
    REQUIRE(edits.size() == 4);
    CHECK(edits[0].ranks.at("c2") == 3);
    CHECK(edits[3].session == "current");
    CHECK(edits[3].ranks.size() == 3);
}

TEST_CASE("utilities and profiles", "[io][utility]") {
    auto t = survey_utilities();
    CHECK(t.dimensions() == std::vector<std::string>{"simplicity", "productivity"});
    CHECK(t.get("basiclicense", "productivity") == 0.1);
    auto back = io::parse_utilities(io::utilities_to_csv(t));
    CHECK(back.entries() == t.entries());
    CHECK_THROWS_AS(io::parse_utilities("feature,dimension,utility\nf,d,1.5\n"), DataError);
    CHECK_THROWS_AS(io::parse_utilities("feature,dimension,utility\nf,d,abc\n"), DataError);

    auto p = profile_ua();
    CHECK(p.weights.at("simplicity") == 0.8);
    CHECK(io::parse_profile(io::profile_to_csv(p), "ua").weights == p.weights);
    CHECK_THROWS_AS(io::parse_profile("dimension,weight\nd,-0.1\n", "x"), DataError);
}

TEST_CASE("interaction matrices", "[io][matrix]") {
    auto m = io::parse_matrix(io::read_file(data_path("share_matrix.csv")));
    CHECK(m.users == std::vector<std::string>{"u1", "u2", "u3", "u4"});
    CHECK(m.features.size() == 9);
    CHECK(m.features.back() == "share");
    CHECK(m.observed(1, 8));
    CHECK_FALSE(m.observed(2, 8));
    CHECK(m.values(1, 1) == 1.0);

    auto text = io::matrix_to_csv(m.users, m.features, m.values);
    auto back = io::parse_matrix(text);
    CHECK(back.users == m.users);
    CHECK(back.features == m.features);
    for (Eigen::Index r = 0; r < m.values.rows(); ++r)
        for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
            CHECK(back.observed(r, c) == m.observed(r, c));
            if (m.observed(r, c)) CHECK(back.values(r, c) == m.values(r, c));
        }

    auto empty_cell = io::parse_matrix("user,a,b\nx,,0.5\n");
    CHECK_FALSE(empty_cell.observed(0, 0));
    CHECK_THROWS_AS(io::parse_matrix("user,a\nx,0.5,0.7\n"), DataError);
    CHECK_THROWS_AS(io::parse_matrix("user,a\nx,2\n"), DataError);
    CHECK_THROWS_AS(io::parse_matrix("user,a\nx,0.1\nx,0.2\n"), DataError);
}

TEST_CASE("factor files", "[io][factors]") {
    auto f = io::parse_factors(io::read_file(data_path("factors.json")));
    CHECK(f.users == std::vector<std::string>{"ua", "ub"});
    CHECK(f.features.size() == 7);
    CHECK(f.user_aspects(0, 0) == 0.8);
    CHECK(f.aspect_features(1, 6) == 1.0);
    auto back = io::parse_factors(io::factors_to_json(f));
    CHECK(back.user_aspects == f.user_aspects);
    CHECK(back.aspect_features == f.aspect_features);
    CHECK(back.features == f.features);
    CHECK_THROWS_AS(io::parse_factors("{"), DataError);
    CHECK_THROWS_AS(io::parse_factors(R"({"users":["a"],"features":["f"],"userAspects":[[1,2]],"aspectFeatures":[[1]]})"),
                    DataError);
}
