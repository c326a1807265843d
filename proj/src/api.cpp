#include "fmrec/api.hpp"

#include <charconv>
#include <sstream>

#include "fmrec/diagnose.hpp"
#include "fmrec/factorize.hpp"
#include "fmrec/io.hpp"
#include "fmrec/recommend.hpp"
#include "fmrec/solver.hpp"

namespace fmrec::service {

using nlohmann::json;

namespace {

class BadRequest : public Error {
public:
    using Error::Error;
};

class MethodNotAllowed : public Error {
public:
    using Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

json parse_body(const Request& req) {
    json j;
    try {
        j = json::parse(req.body.empty() ? "{}" : req.body);
    } catch (const json::parse_error&) {
        throw BadRequest("request body is not valid JSON");
    }
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
}

std::string string_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw BadRequest(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
}

// Feature values travel as 0/1; booleans are accepted on input.
bool value_field(const json& j, const char* key) {
    if (j.contains(key)) {
        const auto& v = j[key];
        if (v.is_boolean()) return v.get<bool>();
        if (v.is_number_integer() && (v.get<long long>() == 0 || v.get<long long>() == 1)) return v.get<long long>() == 1;
    }
    throw BadRequest(std::string("field '") + key + "' must be 0 or 1");
}

template <class T>
T number_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j[key];
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw BadRequest(std::string("field '") + key + "' must be an integer");
    } else {
        if (!v.is_number()) throw BadRequest(std::string("field '") + key + "' must be a number");
    }
    return v.get<T>();
}

std::optional<std::string> query(const Request& req, const char* key) {
    auto it = req.query.find(key);
    if (it == req.query.end()) return std::nullopt;
    return it->second;
}

long long query_int(const Request& req, const char* key, long long fallback) {
    auto q = query(req, key);
    if (!q) return fallback;
    long long v = 0;
    auto [p, ec] = std::from_chars(q->data(), q->data() + q->size(), v);
    if (ec != std::errc() || p != q->data() + q->size())
        throw BadRequest(std::string("query parameter '") + key + "' must be an integer");
    return v;
}

json values_json(const FeatureValues& v) {
    json out = json::object();
    for (const auto& [f, b] : v) out[f] = b ? 1 : 0;
    return out;
}

json literals_json(const std::vector<Requirement>& rs, const ConfigurationTask& task) {
    json out = json::array();
    for (const auto& r : rs) out.push_back({{"feature", task.name(r.var)}, {"value", r.value ? 1 : 0}});
    return out;
}

json session_json(const SessionState& s) {
    json events = json::array();
    for (const auto& e : s.events)
        events.push_back({{"feature", e.feature}, {"value", e.value ? 1 : 0}, {"rank", e.rank}, {"timestamp", e.timestamp}});
    return {{"sessionId", s.id},         {"modelId", s.model},
            {"userId", s.user},          {"status", to_string(s.status)},
            {"values", values_json(s.values())}, {"forced", values_json(s.forced)},
            {"events", events}};
}

ConfigurationTask session_task(const ModelRecord& m, const SessionState& s, const char* source) {
    std::vector<Requirement> reqs;
    for (const auto& [f, v] : s.requirements()) reqs.push_back(m.task.requirement(f, v, source));
    return m.task.with_requirements(reqs);
}

class Router {
public:
    Router(Store& store, const Request& req) : store_(store), req_(req) {}

    Response route() {
        auto parts = split(req_.path, '/');
        std::vector<std::string> seg;
        for (auto& p : parts)
            if (!p.empty()) seg.push_back(p);
        if (seg.size() < 2 || seg[0] != "api" || seg[1] != "v1") throw NotFound("no such endpoint");
        seg.erase(seg.begin(), seg.begin() + 2);
        const auto n = seg.size();
        auto is = [&](std::initializer_list<const char*> want) {
            if (want.size() != n) return false;
            std::size_t i = 0;
            for (auto w : want) {
                if (std::string(w) != "*" && seg[i] != w) return false;
                ++i;
            }
            return true;
        };

        if (is({"health"})) return on("GET", [&] { return ok({{"status", "ok"}}); });
        if (is({"models"})) {
            if (req_.method == "POST") return post_model();
            return on("GET", [&] { return ok({{"models", store_.model_ids()}}); });
        }
        if (is({"models", "*"})) return on("GET", [&] { return get_model(seg[1]); });
        if (is({"models", "*", "configurations"})) return on("GET", [&] { return configurations(seg[1]); });
        if (is({"models", "*", "utilities"})) return on("POST", [&] { return post_utilities(seg[1]); });
        if (is({"models", "*", "sessions"})) return on("GET", [&] { return list_sessions(seg[1]); });
        if (is({"models", "*", "sessions", "import"})) return on("POST", [&] { return import(seg[1]); });
        if (is({"profiles"})) return on("POST", [&] { return post_profile(); });
        if (is({"sessions"})) return on("POST", [&] { return post_session(); });
        if (is({"sessions", "*"})) return on("GET", [&] { return ok(session_json(store_.session(seg[1]))); });
        if (is({"sessions", "*", "assign"})) return on("POST", [&] { return assign(seg[1]); });
        if (is({"sessions", "*", "complete"})) return on("POST", [&] { return complete(seg[1]); });
        if (is({"sessions", "*", "recommendation", "value"})) return on("GET", [&] { return value_rec(seg[1]); });
        if (is({"sessions", "*", "recommendation", "next"})) return on("GET", [&] { return next_rec(seg[1]); });
        if (is({"sessions", "*", "conflicts"})) return on("GET", [&] { return conflicts(seg[1]); });
        if (is({"sessions", "*", "repairs"})) return on("GET", [&] { return repairs_of(seg[1]); });
        if (is({"mf", "train"})) return on("POST", [&] { return mf_train(); });
        if (is({"mf", "predict"})) return on("GET", [&] { return mf_predict(); });
        throw NotFound("no such endpoint");
    }

private:
    template <class F>
    Response on(const char* method, F&& f) {
        if (req_.method != method) throw MethodNotAllowed(std::string("use ") + method);
        return f();
    }

    static Response ok(json body, int status = 200) { return Response{status, std::move(body)}; }

    Response post_model() {
        auto body = parse_body(req_);
        return ok({{"modelId", store_.add_model(string_field(body, "source"))}}, 201);
    }

    Response get_model(const std::string& id) {
        auto m = store_.model(id);
        json features = json::array(), constraints = json::array();
        for (const auto& f : m->model.features()) features.push_back(f.name);
        auto name = [&](std::size_t v) { return m->task.name(v); };
        for (const auto& c : m->task.model_constraints())
            constraints.push_back({{"label", c.label}, {"formula", c.formula.to_string(name)}});
        return ok({{"modelId", m->id}, {"source", m->source}, {"features", features}, {"constraints", constraints}});
    }

    Response configurations(const std::string& id) {
        auto m = store_.model(id);
        Assignment a(m->task.size());
        if (auto req = query(req_, "require"); req && !req->empty()) {
            for (const auto& item : split(*req, ',')) {
                auto eq = item.find('=');
                if (eq == std::string::npos) throw BadRequest("require items look like feature=0|1");
                auto f = item.substr(0, eq), v = item.substr(eq + 1);
                if (v != "0" && v != "1") throw BadRequest("require values must be 0 or 1");
                auto var = m->task.index_of(f);
                if (a.is_assigned(var) && *a.get(var) != (v == "1"))
                    throw InvalidArgument("feature '" + f + "' required with both values");
                a.set(var, v == "1");
            }
        }
        auto limit = query_int(req_, "limit", static_cast<long long>(default_enumeration_cap));
        if (limit < 1) throw BadRequest("limit must be positive");
        json out = json::array();
        for (const auto& c : m->solver->enumerate(a, {}, static_cast<std::size_t>(limit)))
            out.push_back(values_json(c.named(m->task)));
        return ok({{"configurations", out}});
    }

    Response post_utilities(const std::string& id) {
        auto body = parse_body(req_);
        store_.set_utilities(id, io::parse_utilities(string_field(body, "csv")));
        return ok({{"modelId", id}});
    }

    Response list_sessions(const std::string& id) {
        json out = json::array();
        for (const auto& s : store_.sessions(id))
            out.push_back({{"sessionId", s.id}, {"userId", s.user}, {"status", to_string(s.status)}});
        return ok({{"sessions", out}});
    }

    Response import(const std::string& id) {
        auto body = parse_body(req_);
        auto ids = store_.import_sessions(id, io::parse_sessions(string_field(body, "csv")));
        return ok({{"sessionIds", ids}}, 201);
    }

    Response post_profile() {
        auto body = parse_body(req_);
        auto user = string_field(body, "userId");
        store_.set_profile(io::parse_profile(string_field(body, "csv"), user));
        return ok({{"userId", user}}, 201);
    }

    Response post_session() {
        auto body = parse_body(req_);
        auto model = string_field(body, "modelId");
        auto user = string_field(body, "userId");
        return ok({{"sessionId", store_.create_session(model, user)}}, 201);
    }

    Response assign(const std::string& id) {
        auto body = parse_body(req_);
        auto feature = string_field(body, "feature");
        bool value = value_field(body, "value");
        std::optional<int> rank;
        if (body.contains("rank")) rank = number_field<int>(body, "rank", 0);
        auto r = store_.assign(id, feature, value, rank);
        json forced = json::array();
        for (const auto& [f, v] : r.forced) forced.push_back({{"feature", f}, {"value", v ? 1 : 0}});
        return ok({{"status", to_string(r.status)}, {"forced", forced}});
    }

    Response complete(const std::string& id) { return ok({{"status", to_string(store_.complete(id))}}); }

    // Session state plus its model, refusing inconsistent sessions.
    std::pair<SessionState, std::shared_ptr<const ModelRecord>> consistent_session(const std::string& id) {
        auto s = store_.session(id);
        if (s.status == SessionStatus::inconsistent)
            throw Conflict("session '" + id + "' is inconsistent; resolve its conflicts first");
        return {s, store_.model(s.model)};
    }

    std::vector<SessionLog> neighbours(const SessionState& current) {
        std::vector<SessionLog> logs;
        for (const auto& s : store_.sessions(current.model))
            if (s.id != current.id && s.status == SessionStatus::completed) logs.push_back(s.log());
        return logs;
    }

    Response value_rec(const std::string& id) {
        auto [s, m] = consistent_session(id);
        auto feature = query(req_, "feature");
        if (!feature || feature->empty()) throw BadRequest("query parameter 'feature' is required");
        m->task.index_of(*feature);
        auto k = query_int(req_, "k", 2);
        if (k < 1) throw InvalidArgument("k must be at least 1");
        auto current = s.log();
        current.completed = false;
        auto rec = recommend_value(neighbours(s), current, *feature, static_cast<std::size_t>(k));
        auto partial = Assignment::from_names(m->task, s.requirements());
        auto filtered = consistency_filtered(m->task, partial, rec);
        if (!filtered) throw Conflict("no value of '" + *feature + "' is consistent with the session");
        return ok({{"feature", filtered->feature},
                   {"value", filtered->value ? 1 : 0},
                   {"voteFraction", filtered->vote_fraction},
                   {"neighbors", filtered->neighbors}});
    }

    Response next_rec(const std::string& id) {
        auto [s, m] = consistent_session(id);
        auto current = s.log();
        current.completed = false;
        auto next = recommend_next_feature(neighbours(s), current);
        m->task.index_of(next.item);
        return ok({{"feature", next.item}, {"neighbor", next.neighbor}, {"similarity", next.similarity}});
    }

    Response conflicts(const std::string& id) {
        auto s = store_.session(id);
        auto m = store_.model(s.model);
        auto task = session_task(*m, s, "session");
        std::vector<Formula> bg;
        for (const auto& c : task.model_constraints()) bg.push_back(c.formula);
        json out = json::array();
        for (const auto& cs : all_conflicts(task.size(), bg, task.requirements())) out.push_back(literals_json(cs, task));
        return ok({{"conflicts", out}});
    }

    Response repairs_of(const std::string& id) {
        auto s = store_.session(id);
        auto m = store_.model(s.model);
        auto profile_id = query(req_, "profile");
        if (!profile_id || profile_id->empty()) throw BadRequest("query parameter 'profile' is required");
        auto profile = store_.profile(*profile_id);
        auto table = store_.utilities(m->id);
        auto task = session_task(*m, s, "session");
        auto ds = all_diagnoses(task);
        json out = json::array();
        for (const auto& r : rank_repairs(repairs(task, ds), table, profile))
            out.push_back({{"changes", values_json(r.changes)},
                           {"assignment", values_json(r.assignment)},
                           {"diagnosis", literals_json(ds[r.diagnosis], task)},
                           {"utility", r.utility}});
        return ok({{"repairs", out}});
    }

    Response mf_train() {
        auto body = parse_body(req_);
        auto matrix = io::parse_matrix(string_field(body, "matrixCsv"));
        TrainConfig cfg;
        cfg.k = number_field<int>(body, "k", cfg.k);
        cfg.rate = number_field<double>(body, "rate", cfg.rate);
        cfg.lambda = number_field<double>(body, "lambda", cfg.lambda);
        cfg.epochs = number_field<int>(body, "epochs", cfg.epochs);
        cfg.seed = number_field<std::uint64_t>(body, "seed", cfg.seed);
        auto res = train(matrix, cfg);
        auto job = store_.add_mf_job(res.factors, res.rmse);
        return ok({{"jobId", job}, {"rmse", res.rmse}, {"lossIncreases", res.loss_increases}}, 201);
    }

    Response mf_predict() {
        auto user = query(req_, "user");
        if (!user || user->empty()) throw BadRequest("query parameter 'user' is required");
        MfJob job;
        if (auto id = query(req_, "job")) {
            job = store_.mf_job(*id);
        } else {
            auto latest = store_.latest_mf_job();
            if (!latest) throw NotFound("no trained factors");
            job = *latest;
        }
        const auto& f = job.factors;
        auto it = std::find(f.users.begin(), f.users.end(), *user);
        if (it == f.users.end()) throw NotFound("unknown user '" + *user + "' in job '" + job.id + "'");
        auto scores = predict(f);
        auto row = static_cast<Eigen::Index>(it - f.users.begin());
        json out = json::object();
        for (std::size_t i = 0; i < f.features.size(); ++i) out[f.features[i]] = scores(row, static_cast<Eigen::Index>(i));
        json body{{"jobId", job.id}, {"user", *user}, {"scores", out}};
        if (auto t = query(req_, "threshold")) {
            double th = 0;
            auto [p, ec] = std::from_chars(t->data(), t->data() + t->size(), th);
            if (ec != std::errc() || p != t->data() + t->size()) throw BadRequest("threshold must be a number");
            auto bin = binarize(scores, th);
            json relevant = json::array();
            for (std::size_t i = 0; i < f.features.size(); ++i)
                if (bin(row, static_cast<Eigen::Index>(i))) relevant.push_back(f.features[i]);
            body["relevant"] = relevant;
        }
        return ok(body);
    }

    Store& store_;
    const Request& req_;
};

Response error(int status, const std::string& msg) { return Response{status, {{"error", msg}}}; }

}  // namespace

Response Api::handle(const Request& req) const {
    try {
        return Router(store_, req).route();
    } catch (const BadRequest& e) {
        return error(400, e.what());
    } catch (const NotFound& e) {
        return error(404, e.what());
    } catch (const MethodNotAllowed& e) {
        return error(405, e.what());
    } catch (const Conflict& e) {
        return error(409, e.what());
    } catch (const Error& e) {
        return error(422, e.what());
    } catch (const json::exception& e) {
        return error(400, e.what());
    } catch (const std::exception& e) {
        return error(500, e.what());
    }
}

}  // namespace fmrec::service
