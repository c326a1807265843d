#include "fmrec/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>

#include "fmrec/dsl.hpp"
#include "fmrec/io.hpp"

namespace fmrec::service {

using nlohmann::json;

std::string to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::open: return "open";
        case SessionStatus::completed: return "completed";
        case SessionStatus::inconsistent: return "inconsistent";
    }
    return "open";
}

namespace {

template <class Map>
std::string fresh_id(const Map& m, const char* prefix) {
    for (std::size_t n = m.size() + 1;; ++n) {
        std::string id = prefix + std::to_string(n);
        if (!m.count(id)) return id;
    }
}

// Consistency and forced values of the session's specified features.
AssignResult evaluate(const ModelRecord& m, const FeatureValues& values) {
    auto a = Assignment::from_names(m.task, std::vector<std::pair<std::string, bool>>(values.begin(), values.end()));
    AssignResult r;
    if (!m.solver->is_consistent(a)) {
        r.status = SessionStatus::inconsistent;
        return r;
    }
    if (auto p = m.solver->propagate(a))
        for (const auto& l : p->literals())
            if (!a.is_assigned(l.var)) r.forced[m.task.name(l.var)] = l.value;
    return r;
}

json event_json(const SessionEvent& ev) {
    return {{"feature", ev.feature}, {"value", ev.value}, {"rank", ev.rank}, {"ts", ev.timestamp}};
}

}  // namespace

FeatureValues SessionState::values() const {
    FeatureValues v;
    for (const auto& e : events) v[e.feature] = e.value;
    return v;
}

std::map<std::string, int> SessionState::ranks() const {
    std::map<std::string, int> r;
    for (const auto& e : events) r.emplace(e.feature, e.rank);
    return r;
}

std::vector<std::pair<std::string, bool>> SessionState::requirements() const {
    std::vector<std::pair<std::string, bool>> out;
    auto latest = values();
    for (const auto& e : events)
        if (std::none_of(out.begin(), out.end(), [&](const auto& p) { return p.first == e.feature; }))
            out.emplace_back(e.feature, latest.at(e.feature));
    return out;
}

SessionLog SessionState::log() const {
    return SessionLog{id, user, values(), ranks(), status == SessionStatus::completed};
}

class Store::Journal {
public:
    explicit Journal(const std::string& path) : file_(std::fopen(path.c_str(), "a")) {
        if (!file_) throw DataError("cannot open journal '" + path + "' for appending");
    }
    ~Journal() { std::fclose(file_); }

    void append(const json& e) {
        std::lock_guard lock(mu_);
        auto line = e.dump() + "\n";
        if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0)
            throw Error("journal write failed");
        ::fsync(::fileno(file_));
    }

private:
    std::mutex mu_;
    std::FILE* file_;
};

Store::Store(std::string journal_path, Clock clock) : clock_(std::move(clock)) {
    if (journal_path.empty()) return;
    replay(journal_path);
    journal_ = std::make_unique<Journal>(journal_path);
}

Store::~Store() = default;

std::int64_t Store::now() const {
    if (clock_) return clock_();
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void Store::write(const json& e) {
    if (journal_) journal_->append(e);
}

void Store::replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) return;
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(line);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        json e;
        try {
            e = json::parse(lines[i]);
        } catch (const json::parse_error&) {
            // A torn final line is a write that never got acknowledged.
            if (i + 1 == lines.size()) break;
            throw DataError("journal line " + std::to_string(i + 1) + " is not valid JSON");
        }
        try {
            const auto type = e.at("type").get<std::string>();
            if (type == "model") do_model(e, false);
            else if (type == "utilities") do_utilities(e, false);
            else if (type == "profile") do_profile(e, false);
            else if (type == "session") do_session(e, false);
            else if (type == "assign") do_assign(e, false);
            else if (type == "complete") do_complete(e, false);
            else if (type == "import") do_import(e, false);
            else if (type == "mf") do_mf(e, false);
            else throw DataError("unknown event type '" + type + "'");
        } catch (const json::exception& ex) {
            throw DataError("journal line " + std::to_string(i + 1) + ": " + ex.what());
        } catch (const Error& ex) {
            throw DataError("journal line " + std::to_string(i + 1) + ": " + ex.what());
        }
    }
}

std::shared_ptr<const ModelRecord> Store::model_locked(const std::string& id) const {
    auto it = models_.find(id);
    if (it == models_.end()) throw NotFound("unknown model '" + id + "'");
    return it->second;
}

std::shared_ptr<Store::Session> Store::find_session(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
    return it->second;
}

// Models

std::string Store::add_model(const std::string& source) {
    return do_model({{"type", "model"}, {"source", source}, {"ts", now()}}, true);
}

std::string Store::do_model(const json& e, bool journal) {
    auto rec = std::make_shared<ModelRecord>();
    rec->source = e.at("source").get<std::string>();
    rec->model = parse_model(rec->source);
    rec->task = translate(rec->model);
    rec->solver = std::make_shared<const Solver>(rec->task);
    rec->created = e.at("ts").get<std::int64_t>();

    std::unique_lock lock(mu_);
    json ev = e;
    if (!ev.contains("id")) ev["id"] = fresh_id(models_, "m");
    rec->id = ev["id"].get<std::string>();
    if (models_.count(rec->id)) throw Conflict("model '" + rec->id + "' already exists");
    if (journal) write(ev);
    models_[rec->id] = rec;
    return rec->id;
}

std::shared_ptr<const ModelRecord> Store::model(const std::string& id) const {
    std::shared_lock lock(mu_);
    return model_locked(id);
}

std::vector<std::string> Store::model_ids() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : models_) ids.push_back(id);
    return ids;
}

// Utilities and profiles

void Store::set_utilities(const std::string& model, const UtilityTable& table) {
    do_utilities({{"type", "utilities"}, {"model", model}, {"csv", io::utilities_to_csv(table)}}, true);
}

void Store::do_utilities(const json& e, bool journal) {
    auto table = io::parse_utilities(e.at("csv").get<std::string>());
    auto model = e.at("model").get<std::string>();
    std::unique_lock lock(mu_);
    model_locked(model);
    if (journal) write(e);
    utilities_[model] = std::move(table);
}

UtilityTable Store::utilities(const std::string& model) const {
    std::shared_lock lock(mu_);
    model_locked(model);
    auto it = utilities_.find(model);
    if (it == utilities_.end()) throw NotFound("no utilities stored for model '" + model + "'");
    return it->second;
}

void Store::set_profile(const InterestProfile& profile) {
    do_profile({{"type", "profile"}, {"user", profile.user}, {"csv", io::profile_to_csv(profile)}}, true);
}

void Store::do_profile(const json& e, bool journal) {
    auto user = e.at("user").get<std::string>();
    if (user.empty()) throw InvalidArgument("profile needs a user id");
    auto p = io::parse_profile(e.at("csv").get<std::string>(), user);
    std::unique_lock lock(mu_);
    if (journal) write(e);
    profiles_[user] = std::move(p);
}

InterestProfile Store::profile(const std::string& user) const {
    std::shared_lock lock(mu_);
    auto it = profiles_.find(user);
    if (it == profiles_.end()) throw NotFound("unknown profile '" + user + "'");
    return it->second;
}

// Sessions

std::string Store::create_session(const std::string& model, const std::string& user) {
    return do_session({{"type", "session"}, {"model", model}, {"user", user}, {"ts", now()}}, true);
}

std::string Store::do_session(const json& e, bool journal) {
    auto s = std::make_shared<Session>();
    s->state.model = e.at("model").get<std::string>();
    s->state.user = e.at("user").get<std::string>();
    std::unique_lock lock(mu_);
    auto m = model_locked(s->state.model);
    json ev = e;
    if (!ev.contains("id")) ev["id"] = fresh_id(sessions_, "s");
    s->state.id = ev["id"].get<std::string>();
    if (sessions_.count(s->state.id)) throw Conflict("session '" + s->state.id + "' already exists");
    s->state.forced = evaluate(*m, {}).forced;
    if (journal) write(ev);
    sessions_[s->state.id] = s;
    return s->state.id;
}

AssignResult Store::assign(const std::string& session, const std::string& feature, bool value, std::optional<int> rank) {
    json e{{"type", "assign"}, {"session", session}, {"feature", feature}, {"value", value}, {"ts", now()}};
    if (rank) e["rank"] = *rank;
    return do_assign(e, true);
}

AssignResult Store::do_assign(const json& e, bool journal) {
    auto s = find_session(e.at("session").get<std::string>());
    // The model id is fixed at creation, and mu_ must not be taken while a
    // session lock is held.
    auto m = model(s->state.model);
    std::lock_guard lock(s->mu);
    auto& st = s->state;
    if (st.status == SessionStatus::completed) throw Conflict("session '" + st.id + "' is completed");
    SessionEvent ev{e.at("feature").get<std::string>(), e.at("value").get<bool>(), 0, e.at("ts").get<std::int64_t>()};
    m->task.index_of(ev.feature);
    int next = st.events.empty() ? 1 : st.events.back().rank + 1;
    if (e.contains("rank")) {
        int r = e["rank"].get<int>();
        if (r < next) throw InvalidArgument("rank regression: got " + std::to_string(r) + ", next is " + std::to_string(next));
        if (r > next) throw InvalidArgument("rank gap: got " + std::to_string(r) + ", next is " + std::to_string(next));
    }
    ev.rank = next;
    auto values = st.values();
    values[ev.feature] = ev.value;
    auto result = evaluate(*m, values);
    if (journal) {
        json out = e;
        out["rank"] = next;
        write(out);
    }
    st.events.push_back(ev);
    st.status = result.status;
    st.forced = result.forced;
    return result;
}

SessionStatus Store::complete(const std::string& session) {
    return do_complete({{"type", "complete"}, {"session", session}, {"ts", now()}}, true);
}

SessionStatus Store::do_complete(const json& e, bool journal) {
    auto s = find_session(e.at("session").get<std::string>());
    std::lock_guard lock(s->mu);
    if (s->state.status == SessionStatus::inconsistent)
        throw Conflict("session '" + s->state.id + "' is inconsistent and cannot be completed");
    if (s->state.status == SessionStatus::completed) return SessionStatus::completed;
    if (journal) write(e);
    s->state.status = SessionStatus::completed;
    return s->state.status;
}

SessionState Store::session(const std::string& id) const {
    auto s = find_session(id);
    std::lock_guard lock(s->mu);
    return s->state;
}

std::vector<SessionState> Store::sessions(const std::string& model) const {
    std::vector<std::shared_ptr<Session>> found;
    {
        std::shared_lock lock(mu_);
        model_locked(model);
        for (const auto& [id, s] : sessions_) found.push_back(s);
    }
    std::vector<SessionState> out;
    for (const auto& s : found) {
        std::lock_guard lock(s->mu);
        if (s->state.model == model) out.push_back(s->state);
    }
    return out;
}

std::vector<std::string> Store::import_sessions(const std::string& model, const std::vector<SessionLog>& logs) {
    const auto ts = now();
    json sessions = json::array();
    for (const auto& log : logs) {
        std::vector<std::pair<int, std::string>> order;
        for (const auto& [f, r] : log.ranks) order.emplace_back(r, f);
        std::sort(order.begin(), order.end());
        for (const auto& [f, v] : log.values)
            if (!log.ranks.count(f)) order.emplace_back(std::numeric_limits<int>::max(), f);
        json events = json::array();
        int rank = 0;
        for (const auto& [r, f] : order) {
            auto v = log.values.find(f);
            if (v == log.values.end())
                throw InvalidArgument("session '" + log.session + "' ranks '" + f + "' without a value");
            events.push_back(event_json(SessionEvent{f, v->second, ++rank, ts}));
        }
        sessions.push_back({{"id", log.session}, {"user", log.user}, {"events", events}});
    }
    return do_import({{"type", "import"}, {"model", model}, {"sessions", sessions}}, true);
}

std::vector<std::string> Store::do_import(const json& e, bool journal) {
    std::unique_lock lock(mu_);
    auto m = model_locked(e.at("model").get<std::string>());
    std::vector<std::shared_ptr<Session>> made;
    for (const auto& js : e.at("sessions")) {
        auto s = std::make_shared<Session>();
        auto& st = s->state;
        st.id = js.at("id").get<std::string>();
        st.model = m->id;
        st.user = js.at("user").get<std::string>();
        if (st.id.empty()) throw InvalidArgument("imported session without an id");
        if (sessions_.count(st.id) ||
            std::any_of(made.begin(), made.end(), [&](const auto& o) { return o->state.id == st.id; }))
            throw Conflict("session '" + st.id + "' already exists");
        for (const auto& je : js.at("events")) {
            SessionEvent ev{je.at("feature").get<std::string>(), je.at("value").get<bool>(), je.at("rank").get<int>(),
                            je.at("ts").get<std::int64_t>()};
            m->task.index_of(ev.feature);
            st.events.push_back(ev);
        }
        auto r = evaluate(*m, st.values());
        if (r.status == SessionStatus::inconsistent)
            throw InvalidArgument("imported session '" + st.id + "' is inconsistent with the model");
        st.forced = r.forced;
        st.status = SessionStatus::completed;
        made.push_back(s);
    }
    if (journal) write(e);
    std::vector<std::string> ids;
    for (auto& s : made) {
        ids.push_back(s->state.id);
        sessions_[s->state.id] = s;
    }
    return ids;
}

// Matrix-factorization jobs

std::string Store::add_mf_job(const FactorPair& factors, double rmse) {
    return do_mf({{"type", "mf"}, {"factors", json::parse(io::factors_to_json(factors))}, {"rmse", rmse}, {"ts", now()}},
                 true);
}

std::string Store::do_mf(const json& e, bool journal) {
    MfJob job;
    job.factors = io::parse_factors(e.at("factors").dump());
    job.rmse = e.at("rmse").get<double>();
    job.created = e.at("ts").get<std::int64_t>();
    std::unique_lock lock(mu_);
    json ev = e;
    if (!ev.contains("id")) ev["id"] = fresh_id(jobs_, "j");
    job.id = ev["id"].get<std::string>();
    if (jobs_.count(job.id)) throw Conflict("job '" + job.id + "' already exists");
    if (journal) write(ev);
    job_order_.push_back(job.id);
    jobs_[job.id] = std::move(job);
    return job_order_.back();
}

MfJob Store::mf_job(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw NotFound("unknown job '" + id + "'");
    return it->second;
}

std::optional<MfJob> Store::latest_mf_job() const {
    std::shared_lock lock(mu_);
    if (job_order_.empty()) return std::nullopt;
    return jobs_.at(job_order_.back());
}

// State digest

json Store::snapshot() const {
    std::shared_lock lock(mu_);
    json models = json::object(), utilities = json::object(), profiles = json::object(), sessions = json::object(),
         jobs = json::object();
    for (const auto& [id, m] : models_) models[id] = {{"source", m->source}, {"created", m->created}};
    for (const auto& [id, t] : utilities_) utilities[id] = io::utilities_to_csv(t);
    for (const auto& [id, p] : profiles_) profiles[id] = io::profile_to_csv(p);
    for (const auto& [id, s] : sessions_) {
        std::lock_guard sl(s->mu);
        json events = json::array();
        for (const auto& ev : s->state.events) events.push_back(event_json(ev));
        sessions[id] = {{"model", s->state.model},
                        {"user", s->state.user},
                        {"status", to_string(s->state.status)},
                        {"forced", s->state.forced},
                        {"events", events}};
    }
    for (const auto& [id, j] : jobs_)
        jobs[id] = {{"factors", json::parse(io::factors_to_json(j.factors))}, {"rmse", j.rmse}, {"created", j.created}};
    return {{"models", models}, {"utilities", utilities}, {"profiles", profiles}, {"sessions", sessions},
            {"jobs", jobs}, {"jobOrder", job_order_}};
}

std::string Store::state_hash() const {
    // FNV-1a over the canonical dump; object keys are sorted by the JSON
    // library, so equal states hash equally.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : snapshot().dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fmrec::service
