#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fmrec/error.hpp"
#include "fmrec/factorize.hpp"
#include "fmrec/feature_model.hpp"
#include "fmrec/recommend.hpp"
#include "fmrec/solver.hpp"
#include "fmrec/task.hpp"
#include "json.hpp"

namespace fmrec::service {

/// Referenced id does not exist.
class NotFound : public Error {
public:
    using Error::Error;
};

/// Operation not allowed in the target's current state.
class Conflict : public Error {
public:
    using Error::Error;
};

enum class SessionStatus { open, completed, inconsistent };

std::string to_string(SessionStatus s);

struct ModelRecord {
    std::string id;
    std::string source;
    FeatureModel model;
    ConfigurationTask task;
    std::shared_ptr<const Solver> solver;
    std::int64_t created = 0;
};

struct SessionEvent {
    std::string feature;
    bool value = false;
    int rank = 0;
    std::int64_t timestamp = 0;
};

/// Copy of one session's state.
struct SessionState {
    std::string id;
    std::string model;
    std::string user;
    std::vector<SessionEvent> events;
    SessionStatus status = SessionStatus::open;
    FeatureValues forced;  // implied by propagation, not specified by the user

    /// Latest value per feature.
    FeatureValues values() const;
    /// Rank of the first event per feature.
    std::map<std::string, int> ranks() const;
    /// Specified features in order of first specification, with their
    /// latest values.
    std::vector<std::pair<std::string, bool>> requirements() const;
    SessionLog log() const;
};

struct AssignResult {
    SessionStatus status = SessionStatus::open;
    FeatureValues forced;
};

struct MfJob {
    std::string id;
    FactorPair factors;
    double rmse = 0.0;
    std::int64_t created = 0;
};

/// In-memory state backed by an append-only JSON-lines journal. Each
/// mutation is written and flushed to the journal before it is applied, and
/// constructing a Store on an existing journal replays it.
///
/// Thread-safe. Mutations to one session are serialized; operations on
/// different sessions proceed concurrently.
class Store {
public:
    using Clock = std::function<std::int64_t()>;

    /// An empty path keeps everything in memory.
    explicit Store(std::string journal_path = {}, Clock clock = {});
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    /// Throws ParseError for invalid DSL.
    std::string add_model(const std::string& source);
    std::shared_ptr<const ModelRecord> model(const std::string& id) const;
    std::vector<std::string> model_ids() const;

    void set_utilities(const std::string& model, const UtilityTable& table);
    /// Throws NotFound when no table was stored for the model.
    UtilityTable utilities(const std::string& model) const;

    void set_profile(const InterestProfile& profile);
    InterestProfile profile(const std::string& user) const;

    std::string create_session(const std::string& model, const std::string& user);
    /// Records feature=value with the next server-side rank and re-checks
    /// consistency. A client-supplied rank must equal that next rank.
    AssignResult assign(const std::string& session, const std::string& feature, bool value,
                        std::optional<int> rank = std::nullopt);
    /// Throws Conflict for an inconsistent session.
    SessionStatus complete(const std::string& session);
    SessionState session(const std::string& id) const;
    /// Sessions of `model` in id order.
    std::vector<SessionState> sessions(const std::string& model) const;

    /// Stores completed sessions from logs (e.g. parsed session CSV). Events
    /// follow the logs' rank order and are renumbered 1, 2, ...
    std::vector<std::string> import_sessions(const std::string& model, const std::vector<SessionLog>& logs);

    std::string add_mf_job(const FactorPair& factors, double rmse);
    MfJob mf_job(const std::string& id) const;
    /// Most recently stored job.
    std::optional<MfJob> latest_mf_job() const;

    nlohmann::json snapshot() const;
    /// Hex digest of snapshot().
    std::string state_hash() const;

private:
    struct Session {
        mutable std::mutex mu;
        SessionState state;
    };
    class Journal;

    // Each mutation validates `e`, journals it when `journal` is set, then
    // applies it. Replay runs the same code with `journal` unset.
    std::string do_model(const nlohmann::json& e, bool journal);
    void do_utilities(const nlohmann::json& e, bool journal);
    void do_profile(const nlohmann::json& e, bool journal);
    std::string do_session(const nlohmann::json& e, bool journal);
    AssignResult do_assign(const nlohmann::json& e, bool journal);
    SessionStatus do_complete(const nlohmann::json& e, bool journal);
    std::vector<std::string> do_import(const nlohmann::json& e, bool journal);
    std::string do_mf(const nlohmann::json& e, bool journal);

    void replay(const std::string& path);
    void write(const nlohmann::json& e);
    std::shared_ptr<const ModelRecord> model_locked(const std::string& id) const;
    std::shared_ptr<Session> find_session(const std::string& id) const;
    std::int64_t now() const;

    Clock clock_;
    std::unique_ptr<Journal> journal_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<const ModelRecord>> models_;
    std::map<std::string, UtilityTable> utilities_;
    std::map<std::string, InterestProfile> profiles_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::map<std::string, MfJob> jobs_;
    std::vector<std::string> job_order_;
};

}  // namespace fmrec::service
