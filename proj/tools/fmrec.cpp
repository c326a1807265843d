// fmrec command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 infeasible.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "fmrec/api.hpp"
#include "fmrec/diagnose.hpp"
#include "fmrec/dsl.hpp"
#include "fmrec/error.hpp"
#include "fmrec/factorize.hpp"
#include "fmrec/http.hpp"
#include "fmrec/io.hpp"
#include "fmrec/recommend.hpp"
#include "fmrec/solver.hpp"
#include "fmrec/store.hpp"
#include "json.hpp"

using namespace fmrec;
using nlohmann::json;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_infeasible = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    bool json = false;
};

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

json values_json(const FeatureValues& v) {
    json out = json::object();
    for (const auto& [f, b] : v) out[f] = b ? 1 : 0;
    return out;
}

std::vector<std::pair<std::string, bool>> parse_requirements(const std::vector<std::string>& items) {
    std::vector<std::pair<std::string, bool>> out;
    for (const auto& item : items) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--require expects feature=0|1, got '" + item + "'");
        auto v = item.substr(eq + 1);
        if (v != "0" && v != "1") throw UsageError("--require value must be 0 or 1, got '" + item + "'");
        out.emplace_back(item.substr(0, eq), v == "1");
    }
    return out;
}

ConfigurationTask load_task(const std::string& path, const std::vector<std::string>& require) {
    auto task = translate(parse_model(io::read_file(path)));
    std::vector<Requirement> reqs;
    for (const auto& [f, v] : parse_requirements(require)) reqs.push_back(task.requirement(f, v, "cli"));
    return task.with_requirements(reqs);
}

// Features as rows, configurations as columns.
void print_configurations(const ConfigurationTask& task, const std::vector<Configuration>& configs,
                          const std::vector<std::string>& headers = {}) {
    std::size_t width = 7;
    for (const auto& n : task.variables()) width = std::max(width, n.size());
    std::cout << std::left << std::setw(static_cast<int>(width)) << "feature";
    for (std::size_t i = 0; i < configs.size(); ++i)
        std::cout << "  " << (headers.empty() ? "C" + std::to_string(i + 1) : headers[i]);
    std::cout << "\n";
    for (std::size_t v = 0; v < task.size(); ++v) {
        std::cout << std::setw(static_cast<int>(width)) << task.name(v);
        for (std::size_t i = 0; i < configs.size(); ++i) {
            auto h = headers.empty() ? "C" + std::to_string(i + 1) : headers[i];
            std::cout << "  " << std::setw(static_cast<int>(h.size())) << (configs[i][v] ? "1" : "0");
        }
        std::cout << "\n";
    }
}

std::vector<InterestProfile> load_profiles(const std::vector<std::string>& paths) {
    std::vector<InterestProfile> out;
    for (const auto& p : paths) {
        auto stem = std::filesystem::path(p).stem().string();
        out.push_back(io::parse_profile(io::read_file(p), stem));
    }
    return out;
}

std::string literal_list(const std::vector<Requirement>& rs, const ConfigurationTask& task) {
    std::string out;
    for (const auto& r : rs) out += (out.empty() ? "" : ", ") + task.name(r.var) + "=" + (r.value ? "1" : "0");
    return "{" + out + "}";
}

json literal_json(const std::vector<Requirement>& rs, const ConfigurationTask& task) {
    json out = json::array();
    for (const auto& r : rs) out.push_back({{"feature", task.name(r.var)}, {"value", r.value ? 1 : 0}});
    return out;
}

// Current session: either its own file, or picked out of the log file.
std::pair<std::vector<SessionLog>, SessionLog> load_sessions(const std::string& sessions_path,
                                                             const std::string& current_path,
                                                             const std::string& current_id) {
    auto logs = io::parse_sessions(io::read_file(sessions_path));
    SessionLog current;
    if (!current_path.empty()) {
        auto cur = io::parse_sessions(io::read_file(current_path));
        if (cur.size() != 1) throw DataError("current-session file must hold exactly one session");
        current = cur.front();
    } else {
        auto it = std::find_if(logs.begin(), logs.end(), [&](const SessionLog& l) { return l.session == current_id; });
        if (it == logs.end()) throw DataError("no session '" + current_id + "' in " + sessions_path);
        current = *it;
        logs.erase(it);
    }
    current.completed = false;
    return {logs, current};
}

// Commands

int cmd_translate(const Common& c, const std::string& model) {
    auto task = translate(parse_model(io::read_file(model)));
    auto name = [&](std::size_t v) { return task.name(v); };
    if (c.json) {
        json cs = json::array();
        for (const auto& mc : task.model_constraints()) cs.push_back({{"label", mc.label}, {"formula", mc.formula.to_string(name)}});
        emit({{"variables", task.variables()}, {"constraints", cs}});
    } else {
        for (std::size_t i = 0; i < task.model_constraints().size(); ++i) {
            const auto& mc = task.model_constraints()[i];
            std::cout << "c" << i << "  " << mc.label << "  " << mc.formula.to_string(name) << "\n";
        }
    }
    return 0;
}

int cmd_solve(const Common& c, const std::string& model, const std::vector<std::string>& require,
              const std::vector<std::string>& scores) {
    auto task = load_task(model, require);
    std::map<std::string, double> sc;
    for (const auto& s : scores) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--score expects feature=number");
        try {
            sc[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError("--score expects feature=number, got '" + s + "'");
        }
    }
    auto cfg = consistent_completion(task, Assignment(task.size()), sc);
    if (!cfg) throw Infeasible("no configuration satisfies the model and requirements");
    if (c.json) {
        emit({{"configuration", values_json(cfg->named(task))}});
    } else {
        print_configurations(task, {*cfg});
    }
    return 0;
}

int cmd_enumerate(const Common& c, const std::string& model, const std::vector<std::string>& require, std::size_t limit) {
    auto task = load_task(model, require);
    auto all = enumerate(task, limit);
    if (all.empty()) throw Infeasible("no configuration satisfies the model and requirements");
    if (c.json) {
        json out = json::array();
        for (const auto& cfg : all) out.push_back(values_json(cfg.named(task)));
        emit({{"count", all.size()}, {"configurations", out}});
    } else {
        print_configurations(task, all);
        std::cout << all.size() << " configuration(s)\n";
    }
    return 0;
}

int cmd_rank(const Common& c, const std::string& model, const std::vector<std::string>& require,
             const std::string& utilities, const std::vector<std::string>& profile_paths, std::size_t limit) {
    auto task = load_task(model, require);
    auto table = io::parse_utilities(io::read_file(utilities));
    auto profiles = load_profiles(profile_paths);
    auto all = enumerate(task, limit);
    if (all.empty()) throw Infeasible("no configuration satisfies the model and requirements");
    std::vector<FeatureValues> named;
    for (const auto& cfg : all) named.push_back(cfg.named(task));

    // Mean over profiles; one profile reduces to plain overall utility.
    std::vector<RankedConfiguration> ranked;
    for (std::size_t i = 0; i < named.size(); ++i) ranked.push_back({i, group_utility(named[i], table, profiles)});
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.utility > b.utility; });

    if (c.json) {
        json out = json::array();
        for (const auto& r : ranked) {
            json per = json::object();
            for (const auto& p : profiles) per[p.user] = overall_utility(named[r.index], table, p);
            out.push_back({{"configuration", values_json(named[r.index])}, {"utility", r.utility}, {"perProfile", per}});
        }
        emit({{"ranking", out}});
    } else {
        std::vector<Configuration> cols;
        std::vector<std::string> headers;
        for (const auto& r : ranked) {
            cols.push_back(all[r.index]);
            std::ostringstream h;
            h << "C" << r.index + 1 << "(" << std::fixed << std::setprecision(2) << r.utility << ")";
            headers.push_back(h.str());
        }
        print_configurations(task, cols, headers);
    }
    return 0;
}

int cmd_recommend_value(const Common& c, const std::string& sessions, const std::string& current_path,
                        const std::string& current_id, const std::string& feature, std::size_t k,
                        const std::string& model) {
    auto [logs, current] = load_sessions(sessions, current_path, current_id);
    auto rec = recommend_value(logs, current, feature, k);
    if (!model.empty()) {
        auto task = translate(parse_model(io::read_file(model)));
        std::vector<std::pair<std::string, bool>> vals(current.values.begin(), current.values.end());
        auto filtered = consistency_filtered(task, Assignment::from_names(task, vals), rec);
        if (!filtered) throw Infeasible("no value of '" + feature + "' is consistent with the current session");
        rec = *filtered;
    }
    if (c.json) {
        emit({{"feature", rec.feature}, {"value", rec.value ? 1 : 0}, {"voteFraction", rec.vote_fraction},
              {"neighbors", rec.neighbors}});
    } else {
        std::string nb;
        for (const auto& n : rec.neighbors) nb += (nb.empty() ? "" : ", ") + n;
        std::cout << rec.feature << " = " << (rec.value ? 1 : 0) << "  (vote " << rec.vote_fraction << ", neighbors "
                  << nb << ")\n";
    }
    return 0;
}

int cmd_recommend_next(const Common& c, const std::string& sessions, const std::string& current_path,
                       const std::string& current_id, bool constraints) {
    auto [logs, current] = load_sessions(sessions, current_path, current_id);
    NextItem next;
    if (constraints) {
        std::vector<EditLog> edits;
        for (const auto& l : logs) edits.push_back({l.session, l.ranks});
        next = recommend_next_constraint(edits, EditLog{current.session, current.ranks});
    } else {
        next = recommend_next_feature(logs, current);
    }
    if (c.json) {
        emit({{constraints ? "constraint" : "feature", next.item}, {"neighbor", next.neighbor}, {"similarity", next.similarity}});
    } else {
        std::cout << next.item << "  (from " << next.neighbor << ", similarity " << next.similarity << ")\n";
    }
    return 0;
}

int cmd_diagnose(const Common& c, const std::string& model, const std::vector<std::string>& require) {
    auto task = load_task(model, require);
    std::vector<Formula> bg;
    for (const auto& mc : task.model_constraints()) bg.push_back(mc.formula);
    auto conflicts = all_conflicts(task.size(), bg, task.requirements());
    auto ds = all_diagnoses(task);
    if (c.json) {
        json cs = json::array(), dj = json::array();
        for (const auto& x : conflicts) cs.push_back(literal_json(x, task));
        for (const auto& d : ds) dj.push_back(literal_json(d, task));
        emit({{"consistent", ds.empty()}, {"conflicts", cs}, {"diagnoses", dj}});
    } else if (ds.empty()) {
        std::cout << "requirements are consistent with the model\n";
    } else {
        for (const auto& x : conflicts) std::cout << "conflict   " << literal_list(x, task) << "\n";
        for (const auto& d : ds) std::cout << "diagnosis  " << literal_list(d, task) << "\n";
    }
    return 0;
}

int cmd_repairs(const Common& c, const std::string& model, const std::vector<std::string>& require,
                const std::string& utilities, const std::string& profile) {
    if (utilities.empty() != profile.empty()) throw UsageError("--utilities and --profile go together");
    auto task = load_task(model, require);
    auto ds = all_diagnoses(task);
    auto rs = repairs(task, ds);
    if (!utilities.empty())
        rs = rank_repairs(rs, io::parse_utilities(io::read_file(utilities)), load_profiles({profile}).front());
    if (c.json) {
        json out = json::array();
        for (const auto& r : rs) {
            json item{{"changes", values_json(r.changes)}, {"assignment", values_json(r.assignment)},
                      {"diagnosis", literal_json(ds[r.diagnosis], task)}};
            if (!utilities.empty()) item["utility"] = r.utility;
            out.push_back(item);
        }
        emit({{"repairs", out}});
    } else if (rs.empty()) {
        std::cout << "nothing to repair\n";
    } else {
        for (std::size_t i = 0; i < rs.size(); ++i) {
            std::string ch;
            for (const auto& [f, v] : rs[i].changes) ch += (ch.empty() ? "" : ", ") + f + "=" + (v ? "1" : "0");
            std::cout << "alt " << i + 1 << "  {" << ch << "}";
            if (!utilities.empty()) std::cout << "  utility " << rs[i].utility;
            std::cout << "\n";
        }
    }
    return 0;
}

int cmd_mf_train(const Common& c, const std::string& matrix, const TrainConfig& cfg, const std::string& out) {
    auto m = io::parse_matrix(io::read_file(matrix));
    auto res = train(m, cfg);
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw DataError("cannot write '" + out + "'");
        f << io::factors_to_json(res.factors);
    }
    if (c.json) {
        emit({{"rmse", res.rmse},
              {"finalLoss", res.loss_history.back()},
              {"lossIncreases", res.loss_increases},
              {"factors", json::parse(io::factors_to_json(res.factors))}});
    } else {
        std::cout << "rmse " << res.rmse << "  final loss " << res.loss_history.back() << "  loss increases "
                  << res.loss_increases << "\n";
        if (!out.empty()) std::cout << "factors written to " << out << "\n";
    }
    return 0;
}

int cmd_mf_predict(const Common& c, const std::string& factors, const std::string& user,
                   const std::optional<double>& threshold, const std::vector<std::string>& candidates) {
    auto f = io::parse_factors(io::read_file(factors));
    auto scores = predict(f);
    std::vector<std::string> users = f.users;
    if (!user.empty()) {
        if (std::find(users.begin(), users.end(), user) == users.end()) throw DataError("unknown user '" + user + "'");
        users = {user};
    }
    const auto& cand = candidates.empty() ? f.features : candidates;
    json out = json::object();
    for (const auto& u : users) {
        auto ranking = relevance_ranking(scores, f.users, f.features, u, cand);
        if (c.json) {
            json row = json::array();
            for (const auto& s : ranking) {
                json item{{"feature", s.feature}, {"score", s.score}};
                if (threshold) item["relevant"] = s.score >= *threshold ? 1 : 0;
                row.push_back(item);
            }
            out[u] = row;
        } else {
            std::cout << u << ":";
            for (const auto& s : ranking) {
                std::cout << "  " << s.feature << "=";
                if (threshold)
                    std::cout << (s.score >= *threshold ? 1 : 0);
                else
                    std::cout << std::fixed << std::setprecision(2) << s.score << std::defaultfloat;
            }
            std::cout << "\n";
        }
    }
    if (c.json) emit({{"predictions", out}});
    return 0;
}

service::HttpServer* running_server = nullptr;

void on_signal(int) {
    if (running_server) running_server->stop();
}

int cmd_serve(const std::string& host, int port, const std::string& journal) {
    service::Store store(journal);
    service::Api api(store);
    service::HttpServer server(api);
    int bound = server.bind(host, port);
    if (bound < 0) throw DataError("cannot bind " + host + ":" + std::to_string(port));
    running_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "serving /api/v1 on http://" << host << ":" << bound << "\n";
    server.listen();
    running_server = nullptr;
    return 0;
}

int cmd_import(const Common& c, const std::string& journal, const std::string& model_id, const std::string& model_file,
               const std::string& sessions) {
    if (model_id.empty() == model_file.empty()) throw UsageError("give exactly one of --model-id and --model");
    auto logs = io::parse_sessions(io::read_file(sessions));
    service::Store store(journal);
    auto id = model_id.empty() ? store.add_model(io::read_file(model_file)) : model_id;
    auto ids = store.import_sessions(id, logs);
    if (c.json) {
        emit({{"modelId", id}, {"sessionIds", ids}});
    } else {
        std::cout << "imported " << ids.size() << " session(s) into model " << id << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature-model configuration, recommendation and diagnosis"};
    app.require_subcommand(1);
    Common common;
    auto json_flag = [&](CLI::App* sub) { sub->add_flag("--json", common.json, "Machine-readable JSON output"); };

    std::string model, utilities, sessions, current, current_id = "current", feature, matrix, out, factors, user,
                                                                     host = "127.0.0.1", journal, model_id;
    std::vector<std::string> require, scores, profiles, candidates;
    std::size_t limit = default_enumeration_cap, k = 2;
    bool constraints = false;
    int port = 8080;
    TrainConfig cfg;
    std::optional<double> threshold;

    auto* translate_cmd = app.add_subcommand("translate", "Print the constraint translation of a model");
    translate_cmd->add_option("model", model, "Model file")->required();
    json_flag(translate_cmd);

    auto* solve_cmd = app.add_subcommand("solve", "Find one configuration");
    solve_cmd->add_option("model", model, "Model file")->required();
    solve_cmd->add_option("--require,-r", require, "Requirement feature=0|1");
    solve_cmd->add_option("--score", scores, "Preference score feature=s in [0,1]");
    json_flag(solve_cmd);

    auto* enum_cmd = app.add_subcommand("enumerate", "List configurations");
    enum_cmd->add_option("model", model, "Model file")->required();
    enum_cmd->add_option("--require,-r", require, "Requirement feature=0|1");
    enum_cmd->add_option("--limit", limit, "Maximum number of configurations")->check(CLI::PositiveNumber);
    json_flag(enum_cmd);

    auto* rank_cmd = app.add_subcommand("rank", "Rank configurations by utility");
    rank_cmd->add_option("model", model, "Model file")->required();
    rank_cmd->add_option("--require,-r", require, "Requirement feature=0|1");
    rank_cmd->add_option("--utilities", utilities, "Utility CSV")->required();
    rank_cmd->add_option("--profile", profiles, "Profile CSV; several are averaged")->required();
    rank_cmd->add_option("--limit", limit, "Maximum number of configurations")->check(CLI::PositiveNumber);
    json_flag(rank_cmd);

    auto* value_cmd = app.add_subcommand("recommend-value", "Recommend a feature value from similar sessions");
    value_cmd->add_option("--sessions", sessions, "Session-log CSV")->required();
    value_cmd->add_option("--current", current, "Current-session CSV");
    value_cmd->add_option("--current-id", current_id, "Current session id inside --sessions");
    value_cmd->add_option("--feature", feature, "Feature to recommend a value for")->required();
    value_cmd->add_option("--k", k, "Number of neighbours")->check(CLI::PositiveNumber);
    value_cmd->add_option("--model", model, "Model file; enables the consistency filter");
    json_flag(value_cmd);

    auto* next_cmd = app.add_subcommand("recommend-next", "Recommend the next feature or constraint");
    next_cmd->add_option("--sessions", sessions, "Session-log CSV")->required();
    next_cmd->add_option("--current", current, "Current-session CSV");
    next_cmd->add_option("--current-id", current_id, "Current session id inside --sessions");
    next_cmd->add_flag("--constraints", constraints, "Items are constraints of an edit log");
    json_flag(next_cmd);

    auto* diag_cmd = app.add_subcommand("diagnose", "Minimal conflicts and diagnoses of requirements");
    diag_cmd->add_option("model", model, "Model file")->required();
    diag_cmd->add_option("--require,-r", require, "Requirement feature=0|1");
    json_flag(diag_cmd);

    auto* rep_cmd = app.add_subcommand("repairs", "Repair alternatives for inconsistent requirements");
    rep_cmd->add_option("model", model, "Model file")->required();
    rep_cmd->add_option("--require,-r", require, "Requirement feature=0|1");
    rep_cmd->add_option("--utilities", utilities, "Utility CSV for ranking");
    std::string profile;
    rep_cmd->add_option("--profile", profile, "Profile CSV for ranking");
    json_flag(rep_cmd);

    auto* train_cmd = app.add_subcommand("mf-train", "Learn factor matrices from an interaction matrix");
    train_cmd->add_option("--matrix", matrix, "Interaction matrix CSV")->required();
    train_cmd->add_option("--k", cfg.k, "Latent dimension");
    train_cmd->add_option("--rate", cfg.rate, "Learning rate");
    train_cmd->add_option("--lambda", cfg.lambda, "Regularization weight");
    train_cmd->add_option("--epochs", cfg.epochs, "Epochs");
    train_cmd->add_option("--seed", cfg.seed, "Random seed");
    train_cmd->add_option("--out", out, "Write factors JSON here");
    json_flag(train_cmd);

    auto* pred_cmd = app.add_subcommand("mf-predict", "Predict relevance from factor matrices");
    pred_cmd->add_option("--factors", factors, "Factors JSON")->required();
    pred_cmd->add_option("--user", user, "Only this user");
    pred_cmd->add_option("--threshold", threshold, "Binarize at this threshold");
    pred_cmd->add_option("--candidates", candidates, "Candidate features")->delimiter(',');
    json_flag(pred_cmd);

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--journal", journal, "Journal file; in-memory when omitted");

    auto* import_cmd = app.add_subcommand("import-sessions", "Import session logs into a store journal");
    import_cmd->add_option("sessions", sessions, "Session-log CSV")->required();
    import_cmd->add_option("--journal", journal, "Journal file")->required();
    import_cmd->add_option("--model-id", model_id, "Existing model id");
    import_cmd->add_option("--model", model, "Model file to store first");
    json_flag(import_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*translate_cmd) return cmd_translate(common, model);
        if (*solve_cmd) return cmd_solve(common, model, require, scores);
        if (*enum_cmd) return cmd_enumerate(common, model, require, limit);
        if (*rank_cmd) return cmd_rank(common, model, require, utilities, profiles, limit);
        if (*value_cmd) return cmd_recommend_value(common, sessions, current, current_id, feature, k, model);
        if (*next_cmd) return cmd_recommend_next(common, sessions, current, current_id, constraints);
        if (*diag_cmd) return cmd_diagnose(common, model, require);
        if (*rep_cmd) return cmd_repairs(common, model, require, utilities, profile);
        if (*train_cmd) return cmd_mf_train(common, matrix, cfg, out);
        if (*pred_cmd) return cmd_mf_predict(common, factors, user, threshold, candidates);
        if (*serve_cmd) return cmd_serve(host, port, journal);
        if (*import_cmd) return cmd_import(common, journal, model_id, model, sessions);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Infeasible& e) {
        if (common.json) emit({{"error", e.what()}, {"infeasible", true}});
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const std::exception& e) {
        if (common.json) emit({{"error", e.what()}});
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
    return exit_usage;
}
