#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fmrec/diagnose.hpp"
#include "fmrec/dsl.hpp"
#include "fmrec/error.hpp"
#include "fmrec/factorize.hpp"
#include "fmrec/io.hpp"
#include "fmrec/recommend.hpp"
#include "fmrec/solver.hpp"

namespace py = pybind11;
using namespace fmrec;

namespace {

using Pairs = std::vector<std::pair<std::string, bool>>;

ConfigurationTask task_with(const std::string& model, const Pairs& require) {
    auto task = translate(parse_model(model));
    std::vector<Requirement> reqs;
    for (const auto& [f, v] : require) reqs.push_back(task.requirement(f, v));
    return task.with_requirements(reqs);
}

py::list literal_list(const std::vector<Requirement>& rs, const ConfigurationTask& task) {
    py::list out;
    for (const auto& r : rs) out.append(py::make_tuple(task.name(r.var), r.value));
    return out;
}

SessionLog current_from(const std::string& csv) {
    auto logs = io::parse_sessions(csv);
    if (logs.size() != 1) throw DataError("current session csv must hold exactly one session");
    logs.front().completed = false;
    return logs.front();
}

py::dict repair_dict(const Repair& r, const std::vector<Diagnosis>& ds, const ConfigurationTask& task) {
    py::dict d;
    d["changes"] = r.changes;
    d["assignment"] = r.assignment;
    d["diagnosis"] = literal_list(ds[r.diagnosis], task);
    d["utility"] = r.utility;
    return d;
}

}  // namespace

PYBIND11_MODULE(_fmrec, m) {
    m.doc() = "Feature-model configuration, recommendation and diagnosis";

    auto base = py::register_exception<Error>(m, "FmrecError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<UnknownName>(m, "UnknownName", base.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<InconsistentBackground>(m, "InconsistentBackground", base.ptr());

    m.def("translate", [](const std::string& model) {
        auto task = translate(parse_model(model));
        auto name = [&](std::size_t v) { return task.name(v); };
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& c : task.model_constraints()) out.emplace_back(c.label, c.formula.to_string(name));
        return out;
    }, py::arg("model"), "Labelled constraints of the model, as (label, formula) pairs.");

    m.def("variables", [](const std::string& model) { return translate(parse_model(model)).variables(); },
          py::arg("model"));

    m.def("enumerate", [](const std::string& model, const Pairs& require, std::size_t limit) {
        auto task = task_with(model, require);
        std::vector<FeatureValues> out;
        for (const auto& c : enumerate(task, limit)) out.push_back(c.named(task));
        return out;
    }, py::arg("model"), py::arg("require") = Pairs{}, py::arg("limit") = default_enumeration_cap);

    m.def("solve", [](const std::string& model, const Pairs& require,
                      const std::map<std::string, double>& scores) -> std::optional<FeatureValues> {
        auto task = task_with(model, require);
        auto c = consistent_completion(task, Assignment(task.size()), scores);
        if (!c) return std::nullopt;
        return c->named(task);
    }, py::arg("model"), py::arg("require") = Pairs{}, py::arg("scores") = std::map<std::string, double>{});

    m.def("propagate", [](const std::string& model, const Pairs& partial) -> std::optional<FeatureValues> {
        auto task = translate(parse_model(model));
        auto p = propagate(task, Assignment::from_names(task, partial));
        if (!p) return std::nullopt;
        return p->named(task);
    }, py::arg("model"), py::arg("partial"), "Unit-propagation fixpoint, or None on a conflict.");

    m.def("overall_utility", [](const FeatureValues& config, const std::string& utilities_csv,
                                const std::string& profile_csv) {
        return overall_utility(config, io::parse_utilities(utilities_csv), io::parse_profile(profile_csv, "user"));
    }, py::arg("config"), py::arg("utilities_csv"), py::arg("profile_csv"));

    m.def("rank", [](const std::vector<FeatureValues>& configs, const std::string& utilities_csv,
                     const std::string& profile_csv) {
        std::vector<std::pair<std::size_t, double>> out;
        for (const auto& r : rank_configurations(configs, io::parse_utilities(utilities_csv),
                                                 io::parse_profile(profile_csv, "user")))
            out.emplace_back(r.index, r.utility);
        return out;
    }, py::arg("configs"), py::arg("utilities_csv"), py::arg("profile_csv"),
       "(index, utility) pairs, best first.");

    m.def("recommend_value", [](const std::string& sessions_csv, const std::string& current_csv,
                                const std::string& feature, std::size_t k) {
        auto rec = recommend_value(io::parse_sessions(sessions_csv), current_from(current_csv), feature, k);
        py::dict d;
        d["feature"] = rec.feature;
        d["value"] = rec.value;
        d["vote_fraction"] = rec.vote_fraction;
        d["neighbors"] = rec.neighbors;
        return d;
    }, py::arg("sessions_csv"), py::arg("current_csv"), py::arg("feature"), py::arg("k") = 2);

    m.def("recommend_next", [](const std::string& sessions_csv, const std::string& current_csv) {
        auto next = recommend_next_feature(io::parse_sessions(sessions_csv), current_from(current_csv));
        return py::make_tuple(next.item, next.neighbor, next.similarity);
    }, py::arg("sessions_csv"), py::arg("current_csv"), "(feature, neighbor, similarity)");

    m.def("rank_similarity", &rank_similarity, py::arg("a"), py::arg("b"));

    m.def("diagnose", [](const std::string& model, const Pairs& require) {
        auto task = task_with(model, require);
        std::vector<Formula> bg;
        for (const auto& c : task.model_constraints()) bg.push_back(c.formula);
        py::list conflicts, diagnoses;
        for (const auto& c : all_conflicts(task.size(), bg, task.requirements()))
            conflicts.append(literal_list(c, task));
        for (const auto& d : all_diagnoses(task)) diagnoses.append(literal_list(d, task));
        py::dict out;
        out["conflicts"] = conflicts;
        out["diagnoses"] = diagnoses;
        return out;
    }, py::arg("model"), py::arg("require"));

    m.def("repairs", [](const std::string& model, const Pairs& require, const std::string& utilities_csv,
                        const std::string& profile_csv) {
        auto task = task_with(model, require);
        auto ds = all_diagnoses(task);
        auto rs = repairs(task, ds);
        if (!utilities_csv.empty())
            rs = rank_repairs(rs, io::parse_utilities(utilities_csv), io::parse_profile(profile_csv, "user"));
        py::list out;
        for (const auto& r : rs) out.append(repair_dict(r, ds, task));
        return out;
    }, py::arg("model"), py::arg("require"), py::arg("utilities_csv") = "", py::arg("profile_csv") = "");

    m.def("predict", py::overload_cast<const Eigen::MatrixXd&, const Eigen::MatrixXd&>(&predict),
          py::arg("user_aspects"), py::arg("aspect_features"));
    m.def("binarize", &binarize, py::arg("scores"), py::arg("threshold"));
    m.def("rmse", &rmse, py::arg("observed"), py::arg("predicted"), "NaN cells are unobserved.");
    m.def("regularized_loss", &regularized_loss, py::arg("observed"), py::arg("user_aspects"),
          py::arg("aspect_features"), py::arg("lam"));
    m.def("loss_gradient", &loss_gradient, py::arg("observed"), py::arg("user_aspects"), py::arg("aspect_features"),
          py::arg("lam"));

    m.def("train", [](const std::string& matrix_csv, int k, double rate, double lam, int epochs, std::uint64_t seed) {
        TrainConfig cfg{k, rate, lam, epochs, seed};
        auto res = train(io::parse_matrix(matrix_csv), cfg);
        py::dict d;
        d["users"] = res.factors.users;
        d["features"] = res.factors.features;
        d["user_aspects"] = res.factors.user_aspects;
        d["aspect_features"] = res.factors.aspect_features;
        d["rmse"] = res.rmse;
        d["loss_history"] = res.loss_history;
        return d;
    }, py::arg("matrix_csv"), py::arg("k") = 2, py::arg("rate") = 0.05, py::arg("lam") = 0.0, py::arg("epochs") = 2000,
       py::arg("seed") = 42);
}
