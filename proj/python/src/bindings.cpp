#include "msbaco/baco.hpp"
#include "msbaco/config.hpp"
#include "msbaco/correlation.hpp"
#include "msbaco/selector.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace msbaco;

namespace {

ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    ExperimentConfig cfg = parse_config_file(path);
    for (const auto& [key, value] : overrides) apply_setting(cfg, key, value);
    cfg.validate();
    return cfg;
}

BacoConfig baco_config(double alpha, double beta, double rho, int ants, int generations, double tau0) {
    BacoConfig cfg{alpha, beta, rho, ants, generations, tau0};
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hidden-layer model selection with a binary ant colony";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DatasetError>(m, "DatasetError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<BacoFailure>(m, "BacoFailure", PyExc_RuntimeError);

    py::class_<Network>(m, "Network")
        .def(py::init<>())
        .def_readwrite("w", &Network::w)
        .def_readwrite("b0", &Network::b0)
        .def_readwrite("v", &Network::v)
        .def_readwrite("b1", &Network::b1)
        .def_property_readonly("inputs", &Network::inputs)
        .def_property_readonly("hidden", &Network::hidden)
        .def_property_readonly("outputs", &Network::outputs)
        .def("to_json", [](const Network& n) { return nlohmann::json(n).dump(); })
        .def_static("from_json", [](const std::string& s) { return nlohmann::json::parse(s).get<Network>(); })
        .def("__eq__", [](const Network& a, const Network& b) { return a == b; });

    m.def("init_network", &init_network, py::arg("inputs"), py::arg("hidden"), py::arg("outputs"), py::arg("seed"));
    m.def("hidden_activations", &hidden_activations, py::arg("net"), py::arg("x"));
    m.def("forward", &forward, py::arg("net"), py::arg("x"));
    m.def("cross_entropy", &cross_entropy, py::arg("probs"), py::arg("targets"));
    m.def(
        "sgd_epoch",
        [](const Network& net, const Matrix& x, const Matrix& t, double lr, Seed seed) {
            return sgd_epoch(net, x, t, {lr, 1, 1, seed});
        },
        py::arg("net"), py::arg("x"), py::arg("targets"), py::arg("learning_rate") = 0.1, py::arg("seed") = 0);
    m.def(
        "train_with_early_stopping",
        [](const Network& net, const Matrix& xt, const Matrix& tt, const Matrix& xv, const Matrix& tv, double lr,
           int max_epochs, int patience, Seed seed) {
            const TrainResult r = train_with_early_stopping(net, xt, tt, xv, tv, {lr, max_epochs, patience, seed});
            return py::make_tuple(r.net, r.validation_ce, r.epochs_run);
        },
        py::arg("net"), py::arg("x_train"), py::arg("t_train"), py::arg("x_val"), py::arg("t_val"),
        py::arg("learning_rate") = 0.1, py::arg("max_epochs") = 2000, py::arg("patience") = 20, py::arg("seed") = 0);
    m.def("apply_mask", &apply_mask, py::arg("net"), py::arg("mask"), py::arg("x"));
    m.def("prune", &prune, py::arg("net"), py::arg("mask"));
    m.def("predict", &predict, py::arg("probs"));

    m.def("correlation_matrix", &correlation_matrix, py::arg("activations"));
    m.def(
        "total_effect",
        [](const std::function<double(std::vector<double>)>& f, std::size_t factors, std::size_t focal,
           std::vector<std::pair<double, double>> ranges, Seed phase_seed) {
            FactorRanges r;
            if (ranges.empty()) ranges.assign(factors, {0.0, 1.0});
            for (const auto& [lo, hi] : ranges) r.push_back({lo, hi});
            const ScalarModel model = [&](std::span<const double> x) {
                return f(std::vector<double>(x.begin(), x.end()));
            };
            return total_effect(model, EfastPlan::defaults(factors, phase_seed), r, focal);
        },
        py::arg("model"), py::arg("factors"), py::arg("focal"), py::arg("ranges") = std::vector<std::pair<double, double>>{},
        py::arg("phase_seed") = 0);
    m.def(
        "analyze",
        [](const Network& net, const Matrix& x_train, Seed phase_seed) {
            EfastSettings s;
            s.phase_seed = phase_seed;
            return nlohmann::json(analyze(net, x_train, s)).dump();
        },
        py::arg("net"), py::arg("x_train"), py::arg("phase_seed") = 0);

    m.def(
        "build_heuristics",
        [](const std::string& design, const Vector& c, const Matrix& r) {
            const HeuristicMatrix h = build_heuristics(parse_design(design), c, r);
            const std::size_t n = h.eta.nodes();
            py::array_t<double> out({n, std::size_t{2}, n, std::size_t{2}});
            auto view = out.mutable_unchecked<4>();
            for (std::size_t i = 0; i < n; ++i)
                for (int a = 0; a < 2; ++a)
                    for (std::size_t j = 0; j < n; ++j)
                        for (int b = 0; b < 2; ++b)
                            view(static_cast<py::ssize_t>(i), a, static_cast<py::ssize_t>(j), b) =
                                i == j ? 0.0 : h.eta.at(i, a, j, b);
            return out;
        },
        py::arg("design"), py::arg("contributions"), py::arg("correlation"));
    m.def(
        "run_baco",
        [](const Network& net, const Matrix& x_train, const Matrix& x_val, const Matrix& t_val,
           const std::string& design, Seed seed, double alpha, double beta, double rho, int ants, int generations,
           double tau0) {
            const AnalysisReport report = analyze(net, x_train);
            const BacoResult r = run_baco(net, x_val, t_val, report, baco_config(alpha, beta, rho, ants, generations, tau0),
                                          parse_design(design), seed);
            py::list curve;
            for (const auto& g : r.curve) curve.append(py::make_tuple(g.generation, g.best_validation_ce, g.best_objective, g.best_popcount));
            return py::make_tuple(r.best.bits, r.best.validation_ce, curve);
        },
        py::arg("net"), py::arg("x_train"), py::arg("x_val"), py::arg("t_val"), py::arg("design") = "H3",
        py::arg("seed") = 0, py::arg("alpha") = 1.0, py::arg("beta") = 0.6, py::arg("rho") = 0.1, py::arg("ants") = 50,
        py::arg("generations") = 30, py::arg("tau0") = 0.1);

    m.def(
        "termination_check",
        [](std::size_t prev, std::size_t selected, int iteration, int max_iterations) {
            return termination_check(prev, selected, iteration, max_iterations) == LoopDecision::proceed;
        },
        py::arg("prev_width"), py::arg("selected_popcount"), py::arg("iteration") = 1, py::arg("max_iterations") = 20);
    m.def(
        "run_ms_baco",
        [](const std::string& config, const std::map<std::string, std::string>& overrides) {
            const ExperimentConfig cfg = load_config(config, overrides);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_ms_baco(cfg);
            }
            return result_to_json(cfg, r).dump();
        },
        py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{});
    m.def(
        "run_baseline",
        [](const std::string& config, const std::map<std::string, std::string>& overrides) {
            const ExperimentConfig cfg = load_config(config, overrides);
            BaselineResult r;
            {
                py::gil_scoped_release release;
                r = run_baseline(cfg);
            }
            return nlohmann::json{{"final_width", r.width},
                                  {"final_validation_ce", r.validation_ce},
                                  {"epochs", r.epochs},
                                  {"test_accuracy", r.test_accuracy},
                                  {"test_ce", r.test_ce},
                                  {"final_network", r.network}}
                .dump();
        },
        py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{});
}
