#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "strusr/attribution.hpp"
#include "strusr/bench.hpp"
#include "strusr/expr_text.hpp"
#include "strusr/gp.hpp"
#include "strusr/pde.hpp"
#include "strusr/pinn.hpp"
#include "strusr/prior.hpp"
#include "strusr/simplify.hpp"

namespace py = pybind11;
using namespace strusr;

namespace {

PointSet to_points(std::size_t dim, const std::vector<std::vector<double>>& pts)
{
    return PointSet::from_points(dim, pts);
}

GpConfig config_from(const std::string& overrides)
{
    GpConfig cfg;
    if (!overrides.empty()) cfg.apply_json(nlohmann::json::parse(overrides));
    cfg.validate();
    return cfg;
}

TaylorPrior analytic_prior(const std::string& problem_name, std::size_t anchors, int order, std::uint64_t seed)
{
    const PdeProblem& p = find_problem(problem_name);
    if (!p.ground_truth) throw std::invalid_argument(p.name + " has no ground truth");
    GpConfig gp;
    gp.anchors = anchors;
    gp.taylor_order = order;
    return build_prior(p, ExprSource(*p.ground_truth), PriorSource::AnalyticOracle, seed, gp);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Structure-guided symbolic regression for PDE solutions";

    py::class_<Expr>(m, "Expr")
        .def("__str__", [](const Expr& e) { return to_string(e); })
        .def("__repr__", [](const Expr& e) { return "Expr('" + to_string(e) + "')"; })
        .def("size", &Expr::size)
        .def("depth", &Expr::depth)
        .def("__call__", [](const Expr& e, const std::vector<double>& x) { return eval(e, x); });

    m.def("parse", [](const std::string& text, bool has_time, std::size_t spatial_dim) {
        VariableNaming naming;
        if (has_time) naming.time_axis = spatial_dim;
        return parse_expr(text, naming);
    }, py::arg("text"), py::arg("has_time") = false, py::arg("spatial_dim") = 0);
    m.def("parse_for", [](const std::string& text, const std::string& problem) {
        return parse_expr(text, find_problem(problem).naming());
    }, py::arg("text"), py::arg("problem"));
    m.def("complexity", &complexity);
    m.def("simplify", [](const Expr& e) { return simplify(e); });
    m.def("structure_match", [](const Expr& a, const Expr& b, double tol) {
        const StructureMatch s = structure_match(a, b, tol);
        return py::make_tuple(s.matched, s.max_deviation);
    }, py::arg("candidate"), py::arg("target"), py::arg("tolerance") = 1e-2);

    m.def("taylor_coeffs", [](const Expr& e, const std::vector<double>& anchor, std::size_t axis, int order) {
        const Jet j = taylor_coeffs(ExprSource(e), anchor, axis, order);
        return std::vector<double>(j.coefficients().begin(), j.coefficients().end());
    }, py::arg("expr"), py::arg("anchor"), py::arg("axis"), py::arg("order"));

    m.def("problems", [] {
        std::vector<std::string> names;
        for (const auto& p : registry()) names.push_back(p.name);
        return names;
    });
    m.def("registry_json", [] { return registry_json().dump(); });
    m.def("phys_loss", [](const Expr& e, const std::string& problem, const std::vector<std::vector<double>>& pts) {
        const PdeProblem& p = find_problem(problem);
        return phys_loss(e, p, to_points(p.dimension(), pts));
    });
    m.def("mae", [](const Expr& e, const std::string& problem) { return mae(e, find_problem(problem)); });
    m.def("sample_collocation", [](const std::string& problem, std::size_t n, std::uint64_t seed) {
        const PdeProblem& p = find_problem(problem);
        Rng rng(seed);
        const PointSet s = sample_collocation(p, n, rng);
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < s.size(); ++i) out.emplace_back(s.point(i).begin(), s.point(i).end());
        return out;
    });

    py::class_<TaylorPrior>(m, "TaylorPrior")
        .def_property_readonly("order", &TaylorPrior::order)
        .def_property_readonly("anchor_count", &TaylorPrior::anchor_count)
        .def("to_json", [](const TaylorPrior& p) { return p.to_json().dump(); })
        .def_static("from_json", [](const std::string& s) { return TaylorPrior::from_json(nlohmann::json::parse(s)); });
    m.def("analytic_prior", &analytic_prior, py::arg("problem"), py::arg("anchors") = 8, py::arg("order") = 5,
          py::arg("seed") = 0);
    m.def("taylor_loss", [](const Expr& e, const TaylorPrior& p) { return taylor_loss(e, p); });

    m.def("fitness", [](const Expr& e, const std::string& problem, const TaylorPrior* prior, double lambda,
                        std::size_t collocation, std::uint64_t seed) {
        const PdeProblem& p = find_problem(problem);
        Rng rng(seed);
        return fitness(Individual(e), prior, p, sample_collocation(p, collocation, rng), lambda);
    }, py::arg("expr"), py::arg("problem"), py::arg("prior") = nullptr, py::arg("lambda_") = 1.0,
          py::arg("collocation") = 512, py::arg("seed") = 0);

    m.def("sensitivities", [](const Expr& e, const std::string& problem, const TaylorPrior* prior, double beta,
                              std::size_t n, std::uint64_t seed, double temperature) {
        const PdeProblem& p = find_problem(problem);
        Rng rng(seed);
        const CollocationSet set(p, sample_collocation(p, n, rng));
        const SensitivityReport r = sensitivities(e, prior, set, beta);
        std::vector<py::dict> rows;
        const std::vector<double> probs = sampling_distribution(r, temperature);
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
            py::dict d;
            d["structural"] = r.entries[i].structural;
            d["residual"] = r.entries[i].residual;
            d["total"] = r.entries[i].total;
            d["probability"] = probs[i];
            rows.push_back(d);
        }
        return rows;
    }, py::arg("expr"), py::arg("problem"), py::arg("prior") = nullptr, py::arg("beta") = 0.5, py::arg("n") = 128,
          py::arg("seed") = 0, py::arg("temperature") = 1.0);

    m.def("evolve", [](const std::string& problem, const TaylorPrior* prior, const std::string& overrides) {
        const PdeProblem& p = find_problem(problem);
        const GpConfig cfg = config_from(overrides);
        EvolveResult res;
        {
            py::gil_scoped_release release;
            res = evolve(p, prior, cfg);
        }
        py::dict out;
        out["best"] = res.best.expr;
        out["fitness"] = res.best.fitness();
        out["termination"] = res.termination;
        out["generations"] = res.log.size();
        std::vector<std::string> log;
        for (const auto& g : res.log) log.push_back(to_jsonl(g));
        out["log"] = log;
        return out;
    }, py::arg("problem"), py::arg("prior") = nullptr, py::arg("config") = "");

    m.def("train_pinn", [](const std::string& problem, const std::string& overrides) {
        const PdeProblem& p = find_problem(problem);
        TrainConfig cfg;
        if (!overrides.empty()) cfg.apply_json(nlohmann::json::parse(overrides));
        TrainResult res = [&] {
            py::gil_scoped_release release;
            return train(p, cfg);
        }();
        return py::make_tuple(res.model.to_json().dump(), res.final_loss, res.pool_trace);
    }, py::arg("problem"), py::arg("config") = "");
    m.def("pinn_prior", [](const std::string& problem, const std::string& checkpoint_json, std::size_t anchors,
                           int order, std::uint64_t seed) {
        const PdeProblem& p = find_problem(problem);
        const Mlp net = Mlp::from_json(nlohmann::json::parse(checkpoint_json));
        GpConfig gp;
        gp.anchors = anchors;
        gp.taylor_order = order;
        return build_prior(p, net, PriorSource::Pinn, seed, gp);
    }, py::arg("problem"), py::arg("checkpoint"), py::arg("anchors") = 8, py::arg("order") = 5, py::arg("seed") = 0);
}
