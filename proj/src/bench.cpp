#include "strusr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "strusr/expr_text.hpp"
#include "strusr/simplify.hpp"

namespace strusr {

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string csv_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s)
{
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

double mean_of(const std::vector<double>& v)
{
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (const double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (const double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v)
{
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs body(i) for i < n on up to `jobs` threads; rethrows the first failure.
template <class F>
void for_each_job(std::size_t n, std::size_t jobs, F&& body)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(std::max<std::size_t>(jobs, 1), n);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct PriorContext {
    std::optional<Mlp> network;
    double pinn_seconds = 0.0;
};

PriorContext prepare(const RunSpec& spec, const PdeProblem& problem)
{
    PriorContext ctx;
    const auto t0 = std::chrono::steady_clock::now();
    ctx.network = prepare_network(spec, problem);
    ctx.pinn_seconds = seconds_since(t0);
    return ctx;
}

TaylorPrior prior_for(const RunSpec& spec, const PdeProblem& problem, const PriorContext& ctx, std::uint64_t seed,
                      const GpConfig& gp)
{
    if (ctx.network) return build_prior(problem, *ctx.network, PriorSource::Pinn, seed, gp);
    if (!problem.ground_truth) throw std::invalid_argument(problem.name + ": analytic prior needs a ground truth");
    (void)spec;
    return build_prior(problem, ExprSource(*problem.ground_truth), PriorSource::AnalyticOracle, seed, gp);
}

RunRecord record_from(const PdeProblem& problem, std::size_t rep, std::uint64_t seed, const EvolveResult& res,
                      double wall)
{
    RunRecord r;
    r.repetition = rep;
    r.seed = seed;
    r.best_expr = to_string(res.best.expr, problem.naming());
    r.mae = problem.ground_truth ? mae(res.best.expr, problem) : std::numeric_limits<double>::quiet_NaN();
    r.fitness = res.best.fitness();
    r.phys_loss = res.best.losses->phys;
    r.taylor_loss = res.log.empty() ? res.best.losses->taylor : res.log.back().best_taylor_loss;
    r.complexity = complexity(res.best.expr);
    r.generations = res.log.size();
    r.termination = res.termination;
    r.wall_seconds = wall;
    r.log = res.log;
    return r;
}

std::string jsonl_of(const std::vector<GenerationRecord>& log)
{
    std::string out;
    for (const auto& g : log) out += to_jsonl(g) + "\n";
    return out;
}

nlohmann::json run_json(const RunSpec& spec, const PdeProblem& problem, const RunRecord& r, const GpConfig& gp)
{
    nlohmann::json j;
    j["problem"] = problem.name;
    j["repetition"] = r.repetition;
    j["seed"] = r.seed;
    j["prior"] = to_string(spec.prior);
    j["best_expr"] = r.best_expr;
    j["mae"] = number(r.mae);
    j["fitness"] = number(r.fitness);
    j["phys_loss"] = number(r.phys_loss);
    j["taylor_loss"] = number(r.taylor_loss);
    j["complexity"] = r.complexity;
    j["generations"] = r.generations;
    j["termination"] = r.termination;
    j["gp"] = gp.to_json();
    j["gp"].erase("threads");  // execution detail; results do not depend on it
    if (spec.prior == PriorKind::Pinn) j["pinn"] = spec.pinn.to_json();
    if (spec.prior == PriorKind::PinnCheckpoint) j["checkpoint"] = spec.checkpoint.string();
    return j;
}

GpConfig rep_config(const RunSpec& spec, std::size_t rep)
{
    GpConfig gp = spec.gp;
    gp.seed = spec.seed + rep;
    return gp;
}

}  // namespace

const char* to_string(PriorKind k)
{
    switch (k) {
    case PriorKind::Analytic: return "analytic";
    case PriorKind::Pinn: return "pinn";
    case PriorKind::PinnCheckpoint: return "checkpoint";
    }
    return "?";
}

PriorKind prior_kind_from_string(const std::string& s)
{
    if (s == "analytic") return PriorKind::Analytic;
    if (s == "pinn") return PriorKind::Pinn;
    if (s == "checkpoint") return PriorKind::PinnCheckpoint;
    throw std::invalid_argument("unknown prior kind '" + s + "'");
}

void RunSpec::validate() const
{
    (void)find_problem(problem);
    if (repetitions == 0) throw std::invalid_argument("RunSpec: repetitions must be positive");
    if (jobs == 0) throw std::invalid_argument("RunSpec: jobs must be positive");
    if (prior == PriorKind::PinnCheckpoint && checkpoint.empty()) {
        throw std::invalid_argument("RunSpec: checkpoint prior needs a path");
    }
    gp.validate();
    if (prior == PriorKind::Pinn) pinn.validate();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

TaylorPrior build_prior(const PdeProblem& problem, const JetSource& source, PriorSource tag, std::uint64_t seed,
                        const GpConfig& gp)
{
    Rng rng(derive_seed(seed, 3));
    return extract_prior(source, select_anchors(problem, gp.anchors, rng), gp.taylor_order, tag);
}

std::optional<Mlp> prepare_network(const RunSpec& spec, const PdeProblem& problem)
{
    if (spec.prior == PriorKind::PinnCheckpoint) return Mlp::load(spec.checkpoint);
    if (spec.prior != PriorKind::Pinn) return std::nullopt;
    TrainResult res = train(problem, spec.pinn);
    if (!spec.out.empty()) {
        write_file_atomic(spec.out / "pinn.json", res.model.to_json().dump() + "\n");
        std::string trace = "step,pool_loss\n";
        for (std::size_t i = 0; i < res.pool_trace.size(); ++i) {
            const std::size_t step = std::min(i * spec.pinn.trace_every, spec.pinn.steps);
            trace += std::to_string(step) + "," + csv_number(res.pool_trace[i]) + "\n";
        }
        write_file_atomic(spec.out / "pinn_loss.csv", trace);
    }
    return std::move(res.model);
}

nlohmann::json summarize(const std::string& problem_name, const std::vector<RunRecord>& runs)
{
    const PdeProblem& problem = find_problem(problem_name);
    std::vector<double> maes;
    std::vector<double> complexities;
    std::vector<double> fitnesses;
    std::size_t matches = 0;
    for (const auto& r : runs) {
        maes.push_back(r.mae);
        complexities.push_back(static_cast<double>(r.complexity));
        fitnesses.push_back(r.fitness);
        if (problem.ground_truth) {
            const Expr e = parse_expr(r.best_expr, problem.naming());
            matches += structure_match(e, *problem.ground_truth, 1e-2).matched ? 1 : 0;
        }
    }
    nlohmann::json j;
    j["problem"] = problem.name;
    j["repetitions"] = runs.size();
    j["truth_verified"] = problem.truth_verified;
    j["mae_mean"] = number(mean_of(maes));
    j["mae_std"] = number(std_of(maes));
    j["mae_median"] = number(median_of(maes));
    j["complexity_mean"] = number(mean_of(complexities));
    j["fitness_mean"] = number(mean_of(fitnesses));
    j["structure_matches"] = matches;
    return j;
}

RunReport run(const RunSpec& spec)
{
    spec.validate();
    const PdeProblem& problem = find_problem(spec.problem);
    const PriorContext ctx = prepare(spec, problem);

    RunReport report;
    report.runs.resize(spec.repetitions);
    for_each_job(spec.repetitions, spec.jobs, [&](std::size_t rep) {
        const GpConfig gp = rep_config(spec, rep);
        const TaylorPrior prior = prior_for(spec, problem, ctx, gp.seed, gp);
        const auto t0 = std::chrono::steady_clock::now();
        const EvolveResult res = evolve(problem, &prior, gp);
        RunRecord r = record_from(problem, rep, gp.seed, res, seconds_since(t0));
        if (!spec.out.empty()) {
            const std::string stem = "run_" + std::to_string(rep);
            write_file_atomic(spec.out / (stem + ".jsonl"), jsonl_of(r.log));
            write_file_atomic(spec.out / (stem + ".json"), run_json(spec, problem, r, gp).dump(2) + "\n");
            write_file_atomic(spec.out / ("prior_" + std::to_string(rep) + ".json"), prior.to_json().dump() + "\n");
        }
        report.runs[rep] = std::move(r);
    });

    report.summary = summarize(problem.name, report.runs);
    report.summary["prior"] = to_string(spec.prior);
    if (!spec.out.empty()) {
        const auto& s = report.summary;
        auto field = [&](const char* key) { return s[key].is_null() ? std::string("nan") : s[key].dump(); };
        std::string csv = "problem,prior,repetitions,mae_mean,mae_std,mae_median,complexity_mean,fitness_mean,"
                          "structure_matches\n";
        csv += problem.name + "," + to_string(spec.prior) + "," + std::to_string(spec.repetitions) + "," +
               field("mae_mean") + "," + field("mae_std") + "," + field("mae_median") + "," +
               field("complexity_mean") + "," + field("fitness_mean") + "," + field("structure_matches") + "\n";
        write_file_atomic(spec.out / "summary.csv", csv);
        write_file_atomic(spec.out / "summary.json", s.dump(2) + "\n");

        std::string runs = "repetition,seed,mae,fitness,phys_loss,taylor_loss,complexity,generations,termination,"
                           "best_expr\n";
        std::string timing = "repetition,seed,wall_seconds\n";
        for (const auto& r : report.runs) {
            runs += std::to_string(r.repetition) + "," + std::to_string(r.seed) + "," + csv_number(r.mae) + "," +
                    csv_number(r.fitness) + "," + csv_number(r.phys_loss) + "," + csv_number(r.taylor_loss) + "," +
                    std::to_string(r.complexity) + "," + std::to_string(r.generations) + "," + r.termination + "," +
                    csv_quote(r.best_expr) + "\n";
            timing += std::to_string(r.repetition) + "," + std::to_string(r.seed) + "," + csv_number(r.wall_seconds) +
                      "\n";
        }
        if (ctx.network && spec.prior == PriorKind::Pinn) timing += "pinn,," + csv_number(ctx.pinn_seconds) + "\n";
        write_file_atomic(spec.out / "runs.csv", runs);
        write_file_atomic(spec.out / "timing.csv", timing);
    }
    return report;
}

nlohmann::json ablation_k(const RunSpec& spec, const std::vector<int>& k_values)
{
    if (k_values.empty()) throw std::invalid_argument("ablation_k: no K values");
    nlohmann::json rows = nlohmann::json::array();
    std::string csv = "K,structure_loss_median,structure_loss_mean,mae_median,mae_mean,repetitions\n";
    for (const int k : k_values) {
        RunSpec sub = spec;
        sub.gp.taylor_order = k;
        if (!spec.out.empty()) sub.out = spec.out / ("K" + std::to_string(k));
        // one network serves every K
        if (spec.prior == PriorKind::Pinn && !spec.out.empty() && k != k_values.front()) {
            sub.prior = PriorKind::PinnCheckpoint;
            sub.checkpoint = spec.out / ("K" + std::to_string(k_values.front())) / "pinn.json";
        }
        const RunReport rep = run(sub);
        std::vector<double> losses;
        std::vector<double> maes;
        for (const auto& r : rep.runs) {
            losses.push_back(r.taylor_loss);
            maes.push_back(r.mae);
        }
        nlohmann::json row = {{"K", k},
                              {"structure_loss_median", number(median_of(losses))},
                              {"structure_loss_mean", number(mean_of(losses))},
                              {"mae_median", number(median_of(maes))},
                              {"mae_mean", number(mean_of(maes))},
                              {"repetitions", rep.runs.size()},
                              {"structure_loss", losses},
                              {"mae", nlohmann::json::array()}};
        for (const double m : maes) row["mae"].push_back(number(m));
        csv += std::to_string(k) + "," + csv_number(median_of(losses)) + "," + csv_number(mean_of(losses)) + "," +
               csv_number(median_of(maes)) + "," + csv_number(mean_of(maes)) + "," + std::to_string(rep.runs.size()) +
               "\n";
        rows.push_back(std::move(row));
    }
    nlohmann::json out = {{"problem", spec.problem}, {"prior", to_string(spec.prior)}, {"rows", rows}};
    if (!spec.out.empty()) {
        write_file_atomic(spec.out / "ablation_k.csv", csv);
        write_file_atomic(spec.out / "ablation_k.json", out.dump(2) + "\n");
    }
    return out;
}

GpConfig mode_config(const std::string& mode, const GpConfig& base)
{
    GpConfig cfg = base;
    if (mode == "vanilla") {
        cfg.lambda = 0.0;
        cfg.physics_weight = 0.0;
        cfg.condition_weight = 1.0;
        cfg.guided = false;
    } else if (mode == "pi-gp") {
        cfg.lambda = 0.0;
        cfg.beta = 1.0;
        cfg.physics_weight = 1.0;
        cfg.condition_weight = 1.0;
        cfg.guided = false;
    } else if (mode != "strusr") {
        throw std::invalid_argument("unknown mode '" + mode + "'");
    }
    return cfg;
}

nlohmann::json ablation_modes(const RunSpec& spec)
{
    spec.validate();
    const PdeProblem& problem = find_problem(spec.problem);
    const PriorContext ctx = prepare(spec, problem);
    const std::vector<std::string> modes{"vanilla", "pi-gp", "strusr"};

    // traces[rep][mode]
    std::vector<std::vector<std::vector<double>>> traces(spec.repetitions, std::vector<std::vector<double>>(3));
    for_each_job(spec.repetitions * modes.size(), spec.jobs, [&](std::size_t job) {
        const std::size_t rep = job / modes.size();
        const std::size_t m = job % modes.size();
        const GpConfig base = rep_config(spec, rep);
        const TaylorPrior prior = prior_for(spec, problem, ctx, base.seed, base);
        const GpConfig cfg = mode_config(modes[m], base);
        EvolveOptions opts;
        opts.monitor_prior = &prior;
        const bool uses_prior = modes[m] == "strusr";
        const EvolveResult res = evolve(problem, uses_prior ? &prior : nullptr, cfg, opts);
        std::vector<double> trace;
        for (const auto& g : res.log) trace.push_back(g.best_taylor_loss);
        traces[rep][m] = std::move(trace);
    });

    nlohmann::json out = {{"problem", spec.problem}, {"prior", to_string(spec.prior)}};
    std::string csv = "mode,repetition,generation,normalized_structure_loss\n";
    std::vector<std::vector<double>> finals(modes.size());
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        double peak = 0.0;
        for (const auto& t : traces[rep]) {
            for (const double v : t) peak = std::max(peak, v);
        }
        for (std::size_t m = 0; m < modes.size(); ++m) {
            std::vector<double> norm;
            for (const double v : traces[rep][m]) norm.push_back(peak > 0.0 ? v / peak : 0.0);
            for (std::size_t g = 0; g < norm.size(); ++g) {
                csv += modes[m] + "," + std::to_string(rep) + "," + std::to_string(g) + "," + csv_number(norm[g]) +
                       "\n";
            }
            finals[m].push_back(norm.empty() ? 0.0 : norm.back());
            out["traces"][modes[m]].push_back(norm);
        }
    }
    for (std::size_t m = 0; m < modes.size(); ++m) {
        out["final_median"][modes[m]] = number(median_of(finals[m]));
        out["final"][modes[m]] = finals[m];
    }
    if (!spec.out.empty()) {
        write_file_atomic(spec.out / "ablation_modes.csv", csv);
        write_file_atomic(spec.out / "ablation_modes.json", out.dump(2) + "\n");
    }
    return out;
}

nlohmann::json registry_json()
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : registry()) {
        nlohmann::json j;
        j["name"] = p.name;
        j["dimension"] = p.dimension();
        j["spatial_dim"] = p.spatial_dim;
        j["has_time"] = p.has_time;
        for (const auto& iv : p.box) j["box"].push_back({iv.lower, iv.upper});
        j["operator"] = p.operator_text;
        j["conditions"] = nlohmann::json::array();
        for (const auto& c : p.conditions) {
            j["conditions"].push_back({{"kind", c.kind == ConditionKind::Initial ? "initial" : "boundary"},
                                       {"description", c.description}});
        }
        j["ground_truth"] = p.ground_truth ? nlohmann::json(to_string(*p.ground_truth, p.naming())) : nullptr;
        j["truth_verified"] = p.truth_verified;
        j["self_check_residual"] = number(p.self_check_residual);
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace strusr
