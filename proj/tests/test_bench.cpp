#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "strusr/bench.hpp"

using namespace strusr;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("strusr_bench_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunSpec small_spec(const std::string& problem, const fs::path& out)
{
    RunSpec spec;
    spec.problem = problem;
    spec.repetitions = 2;
    spec.seed = 4;
    spec.gp.population = 60;
    spec.gp.max_generations = 5;
    spec.gp.patience = 0;
    spec.out = out;
    return spec;
}

}  // namespace

TEST_CASE("run spec validation")
{
    RunSpec spec = small_spec("Nope", {});
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.problem = "Advection";
    spec.repetitions = 0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.repetitions = 1;
    spec.prior = PriorKind::PinnCheckpoint;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    CHECK(prior_kind_from_string("pinn") == PriorKind::Pinn);
    CHECK_THROWS_AS(prior_kind_from_string("magic"), std::invalid_argument);
}

TEST_CASE("run writes every artifact and a reproducible summary")
{
    const fs::path a = fresh_dir("run_a");
    const fs::path b = fresh_dir("run_b");
    RunSpec spec = small_spec("Poisson2D", a);
    spec.repetitions = 1;
    const RunReport ra = run(spec);
    spec.out = b;
    run(spec);
    for (const char* name : {"run_0.jsonl", "run_0.json", "prior_0.json", "summary.csv", "summary.json", "runs.csv",
                             "timing.csv"}) {
        CHECK(fs::exists(a / name));
    }
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    CHECK(slurp(a / "run_0.jsonl") == slurp(b / "run_0.jsonl"));
    CHECK(ra.runs.size() == 1);
    for (const auto& entry : fs::directory_iterator(a)) CHECK(entry.path().extension() != ".tmp");
}

TEST_CASE("summary agrees with the per-run files")
{
    const fs::path out = fresh_dir("summary");
    RunSpec spec = small_spec("Poisson2D", out);
    spec.repetitions = 3;
    const RunReport rep = run(spec);
    std::vector<double> maes;
    for (std::size_t i = 0; i < 3; ++i) {
        std::ifstream in(out / ("run_" + std::to_string(i) + ".json"));
        const auto j = nlohmann::json::parse(in);
        CHECK(j["seed"].get<std::uint64_t>() == 4 + i);
        maes.push_back(j["mae"].get<double>());
    }
    const double mean = (maes[0] + maes[1] + maes[2]) / 3;
    double var = 0.0;
    for (const double m : maes) var += (m - mean) * (m - mean);
    std::ifstream in(out / "summary.json");
    const auto s = nlohmann::json::parse(in);
    CHECK(s["repetitions"] == 3);
    CHECK(s["mae_mean"].get<double>() == doctest::Approx(mean).epsilon(1e-14));
    CHECK(s["mae_std"].get<double>() == doctest::Approx(std::sqrt(var / 2)).epsilon(1e-12));
    CHECK(s == rep.summary);

    // the per-generation log ends with the reported best
    std::ifstream log(out / "run_0.jsonl");
    std::string line;
    std::string last;
    std::size_t lines = 0;
    while (std::getline(log, line)) {
        last = line;
        ++lines;
    }
    CHECK(lines == rep.runs[0].generations);
    CHECK(nlohmann::json::parse(last)["best_expr_text"] == rep.runs[0].best_expr);
}

TEST_CASE("jobs do not change the artifacts")
{
    const fs::path a = fresh_dir("jobs_a");
    const fs::path b = fresh_dir("jobs_b");
    RunSpec spec = small_spec("Heat2D", a);
    spec.repetitions = 3;
    run(spec);
    spec.out = b;
    spec.jobs = 3;
    run(spec);
    for (const char* name : {"run_0.jsonl", "run_1.jsonl", "run_2.jsonl", "runs.csv", "summary.csv"}) {
        CHECK(slurp(a / name) == slurp(b / name));
    }
}

TEST_CASE("ablation over K with a single value reduces to run")
{
    const fs::path a = fresh_dir("k_single");
    const fs::path b = fresh_dir("k_plain");
    RunSpec spec = small_spec("Advection", a);
    const nlohmann::json table = ablation_k(spec, {5});
    REQUIRE(table["rows"].size() == 1);
    CHECK(table["rows"][0]["K"] == 5);
    spec.out = b;
    spec.gp.taylor_order = 5;
    run(spec);
    CHECK(slurp(a / "K5" / "runs.csv") == slurp(b / "runs.csv"));
    CHECK(fs::exists(a / "ablation_k.csv"));

    const nlohmann::json many = ablation_k(small_spec("Advection", fresh_dir("k_many")), {2, 3});
    CHECK(many["rows"].size() == 2);
}

TEST_CASE("mode ablation traces are normalized")
{
    RunSpec spec = small_spec("Advection", fresh_dir("modes"));
    const nlohmann::json out = ablation_modes(spec);
    for (const char* mode : {"vanilla", "pi-gp", "strusr"}) {
        REQUIRE(out["traces"][mode].size() == 2);
        for (const auto& trace : out["traces"][mode]) {
            CHECK(!trace.empty());
            for (const auto& v : trace) {
                CHECK(v.get<double>() >= 0.0);
                CHECK(v.get<double>() <= 1.0);
            }
        }
    }
    const GpConfig base;
    const GpConfig vanilla = mode_config("vanilla", base);
    CHECK(vanilla.lambda == 0.0);
    CHECK(vanilla.physics_weight == 0.0);
    CHECK(!vanilla.guided);
    const GpConfig pi = mode_config("pi-gp", base);
    CHECK(pi.lambda == 0.0);
    CHECK(pi.beta == 1.0);
    CHECK(!pi.guided);
    CHECK(mode_config("strusr", base).to_json() == base.to_json());
    CHECK_THROWS_AS(mode_config("other", base), std::invalid_argument);
}

TEST_CASE("registry export")
{
    const nlohmann::json reg = registry_json();
    REQUIRE(reg.size() == 8);
    CHECK(reg[0]["name"] == "Advection");
    CHECK(reg[0]["ground_truth"] == "sin((x0 - t))");
    CHECK(reg[6]["truth_verified"] == false);
    CHECK(reg[3]["box"].size() == 3);
}

TEST_CASE("pinn checkpoint prior")
{
    const fs::path out = fresh_dir("pinn");
    RunSpec spec = small_spec("Diffusion", out);
    spec.prior = PriorKind::Pinn;
    spec.repetitions = 1;
    spec.pinn.steps = 20;
    spec.pinn.hidden = {8, 8};
    run(spec);
    REQUIRE(fs::exists(out / "pinn.json"));
    CHECK(fs::exists(out / "pinn_loss.csv"));

    RunSpec again = small_spec("Diffusion", fresh_dir("pinn_ckpt"));
    again.prior = PriorKind::PinnCheckpoint;
    again.checkpoint = out / "pinn.json";
    again.repetitions = 1;
    run(again);
    CHECK(slurp(out / "prior_0.json") == slurp(again.out / "prior_0.json"));
    CHECK(slurp(out / "run_0.jsonl") == slurp(again.out / "run_0.jsonl"));
}
