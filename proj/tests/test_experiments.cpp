#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "collapsar/blowup.hpp"
#include "collapsar/errors.hpp"
#include "collapsar/experiments.hpp"
#include "collapsar/field.hpp"
#include "collapsar/spectral.hpp"

using namespace collapsar;
namespace fs = std::filesystem;

namespace {

std::string g_bin_dir; // directory of this test binary; the CLI sits next to it

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "collapsar_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig small_evolve(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.experiment = "evolve";
    cfg.grid_n = 16;
    cfg.box_length = 8.0;
    cfg.params.t_end = 0.05;
    cfg.params.dt_init = 5e-3;
    cfg.params.adapt_exponent = 0.0;
    cfg.params.monitor_stride = 2;
    cfg.output_dir = out.string();
    return cfg;
}

int run_cli(const std::string& args) {
    std::string cmd = g_bin_dir + "/collapsar " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("key-value files parse into validated configs") {
    KeyValueConfig kv = KeyValueConfig::from_string(
        "# comment\n"
        "experiment = evolve\n"
        "grid.n = 16\n"
        "grid.box_length = 8\n"
        "initial.kind = gaussian\n"
        "initial.sigma = 1.5\n"
        "initial.center_x = 0.5\n"
        "params.lambda = 2.0\n"
        "params.t_end = 0.25\n"
        "sweep.alphas = 0.2, 0.1\n"
        "seed = 7\n");
    ExperimentConfig cfg = config_from_kv(kv);
    CHECK(cfg.experiment == "evolve");
    CHECK(cfg.grid_n == 16);
    CHECK(cfg.box_length == 8.0);
    CHECK(cfg.sigma == 1.5);
    CHECK(cfg.center[0] == 0.5);
    CHECK(cfg.center[1] == 0.0);
    CHECK(cfg.params.lambda == 2.0);
    CHECK(cfg.params.t_end == 0.25);
    CHECK(cfg.sweep_alphas == std::vector<double>{0.2, 0.1});
    CHECK(cfg.seed == 7);
    // untouched keys keep their defaults
    CHECK(cfg.fock_n_max == 40);
    CHECK(cfg.ineq_trials == 200);
    CHECK(cfg.jobs == 1);
}

TEST_CASE("config rejections") {
    auto reject = [](const std::string& text) {
        CHECK_THROWS_AS(config_from_kv(KeyValueConfig::from_string(text)),
                        ConfigError);
    };
    reject("grid.m = 16\n");            // unknown key
    reject("grid.n = 15\n");            // odd
    reject("grid.box_length = 0\n");
    reject("initial.kind = vortex\n");
    reject("initial.sigma = -1\n");
    reject("params.t_end = 0\n");
    reject("params.dt_init = -1e-3\n");
    reject("params.alpha = -0.1\n");
    reject("params.monitor_stride = 0\n");
    reject("params.lambda_star_multiple = -2\n");
    reject("sweep.alphas = 0.2, -0.1\n");
    reject("blowup.h_half_factor = 1\n");
    reject("blowup.tail_max = 0\n");
    reject("critical.start_sigmas = \n");
    reject("critical.max_iters = 0\n");
    reject("critical.refine_n = 3\n");
    reject("fock.modes = 3\n");
    reject("fock.trials = 0\n");
    reject("inequalities.trials = 0\n");
    reject("jobs = 0\n");
    reject("params.lambda = nonsense\n");

    CHECK_THROWS_AS(KeyValueConfig::from_string("just a line without equals\n"),
                    ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::from_file("/nonexistent/path.conf"),
                    ConfigError);
}

TEST_CASE("initial fields follow the config") {
    ExperimentConfig cfg;
    cfg.grid_n = 16;
    cfg.box_length = 8.0;
    cfg.sigma = 1.0;
    Field f = initial_field(cfg);
    CHECK(radial_deviation(f) < 1e-14);

    cfg.center = {0.5, 0.0, 0.0};
    CHECK(radial_deviation(initial_field(cfg)) > 1e-2);

    cfg.initial_kind = "plane_wave";
    cfg.plane_k = {1, 0, -2};
    Field p = initial_field(cfg);
    Grid g(16, 8.0);
    Field expected = make_plane_wave(g, {1, 0, -2});
    double worst = 0.0;
    for (std::size_t i = 0; i < p.values().size(); ++i)
        worst = std::max(worst, std::abs(p[i] - expected[i]));
    CHECK(worst == 0.0);
}

TEST_CASE("evolve runner writes monitors and a self-consistent report") {
    fs::path out = fresh_dir("evolve");
    ExperimentConfig cfg = small_evolve(out);
    EvolveReport rep = run_evolve(cfg);

    CHECK(rep.trajectory.termination == Termination::completed);
    CHECK(rep.mass_drift < 1e-12);
    CHECK(rep.energy_drift < 1e-4);

    std::string csv = slurp(out / "monitors.csv");
    CHECK(csv.rfind("n,box_length,lambda,alpha,dt,time,mass,total_energy,"
                    "h_half,h1,h2,tail_fraction\n", 0) == 0);
    // one line per monitor row plus the header
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          static_cast<long>(rep.trajectory.times.size()) + 1);

    auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["config"]["experiment"] == "evolve");
    CHECK(report["mass_drift"].get<double>() == rep.mass_drift);
    CHECK(report["config"]["grid"]["n"] == 16);
    // machine-independent echo: placement and parallelism are left out
    CHECK(!report["config"].contains("output"));
    CHECK(!report["config"].contains("jobs"));
}

TEST_CASE("runs are byte-identical across reruns, directories, and jobs") {
    ExperimentConfig cfg;
    cfg.experiment = "inequalities";
    cfg.grid_n = 16;
    cfg.box_length = 8.0;
    cfg.ineq_trials = 6;
    cfg.seed = 3;

    fs::path a = fresh_dir("ineq_a"), b = fresh_dir("ineq_b");
    cfg.output_dir = a.string();
    InequalityReport ra = run_inequalities(cfg);
    cfg.output_dir = b.string();
    cfg.jobs = 3; // parallel fan-out must not change results
    InequalityReport rb = run_inequalities(cfg);

    CHECK(ra.max_kato == rb.max_kato);
    CHECK(ra.max_hardy == rb.max_hardy);
    CHECK(slurp(a / "ratios.csv") == slurp(b / "ratios.csv"));
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));

    // a different seed draws different fields
    cfg.seed = 4;
    fs::path c = fresh_dir("ineq_c");
    cfg.output_dir = c.string();
    run_inequalities(cfg);
    CHECK(slurp(a / "ratios.csv") != slurp(c / "ratios.csv"));

    CHECK(ra.trials == 6);
    CHECK(ra.skipped == 0);
    CHECK(ra.max_kato > 0.0);
    CHECK(ra.max_hardy > 0.0);
}

TEST_CASE("small regularization sweep produces rows and slopes") {
    fs::path out = fresh_dir("sweep");
    ExperimentConfig cfg;
    cfg.experiment = "reg_sweep";
    cfg.grid_n = 16;
    cfg.box_length = 8.0;
    cfg.sweep_alphas = {0.2, 0.1};
    cfg.params.t_end = 0.04;
    cfg.params.dt_init = 1e-2;
    cfg.params.lambda = 1.0;
    cfg.output_dir = out.string();
    SweepReport rep = run_reg_sweep(cfg);

    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].alpha == 0.2);
    CHECK(rep.rows[1].alpha == 0.1);
    CHECK(rep.rows[0].sup_l2 > rep.rows[1].sup_l2);
    CHECK(rep.rows[1].sup_l2 > 0.0);
    REQUIRE(rep.slope_l2.has_value());
    REQUIRE(rep.slope_h_half.has_value());
    CHECK(*rep.slope_l2 > 0.0);

    CHECK(fs::exists(out / "monitors_ref.csv"));
    CHECK(fs::exists(out / "monitors_run0.csv"));
    CHECK(fs::exists(out / "monitors_run1.csv"));
    std::string csv = slurp(out / "sweep.csv");
    CHECK(csv.rfind("n,box_length,lambda,t_end,dt_init,alpha,"
                    "sup_l2_distance,sup_h_half_distance\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("check mode verdicts") {
    fs::path out = fresh_dir("check");
    ExperimentConfig cfg = small_evolve(out);
    std::string message;
    CHECK(run_with_check(cfg, &message));

    // starve the stepper so the run cannot finish: the check must fail
    cfg.params.adapt_exponent = 2.0;
    cfg.params.cfl_constant = 1e-12;
    cfg.output_dir = (out / "underflow").string();
    CHECK(!run_with_check(cfg, &message));
    CHECK(!message.empty());

    // eligible blow-up data left undetected violates the dichotomy
    ExperimentConfig bl;
    bl.experiment = "blowup";
    bl.grid_n = 16;
    bl.box_length = 8.0;
    bl.lambda_star_multiple = 3.0;
    bl.params.t_end = 0.01; // far too short to reach detection
    bl.params.dt_init = 2e-3;
    bl.params.adapt_exponent = 0.0;
    bl.output_dir = (out / "short").string();
    CHECK(!run_with_check(bl, &message));
    CHECK(!message.empty());

    ExperimentConfig bad = small_evolve(out);
    bad.experiment = "unheard_of";
    CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("command line exit codes") {
    fs::path dir = fresh_dir("cli");
    fs::path ok_conf = dir / "ok.conf";
    std::ofstream(ok_conf) << "experiment = evolve\n"
                              "grid.n = 16\n"
                              "grid.box_length = 8\n"
                              "params.t_end = 0.02\n"
                              "params.dt_init = 5e-3\n"
                              "params.adapt_exponent = 0\n";
    fs::path bad_conf = dir / "bad.conf";
    std::ofstream(bad_conf) << "experiment = evolve\nno.such.key = 1\n";
    fs::path short_blowup = dir / "short.conf";
    std::ofstream(short_blowup) << "experiment = blowup\n"
                                   "grid.n = 16\n"
                                   "grid.box_length = 8\n"
                                   "params.lambda_star_multiple = 3\n"
                                   "params.t_end = 0.01\n"
                                   "params.dt_init = 2e-3\n"
                                   "params.adapt_exponent = 0\n";

    std::string out = " --output-dir " + (dir / "out").string();
    CHECK(run_cli("evolve --config " + ok_conf.string() + out) == 0);
    CHECK(run_cli("evolve --config " + bad_conf.string() + out) == 2);
    CHECK(run_cli("evolve --config " + dir.string() + "/absent.conf" + out) == 2);
    // config file names a different experiment than the subcommand
    CHECK(run_cli("blowup --config " + ok_conf.string() + out) == 2);
    // threshold violation in check mode
    CHECK(run_cli("blowup --check --config " + short_blowup.string() + out) == 4);
    CHECK(run_cli("") != 0); // no subcommand
}

int main(int argc, char** argv) {
    fs::path self(argv[0]);
    g_bin_dir = self.has_parent_path() ? self.parent_path().string() : ".";
    return doctest::Context(argc, argv).run();
}
