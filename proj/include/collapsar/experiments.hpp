#ifndef COLLAPSAR_EXPERIMENTS_HPP
#define COLLAPSAR_EXPERIMENTS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "collapsar/blowup.hpp"
#include "collapsar/config.hpp"
#include "collapsar/critical.hpp"
#include "collapsar/evolution.hpp"

namespace collapsar {

// Everything a run needs, resolved from a key = value config file plus CLI
// overrides. Field names mirror the config keys (grid.n, params.lambda, ...).
struct ExperimentConfig {
    std::string experiment;

    int grid_n = 64;
    double box_length = 32.0;

    std::string initial_kind = "gaussian"; // gaussian | plane_wave
    double sigma = 1.0;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    std::array<int, 3> plane_k{0, 0, 0};

    HartreeParams params;
    double lambda_star_multiple = 0.0; // > 0: lambda = multiple * lambda_star(f0)

    std::vector<double> sweep_alphas{0.2, 0.1, 0.05, 0.025, 0.0125};

    double h_half_factor = 10.0;
    double tail_max = 0.01;
    double radial_tol = 1e-6;

    std::vector<double> start_sigmas{1.0, 2.0};
    int max_iters = 400;
    double step = 0.5;
    double tol = 1e-8;
    int refine_n = 0;

    int fock_modes = 2;
    int fock_n_max = 40;
    int fock_trials = 100;

    int ineq_trials = 200;

    std::string output_dir = "out";
    std::uint64_t seed = 1;
    int jobs = 1;
};

ExperimentConfig config_from_kv(const KeyValueConfig& kv);
ExperimentConfig load_experiment_config(const std::string& path);

// ---- reports -------------------------------------------------------------

struct SweepRow {
    double alpha = 0.0;
    double sup_l2 = 0.0;     // sup_t ||phi_t - phi_t^(alpha)||_L2
    double sup_h_half = 0.0; // same in the H^(1/2) norm
};

struct SweepReport {
    std::vector<SweepRow> rows; // alpha descending
    std::optional<double> slope_l2;     // log-log fit; empty when distances vanish
    std::optional<double> slope_h_half;
};

struct BlowupReport {
    double lambda = 0.0;
    double lambda_star = 0.0; // energy-sign threshold of the initial profile
    FLCriterion criterion;
    Trajectory trajectory;
    BlowupVerdict verdict;
    bool resolved = true;        // false when the tail trigger fired
    double h_half_growth = 1.0;  // max over the run of h_half(t)/h_half(0)
};

struct CriticalStart {
    double sigma = 0.0;
    double ratio = 0.0;
    double lambda_upper = 0.0;
    int iterations = 0;
    bool converged = false;
    double radial_deviation = 0.0;
};

struct CriticalReport {
    std::vector<CriticalStart> starts;
    double agreement = 0.0; // (max - min) / min over lambda_upper
    std::optional<double> refine_lambda_upper;
    std::optional<double> refine_delta; // relative change under grid refinement
};

struct FockCheck {
    std::string name;
    double max_defect = 0.0;
    double tol = 0.0;
    bool pass = false;
    bool degraded = false; // skipped because truncation dominates
};

struct FockReport {
    std::vector<FockCheck> checks;
    bool degraded = false;
    bool all_pass = false; // over non-degraded checks
};

struct InequalityReport {
    int trials = 0;
    int skipped = 0; // excluded by the seminorm guard
    double max_kato = 0.0;
    double max_hardy = 0.0;
};

struct EvolveReport {
    Trajectory trajectory;
    double mass_drift = 0.0;   // max |m(t) - m(0)|
    double energy_drift = 0.0; // max |E(t) - E(0)|
};

// ---- runners ---------------------------------------------------------------
// Each runner writes its artifacts (monitors*.csv / sweep.csv / ratios.csv /
// report.json as applicable) under cfg.output_dir and also returns the report.

SweepReport run_reg_sweep(const ExperimentConfig& cfg);
BlowupReport run_blowup(const ExperimentConfig& cfg);
CriticalReport run_critical_lambda(const ExperimentConfig& cfg);
FockReport run_fock_check(const ExperimentConfig& cfg);
InequalityReport run_inequalities(const ExperimentConfig& cfg);
EvolveReport run_evolve(const ExperimentConfig& cfg);

// --check mode: true when the experiment's thresholds hold. Runs the
// experiment via the matching runner.
bool run_with_check(const ExperimentConfig& cfg, std::string* message);

// Dispatch without threshold checking; returns normally on success.
void run_experiment(const ExperimentConfig& cfg);

// Initial field described by the config.
Field initial_field(const ExperimentConfig& cfg);

} // namespace collapsar

#endif
