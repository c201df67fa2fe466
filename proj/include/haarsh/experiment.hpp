#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "haarsh/log_domain.hpp"
#include "haarsh/schedule.hpp"
#include "haarsh/torus.hpp"

namespace haarsh {

struct Trial {
    int64_t index = 0;
    uint64_t theta_seed = 0;
    uint64_t omega_seed = 0;
    double statistic = 0.0;
    bool flag = false;
};

struct TrialLedger {
    std::string kind;
    std::vector<Trial> trials;
    double frequency = 0.0;
    double ci_low = 0.0;   // 95% Wilson interval
    double ci_high = 0.0;
    double bound_log2 = 0.0;     // log2 of the reference bound (0 bound -> -inf)
    bool bound_is_theorem = false;  // explicit-constant theorem vs shape-only
    std::string notes;

    void finalize();      // frequency + interval from the flags
    std::string to_csv() const;
};

/// 95% Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(int64_t successes, int64_t n);

struct WegnerConfig {
    std::string model = "iid";   // "iid": segment with IID U[0,1] diagonal; "haarsh": hull potential
    int64_t n_sites = 8;         // iid model segment length
    int64_t L = 2;               // haarsh model box radius
    double g = 1.0;
    double interval_center = 1.0;
    double interval_width = 0.1;
    int J = 1;
    int64_t n_samples = 1000;
    uint64_t master_seed = 1;
    std::optional<uint64_t> fixed_omega_seed;  // haarsh model: fixed vs per-trial omega
    double endpoint_slack = 1e-12;
};

TrialLedger wegner_minami_trial(const WegnerConfig& cfg, const ModelParams& params,
                                const FrequencyMatrix& alpha, int threads = 0);

struct SeparationConfig {
    int64_t L0 = 3;
    double g = 1.0;
    int64_t n_samples = 200;
    uint64_t master_seed = 1;
    std::optional<double> width_override;  // default: 4 g delta_0 (log-exact)
};

/// P{ Sep(gV, B_{L0^4}(0)) < width } over theta samples, omega per trial.
TrialLedger separation_probability_trial(const SeparationConfig& cfg, const ModelParams& params,
                                         const FrequencyMatrix& alpha, int threads = 0);

struct SpacingConfig {
    int j = 0;
    int64_t L0 = 3;
    double g = 1.0;
    int64_t n_samples = 100;
    int64_t omega_samples = 4;
    uint64_t master_seed = 1;
    std::optional<double> width_override;  // default: g delta_j
};

/// Per theta: min over sampled omega of Sep(Sigma(H_{B_{L_j}(0)})); the flag
/// marks spacing below the width, the complement estimates Theta_M^(j)
/// membership frequency.
TrialLedger spacing_probability_trial(const SpacingConfig& cfg, const ModelParams& params,
                                      const FrequencyMatrix& alpha, int threads = 0);

struct ThetaGoodnessConfig {
    uint64_t theta_seed = 1;
    int j_max = 0;
    int64_t L0 = 3;
    double g = 1.0;
    int64_t omega_samples = 4;
    uint64_t omega_master_seed = 7;
    std::optional<double> width_override;  // default: 4 g delta_j
    int64_t pair_budget = 200'000;
};

struct ThetaGoodnessRow {
    int j = 0;
    double min_pair_distance = 0.0;
    double width_log2 = 0.0;
    bool member = false;  // inf_omega D(L_j) >= width
};

struct ThetaGoodnessProfile {
    std::vector<ThetaGoodnessRow> rows;
    bool theta_inf_member = false;  // conjunction over j
    std::string to_json() const;
};

ThetaGoodnessProfile theta_goodness_profile(const ThetaGoodnessConfig& cfg, const ModelParams& params,
                                            const FrequencyMatrix& alpha, int threads = 0);

/// Full experiment description, JSON round-trip. A config plus the code
/// version determines every output byte.
struct ExperimentConfig {
    std::string kind;  // wegner | separation | spacing | theta-profile | schedule | validate
    uint64_t master_seed = 1;
    std::string out_dir = ".";
    int threads = 0;
    ModelParams model;
    std::vector<std::vector<double>> alpha_rows;  // d rows of nu entries
    int64_t L0 = 3;
    std::string kind_params_json = "{}";

    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;
    FrequencyMatrix alpha() const;
    void validate() const;  // throws with precise field paths
};

/// Runs the configured experiment and writes summary.json, ledger.csv and
/// schedule.json into out_dir (write-then-rename). Returns the summary path.
std::string run_experiment(const ExperimentConfig& cfg);

/// Deterministic per-trial sub-seed.
uint64_t trial_seed(uint64_t master, uint64_t stream, int64_t index);

/// Uniform torus point from a seed.
TorusPoint seeded_omega(uint64_t seed, int nu);

/// Atomic file write (temp + rename).
void write_file_atomic(const std::string& path, const std::string& content);

/// Parallel index loop with deterministic per-index outputs.
void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& body);

}  // namespace haarsh
