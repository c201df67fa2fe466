#include "haarsh/experiment.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "haarsh/certify.hpp"
#include "haarsh/eigenstates.hpp"
#include "haarsh/local_operator.hpp"
#include "haarsh/rng.hpp"

namespace haarsh {

uint64_t trial_seed(uint64_t master, uint64_t stream, int64_t index) {
    KeyHash k(master);
    k.absorb(stream);
    k.absorb(static_cast<uint64_t>(index));
    return k.bits();
}

TorusPoint seeded_omega(uint64_t seed, int nu) {
    std::vector<double> c(static_cast<size_t>(nu));
    for (int i = 0; i < nu; ++i) c[static_cast<size_t>(i)] = keyed_uniform(seed, 0xA11CE, static_cast<uint64_t>(i));
    return TorusPoint(c);
}

void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, 32));
    if (threads == 1 || n <= 1) {
        for (int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (int64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

std::pair<double, double> wilson_interval(int64_t successes, int64_t n) {
    if (n <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    double p = static_cast<double>(successes) / static_cast<double>(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void TrialLedger::finalize() {
    int64_t hits = 0;
    for (const auto& t : trials) hits += t.flag ? 1 : 0;
    frequency = trials.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials.size());
    auto [lo, hi] = wilson_interval(hits, static_cast<int64_t>(trials.size()));
    ci_low = lo;
    ci_high = hi;
}

std::string TrialLedger::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "trial,theta_seed,omega_seed,statistic,bound_log2,flag\n";
    for (const auto& t : trials)
        os << t.index << ',' << t.theta_seed << ',' << t.omega_seed << ',' << t.statistic << ','
           << bound_log2 << ',' << (t.flag ? 1 : 0) << '\n';
    return os.str();
}

namespace {

double lgamma_int(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace

TrialLedger wegner_minami_trial(const WegnerConfig& cfg, const ModelParams& params,
                                const FrequencyMatrix& alpha, int threads) {
    if (cfg.J < 1) throw std::invalid_argument("wegner_minami_trial: J must be >= 1");
    if (!(cfg.interval_width > 0.0)) throw std::invalid_argument("wegner_minami_trial: |I| must be positive");
    TrialLedger led;
    led.kind = "wegner";
    led.trials.resize(static_cast<size_t>(cfg.n_samples));
    const double lo = cfg.interval_center - cfg.interval_width / 2.0 - cfg.endpoint_slack;
    const double hi = cfg.interval_center + cfg.interval_width / 2.0 + cfg.endpoint_slack;

    // Reference bound (pi ||rho||)^J / J! * |I|^J, in log2. IID U[0,1]
    // diagonal scaled by g has density 1/g; the hull's conditional density
    // bound is a_{N~(L)}^{-1}.
    double log2_rho;
    if (cfg.model == "iid") {
        log2_rho = -std::log2(cfg.g);
    } else if (cfg.model == "haarsh") {
        int N = N_tilde(static_cast<double>(std::max<int64_t>(cfg.L, 2)), params.A, params.C_A);
        log2_rho = -amplitude(N, params.hull_params()).log2_abs - std::log2(cfg.g);
    } else {
        throw std::invalid_argument("wegner_minami_trial: unknown model '" + cfg.model + "'");
    }
    led.bound_log2 = cfg.J * (std::log2(M_PI) + log2_rho + std::log2(cfg.interval_width)) -
                     lgamma_int(cfg.J) / M_LN2;
    led.bound_is_theorem = cfg.model == "iid";
    {
        std::ostringstream os;
        os << "count of eigenvalues in [" << cfg.interval_center - cfg.interval_width / 2 << ", "
           << cfg.interval_center + cfg.interval_width / 2 << "] (endpoint slack " << cfg.endpoint_slack
           << "); flag = count >= " << cfg.J;
        led.notes = os.str();
    }

    EigensystemOptions ev_only;
    ev_only.compute_vectors = false;
    parallel_for(cfg.n_samples, threads, [&](int64_t i) {
        Trial& tr = led.trials[static_cast<size_t>(i)];
        tr.index = i;
        tr.theta_seed = trial_seed(cfg.master_seed, 0x7e67a, i);
        Eigen::VectorXd vals;
        if (cfg.model == "iid") {
            const int64_t n = cfg.n_sites;
            Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
            for (int64_t s = 0; s < n; ++s) {
                H(s, s) = cfg.g * keyed_uniform(tr.theta_seed, 0x51735, static_cast<uint64_t>(s));
                if (s + 1 < n) H(s, s + 1) = H(s + 1, s) = 1.0;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
            vals = es.eigenvalues();
        } else {
            tr.omega_seed = cfg.fixed_omega_seed ? *cfg.fixed_omega_seed
                                                 : trial_seed(cfg.master_seed, 0x03e6a, i);
            PotentialContext ctx{seeded_omega(tr.omega_seed, params.nu), ThetaField(tr.theta_seed, params.nu),
                                 alpha, params.hull_params(), cfg.g, std::nullopt};
            LatticeCube cube(Site(static_cast<size_t>(params.d), 0), cfg.L);
            vals = eigensystem(assemble(cube, ctx), ev_only).eigenvalues;
        }
        int count = 0;
        for (int64_t k = 0; k < vals.size(); ++k)
            if (vals(k) >= lo && vals(k) <= hi) ++count;
        tr.statistic = count;
        tr.flag = count >= cfg.J;
    });
    led.finalize();
    return led;
}

TrialLedger separation_probability_trial(const SeparationConfig& cfg, const ModelParams& params,
                                         const FrequencyMatrix& alpha, int threads) {
    TrialLedger led;
    led.kind = "separation";
    led.trials.resize(static_cast<size_t>(cfg.n_samples));
    DeltaBeta db = delta_beta(0, cfg.L0, params);
    LogMagnitude width = cfg.width_override
                             ? LogMagnitude::from_double(*cfg.width_override)
                             : LogMagnitude::from_double(4.0 * cfg.g) * db.delta;
    // Shape of the measure bound: L0^{8d} beta_0 (constant unknown, reported
    // as shape only).
    led.bound_log2 = 8.0 * params.d * std::log2(static_cast<double>(cfg.L0)) + db.beta.log2_abs;
    led.bound_is_theorem = false;
    led.notes = "statistic = Sep(gV, B_{L0^4}(0)); flag = Sep < width; bound column is the "
                "shape L0^{8d} beta_0 (unknown constant)";

    const int64_t radius = length_scale(2, cfg.L0);  // L0^4
    LatticeCube cube(Site(static_cast<size_t>(params.d), 0), radius);
    const int64_t n = cube.site_count();
    parallel_for(cfg.n_samples, threads, [&](int64_t i) {
        Trial& tr = led.trials[static_cast<size_t>(i)];
        tr.index = i;
        tr.theta_seed = trial_seed(cfg.master_seed, 0x5e9a7, i);
        tr.omega_seed = trial_seed(cfg.master_seed, 0x03e6a, i);
        PotentialContext ctx{seeded_omega(tr.omega_seed, params.nu), ThetaField(tr.theta_seed, params.nu),
                             alpha, params.hull_params(), cfg.g, std::nullopt};
        std::vector<double> vals(static_cast<size_t>(n));
        for (int64_t s = 0; s < n; ++s)
            vals[static_cast<size_t>(s)] =
                cfg.g * potential(cube.site(s), ctx.omega, ctx.theta, ctx.alpha, ctx.hull, ctx.truncation);
        double sep = potential_separation(vals);
        tr.statistic = sep;
        tr.flag = LogMagnitude::from_double(sep).abs_less(width);
    });
    led.finalize();
    return led;
}

TrialLedger spacing_probability_trial(const SpacingConfig& cfg, const ModelParams& params,
                                      const FrequencyMatrix& alpha, int threads) {
    TrialLedger led;
    led.kind = "spacing";
    led.trials.resize(static_cast<size_t>(cfg.n_samples));
    DeltaBeta db = delta_beta(cfg.j, cfg.L0, params);
    LogMagnitude width = cfg.width_override ? LogMagnitude::from_double(*cfg.width_override)
                                            : LogMagnitude::from_double(cfg.g) * db.delta;
    led.bound_log2 = width.log2_abs;
    led.bound_is_theorem = false;
    led.notes = "statistic = min over sampled omega of Sep(Sigma(H_{B_{L_j}(0)})); flag = below width; "
                "bound column echoes the width";

    const int64_t Lj = length_scale(cfg.j, cfg.L0);
    LatticeCube cube(Site(static_cast<size_t>(params.d), 0), Lj);
    EigensystemOptions ev_only;
    ev_only.compute_vectors = false;
    parallel_for(cfg.n_samples, threads, [&](int64_t i) {
        Trial& tr = led.trials[static_cast<size_t>(i)];
        tr.index = i;
        tr.theta_seed = trial_seed(cfg.master_seed, 0x59ac1, i);
        double min_sep = std::numeric_limits<double>::infinity();
        for (int64_t w = 0; w < cfg.omega_samples; ++w) {
            tr.omega_seed = trial_seed(cfg.master_seed, 0x03e6a, i * cfg.omega_samples + w);
            PotentialContext ctx{seeded_omega(tr.omega_seed, params.nu), ThetaField(tr.theta_seed, params.nu),
                                 alpha, params.hull_params(), cfg.g, std::nullopt};
            Eigen::VectorXd vals = eigensystem(assemble(cube, ctx), ev_only).eigenvalues;
            min_sep = std::min(min_sep, spectral_separation(vals));
        }
        tr.statistic = min_sep;
        tr.flag = LogMagnitude::from_double(min_sep).abs_less(width);
    });
    led.finalize();
    return led;
}

ThetaGoodnessProfile theta_goodness_profile(const ThetaGoodnessConfig& cfg, const ModelParams& params,
                                            const FrequencyMatrix& alpha, int threads) {
    ThetaGoodnessProfile prof;
    prof.theta_inf_member = true;
    for (int j = 0; j <= cfg.j_max; ++j) {
        DeltaBeta db = delta_beta(j, cfg.L0, params);
        LogMagnitude width = cfg.width_override ? LogMagnitude::from_double(*cfg.width_override)
                                                : LogMagnitude::from_double(4.0 * cfg.g) * db.delta;
        const int64_t Lj = length_scale(j, cfg.L0);
        const int64_t super_radius = length_scale(j + 2, cfg.L0);
        LatticeCube super(Site(static_cast<size_t>(params.d), 0), super_radius);
        std::vector<double> mins(static_cast<size_t>(cfg.omega_samples));
        parallel_for(cfg.omega_samples, threads, [&](int64_t w) {
            uint64_t oseed = trial_seed(cfg.omega_master_seed, 0x03e6a, w);
            PotentialContext ctx{seeded_omega(oseed, params.nu), ThetaField(cfg.theta_seed, params.nu),
                                 alpha, params.hull_params(), cfg.g, std::nullopt};
            mins[static_cast<size_t>(w)] =
                min_pair_spectra_distance(Lj, super, ctx, cfg.pair_budget).distance;
        });
        ThetaGoodnessRow row;
        row.j = j;
        row.min_pair_distance = *std::min_element(mins.begin(), mins.end());
        row.width_log2 = width.log2_abs;
        row.member = !LogMagnitude::from_double(row.min_pair_distance).abs_less(width);
        prof.theta_inf_member = prof.theta_inf_member && row.member;
        prof.rows.push_back(row);
    }
    return prof;
}

std::string ThetaGoodnessProfile::to_json() const {
    nlohmann::json j;
    j["theta_inf_member"] = theta_inf_member;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
        j["rows"].push_back({{"j", r.j},
                             {"min_pair_distance", r.min_pair_distance},
                             {"width_log2", r.width_log2},
                             {"member", r.member}});
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    cfg.kind = j.at("kind").get<std::string>();
    cfg.master_seed = j.value("master_seed", uint64_t{1});
    cfg.out_dir = j.value("out_dir", std::string("."));
    cfg.threads = j.value("threads", 0);
    if (j.contains("model")) {
        const auto& m = j["model"];
        cfg.model.d = m.value("d", 1);
        cfg.model.nu = m.value("nu", 1);
        cfg.model.A = m.value("A", 1);
        cfg.model.C_A = m.value("C_A", 1);
        cfg.model.A_prime = m.value("A_prime", 0);
        cfg.model.C_A_prime = m.value("C_A_prime", 1);
        cfg.model.b = m.value("b", 2.0);
        cfg.model.amp_exponent_factor = m.value("amp_exponent_factor", 2);
        cfg.model.g = m.value("g", 0.0);
        cfg.model.m = m.value("m", 1.0);
    }
    if (j.contains("alpha")) cfg.alpha_rows = j["alpha"].get<std::vector<std::vector<double>>>();
    cfg.L0 = j.value("L0", int64_t{3});
    cfg.kind_params_json = j.value("kind_params", nlohmann::json::object()).dump();
    return cfg;
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["master_seed"] = master_seed;
    j["out_dir"] = out_dir;
    j["threads"] = threads;
    j["model"] = {{"d", model.d},
                  {"nu", model.nu},
                  {"A", model.A},
                  {"C_A", model.C_A},
                  {"A_prime", model.A_prime},
                  {"C_A_prime", model.C_A_prime},
                  {"b", model.b},
                  {"amp_exponent_factor", model.amp_exponent_factor},
                  {"g", model.g},
                  {"m", model.m}};
    j["alpha"] = alpha_rows;
    j["L0"] = L0;
    j["kind_params"] = nlohmann::json::parse(kind_params_json);
    return j.dump(2);
}

FrequencyMatrix ExperimentConfig::alpha() const {
    if (alpha_rows.empty()) {
        // golden-mean default, one frequency per lattice direction
        std::vector<double> rows(static_cast<size_t>(model.d) * model.nu, (std::sqrt(5.0) - 1.0) / 2.0);
        return {model.d, model.nu, rows};
    }
    std::vector<double> flat;
    for (const auto& r : alpha_rows) flat.insert(flat.end(), r.begin(), r.end());
    return {model.d, model.nu, flat};
}

void ExperimentConfig::validate() const {
    static const std::vector<std::string> kinds = {"wegner",        "separation", "spacing",
                                                   "theta-profile", "schedule",   "validate"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        throw std::invalid_argument("config.kind: unknown experiment kind '" + kind + "'");
    double b_min = std::max((8.0 * model.d + 4.0 * model.A + 4.0 * model.A_prime) / (10.0 * model.A), 2.0);
    if (model.b < b_min) {
        std::ostringstream os;
        os << "config.model.b: " << model.b << " violates b >= max((8d+4A+4A')/(10A), 2) = " << b_min;
        throw std::invalid_argument(os.str());
    }
    if (model.amp_exponent_factor != 1 && model.amp_exponent_factor != 2)
        throw std::invalid_argument("config.model.amp_exponent_factor: must be 1 or 2");
    if (L0 < 2) throw std::invalid_argument("config.L0: must be >= 2");
    if (!alpha_rows.empty()) {
        if (static_cast<int>(alpha_rows.size()) != model.d)
            throw std::invalid_argument("config.alpha: needs exactly d rows");
        for (size_t r = 0; r < alpha_rows.size(); ++r)
            if (static_cast<int>(alpha_rows[r].size()) != model.nu)
                throw std::invalid_argument("config.alpha[" + std::to_string(r) + "]: needs nu entries");
    }
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("write_file_atomic: cannot open " + tmp);
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    nlohmann::json kp = nlohmann::json::parse(cfg.kind_params_json);
    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["config"] = nlohmann::json::parse(cfg.to_json());

    std::string ledger_csv;
    if (cfg.kind == "wegner") {
        WegnerConfig w;
        w.model = kp.value("model", std::string("iid"));
        w.n_sites = kp.value("n_sites", int64_t{8});
        w.L = kp.value("L", int64_t{2});
        w.g = kp.value("g", cfg.model.g > 0 ? cfg.model.g : 1.0);
        w.interval_center = kp.value("interval_center", 1.0);
        w.interval_width = kp.value("interval_width", 0.1);
        w.J = kp.value("J", 1);
        w.n_samples = kp.value("n_samples", int64_t{1000});
        w.master_seed = cfg.master_seed;
        TrialLedger led = wegner_minami_trial(w, cfg.model, cfg.alpha(), cfg.threads);
        summary["result"] = {{"frequency", led.frequency}, {"ci_low", led.ci_low},
                             {"ci_high", led.ci_high},     {"bound_log2", led.bound_log2},
                             {"bound_is_theorem", led.bound_is_theorem}, {"notes", led.notes}};
        ledger_csv = led.to_csv();
    } else if (cfg.kind == "separation") {
        SeparationConfig s;
        s.L0 = cfg.L0;
        s.g = kp.value("g", cfg.model.g > 0 ? cfg.model.g : 1.0);
        s.n_samples = kp.value("n_samples", int64_t{200});
        s.master_seed = cfg.master_seed;
        if (kp.contains("width")) s.width_override = kp["width"].get<double>();
        TrialLedger led = separation_probability_trial(s, cfg.model, cfg.alpha(), cfg.threads);
        summary["result"] = {{"frequency", led.frequency}, {"ci_low", led.ci_low},
                             {"ci_high", led.ci_high},     {"bound_shape_log2", led.bound_log2},
                             {"notes", led.notes}};
        ledger_csv = led.to_csv();
    } else if (cfg.kind == "spacing") {
        SpacingConfig s;
        s.j = kp.value("j", 0);
        s.L0 = cfg.L0;
        s.g = kp.value("g", cfg.model.g > 0 ? cfg.model.g : 1.0);
        s.n_samples = kp.value("n_samples", int64_t{100});
        s.omega_samples = kp.value("omega_samples", int64_t{4});
        s.master_seed = cfg.master_seed;
        if (kp.contains("width")) s.width_override = kp["width"].get<double>();
        TrialLedger led = spacing_probability_trial(s, cfg.model, cfg.alpha(), cfg.threads);
        summary["result"] = {{"frequency", led.frequency},
                             {"theta_M_membership_frequency", 1.0 - led.frequency},
                             {"ci_low", led.ci_low},
                             {"ci_high", led.ci_high},
                             {"width_log2", led.bound_log2},
                             {"notes", led.notes}};
        ledger_csv = led.to_csv();
    } else if (cfg.kind == "theta-profile") {
        ThetaGoodnessConfig t;
        t.theta_seed = kp.value("theta_seed", cfg.master_seed);
        t.j_max = kp.value("j_max", 0);
        t.L0 = cfg.L0;
        t.g = kp.value("g", cfg.model.g > 0 ? cfg.model.g : 1.0);
        t.omega_samples = kp.value("omega_samples", int64_t{4});
        t.omega_master_seed = kp.value("omega_master_seed", uint64_t{7});
        if (kp.contains("width")) t.width_override = kp["width"].get<double>();
        t.pair_budget = kp.value("pair_budget", int64_t{200'000});
        ThetaGoodnessProfile prof = theta_goodness_profile(t, cfg.model, cfg.alpha(), cfg.threads);
        summary["result"] = nlohmann::json::parse(prof.to_json());
    } else if (cfg.kind == "validate") {
        summary["result"] = nlohmann::json::parse(validate_params(cfg.model, cfg.L0).to_json());
    } else if (cfg.kind == "schedule") {
        summary["result"] = nlohmann::json::parse(schedule_dump(cfg.model, cfg.L0, kp.value("j_max", 3)));
    }

    summary["schedule"] = nlohmann::json::parse(schedule_dump(cfg.model, cfg.L0, kp.value("j_max", 3)));
    std::string summary_path = cfg.out_dir + "/summary.json";
    write_file_atomic(summary_path, summary.dump(2) + "\n");
    if (!ledger_csv.empty()) write_file_atomic(cfg.out_dir + "/ledger.csv", ledger_csv);
    return summary_path;
}

}  // namespace haarsh
