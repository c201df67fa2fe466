#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "haarsh/certify.hpp"
#include "haarsh/eigenstates.hpp"
#include "haarsh/experiment.hpp"
#include "haarsh/hull.hpp"
#include "haarsh/local_operator.hpp"
#include "haarsh/rng.hpp"
#include "haarsh/schedule.hpp"
#include "haarsh/torus.hpp"

using namespace haarsh;

namespace {

struct CommonOpts {
    uint64_t seed = 1;
    std::string out_dir;
    int threads = 0;
    ModelParams model;
    int64_t L0 = 3;
    double alpha_value = 0.6180339887498949;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--seed", c.seed, "master seed (env HAARSH_MASTER_SEED overrides)");
    cmd->add_option("--out-dir", c.out_dir, "output directory; stdout when empty");
    cmd->add_option("--threads", c.threads, "worker threads (0 = auto)");
    cmd->add_option("--d", c.model.d, "lattice dimension");
    cmd->add_option("--nu", c.model.nu, "torus dimension");
    cmd->add_option("--A", c.model.A, "aperiodicity exponent");
    cmd->add_option("--C-A", c.model.C_A, "aperiodicity constant");
    cmd->add_option("--A-prime", c.model.A_prime, "divergence exponent");
    cmd->add_option("--C-A-prime", c.model.C_A_prime, "divergence constant");
    cmd->add_option("--b", c.model.b, "hull decay exponent");
    cmd->add_option("--ca", c.model.amp_exponent_factor, "amplitude exponent factor (1 or 2)");
    cmd->add_option("--g", c.model.g, "disorder amplitude");
    cmd->add_option("--m", c.model.m, "target mass");
    cmd->add_option("--L0", c.L0, "initial length scale");
    cmd->add_option("--alpha", c.alpha_value, "shift frequency (same for every direction/axis)");
}

void apply_seed_env(CommonOpts& c) {
    if (const char* env = std::getenv("HAARSH_MASTER_SEED")) c.seed = std::strtoull(env, nullptr, 10);
}

FrequencyMatrix alpha_of(const CommonOpts& c) {
    std::vector<double> rows(static_cast<size_t>(c.model.d) * c.model.nu, c.alpha_value);
    return {c.model.d, c.model.nu, rows};
}

void emit(const CommonOpts& c, const std::string& name, const std::string& payload) {
    if (c.out_dir.empty()) {
        std::cout << payload << "\n";
    } else {
        std::filesystem::create_directories(c.out_dir);
        write_file_atomic(c.out_dir + "/" + name, payload + "\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"haarsh: deterministic Haar-series potentials, finite-cube spectra and "
                 "localization certificates"};
    app.require_subcommand(1);

    CommonOpts c;

    // hull-eval
    auto* hull_cmd = app.add_subcommand("hull-eval", "evaluate the hull v(omega; theta)");
    std::vector<double> omega_coords{0.25};
    double tol = 1e-15;
    int truncation = -1;
    add_common(hull_cmd, c);
    hull_cmd->add_option("--omega", omega_coords, "torus point coordinates");
    hull_cmd->add_option("--tol", tol, "truncation tolerance");
    hull_cmd->add_option("--truncation", truncation, "fixed truncation level (-1 = adaptive)");

    // spectrum
    auto* spec_cmd = app.add_subcommand("spectrum", "diagonalize H on a cube and dump the spectrum");
    int64_t box_L = 10;
    uint64_t omega_seed = 7;
    bool with_vectors = false;
    add_common(spec_cmd, c);
    spec_cmd->add_option("--L", box_L, "cube radius");
    spec_cmd->add_option("--omega-seed", omega_seed, "seed for the sampled phase point");
    spec_cmd->add_flag("--vectors", with_vectors, "include eigenvectors in the dump");

    // msa-certify
    auto* msa_cmd = app.add_subcommand("msa-certify", "sparseness certificates and scale induction");
    int msa_jmax = 0;
    int msa_samples = 10;
    std::vector<double> msa_widths;
    int64_t pair_budget = 200'000;
    add_common(msa_cmd, c);
    msa_cmd->add_option("--j-max", msa_jmax, "largest scale index");
    msa_cmd->add_option("--samples", msa_samples, "(omega, theta) sample count");
    msa_cmd->add_option("--widths", msa_widths, "practical SS widths per scale j >= 0");
    msa_cmd->add_option("--pair-budget", pair_budget, "disjoint-pair enumeration budget");

    // eigenstates
    auto* eig_cmd = app.add_subcommand("eigenstates", "localization analysis of a box eigenbasis");
    double floor = 1e-12;
    add_common(eig_cmd, c);
    eig_cmd->add_option("--L", box_L, "cube radius");
    eig_cmd->add_option("--omega-seed", omega_seed, "seed for the sampled phase point");
    eig_cmd->add_option("--floor", floor, "numerical floor for the decay checks");

    // dynamics
    auto* dyn_cmd = app.add_subcommand("dynamics", "dynamical kernel |<1_x|e^{-iHt}|1_y>| on a t-grid");
    int64_t probe_x = 0;
    int t_points = 50;
    double t_max = 10.0;
    add_common(dyn_cmd, c);
    dyn_cmd->add_option("--L", box_L, "cube radius");
    dyn_cmd->add_option("--omega-seed", omega_seed, "seed for the sampled phase point");
    dyn_cmd->add_option("--x", probe_x, "probe site (1d coordinate)");
    dyn_cmd->add_option("--t-points", t_points, "grid size");
    dyn_cmd->add_option("--t-max", t_max, "grid endpoint");

    // wegner
    auto* weg_cmd = app.add_subcommand("wegner", "Wegner/Minami frequency trial");
    WegnerConfig wcfg;
    add_common(weg_cmd, c);
    weg_cmd->add_option("--model", wcfg.model, "iid | haarsh");
    weg_cmd->add_option("--sites", wcfg.n_sites, "iid segment length");
    weg_cmd->add_option("--L", wcfg.L, "haarsh box radius");
    weg_cmd->add_option("--trial-g", wcfg.g, "disorder amplitude for the trial");
    weg_cmd->add_option("--center", wcfg.interval_center, "interval center");
    weg_cmd->add_option("--width", wcfg.interval_width, "interval width");
    weg_cmd->add_option("--J", wcfg.J, "eigenvalue count threshold");
    weg_cmd->add_option("--samples", wcfg.n_samples, "theta samples");

    // spacing
    auto* spa_cmd = app.add_subcommand("spacing", "spectral spacing trial at scale j");
    SpacingConfig scfg;
    double spacing_width = 0.0;
    add_common(spa_cmd, c);
    spa_cmd->add_option("--j", scfg.j, "scale index");
    spa_cmd->add_option("--trial-g", scfg.g, "disorder amplitude for the trial");
    spa_cmd->add_option("--samples", scfg.n_samples, "theta samples");
    spa_cmd->add_option("--omega-samples", scfg.omega_samples, "omega samples per theta");
    spa_cmd->add_option("--width", spacing_width, "practical width override (0 = paper-exact)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment described by a JSON config");
    std::string config_path;
    sweep_cmd->add_option("--config", config_path, "config file")->required();

    // schedule-dump
    auto* sched_cmd = app.add_subcommand("schedule-dump", "scale schedule table");
    int sched_jmax = 3;
    add_common(sched_cmd, c);
    sched_cmd->add_option("--j-max", sched_jmax, "largest scale index");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "check the parameter-table conditions");
    add_common(val_cmd, c);

    CLI11_PARSE(app, argc, argv);
    apply_seed_env(c);

    try {
        if (hull_cmd->parsed()) {
            HullParams hp = c.model.hull_params();
            hp.nu = static_cast<int>(omega_coords.size());
            TorusPoint omega(omega_coords);
            ThetaField theta(c.seed, hp.nu);
            nlohmann::json out;
            out["omega"] = omega.coords;
            out["seed"] = c.seed;
            if (truncation >= 0) {
                out["value"] = hull_truncated(omega, theta, truncation, hp);
                out["truncation"] = truncation;
            } else {
                HullValue hv = hull(omega, theta, hp, tol);
                out["value"] = hv.value;
                out["truncation"] = hv.truncation;
                out["tol"] = tol;
            }
            emit(c, "hull.json", out.dump(2));
        } else if (spec_cmd->parsed()) {
            PotentialContext ctx{seeded_omega(omega_seed, c.model.nu), ThetaField(c.seed, c.model.nu),
                                 alpha_of(c), c.model.hull_params(), c.model.g, std::nullopt};
            LatticeCube cube(Site(static_cast<size_t>(c.model.d), 0), box_L);
            SpectrumReport rep = eigensystem(assemble(cube, ctx));
            emit(c, "spectrum.json", rep.to_json(with_vectors));
        } else if (msa_cmd->parsed()) {
            ScaleInductionConfig cfg;
            cfg.params = c.model;
            cfg.alpha = alpha_of(c);
            cfg.L0 = c.L0;
            cfg.j_max = msa_jmax;
            cfg.n_samples = msa_samples;
            cfg.master_seed = c.seed;
            cfg.ss_widths = msa_widths;
            cfg.m = c.model.m;
            cfg.pair_budget = pair_budget;
            emit(c, "msa_certify.json", scale_induction_report(cfg));
        } else if (eig_cmd->parsed()) {
            PotentialContext ctx{seeded_omega(omega_seed, c.model.nu), ThetaField(c.seed, c.model.nu),
                                 alpha_of(c), c.model.hull_params(), c.model.g, std::nullopt};
            LatticeCube cube(Site(static_cast<size_t>(c.model.d), 0), box_L);
            LocalOperator op = assemble(cube, ctx);
            EigensystemOptions opts;
            opts.polish = true;
            SpectrumReport rep = eigensystem(op, opts);
            BasisReport basis = center_bijection(op, rep, c.model.m, floor, 1e-12);
            emit(c, "eigenstates.json", basis.to_json());
        } else if (dyn_cmd->parsed()) {
            PotentialContext ctx{seeded_omega(omega_seed, c.model.nu), ThetaField(c.seed, c.model.nu),
                                 alpha_of(c), c.model.hull_params(), c.model.g, std::nullopt};
            LatticeCube cube(Site(static_cast<size_t>(c.model.d), 0), box_L);
            LocalOperator op = assemble(cube, ctx);
            EigensystemOptions opts;
            opts.polish = true;
            SpectrumReport rep = eigensystem(op, opts);
            Site probe(static_cast<size_t>(c.model.d), 0);
            probe[0] = probe_x;
            int64_t xi = cube.index_of(probe);
            if (xi < 0) throw std::invalid_argument("dynamics: probe site outside the cube");
            nlohmann::json out;
            out["x"] = probe_x;
            out["t_max"] = t_max;
            out["t_points"] = t_points;
            nlohmann::json rows = nlohmann::json::array();
            for (int64_t yi = 0; yi < cube.site_count(); ++yi) {
                double sup = 0.0;
                for (int k = 0; k < t_points; ++k) {
                    double t = t_max * (k + 1) / t_points;
                    sup = std::max(sup, dynamical_kernel_time(rep, xi, yi, t));
                }
                rows.push_back({{"y", cube.site(yi)[0]}, {"sup_t_kernel", sup}});
            }
            out["rows"] = rows;
            emit(c, "dynamics.json", out.dump(2));
        } else if (weg_cmd->parsed()) {
            wcfg.master_seed = c.seed;
            TrialLedger led = wegner_minami_trial(wcfg, c.model, alpha_of(c), c.threads);
            nlohmann::json out;
            out["frequency"] = led.frequency;
            out["ci_low"] = led.ci_low;
            out["ci_high"] = led.ci_high;
            out["bound_log2"] = led.bound_log2;
            out["bound_is_theorem"] = led.bound_is_theorem;
            out["notes"] = led.notes;
            emit(c, "wegner.json", out.dump(2));
            if (!c.out_dir.empty()) write_file_atomic(c.out_dir + "/wegner_ledger.csv", led.to_csv());
        } else if (spa_cmd->parsed()) {
            scfg.L0 = c.L0;
            scfg.master_seed = c.seed;
            if (spacing_width > 0.0) scfg.width_override = spacing_width;
            TrialLedger led = spacing_probability_trial(scfg, c.model, alpha_of(c), c.threads);
            nlohmann::json out;
            out["frequency_below_width"] = led.frequency;
            out["theta_M_membership_frequency"] = 1.0 - led.frequency;
            out["ci_low"] = led.ci_low;
            out["ci_high"] = led.ci_high;
            out["width_log2"] = led.bound_log2;
            emit(c, "spacing.json", out.dump(2));
            if (!c.out_dir.empty()) write_file_atomic(c.out_dir + "/spacing_ledger.csv", led.to_csv());
        } else if (sweep_cmd->parsed()) {
            std::ifstream is(config_path);
            if (!is) throw std::runtime_error("sweep: cannot open " + config_path);
            std::stringstream ss;
            ss << is.rdbuf();
            ExperimentConfig cfg = ExperimentConfig::from_json(ss.str());
            if (const char* env = std::getenv("HAARSH_MASTER_SEED"))
                cfg.master_seed = std::strtoull(env, nullptr, 10);
            std::string path = run_experiment(cfg);
            std::cout << path << "\n";
        } else if (sched_cmd->parsed()) {
            emit(c, "schedule.json", schedule_dump(c.model, c.L0, sched_jmax));
        } else if (val_cmd->parsed()) {
            ValidationReport rep = validate_params(c.model, c.L0);
            emit(c, "validate.json", rep.to_json());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
