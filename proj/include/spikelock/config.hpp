#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikelock/detector.hpp"
#include "spikelock/integrate.hpp"
#include "spikelock/model.hpp"
#include "spikelock/reliability.hpp"
#include "spikelock/synapse.hpp"

namespace spikelock {

inline constexpr const char* version_string = "0.3.0";

// Parse or validation failure; the message carries the line number when one
// is known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Experiment description, drawn from INI-style text: `key = value` grouped
// under [section] headers, full-line # comments, quoted strings, and
// [a, b, c] lists. Unknown sections or keys are rejected with the offending
// line number; a bare key before any section header belongs to [experiment].
struct ExperimentConfig {
    struct Model {
        double c = 1.0;
        double g_na = 120.0;
        double g_k = 36.0;
        double g_leak = 0.3;
        double e_na = 115.0;
        double e_k = -12.0;
    } model;

    struct Synapse {
        double alpha = 0.8;
        double tau_s = 5.0;
        double g_s = 0.3;
        double e_s = 65.0;
    } synapse;

    struct Input {
        std::string kind = "none"; // none | periodic | random_dead_time | explicit
        double period = 15.0;
        double t_start = -1.0; // < 0 means "one period in"
        long long count = -1;  // < 0 means "fill the horizon"
        double rate = 0.02;    // 1/ms
        double dead_time = 20.0;
        std::vector<double> times; // kind = explicit
    } input;

    struct Solver {
        std::string method = "dopri5"; // dopri5 | rk4
        double rel_tol = 1e-8;
        double abs_tol = 1e-10;
        double max_step = 0.1; // also the rk4 fixed step
        double output_dt = 0.01;
    } solver;

    struct Detector {
        double v_low = 20.0;
        double v_high = 51.5;
        double tau_e = 0.5;
    } detector;

    struct Ensemble {
        long long n_trials = 10;
        std::string ic_sampling = "uniform_box"; // uniform_box | ball
        double ball_radius = 1.0;
        double param_jitter = 0.20;
        std::vector<std::string> jitter_params = {"g_na", "g_k", "g_leak", "g_s",
                                                  "tau_s", "alpha", "c"};
        double transient_cut = 50.0;
        double match_window = 0.0; // 0 = automatic
    } ensemble;

    struct Experiment {
        double t_end = 100.0;
        long long n_pairs = 20;
        long long n_ics = 5;
        std::uint64_t seed = 12345;
        std::string preset; // empty = no preset applied
    } experiment;

    struct Output {
        std::string dir; // empty = SPIKELOCK_OUT or "out"
    } output;

    struct Run { // present only in manifests
        std::string command;
        std::string version;
    } run;

    int threads = 1;

    // Component builders; each validates and throws ConfigError on a bad
    // combination.
    NeuronModel make_model() const;
    SynapseParams make_synapse() const;
    SolverSettings make_solver() const;
    DetectorConfig make_detector() const;
    ImpulseTrain make_train() const; // consumes experiment.seed for random kinds
    EnsembleConfig make_ensemble() const;

    void validate() const; // runs every builder
};

// Strict parse; when the text selects a preset, the preset's values are
// loaded first and the file's own entries overlay them.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Built-in preset text by name (fig3-sparse, fig3-dense, fig4-sparse,
// fig4-dense); throws ConfigError for unknown names.
const std::string& preset_text(const std::string& name);
std::vector<std::string> preset_names();

// Full config echo, parseable by parse_config and stable byte-for-byte for
// identical configs (no timestamps, shortest round-trip numbers).
void write_manifest(std::ostream& out, const ExperimentConfig& config,
                    const std::string& command);

} // namespace spikelock
