#include "spikelock/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "spikelock/csv.hpp"
#include "spikelock/hh.hpp"
#include "spikelock/rng.hpp"

namespace spikelock {

namespace {

// stream id for the shared input train, disjoint from per-trial stream ids
// (trials use 0 .. n_trials-1)
constexpr std::uint64_t train_stream_id = 0x747261696e;

const char* const known_sections[] = {"model",    "synapse",  "input",
                                      "solver",   "detector", "ensemble",
                                      "experiment", "output", "run"};

bool known_section(const std::string& name) {
    for (const char* s : known_sections)
        if (name == s)
            return true;
    return false;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

struct RawValue {
    bool is_list = false;
    std::string scalar;
    std::vector<std::string> items;
    std::size_t line = 0;
};

struct Entry {
    std::string section;
    std::string key;
    RawValue value;
};

std::string unquote(const std::string& v, std::size_t line) {
    if (v.size() < 2 || v.back() != '"')
        fail(line, "unterminated string " + v);
    const std::string inner = v.substr(1, v.size() - 2);
    if (inner.find('"') != std::string::npos)
        fail(line, "embedded quote in string " + v);
    return inner;
}

std::string parse_scalar(const std::string& v, std::size_t line) {
    if (!v.empty() && v.front() == '"')
        return unquote(v, line);
    for (char c : v)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '[' ||
            c == ']')
            fail(line, "value '" + v + "' must be quoted");
    return v;
}

RawValue parse_value(const std::string& raw, std::size_t line) {
    RawValue val;
    val.line = line;
    const std::string v = trim(raw);
    if (v.empty())
        fail(line, "missing value");

    if (v.front() == '[') {
        if (v.back() != ']')
            fail(line, "unterminated list");
        val.is_list = true;
        const std::string inner = trim(v.substr(1, v.size() - 2));
        if (inner.empty())
            return val;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = inner.find(',', start);
            const std::string item =
                trim(comma == std::string::npos ? inner.substr(start)
                                                : inner.substr(start, comma - start));
            if (item.empty())
                fail(line, "empty list item");
            val.items.push_back(parse_scalar(item, line));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        return val;
    }

    val.scalar = parse_scalar(v, line);
    return val;
}

std::vector<Entry> lex(const std::string& text) {
    std::vector<Entry> entries;
    std::istringstream in(text);
    std::string line;
    std::string section = "experiment"; // bare keys ahead of a header land here
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;

        if (t.front() == '[') {
            if (t.back() != ']')
                fail(line_no, "unterminated section header " + t);
            section = trim(t.substr(1, t.size() - 2));
            if (!known_section(section))
                fail(line_no, "unknown section [" + section + "]");
            continue;
        }

        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            fail(line_no, "expected key = value, got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            fail(line_no, "missing key");
        for (char c : key)
            if (!(std::islower(static_cast<unsigned char>(c)) ||
                  std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
                fail(line_no, "malformed key '" + key + "'");

        entries.push_back(Entry{section, key, parse_value(t.substr(eq + 1), line_no)});
    }

    for (std::size_t i = 0; i < entries.size(); ++i)
        for (std::size_t j = i + 1; j < entries.size(); ++j)
            if (entries[i].section == entries[j].section &&
                entries[i].key == entries[j].key)
                fail(entries[j].value.line,
                     "duplicate key '" + entries[j].key + "' in [" +
                         entries[j].section + "] (first on line " +
                         std::to_string(entries[i].value.line) + ")");
    return entries;
}

double to_double(const Entry& e) {
    if (e.value.is_list)
        fail(e.value.line, "key '" + e.key + "' expects a number, got a list");
    double x = 0.0;
    const char* first = e.value.scalar.data();
    const char* last = first + e.value.scalar.size();
    const auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc{} || res.ptr != last)
        fail(e.value.line, "key '" + e.key + "' expects a number, got '" +
                               e.value.scalar + "'");
    return x;
}

long long to_int(const Entry& e) {
    if (e.value.is_list)
        fail(e.value.line, "key '" + e.key + "' expects an integer, got a list");
    long long x = 0;
    const char* first = e.value.scalar.data();
    const char* last = first + e.value.scalar.size();
    const auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc{} || res.ptr != last)
        fail(e.value.line, "key '" + e.key + "' expects an integer, got '" +
                               e.value.scalar + "'");
    return x;
}

std::uint64_t to_uint64(const Entry& e) {
    if (e.value.is_list)
        fail(e.value.line, "key '" + e.key + "' expects an integer, got a list");
    unsigned long long x = 0;
    const char* first = e.value.scalar.data();
    const char* last = first + e.value.scalar.size();
    const auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc{} || res.ptr != last)
        fail(e.value.line, "key '" + e.key + "' expects a nonnegative integer, got '" +
                               e.value.scalar + "'");
    return x;
}

std::string to_string(const Entry& e) {
    if (e.value.is_list)
        fail(e.value.line, "key '" + e.key + "' expects a string, got a list");
    return e.value.scalar;
}

std::vector<std::string> to_string_list(const Entry& e) {
    if (!e.value.is_list)
        fail(e.value.line, "key '" + e.key + "' expects a list like [a, b]");
    return e.value.items;
}

std::vector<double> to_double_list(const Entry& e) {
    if (!e.value.is_list)
        fail(e.value.line, "key '" + e.key + "' expects a list like [1, 2.5]");
    std::vector<double> out;
    out.reserve(e.value.items.size());
    for (const std::string& item : e.value.items) {
        double x = 0.0;
        const char* first = item.data();
        const char* last = first + item.size();
        const auto res = std::from_chars(first, last, x);
        if (res.ec != std::errc{} || res.ptr != last)
            fail(e.value.line, "key '" + e.key + "' has a non-numeric item '" + item + "'");
        out.push_back(x);
    }
    return out;
}

[[noreturn]] void unknown_key(const Entry& e) {
    fail(e.value.line, "unknown key '" + e.key + "' in section [" + e.section + "]");
}

void apply_entry(ExperimentConfig& cfg, const Entry& e) {
    if (e.section == "model") {
        if (e.key == "c")
            cfg.model.c = to_double(e);
        else if (e.key == "g_na")
            cfg.model.g_na = to_double(e);
        else if (e.key == "g_k")
            cfg.model.g_k = to_double(e);
        else if (e.key == "g_leak")
            cfg.model.g_leak = to_double(e);
        else if (e.key == "e_na")
            cfg.model.e_na = to_double(e);
        else if (e.key == "e_k")
            cfg.model.e_k = to_double(e);
        else
            unknown_key(e);
    } else if (e.section == "synapse") {
        if (e.key == "alpha")
            cfg.synapse.alpha = to_double(e);
        else if (e.key == "tau_s")
            cfg.synapse.tau_s = to_double(e);
        else if (e.key == "g_s")
            cfg.synapse.g_s = to_double(e);
        else if (e.key == "e_s")
            cfg.synapse.e_s = to_double(e);
        else
            unknown_key(e);
    } else if (e.section == "input") {
        if (e.key == "kind")
            cfg.input.kind = to_string(e);
        else if (e.key == "period")
            cfg.input.period = to_double(e);
        else if (e.key == "t_start")
            cfg.input.t_start = to_double(e);
        else if (e.key == "count")
            cfg.input.count = to_int(e);
        else if (e.key == "rate")
            cfg.input.rate = to_double(e);
        else if (e.key == "dead_time")
            cfg.input.dead_time = to_double(e);
        else if (e.key == "times")
            cfg.input.times = to_double_list(e);
        else
            unknown_key(e);
    } else if (e.section == "solver") {
        if (e.key == "method")
            cfg.solver.method = to_string(e);
        else if (e.key == "rel_tol")
            cfg.solver.rel_tol = to_double(e);
        else if (e.key == "abs_tol")
            cfg.solver.abs_tol = to_double(e);
        else if (e.key == "max_step")
            cfg.solver.max_step = to_double(e);
        else if (e.key == "output_dt")
            cfg.solver.output_dt = to_double(e);
        else
            unknown_key(e);
    } else if (e.section == "detector") {
        if (e.key == "v_low")
            cfg.detector.v_low = to_double(e);
        else if (e.key == "v_high")
            cfg.detector.v_high = to_double(e);
        else if (e.key == "tau_e")
            cfg.detector.tau_e = to_double(e);
        else
            unknown_key(e);
    } else if (e.section == "ensemble") {
        if (e.key == "n_trials")
            cfg.ensemble.n_trials = to_int(e);
        else if (e.key == "ic_sampling")
            cfg.ensemble.ic_sampling = to_string(e);
        else if (e.key == "ball_radius")
            cfg.ensemble.ball_radius = to_double(e);
        else if (e.key == "param_jitter")
            cfg.ensemble.param_jitter = to_double(e);
        else if (e.key == "jitter_params")
            cfg.ensemble.jitter_params = to_string_list(e);
        else if (e.key == "transient_cut")
            cfg.ensemble.transient_cut = to_double(e);
        else if (e.key == "match_window")
            cfg.ensemble.match_window = to_double(e);
        else
            unknown_key(e);
    } else if (e.section == "experiment") {
        if (e.key == "t_end")
            cfg.experiment.t_end = to_double(e);
        else if (e.key == "n_pairs")
            cfg.experiment.n_pairs = to_int(e);
        else if (e.key == "n_ics")
            cfg.experiment.n_ics = to_int(e);
        else if (e.key == "seed")
            cfg.experiment.seed = to_uint64(e);
        else if (e.key == "preset")
            cfg.experiment.preset = to_string(e);
        else if (e.key == "threads") {
            const long long n = to_int(e);
            if (n < 1)
                fail(e.value.line, "threads must be at least 1");
            cfg.threads = static_cast<int>(n);
        } else
            unknown_key(e);
    } else if (e.section == "output") {
        if (e.key == "dir")
            cfg.output.dir = to_string(e);
        else
            unknown_key(e);
    } else if (e.section == "run") {
        if (e.key == "command")
            cfg.run.command = to_string(e);
        else if (e.key == "version")
            cfg.run.version = to_string(e);
        else
            unknown_key(e);
    } else {
        fail(e.value.line, "unknown section [" + e.section + "]");
    }
}

} // namespace

const std::string& preset_text(const std::string& name) {
    static const std::map<std::string, std::string> presets = {
        {"fig3-sparse", R"(
[synapse]
alpha = 0.8
tau_s = 5
g_s = 0.3
e_s = 65

[input]
kind = "periodic"
period = 15

[experiment]
t_end = 500
n_ics = 5
n_pairs = 5
)"},
        {"fig3-dense", R"(
[synapse]
alpha = 0.8
tau_s = 5
g_s = 0.3
e_s = 65

[input]
kind = "periodic"
period = 0.5

[experiment]
t_end = 500
n_ics = 5
n_pairs = 5
)"},
        {"fig4-sparse", R"(
[synapse]
alpha = 1
tau_s = 4
g_s = 0.425
e_s = 65

[input]
kind = "random_dead_time"
rate = 0.02
dead_time = 20

[ensemble]
n_trials = 10
param_jitter = 0.2
jitter_params = [g_s, tau_s, alpha]
transient_cut = 50

[experiment]
t_end = 300
seed = 7
)"},
        {"fig4-dense", R"(
[synapse]
alpha = 1
tau_s = 4
g_s = 0.425
e_s = 65

[input]
kind = "periodic"
period = 0.01

[ensemble]
n_trials = 10
param_jitter = 0.2
jitter_params = [g_s, tau_s, alpha]
transient_cut = 50

[experiment]
t_end = 300
seed = 7
)"},
    };
    const auto it = presets.find(name);
    if (it == presets.end()) {
        std::string names;
        for (const std::string& n : preset_names())
            names += (names.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (available: " + names + ")");
    }
    return it->second;
}

std::vector<std::string> preset_names() {
    return {"fig3-sparse", "fig3-dense", "fig4-sparse", "fig4-dense"};
}

ExperimentConfig parse_config(const std::string& text) {
    std::vector<Entry> entries = lex(text);

    std::string preset;
    for (const Entry& e : entries)
        if (e.section == "experiment" && e.key == "preset" && !e.value.is_list)
            preset = e.value.scalar;

    if (!preset.empty()) {
        std::vector<Entry> merged = lex(preset_text(preset));
        for (Entry& user : entries) {
            bool replaced = false;
            for (Entry& base : merged)
                if (base.section == user.section && base.key == user.key) {
                    base = user; // the file's own entry wins over the preset
                    replaced = true;
                    break;
                }
            if (!replaced)
                merged.push_back(std::move(user));
        }
        entries = std::move(merged);
    }

    ExperimentConfig cfg;
    for (const Entry& e : entries)
        apply_entry(cfg, e);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

NeuronModel ExperimentConfig::make_model() const {
    try {
        return hh::model(model.c, model.g_na, model.g_k, model.g_leak, model.e_na,
                         model.e_k);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("[model] ") + e.what());
    }
}

SynapseParams ExperimentConfig::make_synapse() const {
    SynapseParams p;
    p.alpha = synapse.alpha;
    p.tau_s = synapse.tau_s;
    p.g_s = synapse.g_s;
    p.E_s = synapse.e_s;
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("[synapse] ") + e.what());
    }
    return p;
}

SolverSettings ExperimentConfig::make_solver() const {
    SolverSettings s;
    if (solver.method == "dopri5")
        s.method = SolverMethod::dopri5;
    else if (solver.method == "rk4")
        s.method = SolverMethod::rk4;
    else
        throw ConfigError("[solver] unknown method '" + solver.method +
                          "' (expected dopri5 or rk4)");
    s.rel_tol = solver.rel_tol;
    s.abs_tol = solver.abs_tol;
    s.max_step = solver.max_step;
    s.output_dt = solver.output_dt;
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("[solver] ") + e.what());
    }
    return s;
}

DetectorConfig ExperimentConfig::make_detector() const {
    DetectorConfig d;
    d.v_low = detector.v_low;
    d.v_high = detector.v_high;
    d.tau_e = detector.tau_e;
    try {
        d.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("[detector] ") + e.what());
    }
    return d;
}

ImpulseTrain ExperimentConfig::make_train() const {
    try {
        ImpulseTrain train;
        if (input.kind == "none") {
            // stays empty
        } else if (input.kind == "periodic") {
            const double t_start = input.t_start < 0.0 ? input.period : input.t_start;
            if (input.count >= 0)
                train = periodic_train(input.period, t_start,
                                       static_cast<std::size_t>(input.count));
            else
                train = periodic_train_until(input.period, t_start, experiment.t_end);
        } else if (input.kind == "random_dead_time") {
            rng_stream rng(experiment.seed, train_stream_id);
            train = random_dead_time_train(input.rate, input.dead_time, rng,
                                           experiment.t_end);
        } else if (input.kind == "explicit") {
            train = ImpulseTrain(input.times);
        } else {
            throw ConfigError("[input] unknown kind '" + input.kind +
                              "' (expected none, periodic, random_dead_time, or "
                              "explicit)");
        }
        if (!train.empty() && train.times().back() >= experiment.t_end)
            throw ConfigError("[input] impulse at " + csv::format(train.times().back()) +
                              " ms is not strictly before t_end = " +
                              csv::format(experiment.t_end));
        return train;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("[input] ") + e.what());
    }
}

EnsembleConfig ExperimentConfig::make_ensemble() const {
    EnsembleConfig c;
    if (ensemble.n_trials < 0 || ensemble.n_trials > 1'000'000)
        throw ConfigError("[ensemble] n_trials out of range");
    c.n_trials = static_cast<int>(ensemble.n_trials);
    if (ensemble.ic_sampling == "uniform_box")
        c.ic_sampling = ICSampling::uniform_box;
    else if (ensemble.ic_sampling == "ball")
        c.ic_sampling = ICSampling::ball;
    else
        throw ConfigError("[ensemble] unknown ic_sampling '" + ensemble.ic_sampling +
                          "' (expected uniform_box or ball)");
    c.ball_radius = ensemble.ball_radius;
    c.param_jitter = ensemble.param_jitter;
    c.jitter_params = ensemble.jitter_params;
    c.seed = experiment.seed;
    c.train = make_train();
    c.transient_cut = ensemble.transient_cut;
    c.t_end = experiment.t_end;
    c.match_window = ensemble.match_window;
    c.threads = threads;
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("[ensemble] ") + e.what());
    }
    return c;
}

void ExperimentConfig::validate() const {
    if (!(experiment.t_end > 0.0))
        throw ConfigError("[experiment] t_end must be positive");
    if (experiment.n_pairs < 1)
        throw ConfigError("[experiment] n_pairs must be at least 1");
    if (experiment.n_ics < 1)
        throw ConfigError("[experiment] n_ics must be at least 1");
    make_model();
    make_synapse();
    make_solver();
    make_detector();
    make_train();
    if (ensemble.n_trials >= 2)
        make_ensemble();
}

namespace {

std::string quoted(const std::string& s) { return '"' + s + '"'; }

std::string bare_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0)
            out += ", ";
        out += items[i];
    }
    return out + "]";
}

std::string number_list(const std::vector<double>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0)
            out += ", ";
        out += csv::format(items[i]);
    }
    return out + "]";
}

} // namespace

void write_manifest(std::ostream& out, const ExperimentConfig& config,
                    const std::string& command) {
    const auto num = [](double x) { return csv::format(x); };
    out << "# spikelock run manifest (reload with: spikelock rerun <this file>)\n";
    out << "[run]\n";
    out << "command = " << quoted(command) << '\n';
    out << "version = " << quoted(version_string) << '\n';
    out << '\n';
    out << "[model]\n";
    out << "c = " << num(config.model.c) << '\n';
    out << "g_na = " << num(config.model.g_na) << '\n';
    out << "g_k = " << num(config.model.g_k) << '\n';
    out << "g_leak = " << num(config.model.g_leak) << '\n';
    out << "e_na = " << num(config.model.e_na) << '\n';
    out << "e_k = " << num(config.model.e_k) << '\n';
    out << '\n';
    out << "[synapse]\n";
    out << "alpha = " << num(config.synapse.alpha) << '\n';
    out << "tau_s = " << num(config.synapse.tau_s) << '\n';
    out << "g_s = " << num(config.synapse.g_s) << '\n';
    out << "e_s = " << num(config.synapse.e_s) << '\n';
    out << '\n';
    out << "[input]\n";
    out << "kind = " << quoted(config.input.kind) << '\n';
    out << "period = " << num(config.input.period) << '\n';
    out << "t_start = " << num(config.input.t_start) << '\n';
    out << "count = " << config.input.count << '\n';
    out << "rate = " << num(config.input.rate) << '\n';
    out << "dead_time = " << num(config.input.dead_time) << '\n';
    out << "times = " << number_list(config.input.times) << '\n';
    out << '\n';
    out << "[solver]\n";
    out << "method = " << quoted(config.solver.method) << '\n';
    out << "rel_tol = " << num(config.solver.rel_tol) << '\n';
    out << "abs_tol = " << num(config.solver.abs_tol) << '\n';
    out << "max_step = " << num(config.solver.max_step) << '\n';
    out << "output_dt = " << num(config.solver.output_dt) << '\n';
    out << '\n';
    out << "[detector]\n";
    out << "v_low = " << num(config.detector.v_low) << '\n';
    out << "v_high = " << num(config.detector.v_high) << '\n';
    out << "tau_e = " << num(config.detector.tau_e) << '\n';
    out << '\n';
    out << "[ensemble]\n";
    out << "n_trials = " << config.ensemble.n_trials << '\n';
    out << "ic_sampling = " << quoted(config.ensemble.ic_sampling) << '\n';
    out << "ball_radius = " << num(config.ensemble.ball_radius) << '\n';
    out << "param_jitter = " << num(config.ensemble.param_jitter) << '\n';
    out << "jitter_params = " << bare_list(config.ensemble.jitter_params) << '\n';
    out << "transient_cut = " << num(config.ensemble.transient_cut) << '\n';
    out << "match_window = " << num(config.ensemble.match_window) << '\n';
    out << '\n';
    out << "[experiment]\n";
    out << "t_end = " << num(config.experiment.t_end) << '\n';
    out << "n_pairs = " << config.experiment.n_pairs << '\n';
    out << "n_ics = " << config.experiment.n_ics << '\n';
    out << "seed = " << config.experiment.seed << '\n';
    if (!config.experiment.preset.empty())
        out << "preset = " << quoted(config.experiment.preset) << '\n';
    out << "threads = " << config.threads << '\n';
    out << '\n';
    out << "[output]\n";
    out << "dir = " << quoted(config.output.dir) << '\n';
}

} // namespace spikelock
