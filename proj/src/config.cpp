#include "dgdmn/config.hpp"

#include "dgdmn/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dgdmn {

namespace {

std::string dims_to_string(const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(dims[i]);
    }
    return s;
}

std::vector<std::size_t> parse_dims(const std::string& field, const std::string& s) {
    std::vector<std::size_t> dims;
    std::istringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            dims.push_back(std::stoul(part));
        } catch (const std::exception&) {
            throw ConfigError(field, "expected comma-separated sizes, got '" + s + "'");
        }
    }
    if (dims.empty()) throw ConfigError(field, "expected at least one size");
    return dims;
}

double parse_real(const std::string& field, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got '" + s + "'");
    }
}

std::uint64_t parse_count(const std::string& field, const std::string& s) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a non-negative integer, got '" + s + "'");
    }
}

bool parse_bool(const std::string& field, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(field, "expected true/false, got '" + s + "'");
}

std::string real_to_string(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "suite") suite = value;
    else if (key == "algo") algo = value;
    else if (key == "seed") seed = parse_count(key, value);
    else if (key == "task_count") task_count = parse_count(key, value);
    else if (key == "n_max") n_max = parse_count(key, value);
    else if (key == "kappa") kappa = parse_real(key, value);
    else if (key == "n_stm") n_stm = parse_count(key, value);
    else if (key == "gamma") gamma_sttm = gamma_ltm = parse_real(key, value);
    else if (key == "gamma_sttm") gamma_sttm = parse_real(key, value);
    else if (key == "gamma_ltm") gamma_ltm = parse_real(key, value);
    else if (key == "learner_epochs") learner_epochs = parse_count(key, value);
    else if (key == "gen_epochs") gen_epochs = parse_count(key, value);
    else if (key == "joint_epochs") joint_epochs = parse_count(key, value);
    else if (key == "batch_size") batch_size = parse_count(key, value);
    else if (key == "hidden") hidden = parse_dims(key, value);
    else if (key == "vae_enc") vae_enc = parse_dims(key, value);
    else if (key == "latent") latent = parse_count(key, value);
    else if (key == "vae_dec") vae_dec = parse_dims(key, value);
    else if (key == "dropout") dropout = parse_real(key, value);
    else if (key == "ewc_lambda") ewc_lambda = parse_real(key, value);
    else if (key == "ppr_mult") ppr_mult = parse_real(key, value);
    else if (key == "warm_start") warm_start = parse_bool(key, value);
    else if (key == "terminal_flush") terminal_flush = parse_bool(key, value);
    else if (key == "with_joint") with_joint = parse_bool(key, value);
    else if (key == "with_resilience") with_resilience = parse_bool(key, value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "mnist_dir") mnist_dir = value;
    else throw ConfigError(key, "unknown configuration key");
}

void ExperimentConfig::resolve_architecture(const std::string& suite_name) {
    const bool digits = suite_name == "digits-mini" || suite_name == "glyphs";
    const bool tdigits = suite_name == "tdigits-mini";
    if (hidden.empty()) {
        if (digits) hidden = {24, 24};
        else if (tdigits) hidden = {36, 36};
        else hidden = {48, 48};
    }
    if (vae_enc.empty()) vae_enc = {128, 64};
    if (vae_dec.empty()) {
        vae_dec = vae_enc;
        std::reverse(vae_dec.begin(), vae_dec.end());
    }
    if (latent == 0) {
        if (digits) latent = 16;
        else if (tdigits) latent = 32;
        else latent = 24;
    }
}

void ExperimentConfig::validate() const {
    static const char* kAlgos[] = {"nn", "dropnn", "ppr", "ewc", "dgr", "dgdmn", "dgdmn-recog"};
    bool known = false;
    for (const char* a : kAlgos) known = known || algo == a;
    if (!known) throw ConfigError("algo", "unknown algorithm '" + algo + "'");
    if (kappa <= 0.0 || kappa > 1.0)
        throw ConfigError("kappa", "must be in (0,1], got " + real_to_string(kappa));
    if (n_stm == 0) throw ConfigError("n_stm", "must be at least 1");
    if (dropout < 0.0 || dropout >= 1.0)
        throw ConfigError("dropout", "must be in [0,1)");
    if (algo == "dgdmn-recog") {
        if (!gamma_sttm || !gamma_ltm)
            throw ConfigError("gamma",
                              "dgdmn-recog requires gamma (or gamma_sttm and gamma_ltm)");
        if (*gamma_sttm <= 0.0 || *gamma_ltm <= 0.0)
            throw ConfigError("gamma", "thresholds must be positive");
    } else if (gamma_sttm || gamma_ltm) {
        throw ConfigError("gamma", "recognition thresholds only apply to dgdmn-recog");
    }
    if (seed == UINT64_MAX) throw ConfigError("seed", "reserved value");
    if (learner_epochs == 0) throw ConfigError("learner_epochs", "must be at least 1");
    if (gen_epochs == 0) throw ConfigError("gen_epochs", "must be at least 1");
    if (batch_size == 0) throw ConfigError("batch_size", "must be at least 1");
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream s;
    s << "algo = " << algo << "\n";
    s << "batch_size = " << batch_size << "\n";
    s << "dropout = " << real_to_string(dropout) << "\n";
    s << "ewc_lambda = " << real_to_string(ewc_lambda) << "\n";
    if (gamma_ltm) s << "gamma_ltm = " << real_to_string(*gamma_ltm) << "\n";
    if (gamma_sttm) s << "gamma_sttm = " << real_to_string(*gamma_sttm) << "\n";
    s << "gen_epochs = " << gen_epochs << "\n";
    s << "hidden = " << dims_to_string(hidden) << "\n";
    s << "joint_epochs = " << joint_epochs << "\n";
    s << "kappa = " << real_to_string(kappa) << "\n";
    s << "latent = " << latent << "\n";
    s << "learner_epochs = " << learner_epochs << "\n";
    s << "mnist_dir = " << mnist_dir << "\n";
    s << "n_max = " << n_max << "\n";
    s << "n_stm = " << n_stm << "\n";
    s << "ppr_mult = " << real_to_string(ppr_mult) << "\n";
    s << "seed = " << seed << "\n";
    s << "suite = " << suite << "\n";
    s << "task_count = " << task_count << "\n";
    s << "terminal_flush = " << (terminal_flush ? "true" : "false") << "\n";
    s << "vae_dec = " << dims_to_string(vae_dec) << "\n";
    s << "vae_enc = " << dims_to_string(vae_enc) << "\n";
    s << "warm_start = " << (warm_start ? "true" : "false") << "\n";
    return s.str();
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a_hash(canonical_text()); }

AlgorithmConfig ExperimentConfig::algorithm_config(std::size_t input_dim,
                                                   std::size_t num_classes,
                                                   std::size_t max_task_size) const {
    AlgorithmConfig a;
    a.kind = algo;
    a.seed = seed;
    a.input_dim = input_dim;
    a.num_classes = num_classes;
    a.learner_hidden = hidden;
    a.vae_enc = vae_enc;
    a.vae_latent = latent;
    a.vae_dec = vae_dec;
    a.learner_epochs = learner_epochs;
    a.gen_epochs = gen_epochs;
    a.batch_size = batch_size;
    a.dropout_rate = dropout;
    a.ppr_capacity_mult = ppr_mult;
    a.max_task_size = max_task_size;
    a.ewc_lambda = ewc_lambda;
    a.n_max = n_max;
    a.kappa = kappa;
    a.n_stm = n_stm;
    if (gamma_sttm) a.gamma_sttm = *gamma_sttm;
    if (gamma_ltm) a.gamma_ltm = *gamma_ltm;
    a.warm_start = warm_start;
    return a;
}

PreparedRun prepare_run(ExperimentConfig cfg, const std::vector<std::size_t>& extra_tasks) {
    cfg.validate();
    cfg.resolve_architecture(cfg.suite);
    if (cfg.mnist_dir.empty()) {
        if (const char* env = std::getenv("DGDMN_MNIST_DIR")) cfg.mnist_dir = env;
    }
    TaskSuite suite = cfg.suite.find('/') != std::string::npos ||
                              cfg.suite.find(".suite") != std::string::npos
                          ? parse_suite_file(cfg.suite)
                          : builtin_suite(cfg.suite, cfg.task_count);
    for (std::size_t idx : extra_tasks) {
        if (idx >= suite.tasks.size())
            throw ConfigError("append", "task index " + std::to_string(idx) +
                                            " out of range for suite of " +
                                            std::to_string(suite.tasks.size()));
        suite.tasks.push_back(suite.tasks[idx]);
    }
    Rng data_rng = Rng(cfg.seed).substream("data");
    MaterializedSuite mat = materialize(suite, cfg.mnist_dir, data_rng);

    std::size_t total_train = 0, max_task = 0;
    for (const auto& t : mat.tasks) {
        total_train += t.train.size();
        max_task = std::max(max_task, t.train.size());
    }
    if (cfg.n_max == 0) cfg.n_max = total_train;
    if (cfg.n_max < max_task)
        throw ConfigError("n_max", "must be at least the largest task size (" +
                                       std::to_string(max_task) + ")");
    if (cfg.kappa * static_cast<double>(cfg.n_max) < 1.0)
        throw ConfigError("kappa", "kappa * n_max must be at least 1");

    const std::size_t input_dim = mat.tasks[0].train.inputs.cols();
    PreparedRun run{std::move(cfg), std::move(mat), {}};
    run.algo = run.cfg.algorithm_config(input_dim, run.suite.spec.num_classes, max_task);
    return run;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        std::string key, eq;
        if (!(ss >> key)) continue;
        if (!(ss >> eq) || eq != "=")
            throw ConfigError("config", "expected 'key = value', got: " + line);
        std::string value;
        std::getline(ss, value);
        const auto start = value.find_first_not_of(" \t");
        value = start == std::string::npos ? "" : value.substr(start);
        const auto end = value.find_last_not_of(" \t");
        if (end != std::string::npos) value.resize(end + 1);
        cfg.set(key, value);
    }
    return cfg;
}

} // namespace dgdmn
