#include "dgdmn/harness.hpp"

#include "dgdmn/errors.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dgdmn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Accuracy values are narrowed through float before entering the matrix so
// that checkpointed (f32) and in-memory values are identical.
double narrowed_accuracy(std::size_t correct, std::size_t total) {
    return static_cast<double>(
        static_cast<float>(static_cast<double>(correct) / static_cast<double>(total)));
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

double evaluate_accuracy(const Algorithm& algo, const LabeledBatch& test) {
    if (test.size() == 0) throw DataError("evaluate_accuracy: empty test set");
    const auto pred = algo.predict(test.task, test.inputs);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == test.labels[i]) ++correct;
    return narrowed_accuracy(correct, pred.size());
}

RunResult run_sequential(Algorithm& algo, const MaterializedSuite& suite,
                         const HarnessConfig& cfg) {
    return run_sequential_from(algo, suite, cfg, AccuracyMatrix(suite.size()), 0);
}

RunResult run_sequential_from(Algorithm& algo, const MaterializedSuite& suite,
                              const HarnessConfig& cfg, AccuracyMatrix matrix,
                              std::size_t first_task) {
    if (suite.size() == 0) throw DataError("run_sequential: empty suite");
    RunResult result;
    result.matrix = std::move(matrix);
    result.record.algorithm = algo.name();
    result.record.suite = suite.spec.name;
    const std::size_t t = suite.size();
    try {
        for (std::size_t i = first_task; i < t; ++i) {
            const auto t0 = Clock::now();
            algo.train_task(suite.tasks[i].train);
            result.record.task_seconds.push_back(seconds_since(t0));
            if (cfg.terminal_flush && i + 1 == t) {
                algo.finish_stream();
                result.record.terminal_sleep_forced = true;
            }
            std::vector<double> row(i + 1);
            for (std::size_t j = 0; j <= i; ++j)
                row[j] = evaluate_accuracy(algo, suite.tasks[j].test);
            result.matrix.append_row(std::move(row));
        }
    } catch (...) {
        if (!cfg.out_dir.empty()) {
            std::filesystem::create_directories(cfg.out_dir);
            write_matrix_csv(cfg.out_dir + "/matrix.csv", result.matrix);
        }
        throw;
    }
    result.record.generator_sample_epochs = algo.generator_sample_epochs();
    return result;
}

JointResult run_joint(const AlgorithmConfig& cfg, const MaterializedSuite& suite,
                      std::size_t epochs) {
    JointResult out;
    Rng root = Rng(cfg.seed).substream("joint");
    for (std::size_t t = 1; t <= suite.size(); ++t) {
        Tensor x({0, suite.tasks[0].train.inputs.cols()});
        std::vector<std::size_t> y;
        for (std::size_t i = 0; i < t; ++i) {
            x = Tensor::concat_rows(x, suite.tasks[i].train.inputs);
            y.insert(y.end(), suite.tasks[i].train.labels.begin(),
                     suite.tasks[i].train.labels.end());
        }
        Rng init = root.substream("init", t);
        LearnerParams lp =
            learner_init(cfg.input_dim, cfg.learner_hidden, cfg.num_classes, 0.0, init);
        Rng train = root.substream("train", t);
        auto opt = num::OptimizerState::create(lp.params, cfg.learner_opt);
        learner_train(lp, x, y, epochs, opt, train, cfg.batch_size);
        double sum = 0.0;
        for (std::size_t i = 0; i < t; ++i)
            sum += learner_accuracy(lp, suite.tasks[i].test.inputs, suite.tasks[i].test.labels);
        out.curve.push_back(sum / static_cast<double>(t));
        if (t == suite.size()) out.final_learner = std::move(lp);
    }
    return out;
}

DgmState train_joint_dgm(const AlgorithmConfig& cfg, const MaterializedSuite& suite) {
    Rng root = Rng(cfg.seed).substream("joint-dgm");
    Rng init = root.substream("init");
    DgmState dgm = dgm_init(cfg.dgm_arch(), cfg.n_max, cfg.kappa, init);
    Tensor x({0, suite.tasks[0].train.inputs.cols()});
    std::vector<std::size_t> y;
    TaskDictionary d;
    for (const auto& task : suite.tasks) {
        x = Tensor::concat_rows(x, task.train.inputs);
        y.insert(y.end(), task.train.labels.begin(), task.train.labels.end());
        d[task.train.task] = 1;
    }
    DgmTrainConfig tc = cfg.dgm_train_config(false);
    // Joint training gets the longer classifier schedule.
    tc.learner_epochs = 20;
    Rng update = root.substream("update");
    dgr_update(dgm, x, y, d, update, tc);
    return dgm;
}

std::vector<ResilienceRow> resilience_sweep(const LearnerParams& plain, const DgmState& dgm,
                                            const LabeledBatch& clean_test,
                                            std::size_t image_side,
                                            const std::vector<double>& sigmas,
                                            const std::vector<double>& factors, Rng& rng) {
    std::vector<ResilienceRow> rows;
    auto accuracy_of = [&](const LearnerParams& lp, const Tensor& x) {
        return static_cast<double>(
            static_cast<float>(learner_accuracy(lp, x, clean_test.labels)));
    };
    auto sweep = [&](const std::string& mode_tag, const std::vector<double>& levels,
                     auto&& corrupt_fn) {
        for (std::size_t k = 0; k < levels.size(); ++k) {
            Rng level_rng = rng.substream(mode_tag, k);
            Tensor corrupted = corrupt_fn(levels[k], level_rng);
            rows.push_back({mode_tag + "-nn", levels[k], accuracy_of(plain, corrupted)});
            Tensor denoised = vae_reconstruct(dgm.generator, corrupted);
            rows.push_back({mode_tag + "-ltm", levels[k], accuracy_of(dgm.learner, denoised)});
        }
    };
    sweep("gaussian", sigmas, [&](double sigma, Rng& r) {
        return corrupt_gaussian(clean_test.inputs, sigma, r);
    });
    sweep("occlude", factors, [&](double factor, Rng& r) {
        return corrupt_occlude(clean_test.inputs, image_side, factor, r);
    });
    return rows;
}

// --- artifact emission ------------------------------------------------------

void write_matrix_csv(const std::string& path, const AccuracyMatrix& a) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f << "trained_task,eval_task,accuracy\n";
    for (std::size_t i = 0; i < a.rows_filled(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            f << i << "," << j << "," << fmt6(a.at(i, j)) << "\n";
}

AccuracyMatrix parse_matrix_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read " + path);
    std::string line;
    if (!std::getline(f, line) || line != "trained_task,eval_task,accuracy")
        throw DataError(path + ": bad matrix.csv header");
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::size_t i = 0, j = 0;
        char c1 = 0, c2 = 0;
        double v = 0.0;
        if (!(ss >> i >> c1 >> j >> c2 >> v) || c1 != ',' || c2 != ',')
            throw DataError(path + ": bad matrix.csv row: " + line);
        if (i >= rows.size()) rows.resize(i + 1);
        if (j >= rows[i].size()) rows[i].resize(j + 1);
        rows[i][j] = v;
    }
    AccuracyMatrix a(rows.size());
    for (auto& row : rows) a.append_row(std::move(row));
    return a;
}

void write_metrics_csv(const std::string& path, const AccuracyMatrix& a,
                       std::uint64_t config_hash) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f << "metric,value\n";
    f << "acc," << fmt6(acc_metric(a)) << "\n";
    if (a.num_tasks() >= 2) f << "bwt," << fmt6(bwt_metric(a)) << "\n";
    f << "config_hash," << config_hash << "\n";
}

void write_curve_csv(const std::string& path, const std::vector<double>& curve) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f << "t,value\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        f << (i + 1) << "," << fmt6(curve[i]) << "\n";
}

void write_resilience_csv(const std::string& path, const std::vector<ResilienceRow>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f << "mode,level,accuracy\n";
    for (const auto& r : rows)
        f << r.mode << "," << fmt6(r.level) << "," << fmt6(r.accuracy) << "\n";
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

} // namespace

void write_run_record(const std::string& path, const RunRecord& rec) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f << "{\n";
    f << "  \"algorithm\": \"" << json_escape(rec.algorithm) << "\",\n";
    f << "  \"suite\": \"" << json_escape(rec.suite) << "\",\n";
    f << "  \"seed\": " << rec.seed << ",\n";
    f << "  \"config_hash\": " << rec.config_hash << ",\n";
    f << "  \"terminal_sleep_forced\": " << (rec.terminal_sleep_forced ? "true" : "false")
      << ",\n";
    f << "  \"generator_sample_epochs\": " << rec.generator_sample_epochs << ",\n";
    f << "  \"task_seconds\": [";
    for (std::size_t i = 0; i < rec.task_seconds.size(); ++i)
        f << (i ? ", " : "") << rec.task_seconds[i];
    f << "],\n";
    f << "  \"config\": \"" << json_escape(rec.config_text) << "\"\n";
    f << "}\n";
}

} // namespace dgdmn
