#include "dgdmn/config.hpp"
#include "dgdmn/errors.hpp"
#include "dgdmn/harness.hpp"
#include "dgdmn/svg.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace {

using namespace dgdmn;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void print_usage() {
    std::cout
        << "Usage: dgdmn <command> [options]\n"
        << "Commands:\n"
        << "  run      Train an algorithm over a task suite and emit metrics\n"
        << "  resume   Continue a run from a checkpoint\n"
        << "  suggest  Print kappa / n_stm heuristics for a K-task horizon\n"
        << "  grid     Execute a file of run argument lines in parallel\n"
        << "Run options (also accepted as key = value lines via --config FILE):\n"
        << "  --suite NAME        digits-mini | permnist-mini | tdigits-mini | glyphs | path\n"
        << "  --algo NAME         nn | dropnn | ppr | ewc | dgr | dgdmn | dgdmn-recog\n"
        << "  --seed N            experiment seed (default 0)\n"
        << "  --out DIR           output directory (default out)\n"
        << "  --n-max N --kappa X --n-stm N --gamma X --gamma-sttm X --gamma-ltm X\n"
        << "  --learner-epochs N --gen-epochs N --joint-epochs N --batch-size N\n"
        << "  --hidden A,B --vae-enc A,B --latent N --vae-dec A,B\n"
        << "  --task-count N --mnist-dir DIR --with-joint BOOL --with-resilience BOOL\n"
        << "Resume options:\n"
        << "  --checkpoint FILE --out DIR [--append i,j,...]\n"
        << "Grid options:\n"
        << "  --file FILE --jobs N --out DIR\n"
        << "Environment: DGDMN_MNIST_DIR supplies --mnist-dir when unset.\n";
}

std::string flag_to_key(const std::string& flag) {
    std::string key = flag.substr(2);
    for (char& c : key)
        if (c == '-') c = '_';
    return key;
}

void emit_artifacts(const PreparedRun& in, const RunResult& result, Algorithm& algo,
                    const std::vector<std::size_t>& extra_tasks) {
    const ExperimentConfig& cfg = in.cfg;
    std::filesystem::create_directories(cfg.out_dir);

    write_matrix_csv(cfg.out_dir + "/matrix.csv", result.matrix);
    write_metrics_csv(cfg.out_dir + "/metrics.csv", result.matrix, cfg.hash());
    const auto curve = forgetting_curve(result.matrix);
    write_curve_csv(cfg.out_dir + "/curve.csv", curve);
    const auto last10 = last_k_accuracy(result.matrix, 10);
    write_curve_csv(cfg.out_dir + "/curve_last10.csv", last10);

    RunRecord rec = result.record;
    rec.seed = cfg.seed;
    rec.config_hash = cfg.hash();
    rec.config_text = cfg.canonical_text();
    write_run_record(cfg.out_dir + "/run.json", rec);

    auto xs_of = [](const std::vector<double>& ys) {
        std::vector<double> xs(ys.size());
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i + 1);
        return xs;
    };
    std::vector<SvgSeries> forget_series{{cfg.algo, xs_of(curve), curve}};

    if (cfg.with_joint) {
        JointResult joint = run_joint(in.algo, in.suite, cfg.joint_epochs);
        write_curve_csv(cfg.out_dir + "/curve_joint.csv", joint.curve);
        forget_series.push_back({"joint-nn", xs_of(joint.curve), joint.curve});
    }
    write_line_chart(cfg.out_dir + "/forgetting.svg",
                     "Average accuracy on tasks seen (" + cfg.algo + ", " +
                         in.suite.spec.name + ")",
                     "tasks seen", "avg accuracy", forget_series);
    write_line_chart(cfg.out_dir + "/last10.svg", "Accuracy on last 10 tasks seen",
                     "tasks seen", "avg accuracy", {{cfg.algo, xs_of(last10), last10}});
    if (!rec.task_seconds.empty())
        write_line_chart(cfg.out_dir + "/time.svg", "Training time per task", "task",
                         "seconds",
                         {{cfg.algo, xs_of(rec.task_seconds), rec.task_seconds}});

    if (cfg.with_resilience) {
        JointResult joint_nn = run_joint(in.algo, in.suite, cfg.joint_epochs);
        DgmState joint_dgm = train_joint_dgm(in.algo, in.suite);
        LabeledBatch all_test;
        all_test.inputs = Tensor({0, in.algo.input_dim});
        all_test.task = TaskDescriptor{"resilience"};
        for (const auto& t : in.suite.tasks) {
            all_test.inputs = Tensor::concat_rows(all_test.inputs, t.test.inputs);
            all_test.labels.insert(all_test.labels.end(), t.test.labels.begin(),
                                   t.test.labels.end());
        }
        Rng res_rng = Rng(cfg.seed).substream("resilience");
        const std::vector<double> sigmas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
        const std::vector<double> factors{0.0, 0.125, 0.25, 0.375, 0.5};
        auto rows = resilience_sweep(joint_nn.final_learner, joint_dgm, all_test,
                                     in.suite.spec.image_side, sigmas, factors, res_rng);
        write_resilience_csv(cfg.out_dir + "/resilience.csv", rows);
        auto series_of = [&](const std::string& mode) {
            SvgSeries s{mode, {}, {}};
            for (const auto& r : rows)
                if (r.mode == mode) {
                    s.xs.push_back(r.level);
                    s.ys.push_back(r.accuracy);
                }
            return s;
        };
        write_line_chart(cfg.out_dir + "/resilience_noise.svg",
                         "Accuracy vs gaussian noise", "sigma", "accuracy",
                         {series_of("gaussian-nn"), series_of("gaussian-ltm")});
        write_line_chart(cfg.out_dir + "/resilience_occlusion.svg",
                         "Accuracy vs occlusion factor", "factor", "accuracy",
                         {series_of("occlude-nn"), series_of("occlude-ltm")});
    }

    // Checkpoint: meta + algorithm state + matrix.
    Checkpoint ck;
    {
        ByteWriter meta;
        meta.str(cfg.algo);
        meta.str(in.suite.spec.name);
        meta.u64(cfg.seed);
        meta.u32(static_cast<std::uint32_t>(in.suite.size()));
        meta.u32(static_cast<std::uint32_t>(in.suite.size())); // next task: stream done
        meta.u8(rec.terminal_sleep_forced ? 1 : 0);
        meta.u64(cfg.hash());
        meta.str(cfg.canonical_text());
        meta.u32(static_cast<std::uint32_t>(extra_tasks.size()));
        for (std::size_t idx : extra_tasks) meta.u32(static_cast<std::uint32_t>(idx));
        ck.sections.push_back({SectionKind::meta, meta.take()});
    }
    {
        ByteWriter st;
        algo.save_state(st);
        ck.sections.push_back({SectionKind::algorithm, st.take()});
    }
    {
        ByteWriter m;
        write_matrix(m, result.matrix);
        ck.sections.push_back({SectionKind::matrix, m.take()});
    }
    save_checkpoint_file(cfg.out_dir + "/checkpoint.dgdm", ck);
}

int cmd_run(const std::vector<std::string>& args) {
    ExperimentConfig cfg;
    // First pass: --config file, then flag overrides in order.
    for (std::size_t i = 0; i < args.size(); ++i)
        if (args[i] == "--config" && i + 1 < args.size()) cfg = load_config_file(args[i + 1]);
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            ++i;
            continue;
        }
        if (a.rfind("--", 0) != 0 || i + 1 >= args.size())
            throw ConfigError("args", "unexpected argument '" + a + "'");
        const std::string key = flag_to_key(a);
        cfg.set(key == "out" ? "out_dir" : key, args[++i]);
    }

    PreparedRun in = prepare_run(cfg);
    auto algo = make_algorithm(in.algo);
    HarnessConfig hc;
    hc.terminal_flush = in.cfg.terminal_flush;
    hc.out_dir = in.cfg.out_dir;
    std::filesystem::create_directories(in.cfg.out_dir);
    RunResult result = run_sequential(*algo, in.suite, hc);
    emit_artifacts(in, result, *algo, {});
    std::cout << "run complete: acc=" << acc_metric(result.matrix);
    if (result.matrix.num_tasks() >= 2) std::cout << " bwt=" << bwt_metric(result.matrix);
    std::cout << " out=" << in.cfg.out_dir << "\n";
    return kExitOk;
}

int cmd_resume(const std::vector<std::string>& args) {
    std::string checkpoint_path, out_dir;
    std::vector<std::size_t> append;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--checkpoint" && i + 1 < args.size()) checkpoint_path = args[++i];
        else if (args[i] == "--out" && i + 1 < args.size()) out_dir = args[++i];
        else if (args[i] == "--append" && i + 1 < args.size()) {
            std::istringstream ss(args[++i]);
            std::string part;
            while (std::getline(ss, part, ','))
                append.push_back(static_cast<std::size_t>(std::stoul(part)));
        } else {
            throw ConfigError("args", "unexpected argument '" + args[i] + "'");
        }
    }
    if (checkpoint_path.empty()) throw ConfigError("checkpoint", "required for resume");

    Checkpoint ck = load_checkpoint_file(checkpoint_path);
    ByteReader meta(ck.section(SectionKind::meta).payload);
    ExperimentConfig cfg;
    meta.str(); // algorithm (also present in config text)
    meta.str(); // suite name
    meta.u64(); // seed
    meta.u32(); // total tasks at save time
    const std::uint32_t next_task = meta.u32();
    const bool prior_terminal_sleep = meta.u8() != 0;
    meta.u64(); // config hash
    const std::string config_text = meta.str();
    std::vector<std::size_t> prior_extra(meta.u32());
    for (auto& idx : prior_extra) idx = meta.u32();
    {
        std::istringstream ss(config_text);
        std::string line;
        while (std::getline(ss, line)) {
            const auto eq = line.find(" = ");
            if (eq == std::string::npos) continue;
            cfg.set(line.substr(0, eq), line.substr(eq + 3));
        }
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    std::vector<std::size_t> extra = prior_extra;
    extra.insert(extra.end(), append.begin(), append.end());
    PreparedRun in = prepare_run(cfg, extra);
    auto algo = make_algorithm(in.algo);
    {
        ByteReader st(ck.section(SectionKind::algorithm).payload);
        algo->load_state(st);
    }
    AccuracyMatrix saved = [&] {
        ByteReader m(ck.section(SectionKind::matrix).payload);
        return read_matrix(m);
    }();
    // The suite may have grown via --append; rebuild the matrix at the new
    // width with the recorded rows.
    AccuracyMatrix matrix(in.suite.size());
    for (std::size_t i = 0; i < saved.rows_filled(); ++i) matrix.append_row(saved.row(i));

    HarnessConfig hc;
    hc.terminal_flush = in.cfg.terminal_flush;
    hc.out_dir = in.cfg.out_dir;
    std::filesystem::create_directories(in.cfg.out_dir);
    RunResult result = run_sequential_from(*algo, in.suite, hc, std::move(matrix), next_task);
    result.record.terminal_sleep_forced =
        result.record.terminal_sleep_forced || prior_terminal_sleep;
    emit_artifacts(in, result, *algo, extra);
    std::cout << "resume complete: acc=" << acc_metric(result.matrix);
    if (result.matrix.num_tasks() >= 2) std::cout << " bwt=" << bwt_metric(result.matrix);
    std::cout << " out=" << in.cfg.out_dir << "\n";
    return kExitOk;
}

int cmd_suggest(const std::vector<std::string>& args) {
    if (args.size() != 1) throw ConfigError("K", "usage: dgdmn suggest <K>");
    const std::size_t k = static_cast<std::size_t>(std::stoul(args[0]));
    const HyperparamSuggestion s = suggest_hyperparams(k);
    std::printf("kappa=%g n_stm=%zu\n", s.kappa, s.n_stm);
    return kExitOk;
}

int cmd_grid(const std::vector<std::string>& args) {
    std::string file, out_dir = "grid-out";
    std::size_t jobs = 2;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--file" && i + 1 < args.size()) file = args[++i];
        else if (args[i] == "--jobs" && i + 1 < args.size())
            jobs = static_cast<std::size_t>(std::stoul(args[++i]));
        else if (args[i] == "--out" && i + 1 < args.size()) out_dir = args[++i];
        else throw ConfigError("args", "unexpected argument '" + args[i] + "'");
    }
    if (file.empty()) throw ConfigError("file", "required for grid");
    std::ifstream f(file);
    if (!f) throw ConfigError("file", "cannot open " + file);
    std::vector<std::vector<std::string>> runs;
    std::string line;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::vector<std::string> run_args;
        std::string tok;
        while (ss >> tok) run_args.push_back(tok);
        if (!run_args.empty()) runs.push_back(std::move(run_args));
    }

    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    std::mutex io_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= runs.size()) return;
            std::vector<std::string> run_args = runs[i];
            bool has_out = false;
            for (const auto& a : run_args) has_out = has_out || a == "--out";
            if (!has_out) {
                run_args.push_back("--out");
                run_args.push_back(out_dir + "/run-" + std::to_string(i));
            }
            int rc = kExitOk;
            std::string what;
            try {
                rc = cmd_run(run_args);
            } catch (const ConfigError& e) {
                rc = kExitConfig;
                what = e.what();
            } catch (const std::exception& e) {
                rc = kExitRuntime;
                what = e.what();
            }
            if (rc != kExitOk) ++failures;
            std::lock_guard<std::mutex> lock(io_mutex);
            std::cout << "grid run " << i << (rc == kExitOk ? " ok" : " FAILED: " + what)
                      << "\n";
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < std::max<std::size_t>(1, jobs); ++i)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return failures.load() == 0 ? kExitOk : kExitRuntime;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        print_usage();
        return kExitConfig;
    }
    const std::string command = argv[1];
    std::vector<std::string> args(argv + 2, argv + argc);
    try {
        if (command == "run") return cmd_run(args);
        if (command == "resume") return cmd_resume(args);
        if (command == "suggest") return cmd_suggest(args);
        if (command == "grid") return cmd_grid(args);
        if (command == "--help" || command == "help") {
            print_usage();
            return kExitOk;
        }
        std::cerr << "unknown command '" << command << "'\n";
        print_usage();
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
