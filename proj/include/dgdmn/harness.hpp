#pragma once

#include "dgdmn/algorithms.hpp"
#include "dgdmn/metrics.hpp"
#include "dgdmn/suites.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dgdmn {

struct RunRecord {
    std::string algorithm;
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<double> task_seconds; // wall-clock per train_task, evaluation excluded
    bool terminal_sleep_forced = false;
    std::uint64_t generator_sample_epochs = 0;
    std::uint64_t config_hash = 0;
    std::string config_text; // canonical key=value snapshot
};

struct RunResult {
    AccuracyMatrix matrix;
    RunRecord record;
};

struct HarnessConfig {
    bool terminal_flush = true; // forced consolidation before the final row
    std::string out_dir;        // when set, a partial matrix is persisted on abort
};

// Fraction of the batch the algorithm labels correctly.
double evaluate_accuracy(const Algorithm& algo, const LabeledBatch& test);

// Sequential protocol: train task i, then fill accuracy row i over tasks
// 0..i. The final row is preceded by finish_stream() when terminal_flush is
// set. Algorithm errors abort the run with the partial matrix persisted to
// out_dir/matrix.csv.
RunResult run_sequential(Algorithm& algo, const MaterializedSuite& suite,
                         const HarnessConfig& cfg);

// Same protocol, but resuming from already-recorded rows at the given task.
RunResult run_sequential_from(Algorithm& algo, const MaterializedSuite& suite,
                              const HarnessConfig& cfg, AccuracyMatrix matrix,
                              std::size_t first_task);

// Upper-reference curve: for each t, a fresh learner is trained jointly on
// the pooled training sets of tasks 0..t and scored on their mean test
// accuracy.
struct JointResult {
    std::vector<double> curve;
    LearnerParams final_learner; // trained on all tasks pooled
};
JointResult run_joint(const AlgorithmConfig& cfg, const MaterializedSuite& suite,
                      std::size_t epochs);

// Pools every task and performs one generative-replay update from scratch —
// the jointly trained memory used by the corruption-resilience comparison.
DgmState train_joint_dgm(const AlgorithmConfig& cfg, const MaterializedSuite& suite);

struct ResilienceRow {
    std::string mode; // "gaussian-nn", "gaussian-ltm", "occlude-nn", "occlude-ltm"
    double level = 0.0;
    double accuracy = 0.0;
};

// Accuracy under increasing corruption for the plain classifier and for the
// reconstruct-then-classify pipeline (inputs denoised through the generator).
std::vector<ResilienceRow> resilience_sweep(const LearnerParams& plain, const DgmState& dgm,
                                            const LabeledBatch& clean_test,
                                            std::size_t image_side,
                                            const std::vector<double>& sigmas,
                                            const std::vector<double>& factors, Rng& rng);

// --- artifact emission -----------------------------------------------------

void write_matrix_csv(const std::string& path, const AccuracyMatrix& a);
AccuracyMatrix parse_matrix_csv(const std::string& path);

// Rows of (metric, value) at 6-decimal precision; deterministic for a given
// matrix.
void write_metrics_csv(const std::string& path, const AccuracyMatrix& a,
                       std::uint64_t config_hash);

void write_curve_csv(const std::string& path, const std::vector<double>& curve);
void write_resilience_csv(const std::string& path, const std::vector<ResilienceRow>& rows);
void write_run_record(const std::string& path, const RunRecord& rec);

} // namespace dgdmn
