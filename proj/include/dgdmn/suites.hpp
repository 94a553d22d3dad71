#pragma once

#include "dgdmn/data.hpp"

#include <string>
#include <vector>

namespace dgdmn {

// One task of a sequential benchmark: a transform of the base data, or a
// single-class filter (with optional relabeling to the task's own index).
struct SuiteTaskSpec {
    std::string id;
    Transform transform;
    int filter_class = -1; // keep only this base class when >= 0
    int relabel = -1;      // label assigned to filtered samples (default: filter_class)
    std::size_t train_count = 2000;
    std::size_t test_count = 500;
};

struct TaskSuite {
    std::string name;
    std::string source = "synthetic"; // "synthetic" or "idx:<dir>"
    std::size_t image_side = 14;
    std::size_t num_classes = 0; // label-space width
    std::size_t base_classes = 0; // classes in the base data
    std::vector<SuiteTaskSpec> tasks;
};

struct MaterializedTask {
    LabeledBatch train;
    LabeledBatch test;
};

struct MaterializedSuite {
    TaskSuite spec;
    std::vector<MaterializedTask> tasks;

    std::size_t size() const { return tasks.size(); }
};

// Draws train_count + test_count samples from the base pool without
// replacement (disjoint by source index), applies the transform, and filters
// and relabels single-class tasks. Throws DataError when the pool is too
// small.
MaterializedTask build_task(const SuiteTaskSpec& spec, const LabeledBatch& base,
                            std::size_t image_side, Rng& rng);

// Built-in desk-scale suites over 14x14 data:
//   digits-mini   6 single-class tasks (one class per task)
//   permnist-mini 6 label-preserving transform tasks over 6 classes
//   tdigits-mini  first 20 of the 40 transformed single-class tasks
//   glyphs        one joint 6-class task
// task_count == 0 keeps each suite's default length.
TaskSuite builtin_suite(const std::string& name, std::size_t task_count = 0);

// The 40-task composition: every base class under identity, mirror, vertical
// flip, and diagonal reflection, in that block order.
std::vector<SuiteTaskSpec> tdigits_specs(std::size_t base_classes, std::size_t train_count,
                                         std::size_t test_count);

// Flat structured-text suite description; see docs in the repository README.
TaskSuite parse_suite_file(const std::string& path);

// Generates or loads the base pool and builds every task. mnist_dir supplies
// the IDX files for "idx:" sources; pass empty for synthetic suites.
MaterializedSuite materialize(const TaskSuite& suite, const std::string& mnist_dir, Rng& rng);

} // namespace dgdmn
