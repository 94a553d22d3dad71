#include "dgdmn/suites.hpp"

#include "dgdmn/errors.hpp"
#include "dgdmn/idx.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dgdmn {

MaterializedTask build_task(const SuiteTaskSpec& spec, const LabeledBatch& base,
                            std::size_t image_side, Rng& rng) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < base.size(); ++i)
        if (spec.filter_class < 0 ||
            base.labels[i] == static_cast<std::size_t>(spec.filter_class))
            candidates.push_back(i);
    const std::size_t need = spec.train_count + spec.test_count;
    if (candidates.size() < need)
        throw DataError("task " + spec.id + ": needs " + std::to_string(need) +
                        " samples, base has " + std::to_string(candidates.size()));

    const auto picks = rng.sample_without_replacement(candidates.size(), need);
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < need; ++i)
        (i < spec.train_count ? train_idx : test_idx).push_back(candidates[picks[i]]);

    const std::size_t label =
        spec.relabel >= 0   ? static_cast<std::size_t>(spec.relabel)
        : spec.filter_class >= 0 ? static_cast<std::size_t>(spec.filter_class)
                                 : 0;

    auto make = [&](const std::vector<std::size_t>& idx) {
        LabeledBatch out;
        out.task = TaskDescriptor{spec.id};
        out.inputs = apply_transform(base.inputs.gather_rows(idx), image_side, spec.transform);
        out.labels.resize(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            out.labels[i] = spec.filter_class >= 0 ? label : base.labels[idx[i]];
        return out;
    };
    return MaterializedTask{make(train_idx), make(test_idx)};
}

std::vector<SuiteTaskSpec> tdigits_specs(std::size_t base_classes, std::size_t train_count,
                                         std::size_t test_count) {
    const struct {
        TransformKind kind;
        const char* tag;
    } blocks[4] = {{TransformKind::identity, "id"},
                   {TransformKind::mirror, "mirror"},
                   {TransformKind::flip_vertical, "flip"},
                   {TransformKind::reflect_diagonal, "diag"}};
    std::vector<SuiteTaskSpec> specs;
    std::size_t label = 0;
    for (const auto& block : blocks) {
        for (std::size_t c = 0; c < base_classes; ++c, ++label) {
            SuiteTaskSpec s;
            s.id = std::string(block.tag) + "-" + std::to_string(c);
            s.transform.kind = block.kind;
            s.filter_class = static_cast<int>(c);
            s.relabel = static_cast<int>(label);
            s.train_count = train_count;
            s.test_count = test_count;
            specs.push_back(std::move(s));
        }
    }
    return specs;
}

TaskSuite builtin_suite(const std::string& name, std::size_t task_count) {
    TaskSuite suite;
    suite.name = name;
    if (name == "digits-mini") {
        const std::size_t t = task_count == 0 ? 6 : task_count;
        suite.base_classes = t;
        suite.num_classes = t;
        for (std::size_t c = 0; c < t; ++c) {
            SuiteTaskSpec s;
            s.id = "digit-" + std::to_string(c);
            s.filter_class = static_cast<int>(c);
            suite.tasks.push_back(std::move(s));
        }
    } else if (name == "permnist-mini") {
        suite.base_classes = 10;
        suite.num_classes = 10;
        const std::size_t patch_small = suite.image_side * 4 / 14; // 8x8 at 28 scale
        const std::size_t patch_large = suite.image_side * 6 / 14; // 12x12 at 28 scale
        auto add = [&](const std::string& id, Transform t) {
            SuiteTaskSpec s;
            s.id = id;
            s.transform = t;
            suite.tasks.push_back(std::move(s));
        };
        add("original", {TransformKind::identity, 0, 0});
        add("blacken", {TransformKind::patch_blacken, patch_small, 0});
        add("whiten", {TransformKind::patch_whiten, patch_small, 0});
        add("perm-small", {TransformKind::patch_permute, patch_small, 11});
        add("perm-large", {TransformKind::patch_permute, patch_large, 12});
        add("mirror", {TransformKind::mirror, 0, 0});
        if (task_count != 0 && task_count < suite.tasks.size()) suite.tasks.resize(task_count);
    } else if (name == "tdigits-mini") {
        suite.base_classes = 10;
        auto specs = tdigits_specs(10, 2000, 500);
        const std::size_t t = task_count == 0 ? 20 : task_count;
        if (t > specs.size())
            throw ConfigError("suite", "tdigits-mini has at most 40 tasks");
        specs.resize(t);
        suite.tasks = std::move(specs);
        suite.num_classes = t;
    } else if (name == "glyphs") {
        suite.base_classes = 6;
        suite.num_classes = 6;
        SuiteTaskSpec s;
        s.id = "glyphs-joint";
        suite.tasks.push_back(std::move(s));
    } else {
        throw ConfigError("suite", "unknown builtin suite '" + name + "'");
    }
    return suite;
}

namespace {

Transform parse_transform(const std::string& kind, std::istringstream& args,
                          const std::string& line) {
    Transform t;
    auto need_number = [&](const char* what) {
        std::uint64_t v = 0;
        if (!(args >> v))
            throw ConfigError("suite", std::string("missing ") + what + " in: " + line);
        return v;
    };
    if (kind == "identity") {
        t.kind = TransformKind::identity;
    } else if (kind == "pixel-permutation") {
        t.kind = TransformKind::pixel_permutation;
        t.perm_seed = need_number("seed");
    } else if (kind == "patch-blacken") {
        t.kind = TransformKind::patch_blacken;
        t.patch = need_number("patch size");
    } else if (kind == "patch-whiten") {
        t.kind = TransformKind::patch_whiten;
        t.patch = need_number("patch size");
    } else if (kind == "patch-permute") {
        t.kind = TransformKind::patch_permute;
        t.patch = need_number("patch size");
        t.perm_seed = need_number("seed");
    } else if (kind == "mirror") {
        t.kind = TransformKind::mirror;
    } else if (kind == "flip-vertical") {
        t.kind = TransformKind::flip_vertical;
    } else if (kind == "reflect-diagonal") {
        t.kind = TransformKind::reflect_diagonal;
    } else {
        throw ConfigError("suite", "unknown transform '" + kind + "' in: " + line);
    }
    return t;
}

} // namespace

TaskSuite parse_suite_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("suite", "cannot open suite file " + path);
    TaskSuite suite;
    suite.name = path;
    std::size_t default_train = 2000, default_test = 500;
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        std::string head;
        if (!(ss >> head)) continue;
        if (head == "task") {
            std::string id, kind;
            if (!(ss >> id >> kind))
                throw ConfigError("suite", "malformed task line: " + line);
            SuiteTaskSpec s;
            s.id = id;
            s.train_count = default_train;
            s.test_count = default_test;
            if (kind == "class-filter") {
                int cls = -1;
                if (!(ss >> cls)) throw ConfigError("suite", "missing class in: " + line);
                s.filter_class = cls;
                int relabel = -1;
                if (ss >> relabel) s.relabel = relabel;
            } else {
                s.transform = parse_transform(kind, ss, line);
            }
            suite.tasks.push_back(std::move(s));
            continue;
        }
        std::string eq, value;
        if (!(ss >> eq >> value) || eq != "=")
            throw ConfigError("suite", "expected 'key = value', got: " + line);
        if (head == "name") suite.name = value;
        else if (head == "source") suite.source = value;
        else if (head == "image_side") suite.image_side = std::stoul(value);
        else if (head == "num_classes") suite.num_classes = std::stoul(value);
        else if (head == "base_classes") suite.base_classes = std::stoul(value);
        else if (head == "train_count") default_train = std::stoul(value);
        else if (head == "test_count") default_test = std::stoul(value);
        else throw ConfigError("suite", "unknown suite key '" + head + "'");
    }
    if (suite.tasks.empty()) throw ConfigError("suite", "suite file has no tasks");
    if (suite.base_classes == 0) suite.base_classes = suite.num_classes;
    for (auto& t : suite.tasks) {
        t.train_count = t.train_count == 0 ? default_train : t.train_count;
        t.test_count = t.test_count == 0 ? default_test : t.test_count;
    }
    return suite;
}

namespace {

LabeledBatch load_idx_pool(const std::string& dir, std::size_t target_side) {
    const std::string train_images = dir + "/train-images-idx3-ubyte";
    const std::string train_labels = dir + "/train-labels-idx1-ubyte";
    const std::string test_images = dir + "/t10k-images-idx3-ubyte";
    const std::string test_labels = dir + "/t10k-labels-idx1-ubyte";
    Tensor imgs = load_idx_images(train_images);
    std::vector<std::size_t> labels = load_idx_labels(train_labels);
    Tensor imgs2 = load_idx_images(test_images);
    std::vector<std::size_t> labels2 = load_idx_labels(test_labels);
    const std::size_t rows = imgs.dim(1), cols = imgs.dim(2);
    Tensor flat({imgs.dim(0), rows * cols}, imgs.values());
    Tensor flat2({imgs2.dim(0), rows * cols}, imgs2.values());
    LabeledBatch pool;
    pool.inputs = Tensor::concat_rows(flat, flat2);
    pool.labels = std::move(labels);
    pool.labels.insert(pool.labels.end(), labels2.begin(), labels2.end());
    if (pool.inputs.rows() != pool.labels.size())
        throw DataError("idx pool: image/label counts differ");
    // Halve with 2x2 average pooling until the target side is reached.
    std::size_t side = rows;
    while (side > target_side && side % 2 == 0) {
        pool.inputs = downsample_2x2(pool.inputs, side, side);
        side /= 2;
    }
    if (side != target_side)
        throw DataError("idx pool: cannot downsample " + std::to_string(rows) + " to " +
                        std::to_string(target_side));
    return pool;
}

} // namespace

MaterializedSuite materialize(const TaskSuite& suite, const std::string& mnist_dir, Rng& rng) {
    LabeledBatch base;
    if (suite.source == "synthetic") {
        // Pool sized for the largest per-class demand across tasks, with 4x
        // headroom so tasks sharing a class draw mostly distinct samples.
        std::size_t per_class_need = 0;
        for (const auto& t : suite.tasks) {
            const std::size_t need = t.train_count + t.test_count;
            per_class_need = std::max(
                per_class_need, t.filter_class >= 0
                                    ? need
                                    : (need + suite.base_classes - 1) / suite.base_classes);
        }
        Rng pool_rng = rng.substream("glyph-pool");
        base = synth_glyphs(suite.base_classes, 4 * per_class_need, suite.image_side,
                            pool_rng);
    } else if (suite.source.rfind("idx:", 0) == 0 || !mnist_dir.empty()) {
        std::string dir = suite.source.rfind("idx:", 0) == 0 ? suite.source.substr(4) : mnist_dir;
        if (!mnist_dir.empty()) dir = mnist_dir;
        base = load_idx_pool(dir, suite.image_side);
    } else {
        throw ConfigError("suite", "unknown source '" + suite.source + "'");
    }

    MaterializedSuite out;
    out.spec = suite;
    for (std::size_t i = 0; i < suite.tasks.size(); ++i) {
        Rng task_rng = rng.substream("task-build", i);
        out.tasks.push_back(build_task(suite.tasks[i], base, suite.image_side, task_rng));
    }
    return out;
}

} // namespace dgdmn
