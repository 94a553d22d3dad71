#include "doctest.h"

#include "dgdmn/errors.hpp"
#include "dgdmn/idx.hpp"
#include "dgdmn/learner.hpp"
#include "dgdmn/suites.hpp"

#include <cstdio>
#include <fstream>
#include <set>

using namespace dgdmn;

namespace {

std::string write_temp(const std::string& name, const std::vector<unsigned char>& bytes) {
    const std::string path = "/tmp/dgdmn-test-" + name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    return path;
}

} // namespace

TEST_CASE("load_idx_images: byte-level fixture") {
    // 2 images of 2x2: magic 0x803, n=2, rows=2, cols=2, payload 8 bytes.
    std::vector<unsigned char> bytes = {0, 0,   8,   3, 0, 0, 0, 2,  0, 0,  0,  2,
                                        0, 0,   0,   2, 0, 255, 128, 0, 7, 9, 11, 13};
    const std::string path = write_temp("images.idx", bytes);
    Tensor t = load_idx_images(path);
    REQUIRE(t.shape() == std::vector<std::size_t>{2, 2, 2});
    CHECK(t[0] == 0.0);
    CHECK(t[1] == doctest::Approx(1.0));
    CHECK(t[2] == doctest::Approx(128.0 / 255.0));
    CHECK(t[3] == 0.0);
    CHECK(t[4] == doctest::Approx(7.0 / 255.0));
    CHECK(t[7] == doctest::Approx(13.0 / 255.0));
    std::remove(path.c_str());
}

TEST_CASE("load_idx_labels: byte-level fixture") {
    std::vector<unsigned char> bytes = {0, 0, 8, 1, 0, 0, 0, 3, 5, 0, 9};
    const std::string path = write_temp("labels.idx", bytes);
    const auto labels = load_idx_labels(path);
    CHECK(labels == std::vector<std::size_t>{5, 0, 9});
    std::remove(path.c_str());
}

TEST_CASE("load_idx_images: label magic is rejected as wrong magic") {
    std::vector<unsigned char> bytes = {0, 0, 8, 1, 0, 0, 0, 1, 7};
    const std::string path = write_temp("wrongmagic.idx", bytes);
    CHECK_THROWS_WITH_AS(load_idx_images(path), doctest::Contains("wrong magic"), IdxError);
    std::remove(path.c_str());
}

TEST_CASE("load_idx_images: empty file is a truncated header") {
    const std::string path = write_temp("empty.idx", {});
    CHECK_THROWS_WITH_AS(load_idx_images(path), doctest::Contains("truncated header"),
                         IdxError);
    std::remove(path.c_str());
}

TEST_CASE("load_idx_images: short payload is a truncated payload") {
    std::vector<unsigned char> bytes = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0,
                                        0, 2, 0, 0, 0, 2, 1, 2, 3};
    const std::string path = write_temp("short.idx", bytes);
    CHECK_THROWS_WITH_AS(load_idx_images(path), doctest::Contains("truncated payload"),
                         IdxError);
    std::remove(path.c_str());
}

TEST_CASE("apply_transform: identity returns pixel-equal data") {
    Rng rng(1);
    Tensor x({3, 9});
    for (double& v : x.values()) v = rng.uniform01();
    Tensor out = apply_transform(x, 3, {TransformKind::identity, 0, 0});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(out[i] == x[i]);
}

TEST_CASE("apply_transform: mirror twice is the identity") {
    Rng rng(2);
    Tensor x({4, 25});
    for (double& v : x.values()) v = rng.uniform01();
    Transform mirror{TransformKind::mirror, 0, 0};
    Tensor twice = apply_transform(apply_transform(x, 5, mirror), 5, mirror);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(twice[i] == x[i]);
}

TEST_CASE("apply_transform: flip and transpose are involutions") {
    Rng rng(3);
    Tensor x({2, 16});
    for (double& v : x.values()) v = rng.uniform01();
    for (TransformKind kind : {TransformKind::flip_vertical, TransformKind::reflect_diagonal}) {
        Transform t{kind, 0, 0};
        Tensor twice = apply_transform(apply_transform(x, 4, t), 4, t);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(twice[i] == x[i]);
    }
}

TEST_CASE("apply_transform: pixel permutation tracked by an index image") {
    // The ramp image reveals the permutation table; a second image must then
    // follow exactly the same table, and the table must be a bijection.
    Transform perm{TransformKind::pixel_permutation, 0, 77};
    Tensor ramp({1, 9}, {0, 1, 2, 3, 4, 5, 6, 7, 8});
    Tensor mapped = apply_transform(ramp, 3, perm);
    std::vector<std::size_t> table(9);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < 9; ++i) {
        table[i] = static_cast<std::size_t>(mapped[i] + 0.5);
        seen.insert(table[i]);
    }
    CHECK(seen.size() == 9); // bijection over 0..8

    Rng rng(4);
    Tensor x({1, 9});
    for (double& v : x.values()) v = rng.uniform01();
    Tensor out = apply_transform(x, 3, perm);
    for (std::size_t i = 0; i < 9; ++i) CHECK(out[i] == x[table[i]]);

    // Same seed, same permutation; different seed, (almost surely) different.
    Tensor again = apply_transform(x, 3, perm);
    for (std::size_t i = 0; i < 9; ++i) CHECK(again[i] == out[i]);
}

TEST_CASE("apply_transform: central patch blacken/whiten touch only the patch") {
    Tensor x({1, 16});
    x.fill(0.5);
    Tensor black = apply_transform(x, 4, {TransformKind::patch_blacken, 2, 0});
    std::size_t zeros = 0;
    for (double v : black.values()) zeros += v == 0.0;
    CHECK(zeros == 4);
    CHECK(black[0] == 0.5);
    CHECK(black.at(0, 1 * 4 + 1) == 0.0);
    CHECK(black.at(0, 1 * 4 + 2) == 0.0);
    CHECK(black.at(0, 2 * 4 + 1) == 0.0);
    CHECK(black.at(0, 2 * 4 + 2) == 0.0);

    Tensor white = apply_transform(x, 4, {TransformKind::patch_whiten, 2, 0});
    std::size_t ones = 0;
    for (double v : white.values()) ones += v == 1.0;
    CHECK(ones == 4);
}

TEST_CASE("corrupt_gaussian: sigma 0 leaves input unchanged, output stays in [0,1]") {
    Rng rng(5);
    Tensor x({2, 9});
    for (double& v : x.values()) v = rng.uniform01();
    Rng c1(6);
    Tensor same = corrupt_gaussian(x, 0.0, c1);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(same[i] == x[i]);
    Rng c2(7);
    Tensor noisy = corrupt_gaussian(x, 0.8, c2);
    for (double v : noisy.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("corrupt_occlude: factor 1 blanks the image") {
    Tensor x({1, 16});
    x.fill(0.9);
    Rng rng(8);
    Tensor out = corrupt_occlude(x, 4, 1.0, rng);
    for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("corrupt_occlude: factor 0.5 on 28x28 zeroes exactly a 14x14 block") {
    Tensor x({1, 28 * 28});
    x.fill(1.0);
    Rng rng(9);
    Tensor out = corrupt_occlude(x, 28, 0.5, rng);
    std::size_t zeros = 0;
    for (double v : out.values()) zeros += v == 0.0;
    CHECK(zeros == 14 * 14);
    // The zero region is a contiguous square: find its bounding box.
    std::size_t rmin = 28, rmax = 0, cmin = 28, cmax = 0;
    for (std::size_t r = 0; r < 28; ++r)
        for (std::size_t c = 0; c < 28; ++c)
            if (out.at(0, r * 28 + c) == 0.0) {
                rmin = std::min(rmin, r);
                rmax = std::max(rmax, r);
                cmin = std::min(cmin, c);
                cmax = std::max(cmax, c);
            }
    CHECK(rmax - rmin + 1 == 14);
    CHECK(cmax - cmin + 1 == 14);
}

TEST_CASE("synth_glyphs: deterministic under the seed, empty when per_class is 0") {
    Rng a(10), b(10);
    LabeledBatch g1 = synth_glyphs(4, 20, 12, a);
    LabeledBatch g2 = synth_glyphs(4, 20, 12, b);
    REQUIRE(g1.size() == g2.size());
    for (std::size_t i = 0; i < g1.inputs.size(); ++i) CHECK(g1.inputs[i] == g2.inputs[i]);
    CHECK(g1.labels == g2.labels);

    Rng c(11);
    LabeledBatch empty = synth_glyphs(4, 0, 12, c);
    CHECK(empty.size() == 0);
}

TEST_CASE("synth_glyphs: jointly trained learner separates 6 classes at 0.9+") {
    Rng rng(2026);
    Rng data_rng = rng.substream("data");
    LabeledBatch pool = synth_glyphs(6, 400, 14, data_rng);
    // Split train/test disjointly.
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < pool.size(); ++i)
        (i < 6 * 300 ? train_idx : test_idx).push_back(i);
    Tensor xtr = pool.inputs.gather_rows(train_idx);
    Tensor xte = pool.inputs.gather_rows(test_idx);
    std::vector<std::size_t> ytr, yte;
    for (std::size_t i : train_idx) ytr.push_back(pool.labels[i]);
    for (std::size_t i : test_idx) yte.push_back(pool.labels[i]);

    Rng init = rng.substream("init");
    LearnerParams lp = learner_init(196, {48, 48}, 6, 0.0, init);
    auto opt = num::OptimizerState::create(lp.params, {});
    Rng trng = rng.substream("train");
    learner_train(lp, xtr, ytr, 20, opt, trng);
    const double acc = learner_accuracy(lp, xte, yte);
    INFO("joint glyph accuracy ", acc);
    CHECK(acc >= 0.9);
}

TEST_CASE("build_task: class filter keeps one label and transforms keep labels") {
    Rng rng(12);
    Rng data_rng = rng.substream("data");
    LabeledBatch base = synth_glyphs(4, 300, 8, data_rng);

    SuiteTaskSpec filter;
    filter.id = "digit-2";
    filter.filter_class = 2;
    filter.train_count = 100;
    filter.test_count = 40;
    Rng t1 = rng.substream("t1");
    MaterializedTask f = build_task(filter, base, 8, t1);
    CHECK(f.train.size() == 100);
    CHECK(f.test.size() == 40);
    for (std::size_t l : f.train.labels) CHECK(l == 2);
    for (std::size_t l : f.test.labels) CHECK(l == 2);
    CHECK(f.train.task.id == "digit-2");

    SuiteTaskSpec mirror;
    mirror.id = "mirror";
    mirror.transform = {TransformKind::mirror, 0, 0};
    mirror.train_count = 200;
    mirror.test_count = 50;
    Rng t2 = rng.substream("t2");
    MaterializedTask m = build_task(mirror, base, 8, t2);
    // Label-consistent: the label distribution matches the base classes.
    std::set<std::size_t> seen(m.train.labels.begin(), m.train.labels.end());
    CHECK(seen.size() == 4);
    for (double v : m.train.inputs.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("build_task: insufficient samples raise DataError") {
    Rng rng(13);
    Rng data_rng = rng.substream("data");
    LabeledBatch base = synth_glyphs(2, 10, 8, data_rng);
    SuiteTaskSpec spec;
    spec.id = "too-big";
    spec.train_count = 100;
    spec.test_count = 10;
    Rng trng = rng.substream("t");
    CHECK_THROWS_AS(build_task(spec, base, 8, trng), DataError);
}

TEST_CASE("tdigits_specs: 40 tasks, four transform blocks, unique labels") {
    auto specs = tdigits_specs(10, 100, 20);
    REQUIRE(specs.size() == 40);
    std::set<int> labels;
    for (const auto& s : specs) labels.insert(s.relabel);
    CHECK(labels.size() == 40);
    CHECK(specs[0].transform.kind == TransformKind::identity);
    CHECK(specs[10].transform.kind == TransformKind::mirror);
    CHECK(specs[20].transform.kind == TransformKind::flip_vertical);
    CHECK(specs[30].transform.kind == TransformKind::reflect_diagonal);
    CHECK(specs[13].filter_class == 3);
}

TEST_CASE("downsample_2x2: averages blocks") {
    Tensor x({1, 16}, {0, 1, 0, 1, 1, 0, 1, 0, 0.5, 0.5, 1, 1, 0.5, 0.5, 0, 0});
    Tensor out = downsample_2x2(x, 4, 4);
    REQUIRE(out.cols() == 4);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == doctest::Approx(0.5));
    CHECK(out[2] == doctest::Approx(0.5));
    CHECK(out[3] == doctest::Approx(0.5));
}

TEST_CASE("materialize: builtin digits-mini produces disjoint train/test per task") {
    TaskSuite suite = builtin_suite("digits-mini", 3);
    for (auto& t : suite.tasks) {
        t.train_count = 60;
        t.test_count = 20;
    }
    Rng rng(14);
    MaterializedSuite mat = materialize(suite, "", rng);
    REQUIRE(mat.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& task = mat.tasks[i];
        CHECK(task.train.size() == 60);
        CHECK(task.test.size() == 20);
        for (std::size_t l : task.train.labels) CHECK(l == i);
        // Disjointness: no train row equals any test row (jitter makes
        // samples almost surely distinct, so equality would mean reuse).
        for (std::size_t a = 0; a < task.train.size(); ++a)
            for (std::size_t b = 0; b < task.test.size(); ++b) {
                bool same = true;
                for (std::size_t j = 0; j < task.train.inputs.cols() && same; ++j)
                    same = task.train.inputs.at(a, j) == task.test.inputs.at(b, j);
                CHECK_FALSE(same);
            }
    }
}
