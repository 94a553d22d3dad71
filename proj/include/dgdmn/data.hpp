#pragma once

#include "dgdmn/rng.hpp"
#include "dgdmn/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dgdmn {

struct TaskDescriptor {
    std::string id;
    bool operator==(const TaskDescriptor&) const = default;
    auto operator<=>(const TaskDescriptor&) const = default;
};

// One task's worth of samples: flattened images (n x d, values in [0,1]) and
// class indices.
struct LabeledBatch {
    Tensor inputs;
    std::vector<std::size_t> labels;
    TaskDescriptor task;

    std::size_t size() const { return inputs.rows(); }
};

// Image transforms used to build task sequences. All operate on flattened
// square images and preserve labels; class_filter is handled at suite level.
enum class TransformKind {
    identity,
    pixel_permutation, // whole-image fixed permutation
    patch_blacken,     // central size x size patch set to 0
    patch_whiten,      // central size x size patch set to 1
    patch_permute,     // central size x size patch under a fixed permutation
    mirror,            // horizontal flip
    flip_vertical,     // upside down
    reflect_diagonal,  // transpose about the main diagonal
};

struct Transform {
    TransformKind kind = TransformKind::identity;
    std::size_t patch = 0;      // patch side for the patch_* kinds
    std::uint64_t perm_seed = 0; // fixed permutation seed where applicable
};

// Applies the transform to every row of x (images of side x side).
Tensor apply_transform(const Tensor& x, std::size_t side, const Transform& t);

// Corruption operators for the resilience experiments.
Tensor corrupt_gaussian(const Tensor& x, double sigma, Rng& rng);
// Zeroes a square block whose side is round(factor * image side), placed
// uniformly at random per image.
Tensor corrupt_occlude(const Tensor& x, std::size_t side, double factor, Rng& rng);

// Procedural glyph classes: each class has a fixed stencil of thick strokes;
// samples add positional jitter, intensity scaling, and light pixel noise.
// Deterministic under the stream. Labels are 0..num_classes-1, per_class
// samples each, interleaved by class.
LabeledBatch synth_glyphs(std::size_t num_classes, std::size_t per_class,
                          std::size_t image_side, Rng& rng);

// 2x2 average pooling of an (n, r, c) or flattened stack; r and c must be even.
Tensor downsample_2x2(const Tensor& x, std::size_t rows, std::size_t cols);

} // namespace dgdmn
