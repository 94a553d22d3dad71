#include "dgdmn/data.hpp"

#include "dgdmn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dgdmn {

namespace {

std::vector<std::size_t> fixed_permutation(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    rng.shuffle(p);
    return p;
}

// Top-left corner of a centred patch.
std::size_t patch_origin(std::size_t side, std::size_t patch) {
    return (side - patch) / 2;
}

} // namespace

Tensor apply_transform(const Tensor& x, std::size_t side, const Transform& t) {
    const std::size_t d = side * side;
    if (x.cols() != d) throw DataError("apply_transform: image width mismatch");
    if (t.kind == TransformKind::identity) return x;
    if ((t.kind == TransformKind::patch_blacken || t.kind == TransformKind::patch_whiten ||
         t.kind == TransformKind::patch_permute) &&
        (t.patch == 0 || t.patch > side))
        throw DataError("apply_transform: patch size invalid for image geometry");

    Tensor out = x;
    const std::size_t n = x.rows();
    switch (t.kind) {
    case TransformKind::identity:
        break;
    case TransformKind::pixel_permutation: {
        const auto perm = fixed_permutation(d, t.perm_seed);
        for (std::size_t r = 0; r < n; ++r) {
            const double* src = x.row(r);
            double* dst = out.row(r);
            for (std::size_t i = 0; i < d; ++i) dst[i] = src[perm[i]];
        }
        break;
    }
    case TransformKind::patch_blacken:
    case TransformKind::patch_whiten: {
        const double v = t.kind == TransformKind::patch_whiten ? 1.0 : 0.0;
        const std::size_t o = patch_origin(side, t.patch);
        for (std::size_t r = 0; r < n; ++r) {
            double* dst = out.row(r);
            for (std::size_t i = 0; i < t.patch; ++i)
                for (std::size_t j = 0; j < t.patch; ++j)
                    dst[(o + i) * side + (o + j)] = v;
        }
        break;
    }
    case TransformKind::patch_permute: {
        const std::size_t p2 = t.patch * t.patch;
        const auto perm = fixed_permutation(p2, t.perm_seed);
        const std::size_t o = patch_origin(side, t.patch);
        std::vector<double> buf(p2);
        for (std::size_t r = 0; r < n; ++r) {
            double* dst = out.row(r);
            for (std::size_t i = 0; i < t.patch; ++i)
                for (std::size_t j = 0; j < t.patch; ++j)
                    buf[i * t.patch + j] = dst[(o + i) * side + (o + j)];
            for (std::size_t i = 0; i < t.patch; ++i)
                for (std::size_t j = 0; j < t.patch; ++j)
                    dst[(o + i) * side + (o + j)] = buf[perm[i * t.patch + j]];
        }
        break;
    }
    case TransformKind::mirror:
        for (std::size_t r = 0; r < n; ++r) {
            const double* src = x.row(r);
            double* dst = out.row(r);
            for (std::size_t i = 0; i < side; ++i)
                for (std::size_t j = 0; j < side; ++j)
                    dst[i * side + j] = src[i * side + (side - 1 - j)];
        }
        break;
    case TransformKind::flip_vertical:
        for (std::size_t r = 0; r < n; ++r) {
            const double* src = x.row(r);
            double* dst = out.row(r);
            for (std::size_t i = 0; i < side; ++i)
                for (std::size_t j = 0; j < side; ++j)
                    dst[i * side + j] = src[(side - 1 - i) * side + j];
        }
        break;
    case TransformKind::reflect_diagonal:
        for (std::size_t r = 0; r < n; ++r) {
            const double* src = x.row(r);
            double* dst = out.row(r);
            for (std::size_t i = 0; i < side; ++i)
                for (std::size_t j = 0; j < side; ++j)
                    dst[i * side + j] = src[j * side + i];
        }
        break;
    }
    return out;
}

Tensor corrupt_gaussian(const Tensor& x, double sigma, Rng& rng) {
    if (sigma < 0.0) throw DataError("corrupt_gaussian: sigma must be >= 0");
    if (sigma == 0.0) return x;
    Tensor out = x;
    for (double& v : out.values()) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
    return out;
}

Tensor corrupt_occlude(const Tensor& x, std::size_t side, double factor, Rng& rng) {
    if (factor < 0.0 || factor > 1.0) throw DataError("corrupt_occlude: factor in [0,1]");
    const std::size_t block =
        static_cast<std::size_t>(std::llround(factor * static_cast<double>(side)));
    if (block == 0) return x;
    Tensor out = x;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const std::size_t max_o = side - block;
        const std::size_t oi = max_o == 0 ? 0 : rng.uniform_index(max_o + 1);
        const std::size_t oj = max_o == 0 ? 0 : rng.uniform_index(max_o + 1);
        double* dst = out.row(r);
        for (std::size_t i = 0; i < block; ++i)
            for (std::size_t j = 0; j < block; ++j)
                dst[(oi + i) * side + (oj + j)] = 0.0;
    }
    return out;
}

namespace {

// Draws a thick line segment into the stencil with unit intensity.
void draw_stroke(std::vector<double>& img, std::size_t side, double x0, double y0, double x1,
                 double y1, double thickness) {
    const int steps = static_cast<int>(3 * side);
    for (int s = 0; s <= steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        const double cx = x0 + t * (x1 - x0);
        const double cy = y0 + t * (y1 - y0);
        const int r0 = std::max(0, static_cast<int>(std::floor(cy - thickness)));
        const int r1 = std::min(static_cast<int>(side) - 1,
                                static_cast<int>(std::ceil(cy + thickness)));
        const int c0 = std::max(0, static_cast<int>(std::floor(cx - thickness)));
        const int c1 = std::min(static_cast<int>(side) - 1,
                                static_cast<int>(std::ceil(cx + thickness)));
        for (int i = r0; i <= r1; ++i)
            for (int j = c0; j <= c1; ++j) {
                const double dy = static_cast<double>(i) - cy;
                const double dx = static_cast<double>(j) - cx;
                if (dx * dx + dy * dy <= thickness * thickness)
                    img[static_cast<std::size_t>(i) * side + static_cast<std::size_t>(j)] = 1.0;
            }
    }
}

struct Stroke {
    double x0, y0, x1, y1;
};

Stroke random_stroke(Rng& rng, double span) {
    Stroke st;
    st.x0 = rng.uniform(0.1, 0.9) * span;
    st.y0 = rng.uniform(0.1, 0.9) * span;
    st.x1 = rng.uniform(0.1, 0.9) * span;
    st.y1 = rng.uniform(0.1, 0.9) * span;
    // Reject near-degenerate strokes.
    if (std::abs(st.x1 - st.x0) + std::abs(st.y1 - st.y0) < 0.4 * span) {
        st.x1 = span - st.x1;
        st.y1 = span - st.y1;
    }
    return st;
}

// Every class draws the same two base strokes; one extra stroke carries the
// class identity. Classification therefore rides on a narrow margin, the way
// handwritten digits share most of their ink.
std::vector<double> class_stencil(std::size_t cls, std::size_t side) {
    const double span = static_cast<double>(side - 1);
    Rng base_rng(0xbeefu);
    const Stroke shared1 = random_stroke(base_rng, span);
    const Stroke shared2 = random_stroke(base_rng, span);
    Rng cls_rng(0x67c1f5u + 0x9e37u * static_cast<std::uint64_t>(cls));
    const Stroke unique = random_stroke(cls_rng, span);

    std::vector<double> img(side * side, 0.0);
    const double thickness = std::max(1.0, static_cast<double>(side) / 12.0);
    for (const Stroke* st : {&shared1, &shared2, &unique})
        draw_stroke(img, side, st->x0, st->y0, st->x1, st->y1, thickness);
    return img;
}

} // namespace

LabeledBatch synth_glyphs(std::size_t num_classes, std::size_t per_class,
                          std::size_t image_side, Rng& rng) {
    if (image_side < 8) throw DataError("synth_glyphs: image_side must be >= 8");
    const std::size_t d = image_side * image_side;
    const std::size_t n = num_classes * per_class;
    LabeledBatch batch;
    batch.inputs = Tensor({n, d});
    batch.labels.resize(n);
    std::vector<std::vector<double>> stencils(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) stencils[c] = class_stencil(c, image_side);

    const int sidei = static_cast<int>(image_side);
    std::size_t row = 0;
    for (std::size_t k = 0; k < per_class; ++k) {
        for (std::size_t c = 0; c < num_classes; ++c, ++row) {
            const int dx = static_cast<int>(rng.uniform_index(3)) - 1;
            const int dy = static_cast<int>(rng.uniform_index(3)) - 1;
            const double intensity = rng.uniform(0.75, 1.0);
            double* dst = batch.inputs.row(row);
            const std::vector<double>& st = stencils[c];
            for (int i = 0; i < sidei; ++i) {
                for (int j = 0; j < sidei; ++j) {
                    const int si = i - dy;
                    const int sj = j - dx;
                    double v = 0.0;
                    if (si >= 0 && si < sidei && sj >= 0 && sj < sidei)
                        v = st[static_cast<std::size_t>(si) * image_side +
                               static_cast<std::size_t>(sj)] *
                            intensity;
                    dst[i * sidei + j] = std::clamp(v, 0.0, 1.0);
                }
            }
            batch.labels[row] = c;
        }
    }
    return batch;
}

Tensor downsample_2x2(const Tensor& x, std::size_t rows, std::size_t cols) {
    if (rows % 2 != 0 || cols % 2 != 0)
        throw DataError("downsample_2x2: dimensions must be even");
    if (x.cols() != rows * cols) throw DataError("downsample_2x2: width mismatch");
    const std::size_t orows = rows / 2, ocols = cols / 2;
    Tensor out({x.rows(), orows * ocols});
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* src = x.row(r);
        double* dst = out.row(r);
        for (std::size_t i = 0; i < orows; ++i)
            for (std::size_t j = 0; j < ocols; ++j)
                dst[i * ocols + j] = 0.25 * (src[(2 * i) * cols + 2 * j] +
                                             src[(2 * i) * cols + 2 * j + 1] +
                                             src[(2 * i + 1) * cols + 2 * j] +
                                             src[(2 * i + 1) * cols + 2 * j + 1]);
    }
    return out;
}

} // namespace dgdmn
