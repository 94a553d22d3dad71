#include "dgdmn/tensor.hpp"

#include "dgdmn/errors.hpp"

#include <cmath>

namespace dgdmn {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
    cols_ = shape_.empty() || shape_[0] == 0 ? 0 : data_.size() / shape_[0];
    if (shape_.size() >= 2) {
        cols_ = 1;
        for (std::size_t i = 1; i < shape_.size(); ++i) cols_ *= shape_[i];
    }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : Tensor(std::move(shape)) {
    if (data.size() != data_.size())
        throw ShapeError("tensor data length does not match shape");
    data_ = std::move(data);
}

std::size_t Tensor::cols() const {
    if (shape_.size() < 2) return shape_.empty() ? 0 : 1;
    return cols_;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

Tensor Tensor::slice_rows(std::size_t first, std::size_t count) const {
    const std::size_t c = cols();
    if (first + count > rows()) throw ShapeError("slice_rows out of range");
    Tensor out({count, c});
    for (std::size_t r = 0; r < count; ++r)
        for (std::size_t j = 0; j < c; ++j) out.at(r, j) = at(first + r, j);
    return out;
}

Tensor Tensor::gather_rows(const std::vector<std::size_t>& idx) const {
    const std::size_t c = cols();
    Tensor out({idx.size(), c});
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= rows()) throw ShapeError("gather_rows index out of range");
        for (std::size_t j = 0; j < c; ++j) out.at(r, j) = at(idx[r], j);
    }
    return out;
}

Tensor Tensor::concat_rows(const Tensor& a, const Tensor& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.cols() != b.cols()) throw ShapeError("concat_rows: column counts differ");
    Tensor out({a.rows() + b.rows(), a.cols()});
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t j = 0; j < a.cols(); ++j) out.at(r, j) = a.at(r, j);
    for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t j = 0; j < b.cols(); ++j) out.at(a.rows() + r, j) = b.at(r, j);
    return out;
}

} // namespace dgdmn
