#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace dgdmn {

// Dense row-major tensor of doubles. Most of the engine works with rank-2
// tensors (batch x features); rank-1 and rank-3 appear for labels and raw
// image stacks.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);
    Tensor(std::initializer_list<std::size_t> shape)
        : Tensor(std::vector<std::size_t>(shape)) {}

    static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }

    // Rank-2 accessors.
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;

    void fill(double v);
    // Returns a rank-2 view-copy of the rows [first, first+count).
    Tensor slice_rows(std::size_t first, std::size_t count) const;
    // Select rows by index into a new tensor.
    Tensor gather_rows(const std::vector<std::size_t>& idx) const;
    // Stack two rank-2 tensors with equal column counts.
    static Tensor concat_rows(const Tensor& a, const Tensor& b);

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
    std::size_t cols_ = 0; // cached product of shape_[1..] for row access
};

} // namespace dgdmn
