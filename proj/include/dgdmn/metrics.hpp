#pragma once

#include <cstddef>
#include <vector>

namespace dgdmn {

// Lower-triangular accuracy record: entry (i, j), j <= i, is the test accuracy
// on task j measured after training on task i (0-based).
class AccuracyMatrix {
public:
    AccuracyMatrix() = default;
    explicit AccuracyMatrix(std::size_t num_tasks) : t_(num_tasks) {}

    std::size_t num_tasks() const { return t_; }
    std::size_t rows_filled() const { return rows_.size(); }
    bool complete() const { return rows_.size() == t_; }

    // Rows must be appended in training order; row i carries i+1 entries.
    void append_row(std::vector<double> row);

    double at(std::size_t i, std::size_t j) const { return rows_[i][j]; }
    const std::vector<double>& row(std::size_t i) const { return rows_[i]; }

private:
    std::size_t t_ = 0;
    std::vector<std::vector<double>> rows_;
};

// Mean of the last row. Requires a complete matrix.
double acc_metric(const AccuracyMatrix& a);

// Mean over i < T-1 of A[T-1][i] - A[i][i]. Requires T >= 2 and a complete
// matrix; throws "BWT undefined" for T == 1.
double bwt_metric(const AccuracyMatrix& a);

// Point t (1-based position t+1 in the returned vector's index t) is the mean
// of row t over tasks seen so far.
std::vector<double> forgetting_curve(const AccuracyMatrix& a);

// Mean of row t over the most recent k tasks (all tasks when k >= t+1).
std::vector<double> last_k_accuracy(const AccuracyMatrix& a, std::size_t k);

} // namespace dgdmn
