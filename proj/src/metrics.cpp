#include "dgdmn/metrics.hpp"

#include "dgdmn/errors.hpp"

namespace dgdmn {

void AccuracyMatrix::append_row(std::vector<double> row) {
    if (rows_.size() >= t_) throw MetricError("accuracy matrix already complete");
    if (row.size() != rows_.size() + 1)
        throw MetricError("accuracy matrix row has wrong length");
    for (double v : row)
        if (v < 0.0 || v > 1.0) throw MetricError("accuracy outside [0,1]");
    rows_.push_back(std::move(row));
}

double acc_metric(const AccuracyMatrix& a) {
    if (!a.complete() || a.num_tasks() == 0)
        throw MetricError("acc_metric: last row incomplete");
    const auto& last = a.row(a.num_tasks() - 1);
    double sum = 0.0;
    for (double v : last) sum += v;
    return sum / static_cast<double>(last.size());
}

double bwt_metric(const AccuracyMatrix& a) {
    if (a.num_tasks() == 1) throw MetricError("BWT undefined for a single task");
    if (!a.complete() || a.num_tasks() == 0)
        throw MetricError("bwt_metric: matrix incomplete");
    const std::size_t t = a.num_tasks();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t; ++i) sum += a.at(t - 1, i) - a.at(i, i);
    return sum / static_cast<double>(t - 1);
}

std::vector<double> forgetting_curve(const AccuracyMatrix& a) {
    std::vector<double> curve;
    for (std::size_t i = 0; i < a.rows_filled(); ++i) {
        double sum = 0.0;
        for (double v : a.row(i)) sum += v;
        curve.push_back(sum / static_cast<double>(i + 1));
    }
    return curve;
}

std::vector<double> last_k_accuracy(const AccuracyMatrix& a, std::size_t k) {
    if (k == 0) throw MetricError("last_k_accuracy: k must be >= 1");
    std::vector<double> curve;
    for (std::size_t i = 0; i < a.rows_filled(); ++i) {
        const std::size_t first = i + 1 > k ? i + 1 - k : 0;
        double sum = 0.0;
        for (std::size_t j = first; j <= i; ++j) sum += a.at(i, j);
        curve.push_back(sum / static_cast<double>(i - first + 1));
    }
    return curve;
}

} // namespace dgdmn
