#include "hail/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "hail/decimal.hpp"
#include "hail/errors.hpp"

namespace hail {

namespace {

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace

AccuracyMatrix::AccuracyMatrix(int tasks) {
    require(tasks >= 1, "AccuracyMatrix: need at least one task");
    rows_.resize(static_cast<std::size_t>(tasks));
    for (int k = 0; k < tasks; ++k) rows_[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(k + 1));
}

void AccuracyMatrix::check_index(int k, int j) const {
    require(k >= 1 && k <= tasks() && j >= 1 && j <= k,
            "AccuracyMatrix: entry (" + std::to_string(k) + ", " + std::to_string(j) + ") outside the lower triangle");
}

void AccuracyMatrix::set(int k, int j, const Rational& accuracy) {
    check_index(k, j);
    require(accuracy >= 0 && accuracy <= 1, "AccuracyMatrix: accuracy must lie in [0, 1]");
    rows_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)] = accuracy;
}

void AccuracyMatrix::set(int k, int j, double accuracy) { set(k, j, decimal_rational(accuracy)); }

void AccuracyMatrix::set(int k, int j, std::int64_t correct, std::int64_t total) {
    require(total > 0 && correct >= 0 && correct <= total, "AccuracyMatrix: need 0 <= correct <= total, total > 0");
    set(k, j, Rational(correct, total));
}

bool AccuracyMatrix::has(int k, int j) const {
    check_index(k, j);
    return rows_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)].has_value();
}

const Rational& AccuracyMatrix::exact(int k, int j) const {
    require(has(k, j), "AccuracyMatrix: entry (" + std::to_string(k) + ", " + std::to_string(j) + ") missing");
    return *rows_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)];
}

double AccuracyMatrix::at(int k, int j) const { return to_double(exact(k, j)); }

bool AccuracyMatrix::row_complete(int k) const {
    require(k >= 1 && k <= tasks(), "AccuracyMatrix: task out of range");
    const auto& row = rows_[static_cast<std::size_t>(k - 1)];
    return std::all_of(row.begin(), row.end(), [](const auto& v) { return v.has_value(); });
}

Rational avg_accuracy_exact(const AccuracyMatrix& a, int k) {
    require(k >= 1 && k <= a.tasks() && a.row_complete(k), "avg_accuracy: row " + std::to_string(k) + " incomplete");
    Rational total = 0;
    for (int j = 1; j <= k; ++j) total += a.exact(k, j);
    return total / k;
}

double avg_accuracy(const AccuracyMatrix& a, int k) { return to_double(avg_accuracy_exact(a, k)); }

Rational task_forgetting_exact(const AccuracyMatrix& a, int k, int j) {
    require(j >= 1 && j < k, "task_forgetting: need 1 <= j < k");
    Rational best = a.exact(j, j);
    for (int l = j + 1; l < k; ++l) best = std::max(best, a.exact(l, j));
    return best - a.exact(k, j);
}

double task_forgetting(const AccuracyMatrix& a, int k, int j) { return to_double(task_forgetting_exact(a, k, j)); }

Rational forgetting_exact(const AccuracyMatrix& a, int k) {
    require(k >= 2, "forgetting: undefined before the second task");
    require(k <= a.tasks(), "forgetting: task out of range");
    Rational total = 0;
    for (int j = 1; j < k; ++j) total += task_forgetting_exact(a, k, j);
    return total / (k - 1);
}

double forgetting(const AccuracyMatrix& a, int k) { return to_double(forgetting_exact(a, k)); }

}  // namespace hail
