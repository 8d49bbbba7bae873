#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hail/decimal.hpp"

namespace hail {

/// Lower-triangular grid of accuracies: a(k, j) is the accuracy on task j's
/// test split after learning task k, for 1 <= j <= k. Tasks are 1-based in
/// this interface; storage row k-1 holds task k.
///
/// Entries are exact rationals. Counts go in as correct/total; a double goes
/// in as the decimal number its shortest round-trip form spells (0.7 -> 7/10),
/// so both metrics below are exact before the final rounding to double.
class AccuracyMatrix {
public:
    AccuracyMatrix() = default;
    explicit AccuracyMatrix(int tasks);

    int tasks() const { return static_cast<int>(rows_.size()); }
    void set(int k, int j, double accuracy);
    void set(int k, int j, std::int64_t correct, std::int64_t total);
    void set(int k, int j, const Rational& accuracy);
    double at(int k, int j) const;
    const Rational& exact(int k, int j) const;
    bool has(int k, int j) const;
    bool row_complete(int k) const;

private:
    void check_index(int k, int j) const;
    std::vector<std::vector<std::optional<Rational>>> rows_;
};

/// (1/k) * sum_{j<=k} a(k, j).
double avg_accuracy(const AccuracyMatrix& a, int k);
Rational avg_accuracy_exact(const AccuracyMatrix& a, int k);

/// Forgetting of task j after task k: max_{j<=l<k} a(l, j) - a(k, j).
double task_forgetting(const AccuracyMatrix& a, int k, int j);
Rational task_forgetting_exact(const AccuracyMatrix& a, int k, int j);

/// (1/(k-1)) * sum_{j<k} task_forgetting(a, k, j); requires k >= 2.
double forgetting(const AccuracyMatrix& a, int k);
Rational forgetting_exact(const AccuracyMatrix& a, int k);

}  // namespace hail
