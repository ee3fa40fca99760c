#include "classgain/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace classgain {

namespace {

void check_shape(std::size_t n, const SignalShape& shape) {
    if (n == 0) throw validation_error("sample set must contain at least one value");
    if (shape.size() != n) {
        throw validation_error("shape size " + std::to_string(shape.size()) +
                               " does not match value count " + std::to_string(n));
    }
}

}  // namespace

SampleSet::SampleSet(std::vector<double> values, SignalShape shape)
    : values_(std::move(values)), shape_(shape) {
    check_shape(values_.size(), shape_);
    min_ = std::numeric_limits<double>::infinity();
    max_ = -std::numeric_limits<double>::infinity();
    for (double v : values_) {
        if (!std::isfinite(v)) throw validation_error("sample values must be finite");
        min_ = std::min(min_, v);
        max_ = std::max(max_, v);
    }
}

SampleSet::SampleSet(std::vector<double> values)
    : SampleSet([&values]() {
          const std::size_t n = values.size();
          return SampleSet(std::move(values), SignalShape::linear(n));
      }()) {}

SampleSet SampleSet::with_shape(SignalShape shape) const {
    return SampleSet(values_, shape);
}

MembershipMatrix::MembershipMatrix(std::vector<double> entries, std::size_t rows,
                                   std::size_t cols)
    : entries_(std::move(entries)), rows_(rows), cols_(cols) {
    if (rows_ == 0 || cols_ == 0) throw validation_error("membership matrix must be non-empty");
    if (entries_.size() != rows_ * cols_) {
        throw validation_error("membership entry count does not match rows*cols");
    }
    for (std::size_t n = 0; n < rows_; ++n) {
        double sum = 0.0;
        for (std::size_t i = 0; i < cols_; ++i) {
            const double a = entries_[n * cols_ + i];
            if (!(a >= 0.0 && a <= 1.0)) {
                throw validation_error("membership entry outside [0,1] at row " +
                                       std::to_string(n));
            }
            sum += a;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw validation_error("membership row " + std::to_string(n) +
                                   " sums to " + std::to_string(sum));
        }
    }
}

MembershipMatrix MembershipMatrix::from_labels(const ClassificationScheme& scheme) {
    const std::size_t n = scheme.size();
    const std::size_t j = scheme.num_classes();
    std::vector<double> entries(n * j, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        entries[k * j + static_cast<std::size_t>(scheme[k])] = 1.0;
    }
    return MembershipMatrix(std::move(entries), n, j);
}

MembershipMatrix MembershipMatrix::uniform(std::size_t rows, std::size_t cols) {
    if (cols == 0) throw validation_error("membership matrix must have at least one class");
    std::vector<double> entries(rows * cols, 1.0 / static_cast<double>(cols));
    return MembershipMatrix(std::move(entries), rows, cols);
}

bool MembershipMatrix::is_hard() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](double a) { return a == 0.0 || a == 1.0; });
}

ClassificationScheme MembershipMatrix::hard_labels() const {
    if (!is_hard()) throw validation_error("hard_labels requires a 0/1 membership matrix");
    return argmax_labels();
}

ClassificationScheme MembershipMatrix::argmax_labels() const {
    std::vector<int> labels(rows_);
    for (std::size_t n = 0; n < rows_; ++n) {
        std::size_t best = 0;
        double best_value = entries_[n * cols_];
        for (std::size_t i = 1; i < cols_; ++i) {
            const double a = entries_[n * cols_ + i];
            if (a > best_value) {
                best_value = a;
                best = i;
            }
        }
        labels[n] = static_cast<int>(best);
    }
    return ClassificationScheme(std::move(labels), cols_);
}

MembershipMatrix MembershipMatrix::with_permuted_columns(
    std::span<const std::size_t> perm) const {
    if (perm.size() != cols_) throw validation_error("permutation size must equal class count");
    std::vector<double> out(entries_.size());
    for (std::size_t n = 0; n < rows_; ++n) {
        for (std::size_t i = 0; i < cols_; ++i) {
            out[n * cols_ + perm[i]] = entries_[n * cols_ + i];
        }
    }
    return MembershipMatrix(std::move(out), rows_, cols_);
}

ClassificationScheme::ClassificationScheme(std::vector<int> labels, std::size_t num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
    if (labels_.empty()) throw validation_error("classification scheme must be non-empty");
    if (num_classes_ == 0) throw validation_error("classification needs at least one class");
    for (int z : labels_) {
        if (z < 0 || static_cast<std::size_t>(z) >= num_classes_) {
            throw validation_error("label " + std::to_string(z) + " outside [0, J)");
        }
    }
}

void MixtureSpec::validate(std::size_t n) const {
    if (components.empty()) throw validation_error("mixture needs at least one component");
    if (n == 0) throw validation_error("sample count must be positive");
    for (const auto& c : components) {
        if (!std::isfinite(c.mean)) throw validation_error("component mean must be finite");
        if (!(c.variance > 0.0)) throw validation_error("component variance must be positive");
        if (!(c.weight > 0.0)) throw validation_error("component weight must be positive");
    }
    if (is_blocks()) {
        const auto& runs = std::get<BlocksLayout>(layout).runs;
        if (runs.empty()) throw validation_error("blocks layout needs at least one run");
        std::size_t total = 0;
        for (const auto& run : runs) {
            if (run.class_index >= components.size()) {
                throw validation_error("block run references unknown class");
            }
            if (run.length == 0) throw validation_error("block run length must be positive");
            total += run.length;
        }
        if (total != n) {
            throw validation_error("block run lengths sum to " + std::to_string(total) +
                                   ", expected " + std::to_string(n));
        }
    } else {
        double total = 0.0;
        for (const auto& c : components) total += c.weight;
        if (std::abs(total - 1.0) > kRowSumTolerance) {
            throw validation_error("iid weights must sum to 1");
        }
    }
}

}  // namespace classgain
