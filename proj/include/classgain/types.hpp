#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace classgain {

// Invalid inputs (bad shapes, infeasible parameters, malformed memberships).
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Failures of the numerics themselves (non-finite objectives, degenerate data
// where a quantity is undefined).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kRowSumTolerance = 1e-9;

// Layout of a signal: a flat sequence or a row-major grid. Grids carry no
// algorithmic meaning; they only drive image-style input/output.
class SignalShape {
public:
    static SignalShape linear(std::size_t n) { return SignalShape(1, n, false); }
    static SignalShape grid(std::size_t height, std::size_t width) {
        return SignalShape(height, width, true);
    }

    bool is_grid() const { return grid_; }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return height_ * width_; }

    bool operator==(const SignalShape&) const = default;

private:
    SignalShape(std::size_t h, std::size_t w, bool g) : height_(h), width_(w), grid_(g) {}
    std::size_t height_;
    std::size_t width_;
    bool grid_;
};

// Immutable observed signal x_1..x_N plus its value range V = max - min.
class SampleSet {
public:
    SampleSet(std::vector<double> values, SignalShape shape);
    explicit SampleSet(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t n) const { return values_[n]; }
    const SignalShape& shape() const { return shape_; }

    double min_value() const { return min_; }
    double max_value() const { return max_; }
    double value_range() const { return max_ - min_; }

    // Same values reinterpreted under a different layout of equal size.
    SampleSet with_shape(SignalShape shape) const;

private:
    std::vector<double> values_;
    SignalShape shape_;
    double min_;
    double max_;
};

class ClassificationScheme;

// N x J row-stochastic membership matrix, row-major. Rows must sum to one
// within kRowSumTolerance and entries must lie in [0, 1].
class MembershipMatrix {
public:
    MembershipMatrix(std::vector<double> entries, std::size_t rows, std::size_t cols);

    static MembershipMatrix from_labels(const ClassificationScheme& scheme);
    static MembershipMatrix uniform(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t n, std::size_t i) const { return entries_[n * cols_ + i]; }
    std::span<const double> row(std::size_t n) const {
        return {entries_.data() + n * cols_, cols_};
    }
    const std::vector<double>& entries() const { return entries_; }

    // True iff every entry is exactly 0 or 1.
    bool is_hard() const;

    // Exact inverse of from_labels; requires a hard matrix.
    ClassificationScheme hard_labels() const;

    // Row-wise argmax with ties resolved to the lower class index.
    ClassificationScheme argmax_labels() const;

    MembershipMatrix with_permuted_columns(std::span<const std::size_t> perm) const;

private:
    std::vector<double> entries_;
    std::size_t rows_;
    std::size_t cols_;
};

// Hard labels z_1..z_N, stored zero-based; files use one-based labels.
class ClassificationScheme {
public:
    ClassificationScheme(std::vector<int> labels, std::size_t num_classes);

    std::size_t size() const { return labels_.size(); }
    std::size_t num_classes() const { return num_classes_; }
    int operator[](std::size_t n) const { return labels_[n]; }
    const std::vector<int>& labels() const { return labels_; }

    MembershipMatrix to_membership() const { return MembershipMatrix::from_labels(*this); }

private:
    std::vector<int> labels_;
    std::size_t num_classes_;
};

// Per-class fraction / mean / variance plus the global variance. A class
// whose membership column sums to zero is flagged undefined rather than
// zero-filled; its mean and variance are NaN.
struct ClassStats {
    std::vector<double> p;
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<bool> defined;
    double mean_x = 0.0;
    double variance_x = 0.0;
    std::size_t n = 0;

    std::size_t num_classes() const { return p.size(); }
};

// Synthetic mixture description: per-class Gaussian parameters plus a sample
// layout, either contiguous runs or independent draws by weight.
struct MixtureComponent {
    double mean = 0.0;
    double variance = 1.0;
    double weight = 1.0;
};

struct BlockRun {
    std::size_t class_index = 0;
    std::size_t length = 0;
};

struct BlocksLayout {
    std::vector<BlockRun> runs;
};

struct IidLayout {};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    std::variant<BlocksLayout, IidLayout> layout = IidLayout{};
    std::uint64_t seed = 0;

    std::size_t num_classes() const { return components.size(); }
    bool is_blocks() const { return std::holds_alternative<BlocksLayout>(layout); }

    // Throws validation_error on inconsistent weights or run lengths.
    void validate(std::size_t n) const;
};

}  // namespace classgain
