#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ktree {

struct SparseEntry {
    std::uint32_t term;
    double weight;

    bool operator==(const SparseEntry&) const = default;
};

// Sorted (term, weight) pairs over a fixed vocabulary. Term ids are strictly
// ascending, all below dim, and no stored weight is zero.
class SparseVector {
public:
    SparseVector() = default;
    SparseVector(std::vector<SparseEntry> entries, std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t nnz() const { return entries_.size(); }
    const std::vector<SparseEntry>& entries() const { return entries_; }

    bool operator==(const SparseVector&) const = default;

private:
    std::vector<SparseEntry> entries_;
    std::size_t dim_ = 0;
};

// Fixed-length weight array; the centre representation in classic mode.
class DenseVector {
public:
    DenseVector() = default;
    explicit DenseVector(std::size_t dim) : weights_(dim, 0.0) {}
    explicit DenseVector(std::vector<double> weights) : weights_(std::move(weights)) {}

    std::size_t dim() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    double& operator[](std::size_t i) { return weights_[i]; }
    const std::vector<double>& values() const { return weights_; }

    void scale(double factor);

    bool operator==(const DenseVector&) const = default;

private:
    std::vector<double> weights_;
};

// Squared Euclidean distance kernels. The sparse/dense form merges the sparse
// entry list against the dense array in one pass; the sparse operand is never
// densified.
double squared_distance(const SparseVector& a, const SparseVector& b);
double squared_distance(const SparseVector& a, const DenseVector& b);
double squared_distance(const DenseVector& a, const SparseVector& b);
double squared_distance(const DenseVector& a, const DenseVector& b);

// Inner products and squared norms. With a cached norm of the dense side,
// ||a - b||^2 = ||a||^2 - 2<a,b> + ||b||^2 costs O(nnz) instead of O(dim).
double dot(const SparseVector& a, const DenseVector& b);
double dot(const DenseVector& a, const DenseVector& b);
double norm_squared(const SparseVector& v);
double norm_squared(const DenseVector& v);

// acc += scale * v
void accumulate(DenseVector& acc, const SparseVector& v, double scale);
void accumulate(DenseVector& acc, const DenseVector& v, double scale);

DenseVector densify(const SparseVector& v);

// Keeps exactly the coordinates with |weight| > epsilon.
SparseVector sparsify(const DenseVector& d, double epsilon);

// Byte cost model for the dense/sparse representation trade-off.
struct StorageModel {
    std::uint32_t bytes_per_sparse_index = 2;
    std::uint32_t bytes_per_weight = 4;
};

struct StorageEstimate {
    std::uint64_t dense_bytes = 0;
    std::uint64_t sparse_bytes = 0;
};

// Exact integer arithmetic; throws std::overflow_error if a product does not
// fit in 64 bits.
StorageEstimate estimate_storage(std::uint64_t n_docs, std::uint64_t n_terms,
                                 std::uint64_t nnz, const StorageModel& model = {});

// Binary units with conventional labels: MB = 2^20 bytes (two decimals),
// GB = 2^30 bytes (one decimal).
std::string format_mb(std::uint64_t bytes);
std::string format_gb(std::uint64_t bytes);

}  // namespace ktree
