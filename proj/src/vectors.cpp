#include "ktree/vectors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace ktree {

SparseVector::SparseVector(std::vector<SparseEntry> entries, std::size_t dim)
    : entries_(std::move(entries)), dim_(dim) {
    std::uint64_t prev = 0;
    bool first = true;
    for (const auto& e : entries_) {
        if (!first && e.term <= prev) {
            throw std::invalid_argument("sparse vector: term ids must be strictly ascending");
        }
        if (e.term >= dim_) {
            throw std::invalid_argument("sparse vector: term id out of range");
        }
        if (e.weight == 0.0) {
            throw std::invalid_argument("sparse vector: zero weight stored");
        }
        prev = e.term;
        first = false;
    }
}

void DenseVector::scale(double factor) {
    for (double& w : weights_) w *= factor;
}

namespace {

void check_dims(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("dimension mismatch");
}

}  // namespace

double squared_distance(const SparseVector& a, const SparseVector& b) {
    check_dims(a.dim(), b.dim());
    const auto& ea = a.entries();
    const auto& eb = b.entries();
    std::size_t i = 0, j = 0;
    double sum = 0.0;
    while (i < ea.size() && j < eb.size()) {
        if (ea[i].term == eb[j].term) {
            const double d = ea[i].weight - eb[j].weight;
            sum += d * d;
            ++i;
            ++j;
        } else if (ea[i].term < eb[j].term) {
            sum += ea[i].weight * ea[i].weight;
            ++i;
        } else {
            sum += eb[j].weight * eb[j].weight;
            ++j;
        }
    }
    for (; i < ea.size(); ++i) sum += ea[i].weight * ea[i].weight;
    for (; j < eb.size(); ++j) sum += eb[j].weight * eb[j].weight;
    return sum;
}

double squared_distance(const SparseVector& a, const DenseVector& b) {
    check_dims(a.dim(), b.dim());
    const auto& ea = a.entries();
    const auto& wb = b.values();
    double sum = 0.0;
    std::size_t i = 0;
    for (std::size_t t = 0; t < wb.size(); ++t) {
        double at = 0.0;
        if (i < ea.size() && ea[i].term == t) {
            at = ea[i].weight;
            ++i;
        }
        const double d = at - wb[t];
        sum += d * d;
    }
    return sum;
}

double squared_distance(const DenseVector& a, const SparseVector& b) {
    return squared_distance(b, a);
}

double squared_distance(const DenseVector& a, const DenseVector& b) {
    check_dims(a.dim(), b.dim());
    const auto& wa = a.values();
    const auto& wb = b.values();
    double sum = 0.0;
    for (std::size_t t = 0; t < wa.size(); ++t) {
        const double d = wa[t] - wb[t];
        sum += d * d;
    }
    return sum;
}

double dot(const SparseVector& a, const DenseVector& b) {
    check_dims(a.dim(), b.dim());
    const auto& wb = b.values();
    double sum = 0.0;
    for (const auto& e : a.entries()) sum += e.weight * wb[e.term];
    return sum;
}

double dot(const DenseVector& a, const DenseVector& b) {
    check_dims(a.dim(), b.dim());
    const auto& wa = a.values();
    const auto& wb = b.values();
    double sum = 0.0;
    for (std::size_t t = 0; t < wa.size(); ++t) sum += wa[t] * wb[t];
    return sum;
}

double norm_squared(const SparseVector& v) {
    double sum = 0.0;
    for (const auto& e : v.entries()) sum += e.weight * e.weight;
    return sum;
}

double norm_squared(const DenseVector& v) {
    double sum = 0.0;
    for (const double w : v.values()) sum += w * w;
    return sum;
}

void accumulate(DenseVector& acc, const SparseVector& v, double scale) {
    check_dims(acc.dim(), v.dim());
    for (const auto& e : v.entries()) {
        acc[e.term] += scale * e.weight;
    }
}

void accumulate(DenseVector& acc, const DenseVector& v, double scale) {
    check_dims(acc.dim(), v.dim());
    for (std::size_t t = 0; t < v.dim(); ++t) {
        acc[t] += scale * v[t];
    }
}

DenseVector densify(const SparseVector& v) {
    DenseVector d(v.dim());
    for (const auto& e : v.entries()) d[e.term] = e.weight;
    return d;
}

SparseVector sparsify(const DenseVector& d, double epsilon) {
    std::vector<SparseEntry> entries;
    for (std::size_t t = 0; t < d.dim(); ++t) {
        if (std::abs(d[t]) > epsilon) {
            entries.push_back({static_cast<std::uint32_t>(t), d[t]});
        }
    }
    return SparseVector(std::move(entries), d.dim());
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        throw std::overflow_error("storage estimate overflows 64 bits");
    }
    return a * b;
}

}  // namespace

StorageEstimate estimate_storage(std::uint64_t n_docs, std::uint64_t n_terms,
                                 std::uint64_t nnz, const StorageModel& model) {
    if (model.bytes_per_sparse_index == 0 || model.bytes_per_weight == 0) {
        throw std::invalid_argument("storage model byte sizes must be positive");
    }
    StorageEstimate est;
    est.dense_bytes = checked_mul(checked_mul(n_docs, n_terms), model.bytes_per_weight);
    est.sparse_bytes = checked_mul(
        nnz, static_cast<std::uint64_t>(model.bytes_per_sparse_index) + model.bytes_per_weight);
    return est;
}

std::string format_mb(std::uint64_t bytes) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f MB", static_cast<double>(bytes) / (1ull << 20));
    return buf;
}

std::string format_gb(std::uint64_t bytes) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f GB", static_cast<double>(bytes) / (1ull << 30));
    return buf;
}

}  // namespace ktree
