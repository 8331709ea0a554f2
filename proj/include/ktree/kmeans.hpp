#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ktree/vectors.hpp"

namespace ktree {

// Non-owning view over a sparse or dense vector, so one clustering kernel
// serves document vectors and node centres alike.
class VectorRef {
public:
    VectorRef(const SparseVector& v) : sparse_(&v) {}
    VectorRef(const DenseVector& v) : dense_(&v) {}

    bool is_sparse() const { return sparse_ != nullptr; }
    const SparseVector& sparse() const { return *sparse_; }
    const DenseVector& dense() const { return *dense_; }

    std::size_t dim() const { return sparse_ ? sparse_->dim() : dense_->dim(); }

    double distance_to(const DenseVector& centre) const {
        return sparse_ ? squared_distance(*sparse_, centre) : squared_distance(*dense_, centre);
    }

    double dot_with(const DenseVector& centre) const {
        return sparse_ ? dot(*sparse_, centre) : dot(*dense_, centre);
    }

    double norm_squared() const {
        return sparse_ ? ktree::norm_squared(*sparse_) : ktree::norm_squared(*dense_);
    }

    void add_to(DenseVector& acc, double scale = 1.0) const {
        if (sparse_) {
            accumulate(acc, *sparse_, scale);
        } else {
            accumulate(acc, *dense_, scale);
        }
    }

private:
    const SparseVector* sparse_ = nullptr;
    const DenseVector* dense_ = nullptr;
};

struct KMeansResult {
    std::vector<DenseVector> centroids;
    std::vector<int> assignment;
    double objective = 0.0;
    int iterations = 0;
    std::vector<double> objective_history;
};

// Lloyd iterations until the assignment stops changing. Centroids start at k
// distinct points drawn without replacement from a generator seeded by `seed`;
// an emptied cluster is repaired by reassigning the point farthest from its
// centroid (donor keeps at least one member). Equidistant ties go to the
// lowest cluster index, and centroids stay dense throughout.
KMeansResult kmeans(std::span<const VectorRef> points, std::size_t k, std::uint64_t seed);

// Same iteration, but centroids start at the given point indices.
KMeansResult kmeans_from_indices(std::span<const VectorRef> points,
                                 std::span<const std::size_t> initial);

// For each cluster, the index of the assigned point closest to its centroid;
// ties go to the lower point index.
std::vector<std::size_t> select_medoids(std::span<const VectorRef> points,
                                        const KMeansResult& result);

}  // namespace ktree
