#include "ktree/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ktree {

ContingencyTable contingency(const ClusteringSolution& solution, const LabelSet& labels) {
    ContingencyTable t;
    const std::size_t q = static_cast<std::size_t>(labels.n_classes);
    t.counts.assign(solution.clusters.size(), std::vector<std::uint64_t>(q, 0));
    t.cluster_sizes.assign(solution.clusters.size(), 0);
    for (std::size_t j = 0; j < solution.clusters.size(); ++j) {
        for (const std::int64_t doc : solution.clusters[j]) {
            if (doc < 0 || static_cast<std::size_t>(doc) >= labels.labels.size()) {
                throw std::runtime_error("doc " + std::to_string(doc) + " has no label");
            }
            ++t.counts[j][labels.labels[static_cast<std::size_t>(doc)]];
            ++t.cluster_sizes[j];
            ++t.n;
        }
    }
    return t;
}

double micro_purity(const ContingencyTable& t) {
    if (t.n == 0) throw std::invalid_argument("empty contingency table");
    std::uint64_t agree = 0;
    for (const auto& row : t.counts) {
        agree += *std::max_element(row.begin(), row.end());
    }
    return static_cast<double>(agree) / static_cast<double>(t.n);
}

double micro_entropy(const ContingencyTable& t) {
    if (t.n == 0) throw std::invalid_argument("empty contingency table");
    const std::size_t q = t.n_classes();
    if (q <= 1) return 0.0;
    const double norm = std::log2(static_cast<double>(q));
    double total = 0.0;
    for (std::size_t j = 0; j < t.counts.size(); ++j) {
        if (t.cluster_sizes[j] == 0) continue;
        const double size = static_cast<double>(t.cluster_sizes[j]);
        double e = 0.0;
        for (const std::uint64_t c : t.counts[j]) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / size;
            e -= p * std::log2(p);
        }
        total += (size / static_cast<double>(t.n)) * (e / norm);
    }
    return total;
}

}  // namespace ktree
