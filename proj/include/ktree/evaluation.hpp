#pragma once

#include <cstdint>
#include <vector>

#include "ktree/corpus.hpp"
#include "ktree/solution.hpp"

namespace ktree {

struct ContingencyTable {
    std::vector<std::vector<std::uint64_t>> counts;  // cluster x class
    std::vector<std::uint64_t> cluster_sizes;
    std::uint64_t n = 0;

    std::size_t n_clusters() const { return counts.size(); }
    std::size_t n_classes() const { return counts.empty() ? 0 : counts[0].size(); }
};

// counts[j][i] = number of docs in cluster j carrying class i. Doc ids index
// into labels; a doc without a label is an error.
ContingencyTable contingency(const ClusteringSolution& solution, const LabelSet& labels);

// Share of documents whose cluster's majority class matches their own:
// sum over clusters of the row maximum, divided by n.
double micro_purity(const ContingencyTable& t);

// Cluster-size-weighted average of per-cluster class entropy, normalized by
// log2(q) so the result lies in [0, 1]; a single class gives 0.
double micro_entropy(const ContingencyTable& t);

}  // namespace ktree
