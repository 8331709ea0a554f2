#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace ktree {

// A flat partition of document ids. Clusters are non-empty and listed in a
// deterministic order; `assignment` inverts the listing.
struct ClusteringSolution {
    std::vector<std::vector<std::int64_t>> clusters;
    std::unordered_map<std::int64_t, int> assignment;
    int k = 0;

    std::size_t n_docs() const { return assignment.size(); }
};

}  // namespace ktree
