#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ktree/corpus.hpp"
#include "ktree/ktree.hpp"
#include "ktree/solution.hpp"

namespace ktree {

struct RunReport {
    ClusteringSolution solution;
    double wall_time_seconds = 0.0;
    TreeStats tree_stats;
    KTreeConfig config;
    std::size_t n_docs = 0;
    double fraction = 1.0;           // requested sample share
    double achieved_fraction = 1.0;  // sample size / corpus size
};

// Single-line JSON record with k, the metrics (4 decimals, null when no
// labels were given), timing, and a configuration echo.
std::string to_json(const RunReport& report, std::optional<double> purity,
                    std::optional<double> entropy);

// Doc ids 0..n-1 in insertion order, shuffled from the run seed when asked.
std::vector<std::int64_t> insertion_ids(std::size_t n, bool shuffle, std::uint64_t seed);

// Inserts every document in corpus order (doc id = row index) and reports the
// leaf-level clustering. Timing covers build and extraction, not ingestion.
RunReport run_ktree(const Corpus& corpus, const KTreeConfig& config, bool shuffle = false);

// Builds a medoid tree whose order is steered so the above-leaf level holds
// roughly fraction * n exemplars, and returns those exemplars' doc ids. The
// achieved fraction is whatever the tree produced. When inspect is given the
// sampling tree is moved into it.
std::vector<std::int64_t> sample_by_medoid(const Corpus& corpus, double fraction,
                                           const KTreeConfig& config, KTree* inspect = nullptr);

// Samples by medoid, builds a tree over the sample alone, then assigns every
// left-out document to the leaf cluster its nearest-neighbour search reaches.
RunReport run_sampled(const Corpus& corpus, double fraction, const KTreeConfig& config,
                      bool shuffle = false);

}  // namespace ktree
