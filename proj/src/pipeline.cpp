#include "ktree/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "ktree/rng.hpp"

namespace ktree {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double round4(double x) { return std::round(x * 10000.0) / 10000.0; }

void shuffle_ids(std::vector<std::int64_t>& ids, std::uint64_t seed) {
    detail::Rng rng(detail::derive_seed(seed, 0x53485546));
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(ids.size() - i));
        std::swap(ids[i], ids[j]);
    }
}

std::vector<std::int64_t> all_ids(std::size_t n) {
    std::vector<std::int64_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    return ids;
}

void gather_leaves(const KTree::Node* node, std::vector<const KTree::Node*>& out) {
    if (node->leaf) {
        out.push_back(node);
        return;
    }
    for (const auto& e : node->entries) gather_leaves(e.child.get(), out);
}

}  // namespace

std::string to_json(const RunReport& report, std::optional<double> purity,
                    std::optional<double> entropy) {
    nlohmann::json j;
    j["k"] = report.solution.k;
    j["purity"] = purity ? nlohmann::json(round4(*purity)) : nlohmann::json(nullptr);
    j["entropy"] = entropy ? nlohmann::json(round4(*entropy)) : nlohmann::json(nullptr);
    j["seconds"] = round4(report.wall_time_seconds);
    j["n_docs"] = report.n_docs;
    j["fraction"] = round4(report.fraction);
    j["achieved_fraction"] = round4(report.achieved_fraction);
    j["order"] = report.config.order;
    j["mode"] = to_string(report.config.mode);
    j["split_k"] = report.config.split_k;
    j["seed"] = report.config.seed;
    j["depth"] = report.tree_stats.depth;
    return j.dump();
}

std::vector<std::int64_t> insertion_ids(std::size_t n, bool shuffle, std::uint64_t seed) {
    std::vector<std::int64_t> ids = all_ids(n);
    if (shuffle) shuffle_ids(ids, seed);
    return ids;
}

RunReport run_ktree(const Corpus& corpus, const KTreeConfig& config, bool shuffle) {
    if (corpus.n_docs() == 0) throw std::invalid_argument("empty corpus");
    config.validate();

    RunReport report;
    report.config = config;
    report.n_docs = corpus.n_docs();

    const std::vector<std::int64_t> ids = insertion_ids(corpus.n_docs(), shuffle, config.seed);

    KTree tree(config);
    const auto t0 = Clock::now();
    for (const std::int64_t id : ids) {
        tree.insert(id, corpus.docs[static_cast<std::size_t>(id)]);
    }
    report.solution = tree.clusters_at_level(1);
    report.wall_time_seconds = seconds_since(t0);
    report.tree_stats = tree.stats();
    return report;
}

std::vector<std::int64_t> sample_by_medoid(const Corpus& corpus, double fraction,
                                           const KTreeConfig& config, KTree* inspect) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw std::invalid_argument("fraction must lie in (0, 1]");
    }
    if (corpus.n_docs() == 0) throw std::invalid_argument("empty corpus");
    if (fraction == 1.0) return all_ids(corpus.n_docs());

    KTreeConfig sampler = config;
    sampler.mode = Mode::medoid;
    // Leaves average roughly half the order, so an order of 2/fraction puts
    // the above-leaf exemplar count near fraction * n.
    sampler.order = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(2.0 / fraction)));
    sampler.split_k = std::min(config.split_k, sampler.order);
    sampler.validate();

    KTree tree(sampler);
    for (std::size_t i = 0; i < corpus.n_docs(); ++i) {
        tree.insert(static_cast<std::int64_t>(i), corpus.docs[i]);
    }
    std::vector<std::int64_t> ids = tree.above_leaf_exemplar_docs();
    if (ids.empty()) ids = all_ids(corpus.n_docs());
    if (inspect) *inspect = std::move(tree);
    return ids;
}

RunReport run_sampled(const Corpus& corpus, double fraction, const KTreeConfig& config,
                      bool shuffle) {
    if (corpus.n_docs() == 0) throw std::invalid_argument("empty corpus");
    config.validate();
    const std::size_t n = corpus.n_docs();

    RunReport report;
    report.config = config;
    report.n_docs = n;
    report.fraction = fraction;

    KTreeConfig build = config;
    build.mode = Mode::classic;

    const auto t0 = Clock::now();
    std::vector<std::int64_t> sample = sample_by_medoid(corpus, fraction, config);
    report.achieved_fraction = static_cast<double>(sample.size()) / static_cast<double>(n);

    std::vector<char> in_sample(n, 0);
    for (const std::int64_t id : sample) in_sample[static_cast<std::size_t>(id)] = 1;
    if (shuffle) shuffle_ids(sample, config.seed);

    KTree tree(build);
    for (const std::int64_t id : sample) {
        tree.insert(id, corpus.docs[static_cast<std::size_t>(id)]);
    }

    std::vector<const KTree::Node*> leaves;
    gather_leaves(tree.root(), leaves);
    std::unordered_map<const KTree::Node*, int> leaf_cluster;
    ClusteringSolution sol;
    sol.clusters.resize(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        leaf_cluster[leaves[i]] = static_cast<int>(i);
        for (const auto& d : leaves[i]->docs) sol.clusters[i].push_back(d.doc_id);
    }
    for (std::size_t doc = 0; doc < n; ++doc) {
        if (in_sample[doc]) continue;
        const KTree::Node* leaf = tree.nearest_leaf(corpus.docs[doc]);
        sol.clusters[leaf_cluster[leaf]].push_back(static_cast<std::int64_t>(doc));
    }
    for (std::size_t i = 0; i < sol.clusters.size(); ++i) {
        std::sort(sol.clusters[i].begin(), sol.clusters[i].end());
        for (const std::int64_t d : sol.clusters[i]) sol.assignment[d] = static_cast<int>(i);
    }
    sol.k = static_cast<int>(sol.clusters.size());
    report.solution = std::move(sol);
    report.wall_time_seconds = seconds_since(t0);
    report.tree_stats = tree.stats();
    return report;
}

}  // namespace ktree
