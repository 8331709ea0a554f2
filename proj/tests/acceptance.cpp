// Acceptance checks for the clustering library. Each check prints one
// [PASS]/[FAIL] line; the exit code is the number of failures.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "ktree/commands.hpp"
#include "ktree/corpus.hpp"
#include "ktree/evaluation.hpp"
#include "ktree/kmeans.hpp"
#include "ktree/ktree.hpp"
#include "ktree/pipeline.hpp"
#include "ktree/rng.hpp"
#include "ktree/vectors.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace {

std::atomic<bool> g_count_allocations{false};
std::atomic<std::uint64_t> g_allocation_events{0};

void* counted_alloc(std::size_t n) {
    if (g_count_allocations.load(std::memory_order_relaxed)) {
        g_allocation_events.fetch_add(1, std::memory_order_relaxed);
    }
    void* p = std::malloc(n ? n : 1);
    if (p == nullptr) throw std::bad_alloc();
    return p;
}

void* counted_aligned_alloc(std::size_t n, std::size_t align) {
    if (g_count_allocations.load(std::memory_order_relaxed)) {
        g_allocation_events.fetch_add(1, std::memory_order_relaxed);
    }
    const std::size_t padded = ((n ? n : 1) + align - 1) / align * align;
    void* p = std::aligned_alloc(align, padded);
    if (p == nullptr) throw std::bad_alloc();
    return p;
}

}  // namespace

void* operator new(std::size_t n) { return counted_alloc(n); }
void* operator new[](std::size_t n) { return counted_alloc(n); }
void* operator new(std::size_t n, std::align_val_t a) {
    return counted_aligned_alloc(n, static_cast<std::size_t>(a));
}
void* operator new[](std::size_t n, std::align_val_t a) {
    return counted_aligned_alloc(n, static_cast<std::size_t>(a));
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }
void operator delete(void* p, std::align_val_t) noexcept { std::free(p); }
void operator delete[](void* p, std::align_val_t) noexcept { std::free(p); }
void operator delete(void* p, std::size_t, std::align_val_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t, std::align_val_t) noexcept { std::free(p); }

namespace {

using ktree::Corpus;
using ktree::DenseVector;
using ktree::KTree;
using ktree::KTreeConfig;
using ktree::Mode;
using ktree::VectorRef;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_of(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

std::string acceptance_tmp(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ktree_acceptance";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- storage model ---------------------------------------------------------

std::string check_storage_model() {
    const auto published = ktree::estimate_storage(114366, 8000, 10229913);
    if (published.dense_bytes != 3659712000ull) {
        return "dense bytes " + std::to_string(published.dense_bytes);
    }
    if (published.sparse_bytes != 61379478ull) {
        return "sparse bytes " + std::to_string(published.sparse_bytes);
    }
    if (ktree::format_gb(published.dense_bytes) != "3.4 GB") {
        return "dense display " + ktree::format_gb(published.dense_bytes);
    }
    if (ktree::format_mb(published.sparse_bytes) != "58.54 MB") {
        return "sparse display " + ktree::format_mb(published.sparse_bytes);
    }
    const std::string report = ktree::storage_report(114366, 8000, 10229913);
    if (report != "dense: 3659712000 bytes (3.4 GB)\nsparse: 61379478 bytes (58.54 MB)\n") {
        return "unexpected report text";
    }
    const auto small = ktree::estimate_storage(10, 10, 100);
    if (small.dense_bytes != 400 || small.sparse_bytes != 600) {
        return "small case " + std::to_string(small.dense_bytes) + "/" +
               std::to_string(small.sparse_bytes);
    }
    const auto zero = ktree::estimate_storage(0, 0, 0);
    if (zero.dense_bytes != 0 || zero.sparse_bytes != 0) return "zero case not zero";
    return {};
}

// ---- structural invariants under churn --------------------------------------

std::string check_tree_invariants() {
    const std::size_t n = 10000;
    for (const std::size_t order : {std::size_t{3}, std::size_t{10}, std::size_t{50}}) {
        for (const Mode mode : {Mode::classic, Mode::medoid}) {
            const Corpus corpus =
                testsupport::make_random_corpus(n, 64, 6, 100 + order);
            KTree tree({order, mode, 2, 7});
            ktree::detail::Rng rng(order * 31 + (mode == Mode::classic ? 0 : 1));
            std::vector<std::int64_t> live;
            std::size_t removed = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto id = static_cast<std::int64_t>(i);
                tree.insert(id, corpus.docs[i]);
                live.push_back(id);
                if ((i + 1) % 5 == 0) {
                    const std::size_t pick = rng.below(live.size());
                    tree.remove(live[pick]);
                    live[pick] = live.back();
                    live.pop_back();
                    ++removed;
                }
            }
            const std::string tag = "order " + std::to_string(order) + " " + to_string(mode);
            if (removed != n / 5) return tag + ": removed " + std::to_string(removed);
            if (tree.size() != live.size()) {
                return tag + ": size " + std::to_string(tree.size()) + " vs " +
                       std::to_string(live.size());
            }
            tree.verify();
            const testsupport::SubtreeTotals totals =
                testsupport::subtree_totals(tree.root(), tree.dim());
            if (totals.count != tree.size()) {
                return tag + ": leaf walk found " + std::to_string(totals.count) + " docs";
            }
            if (mode == Mode::classic && tree.depth() > 1) {
                testsupport::CentreCheck chk;
                testsupport::check_centres(tree.root(), tree.dim(), chk);
                if (chk.entries_checked == 0) return tag + ": no entries checked";
                if (chk.count_mismatches != 0) {
                    return tag + ": " + std::to_string(chk.count_mismatches) + " count mismatches";
                }
                if (chk.worst_centre_error > 1e-6) {
                    return tag + ": centre error " + format_double(chk.worst_centre_error);
                }
            }
            if (!testsupport::is_partition(tree.clusters_at_level(1), live)) {
                return tag + ": leaf clusters do not partition the survivors";
            }
        }
    }
    return {};
}

// ---- split kernel quality ----------------------------------------------------

std::string check_split_kernel() {
    const std::vector<std::vector<std::vector<double>>> datasets = {
        {{0}, {3}},
        {{0}, {1}, {10}},
        {{0, 0}, {0, 1}, {10, 10}, {10, 11}},
        {{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}},
        {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {4, 4, 4}, {5, 4, 4}, {4, 5, 4}},
        {{0, 0}, {1, 1}, {2, 0}, {8, 8}, {9, 9}, {8, 9}, {4, 4}},
        {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
         {6, 6, 6}, {7, 6, 6}, {6, 7, 6}, {6, 6, 7}},
    };
    const double tol = 1e-9;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        const auto& pts = datasets[d];
        const std::string tag = "dataset " + std::to_string(d);
        std::vector<DenseVector> storage;
        storage.reserve(pts.size());
        for (const auto& p : pts) storage.emplace_back(std::vector<double>(p));
        std::vector<VectorRef> refs;
        refs.reserve(storage.size());
        for (const auto& v : storage) refs.emplace_back(v);

        const double global_opt = testsupport::best_two_partition_objective(pts);
        std::vector<double> converged;
        double best_seen = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = 0; j < pts.size(); ++j) {
                if (i == j) continue;
                const std::array<std::size_t, 2> init{i, j};
                const ktree::KMeansResult res = ktree::kmeans_from_indices(refs, init);
                const auto& hist = res.objective_history;
                if (hist.empty()) return tag + ": empty history";
                for (std::size_t t = 1; t < hist.size(); ++t) {
                    if (hist[t] > hist[t - 1] + tol) {
                        return tag + ": objective rose from " + format_double(hist[t - 1]) +
                               " to " + format_double(hist[t]);
                    }
                }
                if (res.objective > hist.front() + tol) {
                    return tag + ": converged above the initial objective";
                }
                if (res.objective < global_opt - tol) {
                    return tag + ": objective " + format_double(res.objective) +
                           " below the exhaustive optimum " + format_double(global_opt);
                }
                converged.push_back(res.objective);
                best_seen = std::min(best_seen, res.objective);
            }
        }
        for (const std::uint64_t seed : {1, 2, 3}) {
            const ktree::KMeansResult res = ktree::kmeans(refs, 2, seed);
            bool known = false;
            for (const double f : converged) {
                if (std::abs(res.objective - f) <= tol) {
                    known = true;
                    break;
                }
            }
            if (!known) {
                return tag + ": seeded objective " + format_double(res.objective) +
                       " is not a fixed point reached from any index pair";
            }
        }
        if (d == 2) {
            if (std::abs(best_seen - 1.0) > tol) {
                return tag + ": best two-pairs objective " + format_double(best_seen);
            }
            if (std::abs(global_opt - 1.0) > tol) {
                return tag + ": exhaustive two-pairs optimum " + format_double(global_opt);
            }
        }
    }
    return {};
}

// ---- evaluation metrics -------------------------------------------------------

std::string check_metrics() {
    ktree::detail::Rng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 200;
        const int q = 2 + static_cast<int>(rng.below(5));
        const int k = 1 + static_cast<int>(rng.below(10));
        ktree::LabelSet labels;
        labels.n_classes = q;
        for (int c = 0; c < q; ++c) labels.class_names.push_back("c" + std::to_string(c));
        ktree::ClusteringSolution sol;
        sol.k = k;
        sol.clusters.resize(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) {
            labels.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(q))));
            const int c = (i < static_cast<std::size_t>(k))
                              ? static_cast<int>(i)
                              : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
            sol.clusters[static_cast<std::size_t>(c)].push_back(static_cast<std::int64_t>(i));
            sol.assignment[static_cast<std::int64_t>(i)] = c;
        }
        const ktree::ContingencyTable table = ktree::contingency(sol, labels);
        const double p = ktree::micro_purity(table);
        const double e = ktree::micro_entropy(table);
        const double p_ref = testsupport::purity_oracle(sol, labels.labels, q);
        const double e_ref = testsupport::entropy_oracle(sol, labels.labels, q);
        if (std::abs(p - p_ref) > 1e-12) {
            return "trial " + std::to_string(trial) + ": purity " + format_double(p) + " vs " +
                   format_double(p_ref);
        }
        if (std::abs(e - e_ref) > 1e-12) {
            return "trial " + std::to_string(trial) + ": entropy " + format_double(e) + " vs " +
                   format_double(e_ref);
        }
        if (p < 0.0 || p > 1.0 || e < 0.0 || e > 1.0 + 1e-12) {
            return "trial " + std::to_string(trial) + ": metric out of range";
        }
    }

    ktree::LabelSet four;
    four.n_classes = 4;
    four.class_names = {"a", "b", "c", "d"};
    ktree::ClusteringSolution perfect;
    perfect.k = 4;
    perfect.clusters.resize(4);
    ktree::ClusteringSolution lump;
    lump.k = 1;
    lump.clusters.resize(1);
    for (std::int64_t i = 0; i < 200; ++i) {
        four.labels.push_back(static_cast<int>(i % 4));
        perfect.clusters[static_cast<std::size_t>(i % 4)].push_back(i);
        perfect.assignment[i] = static_cast<int>(i % 4);
        lump.clusters[0].push_back(i);
        lump.assignment[i] = 0;
    }
    const auto perfect_table = ktree::contingency(perfect, four);
    if (ktree::micro_purity(perfect_table) != 1.0) return "perfect split purity is not 1";
    if (ktree::micro_entropy(perfect_table) != 0.0) return "perfect split entropy is not 0";
    const auto lump_table = ktree::contingency(lump, four);
    if (ktree::micro_purity(lump_table) != 0.25) return "single cluster purity is not 0.25";
    if (ktree::micro_entropy(lump_table) != 1.0) return "single cluster entropy is not 1";
    return {};
}

// ---- query allocations and medoid build cost -----------------------------------

std::string check_query_path_and_medoid_cost() {
    const auto data = testsupport::make_mixture({5000, 128, 8, 6, 0.1, 11});
    for (const Mode mode : {Mode::classic, Mode::medoid}) {
        KTree tree({10, mode, 2, 3});
        for (std::size_t i = 0; i < data.corpus.n_docs(); ++i) {
            tree.insert(static_cast<std::int64_t>(i), data.corpus.docs[i]);
        }
        if (tree.depth() < 2) return "tree too shallow to exercise the descent";
        double sink = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            sink += tree.nearest(data.corpus.docs[i]).distance;
        }
        g_allocation_events.store(0);
        g_count_allocations.store(true);
        for (std::size_t i = 0; i < 1000; ++i) {
            const ktree::SearchResult r = tree.nearest(data.corpus.docs[i]);
            sink += r.distance + static_cast<double>(r.doc_id);
        }
        g_count_allocations.store(false);
        if (!std::isfinite(sink)) return "query results overflowed";
        const std::uint64_t events = g_allocation_events.load();
        if (events != 0) {
            return to_string(mode) + " mode allocated " + std::to_string(events) +
                   " times across 1000 queries";
        }
    }

    const Corpus big = testsupport::make_mixture({50000, 1024, 16, 8, 0.1, 7}).corpus;
    std::vector<double> classic_times, medoid_times;
    for (std::uint64_t rep = 1; rep <= 3; ++rep) {
        for (const Mode mode : {Mode::classic, Mode::medoid}) {
            const double t = seconds_of([&] {
                KTree tree({10, mode, 2, rep});
                for (std::size_t i = 0; i < big.n_docs(); ++i) {
                    tree.insert(static_cast<std::int64_t>(i), big.docs[i]);
                }
            });
            (mode == Mode::classic ? classic_times : medoid_times).push_back(t);
        }
    }
    const double classic_med = median(classic_times);
    const double medoid_med = median(medoid_times);
    if (medoid_med >= classic_med) {
        return "medoid build " + format_double(medoid_med) + "s vs classic " +
               format_double(classic_med) + "s";
    }
    return {};
}

// ---- clustering quality of the two centre policies ------------------------------

std::string check_centre_policy_quality() {
    std::vector<double> classic_purity, medoid_purity;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = testsupport::make_mixture({3000, 128, 8, 8, 0.3, 1000 + seed});
        for (const Mode mode : {Mode::classic, Mode::medoid}) {
            const ktree::RunReport report =
                ktree::run_ktree(data.corpus, {10, mode, 2, seed});
            const double purity =
                ktree::micro_purity(ktree::contingency(report.solution, data.labels));
            (mode == Mode::classic ? classic_purity : medoid_purity).push_back(purity);
        }
    }
    const double classic_med = median(classic_purity);
    const double medoid_med = median(medoid_purity);
    if (classic_med < medoid_med) {
        return "classic median " + format_double(classic_med) + " below medoid median " +
               format_double(medoid_med);
    }
    return {};
}

// ---- build time scaling -----------------------------------------------------------

std::string check_build_scaling() {
    const std::vector<std::size_t> sizes = {1000, 2000, 4000, 8000, 16000, 32000};
    std::vector<double> log_n, log_t;
    for (const std::size_t n : sizes) {
        const Corpus corpus =
            testsupport::make_mixture({n, 128, 16, 8, 0.1, 7000 + n}).corpus;
        const std::size_t reps = std::max<std::size_t>(1, 32768 / n);
        std::vector<double> times;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            times.push_back(seconds_of([&] {
                KTree tree({10, Mode::classic, 2, rep + 1});
                for (std::size_t i = 0; i < corpus.n_docs(); ++i) {
                    tree.insert(static_cast<std::int64_t>(i), corpus.docs[i]);
                }
            }));
        }
        const double t = median(times);
        if (t <= 0.0) return "unmeasurable build time at n=" + std::to_string(n);
        log_n.push_back(std::log2(static_cast<double>(n)));
        log_t.push_back(std::log2(t));
    }
    const auto k = static_cast<double>(sizes.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        mean_x += log_n[i];
        mean_y += log_t[i];
    }
    mean_x /= k;
    mean_y /= k;
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        cov += (log_n[i] - mean_x) * (log_t[i] - mean_y);
        var += (log_n[i] - mean_x) * (log_n[i] - mean_x);
    }
    const double slope = cov / var;
    if (slope > 1.3) return "log-log slope " + format_double(slope);
    return {};
}

// ---- run-to-run determinism ---------------------------------------------------------

std::string check_determinism() {
    const auto data = testsupport::make_mixture({2000, 64, 8, 6, 0.1, 17});
    const std::string matrix = acceptance_tmp("det.mtx");
    const std::string labels = acceptance_tmp("det.labels");
    {
        std::ofstream out(matrix, std::ios::trunc);
        ktree::write_matrix(out, data.corpus);
        std::ofstream lab(labels, std::ios::trunc);
        for (const int c : data.labels.labels) {
            lab << data.labels.class_names[static_cast<std::size_t>(c)] << '\n';
        }
    }

    std::array<std::string, 2> tree_files;
    for (int run = 0; run < 2; ++run) {
        ktree::BuildOptions opt;
        opt.matrix = matrix;
        opt.tree_out = acceptance_tmp("det_tree_" + std::to_string(run) + ".ktree");
        opt.order = 10;
        opt.seed = 9;
        std::ostringstream out, err;
        if (ktree::cmd_build(opt, out, err) != 0) return "build failed: " + err.str();
        tree_files[static_cast<std::size_t>(run)] = read_file(opt.tree_out);
        if (tree_files[static_cast<std::size_t>(run)].empty()) return "empty tree file";
    }
    if (tree_files[0] != tree_files[1]) return "serialized trees differ between runs";

    std::array<std::string, 2> csv_files;
    for (int run = 0; run < 2; ++run) {
        ktree::ClusterOptions opt;
        opt.matrix = matrix;
        opt.labels = labels;
        opt.csv_out = acceptance_tmp("det_csv_" + std::to_string(run) + ".csv");
        opt.no_timing = true;
        opt.order = 10;
        opt.seed = 9;
        std::ostringstream out, err;
        if (ktree::cmd_cluster(opt, out, err) != 0) return "cluster failed: " + err.str();
        csv_files[static_cast<std::size_t>(run)] = read_file(opt.csv_out);
        if (csv_files[static_cast<std::size_t>(run)].empty()) return "empty csv file";
    }
    if (csv_files[0] != csv_files[1]) return "csv outputs differ between runs";
    if (csv_files[0].find(",,,") != std::string::npos) return "metrics missing from csv";
    return {};
}

bool run_check(const char* name, const std::function<std::string()>& fn, int& failures) {
    std::string failure;
    try {
        failure = fn();
    } catch (const std::exception& e) {
        failure = e.what();
    }
    if (failure.empty()) {
        std::printf("[PASS] %s\n", name);
        return true;
    }
    std::printf("[FAIL] %s (%s)\n", name, failure.c_str());
    ++failures;
    return false;
}

}  // namespace

int main() {
    int failures = 0;
    run_check("storage model arithmetic and display", check_storage_model, failures);
    run_check("tree invariants under mixed insert and remove load", check_tree_invariants,
              failures);
    run_check("split kernel convergence and optimality on enumerable data", check_split_kernel,
              failures);
    run_check("purity and entropy match their definitions", check_metrics, failures);
    run_check("allocation-free queries and cheaper medoid builds",
              check_query_path_and_medoid_cost, failures);
    run_check("mean centres cluster at least as purely as medoid centres",
              check_centre_policy_quality, failures);
    run_check("near-linear build time scaling", check_build_scaling, failures);
    run_check("byte-identical artifacts across repeated runs", check_determinism, failures);
    return failures;
}
