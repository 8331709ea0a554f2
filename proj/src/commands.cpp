#include "ktree/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "ktree/corpus.hpp"
#include "ktree/evaluation.hpp"
#include "ktree/pipeline.hpp"
#include "ktree/vectors.hpp"

namespace ktree {

const char* const kCsvHeader = "k,purity,entropy,seconds,fraction,order,mode,split_k,seed,level,n_docs";

namespace {

using Clock = std::chrono::steady_clock;

Corpus read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_matrix(in);
}

LabelSet read_labels_file(const std::string& path, std::optional<std::size_t> expected) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_labels(in, expected);
}

KTree load_tree(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return KTree::deserialize(in);
}

void write_tree(const KTree& tree, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    tree.serialize(out);
    if (!out) throw std::runtime_error("cannot write " + path);
}

std::string format4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string csv_row(const RunReport& r, std::optional<double> purity,
                    std::optional<double> entropy, std::size_t level, bool no_timing) {
    std::string row;
    row += std::to_string(r.solution.k);
    row += ',';
    if (purity) row += format4(*purity);
    row += ',';
    if (entropy) row += format4(*entropy);
    row += ',';
    if (!no_timing) row += format4(r.wall_time_seconds);
    row += ',';
    row += format4(r.achieved_fraction);
    row += ',';
    row += std::to_string(r.config.order);
    row += ',';
    row += to_string(r.config.mode);
    row += ',';
    row += std::to_string(r.config.split_k);
    row += ',';
    row += std::to_string(r.config.seed);
    row += ',';
    row += std::to_string(level);
    row += ',';
    row += std::to_string(r.n_docs);
    return row;
}

void emit_csv(const std::string& csv_out, std::ostream& fallback, bool append,
              const std::string& row) {
    if (csv_out.empty()) {
        fallback << kCsvHeader << '\n' << row << '\n';
        return;
    }
    bool write_header = true;
    if (append) {
        std::ifstream probe(csv_out);
        write_header = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
    }
    std::ofstream out(csv_out, append ? std::ios::app : std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + csv_out);
    if (write_header) out << kCsvHeader << '\n';
    out << row << '\n';
    if (!out) throw std::runtime_error("cannot write " + csv_out);
}

struct Metrics {
    std::optional<double> purity;
    std::optional<double> entropy;
};

Metrics score(const ClusteringSolution& sol, const std::string& labels_path,
              std::optional<std::size_t> expected_docs) {
    Metrics m;
    if (labels_path.empty()) return m;
    const LabelSet labels = read_labels_file(labels_path, expected_docs);
    const ContingencyTable table = contingency(sol, labels);
    m.purity = micro_purity(table);
    m.entropy = micro_entropy(table);
    return m;
}

int fail(std::ostream& err, const std::string& message) {
    err << "error: " << message << '\n';
    return 1;
}

}  // namespace

std::string storage_report(std::size_t n_docs, std::size_t n_terms, std::uint64_t nnz) {
    const StorageEstimate est = estimate_storage(n_docs, n_terms, nnz);
    char buf[160];
    std::string s;
    std::snprintf(buf, sizeof(buf), "dense: %" PRIu64 " bytes (%s)\n", est.dense_bytes,
                  format_gb(est.dense_bytes).c_str());
    s += buf;
    std::snprintf(buf, sizeof(buf), "sparse: %" PRIu64 " bytes (%s)\n", est.sparse_bytes,
                  format_mb(est.sparse_bytes).c_str());
    s += buf;
    return s;
}

int cmd_prepare(const PrepareOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        Corpus corpus = read_matrix_file(opt.matrix_in);
        corpus = tfidf_weight(std::move(corpus));
        CullResult culled = cull_terms(corpus, opt.keep_terms);

        {
            std::ofstream mat(opt.matrix_out);
            if (!mat) throw std::runtime_error("cannot write " + opt.matrix_out);
            write_matrix(mat, culled.corpus);
            if (!mat) throw std::runtime_error("cannot write " + opt.matrix_out);
        }
        const std::string terms_path = opt.matrix_out + ".terms";
        {
            std::ofstream terms(terms_path);
            if (!terms) throw std::runtime_error("cannot write " + terms_path);
            for (std::size_t old = 0; old < culled.term_map.size(); ++old) {
                if (culled.term_map[old] >= 0) {
                    terms << (culled.term_map[old] + 1) << ' ' << (old + 1) << '\n';
                }
            }
        }

        out << "docs=" << culled.corpus.n_docs() << " terms=" << culled.corpus.vocab_size
            << " nnz=" << culled.corpus.nnz << '\n';
        out << storage_report(culled.corpus.n_docs(), culled.corpus.vocab_size,
                              culled.corpus.nnz);
        out << "wrote " << opt.matrix_out << " and " << terms_path << '\n';
        return 0;
    } catch (const std::exception& e) {
        return fail(err, e.what());
    }
}

int cmd_build(const BuildOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (opt.tree_out.empty()) throw std::runtime_error("build needs --out");
        const Corpus corpus = read_matrix_file(opt.matrix);
        if (corpus.n_docs() == 0) throw std::runtime_error("matrix holds no documents");

        KTreeConfig config{opt.order, opt.mode, opt.split_k, opt.seed};
        config.validate();
        KTree tree(config);
        const auto ids = insertion_ids(corpus.n_docs(), opt.shuffle, opt.seed);
        const auto t0 = Clock::now();
        for (const std::int64_t id : ids) {
            tree.insert(id, corpus.docs[static_cast<std::size_t>(id)]);
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        write_tree(tree, opt.tree_out);

        const TreeStats s = tree.stats();
        char buf[192];
        std::snprintf(buf, sizeof(buf),
                      "built tree: size=%zu depth=%zu nodes=%zu leaves=%zu "
                      "mean_leaf_occupancy=%.2f\nbuild_seconds=%.4f\n",
                      s.size, s.depth, s.node_count, s.leaf_count, s.mean_leaf_occupancy,
                      seconds);
        out << buf << "wrote " << opt.tree_out << '\n';
        return 0;
    } catch (const std::exception& e) {
        return fail(err, e.what());
    }
}

int cmd_cluster(const ClusterOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (opt.matrix.empty() == opt.tree.empty()) {
            throw std::runtime_error("give exactly one of --matrix or --tree");
        }

        RunReport report;
        std::size_t level = opt.level;
        if (!opt.tree.empty()) {
            const KTree tree = load_tree(opt.tree);
            report.config = tree.config();
            report.n_docs = tree.size();
            const auto t0 = Clock::now();
            report.solution = tree.clusters_at_level(level);
            report.wall_time_seconds =
                std::chrono::duration<double>(Clock::now() - t0).count();
            report.tree_stats = tree.stats();
        } else {
            if (level != 1) throw std::runtime_error("--level needs --tree");
            KTreeConfig config{opt.order, opt.mode, opt.split_k, opt.seed};
            const Corpus corpus = read_matrix_file(opt.matrix);
            report = run_ktree(corpus, config, opt.shuffle);
        }

        const Metrics m = score(report.solution, opt.labels,
                                opt.tree.empty() ? std::optional<std::size_t>(report.n_docs)
                                                 : std::nullopt);
        out << to_json(report, m.purity, m.entropy) << '\n';
        emit_csv(opt.csv_out, out, opt.append,
                 csv_row(report, m.purity, m.entropy, level, opt.no_timing));
        return 0;
    } catch (const std::exception& e) {
        return fail(err, e.what());
    }
}

int cmd_sampled(const SampledOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const Corpus corpus = read_matrix_file(opt.matrix);
        KTreeConfig config{opt.order, Mode::classic, opt.split_k, opt.seed};
        const RunReport report = run_sampled(corpus, opt.fraction, config, opt.shuffle);
        const Metrics m = score(report.solution, opt.labels, report.n_docs);
        out << to_json(report, m.purity, m.entropy) << '\n';
        emit_csv(opt.csv_out, out, opt.append,
                 csv_row(report, m.purity, m.entropy, 1, opt.no_timing));
        return 0;
    } catch (const std::exception& e) {
        return fail(err, e.what());
    }
}

int cmd_search(const SearchOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const KTree tree = load_tree(opt.tree);

        if (opt.doc.has_value() == !opt.query_file.empty()) {
            throw std::runtime_error("give exactly one of --doc or --query");
        }
        std::vector<SparseVector> holder;
        const SparseVector* query = nullptr;
        if (opt.doc) {
            query = tree.find(*opt.doc);
            if (!query) throw std::runtime_error("doc " + std::to_string(*opt.doc) +
                                                 " is not in the tree");
        } else {
            Corpus q = read_matrix_file(opt.query_file);
            if (q.n_docs() == 0) throw std::runtime_error("query file holds no rows");
            holder.push_back(std::move(q.docs[0]));
            query = &holder[0];
        }

        const KTree::Node* leaf = tree.nearest_leaf(*query);
        std::vector<std::pair<double, std::int64_t>> hits;
        hits.reserve(leaf->docs.size());
        for (const auto& d : leaf->docs) {
            hits.emplace_back(squared_distance(*query, *d.vector), d.doc_id);
        }
        std::stable_sort(hits.begin(), hits.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::size_t shown = std::min(opt.top, hits.size());
        char buf[96];
        for (std::size_t i = 0; i < shown; ++i) {
            std::snprintf(buf, sizeof(buf), "doc=%" PRId64 " distance=%.6g", hits[i].second,
                          hits[i].first);
            out << buf << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        return fail(err, e.what());
    }
}

int cmd_dump(const DumpOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const KTree tree = load_tree(opt.tree);
        tree.dump(out, opt.depth_limit);
        return 0;
    } catch (const std::exception& e) {
        return fail(err, e.what());
    }
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (opt.labels.empty()) throw std::runtime_error("eval needs --labels");
        const KTree tree = load_tree(opt.tree);

        RunReport report;
        report.config = tree.config();
        report.n_docs = tree.size();
        const auto t0 = Clock::now();
        report.solution = tree.clusters_at_level(opt.level);
        report.wall_time_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        report.tree_stats = tree.stats();

        const Metrics m = score(report.solution, opt.labels, std::nullopt);
        out << to_json(report, m.purity, m.entropy) << '\n';
        emit_csv(opt.csv_out, out, opt.append,
                 csv_row(report, m.purity, m.entropy, opt.level, opt.no_timing));
        return 0;
    } catch (const std::exception& e) {
        return fail(err, e.what());
    }
}

}  // namespace ktree
