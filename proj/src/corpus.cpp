#include "ktree/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace ktree {

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

struct TokenCursor {
    const char* pos;
    const char* end;

    void skip_space() {
        while (pos != end && (*pos == ' ' || *pos == '\t' || *pos == '\r')) ++pos;
    }
    bool done() {
        skip_space();
        return pos == end;
    }
};

bool next_u64(TokenCursor& c, std::uint64_t& out) {
    if (c.done()) return false;
    auto [ptr, ec] = std::from_chars(c.pos, c.end, out);
    if (ec != std::errc() || (ptr != c.end && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')) {
        return false;
    }
    c.pos = ptr;
    return true;
}

bool next_double(TokenCursor& c, double& out) {
    if (c.done()) return false;
    auto [ptr, ec] = std::from_chars(c.pos, c.end, out);
    if (ec != std::errc() || (ptr != c.end && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')) {
        return false;
    }
    c.pos = ptr;
    return true;
}

}  // namespace

Corpus read_matrix(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) fail_line(1, "missing header");

    TokenCursor header{line.data(), line.data() + line.size()};
    std::uint64_t n_rows = 0, n_cols = 0, declared_nnz = 0;
    if (!next_u64(header, n_rows) || !next_u64(header, n_cols) ||
        !next_u64(header, declared_nnz) || !header.done()) {
        fail_line(1, "malformed header, expected 'n_rows n_cols nnz'");
    }

    Corpus corpus;
    corpus.vocab_size = static_cast<std::size_t>(n_cols);
    corpus.docs.reserve(n_rows);
    std::uint64_t seen_pairs = 0;

    for (std::uint64_t row = 0; row < n_rows; ++row) {
        ++line_no;
        if (!std::getline(in, line)) fail_line(line_no, "unexpected end of input");
        TokenCursor c{line.data(), line.data() + line.size()};

        std::vector<SparseEntry> entries;
        while (!c.done()) {
            std::uint64_t term = 0;
            double weight = 0.0;
            if (!next_u64(c, term)) fail_line(line_no, "expected term index");
            if (!next_double(c, weight)) fail_line(line_no, "expected weight after term index");
            if (term < 1 || term > n_cols) {
                fail_line(line_no, "term index " + std::to_string(term) + " out of range [1, " +
                                       std::to_string(n_cols) + "]");
            }
            ++seen_pairs;
            if (weight != 0.0) {
                entries.push_back({static_cast<std::uint32_t>(term - 1), weight});
            }
        }
        std::sort(entries.begin(), entries.end(),
                  [](const SparseEntry& a, const SparseEntry& b) { return a.term < b.term; });
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (entries[i].term == entries[i - 1].term) {
                fail_line(line_no,
                          "duplicate term " + std::to_string(entries[i].term + 1) + " in row");
            }
        }
        corpus.nnz += entries.size();
        corpus.docs.emplace_back(std::move(entries), corpus.vocab_size);
    }

    while (std::getline(in, line)) {
        ++line_no;
        TokenCursor c{line.data(), line.data() + line.size()};
        if (!c.done()) fail_line(line_no, "unexpected content after last row");
    }

    if (seen_pairs != declared_nnz) {
        throw std::runtime_error("nnz mismatch: header declares " + std::to_string(declared_nnz) +
                                 ", file holds " + std::to_string(seen_pairs));
    }
    return corpus;
}

void write_matrix(std::ostream& out, const Corpus& corpus) {
    out << corpus.n_docs() << ' ' << corpus.vocab_size << ' ' << corpus.nnz << '\n';
    char buf[64];
    for (const auto& doc : corpus.docs) {
        bool first = true;
        for (const auto& e : doc.entries()) {
            std::snprintf(buf, sizeof(buf), "%.6g", e.weight);
            if (!first) out << ' ';
            out << (e.term + 1) << ' ' << buf;
            first = false;
        }
        out << '\n';
    }
}

LabelSet read_labels(std::istream& in, std::optional<std::size_t> expected_docs) {
    LabelSet set;
    std::unordered_map<std::string, int> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) {
            if (expected_docs && set.labels.size() >= *expected_docs) continue;  // trailing blank
            fail_line(line_no, "empty label");
        }
        const std::string token = line.substr(start);
        auto [it, inserted] = ids.emplace(token, static_cast<int>(set.class_names.size()));
        if (inserted) set.class_names.push_back(token);
        set.labels.push_back(it->second);
    }
    set.n_classes = static_cast<int>(set.class_names.size());
    if (expected_docs && set.labels.size() != *expected_docs) {
        throw std::runtime_error("label file has " + std::to_string(set.labels.size()) +
                                 " lines, expected " + std::to_string(*expected_docs));
    }
    return set;
}

Corpus tfidf_weight(Corpus corpus) {
    const std::size_t n_docs = corpus.n_docs();
    if (n_docs == 0) return corpus;

    std::vector<std::uint32_t> df(corpus.vocab_size, 0);
    for (const auto& doc : corpus.docs) {
        for (const auto& e : doc.entries()) ++df[e.term];
    }

    std::uint64_t nnz = 0;
    for (auto& doc : corpus.docs) {
        std::vector<SparseEntry> entries;
        entries.reserve(doc.nnz());
        for (const auto& e : doc.entries()) {
            const double idf = std::log(static_cast<double>(n_docs) / df[e.term]);
            const double w = e.weight * idf;
            if (w != 0.0) entries.push_back({e.term, w});
        }
        nnz += entries.size();
        doc = SparseVector(std::move(entries), corpus.vocab_size);
    }
    corpus.nnz = nnz;
    return corpus;
}

CullResult cull_terms(const Corpus& corpus, std::size_t keep) {
    if (keep < 1) throw std::invalid_argument("keep must be >= 1");

    std::vector<double> rank(corpus.vocab_size, 0.0);
    for (const auto& doc : corpus.docs) {
        for (const auto& e : doc.entries()) rank[e.term] += e.weight;
    }

    std::vector<std::uint32_t> order(corpus.vocab_size);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (rank[a] != rank[b]) return rank[a] > rank[b];
        return a < b;
    });

    const std::size_t kept = std::min(keep, corpus.vocab_size);
    std::vector<std::uint32_t> survivors(order.begin(), order.begin() + kept);
    std::sort(survivors.begin(), survivors.end());

    CullResult result;
    result.term_map.assign(corpus.vocab_size, -1);
    for (std::size_t new_id = 0; new_id < survivors.size(); ++new_id) {
        result.term_map[survivors[new_id]] = static_cast<std::int64_t>(new_id);
    }

    result.corpus.vocab_size = kept;
    result.corpus.docs.reserve(corpus.n_docs());
    for (const auto& doc : corpus.docs) {
        std::vector<SparseEntry> entries;
        for (const auto& e : doc.entries()) {
            const std::int64_t new_id = result.term_map[e.term];
            if (new_id >= 0) entries.push_back({static_cast<std::uint32_t>(new_id), e.weight});
        }
        result.corpus.nnz += entries.size();
        result.corpus.docs.emplace_back(std::move(entries), kept);
    }
    return result;
}

}  // namespace ktree
