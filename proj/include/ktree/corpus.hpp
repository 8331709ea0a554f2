#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ktree/vectors.hpp"

namespace ktree {

// Term-document matrix; doc_id is the position in docs.
struct Corpus {
    std::vector<SparseVector> docs;
    std::size_t vocab_size = 0;
    std::uint64_t nnz = 0;

    std::size_t n_docs() const { return docs.size(); }
};

// One class per document; class ids are dense in [0, n_classes).
struct LabelSet {
    std::vector<int> labels;
    int n_classes = 0;
    std::vector<std::string> class_names;
};

// Reads a CLUTO-style sparse matrix: header "n_rows n_cols nnz", then one
// line per document of space-separated `term_index weight` pairs with 1-based
// term indices. Internal term ids are 0-based and sorted. Throws
// std::runtime_error naming the offending line.
Corpus read_matrix(std::istream& in);

// Writes the same format with 6 significant digits per weight.
void write_matrix(std::ostream& out, const Corpus& corpus);

// One class token per line; line i labels doc i. Tokens are mapped to dense
// ids in first-appearance order. If expected_docs is set, the line count must
// match it exactly.
LabelSet read_labels(std::istream& in, std::optional<std::size_t> expected_docs);

// Replaces raw term frequencies with tf * ln(N / df). Entries whose weight
// becomes zero (df == N) are dropped and nnz is updated.
Corpus tfidf_weight(Corpus corpus);

struct CullResult {
    Corpus corpus;
    std::vector<std::int64_t> term_map;  // old id -> new id, -1 if dropped
};

// Ranks terms by summed weight across documents, keeps the `keep` highest
// (ties to the lower term id), and re-indexes survivors densely preserving
// their original relative order. Documents left with no entries stay in the
// corpus as empty vectors.
CullResult cull_terms(const Corpus& corpus, std::size_t keep);

}  // namespace ktree
