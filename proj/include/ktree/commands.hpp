#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ktree/ktree.hpp"

namespace ktree {

struct PrepareOptions {
    std::string matrix_in;
    std::string matrix_out;
    std::size_t keep_terms = 8000;
};

struct BuildOptions {
    std::string matrix;
    std::string tree_out;
    std::size_t order = 10;
    Mode mode = Mode::classic;
    std::size_t split_k = 2;
    std::uint64_t seed = 1;
    bool shuffle = false;
};

struct ClusterOptions {
    std::string matrix;  // build a tree first
    std::string tree;    // or cluster a serialized tree
    std::size_t level = 1;
    std::string labels;
    std::string csv_out;
    bool append = false;
    bool no_timing = false;
    std::size_t order = 10;
    Mode mode = Mode::classic;
    std::size_t split_k = 2;
    std::uint64_t seed = 1;
    bool shuffle = false;
};

struct SampledOptions {
    std::string matrix;
    double fraction = 0.1;
    std::string labels;
    std::string csv_out;
    bool append = false;
    bool no_timing = false;
    std::size_t order = 10;
    std::size_t split_k = 2;
    std::uint64_t seed = 1;
    bool shuffle = false;
};

struct SearchOptions {
    std::string tree;
    std::optional<std::int64_t> doc;
    std::string query_file;
    std::size_t top = 1;
};

struct DumpOptions {
    std::string tree;
    int depth_limit = -1;
};

struct EvalOptions {
    std::string tree;
    std::string labels;
    std::size_t level = 1;
    std::string csv_out;
    bool append = false;
    bool no_timing = false;
};

int cmd_prepare(const PrepareOptions& opt, std::ostream& out, std::ostream& err);
int cmd_build(const BuildOptions& opt, std::ostream& out, std::ostream& err);
int cmd_cluster(const ClusterOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sampled(const SampledOptions& opt, std::ostream& out, std::ostream& err);
int cmd_search(const SearchOptions& opt, std::ostream& out, std::ostream& err);
int cmd_dump(const DumpOptions& opt, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);

// Header row shared by every CSV-emitting command.
extern const char* const kCsvHeader;

// The two storage figures for an n_docs x n_terms matrix with nnz entries,
// as printed by cmd_prepare.
std::string storage_report(std::size_t n_docs, std::size_t n_terms, std::uint64_t nnz);

}  // namespace ktree
