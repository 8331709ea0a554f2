#include "ktree/ktree.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ktree/kmeans.hpp"
#include "ktree/rng.hpp"

namespace ktree {

namespace {

constexpr double kMeanTolerance = 1e-6;
constexpr char kMagic[4] = {'K', 'T', 'R', 'E'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

void put_i64(std::ostream& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }

void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

[[noreturn]] void truncated() { throw std::runtime_error("truncated or unreadable stream"); }

std::uint8_t get_u8(std::istream& in) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) truncated();
    return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in) {
    char b[4];
    in.read(b, 4);
    if (in.gcount() != 4) truncated();
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    char b[8];
    in.read(b, 8);
    if (in.gcount() != 8) truncated();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

std::int64_t get_i64(std::istream& in) { return static_cast<std::int64_t>(get_u64(in)); }

float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::classic ? "classic" : "medoid"; }

Mode mode_from_string(const std::string& name) {
    if (name == "classic") return Mode::classic;
    if (name == "medoid") return Mode::medoid;
    throw std::invalid_argument("unknown mode '" + name + "'");
}

void KTreeConfig::validate() const {
    if (order < 2) throw std::invalid_argument("order must be >= 2");
    if (split_k < 2 || split_k > order) {
        throw std::invalid_argument("split_k must lie in [2, order]");
    }
}

KTree::KTree(KTreeConfig config) : config_(config) { config_.validate(); }

double KTree::entry_distance(const InternalEntry& e, const SparseVector& q,
                             double q_norm2) const {
    if (config_.mode == Mode::classic) {
        return q_norm2 - 2.0 * dot(q, e.centre) + e.centre_norm2;
    }
    return squared_distance(q, *e.exemplar);
}

std::uint64_t KTree::next_split_seed() {
    return detail::derive_seed(config_.seed, split_counter_++);
}

std::size_t KTree::entry_index_of(Node* parent, const Node* child) const {
    for (std::size_t i = 0; i < parent->entries.size(); ++i) {
        if (parent->entries[i].child.get() == child) return i;
    }
    throw std::logic_error("child not found in parent");
}

void KTree::insert(std::int64_t doc_id, const SparseVector& v) {
    if (doc_index_.count(doc_id)) {
        throw std::invalid_argument("duplicate doc id " + std::to_string(doc_id));
    }
    if (empty()) {
        dim_ = v.dim();
    } else if (v.dim() != dim_) {
        throw std::invalid_argument("dimension mismatch");
    }
    if (!root_) {
        root_ = std::make_unique<Node>();
        depth_ = 1;
    }

    Node* node = root_.get();
    const double v_norm2 = norm_squared(v);
    while (!node->leaf) {
        std::size_t best = 0;
        double best_d = entry_distance(node->entries[0], v, v_norm2);
        for (std::size_t i = 1; i < node->entries.size(); ++i) {
            const double d = entry_distance(node->entries[i], v, v_norm2);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        InternalEntry& e = node->entries[best];
        ++e.count;
        if (config_.mode == Mode::classic) {
            const double n = static_cast<double>(e.count);
            e.centre.scale((n - 1.0) / n);
            accumulate(e.centre, v, 1.0 / n);
            e.centre_norm2 = norm_squared(e.centre);
        }
        node = e.child.get();
    }

    node->docs.push_back({doc_id, std::make_shared<const SparseVector>(v)});
    doc_index_[doc_id] = node;
    ++size_;
    if (node->docs.size() > config_.order) split_overflowed(node);
}

void KTree::make_room_above_root() {
    auto new_root = std::make_unique<Node>();
    new_root->leaf = false;
    InternalEntry e;
    e.count = size_;
    e.child = std::move(root_);
    e.child->parent = new_root.get();
    new_root->entries.push_back(std::move(e));
    root_ = std::move(new_root);
    ++depth_;
}

void KTree::split_overflowed(Node* node) {
    while (node && (node->leaf ? node->docs.size() : node->entries.size()) > config_.order) {
        if (node == root_.get()) make_room_above_root();
        Node* parent = node->parent;
        if (node->leaf) {
            split_leaf(node);
        } else {
            split_internal(node);
        }
        node = parent;
    }
}

void KTree::split_leaf(Node* node) {
    Node* parent = node->parent;
    const std::size_t pos = entry_index_of(parent, node);
    const std::size_t k = config_.split_k;

    std::vector<VectorRef> points;
    points.reserve(node->docs.size());
    for (const auto& d : node->docs) points.emplace_back(*d.vector);
    auto result = kmeans(points, k, next_split_seed());

    std::vector<std::pair<std::shared_ptr<const SparseVector>, std::int64_t>> chosen;
    if (config_.mode == Mode::medoid) {
        for (const std::size_t m : select_medoids(points, result)) {
            chosen.emplace_back(node->docs[m].vector, node->docs[m].doc_id);
        }
    }

    std::vector<std::unique_ptr<Node>> groups;
    groups.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        auto g = std::make_unique<Node>();
        g->parent = parent;
        groups.push_back(std::move(g));
    }
    for (std::size_t i = 0; i < node->docs.size(); ++i) {
        groups[result.assignment[i]]->docs.push_back(std::move(node->docs[i]));
    }

    std::vector<InternalEntry> fresh(k);
    for (std::size_t c = 0; c < k; ++c) {
        fresh[c].count = groups[c]->docs.size();
        if (config_.mode == Mode::classic) {
            fresh[c].centre = std::move(result.centroids[c]);
            fresh[c].centre_norm2 = norm_squared(fresh[c].centre);
        } else {
            fresh[c].exemplar = chosen[c].first;
            fresh[c].exemplar_doc = chosen[c].second;
        }
        fresh[c].child = std::move(groups[c]);
        for (const auto& d : fresh[c].child->docs) doc_index_[d.doc_id] = fresh[c].child.get();
    }

    parent->entries.erase(parent->entries.begin() + pos);
    parent->entries.insert(parent->entries.begin() + pos,
                           std::make_move_iterator(fresh.begin()),
                           std::make_move_iterator(fresh.end()));
}

void KTree::split_internal(Node* node) {
    Node* parent = node->parent;
    const std::size_t pos = entry_index_of(parent, node);
    const std::size_t k = config_.split_k;

    std::vector<VectorRef> points;
    points.reserve(node->entries.size());
    for (const auto& e : node->entries) {
        points.push_back(config_.mode == Mode::classic ? VectorRef(e.centre)
                                                       : VectorRef(*e.exemplar));
    }
    auto result = kmeans(points, k, next_split_seed());

    std::vector<std::pair<std::shared_ptr<const SparseVector>, std::int64_t>> chosen;
    if (config_.mode == Mode::medoid) {
        for (const std::size_t m : select_medoids(points, result)) {
            chosen.emplace_back(node->entries[m].exemplar, node->entries[m].exemplar_doc);
        }
    }

    std::vector<std::unique_ptr<Node>> groups;
    groups.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        auto g = std::make_unique<Node>();
        g->leaf = false;
        g->parent = parent;
        groups.push_back(std::move(g));
    }
    for (std::size_t i = 0; i < node->entries.size(); ++i) {
        Node* target = groups[result.assignment[i]].get();
        node->entries[i].child->parent = target;
        target->entries.push_back(std::move(node->entries[i]));
    }

    std::vector<InternalEntry> fresh(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::uint64_t total = 0;
        for (const auto& ge : groups[c]->entries) total += ge.count;
        fresh[c].count = total;
        if (config_.mode == Mode::classic) {
            DenseVector acc(dim_);
            for (const auto& ge : groups[c]->entries) {
                accumulate(acc, ge.centre, static_cast<double>(ge.count));
            }
            acc.scale(1.0 / static_cast<double>(total));
            fresh[c].centre = std::move(acc);
            fresh[c].centre_norm2 = norm_squared(fresh[c].centre);
        } else {
            fresh[c].exemplar = chosen[c].first;
            fresh[c].exemplar_doc = chosen[c].second;
        }
        fresh[c].child = std::move(groups[c]);
    }

    parent->entries.erase(parent->entries.begin() + pos);
    parent->entries.insert(parent->entries.begin() + pos,
                           std::make_move_iterator(fresh.begin()),
                           std::make_move_iterator(fresh.end()));
}

namespace {

void nearest_leaf_entry(const KTree::Node* node, const SparseVector& target,
                        const KTree::LeafEntry*& best, double& best_d) {
    if (node->leaf) {
        for (const auto& d : node->docs) {
            const double dist = squared_distance(*d.vector, target);
            if (dist < best_d) {
                best_d = dist;
                best = &d;
            }
        }
        return;
    }
    for (const auto& e : node->entries) nearest_leaf_entry(e.child.get(), target, best, best_d);
}

}  // namespace

void KTree::repair_exemplar(InternalEntry& e, const SparseVector& removed) {
    const LeafEntry* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    nearest_leaf_entry(e.child.get(), removed, best, best_d);
    if (!best) throw std::logic_error("exemplar repair over empty subtree");
    e.exemplar = best->vector;
    e.exemplar_doc = best->doc_id;
}

void KTree::remove(std::int64_t doc_id) {
    const auto it = doc_index_.find(doc_id);
    if (it == doc_index_.end()) {
        throw std::invalid_argument("unknown doc id " + std::to_string(doc_id));
    }
    Node* leaf = it->second;

    std::size_t idx = leaf->docs.size();
    for (std::size_t i = 0; i < leaf->docs.size(); ++i) {
        if (leaf->docs[i].doc_id == doc_id) {
            idx = i;
            break;
        }
    }
    if (idx == leaf->docs.size()) throw std::logic_error("doc index points at wrong leaf");

    const std::shared_ptr<const SparseVector> removed = leaf->docs[idx].vector;
    leaf->docs.erase(leaf->docs.begin() + idx);
    doc_index_.erase(it);
    --size_;

    Node* cur = leaf;
    while (cur->parent) {
        Node* parent = cur->parent;
        const std::size_t pos = entry_index_of(parent, cur);
        const bool emptied = cur->leaf ? cur->docs.empty() : cur->entries.empty();
        if (emptied) {
            parent->entries.erase(parent->entries.begin() + pos);
        } else {
            InternalEntry& e = parent->entries[pos];
            --e.count;
            if (config_.mode == Mode::classic) {
                const double n = static_cast<double>(e.count);
                e.centre.scale((n + 1.0) / n);
                accumulate(e.centre, *removed, -1.0 / n);
                e.centre_norm2 = norm_squared(e.centre);
            } else if (e.exemplar_doc == doc_id) {
                repair_exemplar(e, *removed);
            }
        }
        cur = parent;
    }

    collapse_root();
}

void KTree::collapse_root() {
    while (root_ && !root_->leaf) {
        if (root_->entries.empty()) {
            root_.reset();
            depth_ = 0;
            dim_ = 0;
            return;
        }
        if (root_->entries.size() > 1) break;
        std::unique_ptr<Node> child = std::move(root_->entries[0].child);
        child->parent = nullptr;
        root_ = std::move(child);
        --depth_;
    }
    if (root_ && root_->leaf && root_->docs.empty()) {
        root_.reset();
        depth_ = 0;
        dim_ = 0;
    }
}

const KTree::Node* KTree::nearest_leaf(const SparseVector& q) const {
    if (!root_) throw std::invalid_argument("empty tree");
    if (q.dim() != dim_) throw std::invalid_argument("dimension mismatch");
    const Node* node = root_.get();
    const double q_norm2 = norm_squared(q);
    while (!node->leaf) {
        std::size_t best = 0;
        double best_d = entry_distance(node->entries[0], q, q_norm2);
        for (std::size_t i = 1; i < node->entries.size(); ++i) {
            const double d = entry_distance(node->entries[i], q, q_norm2);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        node = node->entries[best].child.get();
    }
    return node;
}

SearchResult KTree::nearest(const SparseVector& q) const {
    const Node* leaf = nearest_leaf(q);
    SearchResult r;
    r.distance = std::numeric_limits<double>::infinity();
    for (const auto& d : leaf->docs) {
        const double dist = squared_distance(q, *d.vector);
        if (dist < r.distance) {
            r.distance = dist;
            r.doc_id = d.doc_id;
        }
    }
    return r;
}

namespace {

void gather_docs(const KTree::Node* node, std::vector<std::int64_t>& out) {
    if (node->leaf) {
        for (const auto& d : node->docs) out.push_back(d.doc_id);
        return;
    }
    for (const auto& e : node->entries) gather_docs(e.child.get(), out);
}

void collect_at_height(const KTree::Node* node, std::size_t height, std::size_t target,
                       std::vector<const KTree::Node*>& out) {
    if (height == target) {
        out.push_back(node);
        return;
    }
    for (const auto& e : node->entries) collect_at_height(e.child.get(), height - 1, target, out);
}

}  // namespace

ClusteringSolution KTree::clusters_at_level(std::size_t level) const {
    if (level < 1 || level > depth_) throw std::invalid_argument("level out of range");
    const std::size_t target = depth_ == 1 ? 1 : std::min(level, depth_ - 1);

    std::vector<const Node*> nodes;
    collect_at_height(root_.get(), depth_, target, nodes);

    ClusteringSolution sol;
    sol.clusters.reserve(nodes.size());
    for (const Node* n : nodes) {
        std::vector<std::int64_t> docs;
        gather_docs(n, docs);
        std::sort(docs.begin(), docs.end());
        const int cluster = static_cast<int>(sol.clusters.size());
        for (const std::int64_t d : docs) sol.assignment[d] = cluster;
        sol.clusters.push_back(std::move(docs));
    }
    sol.k = static_cast<int>(sol.clusters.size());
    return sol;
}

namespace {

void walk_stats(const KTree::Node* node, std::size_t height, TreeStats& s) {
    ++s.node_count;
    ++s.nodes_per_level[height - 1];
    if (node->leaf) {
        ++s.leaf_count;
        return;
    }
    for (const auto& e : node->entries) walk_stats(e.child.get(), height - 1, s);
}

}  // namespace

TreeStats KTree::stats() const {
    TreeStats s;
    s.size = size_;
    s.depth = depth_;
    if (!root_) return s;
    s.nodes_per_level.assign(depth_, 0);
    walk_stats(root_.get(), depth_, s);
    s.mean_leaf_occupancy =
        s.leaf_count == 0 ? 0.0 : static_cast<double>(size_) / static_cast<double>(s.leaf_count);
    return s;
}

namespace {

struct SubtreeSummary {
    std::uint64_t count = 0;
};

[[noreturn]] void violate(const std::string& what) { throw std::logic_error(what); }

}  // namespace

void KTree::verify() const {
    if (!root_) {
        if (size_ != 0 || depth_ != 0 || !doc_index_.empty()) {
            violate("empty tree with nonzero bookkeeping");
        }
        return;
    }
    if (size_ != doc_index_.size()) violate("size does not match doc index");
    if (root_->parent) violate("root has a parent");

    struct Walker {
        const KTree* tree;
        std::uint64_t docs_seen = 0;

        // Returns subtree leaf count; accumulates the subtree vector sum when
        // sum is non-null; records subtree doc ids when docs is non-null.
        std::uint64_t check(const Node* node, std::size_t height, DenseVector* sum,
                            std::vector<std::int64_t>* docs) {
            if (node->leaf != (height == 1)) violate("leaf depth is not uniform");
            const std::size_t occupancy = node->leaf ? node->docs.size() : node->entries.size();
            if (occupancy < 1 || occupancy > tree->config_.order) {
                violate("node occupancy outside [1, order]");
            }
            if (node->leaf) {
                for (const auto& d : node->docs) {
                    if (!d.vector) violate("leaf entry without vector");
                    if (d.vector->dim() != tree->dim_) violate("leaf vector dimension mismatch");
                    const auto it = tree->doc_index_.find(d.doc_id);
                    if (it == tree->doc_index_.end() || it->second != node) {
                        violate("doc index out of step with leaf contents");
                    }
                    if (sum) accumulate(*sum, *d.vector, 1.0);
                    if (docs) docs->push_back(d.doc_id);
                    ++docs_seen;
                }
                return node->docs.size();
            }
            std::uint64_t total = 0;
            for (const auto& e : node->entries) {
                if (!e.child) violate("internal entry without child");
                if (e.child->parent != node) violate("child parent pointer is wrong");
                std::uint64_t count = 0;
                if (tree->config_.mode == Mode::classic) {
                    if (e.centre.dim() != tree->dim_) violate("centre dimension mismatch");
                    DenseVector child_sum(tree->dim_);
                    count = check(e.child.get(), height - 1, &child_sum, docs);
                    if (count != e.count) violate("entry count is stale");
                    const double inv = 1.0 / static_cast<double>(count);
                    for (std::size_t i = 0; i < tree->dim_; ++i) {
                        const double diff = e.centre[i] - child_sum[i] * inv;
                        if (!(std::abs(diff) <= kMeanTolerance)) {
                            violate("centre drifted from subtree mean");
                        }
                    }
                    if (e.centre_norm2 != norm_squared(e.centre)) {
                        violate("centre norm cache is stale");
                    }
                    if (sum) accumulate(*sum, child_sum, 1.0);
                } else {
                    if (!e.exemplar) violate("medoid entry without exemplar");
                    std::vector<std::int64_t> child_docs;
                    count = check(e.child.get(), height - 1, nullptr, &child_docs);
                    if (count != e.count) violate("entry count is stale");
                    bool member = false;
                    for (const std::int64_t d : child_docs) {
                        if (d == e.exemplar_doc) {
                            member = true;
                            break;
                        }
                    }
                    if (!member) violate("exemplar doc not beneath its entry");
                    const SparseVector* stored = tree->find(e.exemplar_doc);
                    if (!stored || !(*stored == *e.exemplar)) {
                        violate("exemplar does not match a stored vector");
                    }
                    if (docs) {
                        docs->insert(docs->end(), child_docs.begin(), child_docs.end());
                    }
                }
                total += count;
            }
            return total;
        }
    };

    Walker w{this};
    const std::uint64_t total = w.check(root_.get(), depth_, nullptr, nullptr);
    if (total != size_ || w.docs_seen != size_) violate("size does not match leaf contents");
}

namespace {

void write_node(std::ostream& out, const KTree::Node* node, Mode mode, std::size_t dim) {
    put_u8(out, node->leaf ? 0 : 1);
    if (node->leaf) {
        put_u32(out, static_cast<std::uint32_t>(node->docs.size()));
        for (const auto& d : node->docs) {
            put_i64(out, d.doc_id);
            put_u32(out, static_cast<std::uint32_t>(d.vector->nnz()));
            for (const auto& e : d.vector->entries()) {
                put_u32(out, e.term);
                put_f32(out, static_cast<float>(e.weight));
            }
        }
        return;
    }
    put_u32(out, static_cast<std::uint32_t>(node->entries.size()));
    for (const auto& e : node->entries) {
        put_u64(out, e.count);
        if (mode == Mode::classic) {
            for (std::size_t i = 0; i < dim; ++i) put_f32(out, static_cast<float>(e.centre[i]));
        } else {
            put_i64(out, e.exemplar_doc);
        }
        write_node(out, e.child.get(), mode, dim);
    }
}

}  // namespace

void KTree::serialize(std::ostream& out) const {
    out.write(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(config_.order));
    put_u8(out, static_cast<std::uint8_t>(config_.mode));
    put_u32(out, static_cast<std::uint32_t>(config_.split_k));
    put_u64(out, dim_);
    put_u64(out, size_);
    put_u32(out, static_cast<std::uint32_t>(depth_));
    put_u64(out, config_.seed);
    put_u64(out, split_counter_);
    if (root_) write_node(out, root_.get(), config_.mode, dim_);
    if (!out) throw std::runtime_error("write failed");
}

namespace {

std::unique_ptr<KTree::Node> read_node(std::istream& in, Mode mode, std::size_t dim) {
    auto node = std::make_unique<KTree::Node>();
    const std::uint8_t kind = get_u8(in);
    if (kind > 1) throw std::runtime_error("corrupt stream: bad node kind");
    node->leaf = kind == 0;
    const std::uint32_t n_entries = get_u32(in);
    if (node->leaf) {
        node->docs.reserve(n_entries);
        for (std::uint32_t i = 0; i < n_entries; ++i) {
            const std::int64_t doc_id = get_i64(in);
            const std::uint32_t nnz = get_u32(in);
            std::vector<SparseEntry> entries;
            entries.reserve(nnz);
            for (std::uint32_t j = 0; j < nnz; ++j) {
                const std::uint32_t term = get_u32(in);
                const float w = get_f32(in);
                entries.push_back({term, static_cast<double>(w)});
            }
            node->docs.push_back(
                {doc_id, std::make_shared<const SparseVector>(std::move(entries), dim)});
        }
        return node;
    }
    node->entries.reserve(n_entries);
    for (std::uint32_t i = 0; i < n_entries; ++i) {
        KTree::InternalEntry e;
        e.count = get_u64(in);
        if (mode == Mode::classic) {
            std::vector<double> values(dim);
            for (std::size_t d = 0; d < dim; ++d) values[d] = static_cast<double>(get_f32(in));
            e.centre = DenseVector(std::move(values));
            e.centre_norm2 = norm_squared(e.centre);
        } else {
            e.exemplar_doc = get_i64(in);
        }
        e.child = read_node(in, mode, dim);
        e.child->parent = node.get();
        node->entries.push_back(std::move(e));
    }
    return node;
}

void index_leaves(KTree::Node* node, std::unordered_map<std::int64_t, KTree::Node*>& index) {
    if (node->leaf) {
        for (const auto& d : node->docs) {
            if (!index.emplace(d.doc_id, node).second) {
                throw std::runtime_error("corrupt stream: duplicate doc id");
            }
        }
        return;
    }
    for (auto& e : node->entries) index_leaves(e.child.get(), index);
}

void resolve_exemplars(KTree::Node* node,
                       const std::unordered_map<std::int64_t, KTree::Node*>& index) {
    if (node->leaf) return;
    for (auto& e : node->entries) {
        const auto it = index.find(e.exemplar_doc);
        if (it == index.end()) throw std::runtime_error("corrupt stream: exemplar doc missing");
        for (const auto& d : it->second->docs) {
            if (d.doc_id == e.exemplar_doc) {
                e.exemplar = d.vector;
                break;
            }
        }
        resolve_exemplars(e.child.get(), index);
    }
}

}  // namespace

KTree KTree::deserialize(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not a serialized tree (bad magic)");
    }
    const std::uint32_t version = get_u32(in);
    if (version != kFormatVersion) {
        throw std::runtime_error("unsupported format version " + std::to_string(version));
    }
    KTreeConfig config;
    config.order = get_u32(in);
    const std::uint8_t mode = get_u8(in);
    if (mode > 1) throw std::runtime_error("corrupt stream: bad mode");
    config.mode = static_cast<Mode>(mode);
    config.split_k = get_u32(in);
    const std::uint64_t dim = get_u64(in);
    const std::uint64_t size = get_u64(in);
    const std::uint32_t depth = get_u32(in);
    config.seed = get_u64(in);
    const std::uint64_t split_counter = get_u64(in);

    KTree tree(config);
    tree.split_counter_ = split_counter;
    if (size == 0) {
        if (depth != 0) throw std::runtime_error("corrupt stream: empty tree with depth");
        return tree;
    }

    tree.dim_ = static_cast<std::size_t>(dim);
    tree.size_ = static_cast<std::size_t>(size);
    tree.depth_ = depth;
    tree.root_ = read_node(in, config.mode, tree.dim_);

    std::size_t leftmost = 1;
    for (const Node* n = tree.root_.get(); !n->leaf; n = n->entries[0].child.get()) ++leftmost;
    if (leftmost != tree.depth_) throw std::runtime_error("corrupt stream: depth mismatch");

    index_leaves(tree.root_.get(), tree.doc_index_);
    if (tree.doc_index_.size() != tree.size_) {
        throw std::runtime_error("corrupt stream: size mismatch");
    }
    if (config.mode == Mode::medoid) resolve_exemplars(tree.root_.get(), tree.doc_index_);
    return tree;
}

namespace {

void append_top_terms(std::string& line, const SparseVector& v) {
    std::vector<SparseEntry> entries(v.entries().begin(), v.entries().end());
    std::stable_sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
        return a.weight > b.weight;
    });
    char buf[64];
    const std::size_t shown = std::min<std::size_t>(entries.size(), 5);
    line += " centre=[";
    for (std::size_t i = 0; i < shown; ++i) {
        std::snprintf(buf, sizeof(buf), "%s%" PRIu32 ":%.4g", i ? " " : "", entries[i].term,
                      entries[i].weight);
        line += buf;
    }
    line += ']';
}

void append_top_terms(std::string& line, const DenseVector& v) {
    std::vector<SparseEntry> entries;
    for (std::size_t i = 0; i < v.dim(); ++i) {
        if (v[i] != 0.0) entries.push_back({static_cast<std::uint32_t>(i), v[i]});
    }
    SparseVector tmp(std::move(entries), v.dim());
    append_top_terms(line, tmp);
}

struct DumpWalker {
    std::ostream& out;
    Mode mode;
    int depth_limit;
    std::size_t next_id = 0;

    void walk(const KTree::Node* node, const KTree::InternalEntry* from, std::size_t rel_depth) {
        const std::size_t id = next_id++;
        if (depth_limit <= 0 || rel_depth <= static_cast<std::size_t>(depth_limit)) {
            std::string line(rel_depth * 2, ' ');
            char buf[128];
            std::uint64_t count = 0;
            if (from) {
                count = from->count;
            } else if (node->leaf) {
                count = node->docs.size();
            } else {
                for (const auto& e : node->entries) count += e.count;
            }
            std::snprintf(buf, sizeof(buf), "%s id=%zu count=%" PRIu64,
                          node->leaf ? "leaf" : "node", id, count);
            line += buf;
            if (from) {
                if (mode == Mode::classic) {
                    append_top_terms(line, from->centre);
                } else {
                    std::snprintf(buf, sizeof(buf), " exemplar=%" PRId64, from->exemplar_doc);
                    line += buf;
                    append_top_terms(line, *from->exemplar);
                }
            }
            if (node->leaf) {
                line += " docs=[";
                for (std::size_t i = 0; i < node->docs.size(); ++i) {
                    if (i) line += ',';
                    line += std::to_string(node->docs[i].doc_id);
                }
                line += ']';
            }
            out << line << '\n';
        }
        if (node->leaf) return;
        for (const auto& e : node->entries) walk(e.child.get(), &e, rel_depth + 1);
    }
};

}  // namespace

void KTree::dump(std::ostream& out, int depth_limit) const {
    const TreeStats s = stats();
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "ktree order=%zu mode=%s split_k=%zu depth=%zu size=%zu nodes=%zu dim=%zu",
                  config_.order, to_string(config_.mode).c_str(), config_.split_k, depth_, size_,
                  s.node_count, dim_);
    out << buf << '\n';
    if (!root_) return;
    DumpWalker w{out, config_.mode, depth_limit};
    w.walk(root_.get(), nullptr, 0);
}

std::vector<std::int64_t> KTree::above_leaf_exemplar_docs() const {
    if (config_.mode != Mode::medoid) {
        throw std::logic_error("exemplars exist only in medoid mode");
    }
    std::vector<std::int64_t> docs;
    if (depth_ < 2) return docs;
    std::vector<const Node*> nodes;
    collect_at_height(root_.get(), depth_, 2, nodes);
    for (const Node* n : nodes) {
        for (const auto& e : n->entries) docs.push_back(e.exemplar_doc);
    }
    std::sort(docs.begin(), docs.end());
    docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
    return docs;
}

const SparseVector* KTree::find(std::int64_t doc_id) const {
    const auto it = doc_index_.find(doc_id);
    if (it == doc_index_.end()) return nullptr;
    for (const auto& d : it->second->docs) {
        if (d.doc_id == doc_id) return d.vector.get();
    }
    return nullptr;
}

}  // namespace ktree
