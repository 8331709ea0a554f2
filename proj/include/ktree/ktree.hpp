#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ktree/solution.hpp"
#include "ktree/vectors.hpp"

namespace ktree {

enum class Mode : std::uint8_t { classic = 0, medoid = 1 };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct KTreeConfig {
    std::size_t order = 10;
    Mode mode = Mode::classic;
    std::size_t split_k = 2;
    std::uint64_t seed = 1;

    void validate() const;
};

struct TreeStats {
    std::size_t size = 0;
    std::size_t depth = 0;
    std::size_t node_count = 0;
    std::size_t leaf_count = 0;
    std::vector<std::size_t> nodes_per_level;  // [0] = leaf level, [depth-1] = root
    double mean_leaf_occupancy = 0.0;
};

struct SearchResult {
    std::int64_t doc_id = -1;
    double distance = 0.0;  // squared Euclidean
};

// Height-balanced cluster tree of order m. Leaves hold document vectors;
// internal entries hold a centre, a child, and the child's leaf count. In
// classic mode every centre is the exact mean of its subtree, kept up to date
// incrementally. In medoid mode every centre aliases a stored document vector
// chosen as a cluster exemplar and is not touched by inserts. Full nodes are
// split with a small k-means run; all randomness derives from config.seed.
class KTree {
public:
    struct Node;

    struct LeafEntry {
        std::int64_t doc_id;
        std::shared_ptr<const SparseVector> vector;
    };

    struct InternalEntry {
        DenseVector centre{0};                         // classic mode
        double centre_norm2 = 0.0;                     // cached ||centre||^2
        std::shared_ptr<const SparseVector> exemplar;  // medoid mode
        std::int64_t exemplar_doc = -1;
        std::uint64_t count = 0;
        std::unique_ptr<Node> child;
    };

    struct Node {
        Node* parent = nullptr;
        bool leaf = true;
        std::vector<LeafEntry> docs;        // leaf payload
        std::vector<InternalEntry> entries; // internal payload
    };

    explicit KTree(KTreeConfig config);
    KTree(KTree&&) noexcept = default;
    KTree& operator=(KTree&&) noexcept = default;
    KTree(const KTree&) = delete;
    KTree& operator=(const KTree&) = delete;

    void insert(std::int64_t doc_id, const SparseVector& v);
    void remove(std::int64_t doc_id);

    SearchResult nearest(const SparseVector& q) const;
    const Node* nearest_leaf(const SparseVector& q) const;

    // Level 1 is the partition induced by leaves; higher levels give coarser
    // partitions from the nodes at that height. The top level mirrors the
    // root's entries.
    ClusteringSolution clusters_at_level(std::size_t level) const;

    TreeStats stats() const;

    // Recomputes every structural property from scratch and throws
    // std::logic_error naming the first violation found.
    void verify() const;

    void serialize(std::ostream& out) const;
    static KTree deserialize(std::istream& in);

    void dump(std::ostream& out, int depth_limit = -1) const;

    // Exemplar doc ids referenced one level above the leaves (medoid mode).
    std::vector<std::int64_t> above_leaf_exemplar_docs() const;

    bool contains(std::int64_t doc_id) const { return doc_index_.count(doc_id) > 0; }
    const SparseVector* find(std::int64_t doc_id) const;

    std::size_t size() const { return size_; }
    std::size_t depth() const { return depth_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return size_ == 0; }
    const KTreeConfig& config() const { return config_; }
    const Node* root() const { return root_.get(); }

private:
    double entry_distance(const InternalEntry& e, const SparseVector& q, double q_norm2) const;
    Node* descend_for_insert(const SparseVector& v);
    void split_overflowed(Node* node);
    void split_leaf(Node* node);
    void split_internal(Node* node);
    void make_room_above_root();
    std::size_t entry_index_of(Node* parent, const Node* child) const;
    void repair_exemplar(InternalEntry& e, const SparseVector& removed);
    void collapse_root();
    std::uint64_t next_split_seed();

    KTreeConfig config_;
    std::unique_ptr<Node> root_;
    std::size_t size_ = 0;
    std::size_t depth_ = 0;
    std::size_t dim_ = 0;
    std::uint64_t split_counter_ = 0;
    std::unordered_map<std::int64_t, Node*> doc_index_;
};

}  // namespace ktree
