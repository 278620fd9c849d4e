#ifndef PTK_FOREST_HPP
#define PTK_FOREST_HPP

#include <string>
#include <vector>

#include "ptk/algebra.hpp"
#include "ptk/twoway.hpp"

namespace ptk {

class ForestError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ForestNode {
    int first = 0;  // span [first:last] of 1-based positions
    int last = 0;
    int value = 0;
    int parent = -1;
    int index_in_parent = 0;
    int depth = 0;  // the root has depth 0
    std::vector<int> children;
    bool is_leaf() const { return children.empty(); }
};

using NodePath = std::vector<int>;

// A factorization forest of a word; nodes are stored in preorder, the root is node 0.
class Forest {
  public:
    Forest() = default;
    Forest(Word word, std::vector<ForestNode> nodes);

    const Word& word() const { return word_; }
    int length() const { return static_cast<int>(word_.size()); }
    bool empty() const { return nodes_.empty(); }
    int size() const { return static_cast<int>(nodes_.size()); }
    const ForestNode& node(int t) const { return nodes_[t]; }
    const std::vector<ForestNode>& nodes() const { return nodes_; }
    int root() const { return 0; }
    // Leaf height is 1; the empty forest has height 0.
    int height() const { return height_; }
    int leaf(int pos) const { return leaf_of_[pos]; }

    bool is_iterable(int t) const;
    bool is_idempotent_node(int t) const { return nodes_[t].children.size() >= 3; }
    bool is_ancestor(int a, int t) const;  // a node is its own ancestor
    NodePath path(int t) const;
    int at(const NodePath& p) const;

    std::vector<int> iterable_nodes() const;
    std::vector<int> skeleton(int t) const;
    const std::vector<int>& frontier(int t) const { return frontier_[t]; }
    int origin(int pos) const;
    bool observes(int t, int t2) const;
    bool dependent(int t, int t2) const { return observes(t, t2) || observes(t2, t); }
    // Nodes observed by t, each once.
    std::vector<int> observed_by(int t) const;
    // Positions that pos observes / that observe pos, as sorted lists.
    std::vector<int> ob_up(int pos) const;
    std::vector<int> ob_do(int pos) const;
    bool position_observes(int i, int j) const { return observes(origin(i), origin(j)); }

  private:
    Word word_;
    std::vector<ForestNode> nodes_;
    std::vector<int> leaf_of_;
    std::vector<int> origin_;
    std::vector<std::vector<int>> frontier_;
    int height_ = 0;
};

// An optimal-height forest, deterministic in (mu, u).
Forest build_forest(const MonoidMorphism& mu, const Word& u);
bool verify_forest(const MonoidMorphism& mu, const Forest& f);
// Reasons verify_forest fails, empty for a valid forest.
std::vector<std::string> forest_violations(const MonoidMorphism& mu, const Forest& f);

// Bracketed form: a leaf prints its letter, an inner node "⟨" children "⟩".
std::string to_brackets(const Forest& f);
// Parses a bracketed word; values are computed with mu.
Forest parse_brackets(const MonoidMorphism& mu, const std::string& text);

enum class SliceClass { Up, DownOnly, Neither };
std::string to_string(SliceClass c);

struct Slice {
    int begin = 0;  // configuration indices [begin, end) into the run
    int end = 0;
    SliceClass cls = SliceClass::Neither;
};

// Class of a tape position 0..|u|+1 relative to the pivot position i.
SliceClass slice_class(const Forest& f, int i, int pos);
std::vector<Slice> slicing(const Run& rho, const Forest& f, int i);

}  // namespace ptk

#endif
