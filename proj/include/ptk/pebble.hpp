#ifndef PTK_PEBBLE_HPP
#define PTK_PEBBLE_HPP

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ptk/algebra.hpp"
#include "ptk/twoway.hpp"

namespace ptk {

enum class Variant { Blind, Last, LastLast };
std::string to_string(Variant v);
std::optional<Variant> parse_variant(const std::string& s);

// Raised when a constructed machine meets a nonempty production that the
// non-pumpability of its source rules out.
class PumpableViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Sink {
  public:
    virtual ~Sink() = default;
    virtual void put(std::string_view s) = 0;
};

class StringSink : public Sink {
  public:
    void put(std::string_view s) override { out.append(s); }
    std::string out;
};

class LengthSink : public Sink {
  public:
    void put(std::string_view s) override { length += s.size(); }
    std::size_t length = 0;
};

class Node;

// Receives what a node does during its run, in run order.
class Emitter {
  public:
    virtual ~Emitter() = default;
    virtual void terminal(std::string_view s) = 0;
    virtual void call(const Node& child, int pos) = 0;
};

// A transducer inside a pebble tree: explicit, or built by a layer removal.
class Node {
  public:
    virtual ~Node() = default;
    virtual const std::string& name() const = 0;
    virtual int height() const = 0;
    // Runs on the tape content w, whose marks follow the machine variant.
    virtual void execute(const Word& w, Emitter& out) const = 0;
};

class ExplicitNode : public Node {
  public:
    ExplicitNode(std::shared_ptr<const TwoWayTransducer> t, std::vector<std::shared_ptr<const ExplicitNode>> children);

    const std::string& name() const override { return t_->name(); }
    int height() const override { return height_; }
    void execute(const Word& w, Emitter& out) const override;

    const TwoWayTransducer& transducer() const { return *t_; }
    std::shared_ptr<const TwoWayTransducer> transducer_ptr() const { return t_; }
    const std::vector<std::shared_ptr<const ExplicitNode>>& children() const { return children_; }
    bool is_leaf() const { return children_.empty(); }
    // Child indices called by each transition, in output order.
    const std::vector<int>& calls_of(int transition) const { return calls_[transition]; }
    // Calls made by T at position i of u: multiplicity per child.
    std::vector<int> call_counts(const std::vector<std::string>& pieces) const;

  private:
    std::shared_ptr<const TwoWayTransducer> t_;
    std::vector<std::shared_ptr<const ExplicitNode>> children_;
    std::vector<std::vector<int>> calls_;
    int height_;
};

// Splits an inner-node output into child names.
std::vector<std::string> split_calls(const std::string& output);

struct PebbleMachine {
    Variant variant = Variant::Blind;
    std::string name;
    std::shared_ptr<const Node> root;
    std::vector<Letter> inputs;  // unmarked input letters
    // For a machine built by layer removals: the explicit machine it came from.
    std::shared_ptr<const PebbleMachine> source;
    int removals = 0;

    int height() const { return root->height(); }
    // The root as an explicit tree, or nullptr for constructed machines.
    const ExplicitNode* explicit_root() const { return dynamic_cast<const ExplicitNode*>(root.get()); }
};

struct MarkedWord {
    Word base;
    std::optional<int> recent;
    std::optional<int> older;
    Word encode() const;
};

MarkedWord mark(const Word& u, int i);
// The tape a child receives when called at position i (1-based) from tape w.
Word call_tape(Variant v, const Word& w, int i);

void evaluate(const PebbleMachine& m, const Word& u, Sink& sink);
std::string eval(const PebbleMachine& m, const Word& u);
std::string eval_blind(const PebbleMachine& m, const Word& u);
std::string eval_last(const PebbleMachine& m, const Word& u);
std::string eval_lastlast(const PebbleMachine& m, const Word& u);
std::size_t output_length(const PebbleMachine& m, const Word& u);

int height(const PebbleMachine& m);
// Unmarked letters the top-level machine reads.
std::vector<Letter> input_alphabet(const PebbleMachine& m);

// Root-to-leaf chains of an explicit tree.
std::vector<std::vector<const ExplicitNode*>> branches(const ExplicitNode& root);
bool is_balanced(const ExplicitNode& root);

// Node-level totality of an explicit machine, plus top-level evaluation.
ValidationReport validate_machine(const PebbleMachine& m, int max_len = 6);

PebbleMachine make_machine(Variant v, const std::string& name, std::shared_ptr<const ExplicitNode> root);
std::shared_ptr<const ExplicitNode> leaf(std::shared_ptr<const TwoWayTransducer> t);
std::shared_ptr<const ExplicitNode> inner(std::shared_ptr<const TwoWayTransducer> t,
                                          std::vector<std::shared_ptr<const ExplicitNode>> children);

}  // namespace ptk

#endif
