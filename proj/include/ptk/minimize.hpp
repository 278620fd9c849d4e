#ifndef PTK_MINIMIZE_HPP
#define PTK_MINIMIZE_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ptk/forest.hpp"
#include "ptk/pebble.hpp"
#include "ptk/pumpability.hpp"

namespace ptk {

class PreconditionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InconclusiveError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Forests of the inputs seen by one constructed machine.
class ForestCache {
  public:
    explicit ForestCache(std::shared_ptr<const PumpingAlgebra> alg) : alg_(std::move(alg)) {}
    std::shared_ptr<const Forest> get(const Word& u) const;
    const PumpingAlgebra& algebra() const { return *alg_; }

  private:
    std::shared_ptr<const PumpingAlgebra> alg_;
    mutable std::mutex mu_;
    mutable std::map<Word, std::shared_ptr<const Forest>> forests_;
};

// One output item of a program step.
struct Action {
    enum class Kind { Terminal, Call, LeafOutput };
    Kind kind = Kind::Terminal;
    std::string text;
    int child = 0;  // node child for Call, leaf index for LeafOutput
    bool operator==(const Action&) const = default;
};

struct Step {
    bool reject = false;
    bool halt = false;
    int next = 0;
    int move = 0;  // -1, 0 or 1
    std::vector<Action> out;
    bool operator==(const Step&) const = default;
};

// A view is what a program sees at one tape position: the symbol and the
// lookaround data, flattened into integers.
using View = std::vector<int>;

// A bounded-memory control program over the forest-annotated input.
class Program {
  public:
    virtual ~Program() = default;
    virtual std::string kind() const = 0;
    virtual int initial() const = 0;
    virtual Step step(int desc, const View& view) const = 0;
    // Views of positions 0..|w|+1.
    virtual std::vector<View> views(const Word& w) const = 0;
    // Every view the program can meet, for explication.
    virtual std::vector<View> all_views() const = 0;
    // Lookaround-resolved output of a called leaf; checks the bounded-output claim.
    virtual std::string leaf_output(int leaf, const Word& w) const;
    virtual std::string describe(int desc) const = 0;
    virtual int num_descriptors() const = 0;
};

// Interprets a program; its children are the nodes named by Call actions.
class ProgramNode : public Node {
  public:
    ProgramNode(std::string name, std::shared_ptr<const Program> prog, std::vector<std::shared_ptr<const Node>> children);
    const std::string& name() const override { return name_; }
    int height() const override { return height_; }
    void execute(const Word& w, Emitter& out) const override;

    const Program& program() const { return *prog_; }
    std::shared_ptr<const Program> program_ptr() const { return prog_; }
    const std::vector<std::shared_ptr<const Node>>& children() const { return children_; }

  private:
    std::string name_;
    std::shared_ptr<const Program> prog_;
    std::vector<std::shared_ptr<const Node>> children_;
    int height_;
};

// The explicated form: a finite table from (descriptor, view) to steps. The
// program is kept only for computing views and leaf lookaround outputs.
class TableNode : public Node {
  public:
    TableNode(std::string name, std::shared_ptr<const Program> views, std::vector<std::shared_ptr<const Node>> children,
              std::map<std::pair<int, View>, Step> table, int states, int initial);
    const std::string& name() const override { return name_; }
    int height() const override { return height_; }
    void execute(const Word& w, Emitter& out) const override;

    int num_states() const { return states_; }
    std::size_t num_transitions() const { return table_.size(); }
    const std::map<std::pair<int, View>, Step>& table() const { return table_; }
    const std::vector<std::shared_ptr<const Node>>& children() const { return children_; }

  private:
    std::string name_;
    std::shared_ptr<const Program> prog_;
    std::vector<std::shared_ptr<const Node>> children_;
    std::map<std::pair<int, View>, Step> table_;
    int states_;
    int initial_;
    int height_;
};

// kind=normal: the same control as an explicit node.
std::shared_ptr<const ProgramNode> normal_program(std::shared_ptr<const ExplicitNode> n);

struct ExplicateOptions {
    std::size_t max_rows = 1u << 22;
};
std::shared_ptr<const TableNode> explicate(const ProgramNode& p, const ExplicateOptions& opts = {});
// Replaces every program node of a constructed blind machine.
PebbleMachine explicate(const PebbleMachine& m, const ExplicateOptions& opts = {});

struct RemoveOptions {
    PumpOptions pump;
    // Skip the pumpability test; the construction may then trip its runtime assertions.
    bool check_precondition = true;
};

PebbleMachine remove_layer_blind(const PebbleMachine& u, const RemoveOptions& opts = {});
PebbleMachine remove_layer_last(const PebbleMachine& u, const RemoveOptions& opts = {});
PebbleMachine remove_layer(const PebbleMachine& u, const RemoveOptions& opts = {});

enum class MinimizeStatus { Done, Inconclusive };

struct MinimizeResult {
    MinimizeStatus status = MinimizeStatus::Done;
    PebbleMachine machine;
    int ell = 0;    // least exponent when Done
    int lower = 0;  // certified lower bound
    int upper = 0;  // height of the returned machine
    std::vector<std::string> log;
};

MinimizeResult minimize(const PebbleMachine& m, const PumpOptions& opts = {});

struct Equivalence {
    bool equal = true;
    std::optional<Word> counterexample;
    std::string left, right;
    std::size_t words = 0;
};

// All words up to max_len in shortlex order; the first difference is reported.
Equivalence equivalence_check(const PebbleMachine& a, const PebbleMachine& b, int max_len);

// Largest number of slices met per forest height, across all last removals.
std::map<int, int> slice_statistics();

}  // namespace ptk

#endif
