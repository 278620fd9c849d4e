#ifndef PTK_TWOWAY_HPP
#define PTK_TWOWAY_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptk/algebra.hpp"

namespace ptk {

enum class Dir : signed char { Left = -1, Right = 1 };

// Tape symbols of a machine: 0 is the left endmarker, 1 the right one,
// 2 + i the i-th letter of the machine alphabet.
inline constexpr int kLeftEnd = 0;
inline constexpr int kRightEnd = 1;

struct Guard {
    int left = -1;   // required lookaround value of the prefix, -1 for any
    int right = -1;  // required lookaround value of the suffix, -1 for any
    bool operator==(const Guard&) const = default;
    bool overlaps(const Guard& o) const {
        return (left < 0 || o.left < 0 || left == o.left) && (right < 0 || o.right < 0 || right == o.right);
    }
    bool matches(int l, int r) const { return (left < 0 || left == l) && (right < 0 || right == r); }
};

struct Transition {
    int from = 0;
    int symbol = 0;
    Guard guard;
    int to = 0;
    Dir dir = Dir::Right;
    std::string output;
};

class MachineError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class RunError : public std::runtime_error {
  public:
    enum class Kind { Rejected, FellOff, Diverged, UnknownLetter };
    RunError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

class TwoWayTransducer {
  public:
    class Builder;

    const std::string& name() const { return name_; }
    const std::vector<Letter>& alphabet() const { return alphabet_; }
    const std::vector<std::string>& state_names() const { return states_; }
    int num_states() const { return static_cast<int>(states_.size()); }
    int initial() const { return initial_; }
    bool is_final(int q) const { return finals_[q]; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const MonoidMorphism* lookaround() const { return lookaround_ ? &*lookaround_ : nullptr; }
    int num_symbols() const { return static_cast<int>(alphabet_.size()) + 2; }

    // Symbol index of a letter, -1 when not in the alphabet.
    int symbol_of(const Letter& l) const;
    std::string symbol_text(int sym) const;
    int state_index(const std::string& name) const;

    // The transition applicable in state q reading sym under lookaround values (l, r).
    const Transition* find(int q, int sym, int l, int r) const;
    // Every transition leaving (q, sym), in definition order.
    const std::vector<int>& candidates(int q, int sym) const {
        return by_key_[static_cast<std::size_t>(q) * num_symbols() + sym];
    }

  private:
    std::string name_;
    std::vector<Letter> alphabet_;
    std::vector<std::string> states_;
    int initial_ = 0;
    std::vector<bool> finals_;
    std::vector<Transition> transitions_;
    std::optional<MonoidMorphism> lookaround_;
    std::vector<std::vector<int>> by_key_;
};

class TwoWayTransducer::Builder {
  public:
    explicit Builder(std::string name) { t_.name_ = std::move(name); }
    Builder& alphabet(std::vector<Letter> letters);
    Builder& lookaround(MonoidMorphism nu);
    int state(const std::string& name);
    Builder& initial(const std::string& name);
    Builder& final_state(const std::string& name);
    // symbol: "^", "$", or a letter in word encoding.
    Builder& on(const std::string& from, const std::string& symbol, const std::string& to, Dir dir,
                const std::string& output = "", Guard guard = {});
    Builder& on_letter(const std::string& from, const Letter& l, const std::string& to, Dir dir,
                       const std::string& output = "", Guard guard = {});
    std::shared_ptr<const TwoWayTransducer> build();

  private:
    int symbol(const std::string& text) const;
    TwoWayTransducer t_;
    std::vector<Transition> pending_;
    bool has_initial_ = false;
};

struct Config {
    int state;
    int pos;
    bool operator==(const Config&) const = default;
};

struct Run {
    Word word;
    std::vector<Config> steps;
    std::vector<const Transition*> taken;  // transition fired at each step but the last
};

// Lookaround values (prefix, suffix) for every tape position 0..|u|+1.
struct GuardValues {
    std::vector<int> prefix;
    std::vector<int> suffix;
};
GuardValues guard_values(const TwoWayTransducer& t, const Word& u);

Run run(const TwoWayTransducer& t, const Word& u);
std::string output(const TwoWayTransducer& t, const Word& u);
std::vector<int> crossing_sequence(const TwoWayTransducer& t, const Word& u, int i);
std::string production(const TwoWayTransducer& t, const Word& u, int i);
// Individual λ outputs at position i in run order.
std::vector<std::string> production_pieces(const TwoWayTransducer& t, const Word& u, int i);
std::string production_on_context(const TwoWayTransducer& t, const MonoidMorphism& mu, const Context& c);
std::vector<std::string> production_pieces_on_context(const TwoWayTransducer& t, const MonoidMorphism& mu,
                                                      const Context& c);
Word context_word(const MonoidMorphism& mu, const Context& c);

// Transition morphism of a family of machines sharing an input alphabet.
MonoidMorphism transition_morphism(const std::vector<const TwoWayTransducer*>& ts, std::size_t cap = 1u << 12);
// Over a common alphabet; a letter outside a machine's alphabet blocks that machine.
MonoidMorphism transition_morphism(const std::vector<const TwoWayTransducer*>& ts, const std::vector<Letter>& alphabet,
                                   std::size_t cap = 1u << 12);

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> failures;
};
ValidationReport validate(const TwoWayTransducer& t, int max_len = 6);

// A one-way machine echoing every letter of the alphabet.
std::shared_ptr<const TwoWayTransducer> make_copier(const std::string& name, const std::vector<Letter>& alphabet);

}  // namespace ptk

#endif
