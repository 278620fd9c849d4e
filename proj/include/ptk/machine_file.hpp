#ifndef PTK_MACHINE_FILE_HPP
#define PTK_MACHINE_FILE_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ptk/minimize.hpp"
#include "ptk/pebble.hpp"

namespace ptk {

class ParseError : public std::runtime_error {
  public:
    ParseError(int line, int col, const std::string& msg);
    int line() const { return line_; }
    int col() const { return col_; }

  private:
    int line_, col_;
};

class SemanticError : public std::runtime_error {
  public:
    SemanticError(int line, const std::string& msg);
    int line() const { return line_; }

  private:
    int line_;
};

// The definitions of one machine file, in file order.
class MachineFile {
  public:
    struct Tree {
        Variant variant = Variant::Blind;
        std::string head;
        std::vector<std::string> children;  // twoway names (leaves) or tree names
        int line = 0;
    };
    struct Recipe {
        std::string source;
        int removals = 0;
        int line = 0;
    };
    enum class Kind { Twoway, Tree, Recipe };

    const std::vector<std::pair<Kind, std::string>>& definitions() const { return defs_; }
    bool has(const std::string& name) const;
    Kind kind(const std::string& name) const;
    const TwoWayTransducer& transducer(const std::string& name) const;
    const Tree& tree(const std::string& name) const;
    const Recipe& recipe(const std::string& name) const;

    // A twoway definition is a blind machine of height 1; a recipe re-runs its removals.
    PebbleMachine machine(const std::string& name, const RemoveOptions& opts = {}) const;
    // Names that can be selected with --machine, in file order.
    std::vector<std::string> machine_names() const;

    void add_transducer(std::shared_ptr<const TwoWayTransducer> t, int line = 0);
    void add_tree(const std::string& name, Tree t);
    void add_recipe(const std::string& name, Recipe r);

  private:
    void claim(const std::string& name, Kind k, int line);
    std::vector<std::pair<Kind, std::string>> defs_;
    std::map<std::string, std::shared_ptr<const TwoWayTransducer>> transducers_;
    std::map<std::string, Tree> trees_;
    std::map<std::string, Recipe> recipes_;
    mutable std::map<std::string, std::shared_ptr<const ExplicitNode>> nodes_;
};

MachineFile parse_machine_file(const std::string& text);
// Canonical text of a file.
std::string print_file(const MachineFile& f);
// One file holding every machine; a shared definition is written once.
MachineFile to_file(const std::vector<PebbleMachine>& ms);
std::string print_machines(const std::vector<PebbleMachine>& ms);
std::string print_machine(const PebbleMachine& m);

bool structurally_equal(const TwoWayTransducer& a, const TwoWayTransducer& b);
bool structurally_equal(const PebbleMachine& a, const PebbleMachine& b);

std::string quote(const std::string& s);

}  // namespace ptk

#endif
