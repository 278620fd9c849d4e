#include "ptk/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ptk/corpus.hpp"
#include "ptk/forest.hpp"
#include "ptk/machine_file.hpp"
#include "ptk/minimize.hpp"
#include "ptk/pumpability.hpp"

namespace ptk {

namespace {

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Inconclusive {
    std::string text;
};

MachineFile load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_machine_file(ss.str());
    } catch (const ParseError& e) {
        throw UsageError(path + ": " + e.what());
    }
}

Word input_word(const std::string& text) {
    try {
        return parse_word(text);
    } catch (const std::exception& e) {
        throw UsageError("bad word \"" + text + "\": " + e.what());
    }
}

const PebbleMachine& explicit_of(const PebbleMachine& m) { return m.source ? *m.source : m; }

std::string explicit_form(const PebbleMachine& m) {
    std::ostringstream o;
    if (m.explicit_root()) {
        o << "// explicit form: " << m.name << " is already explicit\n";
        return o.str();
    }
    if (m.variant != Variant::Blind) throw MachineError("explication supports blind machines only");
    PebbleMachine x = explicate(m);
    std::set<const Node*> seen;
    std::function<void(const Node&)> dump = [&](const Node& n) {
        auto t = dynamic_cast<const TableNode*>(&n);
        if (!t || !seen.insert(t).second) return;
        o << "// node " << t->name() << " states " << t->num_states() << " rows " << t->num_transitions() << '\n';
        for (std::size_t c = 0; c < t->children().size(); ++c)
            o << "//   child " << c << ' ' << t->children()[c]->name() << '\n';
        for (const auto& [key, st] : t->table()) {
            o << "//   " << key.first << " [";
            for (std::size_t i = 0; i < key.second.size(); ++i) o << (i ? "," : "") << key.second[i];
            o << "] -> ";
            if (st.halt)
                o << "halt";
            else
                o << st.next << ' ' << (st.move < 0 ? 'L' : st.move > 0 ? 'R' : 'S');
            for (const auto& a : st.out) {
                switch (a.kind) {
                    case Action::Kind::Terminal: o << " emit " << quote(a.text); break;
                    case Action::Kind::Call: o << " call " << a.child; break;
                    case Action::Kind::LeafOutput: o << " leaf " << a.child; break;
                }
            }
            o << '\n';
        }
        for (const auto& c : t->children()) dump(*c);
    };
    dump(*x.root);
    return o.str();
}

int cmd_run(const MachineFile& f, const std::string& name, const std::string& word, const RemoveOptions& ro,
            std::ostream& out) {
    PebbleMachine m = f.machine(name, ro);
    out << eval(m, input_word(word)) << '\n';
    return kExitOk;
}

int cmd_minimize(const MachineFile& f, const std::string& name, const std::string& path, bool explicit_form_flag,
                 const RemoveOptions& ro, std::ostream& out) {
    PebbleMachine m = f.machine(name, ro);
    MinimizeResult r = minimize(m, ro.pump);
    std::string text = print_machine(r.machine);
    if (explicit_form_flag) text += "\n" + explicit_form(r.machine);
    std::ofstream o(path, std::ios::binary);
    if (!o) throw UsageError("cannot write " + path);
    o << text;
    if (r.status == MinimizeStatus::Inconclusive)
        throw Inconclusive{"inconclusive lower " + std::to_string(r.lower) + " upper " + std::to_string(r.upper)};
    out << r.ell << '\n';
    return kExitOk;
}

int cmd_growth(const MachineFile& f, const std::string& name, const RemoveOptions& ro, std::ostream& out) {
    MinimizeResult r = minimize(f.machine(name, ro), ro.pump);
    if (r.status == MinimizeStatus::Inconclusive)
        throw Inconclusive{"inconclusive lower " + std::to_string(r.lower) + " upper " + std::to_string(r.upper)};
    out << r.ell << '\n';
    return kExitOk;
}

int cmd_pumpable(const MachineFile& f, const std::string& name, bool witness, const RemoveOptions& ro,
                 std::ostream& out) {
    PebbleMachine m = f.machine(name, ro);
    auto res = is_pumpable(m, ro.pump);
    if (res.status == SearchStatus::Inconclusive) throw Inconclusive{"inconclusive"};
    out << to_string(res.status) << '\n';
    if (witness && res.witness) out << audit_record(*res.witness, *res.algebra);
    return kExitOk;
}

int cmd_forest(const MachineFile& f, const std::string& name, const std::string& word, const RemoveOptions& ro,
               std::ostream& out) {
    PebbleMachine m = f.machine(name, ro);
    PumpingAlgebra alg = pumping_algebra(explicit_of(m));
    Word u = input_word(word);
    for (const auto& l : u)
        if (!alg.plain.has_letter(l)) throw UsageError("letter " + to_string(l) + " is not an input letter of " + name);
    out << to_brackets(build_forest(alg.plain, u)) << '\n';
    return kExitOk;
}

int cmd_equiv(const MachineFile& f1, const MachineFile& f2, const std::string& n1, const std::string& n2, int max_len,
              const RemoveOptions& ro, std::ostream& out) {
    PebbleMachine a = f1.machine(n1, ro), b = f2.machine(n2, ro);
    const double letters = static_cast<double>(input_alphabet(a).size());
    int len = -1;
    double words = 0;
    while (len < max_len && words + std::pow(letters, len + 1) <= static_cast<double>(ro.pump.budget))
        words += std::pow(letters, ++len);
    if (len < 0) throw Inconclusive{"inconclusive: the budget admits no word"};
    Equivalence e = equivalence_check(a, b, len);
    if (!e.equal) {
        out << "counterexample " << quote(to_string(*e.counterexample)) << '\n'
            << n1 << ' ' << quote(e.left) << '\n'
            << n2 << ' ' << quote(e.right) << '\n';
        return kExitCounterexample;
    }
    if (len < max_len) throw Inconclusive{"inconclusive: equal up to length " + std::to_string(len)};
    out << "equal\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"ptk: pebble transducer toolkit"};
    app.require_subcommand(1);
    std::uint64_t budget = PumpOptions{}.budget;
    app.add_option("--budget", budget, "enumeration cap for searches and equivalence checks")->check(CLI::PositiveNumber);

    std::string file, file2, name, name2, word, output;
    int max_len = 6;
    bool witness = false, explicit_flag = false;

    auto add_common = [&](CLI::App* s) {
        s->add_option("FILE", file, "machine file")->required();
        s->add_option("--machine", name, "machine name")->required();
        s->add_option("--budget", budget, "enumeration cap")->check(CLI::PositiveNumber);
    };
    auto* run = app.add_subcommand("run", "evaluate a machine on a word");
    add_common(run);
    run->add_option("--word", word, "input word")->required();
    auto* mini = app.add_subcommand("minimize", "minimize the recursion height");
    add_common(mini);
    mini->add_option("-o", output, "output machine file")->required();
    mini->add_flag("--explicate", explicit_flag, "append the explicit tables of constructed blind nodes");
    auto* growth = app.add_subcommand("growth", "print the least exponent of the output growth");
    add_common(growth);
    auto* pump = app.add_subcommand("pumpable", "test pumpability");
    add_common(pump);
    pump->add_flag("--witness", witness, "print the witness audit record");
    auto* forest = app.add_subcommand("forest", "print the factorization forest of a word");
    add_common(forest);
    forest->add_option("--word", word, "input word")->required();
    auto* equiv = app.add_subcommand("equiv", "compare two machines on all short words");
    equiv->add_option("FILE1", file, "first machine file")->required();
    equiv->add_option("FILE2", file2, "second machine file")->required();
    equiv->add_option("--machine", name, "machine in FILE1")->required();
    equiv->add_option("--machine2", name2, "machine in FILE2")->required();
    equiv->add_option("--max-len", max_len, "longest word compared")->check(CLI::NonNegativeNumber);
    equiv->add_option("--budget", budget, "enumeration cap")->check(CLI::PositiveNumber);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, x;
        int code = app.exit(e, o, x);
        out << o.str();
        err << x.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    RemoveOptions ro;
    ro.pump.budget = budget;
    try {
        if (*run) return cmd_run(load(file), name, word, ro, out);
        if (*mini) return cmd_minimize(load(file), name, output, explicit_flag, ro, out);
        if (*growth) return cmd_growth(load(file), name, ro, out);
        if (*pump) return cmd_pumpable(load(file), name, witness, ro, out);
        if (*forest) return cmd_forest(load(file), name, word, ro, out);
        if (*equiv) return cmd_equiv(load(file), load(file2), name, name2, max_len, ro, out);
    } catch (const Inconclusive& e) {
        out << e.text << '\n';
        return kExitInconclusive;
    } catch (const InconclusiveError& e) {
        out << "inconclusive\n";
        err << e.what() << '\n';
        return kExitInconclusive;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSemantic;
    }
    return kExitUsage;
}

}  // namespace ptk
