#include "ptk/machine_file.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

namespace ptk {

ParseError::ParseError(int line, int col, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg),
      line_(line),
      col_(col) {}

SemanticError::SemanticError(int line, const std::string& msg)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

// ---- MachineFile ----

void MachineFile::claim(const std::string& name, Kind k, int line) {
    if (has(name)) throw SemanticError(line, "duplicate name " + name);
    defs_.push_back({k, name});
}

bool MachineFile::has(const std::string& name) const {
    return transducers_.count(name) || trees_.count(name) || recipes_.count(name);
}

MachineFile::Kind MachineFile::kind(const std::string& name) const {
    if (transducers_.count(name)) return Kind::Twoway;
    if (trees_.count(name)) return Kind::Tree;
    if (recipes_.count(name)) return Kind::Recipe;
    throw SemanticError(0, "unknown machine " + name);
}

const TwoWayTransducer& MachineFile::transducer(const std::string& name) const {
    auto it = transducers_.find(name);
    if (it == transducers_.end()) throw SemanticError(0, "unknown transducer " + name);
    return *it->second;
}

const MachineFile::Tree& MachineFile::tree(const std::string& name) const {
    auto it = trees_.find(name);
    if (it == trees_.end()) throw SemanticError(0, "unknown tree " + name);
    return it->second;
}

const MachineFile::Recipe& MachineFile::recipe(const std::string& name) const {
    auto it = recipes_.find(name);
    if (it == recipes_.end()) throw SemanticError(0, "unknown recipe " + name);
    return it->second;
}

void MachineFile::add_transducer(std::shared_ptr<const TwoWayTransducer> t, int line) {
    claim(t->name(), Kind::Twoway, line);
    transducers_.emplace(t->name(), std::move(t));
}

void MachineFile::add_tree(const std::string& name, Tree t) {
    if (!transducers_.count(t.head)) throw SemanticError(t.line, name + ": head " + t.head + " is not a defined twoway");
    const auto& head = *transducers_.at(t.head);
    for (const auto& c : t.children) {
        const TwoWayTransducer* ct = nullptr;
        if (transducers_.count(c)) {
            ct = transducers_.at(c).get();
        } else if (trees_.count(c)) {
            if (trees_.at(c).variant != t.variant)
                throw SemanticError(t.line, name + ": child " + c + " is a " + to_string(trees_.at(c).variant) + " tree");
            ct = transducers_.at(trees_.at(c).head).get();
        } else {
            throw SemanticError(t.line, name + ": unknown child " + c);
        }
        for (const auto& l : head.alphabet())
            if (ct->symbol_of(l.unmarked()) < 0)
                throw SemanticError(t.line, name + ": child " + c + " cannot read letter " + to_string(l.unmarked()));
    }
    claim(name, Kind::Tree, t.line);
    trees_.emplace(name, std::move(t));
}

void MachineFile::add_recipe(const std::string& name, Recipe r) {
    if (!has(r.source) || kind(r.source) == Kind::Recipe)
        throw SemanticError(r.line, name + ": source " + r.source + " is not an explicit machine");
    if (r.removals < 0) throw SemanticError(r.line, name + ": negative removal count");
    claim(name, Kind::Recipe, r.line);
    recipes_.emplace(name, std::move(r));
}

std::vector<std::string> MachineFile::machine_names() const {
    std::vector<std::string> out;
    for (const auto& [k, n] : defs_) out.push_back(n);
    return out;
}

PebbleMachine MachineFile::machine(const std::string& name, const RemoveOptions& opts) const {
    switch (kind(name)) {
        case Kind::Twoway: return make_machine(Variant::Blind, name, leaf(transducers_.at(name)));
        case Kind::Tree: {
            std::function<std::shared_ptr<const ExplicitNode>(const std::string&)> build =
                [&](const std::string& n) -> std::shared_ptr<const ExplicitNode> {
                if (transducers_.count(n)) return leaf(transducers_.at(n));
                auto it = nodes_.find(n);
                if (it != nodes_.end()) return it->second;
                const Tree& t = trees_.at(n);
                std::vector<std::shared_ptr<const ExplicitNode>> kids;
                for (const auto& c : t.children) kids.push_back(build(c));
                auto node = kids.empty() ? leaf(transducers_.at(t.head)) : inner(transducers_.at(t.head), kids);
                nodes_.emplace(n, node);
                return node;
            };
            return make_machine(trees_.at(name).variant, name, build(name));
        }
        case Kind::Recipe: {
            const Recipe& r = recipes_.at(name);
            PebbleMachine m = machine(r.source, opts);
            for (int i = 0; i < r.removals; ++i) m = remove_layer(m, opts);
            m.name = name;
            return m;
        }
    }
    throw SemanticError(0, "unknown machine " + name);
}

// ---- lexing ----

namespace {

struct Tok {
    std::string text;
    int line = 0;
    int col = 0;
    bool quoted = false;
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

// Whitespace-separated tokens; double-quoted strings are one token; a token
// starting with // ends the line.
std::vector<Tok> line_tokens(const std::string& s, int line, std::size_t from = 0) {
    std::vector<Tok> out;
    std::size_t i = from;
    while (i < s.size()) {
        if (s[i] == ' ' || s[i] == '\t') {
            ++i;
            continue;
        }
        Tok t;
        t.line = line;
        t.col = static_cast<int>(i) + 1;
        if (s[i] == '"') {
            t.quoted = true;
            ++i;
            bool closed = false;
            while (i < s.size()) {
                char c = s[i++];
                if (c == '"') {
                    closed = true;
                    break;
                }
                if (c == '\\') {
                    if (i >= s.size() || (s[i] != '"' && s[i] != '\\'))
                        throw ParseError(line, static_cast<int>(i), "bad escape in output string");
                    c = s[i++];
                }
                t.text += c;
            }
            if (!closed) throw ParseError(line, t.col, "unterminated output string");
            if (i < s.size() && s[i] != ' ' && s[i] != '\t')
                throw ParseError(line, static_cast<int>(i) + 1, "expected whitespace after output string");
        } else {
            if (s.compare(i, 2, "//") == 0) break;
            while (i < s.size() && s[i] != ' ' && s[i] != '\t') t.text += s[i++];
        }
        out.push_back(std::move(t));
    }
    return out;
}

bool is_punct(char c) { return c == '{' || c == '}' || c == '[' || c == ']' || c == ':' || c == ';' || c == ','; }

std::vector<Tok> punct_tokens(const std::string& s, int line, std::size_t from) {
    std::vector<Tok> out;
    std::size_t i = from;
    while (i < s.size()) {
        char c = s[i];
        if (c == ' ' || c == '\t') {
            ++i;
            continue;
        }
        if (s.compare(i, 2, "//") == 0) break;
        Tok t;
        t.line = line;
        t.col = static_cast<int>(i) + 1;
        if (is_punct(c)) {
            t.text = c;
            ++i;
        } else {
            while (i < s.size() && s[i] != ' ' && s[i] != '\t' && !is_punct(s[i]) && s.compare(i, 2, "//") != 0)
                t.text += s[i++];
        }
        out.push_back(std::move(t));
    }
    return out;
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '/' || c == '\'' ||
              c == '-' || c == '+'))
            return false;
    return true;
}

int parse_int(const Tok& t) {
    if (t.text.empty() || t.text.size() > 9) throw ParseError(t.line, t.col, "expected a number, got \"" + t.text + "\"");
    for (char c : t.text)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError(t.line, t.col, "expected a number, got \"" + t.text + "\"");
    return std::stoi(t.text);
}

Guard parse_guard(const Tok& t) {
    const std::string& s = t.text;
    auto comma = s.find(',');
    if (s.size() < 5 || s.front() != '[' || s.back() != ']' || comma == std::string::npos)
        throw ParseError(t.line, t.col, "malformed guard \"" + s + "\"");
    auto side = [&](const std::string& x) {
        if (x == "*") return -1;
        Tok sub = t;
        sub.text = x;
        return parse_int(sub);
    };
    return Guard{side(s.substr(1, comma - 1)), side(s.substr(comma + 1, s.size() - comma - 2))};
}

class Parser {
  public:
    explicit Parser(const std::string& text) : lines_(split_lines(text)) {}

    MachineFile run() {
        while (next_line()) {
            const auto& toks = cur_;
            const std::string& kw = toks[0].text;
            if (kw == "twoway") {
                twoway();
            } else if (kw == "blind" || kw == "last" || kw == "lastlast" || kw == "recipe") {
                block();
            } else {
                throw ParseError(toks[0].line, toks[0].col, "expected a definition, got \"" + kw + "\"");
            }
        }
        return std::move(file_);
    }

  private:
    // Advances to the next nonblank line; false at end of input.
    bool next_line() {
        while (li_ < lines_.size()) {
            cur_ = line_tokens(lines_[li_], static_cast<int>(li_) + 1);
            ++li_;
            if (!cur_.empty()) return true;
        }
        return false;
    }

    const Tok& name_token(const std::vector<Tok>& toks, std::size_t i, const char* what) {
        if (i >= toks.size()) {
            const Tok& last = toks.back();
            throw ParseError(last.line, last.col + static_cast<int>(last.text.size()), std::string("expected ") + what);
        }
        if (!is_identifier(toks[i].text) || toks[i].quoted)
            throw ParseError(toks[i].line, toks[i].col, std::string("expected ") + what + ", got \"" + toks[i].text + "\"");
        return toks[i];
    }

    void twoway() {
        const std::vector<Tok> head = cur_;
        const Tok& name = name_token(head, 1, "a transducer name");
        if (head.size() != 3 || head[2].text != "{")
            throw ParseError(head[0].line, head.size() > 2 ? head[2].col : head.back().col, "expected \"{\" ending the line");
        const int line = head[0].line;
        TwoWayTransducer::Builder b(name.text);
        std::optional<std::vector<Letter>> alphabet;
        bool have_states = false, have_initial = false;
        std::set<std::string> states;
        struct Delta {
            Tok at;
            std::string from, sym, to;
            Dir dir;
            Guard guard;
            std::optional<std::string> out;
        };
        std::vector<Delta> deltas;
        struct Lambda {
            Tok at;
            std::string from, sym;
            Guard guard;
            std::string out;
        };
        std::vector<Lambda> lambdas;
        auto state = [&](const Tok& t) {
            if (!is_identifier(t.text) || t.quoted) throw ParseError(t.line, t.col, "bad state name \"" + t.text + "\"");
            if (have_states && !states.count(t.text)) throw SemanticError(t.line, name.text + ": unknown state " + t.text);
            return t.text;
        };
        for (;;) {
            if (!next_line()) throw ParseError(line, 1, "twoway " + name.text + " is not closed");
            const auto toks = cur_;
            const std::string& k = toks[0].text;
            if (k == "}" && toks.size() == 1) break;
            if (k == "alphabet:") {
                std::vector<Letter> ls;
                for (std::size_t i = 1; i < toks.size(); ++i) {
                    Word w;
                    try {
                        w = parse_word(toks[i].text);
                    } catch (const std::exception&) {
                        throw ParseError(toks[i].line, toks[i].col, "bad letter \"" + toks[i].text + "\"");
                    }
                    if (w.size() != 1 || toks[i].quoted)
                        throw ParseError(toks[i].line, toks[i].col, "bad letter \"" + toks[i].text + "\"");
                    ls.push_back(w[0]);
                }
                alphabet = ls;
                try {
                    b.alphabet(ls);
                } catch (const MachineError& e) {
                    throw SemanticError(toks[0].line, e.what());
                }
            } else if (k == "states:") {
                for (std::size_t i = 1; i < toks.size(); ++i) {
                    std::string s = state(toks[i]);
                    if (!states.insert(s).second) throw SemanticError(toks[i].line, name.text + ": duplicate state " + s);
                    b.state(s);
                }
                have_states = true;
            } else if (k == "initial:") {
                if (toks.size() != 2) throw ParseError(toks[0].line, toks[0].col, "initial: takes one state");
                b.initial(state(toks[1]));
                have_initial = true;
            } else if (k == "final:") {
                for (std::size_t i = 1; i < toks.size(); ++i) b.final_state(state(toks[i]));
            } else if (k == "lookaround" && toks.size() == 2 && toks[1].text == "{") {
                if (!alphabet) throw SemanticError(toks[0].line, name.text + ": lookaround before alphabet");
                b.lookaround(lookaround(*alphabet, name.text));
            } else if (k == "lambda") {
                if (toks.size() != 4 && toks.size() != 5)
                    throw ParseError(toks[0].line, toks[0].col, "expected lambda STATE SYMBOL [GUARD] \"OUTPUT\"");
                Lambda l{toks[0], state(toks[1]), toks[2].text, {}, ""};
                std::size_t i = 3;
                if (toks.size() == 5) l.guard = parse_guard(toks[i++]);
                if (!toks[i].quoted) throw ParseError(toks[i].line, toks[i].col, "expected a quoted output");
                l.out = toks[i].text;
                lambdas.push_back(std::move(l));
            } else {
                // [delta] STATE SYMBOL [GUARD] -> STATE DIR ["OUTPUT"]
                std::size_t i = 0;
                bool only_delta = k == "delta";
                if (only_delta) ++i;
                if (toks.size() < i + 5) throw ParseError(toks[0].line, toks[0].col, "malformed transition");
                Delta d{toks[0], state(toks[i]), toks[i + 1].text, "", Dir::Right, {}, std::nullopt};
                i += 2;
                if (!toks[i].text.empty() && toks[i].text[0] == '[' && !toks[i].quoted) d.guard = parse_guard(toks[i++]);
                if (i >= toks.size() || toks[i].text != "->")
                    throw ParseError(toks[std::min(i, toks.size() - 1)].line, toks[std::min(i, toks.size() - 1)].col,
                                     "expected \"->\"");
                ++i;
                if (i + 1 >= toks.size()) throw ParseError(toks.back().line, toks.back().col, "expected STATE DIR");
                d.to = state(toks[i++]);
                if (toks[i].text == "L")
                    d.dir = Dir::Left;
                else if (toks[i].text == "R")
                    d.dir = Dir::Right;
                else
                    throw ParseError(toks[i].line, toks[i].col, "expected L or R, got \"" + toks[i].text + "\"");
                ++i;
                if (!only_delta) {
                    if (i >= toks.size() || !toks[i].quoted)
                        throw ParseError(toks.back().line, toks.back().col, "expected a quoted output");
                    d.out = toks[i++].text;
                }
                if (i != toks.size()) throw ParseError(toks[i].line, toks[i].col, "unexpected \"" + toks[i].text + "\"");
                deltas.push_back(std::move(d));
            }
        }
        if (!alphabet) throw SemanticError(line, name.text + ": no alphabet");
        if (!have_states) throw SemanticError(line, name.text + ": no states");
        if (!have_initial) throw SemanticError(line, name.text + ": no initial state");
        for (const auto& l : lambdas) {
            Delta* hit = nullptr;
            for (auto& d : deltas)
                if (d.from == l.from && d.sym == l.sym && d.guard == l.guard) hit = &d;
            if (!hit) throw SemanticError(l.at.line, name.text + ": lambda defined where delta is not");
            if (hit->out) throw SemanticError(l.at.line, name.text + ": output defined twice");
            hit->out = l.out;
        }
        for (const auto& d : deltas)
            if (!d.out) throw SemanticError(d.at.line, name.text + ": delta defined where lambda is not");
        try {
            for (const auto& d : deltas) b.on(d.from, d.sym, d.to, d.dir, *d.out, d.guard);
            file_.add_transducer(b.build(), line);
        } catch (const MachineError& e) {
            throw SemanticError(line, e.what());
        } catch (const AlgebraError& e) {
            throw SemanticError(line, e.what());
        }
    }

    MonoidMorphism lookaround(const std::vector<Letter>& alphabet, const std::string& owner) {
        const int line = cur_[0].line;
        int size = -1, identity = -1;
        std::vector<int> table;
        std::map<Letter, int> image;
        for (;;) {
            if (!next_line()) throw ParseError(line, 1, "lookaround of " + owner + " is not closed");
            const auto toks = cur_;
            const std::string& k = toks[0].text;
            if (k == "}" && toks.size() == 1) break;
            if (k == "size:" && toks.size() == 2) {
                size = parse_int(toks[1]);
            } else if (k == "identity:" && toks.size() == 2) {
                identity = parse_int(toks[1]);
            } else if (k == "row:") {
                for (std::size_t i = 1; i < toks.size(); ++i) table.push_back(parse_int(toks[i]));
            } else if (k == "image:" && toks.size() == 3) {
                Word w = parse_word(toks[1].text);
                if (w.size() != 1) throw ParseError(toks[1].line, toks[1].col, "bad letter \"" + toks[1].text + "\"");
                if (!image.emplace(w[0], parse_int(toks[2])).second)
                    throw SemanticError(toks[0].line, owner + ": letter image given twice");
            } else {
                throw ParseError(toks[0].line, toks[0].col, "unexpected \"" + k + "\" in lookaround");
            }
        }
        if (size <= 0 || identity < 0 || identity >= size)
            throw SemanticError(line, owner + ": lookaround needs a size and an identity in range");
        if (static_cast<int>(table.size()) != size * size)
            throw SemanticError(line, owner + ": lookaround table is not size x size");
        for (int x : table)
            if (x >= size) throw SemanticError(line, owner + ": lookaround table entry out of range");
        std::vector<int> imgs;
        for (const auto& l : alphabet) {
            auto it = image.find(l);
            if (it == image.end()) throw SemanticError(line, owner + ": no lookaround image for " + to_string(l));
            if (it->second >= size) throw SemanticError(line, owner + ": lookaround image out of range");
            imgs.push_back(it->second);
        }
        if (image.size() != alphabet.size()) throw SemanticError(line, owner + ": lookaround image of an unknown letter");
        try {
            auto m = std::make_shared<const FiniteMonoid>(size, table, identity);
            if (!m->is_associative()) throw SemanticError(line, owner + ": lookaround table is not associative");
            return MonoidMorphism(alphabet, m, imgs);
        } catch (const AlgebraError& e) {
            throw SemanticError(line, owner + ": " + e.what());
        }
    }

    // blind|last|lastlast|recipe NAME { key: value; ... }
    void block() {
        const Tok kw = cur_[0];
        std::size_t li = li_ - 1;
        std::vector<Tok> toks = punct_tokens(lines_[li], static_cast<int>(li) + 1, kw.col - 1 + kw.text.size());
        while (std::none_of(toks.begin(), toks.end(), [](const Tok& t) { return t.text == "}"; })) {
            if (li_ >= lines_.size()) throw ParseError(kw.line, kw.col, kw.text + " block is not closed");
            auto more = punct_tokens(lines_[li_], static_cast<int>(li_) + 1, 0);
            ++li_;
            toks.insert(toks.end(), more.begin(), more.end());
        }
        std::size_t i = 0;
        auto expect = [&](const std::string& s) {
            if (i >= toks.size() || toks[i].text != s)
                throw ParseError(toks[std::min(i, toks.size() - 1)].line, toks[std::min(i, toks.size() - 1)].col,
                                 "expected \"" + s + "\"");
            ++i;
        };
        auto ident = [&](const char* what) {
            if (i >= toks.size() || !is_identifier(toks[i].text))
                throw ParseError(toks[std::min(i, toks.size() - 1)].line, toks[std::min(i, toks.size() - 1)].col,
                                 std::string("expected ") + what);
            return toks[i++].text;
        };
        std::string name = ident("a machine name");
        expect("{");
        std::map<std::string, std::vector<std::string>> fields;
        while (toks[i].text != "}") {
            Tok key = toks[i];
            std::string k = ident("a field name");
            expect(":");
            if (fields.count(k)) throw SemanticError(key.line, name + ": field " + k + " given twice");
            std::vector<std::string> vals;
            if (toks[i].text == "[") {
                ++i;
                while (toks[i].text != "]") {
                    vals.push_back(ident("a child name"));
                    if (toks[i].text == ",") {
                        ++i;
                        if (toks[i].text == "]") throw ParseError(toks[i].line, toks[i].col, "expected a child name");
                    } else if (toks[i].text != "]") {
                        throw ParseError(toks[i].line, toks[i].col, "expected \",\" or \"]\"");
                    }
                }
                ++i;
            } else {
                vals.push_back(ident("a value"));
            }
            fields[k] = vals;
            if (toks[i].text == ";")
                ++i;
            else if (toks[i].text != "}")
                throw ParseError(toks[i].line, toks[i].col, "expected \";\" or \"}\"");
        }
        ++i;
        if (i != toks.size()) throw ParseError(toks[i].line, toks[i].col, "unexpected text after \"}\"");
        auto single = [&](const std::string& k) {
            auto it = fields.find(k);
            if (it == fields.end() || it->second.size() != 1) throw SemanticError(kw.line, name + ": needs " + k);
            return it->second[0];
        };
        if (kw.text == "recipe") {
            for (const auto& [k, v] : fields)
                if (k != "source" && k != "removals") throw SemanticError(kw.line, name + ": unknown field " + k);
            MachineFile::Recipe r;
            r.source = single("source");
            Tok n{single("removals"), kw.line, kw.col, false};
            r.removals = parse_int(n);
            r.line = kw.line;
            file_.add_recipe(name, r);
            return;
        }
        for (const auto& [k, v] : fields)
            if (k != "head" && k != "children") throw SemanticError(kw.line, name + ": unknown field " + k);
        MachineFile::Tree t;
        t.variant = *parse_variant(kw.text);
        t.head = single("head");
        if (fields.count("children")) t.children = fields["children"];
        t.line = kw.line;
        file_.add_tree(name, t);
    }

    std::vector<std::string> lines_;
    std::size_t li_ = 0;
    std::vector<Tok> cur_;
    MachineFile file_;
};

void print_transducer(std::ostringstream& o, const TwoWayTransducer& t) {
    o << "twoway " << t.name() << " {\n  alphabet:";
    for (const auto& l : t.alphabet()) o << ' ' << to_string(l);
    o << "\n  states:";
    for (const auto& s : t.state_names()) o << ' ' << s;
    o << "\n  initial: " << t.state_names()[t.initial()] << "\n  final:";
    for (int q = 0; q < t.num_states(); ++q)
        if (t.is_final(q)) o << ' ' << t.state_names()[q];
    o << '\n';
    if (const MonoidMorphism* nu = t.lookaround()) {
        const FiniteMonoid& m = nu->target();
        o << "  lookaround {\n    size: " << m.size() << "\n    identity: " << m.identity() << '\n';
        for (int x = 0; x < m.size(); ++x) {
            o << "    row:";
            for (int y = 0; y < m.size(); ++y) o << ' ' << m.mul(x, y);
            o << '\n';
        }
        for (std::size_t i = 0; i < nu->alphabet().size(); ++i)
            o << "    image: " << to_string(nu->alphabet()[i]) << ' ' << nu->image_of_index(static_cast<int>(i)) << '\n';
        o << "  }\n";
    }
    for (const auto& tr : t.transitions()) {
        o << "  " << t.state_names()[tr.from] << ' ' << t.symbol_text(tr.symbol);
        if (tr.guard.left >= 0 || tr.guard.right >= 0) {
            auto side = [](int x) { return x < 0 ? std::string("*") : std::to_string(x); };
            o << " [" << side(tr.guard.left) << ',' << side(tr.guard.right) << ']';
        }
        o << " -> " << t.state_names()[tr.to] << ' ' << (tr.dir == Dir::Left ? 'L' : 'R') << ' ' << quote(tr.output)
          << '\n';
    }
    o << "}\n";
}

void add_explicit(MachineFile& f, const PebbleMachine& m) {
    const ExplicitNode& root = *m.explicit_root();
    auto add_t = [&](const std::shared_ptr<const TwoWayTransducer>& t) {
        if (f.has(t->name())) {
            if (f.kind(t->name()) != MachineFile::Kind::Twoway || !structurally_equal(f.transducer(t->name()), *t))
                throw MachineError("conflicting definitions of " + t->name());
            return;
        }
        f.add_transducer(t);
    };
    if (root.is_leaf() && m.variant == Variant::Blind && m.name == root.name()) {
        add_t(root.transducer_ptr());
        return;
    }
    std::set<std::string> used;
    std::function<std::string(const ExplicitNode&, bool)> rec = [&](const ExplicitNode& n, bool top) -> std::string {
        add_t(n.transducer_ptr());
        if (!top && n.is_leaf()) return n.name();
        MachineFile::Tree t;
        t.variant = m.variant;
        t.head = n.name();
        for (const auto& c : n.children()) t.children.push_back(rec(*c, false));
        std::string name = top ? m.name : m.name + "/" + n.name();
        for (int k = 2; !top && used.count(name); ++k) name = m.name + "/" + n.name() + "." + std::to_string(k);
        used.insert(name);
        if (f.has(name)) throw MachineError("duplicate machine name " + name);
        f.add_tree(name, t);
        return name;
    };
    rec(root, true);
}

}  // namespace

MachineFile parse_machine_file(const std::string& text) { return Parser(text).run(); }

std::string print_file(const MachineFile& f) {
    std::ostringstream o;
    bool first = true;
    for (const auto& [k, name] : f.definitions()) {
        if (!first) o << '\n';
        first = false;
        switch (k) {
            case MachineFile::Kind::Twoway: print_transducer(o, f.transducer(name)); break;
            case MachineFile::Kind::Tree: {
                const auto& t = f.tree(name);
                o << to_string(t.variant) << ' ' << name << " { head: " << t.head << "; children: [";
                for (std::size_t i = 0; i < t.children.size(); ++i) o << (i ? ", " : "") << t.children[i];
                o << "] }\n";
                break;
            }
            case MachineFile::Kind::Recipe: {
                const auto& r = f.recipe(name);
                o << "recipe " << name << " { source: " << r.source << "; removals: " << r.removals << " }\n";
                break;
            }
        }
    }
    return o.str();
}

MachineFile to_file(const std::vector<PebbleMachine>& ms) {
    MachineFile f;
    for (const auto& m : ms) {
        if (m.explicit_root() && m.removals == 0) {
            add_explicit(f, m);
            continue;
        }
        if (!m.source) throw MachineError(m.name + ": constructed machine without a source");
        if (!f.has(m.source->name)) add_explicit(f, *m.source);
        MachineFile::Recipe r;
        r.source = m.source->name;
        r.removals = m.removals;
        f.add_recipe(m.name, r);
    }
    return f;
}

std::string print_machines(const std::vector<PebbleMachine>& ms) { return print_file(to_file(ms)); }
std::string print_machine(const PebbleMachine& m) { return print_machines({m}); }

bool structurally_equal(const TwoWayTransducer& a, const TwoWayTransducer& b) {
    if (a.name() != b.name() || a.alphabet() != b.alphabet() || a.state_names() != b.state_names() ||
        a.initial() != b.initial() || a.transitions().size() != b.transitions().size())
        return false;
    for (int q = 0; q < a.num_states(); ++q)
        if (a.is_final(q) != b.is_final(q)) return false;
    for (std::size_t i = 0; i < a.transitions().size(); ++i) {
        const auto &x = a.transitions()[i], &y = b.transitions()[i];
        if (x.from != y.from || x.symbol != y.symbol || !(x.guard == y.guard) || x.to != y.to || x.dir != y.dir ||
            x.output != y.output)
            return false;
    }
    const MonoidMorphism *p = a.lookaround(), *q = b.lookaround();
    if (!p || !q) return p == q;
    if (p->alphabet() != q->alphabet() || p->target().size() != q->target().size() ||
        p->target().identity() != q->target().identity() || p->target().table() != q->target().table())
        return false;
    for (std::size_t i = 0; i < p->alphabet().size(); ++i)
        if (p->image_of_index(static_cast<int>(i)) != q->image_of_index(static_cast<int>(i))) return false;
    return true;
}

namespace {

bool same_tree(const ExplicitNode& a, const ExplicitNode& b) {
    if (!structurally_equal(a.transducer(), b.transducer()) || a.children().size() != b.children().size()) return false;
    for (std::size_t i = 0; i < a.children().size(); ++i)
        if (!same_tree(*a.children()[i], *b.children()[i])) return false;
    return true;
}

}  // namespace

bool structurally_equal(const PebbleMachine& a, const PebbleMachine& b) {
    if (a.variant != b.variant || a.name != b.name || a.removals != b.removals) return false;
    if (a.removals > 0) return a.source && b.source && structurally_equal(*a.source, *b.source);
    const ExplicitNode *x = a.explicit_root(), *y = b.explicit_root();
    return x && y && same_tree(*x, *y);
}

}  // namespace ptk
