#include "ptk/corpus.hpp"

#include <functional>
#include <map>

namespace ptk::corpus {

namespace {

using Builder = TwoWayTransducer::Builder;
using Tptr = std::shared_ptr<const TwoWayTransducer>;
using Nptr = std::shared_ptr<const ExplicitNode>;

std::vector<Letter> plain(const std::string& letters) { return plain_word(letters); }

// Each letter with no mark and with a recent mark.
std::vector<Letter> with_recent(const std::string& letters) {
    std::vector<Letter> out;
    for (char c : letters) {
        out.push_back({c, kNoMark});
        out.push_back({c, kRecent});
    }
    return out;
}

std::vector<Letter> with_both(const std::string& letters) {
    std::vector<Letter> out;
    for (char c : letters)
        for (int m = 0; m < 4; ++m)
            out.push_back({c, static_cast<std::uint8_t>(m)});
    return out;
}

// One left-to-right sweep emitting f(letter) at every letter.
Tptr one_way(const std::string& name, const std::vector<Letter>& alpha, const std::function<std::string(const Letter&)>& f) {
    Builder b(name);
    b.alphabet(alpha).initial("s").final_state("s");
    b.on("s", "^", "s", Dir::Right);
    for (const auto& l : alpha) b.on_letter("s", l, "s", Dir::Right, f(l));
    return b.build();
}

Tptr call_everywhere(const std::string& name, const std::vector<Letter>& alpha, const std::string& callee) {
    return one_way(name, alpha, [&](const Letter&) { return callee; });
}

// Calls callee once, at position 1.
Tptr call_first(const std::string& name, const std::vector<Letter>& alpha, const std::string& callee) {
    Builder b(name);
    b.alphabet(alpha).initial("s0").final_state("s1").final_state("s2");
    b.on("s0", "^", "s1", Dir::Right);
    for (const auto& l : alpha) {
        b.on_letter("s1", l, "s2", Dir::Right, callee);
        b.on_letter("s2", l, "s2", Dir::Right);
    }
    return b.build();
}

// Calls callee at the first and at the last position.
Tptr call_first_last(const std::string& name, const std::vector<Letter>& alpha, const std::string& callee) {
    Builder b(name);
    b.alphabet(alpha).initial("s0").final_state("s1").final_state("f");
    b.on("s0", "^", "s1", Dir::Right);
    b.on("s2", "$", "t", Dir::Left);
    for (const auto& l : alpha) {
        b.on_letter("s1", l, "s2", Dir::Right, callee);
        b.on_letter("s2", l, "s2", Dir::Right);
        b.on_letter("t", l, "f", Dir::Right, callee);
    }
    return b.build();
}

// Copies the tape (marked letters keep their marks) and then writes '#'.
Tptr copy_hash(const std::string& name, const std::vector<Letter>& alpha) {
    Builder b(name);
    b.alphabet(alpha).initial("copy").final_state("done");
    b.on("copy", "^", "copy", Dir::Right);
    b.on("copy", "$", "back", Dir::Left);
    b.on("back", "^", "done", Dir::Right);
    for (const auto& l : alpha) {
        b.on_letter("copy", l, "copy", Dir::Right, to_string(l));
        b.on_letter("back", l, "done", Dir::Right, "#");
    }
    return b.build();
}

std::string base_of(const Letter& l) { return std::string(1, l.base); }

PebbleMachine two_level(Variant v, const std::string& name, Tptr head, Tptr leaf_t) {
    return make_machine(v, name, inner(std::move(head), {leaf(std::move(leaf_t))}));
}

}  // namespace

Tptr maprev_transducer(const std::string& letters) {
    Builder b("mapRev");
    b.alphabet(plain("#" + letters)).initial("s").final_state("fwd");
    b.on("s", "^", "s", Dir::Right);
    for (char ch : letters) {
        std::string c(1, ch);
        b.on("s", c, "s", Dir::Right);
        b.on("back", c, "back", Dir::Left, c);
        b.on("fwd", c, "fwd", Dir::Right);
    }
    b.on("s", "#", "back", Dir::Left);
    b.on("s", "$", "back", Dir::Left);
    b.on("back", "#", "fwd", Dir::Right);
    b.on("back", "^", "fwd", Dir::Right);
    b.on("fwd", "#", "s", Dir::Right, "#");
    return b.build();
}

PebbleMachine maprev(const std::string& letters) {
    return make_machine(Variant::Blind, "mapRev", leaf(maprev_transducer(letters)));
}

PebbleMachine copier() { return make_machine(Variant::Blind, "copier", leaf(make_copier("copier", plain("ab")))); }

PebbleMachine ulsq() {
    return two_level(Variant::Blind, "ulsq", call_everywhere("ulsq_H", plain("ab"), "ulsq_copy"),
                     copy_hash("ulsq_copy", plain("ab")));
}

PebbleMachine square() {
    return two_level(Variant::Last, "square", call_everywhere("square_H", plain("ab"), "square_copy"),
                     copy_hash("square_copy", with_recent("ab")));
}

std::vector<PebbleMachine> blind_family() {
    auto ab = plain("ab");
    std::vector<PebbleMachine> out;
    out.push_back(two_level(Variant::Blind, "pos1", call_first("pos1_H", ab, "pos1_copy"), make_copier("pos1_copy", ab)));
    out.push_back(ulsq());
    {
        auto copy = leaf(copy_hash("ulsqmid_copy", ab));
        auto mid = inner(call_first("ulsqmid_M", ab, "ulsqmid_copy"), {copy});
        out.push_back(make_machine(Variant::Blind, "ulsq_mid", inner(call_everywhere("ulsqmid_H", ab, "ulsqmid_M"), {mid})));
    }
    {
        auto copy = leaf(copy_hash("ulsqtop_copy", ab));
        auto h = inner(call_everywhere("ulsqtop_H", ab, "ulsqtop_copy"), {copy});
        out.push_back(make_machine(Variant::Blind, "ulsq_top", inner(call_first("ulsqtop_W", ab, "ulsqtop_H"), {h})));
    }
    out.push_back(two_level(Variant::Blind, "blind_eps", call_everywhere("beps_H", ab, "beps_leaf"),
                            one_way("beps_leaf", ab, [](const Letter&) { return ""; })));
    {
        auto copy = leaf(make_copier("cubic_copy", ab));
        auto mid = inner(call_everywhere("cubic_M", ab, "cubic_copy"), {copy});
        out.push_back(make_machine(Variant::Blind, "cubic", inner(call_everywhere("cubic_H", ab, "cubic_M"), {mid})));
    }
    out.push_back(two_level(Variant::Blind, "first_last", call_first_last("fl_H", ab, "fl_copy"), make_copier("fl_copy", ab)));
    {
        // the leaf prints only the first letter of its input
        Builder b("firstl_leaf");
        b.alphabet(ab).initial("s0").final_state("s1").final_state("s2");
        b.on("s0", "^", "s1", Dir::Right);
        for (const auto& l : ab) {
            b.on_letter("s1", l, "s2", Dir::Right, base_of(l));
            b.on_letter("s2", l, "s2", Dir::Right);
        }
        out.push_back(two_level(Variant::Blind, "first_letter", call_everywhere("firstl_H", ab, "firstl_leaf"), b.build()));
    }
    return out;
}

std::vector<PebbleMachine> last_family() {
    auto ab = plain("ab");
    auto abm = with_recent("ab");
    std::vector<PebbleMachine> out;
    out.push_back(square());
    out.push_back(two_level(Variant::Last, "last_pos1", call_first("lpos1_H", ab, "lpos1_copy"),
                            one_way("lpos1_copy", abm, base_of)));
    {
        auto copy = leaf(copy_hash("sqtop_copy", abm));
        auto h = inner(call_everywhere("sqtop_H", abm, "sqtop_copy"), {copy});
        out.push_back(make_machine(Variant::Last, "square_top", inner(call_first("sqtop_W", ab, "sqtop_H"), {h})));
    }
    out.push_back(two_level(Variant::Last, "last_eps", call_everywhere("leps_H", ab, "leps_leaf"),
                            one_way("leps_leaf", abm, [](const Letter&) { return ""; })));
    out.push_back(two_level(Variant::Last, "mark_only", call_everywhere("monly_H", ab, "monly_leaf"),
                            one_way("monly_leaf", abm, [](const Letter& l) { return l.marks ? base_of(l) : ""; })));
    {
        // the leaf prints the letter right of the mark
        Builder b("right_leaf");
        b.alphabet(abm).initial("s").final_state("s").final_state("after").final_state("rest");
        b.on("s", "^", "s", Dir::Right);
        for (const auto& l : abm) {
            b.on_letter("s", l, l.marks ? "after" : "s", Dir::Right);
            b.on_letter("after", l, "rest", Dir::Right, base_of(l));
            b.on_letter("rest", l, "rest", Dir::Right);
        }
        out.push_back(two_level(Variant::Last, "right_of_mark", call_everywhere("right_H", ab, "right_leaf"), b.build()));
    }
    {
        auto copy = leaf(copy_hash("midmark_copy", abm));
        auto mid = inner(one_way("midmark_M", abm, [](const Letter& l) { return l.marks ? "midmark_copy" : ""; }), {copy});
        out.push_back(make_machine(Variant::Last, "mid_mark", inner(call_everywhere("midmark_H", ab, "midmark_M"), {mid})));
    }
    {
        // the leaf prints the prefix before the mark
        Builder b("prefix_leaf");
        b.alphabet(abm).initial("s").final_state("s").final_state("rest");
        b.on("s", "^", "s", Dir::Right);
        for (const auto& l : abm) {
            if (l.marks) b.on_letter("s", l, "rest", Dir::Right);
            else b.on_letter("s", l, "s", Dir::Right, base_of(l));
            b.on_letter("rest", l, "rest", Dir::Right);
        }
        out.push_back(two_level(Variant::Last, "prefix", call_everywhere("prefix_H", ab, "prefix_leaf"), b.build()));
    }
    return out;
}

// zebra_k: layers 1..2k run the nested loops, the last layer prints a pair of labels.
PebbleMachine zebra(int k) {
    if (k < 1) throw CorpusError("zebra needs k >= 1");
    const std::string pre = "zebra" + std::to_string(k) + "_";
    auto alpha = with_both("<>ab");
    const int cap = k + 3;  // saturating bracket depth
    auto at_mark = [&](const std::string& name, const std::string& text) {
        return one_way(name, alpha, [&](const Letter& l) { return (l.marks & kRecent) ? text : ""; });
    };
    auto open = leaf(at_mark(pre + "open", "<"));
    auto close = leaf(at_mark(pre + "close", ">"));
    Nptr below;
    {
        // "<" label(older) "#" label(recent) ">"
        Builder b(pre + "P");
        b.alphabet(alpha).initial("s1");
        for (const char* f : {"s1", "s2", "copy2", "fin"}) b.final_state(f);
        b.on("s1", "^", "s1", Dir::Right);
        b.on("copy1", "$", "back", Dir::Left);
        b.on("back", "^", "s2", Dir::Right);
        for (const auto& l : alpha) {
            bool older = l.marks & kOlder, recent = l.marks & kRecent;
            bool bracket = l.base == '<' || l.base == '>';
            b.on_letter("s1", l, older ? "copy1" : "s1", Dir::Right, older ? "<" : "");
            if (bracket) b.on_letter("copy1", l, "back", Dir::Left);
            else b.on_letter("copy1", l, "copy1", Dir::Right, base_of(l));
            b.on_letter("back", l, "back", Dir::Left);
            b.on_letter("s2", l, recent ? "copy2" : "s2", Dir::Right, recent ? "#" : "");
            if (bracket) b.on_letter("copy2", l, "fin", Dir::Right, ">");
            else b.on_letter("copy2", l, "copy2", Dir::Right, base_of(l));
            b.on_letter("fin", l, "fin", Dir::Right);
        }
        below = leaf(b.build());
    }
    for (int m = 2 * k; m >= 1; --m) {
        Builder b(pre + "L" + std::to_string(m));
        auto letters = m == 1 ? plain("<>ab") : alpha;
        b.alphabet(letters);
        std::string calls = m == 2 * k ? below->name() : open->name() + " " + below->name() + " " + close->name();
        auto c = [](int d) { return "c" + std::to_string(d); };
        b.final_state("fin");
        for (int d = 0; d <= cap; ++d) b.final_state(c(d));
        if (m <= 2) {
            // children of the root: '<' at bracket depth 1
            b.initial("c0");
            b.on("c0", "^", "c0", Dir::Right);
        } else {
            // children of the node opened at the older mark
            b.initial("seek");
            b.final_state("seek");
            b.on("seek", "^", "seek", Dir::Right);
        }
        for (const auto& l : letters) {
            if (m > 2) {
                if (!(l.marks & kOlder)) b.on_letter("seek", l, "seek", Dir::Right);
                else b.on_letter("seek", l, l.base == '<' ? c(1) : "fin", Dir::Right);
            }
            b.on_letter("fin", l, "fin", Dir::Right);
            for (int d = m <= 2 ? 0 : 1; d <= cap; ++d) {
                if (l.base == '<') {
                    b.on_letter(c(d), l, c(std::min(d + 1, cap)), Dir::Right, d == 1 ? calls : "");
                } else if (l.base == '>') {
                    int nd = std::max(d - 1, 0);
                    b.on_letter(c(d), l, (m > 2 && nd == 0) ? "fin" : c(nd), Dir::Right);
                } else {
                    b.on_letter(c(d), l, c(d), Dir::Right);
                }
            }
        }
        std::vector<Nptr> kids = m == 2 * k ? std::vector<Nptr>{below} : std::vector<Nptr>{open, below, close};
        below = inner(b.build(), kids);
    }
    return make_machine(Variant::LastLast, "zebra" + std::to_string(k), below);
}

std::vector<std::string> names() {
    std::vector<std::string> out{"mapRev", "copier", "ulsq", "square", "zebra1", "zebra2"};
    for (const auto& m : blind_family())
        if (m.name != "ulsq") out.push_back(m.name);
    for (const auto& m : last_family())
        if (m.name != "square") out.push_back(m.name);
    return out;
}

std::vector<PebbleMachine> all() {
    std::vector<PebbleMachine> out{maprev(), copier(), ulsq(), square(), zebra(1), zebra(2)};
    for (auto& m : blind_family())
        if (m.name != "ulsq") out.push_back(m);
    for (auto& m : last_family())
        if (m.name != "square") out.push_back(m);
    return out;
}

PebbleMachine make(const std::string& name) {
    if (name == "zebra1") return zebra(1);
    if (name == "zebra2") return zebra(2);
    if (name.rfind("zebra(", 0) == 0 && name.back() == ')') return zebra(std::stoi(name.substr(6)));
    for (auto& m : all())
        if (m.name == name) return m;
    throw CorpusError("unknown corpus machine " + name);
}

std::string isq_ref(const std::string& u) {
    std::vector<std::string> blocks{""};
    for (char c : u) {
        if (c == '#') blocks.push_back("");
        else blocks.back() += c;
    }
    std::string out;
    for (const auto& b : blocks)
        for (std::size_t r = 0; r < blocks.size(); ++r) out += b + "#";
    return out;
}

namespace {

struct Tree {
    std::string label;
    std::vector<Tree> children;
};

// Parses one tree starting at p.
Tree parse_tree(const std::string& s, std::size_t& p) {
    if (p >= s.size() || s[p] != '<') throw CorpusError("malformed tree word");
    ++p;
    Tree t;
    if (p < s.size() && s[p] != '<') {
        while (p < s.size() && s[p] != '<' && s[p] != '>') t.label += s[p++];
    } else {
        while (p < s.size() && s[p] == '<') t.children.push_back(parse_tree(s, p));
    }
    if (p >= s.size() || s[p] != '>') throw CorpusError("malformed tree word");
    ++p;
    return t;
}

bool uniform(const Tree& t, int height) {
    if (height == 1) return t.children.empty();
    if (t.children.empty()) return false;
    for (const auto& c : t.children)
        if (!uniform(c, height - 1)) return false;
    return true;
}

Tree parse_checked(const std::string& s, int height) {
    std::size_t p = 0;
    Tree t = parse_tree(s, p);
    if (p != s.size() || !uniform(t, height)) throw CorpusError("tree word not of height " + std::to_string(height));
    return t;
}

}  // namespace

bool is_tree_word(const std::string& t, int height) {
    try {
        parse_checked(t, height);
        return true;
    } catch (const CorpusError&) {
        return false;
    }
}

std::string reference_zebra(int k, const std::string& tree) {
    Tree root = parse_checked(tree, k + 1);
    std::string out;
    // level m ranges i_t (m odd) or j_t (m even) over the children of i_{t-1} or j_{t-1}
    std::function<void(int, const Tree*, const Tree*)> loop = [&](int m, const Tree* i, const Tree* j) {
        const Tree* range = m % 2 == 1 ? i : j;
        for (const auto& c : range->children) {
            const Tree* ni = m % 2 == 1 ? &c : i;
            const Tree* nj = m % 2 == 1 ? j : &c;
            if (m == 2 * k) {
                out += "<" + ni->label + "#" + nj->label + ">";
            } else {
                out += "<";
                loop(m + 1, ni, nj);
                out += ">";
            }
        }
    };
    loop(1, &root, &root);
    return out;
}

std::string random_tree(std::mt19937& rng, int height, int max_children, int max_label) {
    std::uniform_int_distribution<int> kids(1, max_children), len(0, max_label), letter(0, 1);
    std::function<std::string(int)> gen = [&](int h) {
        std::string s = "<";
        if (h == 1) {
            int n = len(rng);
            for (int i = 0; i < n; ++i) s += letter(rng) ? 'b' : 'a';
        } else {
            int n = kids(rng);
            for (int i = 0; i < n; ++i) s += gen(h - 1);
        }
        return s + ">";
    };
    return gen(height);
}

}  // namespace ptk::corpus
