#include "ptk/pebble.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace ptk {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Blind: return "blind";
        case Variant::Last: return "last";
        case Variant::LastLast: return "lastlast";
    }
    return "?";
}

std::optional<Variant> parse_variant(const std::string& s) {
    if (s == "blind") return Variant::Blind;
    if (s == "last") return Variant::Last;
    if (s == "lastlast") return Variant::LastLast;
    return std::nullopt;
}

std::vector<std::string> split_calls(const std::string& output) {
    std::vector<std::string> out;
    std::istringstream in(output);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

ExplicitNode::ExplicitNode(std::shared_ptr<const TwoWayTransducer> t,
                           std::vector<std::shared_ptr<const ExplicitNode>> children)
    : t_(std::move(t)), children_(std::move(children)), height_(1) {
    std::set<std::string> names;
    for (const auto& c : children_) {
        if (!names.insert(c->name()).second) throw MachineError(t_->name() + ": duplicate child name " + c->name());
        height_ = std::max(height_, c->height() + 1);
    }
    calls_.resize(t_->transitions().size());
    if (children_.empty()) return;
    for (std::size_t i = 0; i < t_->transitions().size(); ++i) {
        for (const auto& nm : split_calls(t_->transitions()[i].output)) {
            auto it = std::find_if(children_.begin(), children_.end(), [&](const auto& c) { return c->name() == nm; });
            if (it == children_.end()) throw MachineError(t_->name() + ": output names unknown child " + nm);
            calls_[i].push_back(static_cast<int>(it - children_.begin()));
        }
    }
}

std::vector<int> ExplicitNode::call_counts(const std::vector<std::string>& pieces) const {
    std::vector<int> counts(children_.size(), 0);
    for (const auto& p : pieces)
        for (const auto& nm : split_calls(p))
            for (std::size_t c = 0; c < children_.size(); ++c)
                if (children_[c]->name() == nm) ++counts[c];
    return counts;
}

void ExplicitNode::execute(const Word& w, Emitter& out) const {
    Run r = run(*t_, w);
    const Transition* base = t_->transitions().data();
    for (std::size_t s = 0; s < r.taken.size(); ++s) {
        const Transition* tr = r.taken[s];
        if (children_.empty()) {
            if (!tr->output.empty()) out.terminal(tr->output);
        } else {
            for (int c : calls_[tr - base]) out.call(*children_[c], r.steps[s].pos);
        }
    }
}

Word MarkedWord::encode() const {
    Word w = unmark(base);
    if (recent) w[*recent - 1].marks |= kRecent;
    if (older) w[*older - 1].marks |= kOlder;
    return w;
}

MarkedWord mark(const Word& u, int i) {
    if (i < 1 || i > static_cast<int>(u.size())) throw MachineError("mark: position out of range");
    return MarkedWord{unmark(u), i, std::nullopt};
}

Word call_tape(Variant v, const Word& w, int i) {
    if (i < 1 || i > static_cast<int>(w.size())) throw MachineError("call at a position outside the word");
    switch (v) {
        case Variant::Blind: return w;
        case Variant::Last: return mark(w, i).encode();
        case Variant::LastLast: {
            std::optional<int> prev;
            for (std::size_t p = 0; p < w.size(); ++p)
                if (w[p].marks & kRecent) prev = static_cast<int>(p) + 1;
            return MarkedWord{unmark(w), i, prev}.encode();
        }
    }
    return w;
}

namespace {

class Evaluator : public Emitter {
  public:
    Evaluator(Variant v, const Word& w, Sink& sink) : v_(v), w_(w), sink_(sink) {}
    void terminal(std::string_view s) override { sink_.put(s); }
    void call(const Node& child, int pos) override {
        Word next = call_tape(v_, w_, pos);
        Evaluator sub(v_, next, sink_);
        child.execute(next, sub);
    }

  private:
    Variant v_;
    const Word& w_;
    Sink& sink_;
};

}  // namespace

void evaluate(const PebbleMachine& m, const Word& u, Sink& sink) {
    for (const auto& l : u)
        if (l.marks) throw MachineError("top-level input must be unmarked");
    Evaluator e(m.variant, u, sink);
    m.root->execute(u, e);
}

std::string eval(const PebbleMachine& m, const Word& u) {
    StringSink s;
    evaluate(m, u, s);
    return s.out;
}

static std::string eval_checked(const PebbleMachine& m, const Word& u, Variant v) {
    if (m.variant != v) throw MachineError(m.name + " is a " + to_string(m.variant) + " machine");
    return eval(m, u);
}

std::string eval_blind(const PebbleMachine& m, const Word& u) { return eval_checked(m, u, Variant::Blind); }
std::string eval_last(const PebbleMachine& m, const Word& u) { return eval_checked(m, u, Variant::Last); }
std::string eval_lastlast(const PebbleMachine& m, const Word& u) { return eval_checked(m, u, Variant::LastLast); }

std::size_t output_length(const PebbleMachine& m, const Word& u) {
    LengthSink s;
    evaluate(m, u, s);
    return s.length;
}

int height(const PebbleMachine& m) { return m.height(); }

std::vector<Letter> input_alphabet(const PebbleMachine& m) {
    if (!m.inputs.empty()) return m.inputs;
    const ExplicitNode* e = m.explicit_root();
    if (!e) throw MachineError(m.name + ": input alphabet of a constructed machine is not stored");
    std::vector<Letter> out;
    for (const auto& l : e->transducer().alphabet())
        if (!l.marks) out.push_back(l);
    return out;
}

std::vector<std::vector<const ExplicitNode*>> branches(const ExplicitNode& root) {
    std::vector<std::vector<const ExplicitNode*>> out;
    std::vector<const ExplicitNode*> path;
    std::function<void(const ExplicitNode&)> rec = [&](const ExplicitNode& n) {
        path.push_back(&n);
        if (n.is_leaf()) out.push_back(path);
        for (const auto& c : n.children()) rec(*c);
        path.pop_back();
    };
    rec(root);
    return out;
}

bool is_balanced(const ExplicitNode& root) {
    for (const auto& b : branches(root))
        if (static_cast<int>(b.size()) != root.height()) return false;
    return true;
}

namespace {

void check_variant(Variant v, const ExplicitNode& n, int depth) {
    const auto& alpha = n.transducer().alphabet();
    for (const auto& l : alpha) {
        if (v == Variant::Blind && l.marks) throw MachineError(n.name() + ": marked letter in a blind machine");
        if (v == Variant::Last && (l.marks & kOlder)) throw MachineError(n.name() + ": older mark in a last machine");
    }
    if (v != Variant::Blind && depth > 0) {
        for (const auto& l : alpha) {
            if (l.marks) continue;
            Letter r{l.base, kRecent};
            if (!std::binary_search(alpha.begin(), alpha.end(), r))
                throw MachineError(n.name() + ": called node lacks the marked letter " + to_string(r));
        }
    }
    for (const auto& c : n.children()) {
        for (const auto& l : c->transducer().alphabet())
            if (!l.marks && !std::binary_search(alpha.begin(), alpha.end(), l))
                throw MachineError(c->name() + ": letter " + to_string(l) + " unknown to its caller " + n.name());
        check_variant(v, *c, depth + 1);
    }
}

}  // namespace

PebbleMachine make_machine(Variant v, const std::string& name, std::shared_ptr<const ExplicitNode> root) {
    check_variant(v, *root, 0);
    PebbleMachine m{v, name, root, {}, nullptr, 0};
    for (const auto& l : root->transducer().alphabet())
        if (!l.marks) m.inputs.push_back(l);
    return m;
}

std::shared_ptr<const ExplicitNode> leaf(std::shared_ptr<const TwoWayTransducer> t) {
    return std::make_shared<const ExplicitNode>(std::move(t), std::vector<std::shared_ptr<const ExplicitNode>>{});
}

std::shared_ptr<const ExplicitNode> inner(std::shared_ptr<const TwoWayTransducer> t,
                                          std::vector<std::shared_ptr<const ExplicitNode>> children) {
    return std::make_shared<const ExplicitNode>(std::move(t), std::move(children));
}

ValidationReport validate_machine(const PebbleMachine& m, int max_len) {
    ValidationReport rep;
    auto fail = [&](const std::string& s) {
        rep.ok = false;
        if (rep.failures.size() < 10) rep.failures.push_back(s);
    };
    auto alpha = input_alphabet(m);
    auto for_words = [&](int len_max, const std::function<void(const Word&)>& f) {
        Word w;
        std::function<void(int)> rec = [&](int left) {
            f(w);
            if (left == 0) return;
            for (const auto& l : alpha) {
                w.push_back(l);
                rec(left - 1);
                w.pop_back();
            }
        };
        rec(len_max);
    };
    // node level, on exactly the mark patterns the node can receive
    std::function<void(const ExplicitNode&, int)> node = [&](const ExplicitNode& n, int depth) {
        int len = m.variant == Variant::LastLast ? std::min(max_len, 3) : max_len;
        for_words(len, [&](const Word& u) {
            std::vector<Word> tapes;
            int nn = static_cast<int>(u.size());
            if (depth == 0 || m.variant == Variant::Blind) {
                tapes.push_back(u);
            } else if (m.variant == Variant::Last || depth == 1) {
                for (int i = 1; i <= nn; ++i) tapes.push_back(mark(u, i).encode());
            } else {
                for (int i = 1; i <= nn; ++i)
                    for (int j = 1; j <= nn; ++j) tapes.push_back(MarkedWord{u, i, j}.encode());
            }
            for (const auto& w : tapes) {
                try {
                    run(n.transducer(), w);
                } catch (const RunError& e) {
                    fail(e.what());
                }
            }
        });
        for (const auto& c : n.children()) node(*c, depth + 1);
    };
    const ExplicitNode* root = m.explicit_root();
    if (!root) throw MachineError(m.name + ": validation needs an explicit machine");
    node(*root, 0);
    for_words(m.variant == Variant::LastLast ? max_len : std::min(max_len, 5), [&](const Word& u) {
        try {
            output_length(m, u);
        } catch (const std::exception& e) {
            fail(e.what());
        }
    });
    return rep;
}

}  // namespace ptk
