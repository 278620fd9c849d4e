#include "ptk/twoway.hpp"

#include <algorithm>
#include <sstream>

namespace ptk {

int TwoWayTransducer::symbol_of(const Letter& l) const {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), l);
    if (it == alphabet_.end() || !(*it == l)) return -1;
    return 2 + static_cast<int>(it - alphabet_.begin());
}

std::string TwoWayTransducer::symbol_text(int sym) const {
    if (sym == kLeftEnd) return "^";
    if (sym == kRightEnd) return "$";
    return to_string(alphabet_[sym - 2]);
}

int TwoWayTransducer::state_index(const std::string& name) const {
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i] == name) return static_cast<int>(i);
    return -1;
}

const Transition* TwoWayTransducer::find(int q, int sym, int l, int r) const {
    for (int ti : candidates(q, sym)) {
        const auto& tr = transitions_[ti];
        if (tr.guard.matches(l, r)) return &tr;
    }
    return nullptr;
}

TwoWayTransducer::Builder& TwoWayTransducer::Builder::alphabet(std::vector<Letter> letters) {
    std::sort(letters.begin(), letters.end());
    if (std::adjacent_find(letters.begin(), letters.end()) != letters.end())
        throw MachineError(t_.name_ + ": duplicate letter in alphabet");
    for (const auto& l : letters) {
        if (l.base == '^' || l.base == '$' || l.base == '!' || l.base == '"' || l.base == ' ')
            throw MachineError(t_.name_ + ": reserved character used as a letter");
    }
    t_.alphabet_ = std::move(letters);
    return *this;
}

TwoWayTransducer::Builder& TwoWayTransducer::Builder::lookaround(MonoidMorphism nu) {
    t_.lookaround_.emplace(std::move(nu));
    return *this;
}

int TwoWayTransducer::Builder::state(const std::string& name) {
    int i = t_.state_index(name);
    if (i >= 0) return i;
    t_.states_.push_back(name);
    t_.finals_.push_back(false);
    return static_cast<int>(t_.states_.size()) - 1;
}

TwoWayTransducer::Builder& TwoWayTransducer::Builder::initial(const std::string& name) {
    t_.initial_ = state(name);
    has_initial_ = true;
    return *this;
}

TwoWayTransducer::Builder& TwoWayTransducer::Builder::final_state(const std::string& name) {
    t_.finals_[state(name)] = true;
    return *this;
}

int TwoWayTransducer::Builder::symbol(const std::string& text) const {
    if (text == "^") return kLeftEnd;
    if (text == "$") return kRightEnd;
    Word w = parse_word(text);
    if (w.size() != 1) throw MachineError(t_.name_ + ": bad tape symbol \"" + text + "\"");
    int s = t_.symbol_of(w[0]);
    if (s < 0) throw MachineError(t_.name_ + ": symbol " + text + " not in alphabet");
    return s;
}

TwoWayTransducer::Builder& TwoWayTransducer::Builder::on(const std::string& from, const std::string& sym,
                                                          const std::string& to, Dir dir,
                                                          const std::string& output, Guard guard) {
    Transition tr;
    tr.from = state(from);
    tr.symbol = symbol(sym);
    tr.to = state(to);
    tr.dir = dir;
    tr.output = output;
    tr.guard = guard;
    pending_.push_back(std::move(tr));
    return *this;
}

TwoWayTransducer::Builder& TwoWayTransducer::Builder::on_letter(const std::string& from, const Letter& l,
                                                                 const std::string& to, Dir dir,
                                                                 const std::string& output, Guard guard) {
    return on(from, to_string(l), to, dir, output, guard);
}

std::shared_ptr<const TwoWayTransducer> TwoWayTransducer::Builder::build() {
    if (!has_initial_) throw MachineError(t_.name_ + ": no initial state");
    const std::string& nm = t_.name_;
    int nsym = t_.num_symbols();
    t_.by_key_.assign(static_cast<std::size_t>(t_.num_states()) * nsym, {});
    int nu_size = t_.lookaround_ ? t_.lookaround_->target().size() : 0;
    if (t_.lookaround_ && t_.lookaround_->alphabet() != t_.alphabet_)
        throw MachineError(nm + ": lookaround alphabet differs from input alphabet");
    for (auto& tr : pending_) {
        std::string where = t_.states_[tr.from] + " " + t_.symbol_text(tr.symbol);
        if ((tr.symbol == kLeftEnd || tr.symbol == kRightEnd) && !tr.output.empty())
            throw MachineError(nm + ": nonempty output on an endmarker at " + where);
        if (tr.symbol == kLeftEnd && tr.dir == Dir::Left) throw MachineError(nm + ": moves left of ^ at " + where);
        if (tr.symbol == kRightEnd && tr.dir == Dir::Right) throw MachineError(nm + ": moves right of $ at " + where);
        for (int g : {tr.guard.left, tr.guard.right}) {
            if (g >= 0 && g >= nu_size) throw MachineError(nm + ": guard value out of range at " + where);
        }
        auto& slot = t_.by_key_[static_cast<std::size_t>(tr.from) * nsym + tr.symbol];
        for (int other : slot) {
            if (t_.transitions_[other].guard.overlaps(tr.guard))
                throw MachineError(nm + ": nondeterministic transitions at " + where);
        }
        slot.push_back(static_cast<int>(t_.transitions_.size()));
        t_.transitions_.push_back(tr);
    }
    return std::make_shared<const TwoWayTransducer>(t_);
}

GuardValues guard_values(const TwoWayTransducer& t, const Word& u) {
    GuardValues g;
    const int n = static_cast<int>(u.size());
    g.prefix.assign(n + 2, 0);
    g.suffix.assign(n + 2, 0);
    const MonoidMorphism* nu = t.lookaround();
    if (!nu) return g;
    const auto& m = nu->target();
    g.prefix[0] = m.identity();
    g.prefix[1] = m.identity();
    for (int x = 2; x <= n + 1; ++x) g.prefix[x] = m.mul(g.prefix[x - 1], nu->image_of(u[x - 2]));
    g.suffix[n + 1] = m.identity();
    g.suffix[n] = m.identity();
    for (int x = n - 1; x >= 0; --x) g.suffix[x] = m.mul(nu->image_of(u[x]), g.suffix[x + 1]);
    return g;
}

Run run(const TwoWayTransducer& t, const Word& u) {
    const int n = static_cast<int>(u.size());
    std::vector<int> sym(n + 2);
    sym[0] = kLeftEnd;
    sym[n + 1] = kRightEnd;
    for (int i = 0; i < n; ++i) {
        sym[i + 1] = t.symbol_of(u[i]);
        if (sym[i + 1] < 0)
            throw RunError(RunError::Kind::UnknownLetter, t.name() + ": letter " + to_string(u[i]) + " not in alphabet");
    }
    GuardValues gv = guard_values(t, u);
    std::vector<char> seen(static_cast<std::size_t>(t.num_states()) * (n + 2), 0);
    Run r;
    r.word = u;
    int q = t.initial(), x = 0;
    for (;;) {
        auto& s = seen[static_cast<std::size_t>(q) * (n + 2) + x];
        if (s) throw RunError(RunError::Kind::Diverged, t.name() + ": diverges on \"" + to_string(u) + "\"");
        s = 1;
        r.steps.push_back({q, x});
        if (x == n + 1 && t.is_final(q)) return r;
        const Transition* tr = t.find(q, sym[x], gv.prefix[x], gv.suffix[x]);
        if (!tr)
            throw RunError(RunError::Kind::Rejected, t.name() + ": rejects \"" + to_string(u) + "\" in state " +
                                                         t.state_names()[q] + " at position " + std::to_string(x));
        r.taken.push_back(tr);
        int nx = x + static_cast<int>(tr->dir);
        if (nx < 0 || nx > n + 1) throw RunError(RunError::Kind::FellOff, t.name() + ": falls off the tape");
        q = tr->to;
        x = nx;
    }
}

std::string output(const TwoWayTransducer& t, const Word& u) {
    Run r = run(t, u);
    std::string out;
    for (const auto* tr : r.taken) out += tr->output;
    return out;
}

std::vector<int> crossing_sequence(const TwoWayTransducer& t, const Word& u, int i) {
    if (i < 1 || i > static_cast<int>(u.size())) throw MachineError("crossing_sequence: position out of range");
    Run r = run(t, u);
    std::vector<int> cs;
    for (const auto& c : r.steps)
        if (c.pos == i) cs.push_back(c.state);
    return cs;
}

std::vector<std::string> production_pieces(const TwoWayTransducer& t, const Word& u, int i) {
    if (i < 1 || i > static_cast<int>(u.size())) throw MachineError("production: position out of range");
    Run r = run(t, u);
    std::vector<std::string> out;
    for (std::size_t s = 0; s < r.taken.size(); ++s)
        if (r.steps[s].pos == i) out.push_back(r.taken[s]->output);
    return out;
}

std::string production(const TwoWayTransducer& t, const Word& u, int i) {
    std::string out;
    for (const auto& p : production_pieces(t, u, i)) out += p;
    return out;
}

Word context_word(const MonoidMorphism& mu, const Context& c) {
    if (!mu.in_image(c.left) || !mu.in_image(c.right)) throw AlgebraError("context element outside the image");
    Word w = *mu.witness(c.left);
    w.push_back(c.letter);
    const Word& r = *mu.witness(c.right);
    w.insert(w.end(), r.begin(), r.end());
    return w;
}

std::vector<std::string> production_pieces_on_context(const TwoWayTransducer& t, const MonoidMorphism& mu,
                                                      const Context& c) {
    Word w = context_word(mu, c);
    return production_pieces(t, w, static_cast<int>(mu.witness(c.left)->size()) + 1);
}

std::string production_on_context(const TwoWayTransducer& t, const MonoidMorphism& mu, const Context& c) {
    std::string out;
    for (const auto& p : production_pieces_on_context(t, mu, c)) out += p;
    return out;
}

namespace {

// Behaviour of one machine on a factor: for each outer lookaround context
// (x, y) and entry (side, state), the exit (side, state) or -1.
struct BehaviorAlgebra {
    const TwoWayTransducer* t;
    int q;
    int nn;  // lookaround size, 1 without lookaround
    int width() const { return 1 + nn * nn * 2 * q; }
    int block(int x, int y) const { return 1 + (x * nn + y) * 2 * q; }

    void identity(Value& v) const {
        const MonoidMorphism* nu = t->lookaround();
        v.push_back(nu ? nu->target().identity() : 0);
        for (int b = 0; b < nn * nn; ++b) {
            for (int s = 0; s < q; ++s) v.push_back(q + s);  // from left: exit right
            for (int s = 0; s < q; ++s) v.push_back(s);      // from right: exit left
        }
    }

    void letter(Value& v, const Letter& a) const {
        const MonoidMorphism* nu = t->lookaround();
        int sym = t->symbol_of(a);
        v.push_back(nu ? (sym < 0 ? nu->target().identity() : nu->image_of(a)) : 0);
        for (int x = 0; x < nn; ++x)
            for (int y = 0; y < nn; ++y)
                for (int side = 0; side < 2; ++side)
                    for (int s = 0; s < q; ++s) {
                        const Transition* tr = sym < 0 ? nullptr : t->find(s, sym, nu ? x : -1, nu ? y : -1);
                        if (!tr) v.push_back(-1);
                        else v.push_back(tr->dir == Dir::Left ? tr->to : q + tr->to);
                    }
    }

    void mul(const std::int32_t* a, const std::int32_t* b, Value& out) const {
        const MonoidMorphism* nu = t->lookaround();
        int av = a[0], bv = b[0];
        out.push_back(nu ? nu->target().mul(av, bv) : 0);
        for (int x = 0; x < nn; ++x)
            for (int y = 0; y < nn; ++y) {
                const std::int32_t* f = a + block(x, nu ? nu->target().mul(bv, y) : 0);
                const std::int32_t* g = b + block(nu ? nu->target().mul(x, av) : 0, y);
                for (int side = 0; side < 2; ++side)
                    for (int s = 0; s < q; ++s) out.push_back(glue(f, g, side, s));
            }
    }

    // Entries: [0,q) entering from the left, [q,2q) entering from the right.
    // Outcomes: [0,q) exit left, [q,2q) exit right.
    int glue(const std::int32_t* f, const std::int32_t* g, int side, int s) const {
        bool in_f = side == 0;
        int o = in_f ? f[s] : g[q + s];
        for (int steps = 0; steps <= 2 * q + 2; ++steps) {
            if (o < 0) return -1;
            if (in_f) {
                if (o < q) return o;
                o = g[o - q];
                in_f = false;
            } else {
                if (o >= q) return o;
                o = f[q + o];
                in_f = true;
            }
        }
        return -1;
    }
};

}  // namespace

MonoidMorphism transition_morphism(const std::vector<const TwoWayTransducer*>& ts, std::size_t cap) {
    if (ts.empty()) throw MachineError("transition_morphism: no machines");
    for (const auto* t : ts)
        if (t->alphabet() != ts.front()->alphabet())
            throw MachineError("transition_morphism: alphabet mismatch (" + t->name() + ")");
    return transition_morphism(ts, ts.front()->alphabet(), cap);
}

MonoidMorphism transition_morphism(const std::vector<const TwoWayTransducer*>& ts, const std::vector<Letter>& alpha,
                                   std::size_t cap) {
    if (ts.empty()) throw MachineError("transition_morphism: no machines");
    std::vector<BehaviorAlgebra> algs;
    for (const auto* t : ts) {
        algs.push_back({t, t->num_states(), t->lookaround() ? t->lookaround()->target().size() : 1});
    }
    Value id;
    for (const auto& a : algs) a.identity(id);
    std::vector<Value> gens;
    for (const auto& l : alpha) {
        Value g;
        for (const auto& a : algs) a.letter(g, l);
        gens.push_back(std::move(g));
    }
    auto mul = [&](const Value& x, const Value& y) {
        Value z;
        z.reserve(x.size());
        std::size_t off = 0;
        for (const auto& a : algs) {
            a.mul(x.data() + off, y.data() + off, z);
            off += a.width();
        }
        return z;
    };
    auto res = build_closure(id, gens, mul, cap);
    return MonoidMorphism(alpha, res.monoid, res.letter_image);
}

ValidationReport validate(const TwoWayTransducer& t, int max_len) {
    ValidationReport rep;
    const auto& alpha = t.alphabet();
    Word w;
    std::function<void(int)> rec = [&](int len) {
        if (rep.failures.size() >= 10) return;
        try {
            run(t, w);
        } catch (const RunError& e) {
            rep.ok = false;
            rep.failures.push_back(e.what());
        }
        if (len == max_len) return;
        for (const auto& l : alpha) {
            w.push_back(l);
            rec(len + 1);
            w.pop_back();
        }
    };
    rec(0);
    return rep;
}

std::shared_ptr<const TwoWayTransducer> make_copier(const std::string& name, const std::vector<Letter>& alphabet) {
    TwoWayTransducer::Builder b(name);
    b.alphabet(alphabet).initial("s").final_state("s");
    b.on("s", "^", "s", Dir::Right);
    for (const auto& l : alphabet) b.on_letter("s", l, "s", Dir::Right, to_string(l));
    return b.build();
}

}  // namespace ptk
