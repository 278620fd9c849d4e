#include "ptk/minimize.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

namespace ptk {

std::shared_ptr<const Forest> ForestCache::get(const Word& u) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = forests_.find(u);
    if (it != forests_.end()) return it->second;
    auto f = std::make_shared<const Forest>(build_forest(alg_->plain, u));
    forests_.emplace(u, f);
    return f;
}

std::string Program::leaf_output(int, const Word&) const {
    throw MachineError(kind() + " programs have no leaf lookaround");
}

namespace {

int node_height(const std::vector<std::shared_ptr<const Node>>& children) {
    int h = 1;
    for (const auto& c : children) h = std::max(h, c->height() + 1);
    return h;
}

// Runs a step function from position 0 until it halts at some position.
void interpret(const std::string& name, int initial, const std::function<const Step*(int, const View&, Step&)>& step,
               const Program& prog, const std::vector<std::shared_ptr<const Node>>& children, const Word& w,
               Emitter& out) {
    std::vector<View> views = prog.views(w);
    const int n = static_cast<int>(w.size());
    int d = initial, pos = 0;
    std::unordered_set<long long> seen;
    Step scratch;
    for (;;) {
        if (!seen.insert(static_cast<long long>(d) * (n + 2) + pos).second)
            throw RunError(RunError::Kind::Diverged, name + " loops on " + to_string(w));
        const Step* st = step(d, views[pos], scratch);
        if (!st || st->reject)
            throw RunError(RunError::Kind::Rejected, name + " blocks on " + to_string(w) + " at " + std::to_string(pos));
        for (const auto& a : st->out) {
            switch (a.kind) {
                case Action::Kind::Terminal: out.terminal(a.text); break;
                case Action::Kind::Call:
                    if (pos < 1 || pos > n) throw MachineError(name + ": call on an endmarker");
                    out.call(*children[a.child], pos);
                    break;
                case Action::Kind::LeafOutput: out.terminal(prog.leaf_output(a.child, w)); break;
            }
        }
        if (st->halt) return;
        pos += st->move;
        if (pos < 0 || pos > n + 1) throw RunError(RunError::Kind::FellOff, name + " leaves the tape");
        d = st->next;
    }
}

// Symbol index of every tape position in a given transducer.
std::vector<int> tape_symbols(const TwoWayTransducer& t, const Word& w) {
    std::vector<int> s(w.size() + 2);
    s[0] = kLeftEnd;
    s[w.size() + 1] = kRightEnd;
    for (std::size_t p = 0; p < w.size(); ++p) {
        int x = t.symbol_of(w[p]);
        if (x < 0) throw RunError(RunError::Kind::UnknownLetter, t.name() + ": unknown letter " + to_string(w[p]));
        s[p + 1] = x;
    }
    return s;
}

std::vector<std::pair<int, int>> guard_domain(const TwoWayTransducer& t) {
    std::vector<std::pair<int, int>> g;
    if (!t.lookaround()) {
        g.push_back({-1, -1});
        return g;
    }
    int nn = t.lookaround()->target().size();
    for (int x = 0; x < nn; ++x)
        for (int y = 0; y < nn; ++y) g.push_back({x, y});
    return g;
}

// kind=normal: descriptors are the states of the transducer.
class NormalProgram : public Program {
  public:
    explicit NormalProgram(std::shared_ptr<const ExplicitNode> n) : n_(std::move(n)) {}
    std::string kind() const override { return "normal"; }
    int initial() const override { return n_->transducer().initial(); }
    int num_descriptors() const override { return n_->transducer().num_states(); }
    std::string describe(int d) const override { return n_->transducer().state_names()[d]; }

    Step step(int q, const View& v) const override {
        const TwoWayTransducer& t = n_->transducer();
        Step st;
        if (v[0] == kRightEnd && t.is_final(q)) {
            st.halt = true;
            return st;
        }
        const Transition* tr = t.find(q, v[0], v[1], v[2]);
        if (!tr) {
            st.reject = true;
            return st;
        }
        int idx = static_cast<int>(tr - t.transitions().data());
        if (n_->is_leaf()) {
            if (!tr->output.empty()) st.out.push_back({Action::Kind::Terminal, tr->output, 0});
        } else {
            for (int c : n_->calls_of(idx)) st.out.push_back({Action::Kind::Call, "", c});
        }
        st.next = tr->to;
        st.move = static_cast<int>(tr->dir);
        return st;
    }

    std::vector<View> views(const Word& w) const override {
        const TwoWayTransducer& t = n_->transducer();
        auto syms = tape_symbols(t, w);
        std::vector<View> out(syms.size());
        GuardValues g;
        if (t.lookaround()) g = guard_values(t, w);
        for (std::size_t p = 0; p < syms.size(); ++p)
            out[p] = {syms[p], t.lookaround() ? g.prefix[p] : -1, t.lookaround() ? g.suffix[p] : -1};
        return out;
    }

    std::vector<View> all_views() const override {
        std::vector<View> out;
        for (int s = 0; s < n_->transducer().num_symbols(); ++s)
            for (auto [x, y] : guard_domain(n_->transducer())) out.push_back({s, x, y});
        return out;
    }

  private:
    std::shared_ptr<const ExplicitNode> n_;
};

// simBlind: simulates T, inlining calls made on the root frontier (after a
// walk to the left endmarker and a walk back to the frontier slot) and calls
// to leaves (by their bounded lookaround output); other calls recurse.
class BlindSimProgram : public Program {
  public:
    enum Kind { Sim, Dispatch, Rewind, Inline, Return };
    using Desc = std::array<int, 6>;  // kind, q, transition, call, slot, inner state

    BlindSimProgram(std::shared_ptr<const ExplicitNode> t, std::shared_ptr<const ForestCache> cache,
                    std::vector<int> sim_child, std::vector<std::vector<int>> normal_child)
        : t_(std::move(t)),
          cache_(std::move(cache)),
          sim_child_(std::move(sim_child)),
          normal_child_(std::move(normal_child)) {
        letters_ = cache_->algebra().letters;
        machines_.push_back(&t_->transducer());
        for (const auto& c : t_->children()) machines_.push_back(&c->transducer());
        for (std::size_t m = 0; m < machines_.size(); ++m) {
            guard_slot_.push_back(machines_[m]->lookaround() ? guarded_++ : -1);
            std::vector<int> map{kLeftEnd, kRightEnd};
            for (const auto& l : letters_) map.push_back(machines_[m]->symbol_of(l));
            symbol_map_.push_back(std::move(map));
        }
        int image = static_cast<int>(cache_->algebra().plain.image().size());
        int h = std::min(3 * image, 17);
        max_slots_ = 1 << (h - 1);
        intern({Sim, t_->transducer().initial(), 0, 0, 0, 0});
    }

    std::string kind() const override { return "simulate"; }
    int initial() const override { return 0; }
    int num_descriptors() const override {
        std::lock_guard<std::mutex> lock(mu_);
        return static_cast<int>(descs_.size());
    }

    std::string describe(int d) const override {
        Desc x = desc(d);
        static const char* names[] = {"sim", "dispatch", "rewind", "inline", "return"};
        std::ostringstream o;
        o << names[x[0]] << '(' << x[1] << ',' << x[2] << ',' << x[3] << ',' << x[4] << ',' << x[5] << ')';
        return o.str();
    }

    Step step(int d, const View& v) const override {
        const Desc x = desc(d);
        const TwoWayTransducer& t = t_->transducer();
        const int sym = v[0], slot = v[1];
        Step st;
        auto go = [&](Desc nx, int move) {
            st.next = intern(nx);
            st.move = move;
            return st;
        };
        switch (x[0]) {
            case Sim: {
                if (sym == kRightEnd && t.is_final(x[1])) {
                    st.halt = true;
                    return st;
                }
                const Transition* tr = find(0, x[1], v);
                if (!tr) break;
                int idx = static_cast<int>(tr - t.transitions().data());
                if (t_->calls_of(idx).empty()) return go({Sim, tr->to, 0, 0, 0, 0}, static_cast<int>(tr->dir));
                return go({Dispatch, 0, idx, 0, 0, 0}, 0);
            }
            case Dispatch: {
                const Transition& tr = t.transitions()[x[2]];
                const auto& calls = t_->calls_of(x[2]);
                if (x[3] == static_cast<int>(calls.size())) return go({Sim, tr.to, 0, 0, 0, 0}, static_cast<int>(tr.dir));
                int ch = calls[x[3]];
                if (slot >= 0) return go({Rewind, 0, x[2], x[3], slot, 0}, 0);
                if (t_->children()[ch]->is_leaf())
                    st.out.push_back({Action::Kind::LeafOutput, "", ch});
                else
                    st.out.push_back({Action::Kind::Call, "", sim_child_[ch]});
                return go({Dispatch, 0, x[2], x[3] + 1, 0, 0}, 0);
            }
            case Rewind: {
                if (sym != kLeftEnd) return go(x, -1);
                int ch = t_->calls_of(x[2])[x[3]];
                return go({Inline, 0, x[2], x[3], x[4], t_->children()[ch]->transducer().initial()}, 0);
            }
            case Inline: {
                int ch = t_->calls_of(x[2])[x[3]];
                const ExplicitNode& c = *t_->children()[ch];
                const TwoWayTransducer& tc = c.transducer();
                if (sym == kRightEnd && tc.is_final(x[5])) return go({Return, 0, x[2], x[3], x[4], 0}, 0);
                const Transition* tr = find(ch + 1, x[5], v);
                if (!tr) break;
                int idx = static_cast<int>(tr - tc.transitions().data());
                if (c.is_leaf()) {
                    if (!tr->output.empty()) st.out.push_back({Action::Kind::Terminal, tr->output, 0});
                } else {
                    for (int g : c.calls_of(idx)) st.out.push_back({Action::Kind::Call, "", normal_child_[ch][g]});
                }
                return go({Inline, 0, x[2], x[3], x[4], tr->to}, static_cast<int>(tr->dir));
            }
            case Return: {
                if (slot != x[4]) return go(x, -1);
                return go({Dispatch, 0, x[2], x[3] + 1, 0, 0}, 0);
            }
        }
        st.reject = true;
        return st;
    }

    std::vector<View> views(const Word& w) const override {
        const int n = static_cast<int>(w.size());
        auto f = cache_->get(w);
        std::vector<View> out(n + 2);
        std::vector<int> slot(n + 2, -1);
        if (!f->empty()) {
            const auto& fro = f->frontier(f->root());
            for (std::size_t s = 0; s < fro.size(); ++s) slot[fro[s]] = static_cast<int>(s);
        }
        std::vector<GuardValues> g(machines_.size());
        for (std::size_t m = 0; m < machines_.size(); ++m)
            if (machines_[m]->lookaround()) g[m] = guard_values(*machines_[m], w);
        for (int p = 0; p <= n + 1; ++p) {
            int sym = p == 0 ? kLeftEnd : p == n + 1 ? kRightEnd : 2 + letter_index(w[p - 1]);
            View v{sym, slot[p]};
            for (std::size_t m = 0; m < machines_.size(); ++m)
                if (machines_[m]->lookaround()) {
                    v.push_back(g[m].prefix[p]);
                    v.push_back(g[m].suffix[p]);
                }
            out[p] = std::move(v);
        }
        return out;
    }

    std::vector<View> all_views() const override {
        std::vector<View> base;
        base.push_back({kLeftEnd, -1});
        base.push_back({kRightEnd, -1});
        for (std::size_t a = 0; a < letters_.size(); ++a)
            for (int s = -1; s < max_slots_; ++s) base.push_back({2 + static_cast<int>(a), s});
        for (const auto* m : machines_) {
            if (!m->lookaround()) continue;
            std::vector<View> next;
            for (const auto& v : base)
                for (auto [x, y] : guard_domain(*m)) {
                    View w = v;
                    w.push_back(x);
                    w.push_back(y);
                    next.push_back(std::move(w));
                }
            base = std::move(next);
        }
        return base;
    }

    std::string leaf_output(int ch, const Word& w) const override {
        const ExplicitNode& c = *t_->children()[ch];
        Run r = run(c.transducer(), w);
        auto f = cache_->get(w);
        std::string out;
        for (std::size_t s = 0; s < r.taken.size(); ++s) {
            const std::string& o = r.taken[s]->output;
            if (o.empty()) continue;
            int pos = r.steps[s].pos;
            const auto& fro = f->frontier(f->root());
            if (!std::binary_search(fro.begin(), fro.end(), pos))
                throw PumpableViolation(c.name() + " produces \"" + o + "\" at position " + std::to_string(pos) +
                                        " outside the root frontier of " + to_string(w));
            out += o;
        }
        return out;
    }

  private:
    const Transition* find(int m, int q, const View& v) const {
        int sym = symbol_map_[m][v[0]];
        if (sym < 0) return nullptr;
        int g = guard_slot_[m];
        return machines_[m]->find(q, sym, g < 0 ? -1 : v[2 + 2 * g], g < 0 ? -1 : v[3 + 2 * g]);
    }

    int letter_index(const Letter& l) const {
        auto it = std::lower_bound(letters_.begin(), letters_.end(), l);
        if (it == letters_.end() || *it != l) throw RunError(RunError::Kind::UnknownLetter, "unknown letter " + to_string(l));
        return static_cast<int>(it - letters_.begin());
    }

    int intern(const Desc& d) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto [it, fresh] = index_.emplace(d, static_cast<int>(descs_.size()));
        if (fresh) descs_.push_back(d);
        return it->second;
    }

    Desc desc(int d) const {
        std::lock_guard<std::mutex> lock(mu_);
        return descs_[d];
    }

    std::shared_ptr<const ExplicitNode> t_;
    std::shared_ptr<const ForestCache> cache_;
    std::vector<int> sim_child_;
    std::vector<std::vector<int>> normal_child_;
    std::vector<Letter> letters_;
    std::vector<const TwoWayTransducer*> machines_;  // T, then its children
    std::vector<int> guard_slot_;
    std::vector<std::vector<int>> symbol_map_;
    int guarded_ = 0;
    int max_slots_ = 1;
    mutable std::mutex mu_;
    mutable std::vector<Desc> descs_;
    mutable std::map<Desc, int> index_;
};

std::shared_ptr<const Node> build_blind(const std::shared_ptr<const ExplicitNode>& t,
                                        const std::shared_ptr<const ForestCache>& cache) {
    std::vector<std::shared_ptr<const Node>> children;
    std::vector<int> sim_child(t->children().size(), -1);
    std::vector<std::vector<int>> normal_child(t->children().size());
    for (std::size_t ch = 0; ch < t->children().size(); ++ch) {
        const auto& c = t->children()[ch];
        if (c->is_leaf()) continue;
        sim_child[ch] = static_cast<int>(children.size());
        children.push_back(build_blind(c, cache));
        for (const auto& g : c->children()) {
            normal_child[ch].push_back(static_cast<int>(children.size()));
            children.push_back(g);
        }
    }
    auto prog = std::make_shared<BlindSimProgram>(t, cache, sim_child, normal_child);
    return std::make_shared<ProgramNode>("simBlind<" + t->name() + ">", prog, std::move(children));
}

// ---- last machines ----

int recent_mark(const Word& v) {
    for (std::size_t p = 0; p < v.size(); ++p)
        if (v[p].marks & kRecent) return static_cast<int>(p) + 1;
    return 0;
}

std::mutex stats_mu;
std::map<int, int> stats;

void record_slices(int height, int n) {
    std::lock_guard<std::mutex> lock(stats_mu);
    int& m = stats[height];
    m = std::max(m, n);
}

// A tape position described relative to the mark i: an endmarker, or a
// frontier position of a node observed by origin(i), shifted by -1, 0 or +1.
struct PosRef {
    int anchor = 0;  // 0: left end, 1: right end, 2: observed frontier
    int up = 0;      // ancestor of origin(i) at this distance
    int side = 0;    // -1, 0, +1: its left sibling, itself, its right sibling
    int slot = 0;    // index in that node's frontier
    int offset = 0;
    auto operator<=>(const PosRef&) const = default;
};

std::optional<PosRef> observed_ref(const Forest& f, int i, int p) {
    if (p < 1 || p > f.length()) return std::nullopt;
    int a = f.origin(i);
    for (int up = 0; a >= 0; ++up, a = f.node(a).parent) {
        for (int side : {0, -1, 1}) {
            int s = a;
            if (side != 0) {
                int par = f.node(a).parent;
                if (par < 0) continue;
                int k = f.node(a).index_in_parent + side;
                const auto& sib = f.node(par).children;
                if (k < 0 || k >= static_cast<int>(sib.size())) continue;
                s = sib[k];
            }
            if (s != f.root() && !f.is_iterable(s)) continue;
            const auto& fro = f.frontier(s);
            auto it = std::lower_bound(fro.begin(), fro.end(), p);
            if (it != fro.end() && *it == p) return PosRef{2, up, side, static_cast<int>(it - fro.begin()), 0};
        }
    }
    return std::nullopt;
}

int resolve(const Forest& f, int i, const PosRef& r) {
    const int n = f.length();
    int base;
    if (r.anchor == 0) {
        base = 0;
    } else if (r.anchor == 1) {
        base = n + 1;
    } else {
        if (i < 1 || i > n) return -1;
        int a = f.origin(i);
        for (int k = 0; k < r.up && a >= 0; ++k) a = f.node(a).parent;
        if (a < 0) return -1;
        int s = a;
        if (r.side != 0) {
            int par = f.node(a).parent;
            if (par < 0) return -1;
            int k = f.node(a).index_in_parent + r.side;
            const auto& sib = f.node(par).children;
            if (k < 0 || k >= static_cast<int>(sib.size())) return -1;
            s = sib[k];
        }
        const auto& fro = f.frontier(s);
        if (r.slot >= static_cast<int>(fro.size())) return -1;
        base = fro[r.slot];
    }
    return base + r.offset;
}

PosRef endpoint_ref(const Forest& f, int i, int p) {
    const int n = f.length();
    auto at = [&](int q) -> std::optional<PosRef> {
        if (q == 0) return PosRef{0, 0, 0, 0, 0};
        if (q == n + 1) return PosRef{1, 0, 0, 0, 0};
        return observed_ref(f, i, q);
    };
    for (int off : {0, 1, -1}) {
        int q = p - off;
        if (q < 0 || q > n + 1) continue;
        if (auto r = at(q)) {
            r->offset = off;
            return *r;
        }
    }
    throw std::logic_error("slice endpoint " + std::to_string(p) + " has no bounded description");
}

struct RunDesc {
    int slice = 0;
    int first_state = 0;
    PosRef first;
    int last_state = 0;
    PosRef last;
    auto operator<=>(const RunDesc&) const = default;
};

struct LastContext {
    std::shared_ptr<const ForestCache> cache;
};

// normalongpeb: runs the original node on the input re-marked at a position
// that the real mark observes.
class PebNode : public Node {
  public:
    PebNode(std::shared_ptr<const ExplicitNode> n, PosRef ref, std::shared_ptr<const LastContext> ctx)
        : n_(std::move(n)), ref_(ref), ctx_(std::move(ctx)), name_(n_->name() + "@peb") {}
    const std::string& name() const override { return name_; }
    int height() const override { return n_->height(); }
    void execute(const Word& v, Emitter& out) const override {
        int i = recent_mark(v);
        Word u = unmark(v);
        auto f = ctx_->cache->get(u);
        int p = resolve(*f, i, ref_);
        auto up = f->ob_up(i);
        if (p < 1 || !std::binary_search(up.begin(), up.end(), p))
            throw std::logic_error(name_ + ": pretend position does not resolve into ObUp");
        n_->execute(mark(u, p).encode(), out);
    }

  private:
    std::shared_ptr<const ExplicitNode> n_;
    PosRef ref_;
    std::shared_ptr<const LastContext> ctx_;
    std::string name_;
};

int sim_last_height(const ExplicitNode& t) {
    int h = 1;
    for (const auto& c : t.children()) {
        if (c->is_leaf()) continue;
        h = std::max(h, 1 + sim_last_height(*c));
        for (const auto& g : c->children()) h = std::max(h, 1 + g->height());
    }
    return h;
}

// simLast: simulates T along a run and slices the run of every callee
// relative to the calling position.
class SimLastNode : public Node {
  public:
    SimLastNode(std::shared_ptr<const ExplicitNode> t, std::optional<RunDesc> desc, std::shared_ptr<const LastContext> ctx)
        : t_(std::move(t)), desc_(desc), ctx_(std::move(ctx)), height_(sim_last_height(*t_)) {
        name_ = "simLast<" + t_->name();
        if (desc_) name_ += "," + std::to_string(desc_->slice);
        name_ += ">";
    }
    const std::string& name() const override { return name_; }
    int height() const override { return height_; }

    void execute(const Word& v, Emitter& out) const override {
        const int i = recent_mark(v);
        const Word u = unmark(v);
        auto f = ctx_->cache->get(u);
        Run rho = run(t_->transducer(), v);
        std::size_t b = 0, e = rho.steps.size();
        if (desc_) {
            auto slices = slicing(rho, *f, i);
            if (desc_->slice >= static_cast<int>(slices.size())) throw std::logic_error(name_ + ": missing slice");
            const Slice& sl = slices[desc_->slice];
            b = sl.begin;
            e = sl.end;
            Config first = rho.steps[b], last = rho.steps[e - 1];
            if (first.state != desc_->first_state || first.pos != resolve(*f, i, desc_->first) ||
                last.state != desc_->last_state || last.pos != resolve(*f, i, desc_->last))
                throw std::logic_error(name_ + ": run descriptor does not match the slice");
        }
        for (std::size_t s = b; s < e && s < rho.taken.size(); ++s) {
            int idx = static_cast<int>(rho.taken[s] - t_->transducer().transitions().data());
            int p = rho.steps[s].pos;
            for (int ch : t_->calls_of(idx)) call(ch, u, *f, p, out);
        }
    }

  private:
    void call(int ch, const Word& u, const Forest& f, int p, Emitter& out) const {
        const auto& c = t_->children()[ch];
        const TwoWayTransducer& tc = c->transducer();
        Run rho = run(tc, mark(u, p).encode());
        auto slices = slicing(rho, f, p);
        record_slices(f.height(), static_cast<int>(slices.size()));
        for (std::size_t j = 0; j < slices.size(); ++j) {
            const Slice& sl = slices[j];
            auto steps = [&](const std::function<void(const Transition&, int, int)>& fn) {
                for (int s = sl.begin; s < sl.end && s < static_cast<int>(rho.taken.size()); ++s)
                    fn(*rho.taken[s], static_cast<int>(rho.taken[s] - tc.transitions().data()), rho.steps[s].pos);
            };
            switch (sl.cls) {
                case SliceClass::Up:
                    // stay at p; calls are redirected to pretend-position copies
                    steps([&](const Transition& tr, int idx, int q) {
                        if (c->is_leaf()) {
                            if (!tr.output.empty()) out.terminal(tr.output);
                            return;
                        }
                        PosRef r = *observed_ref(f, p, q);
                        for (int g : c->calls_of(idx)) out.call(*peb(c->children()[g], r), p);
                    });
                    break;
                case SliceClass::DownOnly:
                    // walk along the slice; calls happen where the callee makes them
                    steps([&](const Transition& tr, int idx, int q) {
                        if (c->is_leaf()) {
                            if (!tr.output.empty()) out.terminal(tr.output);
                            return;
                        }
                        for (int g : c->calls_of(idx)) out.call(*c->children()[g], q);
                    });
                    break;
                case SliceClass::Neither:
                    if (c->is_leaf()) {
                        steps([&](const Transition& tr, int, int q) {
                            if (!tr.output.empty())
                                throw PumpableViolation(c->name() + " produces \"" + tr.output + "\" at position " +
                                                        std::to_string(q) + ", independent of the mark " +
                                                        std::to_string(p) + " on " + to_string(u));
                        });
                    } else {
                        Config first = rho.steps[sl.begin], last = rho.steps[sl.end - 1];
                        RunDesc d{static_cast<int>(j), first.state, endpoint_ref(f, p, first.pos), last.state,
                                  endpoint_ref(f, p, last.pos)};
                        out.call(*sim(ch, d), p);
                    }
                    break;
            }
        }
    }

    const Node* peb(const std::shared_ptr<const ExplicitNode>& g, const PosRef& r) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(g.get(), r);
        auto it = pebs_.find(key);
        if (it == pebs_.end()) it = pebs_.emplace(key, std::make_shared<PebNode>(g, r, ctx_)).first;
        return it->second.get();
    }

    const Node* sim(int ch, const RunDesc& d) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(ch, d);
        auto it = sims_.find(key);
        if (it == sims_.end()) it = sims_.emplace(key, std::make_shared<SimLastNode>(t_->children()[ch], d, ctx_)).first;
        return it->second.get();
    }

    std::shared_ptr<const ExplicitNode> t_;
    std::optional<RunDesc> desc_;
    std::shared_ptr<const LastContext> ctx_;
    int height_;
    std::string name_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<const ExplicitNode*, PosRef>, std::shared_ptr<const Node>> pebs_;
    mutable std::map<std::pair<int, RunDesc>, std::shared_ptr<const Node>> sims_;
};

std::shared_ptr<const PumpingAlgebra> checked_algebra(const PebbleMachine& u, Variant v, const RemoveOptions& opts) {
    if (u.variant != v) throw MachineError(u.name + " is a " + to_string(u.variant) + " machine, not " + to_string(v));
    if (!u.explicit_root()) throw PreconditionError(u.name + ": layer removal needs an explicit machine");
    if (u.height() < 2) throw PreconditionError(u.name + ": height 1 is the floor");
    if (!is_balanced(*u.explicit_root())) throw PreconditionError(u.name + ": layer removal needs a balanced tree");
    if (!opts.check_precondition) return std::make_shared<const PumpingAlgebra>(pumping_algebra(u));
    auto res = is_pumpable(u, opts.pump);
    if (res.status == SearchStatus::Found) throw PreconditionError(u.name + " is pumpable");
    if (res.status == SearchStatus::Inconclusive) throw InconclusiveError(u.name + ": pumpability budget exceeded");
    return res.algebra;
}

PebbleMachine finish(const PebbleMachine& u, std::shared_ptr<const Node> root) {
    PebbleMachine out;
    out.variant = u.variant;
    out.name = u.name + "'";
    out.root = std::move(root);
    out.inputs = input_alphabet(u);
    out.source = u.source ? u.source : std::make_shared<const PebbleMachine>(u);
    out.removals = u.removals + 1;
    if (out.height() != u.height() - 1)
        throw std::logic_error("layer removal produced height " + std::to_string(out.height()) + " from " +
                               std::to_string(u.height()));
    return out;
}

}  // namespace

ProgramNode::ProgramNode(std::string name, std::shared_ptr<const Program> prog,
                         std::vector<std::shared_ptr<const Node>> children)
    : name_(std::move(name)), prog_(std::move(prog)), children_(std::move(children)), height_(node_height(children_)) {}

void ProgramNode::execute(const Word& w, Emitter& out) const {
    interpret(
        name_, prog_->initial(),
        [&](int d, const View& v, Step& scratch) {
            scratch = prog_->step(d, v);
            return &scratch;
        },
        *prog_, children_, w, out);
}

TableNode::TableNode(std::string name, std::shared_ptr<const Program> views,
                     std::vector<std::shared_ptr<const Node>> children, std::map<std::pair<int, View>, Step> table,
                     int states, int initial)
    : name_(std::move(name)),
      prog_(std::move(views)),
      children_(std::move(children)),
      table_(std::move(table)),
      states_(states),
      initial_(initial),
      height_(node_height(children_)) {}

void TableNode::execute(const Word& w, Emitter& out) const {
    interpret(
        name_, initial_,
        [&](int d, const View& v, Step&) -> const Step* {
            auto it = table_.find({d, v});
            return it == table_.end() ? nullptr : &it->second;
        },
        *prog_, children_, w, out);
}

std::shared_ptr<const ProgramNode> normal_program(std::shared_ptr<const ExplicitNode> n) {
    std::vector<std::shared_ptr<const Node>> children(n->children().begin(), n->children().end());
    std::string name = n->name();
    return std::make_shared<ProgramNode>(name, std::make_shared<NormalProgram>(std::move(n)), std::move(children));
}

std::shared_ptr<const TableNode> explicate(const ProgramNode& p, const ExplicateOptions& opts) {
    const Program& prog = p.program();
    const auto views = prog.all_views();
    std::map<std::pair<int, View>, Step> table;
    std::set<int> seen{prog.initial()};
    std::deque<int> todo{prog.initial()};
    std::size_t rows = 0;
    while (!todo.empty()) {
        int d = todo.front();
        todo.pop_front();
        for (const auto& v : views) {
            if (++rows > opts.max_rows) throw MachineError(p.name() + ": descriptor space exceeds the explication cap");
            Step st = prog.step(d, v);
            if (st.reject) continue;
            if (!st.halt && seen.insert(st.next).second) todo.push_back(st.next);
            table.emplace(std::make_pair(d, v), std::move(st));
        }
    }
    return std::make_shared<TableNode>(p.name() + "#", p.program_ptr(), p.children(), std::move(table),
                                       static_cast<int>(seen.size()), prog.initial());
}

namespace {

std::shared_ptr<const Node> explicate_node(const std::shared_ptr<const Node>& n, const ExplicateOptions& opts) {
    if (std::dynamic_pointer_cast<const ExplicitNode>(n)) return n;
    auto p = std::dynamic_pointer_cast<const ProgramNode>(n);
    if (!p) throw MachineError(n->name() + ": only program nodes can be explicated");
    std::vector<std::shared_ptr<const Node>> kids;
    for (const auto& c : p->children()) kids.push_back(explicate_node(c, opts));
    ProgramNode rebuilt(p->name(), p->program_ptr(), kids);
    return explicate(rebuilt, opts);
}

}  // namespace

PebbleMachine explicate(const PebbleMachine& m, const ExplicateOptions& opts) {
    PebbleMachine out = m;
    out.root = explicate_node(m.root, opts);
    return out;
}

PebbleMachine remove_layer_blind(const PebbleMachine& u, const RemoveOptions& opts) {
    auto alg = checked_algebra(u, Variant::Blind, opts);
    auto cache = std::make_shared<const ForestCache>(alg);
    auto root = std::static_pointer_cast<const ExplicitNode>(u.root);
    return finish(u, build_blind(root, cache));
}

PebbleMachine remove_layer_last(const PebbleMachine& u, const RemoveOptions& opts) {
    auto alg = checked_algebra(u, Variant::Last, opts);
    auto ctx = std::make_shared<LastContext>();
    ctx->cache = std::make_shared<const ForestCache>(alg);
    auto root = std::static_pointer_cast<const ExplicitNode>(u.root);
    return finish(u, std::make_shared<SimLastNode>(root, std::nullopt, ctx));
}

PebbleMachine remove_layer(const PebbleMachine& u, const RemoveOptions& opts) {
    switch (u.variant) {
        case Variant::Blind: return remove_layer_blind(u, opts);
        case Variant::Last: return remove_layer_last(u, opts);
        case Variant::LastLast: break;
    }
    throw MachineError("layer removal is not defined for last-last machines");
}

MinimizeResult minimize(const PebbleMachine& m, const PumpOptions& opts) {
    if (m.variant == Variant::LastLast) throw MachineError("minimization is not defined for last-last machines");
    MinimizeResult res;
    res.machine = m;
    const PebbleMachine& base = m.source ? *m.source : m;
    auto certified = [&](int d) {
        auto c = growth_certificate(base, d, opts);
        if (c.status == SearchStatus::Inconclusive) throw InconclusiveError("certificate budget exceeded");
        return c.status == SearchStatus::Found;
    };
    try {
        for (;;) {
            PebbleMachine& cur = res.machine;
            const int h = cur.height();
            res.upper = h;
            if (h == 1) {
                res.log.push_back("height 1");
                break;
            }
            if (cur.explicit_root()) {
                auto p = is_pumpable(cur, opts);
                if (p.status == SearchStatus::Inconclusive) throw InconclusiveError("pumpability budget exceeded");
                if (p.status == SearchStatus::Found) {
                    res.log.push_back("pumpable at height " + std::to_string(h));
                    break;
                }
                res.log.push_back("not pumpable at height " + std::to_string(h) + "; removing a layer");
                RemoveOptions ro;
                ro.pump = opts;
                ro.check_precondition = false;
                cur = remove_layer(cur, ro);
                continue;
            }
            if (certified(h)) {
                res.log.push_back("growth certificate of degree " + std::to_string(h) + " on " + base.name);
                break;
            }
            res.status = MinimizeStatus::Inconclusive;
            res.log.push_back("no certificate of degree " + std::to_string(h) +
                              " and no explicit machine to test at this height");
            break;
        }
    } catch (const InconclusiveError& e) {
        res.status = MinimizeStatus::Inconclusive;
        res.log.push_back(e.what());
    }
    res.upper = res.machine.height();
    if (res.status == MinimizeStatus::Done) {
        res.ell = res.upper;
        res.lower = res.upper;
    } else {
        res.lower = 0;
        for (int d = 1; d <= res.upper; ++d) {
            auto c = growth_certificate(base, d, opts);
            if (c.status != SearchStatus::Found) break;
            res.lower = d;
        }
    }
    return res;
}

Equivalence equivalence_check(const PebbleMachine& a, const PebbleMachine& b, int max_len) {
    auto alpha = input_alphabet(a);
    if (alpha != input_alphabet(b)) throw MachineError("equivalence_check: input alphabets differ");
    Equivalence res;
    Word w;
    std::function<bool(int, int)> rec = [&](int d, int len) -> bool {
        if (d == len) {
            ++res.words;
            std::string x = eval(a, w), y = eval(b, w);
            if (x != y) {
                res.equal = false;
                res.counterexample = w;
                res.left = x;
                res.right = y;
                return true;
            }
            return false;
        }
        for (const auto& l : alpha) {
            w.push_back(l);
            if (rec(d + 1, len)) return true;
            w.pop_back();
        }
        return false;
    };
    for (int len = 0; len <= max_len; ++len)
        if (rec(0, len)) break;
    return res;
}

std::map<int, int> slice_statistics() {
    std::lock_guard<std::mutex> lock(stats_mu);
    return stats;
}

}  // namespace ptk
