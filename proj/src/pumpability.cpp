#include "ptk/pumpability.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ptk {

namespace {

void collect(const ExplicitNode& n, std::vector<const TwoWayTransducer*>& ts, std::vector<Letter>& letters) {
    ts.push_back(&n.transducer());
    for (const auto& l : n.transducer().alphabet()) letters.push_back(l);
    for (const auto& c : n.children()) collect(*c, ts, letters);
}

const ExplicitNode& explicit_of(const PebbleMachine& m) {
    const ExplicitNode* e = m.explicit_root();
    if (!e) throw MachineError(m.name + ": pumpability needs an explicit machine");
    return *e;
}

Word concat(std::initializer_list<const Word*> parts) {
    Word w;
    for (const Word* p : parts) w.insert(w.end(), p->begin(), p->end());
    return w;
}

Letter marked(const Letter& a) { return Letter{a.base, kRecent}; }

int child_index(const ExplicitNode& parent, const ExplicitNode& child) {
    const auto& cs = parent.children();
    for (std::size_t i = 0; i < cs.size(); ++i)
        if (cs[i].get() == &child) return static_cast<int>(i);
    return -1;
}

// Production condition of level j (0-based) of a chain on a concrete context.
bool production_holds(const std::vector<const ExplicitNode*>& chain, int j, const Word& w, int pos) {
    std::vector<std::string> pieces;
    try {
        pieces = production_pieces(chain[j]->transducer(), w, pos);
    } catch (const RunError&) {
        return false;
    }
    if (j + 1 < static_cast<int>(chain.size()))
        return chain[j]->call_counts(pieces)[child_index(*chain[j], *chain[j + 1])] > 0;
    return std::any_of(pieces.begin(), pieces.end(), [](const std::string& s) { return !s.empty(); });
}

struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = v.size();
        for (int x : v) h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    }
};

struct BudgetExceeded {};

struct Triple {
    int l, a, r, e;
};

class Search {
  public:
    Search(const PebbleMachine& m, Variant flavor, int degree, const PumpOptions& opts)
        : machine_(m), flavor_(flavor), degree_(degree), opts_(opts) {
        alg_ = std::make_shared<PumpingAlgebra>(pumping_algebra(m));
        const FiniteMonoid& t = alg_->mu.target();
        image_ = alg_->plain.image();
        for (const auto& a : alg_->letters) {
            letter_value_.push_back(alg_->mu.image_of(a));
            marked_value_.push_back(alg_->mu.has_letter(marked(a)) ? alg_->mu.image_of(marked(a)) : -1);
        }
        for (int l : image_)
            for (int a = 0; a < static_cast<int>(alg_->letters.size()); ++a)
                for (int r : image_) {
                    int e = t.mul(t.mul(l, letter_value_[a]), r);
                    if (t.is_idempotent(e)) triples_.push_back({l, a, r, e});
                }
    }

    PumpabilityResult run() {
        PumpabilityResult res;
        res.algebra = alg_;
        const ExplicitNode& root = explicit_of(machine_);
        k_ = root.height();
        try {
            for (const auto& chain : branches(root)) {
                if (static_cast<int>(chain.size()) != k_) continue;
                chain_ = chain;
                if (strict()) {
                    anchor_.assign(k_, false);
                    std::vector<int> sigma(k_);
                    std::iota(sigma.begin(), sigma.end(), 1);
                    do {
                        if (try_sigma(sigma)) return found(res);
                    } while (std::next_permutation(sigma.begin(), sigma.end()));
                    continue;
                }
                // fewest anchors first, then sigma as a k-ary counter
                for (int anchors = 0; anchors < k_; ++anchors) {
                    std::vector<bool> anchor(k_, false);
                    std::fill(anchor.begin(), anchor.begin() + anchors, true);
                    std::sort(anchor.begin(), anchor.end());
                    do {
                        anchor_ = anchor;
                        std::vector<int> sigma(k_, 1);
                        for (;;) {
                            if (admissible(sigma) && try_sigma(sigma)) return found(res);
                            int j = k_ - 1;
                            while (j >= 0 && sigma[j] == k_) sigma[j--] = 1;
                            if (j < 0) break;
                            ++sigma[j];
                        }
                    } while (std::next_permutation(anchor.begin(), anchor.end()));
                }
            }
        } catch (const BudgetExceeded&) {
            res.status = SearchStatus::Inconclusive;
            res.steps = steps_;
            return res;
        }
        res.status = SearchStatus::Absent;
        res.steps = steps_;
        return res;
    }

  private:
    bool strict() const { return degree_ < 0; }

    PumpabilityResult& found(PumpabilityResult& res) {
        res.status = SearchStatus::Found;
        res.witness = witness();
        res.steps = steps_;
        return res;
    }

    bool admissible(const std::vector<int>& sigma) const {
        PumpabilityWitness w;
        w.flavor = flavor_;
        w.sigma = sigma;
        w.anchor = anchor_;
        return w.degree() >= degree_;
    }

    struct Level {
        bool after = false;  // past the hole
        int x = 0;           // prefix value, or the left context once past the hole
        int a = -1;
        int y = 0;  // right context so far
        Word wx, wy;
    };

    bool try_sigma(const std::vector<int>& sigma) {
        sigma_ = sigma;
        hole_.assign(k_, 0);
        mark_.assign(k_, 0);
        for (int j = 0; j < k_; ++j) {
            hole_[j] = sigma[j];
            if (flavor_ == Variant::Last && j > 0) mark_[j] = sigma[j - 1];
        }
        failed_.clear();
        m_choice_.assign(k_ + 1, 0);
        block_choice_.assign(k_, 0);
        const int id = alg_->mu.target().identity();
        std::vector<Level> levels(k_);
        for (auto& lv : levels) lv.x = id;
        return dfs(0, levels);
    }

    void append(Level& lv, int v, const Word& w) const {
        const FiniteMonoid& t = alg_->mu.target();
        if (lv.after) {
            lv.y = t.mul(lv.y, v);
            lv.wy.insert(lv.wy.end(), w.begin(), w.end());
        } else {
            lv.x = t.mul(lv.x, v);
            lv.wx.insert(lv.wx.end(), w.begin(), w.end());
        }
    }

    const Word& wit(int x) const { return *alg_->plain.witness(x); }
    int num_letters() const { return static_cast<int>(alg_->letters.size()); }

    std::vector<int> key(int stage, const std::vector<Level>& levels) const {
        std::vector<int> k{stage};
        for (const auto& lv : levels) {
            k.push_back(lv.after ? 1 : 0);
            k.push_back(lv.x);
            k.push_back(lv.a);
            k.push_back(lv.y);
        }
        return k;
    }

    bool dfs(int stage, const std::vector<Level>& levels) {
        auto kk = key(stage, levels);
        if (failed_.count(kk)) return false;
        if (++steps_ > opts_.budget) throw BudgetExceeded{};
        bool ok = stage % 2 == 0 ? choose_m(stage, levels) : choose_block(stage, levels);
        if (!ok) failed_.insert(std::move(kk));
        return ok;
    }

    bool choose_m(int stage, const std::vector<Level>& levels) {
        int i = stage / 2;
        for (int x : image_) {
            std::vector<Level> next = levels;
            for (auto& lv : next) append(lv, x, wit(x));
            m_choice_[i] = x;
            if (i == k_) {
                if (++steps_ > opts_.budget) throw BudgetExceeded{};
                if (all_hold(next)) return true;
            } else if (dfs(stage + 1, next)) {
                return true;
            }
        }
        return false;
    }

    bool choose_block(int stage, const std::vector<Level>& levels) {
        int p = (stage + 1) / 2;  // 1-based block
        const FiniteMonoid& t = alg_->mu.target();
        if (anchor_[p - 1]) {
            for (int a = 0; a < static_cast<int>(alg_->letters.size()); ++a) {
                const Letter& c = alg_->letters[a];
                std::vector<Level> next = levels;
                bool usable = true;
                for (int j = 0; j < k_; ++j) {
                    Level& lv = next[j];
                    if (hole_[j] == p) {
                        if (mark_[j] == p && marked_value_[a] < 0) usable = false;
                        lv.after = true;
                        lv.a = mark_[j] == p ? a + num_letters() : a;
                        lv.y = t.identity();
                    } else if (mark_[j] == p) {
                        if (marked_value_[a] < 0) usable = false;
                        else append(lv, marked_value_[a], Word{marked(c)});
                    } else {
                        append(lv, letter_value_[a], Word{c});
                    }
                }
                if (!usable) continue;
                block_choice_[p - 1] = a;
                if (dfs(stage + 1, next)) return true;
            }
            return false;
        }
        for (std::size_t ti = 0; ti < triples_.size(); ++ti) {
            const Triple& tr = triples_[ti];
            const Letter& c = alg_->letters[tr.a];
            Word mid{c};
            Word we = concat({&wit(tr.l), &mid, &wit(tr.r)});
            std::vector<Level> next = levels;
            bool usable = true;
            for (int j = 0; j < k_; ++j) {
                Level& lv = next[j];
                if (hole_[j] == p) {
                    if (mark_[j] == p && marked_value_[tr.a] < 0) {
                        usable = false;
                        break;
                    }
                    append(lv, tr.e, we);
                    append(lv, tr.l, wit(tr.l));
                    lv.after = true;
                    lv.a = mark_[j] == p ? tr.a + num_letters() : tr.a;
                    lv.y = t.mul(tr.r, tr.e);
                    lv.wy = concat({&wit(tr.r), &we});
                } else if (mark_[j] == p) {
                    if (marked_value_[tr.a] < 0) {
                        usable = false;
                        break;
                    }
                    int v = t.mul(t.mul(t.mul(tr.e, tr.l), marked_value_[tr.a]), t.mul(tr.r, tr.e));
                    Word mc{marked(c)};
                    append(lv, v, concat({&we, &wit(tr.l), &mc, &wit(tr.r), &we}));
                } else {
                    append(lv, tr.e, we);
                }
            }
            if (!usable) continue;
            block_choice_[p - 1] = static_cast<int>(ti);
            if (dfs(stage + 1, next)) return true;
        }
        return false;
    }

    bool all_hold(const std::vector<Level>& levels) {
        for (int j = 0; j < k_; ++j)
            if (!holds(j, levels[j])) return false;
        return true;
    }

    bool holds(int j, const Level& lv) {
        std::vector<int> ck{j, lv.x, lv.a, lv.y};
        auto it = cond_.find(ck);
        if (it != cond_.end()) return it->second;
        Word w = lv.wx;
        w.push_back(lv.a < num_letters() ? alg_->letters[lv.a] : marked(alg_->letters[lv.a - num_letters()]));
        w.insert(w.end(), lv.wy.begin(), lv.wy.end());
        bool v = production_holds(chain_, j, w, static_cast<int>(lv.wx.size()) + 1);
        cond_.emplace(std::move(ck), v);
        return v;
    }

    PumpabilityWitness witness() const {
        PumpabilityWitness w;
        w.flavor = flavor_;
        for (const auto* n : chain_) w.chain.push_back(n->name());
        w.m = m_choice_;
        w.sigma = sigma_;
        w.anchor = anchor_;
        const int id = alg_->mu.target().identity();
        for (int p = 0; p < k_; ++p) {
            if (anchor_[p]) {
                w.l.push_back(id);
                w.r.push_back(id);
                w.letters.push_back(alg_->letters[block_choice_[p]]);
            } else {
                const Triple& tr = triples_[block_choice_[p]];
                w.l.push_back(tr.l);
                w.r.push_back(tr.r);
                w.letters.push_back(alg_->letters[tr.a]);
            }
        }
        return w;
    }

    const PebbleMachine& machine_;
    Variant flavor_;
    int degree_;
    PumpOptions opts_;
    std::shared_ptr<PumpingAlgebra> alg_;
    std::vector<int> image_;
    std::vector<int> letter_value_, marked_value_;
    std::vector<Triple> triples_;

    int k_ = 0;
    std::vector<const ExplicitNode*> chain_;
    std::vector<bool> anchor_;
    std::vector<int> sigma_, hole_, mark_;
    std::vector<int> m_choice_, block_choice_;
    std::unordered_set<std::vector<int>, VecHash> failed_;
    std::unordered_map<std::vector<int>, bool, VecHash> cond_;
    std::uint64_t steps_ = 0;
};

PumpabilityResult search(const PebbleMachine& m, Variant flavor, int degree, const PumpOptions& opts) {
    if (m.variant != flavor)
        throw MachineError(m.name + " is a " + to_string(m.variant) + " machine, not " + to_string(flavor));
    if (degree > m.height()) throw MachineError("certificate degree out of range");
    return Search(m, flavor, degree, opts).run();
}

}  // namespace

PumpingAlgebra pumping_algebra(const PebbleMachine& m, std::size_t cap) {
    std::vector<const TwoWayTransducer*> ts;
    std::vector<Letter> letters;
    collect(explicit_of(m), ts, letters);
    std::sort(letters.begin(), letters.end());
    letters.erase(std::unique(letters.begin(), letters.end()), letters.end());
    MonoidMorphism mu = transition_morphism(ts, letters, cap);
    std::vector<Letter> plain;
    std::vector<int> images;
    for (const auto& l : letters)
        if (!l.marks) {
            plain.push_back(l);
            images.push_back(mu.image_of(l));
        }
    MonoidMorphism restricted(plain, mu.target_ptr(), images);
    return PumpingAlgebra{std::move(mu), std::move(restricted), plain};
}

int PumpabilityWitness::pumped() const {
    return static_cast<int>(std::count(anchor.begin(), anchor.end(), false));
}

bool PumpabilityWitness::strict() const {
    std::vector<int> s = sigma;
    std::sort(s.begin(), s.end());
    for (int j = 0; j < static_cast<int>(s.size()); ++j)
        if (s[j] != j + 1) return false;
    return pumped() == static_cast<int>(anchor.size());
}

int PumpabilityWitness::degree() const {
    int d = 0;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
        if (anchor[sigma[j] - 1]) continue;
        if (flavor != Variant::Blind && j > 0 && sigma[j] == sigma[j - 1]) continue;
        ++d;
    }
    return d;
}

int PumpabilityWitness::e(const FiniteMonoid& target, const MonoidMorphism& mu, int block) const {
    return target.mul(target.mul(l[block], mu.image_of(letters[block])), r[block]);
}

std::string to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::Found: return "yes";
        case SearchStatus::Absent: return "no";
        case SearchStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

PumpabilityResult is_pumpable_blind(const PebbleMachine& m, const PumpOptions& opts) {
    return search(m, Variant::Blind, -1, opts);
}

PumpabilityResult is_pumpable_last(const PebbleMachine& m, const PumpOptions& opts) {
    return search(m, Variant::Last, -1, opts);
}

PumpabilityResult is_pumpable(const PebbleMachine& m, const PumpOptions& opts) {
    if (m.variant == Variant::LastLast) throw MachineError("pumpability is not defined for last-last machines");
    return search(m, m.variant, -1, opts);
}

PumpabilityResult growth_certificate(const PebbleMachine& m, int degree, const PumpOptions& opts) {
    if (m.variant == Variant::LastLast) throw MachineError("certificates are not defined for last-last machines");
    if (degree < 1) throw MachineError("certificate degree must be positive");
    return search(m, m.variant, degree, opts);
}

std::vector<std::string> recheck(const PebbleMachine& m, const PumpingAlgebra& alg, const PumpabilityWitness& w) {
    std::vector<std::string> bad;
    const FiniteMonoid& t = alg.mu.target();
    const int k = w.k();
    if (static_cast<int>(w.m.size()) != k + 1 || static_cast<int>(w.l.size()) != k ||
        static_cast<int>(w.r.size()) != k || static_cast<int>(w.sigma.size()) != k ||
        static_cast<int>(w.anchor.size()) != k) {
        bad.push_back("field sizes disagree");
        return bad;
    }
    auto in_plain = [&](int x) { return x >= 0 && x < t.size() && alg.plain.in_image(x); };
    for (int i = 0; i <= k; ++i)
        if (!in_plain(w.m[i])) bad.push_back("m" + std::to_string(i) + " is not in mu(A*)");
    for (int p = 0; p < k; ++p) {
        if (!in_plain(w.l[p]) || !in_plain(w.r[p])) bad.push_back("block " + std::to_string(p + 1) + " outside mu(A*)");
        if (!w.anchor[p] && !t.is_idempotent(w.e(t, alg.mu, p)))
            bad.push_back("e" + std::to_string(p + 1) + " is not idempotent");
    }
    if (!bad.empty()) return bad;

    // Chain from names.
    std::vector<const ExplicitNode*> chain;
    const ExplicitNode* cur = m.explicit_root();
    for (int j = 0; j < k; ++j) {
        if (!cur || cur->name() != w.chain[j]) {
            bad.push_back("chain does not follow the machine tree");
            return bad;
        }
        chain.push_back(cur);
        if (j + 1 < k) {
            const ExplicitNode* next = nullptr;
            for (const auto& c : cur->children())
                if (c->name() == w.chain[j + 1]) next = c.get();
            cur = next;
        }
    }
    if (!chain.back()->is_leaf()) bad.push_back("chain does not end at a leaf");

    auto W = [&](int x) { return *alg.plain.witness(x); };
    // Block words, 1-based block index.
    auto e_word = [&](int p) {
        Word u = W(w.l[p - 1]);
        u.push_back(w.letters[p - 1]);
        Word rr = W(w.r[p - 1]);
        u.insert(u.end(), rr.begin(), rr.end());
        return u;
    };
    auto M = [&](int i, int j) {
        Word u = W(w.m[i]);
        for (int s = i + 1; s <= j; ++s) {
            Word e = e_word(s);
            Word ms = W(w.m[s]);
            u.insert(u.end(), e.begin(), e.end());
            u.insert(u.end(), ms.begin(), ms.end());
        }
        return u;
    };
    // e l [x] r e, or [x] alone for an anchor; returns the offset of x.
    auto around = [&](int p, const Letter& x, Word& out) {
        if (w.anchor[p - 1]) {
            out.push_back(x);
            return static_cast<int>(out.size());
        }
        Word e = e_word(p), lw = W(w.l[p - 1]), rw = W(w.r[p - 1]);
        out.insert(out.end(), e.begin(), e.end());
        out.insert(out.end(), lw.begin(), lw.end());
        out.push_back(x);
        int at = static_cast<int>(out.size());
        out.insert(out.end(), rw.begin(), rw.end());
        out.insert(out.end(), e.begin(), e.end());
        return at;
    };
    auto add = [](Word& out, const Word& x) { out.insert(out.end(), x.begin(), x.end()); };
    auto sg = [&](int j) { return w.sigma[j - 1]; };  // 1-based level

    for (int j = 1; j <= k; ++j) {
        Word c;
        int hole = 0;
        if (!w.strict()) {
            // m_0 X_1 m_1 ... X_k m_k with each block in its role for level j
            int mk = w.flavor == Variant::Blind || j == 1 ? 0 : sg(j - 1);
            bool known = true;
            add(c, W(w.m[0]));
            for (int p = 1; p <= k; ++p) {
                const Letter& a = w.letters[p - 1];
                if (p == sg(j)) {
                    Letter x = p == mk ? marked(a) : a;
                    known = known && alg.mu.has_letter(x);
                    hole = around(p, x, c);
                } else if (p == mk) {
                    known = known && alg.mu.has_letter(marked(a));
                    around(p, marked(a), c);
                } else if (w.anchor[p - 1]) {
                    c.push_back(a);
                } else {
                    add(c, e_word(p));
                }
                add(c, W(w.m[p]));
            }
            if (!known) {
                bad.push_back("condition " + std::to_string(j) + " needs a marked letter unknown to the machine");
                continue;
            }
        } else if (w.flavor == Variant::Blind || j == 1) {
            add(c, M(0, sg(j) - 1));
            hole = around(sg(j), w.letters[sg(j) - 1], c);
            add(c, M(sg(j), k));
        } else {
            int s0 = sg(j - 1), s1 = sg(j);
            Letter bar = marked(w.letters[s0 - 1]);
            if (!alg.mu.has_letter(bar)) {
                bad.push_back("marked letter " + to_string(bar) + " unknown to the machine");
                continue;
            }
            if (s0 < s1) {
                add(c, M(0, s0 - 1));
                around(s0, bar, c);
                add(c, M(s0, s1 - 1));
                hole = around(s1, w.letters[s1 - 1], c);
                add(c, M(s1, k));
            } else {
                add(c, M(0, s1 - 1));
                hole = around(s1, w.letters[s1 - 1], c);
                add(c, M(s1, s0 - 1));
                around(s0, bar, c);
                add(c, M(s0, k));
            }
        }
        if (!production_holds(chain, j - 1, c, hole))
            bad.push_back("condition " + std::to_string(j) + " fails on " + to_string(c) + " at " + std::to_string(hole));
    }
    return bad;
}

Word PumpingFamily::at(int x) const {
    Word out = v[0];
    for (std::size_t p = 0; p < u.size(); ++p) {
        int times = anchor[p] ? 1 : x;
        for (int i = 0; i < times; ++i) out.insert(out.end(), u[p].begin(), u[p].end());
        out.insert(out.end(), v[p + 1].begin(), v[p + 1].end());
    }
    return out;
}

PumpingFamily pumping_family(const PumpabilityWitness& w, const PumpingAlgebra& alg) {
    PumpingFamily f;
    auto W = [&](int x) {
        const auto& o = alg.plain.witness(x);
        if (!o) throw AlgebraError("pumping_family: element without witness");
        return *o;
    };
    for (int x : w.m) f.v.push_back(W(x));
    for (int p = 0; p < w.k(); ++p) {
        Word u = W(w.l[p]);
        u.push_back(w.letters[p]);
        Word r = W(w.r[p]);
        u.insert(u.end(), r.begin(), r.end());
        f.u.push_back(std::move(u));
    }
    f.anchor = w.anchor;
    return f;
}

std::string audit_record(const PumpabilityWitness& w, const PumpingAlgebra& alg) {
    std::ostringstream out;
    auto elem = [&](const std::string& tag, int x) {
        out << tag << ' ' << x << " \"" << to_string(*alg.plain.witness(x)) << "\"\n";
    };
    out << "flavor " << to_string(w.flavor) << '\n';
    out << "chain";
    for (const auto& n : w.chain) out << ' ' << n;
    out << "\nsigma";
    for (int s : w.sigma) out << ' ' << s;
    out << '\n';
    for (int i = 0; i < static_cast<int>(w.m.size()); ++i) elem("m" + std::to_string(i), w.m[i]);
    for (int p = 0; p < w.k(); ++p) {
        std::string n = std::to_string(p + 1);
        if (w.anchor[p]) {
            out << "anchor" << n << ' ' << to_string(w.letters[p]) << '\n';
            continue;
        }
        elem("l" + n, w.l[p]);
        out << "a" << n << ' ' << to_string(w.letters[p]) << '\n';
        elem("r" + n, w.r[p]);
    }
    out << "reading e_j = l_j mu(a_j) r_j\n";
    if (w.flavor == Variant::Last) {
        out << "reading C_1 uses r_sigma(1)\n";
        out << "reading C_(j+1) with sigma(j) > sigma(j+1) starts with M_(0,sigma(j+1)-1)\n";
    }
    return out.str();
}

}  // namespace ptk
