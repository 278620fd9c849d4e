#include "ptk/forest.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace ptk {

namespace {

const char* const kOpen = "\xE2\x9F\xA8";   // ⟨
const char* const kClose = "\xE2\x9F\xA9";  // ⟩

}  // namespace

Forest::Forest(Word word, std::vector<ForestNode> nodes) : word_(std::move(word)), nodes_(std::move(nodes)) {
    const int n = length();
    leaf_of_.assign(n + 2, -1);
    origin_.assign(n + 2, -1);
    frontier_.assign(nodes_.size(), {});
    if (nodes_.empty()) {
        if (n != 0) throw ForestError("empty forest over a nonempty word");
        return;
    }
    std::vector<int> height(nodes_.size(), 1);
    for (int t = size() - 1; t >= 0; --t) {
        auto& nd = nodes_[t];
        if (nd.is_leaf()) {
            if (nd.first != nd.last || nd.first < 1 || nd.first > n) throw ForestError("malformed leaf");
            if (leaf_of_[nd.first] >= 0) throw ForestError("two leaves at one position");
            leaf_of_[nd.first] = t;
            frontier_[t] = {nd.first};
        } else {
            for (int c : nd.children) {
                if (c <= t || c >= size()) throw ForestError("children must follow their parent");
                height[t] = std::max(height[t], height[c] + 1);
            }
            const auto& a = frontier_[nd.children.front()];
            const auto& b = frontier_[nd.children.back()];
            std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(frontier_[t]));
            if (nd.children.size() == 1) frontier_[t].erase(std::unique(frontier_[t].begin(), frontier_[t].end()), frontier_[t].end());
        }
    }
    height_ = height[0];
    for (int p = 1; p <= n; ++p) {
        if (leaf_of_[p] < 0) throw ForestError("position without leaf");
        int t = leaf_of_[p];
        while (t != 0 && !is_iterable(t)) t = nodes_[t].parent;
        origin_[p] = t;
    }
}

bool Forest::is_iterable(int t) const {
    const auto& nd = nodes_[t];
    if (nd.parent < 0) return false;
    int siblings = static_cast<int>(nodes_[nd.parent].children.size());
    return nd.index_in_parent > 0 && nd.index_in_parent < siblings - 1;
}

bool Forest::is_ancestor(int a, int t) const {
    while (t >= 0) {
        if (t == a) return true;
        t = nodes_[t].parent;
    }
    return false;
}

NodePath Forest::path(int t) const {
    NodePath p;
    while (nodes_[t].parent >= 0) {
        p.push_back(nodes_[t].index_in_parent);
        t = nodes_[t].parent;
    }
    std::reverse(p.begin(), p.end());
    return p;
}

int Forest::at(const NodePath& p) const {
    if (nodes_.empty()) throw ForestError("empty forest has no nodes");
    int t = 0;
    for (int i : p) {
        if (i < 0 || i >= static_cast<int>(nodes_[t].children.size())) throw ForestError("bad node path");
        t = nodes_[t].children[i];
    }
    return t;
}

std::vector<int> Forest::iterable_nodes() const {
    std::vector<int> out;
    for (int t = 0; t < size(); ++t)
        if (is_iterable(t)) out.push_back(t);
    return out;
}

std::vector<int> Forest::skeleton(int t) const {
    std::vector<int> out{t};
    const auto& nd = nodes_[t];
    if (nd.is_leaf()) return out;
    for (int c : {nd.children.front(), nd.children.back()}) {
        auto s = skeleton(c);
        out.insert(out.end(), s.begin(), s.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int Forest::origin(int pos) const {
    if (pos < 1 || pos > length()) throw ForestError("origin: position out of range");
    return origin_[pos];
}

bool Forest::observes(int t, int t2) const {
    for (int a = t; a >= 0; a = nodes_[a].parent) {
        if (a == t2) return true;
        int p = nodes_[a].parent;
        if (p >= 0 && nodes_[t2].parent == p && std::abs(nodes_[t2].index_in_parent - nodes_[a].index_in_parent) == 1)
            return true;
    }
    return false;
}

std::vector<int> Forest::observed_by(int t) const {
    std::vector<int> out;
    for (int a = t; a >= 0; a = nodes_[a].parent) {
        out.push_back(a);
        int p = nodes_[a].parent;
        if (p < 0) continue;
        int k = nodes_[a].index_in_parent;
        const auto& sib = nodes_[p].children;
        if (k > 0) out.push_back(sib[k - 1]);
        if (k + 1 < static_cast<int>(sib.size())) out.push_back(sib[k + 1]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int> Forest::ob_up(int pos) const {
    std::vector<int> out;
    for (int s : observed_by(origin(pos)))
        if (s == 0 || is_iterable(s)) out.insert(out.end(), frontier_[s].begin(), frontier_[s].end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> Forest::ob_do(int pos) const {
    std::vector<int> out;
    int t = origin(pos);
    for (int y = 1; y <= length(); ++y)
        if (observes(origin_[y], t)) out.push_back(y);
    return out;
}

Forest build_forest(const MonoidMorphism& mu, const Word& u) {
    const int n = static_cast<int>(u.size());
    if (n == 0) return Forest(u, {});
    const auto& m = mu.target();
    constexpr int kInf = std::numeric_limits<int>::max() / 4;
    auto idx = [n](int i, int k) { return static_cast<std::size_t>(i) * n + k; };
    std::vector<int> v(static_cast<std::size_t>(n) * n), h(v.size(), kInf), q1(v.size(), kInf), q2(v.size(), kInf),
        q3(v.size(), kInf), split(v.size(), -1), arg2(v.size(), -1), arg3(v.size(), -1);
    std::vector<char> flat(v.size(), 0), single(v.size(), 0);
    for (int i = 0; i < n; ++i) {
        int x = m.identity();
        for (int k = i; k < n; ++k) {
            x = m.mul(x, mu.image_of(u[k]));
            v[idx(i, k)] = x;
        }
    }
    for (int len = 1; len <= n; ++len) {
        for (int i = 0; i + len - 1 < n; ++i) {
            int k = i + len - 1;
            auto at = idx(i, k);
            int e = v[at];
            bool idem = m.is_idempotent(e);
            if (len == 1) {
                h[at] = 1;
            } else {
                if (idem) {
                    for (int mm = i; mm < k; ++mm) {
                        if (v[idx(i, mm)] != e || v[idx(mm + 1, k)] != e) continue;
                        int right = h[idx(mm + 1, k)];
                        int c2 = std::max(q1[idx(i, mm)], right);
                        if (c2 < q2[at]) q2[at] = c2, arg2[at] = mm;
                        int c3 = std::max(q2[idx(i, mm)], right);
                        if (c3 < q3[at]) q3[at] = c3, arg3[at] = mm;
                    }
                }
                for (int mm = i; mm < k; ++mm) {
                    int c = 1 + std::max(h[idx(i, mm)], h[idx(mm + 1, k)]);
                    if (c < h[at]) h[at] = c, split[at] = mm;
                }
                if (q3[at] < kInf && 1 + q3[at] <= h[at]) h[at] = 1 + q3[at], flat[at] = 1;
            }
            if (idem) {
                if (h[at] <= q2[at]) q1[at] = h[at], single[at] = 1;
                else q1[at] = q2[at];
            }
        }
    }
    std::vector<ForestNode> nodes;
    // Children of an idempotent node covering [i:k]; c = minimum child count (1, 2 or 3).
    std::function<void(int, int, int, std::vector<std::pair<int, int>>&)> pieces =
        [&](int i, int k, int c, std::vector<std::pair<int, int>>& out) {
            auto at = idx(i, k);
            if (c == 1) {
                if (single[at]) {
                    out.push_back({i, k});
                    return;
                }
                c = 2;
            }
            int mm = c == 2 ? arg2[at] : arg3[at];
            pieces(i, mm, c - 1, out);
            out.push_back({mm + 1, k});
        };
    std::function<int(int, int, int, int, int)> emit = [&](int i, int k, int parent, int index, int depth) {
        int t = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[t].first = i + 1;
        nodes[t].last = k + 1;
        nodes[t].value = v[idx(i, k)];
        nodes[t].parent = parent;
        nodes[t].index_in_parent = index;
        nodes[t].depth = depth;
        if (i == k) return t;
        std::vector<std::pair<int, int>> parts;
        if (flat[idx(i, k)]) pieces(i, k, 3, parts);
        else parts = {{i, split[idx(i, k)]}, {split[idx(i, k)] + 1, k}};
        for (std::size_t c = 0; c < parts.size(); ++c) {
            int ch = emit(parts[c].first, parts[c].second, t, static_cast<int>(c), depth + 1);
            nodes[t].children.push_back(ch);
        }
        return t;
    };
    emit(0, n - 1, -1, 0, 0);
    return Forest(u, std::move(nodes));
}

std::vector<std::string> forest_violations(const MonoidMorphism& mu, const Forest& f) {
    std::vector<std::string> bad;
    const auto& m = mu.target();
    std::string spelled;
    for (int t = 0; t < f.size(); ++t) {
        const auto& nd = f.node(t);
        if (nd.is_leaf()) {
            if (nd.value != mu.image_of(f.word()[nd.first - 1])) bad.push_back("leaf value differs from its letter");
            continue;
        }
        int prod = m.identity();
        int expect = nd.first;
        for (int c : nd.children) {
            const auto& cn = f.node(c);
            prod = m.mul(prod, cn.value);
            if (cn.first != expect) bad.push_back("children do not tile their parent");
            expect = cn.last + 1;
        }
        if (expect != nd.last + 1) bad.push_back("children do not tile their parent");
        if (prod != nd.value) bad.push_back("node value is not the product of its children");
        if (nd.children.size() >= 3) {
            if (!m.is_idempotent(nd.value)) bad.push_back("node with 3+ children over a non-idempotent value");
            for (int c : nd.children)
                if (f.node(c).value != nd.value) bad.push_back("node with 3+ children has a child of another value");
        }
    }
    Word leaves;
    for (int t = 0; t < f.size(); ++t)
        if (f.node(t).is_leaf()) leaves.push_back(f.word()[f.node(t).first - 1]);
    if (f.size() > 0 && (f.node(0).first != 1 || f.node(0).last != f.length()))
        bad.push_back("root does not span the word");
    if (leaves != f.word()) bad.push_back("leaves do not spell the word");
    return bad;
}

bool verify_forest(const MonoidMorphism& mu, const Forest& f) { return forest_violations(mu, f).empty(); }

std::string to_brackets(const Forest& f) {
    if (f.empty()) return "";
    std::string out;
    std::function<void(int)> rec = [&](int t) {
        const auto& nd = f.node(t);
        if (nd.is_leaf()) {
            out += to_string(f.word()[nd.first - 1]);
            return;
        }
        out += kOpen;
        for (int c : nd.children) rec(c);
        out += kClose;
    };
    rec(0);
    return out;
}

Forest parse_brackets(const MonoidMorphism& mu, const std::string& text) {
    std::size_t p = 0;
    Word word;
    std::vector<ForestNode> nodes;
    auto starts = [&](const char* tok) { return text.compare(p, 3, tok) == 0; };
    std::function<int(int, int, int)> tree = [&](int parent, int index, int depth) -> int {
        if (p >= text.size()) throw ForestError("unexpected end of forest text");
        int t = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[t].parent = parent;
        nodes[t].index_in_parent = index;
        nodes[t].depth = depth;
        if (starts(kOpen)) {
            p += 3;
            int first = static_cast<int>(word.size()) + 1;
            std::vector<int> ch;
            while (!starts(kClose)) {
                if (p >= text.size()) throw ForestError("unbalanced brackets in forest text");
                ch.push_back(tree(t, static_cast<int>(ch.size()), depth + 1));
            }
            p += 3;
            if (ch.empty()) throw ForestError("empty node in forest text");
            int val = mu.target().identity();
            for (int c : ch) val = mu.target().mul(val, nodes[c].value);
            nodes[t].children = ch;
            nodes[t].first = first;
            nodes[t].last = static_cast<int>(word.size());
            nodes[t].value = val;
            return t;
        }
        if (starts(kClose)) throw ForestError("unbalanced brackets in forest text");
        std::size_t q = p + 1;
        while (q < text.size() && text[q] == '!') ++q;
        Word l = parse_word(text.substr(p, q - p));
        p = q;
        word.push_back(l[0]);
        nodes[t].first = nodes[t].last = static_cast<int>(word.size());
        nodes[t].value = mu.image_of(l[0]);
        return t;
    };
    if (text.empty()) return Forest(Word{}, {});
    tree(-1, 0, 0);
    if (p != text.size()) throw ForestError("trailing text after forest");
    return Forest(word, std::move(nodes));
}

std::string to_string(SliceClass c) {
    switch (c) {
        case SliceClass::Up: return "up";
        case SliceClass::DownOnly: return "down-only";
        case SliceClass::Neither: return "neither";
    }
    return "?";
}

SliceClass slice_class(const Forest& f, int i, int pos) {
    if (pos < 1 || pos > f.length()) return SliceClass::Neither;
    int oi = f.origin(i), op = f.origin(pos);
    if (f.observes(oi, op)) return SliceClass::Up;
    if (f.observes(op, oi)) return SliceClass::DownOnly;
    return SliceClass::Neither;
}

std::vector<Slice> slicing(const Run& rho, const Forest& f, int i) {
    std::vector<Slice> out;
    const int n = static_cast<int>(rho.steps.size());
    int l = 0;
    while (l < n) {
        SliceClass c = slice_class(f, i, rho.steps[l].pos);
        int r = l + 1;
        while (r < n && slice_class(f, i, rho.steps[r].pos) == c) ++r;
        out.push_back({l, r, c});
        l = r;
    }
    return out;
}

}  // namespace ptk
