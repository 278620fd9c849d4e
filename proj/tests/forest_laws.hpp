#ifndef PTK_TEST_FOREST_LAWS_HPP
#define PTK_TEST_FOREST_LAWS_HPP

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ptk/forest.hpp"

namespace ptk::testing {

// Independent checks of the forest combinatorics, straight from the definitions.
inline std::vector<std::string> forest_law_violations(const MonoidMorphism& mu, const Forest& f) {
    std::vector<std::string> bad = forest_violations(mu, f);
    if (f.empty()) return bad;
    if (f.height() > 3 * mu.target().size()) bad.push_back("height exceeds 3|M|");
    const int n = f.length();
    // iterable nodes: middle children, computed from the parent side
    std::set<int> ite;
    for (int t = 0; t < f.size(); ++t) {
        const auto& ch = f.node(t).children;
        for (std::size_t c = 1; c + 1 < ch.size(); ++c) ite.insert(ch[c]);
    }
    auto listed = f.iterable_nodes();
    if (std::set<int>(listed.begin(), listed.end()) != ite) bad.push_back("iterable nodes differ");
    std::vector<int> reps(ite.begin(), ite.end());
    reps.push_back(f.root());
    // skeletons partition the nodes, frontiers partition the positions
    std::vector<int> node_owner(f.size(), -1), pos_owner(n + 1, -1);
    for (int r : reps) {
        for (int t : f.skeleton(r)) {
            if (node_owner[t] >= 0) bad.push_back("skeletons overlap");
            node_owner[t] = r;
        }
        std::vector<int> fr;
        for (int t : f.skeleton(r))
            if (f.node(t).is_leaf()) fr.push_back(f.node(t).first);
        std::sort(fr.begin(), fr.end());
        if (fr != f.frontier(r)) bad.push_back("frontier differs from skeleton leaves");
        for (int p : fr) {
            if (pos_owner[p] >= 0) bad.push_back("frontiers overlap");
            pos_owner[p] = r;
        }
        if (static_cast<int>(fr.size()) > (1 << f.height())) bad.push_back("frontier larger than 2^height");
    }
    for (int t = 0; t < f.size(); ++t)
        if (node_owner[t] < 0) bad.push_back("node outside every skeleton");
    for (int p = 1; p <= n; ++p) {
        if (pos_owner[p] < 0) bad.push_back("position outside every frontier");
        else if (f.origin(p) != pos_owner[p]) bad.push_back("origin differs from frontier owner");
    }
    // observation, brute force over ancestors
    auto ancestors = [&](int t) {
        std::vector<int> a;
        for (; t >= 0; t = f.node(t).parent) a.push_back(t);
        return a;
    };
    for (int t = 0; t < f.size(); ++t) {
        auto anc = ancestors(t);
        std::set<int> obs;
        for (int a : anc) {
            obs.insert(a);
            int p = f.node(a).parent;
            if (p < 0) continue;
            const auto& ch = f.node(p).children;
            int k = f.node(a).index_in_parent;
            if (k > 0) obs.insert(ch[k - 1]);
            if (k + 1 < static_cast<int>(ch.size())) obs.insert(ch[k + 1]);
        }
        auto got = f.observed_by(t);
        if (std::set<int>(got.begin(), got.end()) != obs) bad.push_back("observed set differs");
        if (static_cast<int>(obs.size()) > 3 * f.height()) bad.push_back("observes more than 3*height nodes");
    }
    // interval equality at every position whose origin is not the root
    for (int i = 1; i <= n; ++i) {
        int t = f.origin(i);
        auto up = f.ob_up(i), down = f.ob_do(i);
        std::set<int> upset(up.begin(), up.end());
        std::set<int> lhs;
        for (int y : down)
            if (!upset.count(y)) lhs.insert(y);
        for (int y = 1; y <= n; ++y) {
            bool obs_i_y = f.observes(f.origin(i), f.origin(y));
            bool obs_y_i = f.observes(f.origin(y), f.origin(i));
            if (obs_i_y != (upset.count(y) > 0)) bad.push_back("ob_up differs from observation");
            if (obs_y_i != std::binary_search(down.begin(), down.end(), y)) bad.push_back("ob_do differs from observation");
        }
        if (t == f.root()) continue;
        const auto& sib = f.node(f.node(t).parent).children;
        int k = f.node(t).index_in_parent;
        int t1 = sib[k - 1], t2 = sib[k + 1];
        std::set<int> rhs;
        for (int y = f.frontier(t1).front(); y <= f.frontier(t2).back(); ++y) rhs.insert(y);
        for (int s : {t1, t, t2})
            for (int y : f.frontier(s)) rhs.erase(y);
        if (lhs != rhs) bad.push_back("interval equality fails at position " + std::to_string(i));
    }
    return bad;
}

}  // namespace ptk::testing

#endif
