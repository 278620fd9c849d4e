#ifndef PTK_TEST_HELPERS_HPP
#define PTK_TEST_HELPERS_HPP

#include <functional>
#include <random>

#include "ptk/algebra.hpp"
#include "ptk/twoway.hpp"

namespace ptk::testing {

// Every word over `alpha` of length at most max_len, shortlex.
inline void for_each_word(const std::vector<Letter>& alpha, int max_len, const std::function<void(const Word&)>& f) {
    Word w;
    for (int len = 0; len <= max_len; ++len) {
        std::function<void(int)> rec = [&](int d) {
            if (d == len) {
                f(w);
                return;
            }
            for (const auto& l : alpha) {
                w.push_back(l);
                rec(d + 1);
                w.pop_back();
            }
        };
        rec(0);
    }
}

inline std::vector<Letter> letters(const std::string& s) { return parse_word(s); }

// Submonoid of the transformation monoid on n points generated by random maps.
inline MonoidMorphism random_morphism(std::mt19937& rng, const std::vector<Letter>& alpha, int points,
                                      std::size_t cap = 64) {
    for (;;) {
        std::vector<Value> gens;
        std::uniform_int_distribution<int> d(0, points - 1);
        for (std::size_t a = 0; a < alpha.size(); ++a) {
            Value g(points);
            for (auto& x : g) x = d(rng);
            gens.push_back(g);
        }
        Value id(points);
        for (int i = 0; i < points; ++i) id[i] = i;
        auto mul = [](const Value& f, const Value& g) {
            Value h(f.size());
            for (std::size_t i = 0; i < f.size(); ++i) h[i] = g[f[i]];
            return h;
        };
        try {
            auto res = build_closure(id, gens, mul, cap);
            return MonoidMorphism(alpha, res.monoid, res.letter_image);
        } catch (const AlgebraError&) {
        }
    }
}

// Example 1: reverse every #-separated block.
inline std::shared_ptr<const TwoWayTransducer> build_maprev(const std::string& letters = "ab") {
    TwoWayTransducer::Builder b("mapRev");
    b.alphabet(parse_word("#" + letters)).initial("s").final_state("fwd");
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

}  // namespace ptk::testing

#endif
