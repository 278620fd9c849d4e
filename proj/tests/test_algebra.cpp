#include <map>
#include <set>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ptk/algebra.hpp"

using namespace ptk;
using ptk::testing::for_each_word;
using ptk::testing::random_morphism;

namespace {

// Letters p, m, z map to 1, -1, 0.
MonoidMorphism sign_morphism() {
    auto m = std::make_shared<FiniteMonoid>(sign_monoid());
    return MonoidMorphism(parse_word("mpz"), m, {1, 0, 2});
}

// All values reachable by parenthesizing the image sequence.
std::set<int> all_parenthesizations(const FiniteMonoid& m, const std::vector<int>& xs, int i, int j) {
    if (i == j) return {m.identity()};
    if (j - i == 1) return {xs[i]};
    std::set<int> out;
    for (int k = i + 1; k < j; ++k)
        for (int a : all_parenthesizations(m, xs, i, k))
            for (int b : all_parenthesizations(m, xs, k, j)) out.insert(m.mul(a, b));
    return out;
}

}  // namespace

TEST_CASE("sign monoid evaluation and idempotents") {
    auto mu = sign_morphism();
    CHECK(mu.eval(parse_word("mmz")) == 2);
    CHECK(mu.eval(Word{}) == mu.target().identity());
    CHECK(mu.eval(parse_word("mm")) == 0);
    auto m = sign_monoid();
    CHECK(m.is_associative());
    CHECK(is_idempotent(m, 2));
    CHECK_FALSE(is_idempotent(m, 1));
    CHECK(is_idempotent(m, 0));
    CHECK_THROWS_AS(is_idempotent(m, 3), AlgebraError);
    CHECK_THROWS_AS(mu.eval(parse_word("q")), AlgebraError);
}

TEST_CASE("image submonoid with witnesses") {
    auto two = std::make_shared<FiniteMonoid>(2, std::vector<int>{0, 1, 1, 1}, 0);  // 0 = 1, 1 = 0
    MonoidMorphism mu(parse_word("a"), two, {1});
    auto img = image_submonoid(mu);
    REQUIRE(img.size() == 2);
    CHECK(img[0].element == 0);
    CHECK(img[0].witness.empty());
    CHECK(img[1].element == 1);
    CHECK(to_string(img[1].witness) == "a");

    auto sign = std::make_shared<FiniteMonoid>(sign_monoid());
    MonoidMorphism nu(parse_word("ab"), sign, {1, 2});
    auto img2 = image_submonoid(nu);
    REQUIRE(img2.size() == 3);
    CHECK(to_string(*nu.witness(0)).empty());
    CHECK(to_string(*nu.witness(1)) == "a");
    CHECK(to_string(*nu.witness(2)) == "b");
}

TEST_CASE("random morphisms: closure, witnesses, parenthesizations, homomorphism") {
    std::mt19937 rng(7);
    auto alpha = parse_word("ab");
    for (int trial = 0; trial < 30; ++trial) {
        auto mu = random_morphism(rng, alpha, 3);
        const auto& m = mu.target();
        CHECK(m.is_associative());
        // reachable = returned
        std::set<int> reach;
        for_each_word(alpha, m.size(), [&](const Word& w) { reach.insert(mu.eval(w)); });
        std::set<int> img(mu.image().begin(), mu.image().end());
        CHECK(reach == img);
        for (int e : mu.image()) {
            REQUIRE(mu.witness(e));
            CHECK(mu.eval(*mu.witness(e)) == e);
        }
        // shortest witnesses, lexicographic tie-break
        std::map<int, Word> best;
        for_each_word(alpha, m.size(), [&](const Word& w) { best.emplace(mu.eval(w), w); });
        for (auto& [e, w] : best) CHECK(*mu.witness(e) == w);
        // closed under the table
        for (int x : img)
            for (int y : img) CHECK(img.count(m.mul(x, y)));
        for_each_word(alpha, 6, [&](const Word& w) {
            std::vector<int> xs;
            for (auto& l : w) xs.push_back(mu.image_of(l));
            auto vals = all_parenthesizations(m, xs, 0, static_cast<int>(xs.size()));
            CHECK(vals.size() == 1);
            CHECK(*vals.begin() == mu.eval(w));
        });
        for_each_word(alpha, 4, [&](const Word& u) {
            for_each_word(alpha, 8 - static_cast<int>(u.size()) > 4 ? 4 : 8 - static_cast<int>(u.size()),
                          [&](const Word& v) {
                              Word uv = u;
                              uv.insert(uv.end(), v.begin(), v.end());
                              CHECK(mu.eval(uv) == m.mul(mu.eval(u), mu.eval(v)));
                          });
        });
    }
}

TEST_CASE("product morphisms") {
    auto sign = sign_morphism();
    auto single = product_morphism({&sign});
    CHECK(single.target().size() == 3);
    for_each_word(sign.alphabet(), 4, [&](const Word& w) {
        CHECK(single.target().is_idempotent(single.eval(w)) == sign.target().is_idempotent(sign.eval(w)));
    });
    auto diag = product_morphism({&sign, &sign});
    CHECK(diag.image().size() == 3);

    std::mt19937 rng(11);
    auto alpha = parse_word("ab");
    auto m1 = random_morphism(rng, alpha, 3);
    auto m2 = random_morphism(rng, alpha, 3);
    auto prod = product_morphism({&m1, &m2});
    // the product value of w is determined by and determines the pair of component values
    std::map<int, std::pair<int, int>> seen;
    std::map<std::pair<int, int>, int> back;
    for_each_word(alpha, 6, [&](const Word& w) {
        auto pr = std::make_pair(m1.eval(w), m2.eval(w));
        int p = prod.eval(w);
        auto [it, fresh] = seen.emplace(p, pr);
        CHECK(it->second == pr);
        auto [jt, fresh2] = back.emplace(pr, p);
        CHECK(jt->second == p);
    });
    auto other = MonoidMorphism(parse_word("ac"), sign.target_ptr(), {0, 1});
    CHECK_THROWS_AS(product_morphism({&sign, &other}), AlgebraError);
}

TEST_CASE("word encoding") {
    auto w = parse_word("ab!c!!d!!!");
    REQUIRE(w.size() == 4);
    CHECK(w[1].marks == kRecent);
    CHECK(w[2].marks == kOlder);
    CHECK(w[3].marks == (kRecent | kOlder));
    CHECK(to_string(w) == "ab!c!!d!!!");
    CHECK(base_string(w) == "abcd");
    CHECK_THROWS_AS(parse_word("a!!!!"), AlgebraError);
    CHECK_THROWS_AS(parse_word("!a"), AlgebraError);
}
