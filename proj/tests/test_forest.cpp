#include <random>
#include <set>

#include "doctest.h"
#include "forest_laws.hpp"
#include "helpers.hpp"
#include "ptk/forest.hpp"

using namespace ptk;
using ptk::testing::random_morphism;

namespace {

// Letters p, m, z map to 1, -1, 0.
MonoidMorphism sign_morphism() {
    auto m = std::make_shared<FiniteMonoid>(sign_monoid());
    return MonoidMorphism(parse_word("mpz"), m, {1, 0, 2});
}

MonoidMorphism trivial_morphism() {
    auto m = std::make_shared<FiniteMonoid>(1, std::vector<int>{0}, 0);
    return MonoidMorphism(parse_word("a"), m, {0});
}

const std::string kFigure5 = "⟨⟨mm⟩⟨z⟨m⟨zzzzz⟩⟩z⟩⟩";

Word random_word(std::mt19937& rng, const std::vector<Letter>& alpha, int n) {
    std::uniform_int_distribution<int> d(0, static_cast<int>(alpha.size()) - 1);
    Word w;
    for (int i = 0; i < n; ++i) w.push_back(alpha[d(rng)]);
    return w;
}

}  // namespace

TEST_CASE("trivial monoid forest") {
    auto mu = trivial_morphism();
    auto f = build_forest(mu, parse_word("aa"));
    CHECK(to_brackets(f) == "⟨aa⟩");
    CHECK(f.height() == 2);
    auto g = build_forest(mu, parse_word("aaaaaa"));
    CHECK(to_brackets(g) == "⟨aaaaaa⟩");
    auto e = build_forest(mu, Word{});
    CHECK(e.empty());
    CHECK(e.height() == 0);
    CHECK(to_brackets(e).empty());
    auto one = build_forest(mu, parse_word("a"));
    CHECK(one.height() == 1);
    CHECK(one.origin(1) == one.root());
}

TEST_CASE("figure 5 forest") {
    auto mu = sign_morphism();
    auto f = parse_brackets(mu, kFigure5);
    CHECK(verify_forest(mu, f));
    CHECK(to_brackets(f) == kFigure5);
    CHECK(f.length() == 10);
    // the node over positions 4..9 is iterable; its skeleton reaches positions 4, 5, 9
    int blue = f.at({1, 1});
    CHECK(f.node(blue).first == 4);
    CHECK(f.node(blue).last == 9);
    CHECK(f.is_iterable(blue));
    CHECK(f.skeleton(blue).size() == 5);
    CHECK(f.frontier(blue) == std::vector<int>{4, 5, 9});
    for (int p : {4, 5, 9}) CHECK(f.origin(p) == blue);
    for (int p : {6, 7, 8}) CHECK(f.origin(p) == f.leaf(p));
    for (int p : {1, 2, 3, 10}) CHECK(f.origin(p) == f.root());
    auto built = build_forest(mu, f.word());
    CHECK(verify_forest(mu, built));
    CHECK(built.height() <= f.height());
}

TEST_CASE("verify_forest rejects violations") {
    auto mu = sign_morphism();
    CHECK_FALSE(verify_forest(mu, parse_brackets(mu, "⟨mmm⟩")));
    CHECK_FALSE(verify_forest(mu, parse_brackets(mu, "⟨zzp⟩")));
    CHECK(verify_forest(mu, parse_brackets(mu, "⟨⟨mm⟩p⟩")));
    CHECK_THROWS_AS(parse_brackets(mu, "⟨mm"), ForestError);
}

TEST_CASE("iterable nodes of small forests") {
    auto mu = trivial_morphism();
    auto single = parse_brackets(mu, "a");
    CHECK(single.iterable_nodes().empty());
    auto two = parse_brackets(mu, "⟨aa⟩");
    CHECK(two.iterable_nodes().empty());
    auto five = parse_brackets(mu, "⟨aaaaa⟩");
    auto it = five.iterable_nodes();
    REQUIRE(it.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(five.node(it[k]).first == k + 2);
    CHECK(five.skeleton(five.root()).size() == 3);
    CHECK(five.observes(five.root(), five.root()));
}

TEST_CASE("random forests satisfy every law") {
    std::mt19937 rng(5);
    auto alpha = parse_word("abc");
    for (int trial = 0; trial < 120; ++trial) {
        auto mu = random_morphism(rng, alpha, 3, 6);
        auto u = random_word(rng, alpha, std::uniform_int_distribution<int>(0, 60)(rng));
        auto f = build_forest(mu, u);
        auto bad = ptk::testing::forest_law_violations(mu, f);
        CHECK_MESSAGE(bad.empty(), (bad.empty() ? "" : bad.front()));
        CHECK(to_brackets(parse_brackets(mu, to_brackets(f))) == to_brackets(f));
        auto g = build_forest(mu, u);
        CHECK(to_brackets(g) == to_brackets(f));
    }
}

TEST_CASE("slicing of runs") {
    std::mt19937 rng(9);
    auto alpha = parse_word("ab");
    TwoWayTransducer::Builder b("sweep");
    std::vector<Letter> marked = parse_word("aba!b!");
    b.alphabet(marked).initial("r").final_state("r2");
    b.on("r", "^", "r", Dir::Right);
    b.on("r", "$", "l", Dir::Left);
    b.on("l", "^", "r2", Dir::Right);
    for (const auto& l : marked) {
        b.on_letter("r", l, "r", Dir::Right);
        b.on_letter("l", l, "l", Dir::Left);
        b.on_letter("r2", l, "r2", Dir::Right);
    }
    auto t = b.build();
    for (int trial = 0; trial < 40; ++trial) {
        auto mu = random_morphism(rng, alpha, 3, 6);
        auto u = random_word(rng, alpha, std::uniform_int_distribution<int>(1, 30)(rng));
        auto f = build_forest(mu, u);
        for (int i = 1; i <= f.length(); ++i) {
            Word w = u;
            w[i - 1].marks = kRecent;
            auto rho = run(*t, w);
            auto sl = slicing(rho, f, i);
            REQUIRE(!sl.empty());
            CHECK(sl.front().begin == 0);
            CHECK(sl.back().end == static_cast<int>(rho.steps.size()));
            CHECK(sl.front().cls == SliceClass::Neither);
            for (std::size_t j = 0; j + 1 < sl.size(); ++j) {
                CHECK(sl[j].end == sl[j + 1].begin);
                CHECK(sl[j].cls != sl[j + 1].cls);
            }
            for (const auto& s : sl)
                for (int c = s.begin; c < s.end; ++c) CHECK(slice_class(f, i, rho.steps[c].pos) == s.cls);
        }
    }
    // a run inside ObUp is one slice
    auto mu = trivial_morphism();
    auto f = build_forest(mu, parse_word("a"));
    Run r;
    r.steps = {{0, 1}, {0, 1}};
    CHECK(slicing(r, f, 1).size() == 1);
}
