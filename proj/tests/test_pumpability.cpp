#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "ptk/corpus.hpp"
#include "ptk/pumpability.hpp"

using namespace ptk;

namespace {

std::vector<PebbleMachine> every_machine() {
    auto out = corpus::blind_family();
    for (auto& m : corpus::last_family()) out.push_back(m);
    out.push_back(corpus::ulsq());
    out.push_back(corpus::square());
    out.push_back(corpus::copier());
    return out;
}

// Least-squares slope of log |f| against log X.
double slope(const PebbleMachine& m, const PumpingFamily& fam) {
    std::vector<double> xs, ys;
    for (int x : {4, 8, 16}) {
        xs.push_back(std::log(static_cast<double>(x)));
        ys.push_back(std::log(static_cast<double>(output_length(m, fam.at(x)))));
    }
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / 3, my = std::accumulate(ys.begin(), ys.end(), 0.0) / 3;
    double num = 0, den = 0;
    for (int i = 0; i < 3; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
}

// Every candidate tuple, each checked by recheck.
bool brute_force_pumpable(const PebbleMachine& m) {
    PumpingAlgebra alg = pumping_algebra(m);
    const FiniteMonoid& t = alg.mu.target();
    const auto& img = alg.plain.image();
    const int k = m.height();
    struct Tr {
        int l, a, r;
    };
    std::vector<Tr> triples;
    for (int l : img)
        for (int a = 0; a < static_cast<int>(alg.letters.size()); ++a)
            for (int r : img)
                if (t.is_idempotent(t.mul(t.mul(l, alg.mu.image_of(alg.letters[a])), r))) triples.push_back({l, a, r});
    for (const auto& chain : branches(*m.explicit_root())) {
        if (static_cast<int>(chain.size()) != k) continue;
        PumpabilityWitness w;
        w.flavor = m.variant;
        for (const auto* n : chain) w.chain.push_back(n->name());
        w.anchor.assign(k, false);
        w.sigma.resize(k);
        std::iota(w.sigma.begin(), w.sigma.end(), 1);
        do {
            std::vector<int> tc(k, 0), mc(k + 1, 0);
            std::function<bool(int)> blocks = [&](int p) -> bool {
                if (p == k) {
                    std::function<bool(int)> ms = [&](int i) -> bool {
                        if (i == k + 1) {
                            w.m.clear();
                            w.l.clear();
                            w.r.clear();
                            w.letters.clear();
                            for (int x : mc) w.m.push_back(img[x]);
                            for (int q = 0; q < k; ++q) {
                                w.l.push_back(triples[tc[q]].l);
                                w.r.push_back(triples[tc[q]].r);
                                w.letters.push_back(alg.letters[triples[tc[q]].a]);
                            }
                            return recheck(m, alg, w).empty();
                        }
                        for (mc[i] = 0; mc[i] < static_cast<int>(img.size()); ++mc[i])
                            if (ms(i + 1)) return true;
                        return false;
                    };
                    return ms(0);
                }
                for (tc[p] = 0; tc[p] < static_cast<int>(triples.size()); ++tc[p])
                    if (blocks(p + 1)) return true;
                return false;
            };
            if (blocks(0)) return true;
        } while (std::next_permutation(w.sigma.begin(), w.sigma.end()));
    }
    return false;
}

}  // namespace

TEST_CASE("pumpability of named examples") {
    CHECK(is_pumpable_blind(corpus::ulsq()).status == SearchStatus::Found);
    CHECK(is_pumpable_last(corpus::square()).status == SearchStatus::Found);
    CHECK(is_pumpable_blind(corpus::make("blind_eps")).status == SearchStatus::Absent);
    CHECK(is_pumpable_last(corpus::make("last_eps")).status == SearchStatus::Absent);
    CHECK(is_pumpable_last(corpus::make("last_pos1")).status == SearchStatus::Absent);
    CHECK(is_pumpable_blind(corpus::make("pos1")).status == SearchStatus::Absent);
    CHECK(is_pumpable_blind(corpus::copier()).status == SearchStatus::Found);
    CHECK(is_pumpable_blind(corpus::make("cubic")).status == SearchStatus::Found);
    CHECK_THROWS_AS(is_pumpable_blind(corpus::square()), MachineError);
    CHECK_THROWS_AS(is_pumpable(corpus::zebra(1)), MachineError);
}

TEST_CASE("witnesses survive the independent re-check") {
    for (const auto& m : every_machine()) {
        auto res = is_pumpable(m);
        REQUIRE(res.status != SearchStatus::Inconclusive);
        if (!res.witness) continue;
        CAPTURE(m.name);
        const auto& w = *res.witness;
        CHECK(w.k() == m.height());
        CHECK(recheck(m, *res.algebra, w).empty());
        const FiniteMonoid& t = res.algebra->mu.target();
        for (int p = 0; p < w.k(); ++p) CHECK(t.is_idempotent(w.e(t, res.algebra->mu, p)));
        // a corrupted witness is caught
        PumpabilityWitness bad = w;
        bad.chain.back() = "nowhere";
        CHECK_FALSE(recheck(m, *res.algebra, bad).empty());
    }
}

TEST_CASE("search agrees with brute force over all tuples") {
    for (const auto& m : every_machine()) {
        if (m.height() > 2) continue;
        CAPTURE(m.name);
        CHECK((is_pumpable(m).status == SearchStatus::Found) == brute_force_pumpable(m));
    }
}

TEST_CASE("pumping families grow with degree k") {
    for (const auto& m : every_machine()) {
        auto res = is_pumpable(m);
        if (!res.witness) continue;
        CAPTURE(m.name);
        auto fam = pumping_family(*res.witness, *res.algebra);
        double s = slope(m, fam);
        CHECK(std::abs(s - m.height()) <= 0.35);
        for (int x = 3; x <= 9; ++x) CHECK(output_length(m, fam.at(x)) >= std::pow(x - 2, m.height()));
    }
    auto res = is_pumpable(corpus::copier());
    auto fam = pumping_family(*res.witness, *res.algebra);
    for (int x = 1; x <= 12; ++x) CHECK(output_length(corpus::copier(), fam.at(x)) == fam.at(x).size());
}

TEST_CASE("ulsq family meets its quadratic bound") {
    auto m = corpus::ulsq();
    auto res = is_pumpable_blind(m);
    auto fam = pumping_family(*res.witness, *res.algebra);
    for (int x : {3, 4, 8, 16}) CHECK(output_length(m, fam.at(x)) >= static_cast<std::size_t>((x - 2) * (x - 2)));
}

TEST_CASE("k = 1 pumpability is a nonempty production on some idempotent context") {
    auto m = corpus::copier();
    PumpingAlgebra alg = pumping_algebra(m);
    const auto& t = m.explicit_root()->transducer();
    bool brute = false;
    for (int l : alg.plain.image())
        for (const auto& a : alg.letters)
            for (int r : alg.plain.image())
                if (alg.mu.target().is_idempotent(alg.mu.target().mul(alg.mu.target().mul(l, alg.mu.image_of(a)), r)))
                    brute = brute || !production_on_context(t, alg.plain, Context{l, a, r}).empty();
    CHECK(brute);
    CHECK(is_pumpable(m).status == SearchStatus::Found);
}

TEST_CASE("budget exhaustion is reported as inconclusive") {
    PumpOptions tiny;
    tiny.budget = 3;
    auto res = is_pumpable(corpus::make("ulsq_mid"), tiny);
    CHECK(res.status == SearchStatus::Inconclusive);
    CHECK_FALSE(res.witness);
}

TEST_CASE("growth certificates") {
    for (const char* name : {"ulsq_mid", "ulsq_top", "square_top"}) {
        auto m = corpus::make(name);
        CAPTURE(name);
        CHECK(is_pumpable(m).status == SearchStatus::Absent);
        auto c = growth_certificate(m, 2);
        REQUIRE(c.status == SearchStatus::Found);
        CHECK(c.witness->degree() >= 2);
        CHECK(recheck(m, *c.algebra, *c.witness).empty());
        auto fam = pumping_family(*c.witness, *c.algebra);
        for (int x = 3; x <= 10; ++x) CHECK(output_length(m, fam.at(x)) >= static_cast<std::size_t>((x - 2) * (x - 2)));
        CHECK(std::abs(slope(m, fam) - 2) <= 0.35);
    }
    CHECK(growth_certificate(corpus::make("blind_eps"), 1).status == SearchStatus::Absent);
}

TEST_CASE("audit record names the readings and every element") {
    auto res = is_pumpable_last(corpus::square());
    std::string rec = audit_record(*res.witness, *res.algebra);
    CHECK(rec.find("flavor last") == 0);
    CHECK(rec.find("chain square_H square_copy") != std::string::npos);
    CHECK(rec.find("sigma 1 2") != std::string::npos);
    CHECK(rec.find("reading C_1 uses r_sigma(1)") != std::string::npos);
    CHECK(rec.find("m2 ") != std::string::npos);
}

TEST_CASE("certificates may reuse the marked position") {
    auto m = corpus::make("mid_mark");
    auto c = growth_certificate(m, 2);
    REQUIRE(c.status == SearchStatus::Found);
    CHECK_FALSE(c.witness->strict());
    CHECK(c.witness->degree() >= 2);
    CHECK(recheck(m, *c.algebra, *c.witness).empty());
    auto fam = pumping_family(*c.witness, *c.algebra);
    for (int x = 3; x <= 10; ++x) CHECK(output_length(m, fam.at(x)) >= static_cast<std::size_t>((x - 2) * (x - 2)));
    CHECK(growth_certificate(m, 3).status == SearchStatus::Absent);
}

TEST_CASE("certificate lower bounds hold on every machine") {
    for (const auto& m : every_machine()) {
        for (int d = 1; d <= m.height(); ++d) {
            auto c = growth_certificate(m, d);
            REQUIRE(c.status != SearchStatus::Inconclusive);
            if (!c.witness) continue;
            CAPTURE(m.name);
            CAPTURE(d);
            CHECK(recheck(m, *c.algebra, *c.witness).empty());
            auto fam = pumping_family(*c.witness, *c.algebra);
            int deg = c.witness->degree();
            CHECK(deg >= d);
            for (int x = 3; x <= 8; ++x) CHECK(output_length(m, fam.at(x)) >= std::pow(x - 2, deg));
        }
    }
}
