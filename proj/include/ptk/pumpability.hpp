#ifndef PTK_PUMPABILITY_HPP
#define PTK_PUMPABILITY_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptk/algebra.hpp"
#include "ptk/pebble.hpp"

namespace ptk {

// The transition morphism of every transducer of a machine, over the union of
// the node alphabets, and its restriction to unmarked letters.
struct PumpingAlgebra {
    MonoidMorphism mu;
    MonoidMorphism plain;  // same target; its image is mu(A*)
    std::vector<Letter> letters;  // A
};

PumpingAlgebra pumping_algebra(const PebbleMachine& m, std::size_t cap = 1u << 12);

struct PumpabilityWitness {
    Variant flavor = Variant::Blind;
    std::vector<std::string> chain;  // head first
    std::vector<int> m;              // m_0..m_k
    std::vector<int> l;              // l_1..l_k, indexed by block
    std::vector<int> r;
    Word letters;                    // a_1..a_k
    std::vector<int> sigma;          // sigma[j-1] is the block of level j, 1-based
    // Anchored blocks hold their single letter, unpumped. Only lower-bound
    // certificates use anchors, or a sigma that is not a permutation.
    std::vector<bool> anchor;

    int k() const { return static_cast<int>(letters.size()); }
    int pumped() const;
    bool strict() const;
    // Levels whose calls multiply with X: a pumped hole that is not the
    // previous level's marked copy.
    int degree() const;
    int e(const FiniteMonoid& target, const MonoidMorphism& mu, int block) const;
};

enum class SearchStatus { Found, Absent, Inconclusive };
std::string to_string(SearchStatus s);

struct PumpOptions {
    std::uint64_t budget = 100'000'000;  // search transitions
};

struct PumpabilityResult {
    SearchStatus status = SearchStatus::Absent;
    std::optional<PumpabilityWitness> witness;
    std::uint64_t steps = 0;
    std::shared_ptr<const PumpingAlgebra> algebra;
};

PumpabilityResult is_pumpable_blind(const PebbleMachine& m, const PumpOptions& opts = {});
PumpabilityResult is_pumpable_last(const PebbleMachine& m, const PumpOptions& opts = {});
// Dispatches on the variant; last-last machines are rejected.
PumpabilityResult is_pumpable(const PebbleMachine& m, const PumpOptions& opts = {});

// A witness over a chain of height(m) levels whose blocks may be anchors and
// whose levels may share blocks; a last level may place its hole on the
// previous mark. Its family has output length at least (X-2)^d with
// d = degree() >= `degree`, so the function is not O(n^(degree-1)).
PumpabilityResult growth_certificate(const PebbleMachine& m, int degree, const PumpOptions& opts = {});

// Rebuilds every context from the definition and reports each failed
// condition; empty when the witness is valid.
std::vector<std::string> recheck(const PebbleMachine& m, const PumpingAlgebra& alg, const PumpabilityWitness& w);

struct PumpingFamily {
    std::vector<Word> v;  // v_0..v_k
    std::vector<Word> u;  // u_1..u_k
    std::vector<bool> anchor;
    // v_0 u_1^X v_1 ... u_k^X v_k, with anchored blocks kept once.
    Word at(int x) const;
};

PumpingFamily pumping_family(const PumpabilityWitness& w, const PumpingAlgebra& alg);

// Text record: flavor, chain, sigma, and each element with its witness word.
std::string audit_record(const PumpabilityWitness& w, const PumpingAlgebra& alg);

}  // namespace ptk

#endif
