#include "ptk/algebra.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>

namespace ptk {

namespace {

std::uint16_t letter_key(const Letter& l) {
    return static_cast<std::uint16_t>((static_cast<unsigned char>(l.base) << 8) | l.marks);
}

struct ValueHash {
    std::size_t operator()(const Value& v) const {
        std::size_t h = 1469598103934665603ull;
        for (auto x : v) {
            h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(x)) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

}  // namespace

std::string to_string(const Letter& l) {
    std::string s(1, l.base);
    switch (l.marks) {
        case kRecent: s += "!"; break;
        case kOlder: s += "!!"; break;
        case kRecent | kOlder: s += "!!!"; break;
        default: break;
    }
    return s;
}

std::string to_string(const Word& w) {
    std::string s;
    for (const auto& l : w) s += to_string(l);
    return s;
}

std::string base_string(const Word& w) {
    std::string s;
    s.reserve(w.size());
    for (const auto& l : w) s += l.base;
    return s;
}

Word parse_word(const std::string& s) {
    Word w;
    for (std::size_t i = 0; i < s.size();) {
        char c = s[i];
        if (c == '!' || c == '^' || c == '$') throw AlgebraError("invalid letter '" + std::string(1, c) + "' in word \"" + s + "\"");
        std::size_t j = i + 1;
        while (j < s.size() && s[j] == '!') ++j;
        std::size_t bangs = j - i - 1;
        if (bangs > 3) throw AlgebraError("too many marks in word \"" + s + "\"");
        static const std::uint8_t kBits[] = {kNoMark, kRecent, kOlder, kRecent | kOlder};
        w.push_back(Letter{c, kBits[bangs]});
        i = j;
    }
    return w;
}

Word plain_word(const std::string& s) {
    Word w;
    w.reserve(s.size());
    for (char c : s) w.push_back(Letter{c, kNoMark});
    return w;
}

Word unmark(const Word& w) {
    Word r = w;
    for (auto& l : r) l.marks = kNoMark;
    return r;
}

FiniteMonoid::FiniteMonoid(int size, std::vector<int> table, int identity)
    : size_(size), table_(std::move(table)), identity_(identity) {
    if (size <= 0) throw AlgebraError("monoid size must be positive");
    if (table_.size() != static_cast<std::size_t>(size) * size) throw AlgebraError("monoid table has wrong size");
    if (identity < 0 || identity >= size) throw AlgebraError("identity out of range");
    for (int v : table_) {
        if (v < 0 || v >= size) throw AlgebraError("monoid table entry out of range");
    }
    for (int x = 0; x < size; ++x) {
        if (mul(identity, x) != x || mul(x, identity) != x) throw AlgebraError("identity law fails");
    }
}

bool FiniteMonoid::is_idempotent(int x) const {
    if (x < 0 || x >= size_) throw AlgebraError("element index out of range");
    return mul(x, x) == x;
}

bool FiniteMonoid::is_associative() const {
    for (int x = 0; x < size_; ++x)
        for (int y = 0; y < size_; ++y) {
            int xy = mul(x, y);
            for (int z = 0; z < size_; ++z)
                if (mul(xy, z) != mul(x, mul(y, z))) return false;
        }
    return true;
}

bool is_idempotent(const FiniteMonoid& m, int x) { return m.is_idempotent(x); }

FiniteMonoid sign_monoid() {
    // 0 = 1, 1 = -1, 2 = 0
    return FiniteMonoid(3, {0, 1, 2, 1, 0, 2, 2, 2, 2}, 0);
}

MonoidMorphism::MonoidMorphism(std::vector<Letter> alphabet, std::shared_ptr<const FiniteMonoid> target,
                               std::vector<int> letter_image)
    : target_(std::move(target)) {
    if (alphabet.size() != letter_image.size()) throw AlgebraError("alphabet and letter images differ in length");
    std::vector<std::size_t> order(alphabet.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return alphabet[a] < alphabet[b]; });
    for (std::size_t i : order) {
        if (!index_.emplace(letter_key(alphabet[i]), static_cast<int>(alphabet_.size())).second)
            throw AlgebraError("duplicate letter " + to_string(alphabet[i]));
        if (letter_image[i] < 0 || letter_image[i] >= target_->size()) throw AlgebraError("letter image out of range");
        alphabet_.push_back(alphabet[i]);
        letter_image_.push_back(letter_image[i]);
    }
    witness_.assign(target_->size(), std::nullopt);
    std::deque<int> queue;
    witness_[target_->identity()] = Word{};
    image_order_.push_back(target_->identity());
    queue.push_back(target_->identity());
    while (!queue.empty()) {
        int x = queue.front();
        queue.pop_front();
        for (std::size_t a = 0; a < alphabet_.size(); ++a) {
            int y = target_->mul(x, letter_image_[a]);
            if (witness_[y]) continue;
            Word w = *witness_[x];
            w.push_back(alphabet_[a]);
            witness_[y] = std::move(w);
            image_order_.push_back(y);
            queue.push_back(y);
        }
    }
}

int MonoidMorphism::letter_index(const Letter& l) const {
    auto it = index_.find(letter_key(l));
    return it == index_.end() ? -1 : it->second;
}

int MonoidMorphism::image_of(const Letter& l) const {
    int i = letter_index(l);
    if (i < 0) throw AlgebraError("letter " + to_string(l) + " not in alphabet");
    return letter_image_[i];
}

int MonoidMorphism::eval(const Word& w) const {
    int x = target_->identity();
    for (const auto& l : w) x = target_->mul(x, image_of(l));
    return x;
}

int eval_morphism(const MonoidMorphism& mu, const Word& w) { return mu.eval(w); }

std::vector<ImageElement> image_submonoid(const MonoidMorphism& mu) {
    std::vector<ImageElement> out;
    for (int e : mu.image()) out.push_back({e, *mu.witness(e)});
    return out;
}

MonoidMorphism product_morphism(const std::vector<const MonoidMorphism*>& ms) {
    if (ms.empty()) throw AlgebraError("product of no morphisms");
    const auto& alpha = ms.front()->alphabet();
    for (const auto* m : ms) {
        if (m->alphabet() != alpha) throw AlgebraError("product_morphism: alphabet mismatch");
    }
    Value id;
    for (const auto* m : ms) id.push_back(m->target().identity());
    std::vector<Value> gens;
    for (std::size_t a = 0; a < alpha.size(); ++a) {
        Value g;
        for (const auto* m : ms) g.push_back(m->image_of_index(static_cast<int>(a)));
        gens.push_back(std::move(g));
    }
    auto mul = [&](const Value& x, const Value& y) {
        Value z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = ms[i]->target().mul(x[i], y[i]);
        return z;
    };
    auto res = build_closure(id, gens, mul, 1u << 20);
    return MonoidMorphism(alpha, res.monoid, res.letter_image);
}

ClosureResult build_closure(const Value& identity, const std::vector<Value>& generators,
                            const std::function<Value(const Value&, const Value&)>& mul, std::size_t cap) {
    std::unordered_map<Value, int, ValueHash> index;
    std::vector<Value> values;
    std::vector<std::vector<int>> right;  // right Cayley graph
    std::vector<int> parent, parent_letter;
    auto intern = [&](Value v, int par, int letter) -> std::pair<int, bool> {
        auto it = index.find(v);
        if (it != index.end()) return {it->second, false};
        if (values.size() >= cap) throw AlgebraError("monoid closure exceeds cap of " + std::to_string(cap) + " elements");
        int id = static_cast<int>(values.size());
        index.emplace(v, id);
        values.push_back(std::move(v));
        parent.push_back(par);
        parent_letter.push_back(letter);
        return {id, true};
    };
    intern(identity, -1, -1);
    std::vector<int> letter_image(generators.size());
    for (std::size_t x = 0; x < values.size(); ++x) {
        right.emplace_back(generators.size());
        for (std::size_t a = 0; a < generators.size(); ++a) {
            Value p = mul(values[x], generators[a]);
            auto [id, fresh] = intern(std::move(p), static_cast<int>(x), static_cast<int>(a));
            right[x][a] = id;
            (void)fresh;
        }
    }
    for (std::size_t a = 0; a < generators.size(); ++a) letter_image[a] = right[0][a];
    const int n = static_cast<int>(values.size());
    // x * y follows a spelling of y through the right Cayley graph.
    std::vector<std::vector<int>> spelling(n);
    for (int y = 1; y < n; ++y) {
        spelling[y] = spelling[parent[y]];
        spelling[y].push_back(parent_letter[y]);
    }
    std::vector<int> table(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            int z = x;
            for (int a : spelling[y]) z = right[z][a];
            table[static_cast<std::size_t>(x) * n + y] = z;
        }
    ClosureResult out;
    out.monoid = std::make_shared<FiniteMonoid>(n, std::move(table), 0);
    out.letter_image = std::move(letter_image);
    out.values = std::move(values);
    return out;
}

}  // namespace ptk
