#ifndef PTK_ALGEBRA_HPP
#define PTK_ALGEBRA_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ptk {

// Mark flags carried by a letter. A letter may carry both when two calls
// were made from the same position.
enum MarkBits : std::uint8_t { kNoMark = 0, kRecent = 1, kOlder = 2 };

struct Letter {
    char base = 'a';
    std::uint8_t marks = kNoMark;

    auto operator<=>(const Letter&) const = default;
    Letter unmarked() const { return Letter{base, kNoMark}; }
};

using Word = std::vector<Letter>;

// "a", "a!", "a!!", "a!!!" for no mark, recent, older, both.
std::string to_string(const Letter& l);
std::string to_string(const Word& w);
std::string base_string(const Word& w);
Word parse_word(const std::string& s);
Word plain_word(const std::string& s);
Word unmark(const Word& w);

class AlgebraError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class FiniteMonoid {
  public:
    FiniteMonoid(int size, std::vector<int> table, int identity);

    int size() const { return size_; }
    int identity() const { return identity_; }
    int mul(int x, int y) const { return table_[static_cast<std::size_t>(x) * size_ + y]; }
    bool is_idempotent(int x) const;
    bool is_associative() const;
    const std::vector<int>& table() const { return table_; }

  private:
    int size_;
    std::vector<int> table_;
    int identity_;
};

bool is_idempotent(const FiniteMonoid& m, int x);

// The sign monoid ({-1,0,1}, x) with elements 0 -> 1, 1 -> -1, 2 -> 0.
FiniteMonoid sign_monoid();

struct ImageElement {
    int element;
    Word witness;
};

class MonoidMorphism {
  public:
    MonoidMorphism(std::vector<Letter> alphabet, std::shared_ptr<const FiniteMonoid> target,
                   std::vector<int> letter_image);

    const std::vector<Letter>& alphabet() const { return alphabet_; }
    const FiniteMonoid& target() const { return *target_; }
    std::shared_ptr<const FiniteMonoid> target_ptr() const { return target_; }
    int letter_index(const Letter& l) const;
    bool has_letter(const Letter& l) const { return letter_index(l) >= 0; }
    int image_of(const Letter& l) const;
    int image_of_index(int li) const { return letter_image_[li]; }
    int eval(const Word& w) const;

    // Shortlex-least word evaluating to e; empty for elements outside the image.
    const std::optional<Word>& witness(int e) const { return witness_[e]; }
    bool in_image(int e) const { return witness_[e].has_value(); }
    // Image elements in breadth-first discovery order.
    const std::vector<int>& image() const { return image_order_; }

  private:
    std::vector<Letter> alphabet_;
    std::shared_ptr<const FiniteMonoid> target_;
    std::vector<int> letter_image_;
    std::unordered_map<std::uint16_t, int> index_;
    std::vector<std::optional<Word>> witness_;
    std::vector<int> image_order_;
};

int eval_morphism(const MonoidMorphism& mu, const Word& w);
std::vector<ImageElement> image_submonoid(const MonoidMorphism& mu);
MonoidMorphism product_morphism(const std::vector<const MonoidMorphism*>& ms);

struct Context {
    int left;
    Letter letter;
    int right;
    bool operator==(const Context&) const = default;
};

// Builds the image submonoid of a morphism into an implicit monoid whose
// elements are value vectors multiplied by `mul`. Letters are processed in
// the given order, so witnesses are shortlex-least.
struct ClosureResult {
    std::shared_ptr<const FiniteMonoid> monoid;
    std::vector<int> letter_image;
    std::vector<std::vector<std::int32_t>> values;
};

using Value = std::vector<std::int32_t>;
ClosureResult build_closure(const Value& identity, const std::vector<Value>& generators,
                            const std::function<Value(const Value&, const Value&)>& mul,
                            std::size_t cap);

}  // namespace ptk

#endif
