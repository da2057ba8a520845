// Words in the genus-2 surface group <a,b,p,q | a b A B q p Q P>.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace surfdiff {

// A generator with sign, packed as code = 2*generator + (inverse ? 1 : 0).
// Codes order the alphabet as a < A < b < B < p < P < q < Q (capital = inverse).
struct Letter {
  std::uint8_t code = 0;

  static constexpr Letter make(int generator, bool inverse) {
    return Letter{static_cast<std::uint8_t>(2 * generator + (inverse ? 1 : 0))};
  }
  constexpr int generator() const { return code >> 1; }
  constexpr bool inverse() const { return (code & 1) != 0; }
  constexpr int sign() const { return inverse() ? -1 : 1; }
  constexpr Letter inv() const { return Letter{static_cast<std::uint8_t>(code ^ 1)}; }
  char to_char() const;
  static Letter from_char(char c);

  friend constexpr bool operator==(Letter x, Letter y) { return x.code == y.code; }
  friend constexpr auto operator<=>(Letter x, Letter y) { return x.code <=> y.code; }
};

inline constexpr int kGenerators = 4;
inline constexpr int kLetters = 8;

class WordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical group element: freely reduced and Dehn-reduced. Two Words may
// still represent the same element (e.g. abAB and pqPQ); compare with
// is_identity(mul(u, inv(v))) rather than operator==.
class Word {
 public:
  Word() = default;

  // Parses "aAbB..." (or "1" for the identity) and reduces it.
  static Word parse(std::string_view text);
  // Reduces an arbitrary letter sequence.
  static Word from_letters(std::vector<Letter> letters);
  // Wraps letters already known to be canonical; no checks beyond debug.
  static Word unchecked(std::vector<Letter> letters);

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  std::string str() const;

  // Literal equality of representatives (shortlex-comparable).
  friend bool operator==(const Word&, const Word&) = default;
  // Shortlex order on representatives.
  friend std::strong_ordering operator<=>(const Word& x, const Word& y);

 private:
  std::vector<Letter> letters_;
};

// The relator a b A B q p Q P.
const std::array<Letter, 8>& relator();
Word relator_word();

std::vector<Letter> free_reduce(std::vector<Letter> letters);
// Dehn's algorithm: removes every subword made of >= 5 consecutive letters of
// a cyclic conjugate of the relator (or its inverse). Input need not be
// freely reduced; output is freely and Dehn reduced.
std::vector<Letter> dehn_reduce(std::vector<Letter> letters);
Word dehn_reduce(const Word& w);
bool is_dehn_reduced(const std::vector<Letter>& letters);

Word mul(const Word& u, const Word& v);
Word mul(std::initializer_list<Word> factors);
Word inv(const Word& u);
Word power(const Word& u, std::int64_t n);
bool is_identity(const Word& u);
bool equal_in_group(const Word& u, const Word& v);

// Exponent sums in the basis (a, b, p, q).
std::array<std::int64_t, 4> abelianize(const Word& u);

// Every group element with a representative of length <= max_length, once,
// as its shortlex-least representative, in shortlex order. The identity
// comes first as the empty word.
std::vector<Word> enumerate_ball(int max_length);
// Streaming form; return false from the visitor to stop early.
void enumerate_ball(int max_length, const std::function<bool(const Word&)>& visit);

// Visits every freely reduced letter sequence of length <= max_length
// (without group-level deduplication) in shortlex order.
void enumerate_free_words(int max_length,
                          const std::function<void(const std::vector<Letter>&)>& visit);

}  // namespace surfdiff
