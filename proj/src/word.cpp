#include "surfdiff/word.hpp"

#include <algorithm>
#include <cassert>
#include <random>
#include <unordered_map>

namespace surfdiff {

namespace {

constexpr std::string_view kAlphabet = "aAbBpPqQ";

constexpr Letter L(char c) {
  for (std::size_t i = 0; i < kAlphabet.size(); ++i)
    if (kAlphabet[i] == c) return Letter{static_cast<std::uint8_t>(i)};
  return Letter{255};
}

constexpr std::array<Letter, 8> kRelator = {L('a'), L('b'), L('A'), L('B'),
                                            L('q'), L('p'), L('Q'), L('P')};

// Every letter occurs exactly once in the relator and once in its inverse, so
// for each first letter there are exactly two cyclic conjugates to try.
struct ConjugateTable {
  std::array<std::array<std::array<Letter, 8>, 2>, kLetters> by_first{};

  ConjugateTable() {
    std::array<Letter, 8> inverse{};
    for (int i = 0; i < 8; ++i) inverse[i] = kRelator[7 - i].inv();
    const std::array<std::array<Letter, 8>, 2> bases = {kRelator, inverse};
    for (int b = 0; b < 2; ++b)
      for (int start = 0; start < 8; ++start) {
        std::array<Letter, 8> rot{};
        for (int i = 0; i < 8; ++i) rot[i] = bases[b][(start + i) % 8];
        by_first[rot[0].code][b] = rot;
      }
  }
};

const ConjugateTable& conjugates() {
  static const ConjugateTable table;
  return table;
}

// Length of the longest match of letters[i..] against a conjugate prefix.
int match_length(const std::vector<Letter>& letters, std::size_t i, const std::array<Letter, 8>& r) {
  int k = 0;
  while (k < 8 && i + k < letters.size() && letters[i + k] == r[k]) ++k;
  return k;
}

}  // namespace

char Letter::to_char() const { return kAlphabet.at(code); }

Letter Letter::from_char(char c) {
  Letter x = L(c);
  if (x.code == 255) throw WordError(std::string("invalid letter '") + c + "'");
  return x;
}

const std::array<Letter, 8>& relator() { return kRelator; }

Word relator_word() {
  return Word::unchecked(std::vector<Letter>(kRelator.begin(), kRelator.end()));
}

std::vector<Letter> free_reduce(std::vector<Letter> letters) {
  std::size_t out = 0;
  for (Letter x : letters) {
    if (out > 0 && letters[out - 1] == x.inv())
      --out;
    else
      letters[out++] = x;
  }
  letters.resize(out);
  return letters;
}

std::vector<Letter> dehn_reduce(std::vector<Letter> letters) {
  letters = free_reduce(std::move(letters));
  const auto& table = conjugates();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < letters.size() && !changed; ++i) {
      for (const auto& r : table.by_first[letters[i].code]) {
        const int k = match_length(letters, i, r);
        if (k < 5) continue;
        // r = r[0..k) r[k..8) = 1, so r[0..k) = (r[k..8))^-1.
        std::vector<Letter> piece;
        for (int j = 7; j >= k; --j) piece.push_back(r[j].inv());
        letters.erase(letters.begin() + static_cast<std::ptrdiff_t>(i),
                      letters.begin() + static_cast<std::ptrdiff_t>(i + k));
        letters.insert(letters.begin() + static_cast<std::ptrdiff_t>(i), piece.begin(), piece.end());
        letters = free_reduce(std::move(letters));
        changed = true;
        break;
      }
    }
  }
  return letters;
}

bool is_dehn_reduced(const std::vector<Letter>& letters) {
  for (std::size_t i = 0; i + 1 < letters.size(); ++i)
    if (letters[i + 1] == letters[i].inv()) return false;
  const auto& table = conjugates();
  for (std::size_t i = 0; i + 5 <= letters.size(); ++i)
    for (const auto& r : table.by_first[letters[i].code])
      if (match_length(letters, i, r) >= 5) return false;
  return true;
}

Word Word::parse(std::string_view text) {
  if (text == "1" || text.empty()) return Word{};
  std::vector<Letter> letters;
  letters.reserve(text.size());
  for (char c : text) letters.push_back(Letter::from_char(c));
  return from_letters(std::move(letters));
}

Word Word::from_letters(std::vector<Letter> letters) {
  Word w;
  w.letters_ = dehn_reduce(std::move(letters));
  return w;
}

Word Word::unchecked(std::vector<Letter> letters) {
  Word w;
  w.letters_ = std::move(letters);
  return w;
}

std::string Word::str() const {
  if (letters_.empty()) return "1";
  std::string s;
  s.reserve(letters_.size());
  for (Letter x : letters_) s.push_back(x.to_char());
  return s;
}

std::strong_ordering operator<=>(const Word& x, const Word& y) {
  if (auto c = x.size() <=> y.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(x.letters_.begin(), x.letters_.end(),
                                                y.letters_.begin(), y.letters_.end());
}

Word dehn_reduce(const Word& w) { return Word::from_letters(w.letters()); }

Word mul(const Word& u, const Word& v) {
  std::vector<Letter> letters = u.letters();
  letters.insert(letters.end(), v.letters().begin(), v.letters().end());
  return Word::from_letters(std::move(letters));
}

Word mul(std::initializer_list<Word> factors) {
  std::vector<Letter> letters;
  for (const Word& f : factors) letters.insert(letters.end(), f.letters().begin(), f.letters().end());
  return Word::from_letters(std::move(letters));
}

Word inv(const Word& u) {
  std::vector<Letter> letters(u.letters().rbegin(), u.letters().rend());
  for (Letter& x : letters) x = x.inv();
  return Word::unchecked(std::move(letters));
}

Word power(const Word& u, std::int64_t n) {
  const Word base = n >= 0 ? u : inv(u);
  Word result;
  for (std::int64_t i = 0; i < (n >= 0 ? n : -n); ++i) result = mul(result, base);
  return result;
}

bool is_identity(const Word& u) { return dehn_reduce(u.letters()).empty(); }

bool equal_in_group(const Word& u, const Word& v) { return is_identity(mul(u, inv(v))); }

std::array<std::int64_t, 4> abelianize(const Word& u) {
  std::array<std::int64_t, 4> e{};
  for (Letter x : u.letters()) e[x.generator()] += x.sign();
  return e;
}

namespace {

// Exact images in GL(2, F_p) under homomorphisms a->A, b->B, p->CAC^-1,
// q->CBC^-1 with C commuting with [A,B]; these kill the relator, so equal
// group elements always share a fingerprint.
constexpr std::uint64_t kPrime = 2147483647ULL;

struct Mat2 {
  std::uint64_t m[4] = {1, 0, 0, 1};
};

Mat2 mat_mul(const Mat2& x, const Mat2& y) {
  Mat2 r;
  r.m[0] = (x.m[0] * y.m[0] + x.m[1] * y.m[2]) % kPrime;
  r.m[1] = (x.m[0] * y.m[1] + x.m[1] * y.m[3]) % kPrime;
  r.m[2] = (x.m[2] * y.m[0] + x.m[3] * y.m[2]) % kPrime;
  r.m[3] = (x.m[2] * y.m[1] + x.m[3] * y.m[3]) % kPrime;
  return r;
}

std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e) {
  std::uint64_t r = 1;
  b %= kPrime;
  while (e) {
    if (e & 1) r = r * b % kPrime;
    b = b * b % kPrime;
    e >>= 1;
  }
  return r;
}

Mat2 mat_inv(const Mat2& x) {
  const std::uint64_t det = (x.m[0] * x.m[3] % kPrime + kPrime - x.m[1] * x.m[2] % kPrime) % kPrime;
  const std::uint64_t di = pow_mod(det, kPrime - 2);
  Mat2 r;
  r.m[0] = x.m[3] * di % kPrime;
  r.m[1] = (kPrime - x.m[1]) % kPrime * di % kPrime;
  r.m[2] = (kPrime - x.m[2]) % kPrime * di % kPrime;
  r.m[3] = x.m[0] * di % kPrime;
  return r;
}

constexpr int kHoms = 2;

struct Fingerprinter {
  std::array<std::array<Mat2, kLetters>, kHoms> images;

  Fingerprinter() {
    std::mt19937_64 rng(0x5eedf00dULL);
    auto draw = [&] { return 1 + rng() % (kPrime - 1); };
    for (int h = 0; h < kHoms; ++h) {
      auto random_sl2 = [&] {
        Mat2 x;
        x.m[0] = draw();
        x.m[1] = draw();
        x.m[2] = draw();
        x.m[3] = (1 + x.m[1] * x.m[2]) % kPrime * pow_mod(x.m[0], kPrime - 2) % kPrime;
        return x;
      };
      const Mat2 A = random_sl2(), B = random_sl2();
      const Mat2 K = mat_mul(mat_mul(A, B), mat_mul(mat_inv(A), mat_inv(B)));
      Mat2 C = K;
      const std::uint64_t lambda = draw();
      C.m[0] = (C.m[0] + lambda) % kPrime;
      C.m[3] = (C.m[3] + lambda) % kPrime;
      const Mat2 Ci = mat_inv(C);
      const std::array<Mat2, 4> gens = {A, B, mat_mul(mat_mul(C, A), Ci), mat_mul(mat_mul(C, B), Ci)};
      for (int g = 0; g < 4; ++g) {
        images[h][2 * g] = gens[g];
        images[h][2 * g + 1] = mat_inv(gens[g]);
      }
    }
  }
};

const Fingerprinter& fingerprinter() {
  static const Fingerprinter fp;
  return fp;
}

using Fingerprint = std::array<std::uint64_t, 4 * kHoms>;

struct FingerprintHash {
  std::size_t operator()(const Fingerprint& f) const {
    std::uint64_t h = 14695981039346656037ULL;
    for (auto v : f) h = (h ^ v) * 1099511628211ULL;
    return static_cast<std::size_t>(h);
  }
};

struct Node {
  Word word;
  std::array<Mat2, kHoms> image;
};

Fingerprint fingerprint_of(const std::array<Mat2, kHoms>& image) {
  Fingerprint f{};
  for (int h = 0; h < kHoms; ++h)
    for (int j = 0; j < 4; ++j) f[4 * h + j] = image[h].m[j];
  return f;
}

// Only subwords ending at the last letter can be new relator pieces.
bool tail_is_dehn_reduced(const std::vector<Letter>& letters) {
  const std::size_t n = letters.size();
  const auto& table = conjugates();
  for (std::size_t k = 5; k <= std::min<std::size_t>(8, n); ++k) {
    const std::size_t i = n - k;
    for (const auto& r : table.by_first[letters[i].code])
      if (match_length(letters, i, r) >= static_cast<int>(k)) return false;
  }
  return true;
}

}  // namespace

void enumerate_ball(int max_length, const std::function<bool(const Word&)>& visit) {
  if (max_length < 0) return;
  const auto& fp = fingerprinter();
  std::unordered_map<Fingerprint, std::vector<Word>, FingerprintHash> seen;

  std::vector<Node> layer(1);
  seen[fingerprint_of(layer[0].image)].push_back(layer[0].word);
  if (!visit(layer[0].word)) return;

  for (int len = 1; len <= max_length; ++len) {
    std::vector<Node> next;
    for (const Node& node : layer) {
      const auto& w = node.word.letters();
      for (int c = 0; c < kLetters; ++c) {
        const Letter x{static_cast<std::uint8_t>(c)};
        if (!w.empty() && w.back() == x.inv()) continue;
        std::vector<Letter> letters = w;
        letters.push_back(x);
        if (!tail_is_dehn_reduced(letters)) continue;
        Node candidate{Word::unchecked(std::move(letters)), {}};
        for (int h = 0; h < kHoms; ++h) candidate.image[h] = mat_mul(node.image[h], fp.images[h][c]);
        auto& bucket = seen[fingerprint_of(candidate.image)];
        const bool duplicate = std::any_of(bucket.begin(), bucket.end(), [&](const Word& other) {
          return equal_in_group(candidate.word, other);
        });
        if (duplicate) continue;
        bucket.push_back(candidate.word);
        if (!visit(candidate.word)) return;
        next.push_back(std::move(candidate));
      }
    }
    layer = std::move(next);
  }
}

std::vector<Word> enumerate_ball(int max_length) {
  std::vector<Word> out;
  enumerate_ball(max_length, [&](const Word& w) {
    out.push_back(w);
    return true;
  });
  return out;
}

namespace {

void free_words_of_length(std::vector<Letter>& prefix, std::size_t target,
                          const std::function<void(const std::vector<Letter>&)>& visit) {
  if (prefix.size() == target) {
    visit(prefix);
    return;
  }
  for (int c = 0; c < kLetters; ++c) {
    const Letter x{static_cast<std::uint8_t>(c)};
    if (!prefix.empty() && prefix.back() == x.inv()) continue;
    prefix.push_back(x);
    free_words_of_length(prefix, target, visit);
    prefix.pop_back();
  }
}

}  // namespace

void enumerate_free_words(int max_length,
                          const std::function<void(const std::vector<Letter>&)>& visit) {
  std::vector<Letter> prefix;
  for (int len = 0; len <= max_length; ++len) free_words_of_length(prefix, static_cast<std::size_t>(len), visit);
}

}  // namespace surfdiff
