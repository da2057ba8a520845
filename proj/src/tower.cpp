#include "surfdiff/tower.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace surfdiff {

namespace {

std::size_t mix(std::size_t seed, std::uint64_t v) {
  v ^= v >> 33;
  v *= 0xff51afd7ed558ccdULL;
  v ^= v >> 33;
  return seed ^ (static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

constexpr char kGenChar[4] = {'a', 'b', 'p', 'q'};

int gen_from_char(char c) {
  for (int g = 0; g < 4; ++g)
    if (kGenChar[g] == c) return g;
  throw TowerError(std::string("bad generator '") + c + "'");
}

}  // namespace

std::size_t EdgeHash::operator()(const Edge& e) const {
  std::size_t s = static_cast<std::size_t>(e.gen);
  for (auto v : e.h) s = mix(s, static_cast<std::uint64_t>(v));
  return s;
}

std::size_t HeightsHash::operator()(const Heights& h) const {
  std::size_t s = h.size();
  for (auto v : h) s = mix(s, static_cast<std::uint64_t>(v));
  return s;
}

// ---- Cocycle ----

bool Cocycle::in_box(const std::int64_t* h) const {
  if (box_.empty() && level_ > 0) return false;
  for (int j = 0; j < level_; ++j)
    if (h[j] < box_[j].first || h[j] > box_[j].second) return false;
  return true;
}

std::int64_t Cocycle::at(const Edge& e) const {
  auto it = values_.find(e);
  return it == values_.end() ? 0 : it->second;
}

std::int64_t Cocycle::at(int gen, const std::int64_t* h) const {
  if (values_.empty() || !in_box(h)) return 0;
  thread_local Edge scratch;
  scratch.gen = gen;
  scratch.h.assign(h, h + level_);
  return at(scratch);
}

std::int64_t Cocycle::at(int gen, const BigInt* h) const {
  if (values_.empty()) return 0;
  thread_local Heights small;
  small.resize(static_cast<std::size_t>(level_));
  for (int j = 0; j < level_; ++j) {
    if (h[j] < box_[j].first || h[j] > box_[j].second) return 0;
    small[j] = static_cast<std::int64_t>(h[j]);
  }
  return at(gen, small.data());
}

void Cocycle::set(const Edge& e, std::int64_t value) {
  if (static_cast<int>(e.h.size()) != level_) throw TowerError("edge level mismatch");
  if (value == 0) {
    if (values_.erase(e)) rebuild_box();
    return;
  }
  values_[e] = value;
  if (box_.empty()) box_.assign(static_cast<std::size_t>(level_), {INT64_MAX, INT64_MIN});
  for (int j = 0; j < level_; ++j) {
    box_[j].first = std::min(box_[j].first, e.h[j]);
    box_[j].second = std::max(box_[j].second, e.h[j]);
  }
}

void Cocycle::add(const Edge& e, std::int64_t value) { set(e, at(e) + value); }

void Cocycle::rebuild_box() {
  box_.clear();
  if (values_.empty()) return;
  box_.assign(static_cast<std::size_t>(level_), {INT64_MAX, INT64_MIN});
  for (const auto& [e, v] : values_)
    for (int j = 0; j < level_; ++j) {
      box_[j].first = std::min(box_[j].first, e.h[j]);
      box_[j].second = std::max(box_[j].second, e.h[j]);
    }
}

std::vector<std::pair<Edge, std::int64_t>> Cocycle::entries() const {
  std::vector<std::pair<Edge, std::int64_t>> out(values_.begin(), values_.end());
  std::sort(out.begin(), out.end());
  return out;
}

Cocycle Cocycle::scaled(std::int64_t k) const {
  Cocycle c(level_);
  if (k == 0) return c;
  for (const auto& [e, v] : values_) c.values_[e] = v * k;
  c.box_ = box_;
  return c;
}

std::int64_t Cocycle::content() const {
  std::int64_t g = 0;
  for (const auto& [e, v] : values_) g = std::gcd(g, v);
  return g;
}

Cocycle Cocycle::base(std::array<std::int64_t, 4> values) {
  Cocycle c(0);
  for (int g = 0; g < 4; ++g)
    if (values[g] != 0) c.set(Edge{g, {}}, values[g]);
  return c;
}

// ---- Tower ----

const Word& Tower::shift(int i) const {
  const auto& s = level(i).shift;
  if (!s) throw TowerError("level " + std::to_string(i) + " has no shift word");
  return *s;
}

bool Tower::complete() const {
  return std::all_of(levels_.begin(), levels_.end(), [](const Level& l) { return l.shift.has_value(); });
}

void Tower::push(Cocycle c, std::optional<Word> shift) {
  if (c.level() != depth())
    throw TowerError("cocycle of level " + std::to_string(c.level()) + " pushed at depth " +
                     std::to_string(depth()));
  levels_.push_back(Level{std::move(c), std::move(shift)});
}

void Tower::set_shift(int i, Word w) { levels_.at(static_cast<std::size_t>(i)).shift = std::move(w); }

void Tower::set_cocycle(int i, Cocycle c) {
  if (c.level() != i) throw TowerError("cocycle level mismatch");
  levels_.at(static_cast<std::size_t>(i)).cocycle = std::move(c);
}

void Tower::pop() { levels_.pop_back(); }

Tower Tower::truncated(int d) const {
  Tower t;
  t.levels_.assign(levels_.begin(), levels_.begin() + std::min(d, depth()));
  return t;
}

void Tower::write(std::ostream& out) const {
  for (int i = 0; i < depth(); ++i) {
    out << "level " << i << "\n";
    if (levels_[i].shift) out << "shift " << levels_[i].shift->str() << "\n";
    for (const auto& [e, v] : levels_[i].cocycle.entries()) {
      out << kGenChar[e.gen];
      for (auto x : e.h) out << ' ' << x;
      out << ' ' << v << "\n";
    }
  }
}

Tower Tower::read(std::istream& in) {
  Tower t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    auto fail = [&](const std::string& why) {
      throw TowerError("line " + std::to_string(lineno) + ": " + why);
    };
    if (head == "level") {
      int i = -1;
      if (!(ls >> i) || i != t.depth()) fail("levels must be consecutive from 0");
      t.levels_.push_back(Level{Cocycle(i), std::nullopt});
    } else if (head == "shift") {
      std::string w;
      if (t.levels_.empty() || !(ls >> w)) fail("shift outside a level");
      t.levels_.back().shift = Word::parse(w);
    } else {
      if (t.levels_.empty() || head.size() != 1) fail("entry outside a level");
      Edge e{gen_from_char(head[0]), {}};
      const int i = t.depth() - 1;
      std::vector<std::int64_t> nums;
      std::int64_t x;
      while (ls >> x) nums.push_back(x);
      if (!ls.eof() || static_cast<int>(nums.size()) != i + 1) fail("expected " + std::to_string(i + 1) + " integers");
      e.h.assign(nums.begin(), nums.end() - 1);
      if (nums.back() == 0) fail("zero entry");
      t.levels_.back().cocycle.set(e, nums.back());
    }
  }
  return t;
}

std::string Tower::to_text() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

Tower Tower::from_text(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

bool operator==(const Tower& x, const Tower& y) {
  if (x.depth() != y.depth()) return false;
  for (int i = 0; i < x.depth(); ++i) {
    if (!(x.levels_[i].cocycle == y.levels_[i].cocycle)) return false;
    if (x.levels_[i].shift != y.levels_[i].shift) return false;
  }
  return true;
}

Tower Tower::standard_base() {
  Tower t;
  t.push(Cocycle::base({1, 0, 0, 0}), Word::parse("a"));
  return t;
}

// ---- path lifting ----

// A positive letter crosses the edge at the current state; coordinate j moves
// by φ_{j}(g, h_{<j}) with the pre-step heights, so update from the top down.
// A negative letter retraces the edge ending here: solve bottom up.
void step(const Tower& t, Letter x, Heights& h) {
  const int n = static_cast<int>(h.size());
  const int g = x.generator();
  if (!x.inverse()) {
    for (int j = n - 1; j >= 0; --j) h[j] += t.cocycle(j).at(g, h.data());
  } else {
    for (int j = 0; j < n; ++j) h[j] -= t.cocycle(j).at(g, h.data());
  }
}

void step(const Tower& t, Letter x, BigHeights& h) {
  const int n = static_cast<int>(h.size());
  const int g = x.generator();
  if (!x.inverse()) {
    for (int j = n - 1; j >= 0; --j) h[j] += t.cocycle(j).at(g, h.data());
  } else {
    for (int j = 0; j < n; ++j) h[j] -= t.cocycle(j).at(g, h.data());
  }
}

namespace {

void check_depth(const Tower& t, int n) {
  if (n > t.depth() || n < 0)
    throw TowerError("requested " + std::to_string(n) + " levels, tower has " + std::to_string(t.depth()));
}

}  // namespace

Heights trace(const Word& u, const Heights& start, const Tower& t, int n) {
  check_depth(t, n);
  Heights h(static_cast<std::size_t>(n), 0);
  std::copy_n(start.begin(), std::min<std::size_t>(start.size(), h.size()), h.begin());
  for (Letter x : u.letters()) step(t, x, h);
  return h;
}

Heights trace(const Word& u, const Tower& t, int n) { return trace(u, Heights{}, t, n); }

BigHeights trace(const Word& u, const BigHeights& start, const Tower& t) {
  check_depth(t, static_cast<int>(start.size()));
  BigHeights h = start;
  for (Letter x : u.letters()) step(t, x, h);
  return h;
}

std::vector<Heights> trace_increments(const Word& u, const Heights& start, const Tower& t, int n) {
  Heights h = trace(Word{}, start, t, n);
  std::vector<Heights> log;
  for (Letter x : u.letters()) {
    Heights before = h;
    step(t, x, h);
    for (std::size_t j = 0; j < h.size(); ++j) before[j] = h[j] - before[j];
    log.push_back(std::move(before));
  }
  return log;
}

std::int64_t cochain_sum(const Word& u, const Heights& start, const Tower& t, const Cocycle& c) {
  Heights h = start;
  std::int64_t sum = 0;
  for (Letter x : u.letters()) {
    if (!x.inverse()) {
      sum += c.at(x.generator(), h.data());
      step(t, x, h);
    } else {
      step(t, x, h);
      sum -= c.at(x.generator(), h.data());
    }
  }
  return sum;
}

namespace {

std::int64_t face_sum(const Heights& base, const Tower& t, const Cocycle& c) {
  return cochain_sum(relator_word(), base, t, c);
}

// Base vertex of the face whose boundary reads relator letter k at h.
Heights walk_back(const Tower& t, Heights h, int k) {
  const auto& r = relator();
  for (int j = k - 1; j >= 0; --j) step(t, r[j].inv(), h);
  return h;
}

int relator_position(Letter x) {
  const auto& r = relator();
  for (int k = 0; k < 8; ++k)
    if (r[k] == x) return k;
  return -1;
}

}  // namespace

std::optional<Heights> closedness_witness(const Cocycle& c, const Tower& t) {
  const int i = c.level();
  check_depth(t, i);
  for (const auto& [e, v] : c.entries()) {
    const Letter pos = Letter::make(e.gen, false), neg = pos.inv();
    Heights plus = walk_back(t, e.h, relator_position(pos));
    if (face_sum(plus, t, c) != 0) return plus;
    Heights end = e.h;
    step(t, pos, end);
    Heights minus = walk_back(t, end, relator_position(neg));
    if (face_sum(minus, t, c) != 0) return minus;
  }
  return std::nullopt;
}

bool verify_cocycle(const Cocycle& c, const Tower& t) { return !closedness_witness(c, t).has_value(); }

std::int64_t pairing(const Word& u, int i, const Tower& t) {
  Heights h = trace(u, t, i + 1);
  for (int j = 0; j < i; ++j)
    if (h[j] != 0)
      throw NotInSubgroup(u.str() + " is not in level " + std::to_string(i) + " subgroup (coordinate " +
                          std::to_string(j + 1) + " = " + std::to_string(h[j]) + ")");
  return h[i];
}

bool membership(const Word& u, int n, const Tower& t) {
  Heights h = trace(u, t, n);
  return std::all_of(h.begin(), h.end(), [](std::int64_t x) { return x == 0; });
}

std::optional<int> killing_level(const Word& u, int n, const Tower& t) {
  Heights h = trace(u, t, n);
  for (int j = 0; j < n; ++j)
    if (h[j] != 0) return j + 1;
  return std::nullopt;
}

Digits digits(const Word& u, int n, const Tower& t) {
  Digits out;
  Word rest = u;
  for (int k = 0; k < n; ++k) {
    const std::int64_t d = pairing(rest, k, t);
    out.d.push_back(d);
    if (d != 0) rest = mul(power(t.shift(k), -d), rest);
  }
  out.residual = rest;
  return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> excursion(const Word& u, const Tower& t, int n) {
  Heights h = trace(Word{}, t, n);
  std::vector<std::pair<std::int64_t, std::int64_t>> range(static_cast<std::size_t>(n), {0, 0});
  for (Letter x : u.letters()) {
    step(t, x, h);
    for (int j = 0; j < n; ++j) {
      range[j].first = std::min(range[j].first, h[j]);
      range[j].second = std::max(range[j].second, h[j]);
    }
  }
  return range;
}

void trace_shift_power(int k, const BigInt& n, BigHeights& h, const Tower& t) {
  if (n == 0) return;
  const int m = static_cast<int>(h.size());
  check_depth(t, m);
  for (int j = 0; j < std::min(k, m); ++j)
    if (h[j] != 0) throw TowerError("shift power applied off the level-" + std::to_string(k) + " base fiber");
  if (k >= m) return;  // a loop in every cover we track

  const Word pass = n > 0 ? t.shift(k) : inv(t.shift(k));
  BigInt remaining = abs(n);

  // Coordinates <= k along one pass depend only on lower levels, so every
  // pass has the same profile for coordinate k relative to its start.
  std::int64_t lo = 0, hi = 0, drift = 0;
  {
    Heights z(static_cast<std::size_t>(k + 1), 0);
    for (Letter x : pass.letters()) {
      step(t, x, z);
      lo = std::min(lo, z[k]);
      hi = std::max(hi, z[k]);
    }
    drift = z[k];
    for (int j = 0; j < k; ++j)
      if (z[j] != 0) throw TowerError("shift word is not in its subgroup");
  }

  bool any = false;
  std::int64_t blo = INT64_MAX, bhi = INT64_MIN;
  for (int j = k + 1; j < m; ++j) {
    const auto& box = t.cocycle(j).box();
    if (box.empty()) continue;
    any = true;
    blo = std::min(blo, box[k].first);
    bhi = std::max(bhi, box[k].second);
  }

  auto simulate_pass = [&] {
    for (Letter x : pass.letters()) step(t, x, h);
    remaining -= 1;
  };

  if (drift == 0) {
    if (remaining > 1000000) throw TowerError("power of a shift word with zero drift is too large");
    while (remaining > 0) simulate_pass();
    return;
  }
  if (!any) {
    h[k] += remaining * drift;
    return;
  }
  while (remaining > 0) {
    const BigInt c = h[k];
    if (c + hi < blo) {
      if (drift < 0) {
        h[k] += remaining * drift;
        return;
      }
      BigInt passes = (BigInt(blo) - c - hi + drift - 1) / drift;
      if (passes > remaining) passes = remaining;
      h[k] += passes * drift;
      remaining -= passes;
    } else if (c + lo > bhi) {
      if (drift > 0) {
        h[k] += remaining * drift;
        return;
      }
      BigInt passes = (c + lo - bhi + (-drift) - 1) / (-drift);
      if (passes > remaining) passes = remaining;
      h[k] += passes * drift;
      remaining -= passes;
    } else {
      simulate_pass();
    }
  }
}

BigHeights vertex_of_digits(const std::vector<BigInt>& d, const Tower& t) {
  const int m = static_cast<int>(d.size());
  BigHeights h(static_cast<std::size_t>(m), BigInt(0));
  for (int k = m - 1; k >= 0; --k) trace_shift_power(k, -d[k], h, t);
  return h;
}

std::vector<BigInt> digits_of_vertex(const BigHeights& v, const Tower& t) {
  const int m = static_cast<int>(v.size());
  std::vector<BigInt> d;
  d.reserve(v.size());
  for (int k = 0; k < m; ++k) {
    // G_k: coordinate k of the lift of w_{k-1}^{-d_k} ... w_0^{-d_1}
    BigHeights g(static_cast<std::size_t>(k + 1), BigInt(0));
    for (int j = k - 1; j >= 0; --j) trace_shift_power(j, -d[j], g, t);
    d.push_back(g[k] - v[k]);
  }
  return d;
}

}  // namespace surfdiff
