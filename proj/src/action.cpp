#include "surfdiff/action.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <string>

namespace surfdiff {

namespace {

struct Undecided {
  int level;
};

}  // namespace

UndecidedTile::UndecidedTile(int level, unsigned bits)
    : std::runtime_error("undecided terminality at level " + std::to_string(level) + " with " +
                         std::to_string(bits) + " bits"),
      level_(level) {}

TowerAction::TowerAction(Tower tower, std::vector<double> eps)
    : tower_(std::move(tower)), eps_(std::move(eps)), cache_(std::make_shared<Cache>()) {
  if (depth() > tower_.depth()) throw std::invalid_argument("more steps than tower levels");
  for (int i = 0; i < depth(); ++i) {
    if (!(eps_[static_cast<std::size_t>(i)] > 0)) throw std::invalid_argument("steps must be positive");
    tower_.shift(i);  // throws if missing
  }
}

TowerAction TowerAction::with_epsilon(int level, double eps) const {
  std::vector<double> e = eps_;
  e.at(static_cast<std::size_t>(level - 1)) = eps;
  return TowerAction(tower_, std::move(e));
}

const std::vector<StepMap>& TowerAction::maps() const {
  const unsigned bits = working_bits();
  std::lock_guard lock(cache_->mutex);
  auto it = cache_->maps.find(bits);
  if (it != cache_->maps.end()) return it->second;
  std::vector<StepMap> out;
  Real lo = 0, hi = 1;
  for (double e : eps_) {
    out.emplace_back(lo, hi, e);
    std::tie(lo, hi) = out.back().fundamental_interval();
  }
  return cache_->maps.emplace(bits, std::move(out)).first->second;
}

const StepMap& TowerAction::map(int n) const {
  if (n < 1 || n > depth()) throw std::out_of_range("no map at level " + std::to_string(n));
  return maps()[static_cast<std::size_t>(n - 1)];
}

std::pair<Real, Real> TowerAction::interval(int n) const {
  if (n == 0) return {Real(0), Real(1)};
  return map(n).fundamental_interval();
}

PointAddress TowerAction::address_of(const Real& t, int N, unsigned max_bits) const {
  if (N < 0 || N > depth()) throw std::out_of_range("stage beyond the tower");
  if (!(t > 0 && t < 1)) throw std::domain_error("address of a point outside (0, 1)");
  const auto attempt = [&]() -> PointAddress {
    PointAddress x;
    Real y = t;
    for (int i = 1; i <= N; ++i) {
      const StepMap& f = map(i);
      TileIndex ti = f.tile_index(y);
      if (ti.status == TileStatus::Undecided) throw Undecided{i};
      x.digits.push_back(std::move(ti.k));
      if (ti.status == TileStatus::Terminal) {
        x.tail = f.anchor();
        x.terminal = true;
        return x;
      }
      y = std::move(ti.tail);
    }
    x.tail = std::move(y);
    return x;
  };
  try {
    return attempt();
  } catch (const Undecided& u) {
    const unsigned bits = working_bits();
    if (2 * bits > max_bits) throw UndecidedTile(u.level, bits);
    PrecisionScope wider(2 * bits);
    return address_of(t, N, max_bits);
  }
}

Real TowerAction::numeric_of(const PointAddress& x) const {
  Real y = x.tail;
  for (int i = x.depth(); i >= 1; --i) y = map(i).eval_pow(x.digits[static_cast<std::size_t>(i - 1)], y);
  return y;
}

std::vector<BigInt> TowerAction::act_digits(const Word& g, const std::vector<BigInt>& d) const {
  if (d.size() > static_cast<std::size_t>(tower_.depth())) throw std::out_of_range("address deeper than the tower");
  BigHeights v = vertex_of_digits(d, tower_);
  const Word back = inv(g);
  for (Letter x : back.letters()) step(tower_, x, v);
  return digits_of_vertex(v, tower_);
}

PointAddress TowerAction::act(const Word& g, const PointAddress& x) const {
  PointAddress out;
  out.digits = act_digits(g, x.digits);
  out.tail = x.tail;
  out.terminal = x.terminal;
  return out;
}

Real TowerAction::act_numeric(const Word& g, const Real& t, int N) const {
  if (!(t > 0 && t < 1)) return t;
  return numeric_of(act(g, address_of(t, N)));
}

Series TowerAction::pull(const std::vector<BigInt>& d, Series s) const {
  for (std::size_t i = 0; i < d.size(); ++i) s = map(static_cast<int>(i) + 1).apply_pow(-d[i], s);
  return s;
}

Series TowerAction::push(const std::vector<BigInt>& d, Series s) const {
  for (std::size_t i = d.size(); i-- > 0;) s = map(static_cast<int>(i) + 1).apply_pow(d[i], s);
  return s;
}

Series TowerAction::act_series(const Word& g, const PointAddress& x, int order, Side side) const {
  std::vector<BigInt> d = x.digits;
  if (x.terminal && side == Side::Left) d.back() -= 1;
  const std::vector<BigInt> image = act_digits(g, d);
  return push(image, pull(d, Series::variable(numeric_of(x), order)));
}

Real TowerAction::act_derivative(const Word& g, const PointAddress& x, int m, Side side) const {
  if (m < 1) throw std::invalid_argument("derivative order must be positive");
  return act_series(g, x, m, side).derivative(m);
}

std::optional<int> TowerAction::stabilizer_level(const PointAddress& x) {
  if (x.terminal) return x.depth();
  return std::nullopt;
}

std::vector<PointAddress> k_points(const TowerAction& act, int n, const Real& lo, const Real& hi,
                                   std::int64_t deep_bound, std::size_t limit) {
  std::vector<std::pair<Real, PointAddress>> found;
  if (n < 1 || !(lo < hi)) return {};
  if (n > act.depth()) throw std::out_of_range("K-points beyond the tower");
  // tiles accumulate at 0 and 1
  if (lo <= 0 || hi >= 1) throw std::domain_error("K-point window must be compact in (0, 1)");
  const StepMap& f1 = act.map(1);
  const BigInt k_lo = f1.tile_index(lo).k, k_hi = f1.tile_index(hi).k;

  std::vector<BigInt> d;
  std::function<void(int)> walk = [&](int m) {
    auto visit = [&](const BigInt& k) {
      if (found.size() >= limit) return;
      d.push_back(k);
      PointAddress x{d, act.map(m).anchor(), true};
      const Real y = act.numeric_of(x);
      if (y >= lo && y <= hi) found.emplace_back(y, std::move(x));
      if (m < n) walk(m + 1);
      d.pop_back();
    };
    if (m == 1) {
      for (BigInt k = k_lo; k <= k_hi && found.size() < limit; ++k) visit(k);
    } else {
      for (std::int64_t k = -deep_bound; k <= deep_bound && found.size() < limit; ++k) visit(BigInt(k));
    }
  };
  walk(1);
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<PointAddress> out;
  out.reserve(found.size());
  for (auto& [y, x] : found) out.push_back(std::move(x));
  return out;
}

std::vector<OrbitPoint> orbit_sample(const TowerAction& act, const Real& t, int L, int N, std::size_t max_points) {
  if (!(t > 0 && t < 1)) return {OrbitPoint{t, PointAddress{}, 0}};
  const PointAddress x = act.address_of(t, N);
  const Tower& tower = act.tower();
  std::map<BigHeights, int> seen;
  std::deque<BigHeights> queue;
  BigHeights v0 = vertex_of_digits(x.digits, tower);
  seen.emplace(v0, 0);
  queue.push_back(std::move(v0));
  while (!queue.empty() && seen.size() < max_points) {
    BigHeights v = std::move(queue.front());
    queue.pop_front();
    const int dist = seen.at(v);
    if (dist == L) continue;
    for (std::uint8_t c = 0; c < kLetters; ++c) {
      BigHeights w = v;
      step(tower, Letter{c}, w);
      if (seen.emplace(w, dist + 1).second) queue.push_back(std::move(w));
      if (seen.size() >= max_points) break;
    }
  }
  std::vector<OrbitPoint> out;
  out.reserve(seen.size());
  for (const auto& [v, dist] : seen) {
    PointAddress y{digits_of_vertex(v, tower), x.tail, x.terminal};
    Real value = act.numeric_of(y);
    out.push_back(OrbitPoint{std::move(value), std::move(y), dist});
  }
  std::sort(out.begin(), out.end(), [](const OrbitPoint& p, const OrbitPoint& q) { return p.value < q.value; });
  return out;
}

}  // namespace surfdiff
