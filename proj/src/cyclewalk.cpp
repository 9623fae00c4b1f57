#include "utsp/cyclewalk.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "utsp/error.hpp"

namespace utsp {

namespace {

int mod(long long v, int m) { return static_cast<int>(((v % m) + m) % m); }

}  // namespace

CycleWalk::CycleWalk(int modulus, std::vector<int> values) : m_(modulus), values_(std::move(values)) {
  if (m_ < 2) throw Error(ErrorKind::parameter, "cycle size must be at least 2");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] < 0 || values_[i] >= m_) {
      throw Error(ErrorKind::parameter, "walk value out of [0, M) at time " + std::to_string(i));
    }
    if (i > 0) {
      int step = mod(values_[i] - values_[i - 1], m_);
      if (step != 1 && step != m_ - 1) {
        throw Error(ErrorKind::parameter, "walk step is not +-1 at time " + std::to_string(i));
      }
    }
  }
}

int cycle_distance(int a, int b, int m) {
  int d = mod(static_cast<long long>(a) - b, m);
  return std::min(d, m - d);
}

int cycle_diameter(std::vector<int> residues, int m) {
  if (residues.size() <= 1) return 0;
  std::sort(residues.begin(), residues.end());
  residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
  if (residues.size() == 1) return 0;
  // The set lies in the complement of its largest gap; brute force over pairs
  // would be quadratic, but the diameter is attained by the pair that is
  // farthest apart, which we find in a single sweep with two pointers.
  int best = 0;
  std::size_t k = residues.size();
  std::size_t far = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (far < i) far = i;
    while (far + 1 < k + i && residues[(far + 1) % k] != residues[i]) {
      int nxt = mod(residues[(far + 1) % k] - residues[i], m);
      if (nxt > m / 2) break;
      ++far;
    }
    for (std::size_t cand : {far, far + 1}) {
      if (cand >= k + i) continue;
      best = std::max(best, cycle_distance(residues[i], residues[cand % k], m));
    }
  }
  return best;
}

int integer_cube_root(long long m) {
  if (m < 0) throw Error(ErrorKind::parameter, "cube root of a negative number");
  long long s = static_cast<long long>(std::cbrt(static_cast<double>(m)));
  while (s > 0 && s * s * s > m) --s;
  while ((s + 1) * (s + 1) * (s + 1) <= m) ++s;
  return static_cast<int>(s);
}

std::vector<OscillationTag> classify_times(const CycleWalk& walk, int delta) {
  if (delta < 1) throw Error(ErrorKind::parameter, "oscillation window must be positive");
  const int m = walk.modulus();
  const std::size_t n = walk.size();
  std::vector<std::vector<std::size_t>> visits(static_cast<std::size_t>(m));
  for (std::size_t t = 0; t < n; ++t) visits[static_cast<std::size_t>(walk[t])].push_back(t);

  auto first_after = [&](int value, std::size_t t) -> std::optional<std::size_t> {
    const auto& v = visits[static_cast<std::size_t>(value)];
    auto it = std::upper_bound(v.begin(), v.end(), t);
    if (it == v.end()) return std::nullopt;
    return *it;
  };

  // A value at distance > delta exists only if delta < floor(M/2). Between two
  // visits of a the walk never crosses a, so by continuity it leaves the
  // window exactly when it first hits a + delta + 1 or a - delta - 1.
  const bool window_escapable = delta < m / 2;
  std::vector<OscillationTag> tags(n);
  for (std::size_t t = 0; t < n; ++t) {
    int a = walk[t];
    auto next = first_after(a, t);
    if (!next) continue;
    tags[t].next_visit = next;
    tags[t].tag = Oscillation::small;
    if (!window_escapable) continue;
    for (int target : {mod(a + delta + 1, m), mod(a - delta - 1, m)}) {
      auto hit = first_after(target, t);
      if (hit && *hit < *next) tags[t].tag = Oscillation::large;
    }
  }
  return tags;
}

DichotomyOutcome dichotomy(const CycleWalk& walk, int s) {
  const int m = walk.modulus();
  const std::size_t n = walk.size();
  const long long s3 = static_cast<long long>(s) * s * s;
  if (s < 1 || s3 > m) {
    throw Error(ErrorKind::parameter,
                "need 1 <= s <= M^(1/3); got s=" + std::to_string(s) + ", M=" + std::to_string(m));
  }
  if (n < static_cast<std::size_t>(s3)) {
    throw Error(ErrorKind::parameter, "walk shorter than one interval of s^3 times");
  }
  const int delta = s * s;
  std::vector<OscillationTag> tags = classify_times(walk, delta);

  std::size_t large = 0;
  for (const auto& tag : tags) large += tag.tag == Oscillation::large ? 1 : 0;

  DichotomyOutcome outcome;
  if (large * static_cast<std::size_t>(s) > n) {
    // CASE 1: pigeonhole the large-oscillation times by value.
    std::vector<std::size_t> count(static_cast<std::size_t>(m), 0);
    for (std::size_t t = 0; t < n; ++t) {
      if (tags[t].tag == Oscillation::large) ++count[static_cast<std::size_t>(walk[t])];
    }
    int a = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
    ZigZag z;
    z.a = a;
    bool plus = false;
    bool minus = false;
    for (std::size_t t = 0; t < n; ++t) {
      if (walk[t] != a || tags[t].tag != Oscillation::large) continue;
      std::size_t exit = t + 1;
      while (cycle_distance(walk[exit], a, m) <= delta) ++exit;
      // Record the last time inside the window; it sits exactly at a +- s^2.
      std::size_t edge = exit - 1;
      z.i.push_back(t);
      z.j.push_back(edge);
      if (walk[edge] == mod(a + delta, m)) plus = true;
      if (walk[edge] == mod(a - delta, m)) minus = true;
    }
    z.both_sides = plus && minus;
    outcome = std::move(z);
  } else {
    // CASE 2: the interval of s^3 times with the fewest no/large times.
    std::size_t len = static_cast<std::size_t>(s3);
    std::size_t intervals = n / len;
    std::size_t best = 0;
    std::size_t best_bad = n + 1;
    for (std::size_t k = 0; k < intervals; ++k) {
      std::size_t bad = 0;
      for (std::size_t t = k * len; t < (k + 1) * len; ++t) {
        bad += tags[t].tag == Oscillation::small ? 0 : 1;
      }
      if (bad < best_bad) {
        best_bad = bad;
        best = k;
      }
    }
    Confined c;
    c.first = best * len;
    c.last = c.first + len - 1;
    c.bad_times = best_bad;
    std::vector<std::size_t> count(static_cast<std::size_t>(m), 0);
    for (std::size_t t = c.first; t <= c.last; ++t) ++count[static_cast<std::size_t>(walk[t])];
    c.a = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
    for (std::size_t t = c.first; t <= c.last; ++t) {
      if (walk[t] == c.a) c.visits.push_back(t);
    }
    outcome = std::move(c);
  }
  if (auto why = check_outcome(walk, s, outcome)) {
    throw Error(ErrorKind::construction, "dichotomy witness rejected: " + *why);
  }
  return outcome;
}

std::optional<std::string> check_outcome(const CycleWalk& walk, int s,
                                         const DichotomyOutcome& outcome) {
  const int m = walk.modulus();
  const std::size_t n = walk.size();
  const int delta = s * s;
  if (const auto* z = std::get_if<ZigZag>(&outcome)) {
    if (z->i.size() != z->j.size()) return "index lists differ in length";
    if (z->i.empty()) return "empty zig-zag";
    std::size_t prev = 0;
    bool first = true;
    bool plus = false;
    bool minus = false;
    for (std::size_t mu = 0; mu < z->m(); ++mu) {
      for (std::size_t t : {z->i[mu], z->j[mu]}) {
        if (t >= n) return "index beyond the walk";
        if (!first && t <= prev) return "indices are not strictly interleaved";
        prev = t;
        first = false;
      }
      if (walk[z->i[mu]] != z->a) return "a_i differs from a at mu=" + std::to_string(mu);
      int aj = walk[z->j[mu]];
      bool up = aj == mod(z->a + delta, m);
      bool down = aj == mod(z->a - delta, m);
      if (!up && !down) return "a_j is not a +- s^2 at mu=" + std::to_string(mu);
      plus = plus || up;
      minus = minus || down;
    }
    if (z->both_sides != (plus && minus)) return "both_sides flag is inconsistent";
    // m > N / (s M); for N = M^2 this is m > M / s.
    if (static_cast<long double>(z->m()) * s * m <= static_cast<long double>(n)) {
      return "zig-zag too short: m=" + std::to_string(z->m());
    }
    return std::nullopt;
  }
  const auto& c = std::get<Confined>(outcome);
  const std::size_t s3 = static_cast<std::size_t>(s) * s * s;
  if (c.first > c.last || c.last >= n) return "interval outside the walk";
  if (c.last - c.first >= s3) return "interval length is not below s^3";
  std::size_t need = static_cast<std::size_t>((s + 6) / 7);
  if (c.visits.size() < std::max<std::size_t>(need, 1)) {
    return "too few visits: " + std::to_string(c.visits.size()) + " < ceil(s/7)";
  }
  for (std::size_t k = 0; k < c.visits.size(); ++k) {
    std::size_t t = c.visits[k];
    if (t < c.first || t > c.last) return "visit outside the interval";
    if (k > 0 && t <= c.visits[k - 1]) return "visits not strictly increasing";
    if (walk[t] != c.a) return "visit value differs from a";
  }
  return std::nullopt;
}

std::string_view to_string(WalkKind kind) {
  switch (kind) {
    case WalkKind::winding: return "winding";
    case WalkKind::constant: return "constant";
    case WalkKind::revolution: return "revolution";
    case WalkKind::tight: return "tight";
    case WalkKind::random: return "random";
  }
  return "unknown";
}

WalkKind parse_walk_kind(std::string_view name) {
  for (WalkKind k : {WalkKind::winding, WalkKind::constant, WalkKind::revolution, WalkKind::tight,
                     WalkKind::random}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::parameter, "unknown walk kind '" + std::string(name) + "'");
}

CycleWalk make_walk(WalkKind kind, int m, int s, std::uint64_t seed,
                    std::optional<std::size_t> length) {
  if (m < 2) throw Error(ErrorKind::parameter, "cycle size must be at least 2");
  if (kind == WalkKind::tight &&
      (s < 1 || static_cast<long long>(s) * s * s > m)) {
    throw Error(ErrorKind::parameter, "tight walk needs 1 <= s <= M^(1/3)");
  }
  const std::size_t n = length.value_or(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  if (n == 0) throw Error(ErrorKind::parameter, "walk length must be positive");

  std::vector<int> steps;
  steps.reserve(n - 1);
  switch (kind) {
    case WalkKind::winding:
      for (std::size_t t = 0; t + 1 < n; ++t) steps.push_back(+1);
      break;
    case WalkKind::constant:
      for (std::size_t t = 0; t + 1 < n; ++t) steps.push_back(t % 2 == 0 ? +1 : -1);
      break;
    case WalkKind::revolution: {
      // Alternate +1/-1, but once every M steps insert an extra +1; the walk
      // drifts by one every M steps and so winds once over M^2 steps.
      bool up = true;
      for (std::size_t t = 0; t + 1 < n; ++t) {
        if ((t + 1) % static_cast<std::size_t>(m) == 0) {
          steps.push_back(+1);
        } else {
          steps.push_back(up ? +1 : -1);
          up = !up;
        }
      }
      break;
    }
    case WalkKind::tight: {
      // Oscillate s times between the base and base + s^2, then climb s^2.
      std::vector<int> sub;
      const int s2 = s * s;
      for (int k = 0; k < s; ++k) {
        sub.insert(sub.end(), static_cast<std::size_t>(s2), +1);
        sub.insert(sub.end(), static_cast<std::size_t>(s2), -1);
      }
      sub.insert(sub.end(), static_cast<std::size_t>(s2), +1);
      for (std::size_t t = 0; t + 1 < n; ++t) steps.push_back(sub[t % sub.size()]);
      break;
    }
    case WalkKind::random: {
      std::mt19937_64 rng(seed);
      std::uint64_t bits = 0;
      int left = 0;
      for (std::size_t t = 0; t + 1 < n; ++t) {
        if (left == 0) {
          bits = rng();
          left = 64;
        }
        steps.push_back((bits & 1) ? +1 : -1);
        bits >>= 1;
        --left;
      }
      break;
    }
  }
  std::vector<int> values;
  values.reserve(n);
  values.push_back(0);
  for (int step : steps) values.push_back(mod(values.back() + step, m));
  return CycleWalk(m, std::move(values));
}

void write_walk(std::ostream& out, const CycleWalk& walk) {
  out << "M=" << walk.modulus() << " N=" << walk.size() << '\n';
  if (walk.size() == 0) return;
  out << walk[0] << '\n';
  for (std::size_t t = 1; t < walk.size(); ++t) {
    int step = mod(walk[t] - walk[t - 1], walk.modulus()) == 1 ? +1 : -1;
    out << (step > 0 ? "+1" : "-1") << '\n';
  }
}

CycleWalk read_walk(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::format, "walk line " + std::to_string(lineno) + ": " + why);
  };
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) fail("empty walk file");
  int m = 0;
  long long n = 0;
  {
    std::istringstream header(line);
    std::string a;
    std::string b;
    if (!(header >> a >> b) || a.rfind("M=", 0) != 0 || b.rfind("N=", 0) != 0) {
      fail("expected header 'M=<int> N=<int>'");
    }
    try {
      m = std::stoi(a.substr(2));
      n = std::stoll(b.substr(2));
    } catch (const std::exception&) {
      fail("bad header numbers");
    }
  }
  if (m < 2 || n < 1) fail("header values out of range");
  if (!next_line()) fail("missing start residue");
  std::vector<int> values;
  values.reserve(static_cast<std::size_t>(n));
  try {
    values.push_back(std::stoi(line));
  } catch (const std::exception&) {
    fail("bad start residue");
  }
  if (values[0] < 0 || values[0] >= m) fail("start residue outside [0, M)");
  while (static_cast<long long>(values.size()) < n) {
    if (!next_line()) fail("walk ends after " + std::to_string(values.size()) + " values");
    int step = 0;
    try {
      step = std::stoi(line);
    } catch (const std::exception&) {
      fail("bad step");
    }
    if (step != 1 && step != -1) fail("step must be +1 or -1");
    values.push_back(mod(values.back() + step, m));
  }
  return CycleWalk(m, std::move(values));
}

}  // namespace utsp
