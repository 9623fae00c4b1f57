#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace utsp {

/// A walk on Z/M whose consecutive values differ by +1 or -1. Values are
/// stored in [0, M); times are 0-based.
class CycleWalk {
 public:
  CycleWalk(int modulus, std::vector<int> values);

  int modulus() const { return m_; }
  std::size_t size() const { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  const std::vector<int>& values() const { return values_; }

 private:
  int m_;
  std::vector<int> values_;
};

/// Metric on Z/M: min(d, M - d).
int cycle_distance(int a, int b, int m);
/// Diameter, in the cycle metric, of a set of residues.
int cycle_diameter(std::vector<int> residues, int m);
/// Largest s with s^3 <= m.
int integer_cube_root(long long m);

enum class Oscillation { none, small, large };

struct OscillationTag {
  Oscillation tag = Oscillation::none;
  std::optional<std::size_t> next_visit;
};

/// Tags every time by what the walk does before it next revisits the same
/// value: never returns (none), stays within `delta` (small), or leaves the
/// window (large). O(N log N).
std::vector<OscillationTag> classify_times(const CycleWalk& walk, int delta);

/// First scenario: the walk alternates m times between a and a +- s^2.
struct ZigZag {
  int a = 0;
  std::vector<std::size_t> i;
  std::vector<std::size_t> j;
  /// Whether both a + s^2 and a - s^2 occur among the a_{j}.
  bool both_sides = false;

  std::size_t m() const { return i.size(); }
};

/// Second scenario: within the window [first, last] (last - first < s^3)
/// the value a recurs at every listed time.
struct Confined {
  std::size_t first = 0;
  std::size_t last = 0;
  int a = 0;
  std::vector<std::size_t> visits;
  /// Number of no/large-oscillation times inside the window.
  std::size_t bad_times = 0;

  std::size_t m() const { return visits.size(); }
};

using DichotomyOutcome = std::variant<ZigZag, Confined>;

/// Splits a walk into the zig-zag or confined scenario with oscillation
/// window s^2. Requires 1 <= s, s^3 <= M and at least s^3 times. The
/// returned witness has been checked with check_outcome.
DichotomyOutcome dichotomy(const CycleWalk& walk, int s);

/// Empty when the witness satisfies every scenario invariant, else the first
/// violated condition.
std::optional<std::string> check_outcome(const CycleWalk& walk, int s,
                                         const DichotomyOutcome& outcome);

enum class WalkKind { winding, constant, revolution, tight, random };

std::string_view to_string(WalkKind kind);
WalkKind parse_walk_kind(std::string_view name);

/// Example walks of length `length` (default M^2) starting at 0.
CycleWalk make_walk(WalkKind kind, int m, int s, std::uint64_t seed,
                    std::optional<std::size_t> length = std::nullopt);

/// Text format: "M=<int> N=<int>", then the start residue, then one signed
/// step (+1 / -1) per line.
void write_walk(std::ostream& out, const CycleWalk& walk);
CycleWalk read_walk(std::istream& in);

}  // namespace utsp
