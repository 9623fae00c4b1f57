#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "utsp/adversary.hpp"
#include "utsp/cyclewalk.hpp"
#include "utsp/orders.hpp"
#include "utsp/tsp.hpp"

namespace utsp {

/// One attack configuration. Unset optionals mean "auto": the formula value
/// from default_params, or the smallest adequate grid for g.
struct ExperimentConfig {
  std::string order = "sierpinski";
  std::string order_file;
  std::optional<int> g;
  /// When set, sweep g from `g` (or its auto value) up to g_max.
  std::optional<int> g_max;
  int M = 16;
  int r = 4;
  std::optional<double> l;
  std::optional<double> w;
  std::optional<int> c;
  /// Explicit scale list; empty means 0, c, ..., c floor(r / c).
  std::vector<int> scales;
  /// Chain cap; 0 means M^2.
  std::size_t chain_cap = 0;
  bool strict = false;
  std::uint64_t seed = 1;
  std::size_t lines = 1000;
  std::filesystem::path out = "out";
  bool verify = false;
  bool timing = false;
};

/// Canonical "key=value" lines of every field that affects results.
std::string canonical_config(const ExperimentConfig& config);
/// 16 hex digits of FNV-1a over the canonical form.
std::string config_hash(const ExperimentConfig& config);

OrderOracle make_oracle(const ExperimentConfig& config, int g);

/// Resolves the auto fields for grid resolution g (or the auto resolution
/// when g is absent) and checks the grid against the deepest scale.
Params resolve_params(const ExperimentConfig& config, std::optional<int> g);
std::vector<int> resolve_scales(const ExperimentConfig& config, const Params& params);

/// Point-set files: "x y" per line, '#' comments; an optional header comment
/// "# order=<name> g=<int>" names the grid.
struct PointSetFile {
  std::vector<Point> points;
  std::optional<int> g;
  std::string order;
};

void write_point_set(std::ostream& out, const std::vector<Point>& points, const std::string& order,
                     int g);
PointSetFile read_point_set(std::istream& in, const std::string& source = "<stream>");

/// Chain files: header "# chain M=<int> t=<int> ix=<int> iy=<int> end=<name>",
/// then "x y j" per chain point.
void write_chain(std::ostream& out, const SpiralChain& chain);

/// Record of one attack run as a single JSON object; wall time is included
/// only when `wall_seconds` is given.
nlohmann::json make_record(const ExperimentConfig& config, const CaseReport& report,
                           const std::string& set_file, std::optional<bool> verified,
                           std::optional<double> wall_seconds);

nlohmann::json ratio_json(const RatioReport& report);

struct AttackResult {
  std::vector<std::string> records;
  std::vector<CaseReport> reports;
};

/// Runs the case split for every grid of the sweep, appends one record line
/// per run to out/records.jsonl and a row to out/summary.tsv, and exports the
/// set (and the CASE B chain) under out/.
AttackResult cmd_attack(const ExperimentConfig& config, std::ostream& log);

struct WalkRequest {
  WalkKind kind = WalkKind::winding;
  int M = 64;
  std::optional<int> s;
  std::uint64_t seed = 1;
  std::optional<std::size_t> length;
  std::filesystem::path save;
  std::filesystem::path load;
};

/// Builds (or loads) a walk, runs the dichotomy and prints the witness.
DichotomyOutcome cmd_walk(const WalkRequest& request, std::ostream& out);

/// Prints the ratio report of a point-set file under an order.
RatioReport cmd_ratio(const std::string& order, const std::filesystem::path& set_file,
                      std::optional<int> g, const std::string& order_file, std::ostream& out);

/// Renders records, a point set or a chain (detected from the content) as SVG.
void cmd_plot(const std::filesystem::path& input, const std::filesystem::path& output);

}  // namespace utsp
