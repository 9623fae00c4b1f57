#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "utsp/error.hpp"
#include "utsp/harness.hpp"

namespace {

// "auto" (or empty) leaves the field unset.
template <typename T>
std::optional<T> parse_auto(const std::string& text, const char* field) {
  if (text.empty() || text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    T value;
    if constexpr (std::is_floating_point_v<T>) {
      value = static_cast<T>(std::stod(text, &used));
    } else {
      value = static_cast<T>(std::stoll(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw utsp::Error(utsp::ErrorKind::parameter,
                      std::string(field) + ": expected a number or 'auto', got '" + text + "'");
  }
}

// Expands "--config <file>" into the flags it lists. Each line is
// "key=value" ('#' comments allowed); flags given on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  static const std::set<std::string> kSwitches{"strict", "verify", "timing"};
  auto at = std::find(args.begin(), args.end(), "--config");
  if (at == args.end()) return args;
  if (at + 1 == args.end()) {
    throw utsp::Error(utsp::ErrorKind::parameter, "config: missing file name");
  }
  const std::string path = *(at + 1);
  args.erase(at, at + 2);
  std::ifstream in(path);
  if (!in) throw utsp::Error(utsp::ErrorKind::io, "cannot open " + path);
  std::vector<std::string> extra;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string v) {
      const char* ws = " \t\r";
      v.erase(0, v.find_first_not_of(ws));
      v.erase(v.find_last_not_of(ws) + 1);
      return v;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw utsp::Error(utsp::ErrorKind::format,
                        path + " line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    const std::string flag = "--" + key;
    if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
    if (kSwitches.count(key)) {
      if (value == "1" || value == "true" || value == "yes") extra.push_back(flag);
      continue;
    }
    extra.push_back(flag);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial point sets for space-filling curve tours", "utsp"};
  app.require_subcommand(1);

  utsp::ExperimentConfig config;
  std::string g_text = "auto";
  std::string l_text = "auto";
  std::string w_text = "auto";
  std::string c_text = "auto";
  std::optional<int> g_max;
  std::string out_dir = "out";

  auto* attack = app.add_subcommand("attack", "Run the case split and export the hard set");
  attack->add_option("--order", config.order, "rowmajor, zorder, hilbert, sierpinski or file");
  attack->add_option("--order-file", config.order_file, "Ranked cell list for --order file");
  attack->add_option("--g", g_text, "Grid resolution (cells 2^g per side) or auto");
  attack->add_option("--g-max", g_max, "Sweep grid resolutions from --g up to this value");
  attack->add_option("--M", config.M, "Number of ray directions");
  attack->add_option("--r", config.r, "Number of scales");
  attack->add_option("--l", l_text, "Rectangle length at scale 0 or auto");
  attack->add_option("--w", w_text, "Rectangle width at scale 0 or auto");
  attack->add_option("--c", c_text, "Scale spacing or auto");
  attack->add_option("--scales", config.scales, "Explicit scale list")->delimiter(',');
  attack->add_option("--chain-cap", config.chain_cap, "Chain length cap (0 means M^2)");
  attack->add_flag("--strict", config.strict, "Enforce the asymptotic parameter constraints");
  attack->add_option("--seed", config.seed, "Base seed of the line sampler");
  attack->add_option("--lines", config.lines, "Number of sampled lines");
  attack->add_option("--out", out_dir, "Output directory");
  attack->add_flag("--verify", config.verify, "Re-run every certificate scan");
  attack->add_flag("--timing", config.timing, "Include wall time in records");
  std::string config_file;
  attack->add_option("--config", config_file, "Flat key=value file mirroring the flags");

  utsp::WalkRequest walk;
  std::string walk_kind = "winding";
  std::string walk_save;
  std::string walk_load;
  auto* walk_cmd = app.add_subcommand("walk", "Run the walk dichotomy on a generated walk");
  walk_cmd->add_option("--kind", walk_kind, "winding, constant, revolution, tight or random");
  walk_cmd->add_option("--M", walk.M, "Cycle length");
  walk_cmd->add_option("--s", walk.s, "Scale parameter (default floor(M^(1/3)))");
  walk_cmd->add_option("--seed", walk.seed, "Seed for random walks");
  walk_cmd->add_option("--length", walk.length, "Number of positions (default M^2)");
  walk_cmd->add_option("--save", walk_save, "Write the walk to a file");
  walk_cmd->add_option("--load", walk_load, "Read the walk from a file");
  walk_cmd->add_option("--config", config_file, "Flat key=value file mirroring the flags");

  std::string ratio_order = "sierpinski";
  std::string ratio_set;
  std::optional<int> ratio_g;
  std::string ratio_order_file;
  auto* ratio = app.add_subcommand("ratio", "Measure cost over tsp for a point-set file");
  ratio->add_option("--order", ratio_order, "Order kind");
  ratio->add_option("--set", ratio_set, "Point-set file")->required();
  ratio->add_option("--g", ratio_g, "Grid resolution (default from the set header)");
  ratio->add_option("--order-file", ratio_order_file, "Ranked cell list for --order file");

  std::string plot_in;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "Render records, a point set or a chain as SVG");
  plot->add_option("--in", plot_in, "Records, point-set or chain file")->required();
  plot->add_option("--out", plot_out, "Output SVG path")->required();

  std::vector<std::string> args;
  try {
    args = expand_config(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const utsp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*attack) {
      config.g = parse_auto<int>(g_text, "g");
      config.l = parse_auto<double>(l_text, "l");
      config.w = parse_auto<double>(w_text, "w");
      config.c = parse_auto<int>(c_text, "c");
      config.g_max = g_max;
      config.out = out_dir;
      utsp::cmd_attack(config, std::cout);
    } else if (*walk_cmd) {
      walk.kind = utsp::parse_walk_kind(walk_kind);
      walk.save = walk_save;
      walk.load = walk_load;
      utsp::cmd_walk(walk, std::cout);
    } else if (*ratio) {
      utsp::cmd_ratio(ratio_order, ratio_set, ratio_g, ratio_order_file, std::cout);
    } else if (*plot) {
      utsp::cmd_plot(plot_in, plot_out);
    }
  } catch (const utsp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
