#include "utsp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "utsp/error.hpp"
#include "utsp/svg.hpp"

namespace utsp {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string or_auto(const std::optional<T>& v) {
  if (!v) return "auto";
  if constexpr (std::is_floating_point_v<T>) {
    return fmt17(*v);
  } else {
    return std::to_string(*v);
  }
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  return out;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json square_json(const DyadicSquare& q) { return json{{"t", q.t}, {"ix", q.ix}, {"iy", q.iy}}; }

}  // namespace

std::string canonical_config(const ExperimentConfig& config) {
  std::ostringstream s;
  s << "order=" << config.order << '\n';
  s << "order_file=" << config.order_file << '\n';
  s << "g=" << or_auto(config.g) << '\n';
  s << "g_max=" << or_auto(config.g_max) << '\n';
  s << "M=" << config.M << '\n';
  s << "r=" << config.r << '\n';
  s << "l=" << or_auto(config.l) << '\n';
  s << "w=" << or_auto(config.w) << '\n';
  s << "c=" << or_auto(config.c) << '\n';
  s << "scales=";
  for (std::size_t i = 0; i < config.scales.size(); ++i) {
    s << (i ? "," : "") << config.scales[i];
  }
  s << '\n';
  s << "chain_cap=" << config.chain_cap << '\n';
  s << "strict=" << (config.strict ? 1 : 0) << '\n';
  s << "seed=" << config.seed << '\n';
  s << "lines=" << config.lines << '\n';
  return s.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

OrderOracle make_oracle(const ExperimentConfig& config, int g) {
  OrderKind kind = parse_order_kind(config.order);
  if (kind == OrderKind::file) {
    if (config.order_file.empty()) {
      throw Error(ErrorKind::parameter, "order-file: required when order=file");
    }
    OrderOracle oracle = load_order_file(config.order_file);
    if (oracle.grid().g() != g) {
      throw Error(ErrorKind::parameter, "g: order file has g=" +
                                            std::to_string(oracle.grid().g()) +
                                            ", requested " + std::to_string(g));
    }
    return oracle;
  }
  return OrderOracle::curve(kind, GridSpec(g));
}

std::vector<int> resolve_scales(const ExperimentConfig& config, const Params& params) {
  std::vector<int> scales = config.scales.empty() ? params.scales() : config.scales;
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  for (int t : scales) {
    if (t < 0 || t > 20) throw Error(ErrorKind::parameter, "scales: values must lie in [0, 20]");
  }
  return scales;
}

Params resolve_params(const ExperimentConfig& config, std::optional<int> g) {
  if (config.M % 4 != 0 || config.M < 8) {
    throw Error(ErrorKind::parameter,
                "M: must be a multiple of 4 and at least 8, got " + std::to_string(config.M));
  }
  Params p = default_params(config.r, config.M, config.strict);
  if (config.l) p.l = *config.l;
  if (config.w) {
    p.w = *config.w;
    p.w_clamped = false;
    if (!(p.w < p.l) && config.strict) {
      throw Error(ErrorKind::constraint, "w: must be below l in strict mode");
    }
  } else if (config.l && !config.strict) {
    p.w = std::sqrt(4.0 * config.M * std::log(static_cast<double>(config.r)) / config.r);
    p.w_clamped = false;
    if (p.w >= p.l) {
      p.w = p.l / 2.0;
      p.w_clamped = true;
    }
  }
  if (config.c) {
    if (*config.c < 1) throw Error(ErrorKind::parameter, "c: must be at least 1");
    p.c = *config.c;
  }
  p.chain_cap = config.chain_cap;
  std::vector<int> scales = resolve_scales(config, p);
  const int rmax = scales.empty() ? 0 : scales.back();
  if (parse_order_kind(config.order) == OrderKind::file && !g) {
    g = load_order_file(config.order_file).grid().g();
  }
  p.g = g ? *g : auto_resolution(p, rmax);
  if (p.g < 1 || p.g > GridSpec::kMaxResolution) {
    throw Error(ErrorKind::parameter, "g: must lie in [1, 30]");
  }
  p = fit_resolution(p, rmax);
  validate_params(p);
  return p;
}

void write_point_set(std::ostream& out, const std::vector<Point>& points, const std::string& order,
                     int g) {
  out << "# order=" << order << " g=" << g << '\n';
  for (const Point& p : points) out << fmt17(p.x) << ' ' << fmt17(p.y) << '\n';
}

PointSetFile read_point_set(std::istream& in, const std::string& source) {
  PointSetFile file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::format, source + " line " + std::to_string(lineno) + ": " + why);
    };
    if (auto hash = line.find('#'); hash != std::string::npos) {
      std::istringstream header(line.substr(hash + 1));
      std::string field;
      while (header >> field) {
        if (field.rfind("order=", 0) == 0) file.order = field.substr(6);
        if (field.rfind("g=", 0) == 0) {
          try {
            file.g = std::stoi(field.substr(2));
          } catch (const std::exception&) {
            fail("bad g in header");
          }
        }
      }
      line.erase(hash);
    }
    std::istringstream row(line);
    double x = 0.0;
    double y = 0.0;
    if (!(row >> x)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) fail("expected 'x y'");
      continue;
    }
    if (!(row >> y)) fail("expected 'x y'");
    std::string extra;
    if (row >> extra) fail("trailing text after 'x y'");
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) fail("point outside the unit square");
    file.points.push_back({x, y});
  }
  return file;
}

void write_chain(std::ostream& out, const SpiralChain& chain) {
  const int m = chain.links.empty() ? 0 : chain.links.front().ray.count();
  out << "# chain M=" << m << " t=" << chain.square.t << " ix=" << chain.square.ix
      << " iy=" << chain.square.iy << " end=" << to_string(chain.end) << '\n';
  for (const auto& link : chain.links) {
    out << fmt17(link.p.x) << ' ' << fmt17(link.p.y) << ' ' << link.ray.index() << '\n';
  }
}

json ratio_json(const RatioReport& r) {
  json j;
  j["n"] = r.n;
  j["cost_order"] = r.cost_order;
  j["tsp_lower"] = r.tsp_lower;
  j["tsp_exact"] = r.tsp_exact ? json(*r.tsp_exact) : json(nullptr);
  j["tsp_upper"] = r.tsp_upper;
  j["ratio_defined"] = r.ratio_defined;
  j["ratio_lower"] = r.ratio_lower;
  j["ratio_exact"] = r.ratio_exact ? json(*r.ratio_exact) : json(nullptr);
  return j;
}

json make_record(const ExperimentConfig& config, const CaseReport& report,
                 const std::string& set_file, std::optional<bool> verified,
                 std::optional<double> wall_seconds) {
  const Params& p = report.params;
  json rec;
  rec["config_hash"] = config_hash(config);
  rec["order"] = config.order;
  rec["g"] = p.g;
  rec["M"] = p.M;
  rec["r"] = p.r;
  rec["l"] = p.l;
  rec["w"] = p.w;
  rec["c"] = p.c;
  rec["s"] = p.s;
  rec["mode"] = p.strict ? "strict" : "desk";
  rec["w_clamped"] = p.w_clamped;
  rec["resolution_scaled"] = p.resolution_scaled;
  rec["seed"] = config.seed;
  rec["lines"] = report.lines;
  rec["scales"] = report.scales;
  rec["case"] = std::string(to_string(report.kind));
  rec["squares"] = report.squares;
  rec["covered"] = report.covered;
  if (report.report) {
    rec["ratio"] = ratio_json(*report.report);
  } else {
    rec["ratio"] = nullptr;
  }
  if (report.best) {
    const BacktrackingSet& b = *report.best;
    rec["sigma"] = b.sigma;
    rec["line"] = json{{"angle", b.line.line.angle().index()},
                       {"offset", b.line.line.offset()},
                       {"seed", b.line.seed}};
    rec["detour_bound"] = json{{"detour_tour", b.detour_length},
                          {"bound", b.detour_bound_rhs},
                          {"slack", b.detour_bound_slack()}};
    rec["charging_bound"] = json{{"lhs", b.charging_bound_lhs}, {"rhs", b.charging_bound_rhs}, {"slack", b.charging_bound_slack()}};
    rec["lines_checked"] = json{{"detour_bound_violations", report.detour_bound_violations},
                                {"charging_bound_violations", report.charging_bound_violations},
                                {"min_detour_bound_slack", report.min_detour_bound_slack},
                                {"min_charging_bound_slack", report.min_charging_bound_slack}};
  }
  if (report.zigzag && report.case_b_square) {
    const ZigZagSet& z = *report.zigzag;
    json b;
    b["square"] = square_json(*report.case_b_square);
    b["chain_length"] = z.chain_length;
    b["truncated"] = z.truncated;
    if (const auto* zz = std::get_if<ZigZag>(&z.outcome)) {
      b["scenario"] = "zigzag";
      b["a"] = zz->a;
      b["m"] = zz->m();
      b["both_sides"] = zz->both_sides;
    } else {
      const auto& c = std::get<Confined>(z.outcome);
      b["scenario"] = "confined";
      b["a"] = c.a;
      b["m"] = c.m();
      b["interval"] = json::array({c.first, c.last});
    }
    b["tour_length"] = z.tour_length;
    b["certified_ratio"] = z.certified_ratio;
    b["min_step"] = z.min_step;
    b["min_step_bound"] = z.min_step_bound;
    b["min_step_slack"] = z.min_step - z.min_step_bound;
    if (z.confined_tour_bound) {
      b["confined_tour_bound"] = *z.confined_tour_bound;
      b["confined_tour_bound_holds"] = z.tour_length <= *z.confined_tour_bound;
    }
    rec["case_b"] = b;
  }
  rec["set_file"] = set_file;
  rec["verified"] = verified ? json(*verified) : json(nullptr);
  if (wall_seconds) rec["wall_seconds"] = *wall_seconds;
  return rec;
}

AttackResult cmd_attack(const ExperimentConfig& config, std::ostream& log) {
  // Resolve everything up front so configuration errors stop before any work.
  std::vector<int> grids;
  Params first = resolve_params(config, config.g);
  if (config.g_max) {
    if (*config.g_max < first.g) {
      throw Error(ErrorKind::parameter, "g-max: must be at least g=" + std::to_string(first.g));
    }
    for (int g = first.g; g <= *config.g_max; ++g) grids.push_back(g);
  } else {
    grids.push_back(first.g);
  }
  std::filesystem::create_directories(config.out / "sets");
  std::filesystem::create_directories(config.out / "chains");
  const std::string hash = config_hash(config);
  const auto summary_path = config.out / "summary.tsv";
  const bool new_summary = !std::filesystem::exists(summary_path);

  AttackResult result;
  for (int g : grids) {
    Params params = resolve_params(config, g);
    OrderOracle oracle = make_oracle(config, params.g);
    CaseOptions options;
    options.scales = resolve_scales(config, params);
    options.lines = config.lines;
    options.seed = config.seed;

    auto start = std::chrono::steady_clock::now();
    CaseReport report = run_case_dichotomy(oracle, params, options);
    std::optional<bool> verified;
    if (config.verify) {
      auto why = verify_report(oracle, report);
      verified = !why;
      if (why) log << "verification failed: " << *why << '\n';
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::string stem = hash + "-g" + std::to_string(params.g);
    std::string set_file;
    if (!report.set.empty()) {
      set_file = "sets/" + stem + ".txt";
      auto out = open_out(config.out / set_file, std::ios::trunc);
      write_point_set(out, report.set, oracle.name(), params.g);
    }
    if (report.case_b_square) {
      for (const auto& e : report.atlas.entries) {
        if (e.square == *report.case_b_square && e.chain) {
          auto out = open_out(config.out / ("chains/" + stem + ".txt"), std::ios::trunc);
          write_chain(out, *e.chain);
        }
      }
    }
    json rec = make_record(config, report, set_file, verified,
                           config.timing ? std::optional<double>(wall) : std::nullopt);
    std::string line = rec.dump();
    {
      // One complete line per write so an interrupted run leaves whole records.
      auto out = open_out(config.out / "records.jsonl", std::ios::app);
      out << line + "\n" << std::flush;
    }
    {
      auto out = open_out(summary_path, std::ios::app);
      if (new_summary && result.records.empty()) {
        out << "config_hash\tg\torder\tcase\tn\tratio_lower\tcovered\tsquares\n";
      }
      out << hash << '\t' << params.g << '\t' << config.order << '\t' << to_string(report.kind)
          << '\t' << report.set.size() << '\t'
          << (report.report ? fmt17(report.report->ratio_lower) : std::string("nan")) << '\t'
          << report.covered << '\t' << report.squares << '\n';
    }
    log << "g=" << params.g << " case=" << to_string(report.kind) << " n=" << report.set.size();
    if (report.report) log << " ratio_lower=" << fmt17(report.report->ratio_lower);
    log << " covered=" << report.covered << "/" << report.squares << '\n';
    result.records.push_back(std::move(line));
    result.reports.push_back(std::move(report));
  }
  return result;
}

DichotomyOutcome cmd_walk(const WalkRequest& request, std::ostream& out) {
  std::optional<CycleWalk> walk;
  if (!request.load.empty()) {
    std::ifstream in(request.load);
    if (!in) throw Error(ErrorKind::io, "cannot open " + request.load.string());
    walk = read_walk(in);
  } else {
    int s = request.s.value_or(integer_cube_root(request.M));
    walk = make_walk(request.kind, request.M, s, request.seed, request.length);
  }
  if (!request.save.empty()) {
    auto f = open_out(request.save, std::ios::trunc);
    write_walk(f, *walk);
  }
  const int s = request.s.value_or(integer_cube_root(walk->modulus()));
  DichotomyOutcome outcome = dichotomy(*walk, s);
  out << "walk kind=" << (request.load.empty() ? to_string(request.kind) : "file")
      << " M=" << walk->modulus() << " N=" << walk->size() << " s=" << s << '\n';
  auto list = [&](const std::vector<std::size_t>& v) {
    std::ostringstream o;
    std::size_t shown = std::min<std::size_t>(v.size(), 8);
    for (std::size_t k = 0; k < shown; ++k) o << (k ? " " : "") << v[k];
    if (v.size() > shown) o << " ...";
    return o.str();
  };
  if (const auto* z = std::get_if<ZigZag>(&outcome)) {
    out << "scenario=zigzag a=" << z->a << " m=" << z->m() << " both_sides=" << z->both_sides
        << '\n';
    out << "i: " << list(z->i) << '\n';
    out << "j: " << list(z->j) << '\n';
  } else {
    const auto& c = std::get<Confined>(outcome);
    out << "scenario=confined a=" << c.a << " m=" << c.m() << " interval=[" << c.first << ", "
        << c.last << "] bad_times=" << c.bad_times << '\n';
    out << "visits: " << list(c.visits) << '\n';
  }
  auto why = check_outcome(*walk, s, outcome);
  out << "valid=" << (why ? "no (" + *why + ")" : std::string("yes")) << '\n';
  return outcome;
}

RatioReport cmd_ratio(const std::string& order, const std::filesystem::path& set_file,
                      std::optional<int> g, const std::string& order_file, std::ostream& out) {
  std::ifstream in(set_file);
  if (!in) throw Error(ErrorKind::io, "cannot open " + set_file.string());
  PointSetFile file = read_point_set(in, set_file.string());
  if (file.points.empty()) throw Error(ErrorKind::format, set_file.string() + ": empty point set");
  OrderKind kind = parse_order_kind(order);
  std::optional<OrderOracle> oracle;
  if (kind == OrderKind::file) {
    if (order_file.empty()) throw Error(ErrorKind::parameter, "order-file: required for order=file");
    oracle = load_order_file(order_file);
  } else {
    std::optional<int> grid = g ? g : file.g;
    if (!grid) throw Error(ErrorKind::parameter, "g: not given and missing from the set header");
    oracle = OrderOracle::curve(kind, GridSpec(*grid));
  }
  RatioReport report = measure_order_ratio(*oracle, file.points);
  out << ratio_json(report).dump() << '\n';
  return report;
}

void cmd_plot(const std::filesystem::path& input, const std::filesystem::path& output) {
  std::string text = read_all(input);
  std::size_t first = text.find_first_not_of(" \t\r\n");
  std::string svg;
  const std::string title = input.filename().string();
  if (first == std::string::npos || text[first] == '{' || input.extension() == ".jsonl") {
    std::vector<std::pair<double, double>> pts;
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::format, input.string() + " line " + std::to_string(lineno) + ": " +
                                           e.what());
      }
      if (rec.contains("ratio") && rec["ratio"].is_object()) {
        pts.emplace_back(rec["ratio"]["n"].get<double>(), rec["ratio"]["ratio_lower"].get<double>());
      }
    }
    svg = render_ratio_svg(pts, title);
  } else if (text.compare(first, 7, "# chain") == 0) {
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    int m = 0;
    DyadicSquare square;
    std::istringstream h(header.substr(header.find("chain") + 5));
    std::string field;
    while (h >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      std::string key = field.substr(0, eq);
      std::string val = field.substr(eq + 1);
      try {
        if (key == "M") m = std::stoi(val);
        if (key == "t") square.t = std::stoi(val);
        if (key == "ix") square.ix = static_cast<std::uint32_t>(std::stoul(val));
        if (key == "iy") square.iy = static_cast<std::uint32_t>(std::stoul(val));
      } catch (const std::exception&) {
        throw Error(ErrorKind::format, input.string() + ": bad chain header");
      }
    }
    std::vector<Point> pts;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream row(line);
      Point p;
      int j = 0;
      if (!(row >> p.x >> p.y >> j)) {
        throw Error(ErrorKind::format, input.string() + " line " + std::to_string(lineno) +
                                           ": expected 'x y j'");
      }
      pts.push_back(p);
    }
    svg = render_chain_svg(pts, square.box(), m, title);
  } else {
    std::istringstream in(text);
    PointSetFile file = read_point_set(in, input.string());
    std::vector<Point> path;
    if (file.g && !file.order.empty()) {
      try {
        OrderKind kind = parse_order_kind(file.order);
        if (kind != OrderKind::file) {
          path = sort_by_order(OrderOracle::curve(kind, GridSpec(*file.g)), file.points);
        }
      } catch (const Error&) {
        path.clear();  // unknown order name: draw the points only
      }
    }
    svg = render_points_svg(file.points, path, title);
  }
  auto out = open_out(output, std::ios::trunc);
  out << svg;
  if (!out) throw Error(ErrorKind::io, "failed writing " + output.string());
}

}  // namespace utsp
