#include "ppmcsa/bench.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ppmcsa/oblivious_auction.hpp"
#include "ppmcsa/protocol.hpp"
#include "ppmcsa/scenario.hpp"

namespace ppmcsa::bench {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double draw_coordinate(std::uint64_t x, double area) {
  return static_cast<double>(x >> 11) * 0x1.0p-53 * area;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& text) {
  T v{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw std::invalid_argument("csv: bad number '" + text + "'");
  return v;
}

}  // namespace

void ScenarioParams::validate() const {
  if (bit_length < 2 || bit_length > 32) throw std::invalid_argument("bit length must be in [2, 32]");
  if (d_max < 1) throw std::invalid_argument("d_max must be at least 1");
  if (!(radius_m > 0.0) || !(area_m > 0.0)) throw std::invalid_argument("radius and area must be positive");
  if (s_max < 1 || b_max < 1 || c_max < 1 || d_draw_max < 1) throw std::invalid_argument("empty draw interval");
  const std::uint64_t limit = (std::uint64_t{1} << bit_length) - 1;
  if (s_max > limit || b_max > limit)
    throw std::invalid_argument("value interval does not fit in " + std::to_string(bit_length) + " bits");
}

std::uint64_t draw_range(std::uint64_t x, std::uint64_t lo, std::uint64_t hi) {
  const unsigned __int128 span = static_cast<unsigned __int128>(hi - lo) + 1;
  return lo + static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * span) >> 64);
}

auction::Scenario generate_scenario(const ScenarioParams& params, std::uint64_t seed) {
  params.validate();
  std::mt19937_64 root(seed);
  std::mt19937_64 seller_rng(root());
  std::mt19937_64 buyer_rng(root());

  auction::Scenario sc;
  sc.bit_length = params.bit_length;
  sc.d_max = params.d_max;
  sc.radius_m = params.radius_m;
  sc.area_m = params.area_m;
  const std::uint64_t s_hi = params.profitable_bias ? std::min(params.s_max, params.b_max) : params.s_max;
  const std::uint32_t d_hi = std::min(params.d_draw_max, params.d_max);
  for (std::size_t i = 0; i < params.sellers; ++i) {
    auction::SellerTuple s;
    s.id = static_cast<auction::Id>(i + 1);
    s.request_value = draw_range(seller_rng(), 1, s_hi);
    s.request_count = static_cast<std::uint32_t>(draw_range(seller_rng(), 1, params.c_max));
    sc.sellers.push_back(s);
  }
  for (std::size_t i = 0; i < params.buyers; ++i) {
    auction::BuyerTuple b;
    b.id = static_cast<auction::Id>(i + 1);
    b.x = draw_coordinate(buyer_rng(), params.area_m);
    b.y = draw_coordinate(buyer_rng(), params.area_m);
    b.bid_value = draw_range(buyer_rng(), 1, params.b_max);
    b.bid_count = static_cast<std::uint32_t>(draw_range(buyer_rng(), 1, d_hi));
    sc.buyers.push_back(b);
  }
  sc.validate();
  return sc;
}

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Clear: return "clear";
    case RunMode::Original: return "original";
    case RunMode::Improved: return "improved";
  }
  return "?";
}

RunMode run_mode_from_string(const std::string& text) {
  if (text == "clear") return RunMode::Clear;
  if (text == "original") return RunMode::Original;
  if (text == "improved") return RunMode::Improved;
  throw std::invalid_argument("unknown run mode '" + text + "'");
}

void ExperimentGrid::validate() const {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (modes.empty()) throw std::invalid_argument("no run modes");
  for (unsigned b : bit_lengths) {
    ScenarioParams p = base;
    p.bit_length = b;
    p.validate();
  }
}

std::uint64_t point_seed(std::uint64_t grid_seed, std::size_t repetition) {
  return splitmix64(splitmix64(grid_seed) ^ repetition);
}

std::vector<ExperimentRow> run_scenario(const auction::Scenario& scenario, const std::vector<RunMode>& modes,
                                        std::size_t repetition, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  ExperimentRow base;
  base.sellers = scenario.sellers.size();
  base.buyers = scenario.buyers.size();
  base.bit_length = scenario.bit_length;
  base.d_max = scenario.d_max;
  base.repetition = repetition;
  base.seed = seed;

  const auto t0 = clock::now();
  const auto trace = auction::trace_clear_auction(scenario);
  const double clear_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  const std::string clear_digest = auction::outcome_digest(trace.outcome);
  base.groups = trace.splits.size();

  std::vector<ExperimentRow> rows;
  for (RunMode mode : modes) {
    ExperimentRow row = base;
    row.mode = to_string(mode);
    if (mode == RunMode::Clear) {
      row.wall_ms = clear_ms;
      row.winning_vbgs = trace.outcome.winning_vbg_count;
      row.critical_value = trace.outcome.critical_value;
      row.outcome_digest = clear_digest;
      rows.push_back(row);
      continue;
    }
    protocol::SessionOptions opt;
    opt.mode = mode == RunMode::Original ? oblivious::Mode::Original : oblivious::Mode::Improved;
    opt.seed = seed;
    const auto t1 = clock::now();
    const auto res = protocol::loopback_session(scenario, opt);
    row.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t1).count();
    const auto& m = res.auctioneer.metrics;
    row.bytes = m.total_bytes();
    row.and_gates = m.and_gates;
    row.ot_count = m.ot_count;
    row.winning_vbgs = res.auctioneer.outcome.winning_vbg_count;
    row.critical_value = res.auctioneer.outcome.critical_value;
    row.outcome_digest = auction::outcome_digest(res.auctioneer.outcome);
    if (row.outcome_digest != clear_digest || !(res.agent.outcome == res.auctioneer.outcome))
      throw ExperimentMismatch(std::string("secure ") + row.mode + " outcome differs from the clear auction (seed " +
                                   std::to_string(seed) + ")",
                               auction::scenario_to_json(scenario).dump(2));
    rows.push_back(row);
  }
  return rows;
}

std::vector<ExperimentRow> run_experiment(const ExperimentGrid& grid) {
  grid.validate();
  std::vector<ExperimentRow> rows;
  for (std::size_t m : grid.sellers)
    for (std::size_t n : grid.buyers)
      for (unsigned b : grid.bit_lengths)
        for (std::size_t rep = 0; rep < grid.repetitions; ++rep) {
          ScenarioParams p = grid.base;
          p.sellers = m;
          p.buyers = n;
          p.bit_length = b;
          const std::uint64_t seed = point_seed(grid.seed, rep);
          const auto sc = generate_scenario(p, seed);
          auto part = run_scenario(sc, grid.modes, rep, seed);
          rows.insert(rows.end(), part.begin(), part.end());
        }
  return rows;
}

const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h = {
      "sellers", "buyers", "bit_length", "d_max", "repetition", "seed", "mode", "wall_ms",
      "bytes", "and_gates", "ot_count", "groups", "winning_vbgs", "critical_value", "outcome_digest"};
  return h;
}

std::string to_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  const auto& h = csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.sellers << ',' << r.buyers << ',' << r.bit_length << ',' << r.d_max << ',' << r.repetition << ','
        << r.seed << ',' << r.mode << ',' << format_double(r.wall_ms) << ',' << r.bytes << ',' << r.and_gates
        << ',' << r.ot_count << ',' << r.groups << ',' << r.winning_vbgs << ',' << r.critical_value << ','
        << r.outcome_digest << '\n';
  }
  return out.str();
}

void emit_csv(const std::vector<ExperimentRow>& rows, const std::filesystem::path& path, WriteMode mode) {
  if (mode == WriteMode::Append) throw std::invalid_argument("emit_csv: append mode is not supported");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << to_csv(rows);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ExperimentRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line) || split(line) != csv_header()) throw std::invalid_argument("csv: unexpected header");
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != csv_header().size()) throw std::invalid_argument("csv: wrong column count");
    ExperimentRow r;
    r.sellers = parse_number<std::size_t>(c[0]);
    r.buyers = parse_number<std::size_t>(c[1]);
    r.bit_length = parse_number<unsigned>(c[2]);
    r.d_max = parse_number<std::uint32_t>(c[3]);
    r.repetition = parse_number<std::size_t>(c[4]);
    r.seed = parse_number<std::uint64_t>(c[5]);
    r.mode = c[6];
    r.wall_ms = parse_number<double>(c[7]);
    r.bytes = parse_number<std::uint64_t>(c[8]);
    r.and_gates = parse_number<std::uint64_t>(c[9]);
    r.ot_count = parse_number<std::uint64_t>(c[10]);
    r.groups = parse_number<std::size_t>(c[11]);
    r.winning_vbgs = parse_number<std::uint64_t>(c[12]);
    r.critical_value = parse_number<std::uint64_t>(c[13]);
    r.outcome_digest = c[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ExperimentRow> load_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_line: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace ppmcsa::bench
