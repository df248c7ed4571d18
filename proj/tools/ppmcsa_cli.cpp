// Command-line front end: scenario generation, single auctions, benchmark grids
// and the two networked roles.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppmcsa/bench.hpp"
#include "ppmcsa/crypto.hpp"
#include "ppmcsa/protocol.hpp"
#include "ppmcsa/scenario.hpp"
#include "ppmcsa/submission.hpp"

namespace {

using namespace ppmcsa;
using nlohmann::ordered_json;

// PPMCSA_LOG=quiet suppresses the per-phase report on stderr; debug adds traffic per frame type.
enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
  const char* v = std::getenv("PPMCSA_LOG");
  if (!v) return LogLevel::Info;
  const std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::Quiet;
  if (s == "debug" || s == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

void report(const protocol::RunMetrics& m, const char* role) {
  const auto level = log_level();
  if (level == LogLevel::Quiet) return;
  std::cerr << role << ": " << m.and_gates << " AND gates, " << m.ot_count << " OTs, " << m.total_bytes()
            << " bytes\n";
  for (const auto& [phase, ms] : m.phase_ms) std::cerr << "  " << phase << ": " << ms << " ms\n";
  if (level == LogLevel::Debug) {
    for (std::size_t t = 1; t < protocol::kFrameTypes; ++t)
      std::cerr << "  " << protocol::to_string(static_cast<protocol::FrameType>(t)) << " sent "
                << m.traffic.bytes_sent[t] << " received " << m.traffic.bytes_received[t] << '\n';
  }
}

ordered_json metrics_json(const protocol::RunMetrics& m) {
  ordered_json j;
  j["and_gates"] = m.and_gates;
  j["ot_count"] = m.ot_count;
  j["garbled_table_bytes"] = m.garbled_table_bytes;
  j["bytes_sent"] = m.traffic.total_sent();
  j["bytes_received"] = m.traffic.total_received();
  j["phase_ms"] = m.phase_ms;
  return j;
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text << '\n';
}

ordered_json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return ordered_json::parse(f);
}

struct KeyFile {
  static void save(const submission::KeyPair& k, const std::string& path) {
    ordered_json j;
    j["public_key"] = crypto::to_base64(k.public_key);
    j["secret_key"] = crypto::to_base64(k.secret_key);
    write_text(j.dump(2), path);
  }
  static submission::KeyPair load(const std::string& path) {
    const auto j = read_json(path);
    submission::KeyPair k;
    const auto pk = crypto::from_base64(j.at("public_key").get<std::string>());
    if (pk.size() != 32) throw std::runtime_error(path + ": bad public key");
    std::copy(pk.begin(), pk.end(), k.public_key.begin());
    if (j.contains("secret_key")) {
      const auto sk = crypto::from_base64(j.at("secret_key").get<std::string>());
      if (sk.size() != 32) throw std::runtime_error(path + ": bad secret key");
      std::copy(sk.begin(), sk.end(), k.secret_key.begin());
    }
    return k;
  }
};

struct ScenarioFlags {
  bench::ScenarioParams params;
  std::uint64_t seed = 1;
  std::string scenario_path;

  void add(CLI::App* app, bool allow_file) {
    app->add_option("--sellers", params.sellers, "number of sellers M");
    app->add_option("--buyers", params.buyers, "number of buyers N");
    app->add_option("--bit-length", params.bit_length, "bit length B of sensitive values");
    app->add_option("--d-max", params.d_max, "maximum bid count D");
    app->add_option("--radius", params.radius_m, "interference radius in metres");
    app->add_option("--area", params.area_m, "side of the square area in metres");
    app->add_option("--seed", seed, "random seed");
    app->add_flag("--profitable-bias", params.profitable_bias,
                  "draw request values from the bid interval (extension)");
    if (allow_file) app->add_option("--scenario", scenario_path, "scenario JSON instead of generating one");
  }

  auction::Scenario scenario() const {
    if (!scenario_path.empty()) return auction::scenario_from_json(read_json(scenario_path));
    return bench::generate_scenario(params, seed);
  }
};

oblivious::Mode impl_mode(const std::string& impl) {
  return impl == "original" ? oblivious::Mode::Original : oblivious::Mode::Improved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving multi-channel double spectrum auction"};
  app.require_subcommand(1);

  // gen
  ScenarioFlags gen_flags;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a random scenario");
  gen_flags.add(gen, false);
  gen->add_option("--out", gen_out, "output file (stdout if omitted)");

  // auction
  ScenarioFlags auc_flags;
  std::string auc_mode = "clear", auc_impl = "improved", auc_out;
  auto* auc = app.add_subcommand("auction", "run a single auction");
  auc_flags.add(auc, true);
  auc->add_option("--mode", auc_mode, "clear or secure")->check(CLI::IsMember({"clear", "secure"}));
  auc->add_option("--impl", auc_impl, "circuit implementation")->check(CLI::IsMember({"original", "improved"}));
  auc->add_option("--out", auc_out, "output file (stdout if omitted)");

  // run
  bench::ExperimentGrid grid;
  std::vector<std::size_t> run_sellers{3}, run_buyers{6};
  std::vector<unsigned> run_bits{16};
  std::string run_mode = "secure", run_impl = "both", run_out;
  auto* run = app.add_subcommand("run", "run an experiment grid and write CSV");
  run->add_option("--sellers", run_sellers, "seller counts")->delimiter(',');
  run->add_option("--buyers", run_buyers, "buyer counts")->delimiter(',');
  run->add_option("--bit-length", run_bits, "bit lengths")->delimiter(',');
  run->add_option("--d-max", grid.base.d_max, "maximum bid count D");
  run->add_option("--radius", grid.base.radius_m, "interference radius in metres");
  run->add_option("--area", grid.base.area_m, "side of the square area in metres");
  run->add_option("--seed", grid.seed, "grid seed");
  run->add_option("--repetitions", grid.repetitions, "runs per grid point")->check(CLI::PositiveNumber);
  run->add_flag("--profitable-bias", grid.base.profitable_bias, "draw request values from the bid interval");
  run->add_option("--mode", run_mode, "clear or secure")->check(CLI::IsMember({"clear", "secure"}));
  run->add_option("--impl", run_impl, "original, improved or both")
      ->check(CLI::IsMember({"original", "improved", "both"}));
  run->add_option("--out", run_out, "CSV file (stdout if omitted)");

  // keygen
  std::string key_out;
  auto* keygen = app.add_subcommand("keygen", "create a key pair for one role");
  keygen->add_option("--out", key_out, "key file")->required();

  // seal
  std::string seal_scenario, seal_pk_a, seal_pk_b, seal_out;
  std::uint64_t seal_seed = 0;
  auto* seal = app.add_subcommand("seal", "split and seal every bidder's values");
  seal->add_option("--scenario", seal_scenario)->required();
  seal->add_option("--auctioneer-key", seal_pk_a, "auctioneer key file")->required();
  seal->add_option("--agent-key", seal_pk_b, "agent key file")->required();
  seal->add_option("--seed", seal_seed, "share randomness (OS randomness if omitted)");
  seal->add_option("--out", seal_out, "output file (stdout if omitted)");

  // serve
  std::string role, host = "127.0.0.1", key_path, subs_path, impl = "improved", serve_out;
  std::uint16_t port = 7700;
  unsigned bits = 16;
  std::uint32_t d_max = 10;
  double radius = 400.0;
  std::optional<std::uint64_t> serve_seed;
  auto* serve = app.add_subcommand("serve", "run one party of a networked session");
  serve->add_option("--role", role, "auctioneer or agent")->required()->check(CLI::IsMember({"auctioneer", "agent"}));
  serve->add_option("--host", host, "agent: auctioneer host; auctioneer: bind address");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--key", key_path, "own key file")->required();
  serve->add_option("--submissions", subs_path, "auctioneer: sealed submissions JSON");
  serve->add_option("--bit-length", bits, "bit length B");
  serve->add_option("--d-max", d_max, "maximum bid count D");
  serve->add_option("--radius", radius, "interference radius in metres");
  serve->add_option("--impl", impl, "circuit implementation")->check(CLI::IsMember({"original", "improved"}));
  serve->add_option("--seed", serve_seed, "deterministic session randomness (testing only)");
  serve->add_option("--out", serve_out, "outcome file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      write_text(auction::scenario_to_json(gen_flags.scenario()).dump(2), gen_out);
    } else if (*auc) {
      const auto sc = auc_flags.scenario();
      ordered_json out;
      if (auc_mode == "clear") {
        out["outcome"] = auction::outcome_to_json(auction::run_clear_auction(sc));
      } else {
        protocol::SessionOptions opt;
        opt.mode = impl_mode(auc_impl);
        opt.seed = auc_flags.seed;
        const auto res = protocol::loopback_session(sc, opt);
        report(res.auctioneer.metrics, "auctioneer");
        out["outcome"] = auction::outcome_to_json(res.auctioneer.outcome);
        out["metrics"] = metrics_json(res.auctioneer.metrics);
      }
      out["digest"] = auction::outcome_digest(auction::outcome_from_json(out["outcome"]));
      write_text(out.dump(2), auc_out);
    } else if (*run) {
      grid.sellers = run_sellers;
      grid.buyers = run_buyers;
      grid.bit_lengths = run_bits;
      grid.modes = {bench::RunMode::Clear};
      if (run_mode == "secure") {
        if (run_impl != "improved") grid.modes.push_back(bench::RunMode::Original);
        if (run_impl != "original") grid.modes.push_back(bench::RunMode::Improved);
      }
      try {
        const auto rows = bench::run_experiment(grid);
        if (run_out.empty() || run_out == "-")
          std::cout << bench::to_csv(rows);
        else
          bench::emit_csv(rows, run_out);
      } catch (const bench::ExperimentMismatch& e) {
        std::cerr << "error: " << e.what() << "\nscenario:\n" << e.scenario_json() << '\n';
        return 3;
      }
    } else if (*keygen) {
      KeyFile::save(submission::KeyPair::generate(), key_out);
    } else if (*seal) {
      const auto sc = auction::scenario_from_json(read_json(seal_scenario));
      const auto a = KeyFile::load(seal_pk_a);
      const auto b = KeyFile::load(seal_pk_b);
      std::uint64_t seed = seal_seed;
      if (seal->count("--seed") == 0) seed = crypto::Prg::from_os().next_u64();
      write_text(submission::to_json(submission::seal_scenario(sc, a.public_key, b.public_key, seed)).dump(2),
                 seal_out);
    } else if (*serve) {
      protocol::SessionConfig cfg;
      cfg.role = role == "auctioneer" ? protocol::Role::Auctioneer : protocol::Role::Agent;
      cfg.bit_length = bits;
      cfg.d_max = d_max;
      cfg.radius_m = radius;
      cfg.mode = impl_mode(impl);
      cfg.keys = KeyFile::load(key_path);
      cfg.seed = serve_seed;
      protocol::SessionResult res;
      if (cfg.role == protocol::Role::Auctioneer) {
        if (subs_path.empty()) throw std::runtime_error("--submissions is required for the auctioneer");
        const auto subs = submission::submissions_from_json(read_json(subs_path));
        protocol::TcpListener listener(port, host);
        std::cerr << "auctioneer listening on " << host << ':' << listener.port() << '\n';
        auto channel = listener.accept();
        res = protocol::run_auctioneer(cfg, *channel, subs);
      } else {
        auto channel = protocol::tcp_connect(host, port);
        res = protocol::run_agent(cfg, *channel);
      }
      report(res.metrics, role.c_str());
      ordered_json out;
      out["outcome"] = auction::outcome_to_json(res.outcome);
      out["digest"] = auction::outcome_digest(res.outcome);
      out["excluded_bidders"] = res.excluded_bidders;
      out["metrics"] = metrics_json(res.metrics);
      write_text(out.dump(2), serve_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
