#pragma once

// Scenario generation and batch runs of the clear and secure auctions.
//
// Random draws use std::mt19937_64. An integer in [lo, hi] is
// lo + floor(x * (hi - lo + 1) / 2^64) for one 64-bit output x; a coordinate in
// [0, area) is (x >> 11) * 2^-53 * area. For a scenario seed the generator
// first draws two child seeds (sellers, buyers); the seller stream then yields
// (s, c) per seller and the buyer stream (x, y, b, d) per buyer, ids ascending
// from 1.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppmcsa/auction_core.hpp"

namespace ppmcsa::bench {

struct ScenarioParams {
  std::size_t sellers = 10;
  std::size_t buyers = 50;
  unsigned bit_length = 16;
  std::uint32_t d_max = 10;
  double radius_m = 400.0;
  double area_m = 2000.0;
  std::uint64_t s_max = 150;
  std::uint64_t b_max = 50;
  std::uint32_t c_max = 10;
  std::uint32_t d_draw_max = 10;  // capped at d_max
  // Extension: request values drawn from [1..b_max] so more trades are profitable.
  bool profitable_bias = false;

  void validate() const;
};

auction::Scenario generate_scenario(const ScenarioParams& params, std::uint64_t seed);

// Uniform integer in [lo, hi] from one generator output, as documented above.
std::uint64_t draw_range(std::uint64_t x, std::uint64_t lo, std::uint64_t hi);

enum class RunMode { Clear, Original, Improved };
const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& text);

struct ExperimentGrid {
  std::vector<std::size_t> sellers{3};
  std::vector<std::size_t> buyers{6};
  std::vector<unsigned> bit_lengths{16};
  std::vector<RunMode> modes{RunMode::Clear, RunMode::Original, RunMode::Improved};
  std::size_t repetitions = 1;
  std::uint64_t seed = 1;
  ScenarioParams base;  // sellers, buyers and bit length are overridden per point

  void validate() const;
};

// Scenario seed for one repetition. Every grid point of a repetition uses the
// same seed, so a point with more sellers or buyers extends the smaller
// scenario: the first M sellers and N buyers coincide.
std::uint64_t point_seed(std::uint64_t grid_seed, std::size_t repetition);

struct ExperimentRow {
  std::size_t sellers = 0;
  std::size_t buyers = 0;
  unsigned bit_length = 0;
  std::uint32_t d_max = 0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::string mode;
  double wall_ms = 0.0;
  std::uint64_t bytes = 0;  // both directions; 0 for clear runs
  std::uint64_t and_gates = 0;
  std::uint64_t ot_count = 0;
  std::size_t groups = 0;
  std::uint64_t winning_vbgs = 0;
  std::uint64_t critical_value = 0;
  std::string outcome_digest;

  bool operator==(const ExperimentRow&) const = default;
};

class ExperimentMismatch : public std::runtime_error {
 public:
  ExperimentMismatch(const std::string& what, std::string scenario_json)
      : std::runtime_error(what), scenario_json_(std::move(scenario_json)) {}
  const std::string& scenario_json() const { return scenario_json_; }

 private:
  std::string scenario_json_;
};

// One row per (point, repetition, mode). Secure outcomes are compared with the
// clear oracle; a difference throws ExperimentMismatch carrying the scenario.
std::vector<ExperimentRow> run_experiment(const ExperimentGrid& grid);

// Rows of one scenario.
std::vector<ExperimentRow> run_scenario(const auction::Scenario& scenario, const std::vector<RunMode>& modes,
                                        std::size_t repetition = 0, std::uint64_t seed = 0);

const std::vector<std::string>& csv_header();
enum class WriteMode { Truncate, Append };
// Append is rejected: every file carries exactly one header.
void emit_csv(const std::vector<ExperimentRow>& rows, const std::filesystem::path& path,
              WriteMode mode = WriteMode::Truncate);
std::string to_csv(const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> parse_csv(const std::string& text);
std::vector<ExperimentRow> load_csv(const std::filesystem::path& path);

// Least-squares fit y = a + b x and its coefficient of determination.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ppmcsa::bench
