#include "ppmcsa/scenario.hpp"

#include <fstream>

#include "ppmcsa/crypto.hpp"

namespace ppmcsa::auction {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json scenario_to_json(const Scenario& scenario) {
  ordered_json doc;
  doc["bit_length"] = scenario.bit_length;
  doc["d_max"] = scenario.d_max;
  doc["radius_m"] = scenario.radius_m;
  doc["area_m"] = scenario.area_m;
  doc["sellers"] = ordered_json::array();
  for (const auto& s : scenario.sellers)
    doc["sellers"].push_back({{"id", s.id}, {"s", s.request_value}, {"c", s.request_count}});
  doc["buyers"] = ordered_json::array();
  for (const auto& b : scenario.buyers)
    doc["buyers"].push_back(
        {{"id", b.id}, {"x", b.x}, {"y", b.y}, {"b", b.bid_value}, {"d", b.bid_count}});
  return doc;
}

Scenario scenario_from_json(const json& doc) {
  Scenario sc;
  try {
    sc.bit_length = doc.at("bit_length").get<unsigned>();
    sc.d_max = doc.at("d_max").get<std::uint32_t>();
    sc.radius_m = doc.at("radius_m").get<double>();
    sc.area_m = doc.at("area_m").get<double>();
    for (const auto& s : doc.at("sellers"))
      sc.sellers.push_back(
          {s.at("id").get<Id>(), s.at("s").get<Money>(), s.at("c").get<std::uint32_t>(), false});
    for (const auto& b : doc.at("buyers"))
      sc.buyers.push_back({b.at("id").get<Id>(), b.at("x").get<double>(), b.at("y").get<double>(),
                           b.at("b").get<Money>(), b.at("d").get<std::uint32_t>(), false});
  } catch (const json::exception& e) {
    throw AuctionError(std::string("malformed scenario: ") + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AuctionError("cannot open scenario " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw AuctionError("scenario " + path.string() + " is not JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw AuctionError("cannot write " + path.string());
  out << scenario_to_json(scenario).dump(2) << '\n';
}

ordered_json outcome_to_json(const AuctionOutcome& outcome) {
  ordered_json doc;
  doc["critical_value"] = outcome.critical_value;
  doc["winning_vbg_count"] = outcome.winning_vbg_count;
  doc["winning_sellers"] = ordered_json::array();
  for (const auto& s : outcome.winning_sellers)
    doc["winning_sellers"].push_back({{"id", s.id}, {"channels", s.channels}, {"payment", s.payment}});
  doc["winning_buyers"] = ordered_json::array();
  for (const auto& b : outcome.winning_buyers)
    doc["winning_buyers"].push_back({{"id", b.id}, {"channels", b.channels}, {"price", b.price}});
  return doc;
}

AuctionOutcome outcome_from_json(const json& doc) {
  AuctionOutcome o;
  o.critical_value = doc.at("critical_value").get<Money>();
  o.winning_vbg_count = doc.at("winning_vbg_count").get<std::uint64_t>();
  for (const auto& s : doc.at("winning_sellers"))
    o.winning_sellers.push_back({s.at("id").get<Id>(), s.at("channels").get<std::uint32_t>(),
                                 s.at("payment").get<Money>()});
  for (const auto& b : doc.at("winning_buyers"))
    o.winning_buyers.push_back({b.at("id").get<Id>(), b.at("channels").get<std::uint32_t>(),
                                b.at("price").get<Money>()});
  return o;
}

std::string outcome_digest(const AuctionOutcome& outcome) {
  const std::string text = outcome_to_json(outcome).dump();
  const auto d = crypto::digest({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  return crypto::to_hex(d);
}

}  // namespace ppmcsa::auction
