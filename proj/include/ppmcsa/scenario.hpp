#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ppmcsa/auction_core.hpp"

namespace ppmcsa::auction {

// {bit_length, d_max, radius_m, area_m, sellers:[{id,s,c}], buyers:[{id,x,y,b,d}]}
nlohmann::ordered_json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Field order is fixed: critical_value, winning_vbg_count, winning_sellers, winning_buyers.
nlohmann::ordered_json outcome_to_json(const AuctionOutcome& outcome);
AuctionOutcome outcome_from_json(const nlohmann::json& doc);

// Hex BLAKE2b of the canonical outcome JSON.
std::string outcome_digest(const AuctionOutcome& outcome);

}  // namespace ppmcsa::auction
