#pragma once

// Scenario files: UTF-8 JSON with top-level keys users, costs, alpha and
// snr_model. Unknown keys are rejected at every level.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmvno/error.hpp"
#include "cmvno/market_model.hpp"

namespace cmvno {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                                std::string_view where) {
  if (!obj.is_object()) fail(ErrorKind::Parse, std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(ErrorKind::Parse, "unknown key '" + key + "' in " + std::string(where));
  }
}

inline double number_at(const nlohmann::json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) fail(ErrorKind::Parse, std::string("missing '") + key + "' in " + std::string(where));
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(ErrorKind::Parse, std::string("'") + key + "' in " + std::string(where) + " must be a number");
  return v.get<double>();
}

inline std::vector<double> numbers_at(const nlohmann::json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key) || !obj.at(key).is_array()) {
    fail(ErrorKind::Parse, std::string("'") + key + "' in " + std::string(where) + " must be an array");
  }
  std::vector<double> out;
  for (const auto& v : obj.at(key)) {
    if (!v.is_number()) fail(ErrorKind::Parse, std::string("'") + key + "' entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::vector<UserProfile> parse_users(const nlohmann::json& j) {
  std::vector<UserProfile> users;
  if (j.is_object()) {
    reject_unknown_keys(j, {"g"}, "users");
    for (double g : numbers_at(j, "g", "users")) users.push_back(UserProfile::from_g(g));
    return users;
  }
  if (!j.is_array()) fail(ErrorKind::Parse, "'users' must be an array of profiles or an object {\"g\": [...]}");
  for (const auto& u : j) {
    reject_unknown_keys(u, {"p_max", "h", "n0"}, "user profile");
    users.emplace_back(number_at(u, "p_max", "user profile"), number_at(u, "h", "user profile"),
                       number_at(u, "n0", "user profile"));
  }
  return users;
}

inline AlphaDistribution parse_alpha(const nlohmann::json& j) {
  reject_unknown_keys(j, {"type", "params"}, "alpha");
  if (!j.contains("type") || !j.at("type").is_string()) fail(ErrorKind::Parse, "alpha.type must be a string");
  const auto type = j.at("type").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  if (type == "uniform") {
    reject_unknown_keys(params, {}, "alpha.params");
    return AlphaDistribution::uniform();
  }
  if (type == "beta") {
    reject_unknown_keys(params, {"a", "b"}, "alpha.params");
    return AlphaDistribution::beta(number_at(params, "a", "alpha.params"), number_at(params, "b", "alpha.params"));
  }
  if (type == "discrete") {
    reject_unknown_keys(params, {"points", "probs"}, "alpha.params");
    return AlphaDistribution::discrete(numbers_at(params, "points", "alpha.params"),
                                       numbers_at(params, "probs", "alpha.params"));
  }
  fail(ErrorKind::Parse, "alpha.type must be one of uniform, beta, discrete");
}

}  // namespace detail

/// Builds a validated Scenario from its JSON form. Missing `alpha` means
/// uniform; missing `snr_model` means "high". Parse problems raise
/// ErrorKind::Parse, invalid values raise the matching validation kind.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"users", "costs", "alpha", "snr_model"}, "scenario");
  if (!j.contains("users")) fail(ErrorKind::Parse, "scenario needs 'users'");
  if (!j.contains("costs")) fail(ErrorKind::Parse, "scenario needs 'costs'");
  auto users = detail::parse_users(j.at("users"));
  const auto& c = j.at("costs");
  detail::reject_unknown_keys(c, {"c_s", "c_l"}, "costs");
  const auto costs = CostParams::make(detail::number_at(c, "c_s", "costs"), detail::number_at(c, "c_l", "costs"));
  const auto alpha = j.contains("alpha") ? detail::parse_alpha(j.at("alpha")) : AlphaDistribution::uniform();
  SnrModel model = SnrModel::HighSnr;
  if (j.contains("snr_model")) {
    const auto& m = j.at("snr_model");
    if (m == "high") {
      model = SnrModel::HighSnr;
    } else if (m == "general") {
      model = SnrModel::General;
    } else {
      fail(ErrorKind::Parse, "snr_model must be \"high\" or \"general\"");
    }
  }
  return Scenario(std::move(users), costs, alpha, model);
}

inline Scenario scenario_from_string(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_string(buf.str());
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : s.users()) users.push_back({{"p_max", u.p_max()}, {"h", u.h()}, {"n0", u.n0()}});
  nlohmann::json alpha = std::visit(
      [](const auto& d) -> nlohmann::json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, AlphaDistribution::Uniform01>) {
          return {{"type", "uniform"}};
        } else if constexpr (std::is_same_v<T, AlphaDistribution::Beta>) {
          return {{"type", "beta"}, {"params", {{"a", d.a}, {"b", d.b}}}};
        } else {
          return {{"type", "discrete"}, {"params", {{"points", d.points}, {"probs", d.probs}}}};
        }
      },
      s.alpha().law());
  return {{"users", users},
          {"costs", {{"c_s", s.costs().c_s}, {"c_l", s.costs().c_l}}},
          {"alpha", alpha},
          {"snr_model", s.snr_model() == SnrModel::HighSnr ? "high" : "general"}};
}

}  // namespace cmvno
