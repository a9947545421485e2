#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "wernet/errors.hpp"

namespace wernet::detail {

/// Rejects keys outside `allowed`; `context` names the enclosing object in the message.
inline void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                               std::string_view context) {
  if (!j.is_object()) throw ParameterError(std::string(context) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) throw ParameterError("unknown key \"" + item.key() + "\" in " + std::string(context));
  }
}

/// Assigns j[key] into `out` when present; type mismatches become ParameterError.
template <typename T>
void read_optional(const nlohmann::json& j, const char* key, T& out, std::string_view context) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParameterError("invalid value for \"" + std::string(key) + "\" in " + std::string(context));
  }
}

}  // namespace wernet::detail
