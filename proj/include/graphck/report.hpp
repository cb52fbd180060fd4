#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

namespace graphck {

/// FNV-1a 64-bit digest of the raw input text; stable across platforms so
/// reports are byte-identical for identical inputs.
inline std::string input_digest(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Report {
  std::string command;
  std::string digest;
  bool pass = true;
  nlohmann::json body;

  nlohmann::json to_json() const {
    nlohmann::json doc;
    doc["command"] = command;
    doc["inputs_digest"] = digest;
    doc["pass"] = pass;
    doc["result"] = body;
    return doc;
  }
};

}  // namespace graphck
