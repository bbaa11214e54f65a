#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asyncdual/problem.hpp"

namespace asyncdual {

inline constexpr int kInstanceVersion = 1;
inline constexpr const char* kInstanceFormat = "asyncdual-instance";

struct InstanceFile {
  Problem problem;
  std::optional<Vector> slater_candidate;
  std::string name;
  std::string description;
  /// Unknown fields that were skipped, by path.
  std::vector<std::string> warnings;
};

/// JSON text of the instance. Doubles are written in shortest round-trip
/// form, infinite box bounds as null.
std::string serialize_instance(const InstanceFile& instance);
/// Throws SchemaError whose message starts with the offending field path.
InstanceFile parse_instance(const std::string& text);

void save_instance(const std::filesystem::path& path, const InstanceFile& instance);
InstanceFile load_instance(const std::filesystem::path& path);

/// Exact (bitwise) equality of two problems: graph, costs, dims and every block.
bool identical(const Problem& a, const Problem& b);

}  // namespace asyncdual
