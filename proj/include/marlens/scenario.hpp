#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace marlens {

enum class EnvKind { LBF, RWARE };
enum class SizeClass { Tiny, Small, Medium, Large };

struct MalformedName : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownEnvPrefix : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedSizeClass : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structured description of one benchmark task, decoded from its
/// canonical name ("Foraging-2s-8x8-2p-2f-coop-v2", "rware-tiny-4ag-v1").
struct Scenario {
  EnvKind env_kind = EnvKind::LBF;
  int grid_w = 0;
  int grid_h = 0;
  int n_agents = 0;
  int n_food = 0;                      // LBF only, 0 for RWARE
  std::optional<int> sight;            // LBF partial observability radius
  bool coop = false;                   // LBF forced-cooperative flag
  std::optional<SizeClass> size_class; // RWARE only
  std::string difficulty;              // RWARE <diff> field, "" = default
  std::string version = "v1";

  bool operator==(const Scenario&) const = default;
};

const char* size_class_name(SizeClass sc);

Scenario parse_scenario(const std::string& name);
std::string render_scenario(const Scenario& s);

} // namespace marlens
