#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace svcache {

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> mode;
  std::optional<std::size_t> threads;  // normally taken from SVC_CACHE_THREADS
};

/// Exit codes: 0 ok, 1 invalid config or usage, 2 optimizer abort,
/// 3 placement/library fingerprint mismatch.
int cmd_optimize(const std::string& config_path, const std::string& out_dir,
                 const CliOverrides& overrides, std::ostream& out, std::ostream& err);

int cmd_evaluate(const std::string& config_path, const std::string& placement_path,
                 const std::string& out_dir, const CliOverrides& overrides, std::ostream& out,
                 std::ostream& err);

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& out_dir, const CliOverrides& overrides, std::ostream& out,
              std::ostream& err);

}  // namespace svcache
