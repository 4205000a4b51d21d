#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dsub/network.hpp"
#include "dsub/scenario.hpp"

namespace dsub::scenario {

/// Everything needed to rebuild a scenario bit-exactly.
///
/// Text layout (node and row ids 1-based, reals as %.17g):
///
///     # dsubspace scenario v1
///     dimension <L>
///     nodes <N>
///     rank <r>
///     seed <u64>
///     local_mode dense|support
///     basis            followed by L lines of r reals
///     coefficients     followed by r lines of N reals
///     edges <count>    followed by `u v` lines
///     support <k> <row> <row> ...   one line per node
struct ScenarioDump {
  SubspaceModel model;
  std::vector<network::Edge> edges;
  LocalMode mode = LocalMode::kDense;
  std::vector<std::vector<std::size_t>> supports;  // 0-based rows per node
};

[[nodiscard]] std::string to_string(LocalMode mode);

void write_scenario(std::ostream& out, const SubspaceModel& model, const network::Topology& topo,
                    LocalMode mode, const std::vector<LocalSubspace>& locals);

/// Parses a dump and recomputes w_star from the stored factors. Throws
/// FormatError on malformed input.
[[nodiscard]] ScenarioDump read_scenario(std::istream& in);

}  // namespace dsub::scenario
