#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dsub/linalg.hpp"

namespace dsub::metrics {

/// dB values are clamped here when the linear MSD drops below 1e-32.
inline constexpr double kDbFloor = -320.0;

[[nodiscard]] double to_db(double linear);

struct MsdValue {
  double linear = 0.0;
  double db = kDbFloor;
};

/// Squared deviation of each column of `estimates` from the same column of
/// `w_star`.
[[nodiscard]] linalg::Vector node_msd(const linalg::Matrix& estimates,
                                      const linalg::Matrix& w_star);

/// (1/N) sum_k ||w_k - w*_k||^2 and its dB value.
[[nodiscard]] MsdValue network_msd(const linalg::Matrix& estimates, const linalg::Matrix& w_star);

/// Learning curve of one algorithm. Entry n is the MSD after n iterations,
/// so a T-iteration run has T + 1 entries. A trace covers runs
/// [first_run, first_run + run_count).
struct MsdTrace {
  std::string label;
  std::size_t first_run = 0;
  std::size_t run_count = 1;
  std::size_t node_count = 0;
  std::vector<double> linear;
  std::vector<double> per_node;  // row-major (T+1) x node_count, or empty

  [[nodiscard]] std::size_t size() const noexcept { return linear.size(); }
  [[nodiscard]] double db(std::size_t n) const { return to_db(linear.at(n)); }
  [[nodiscard]] bool has_per_node() const noexcept { return !per_node.empty(); }
  [[nodiscard]] double node_value(std::size_t n, std::size_t k) const {
    return per_node.at(n * node_count + k);
  }
};

/// Run-weighted pointwise mean of linear MSD (and per-node MSD when every
/// input has it). Inputs must share label, length and node count
/// (LengthMismatch otherwise) and be ordered by ascending, non-overlapping
/// run ranges (OrderViolation otherwise).
[[nodiscard]] MsdTrace average_traces(std::span<const MsdTrace> traces);

/// Final 10% of the iterations, at least 50 entries, capped at the trace length.
[[nodiscard]] std::size_t default_window(std::size_t trace_length);

/// Mean linear MSD over the last `window` entries, in dB. Throws
/// WindowTooLarge when window exceeds the trace length or is zero.
[[nodiscard]] double steady_state_msd(const MsdTrace& trace, std::size_t window);

}  // namespace dsub::metrics
