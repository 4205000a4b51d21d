#include "dsub/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dsub/errors.hpp"

namespace dsub::metrics {

double to_db(double linear) {
  if (linear < 1e-32) return kDbFloor;
  return 10.0 * std::log10(linear);
}

linalg::Vector node_msd(const linalg::Matrix& estimates, const linalg::Matrix& w_star) {
  if (estimates.rows() != w_star.rows() || estimates.cols() != w_star.cols()) {
    throw DimensionMismatch(fmt::format("estimates {}x{} vs optimum {}x{}", estimates.rows(),
                                        estimates.cols(), w_star.rows(), w_star.cols()));
  }
  return (estimates - w_star).colwise().squaredNorm().transpose();
}

MsdValue network_msd(const linalg::Matrix& estimates, const linalg::Matrix& w_star) {
  const linalg::Vector per_node = node_msd(estimates, w_star);
  MsdValue v;
  v.linear = per_node.size() == 0 ? 0.0 : per_node.mean();
  v.db = to_db(v.linear);
  return v;
}

MsdTrace average_traces(std::span<const MsdTrace> traces) {
  if (traces.empty()) throw InvalidArgument("no traces to average");
  const MsdTrace& head = traces.front();
  bool per_node = true;
  std::size_t total_runs = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const MsdTrace& t = traces[i];
    if (t.label != head.label || t.size() != head.size() || t.node_count != head.node_count) {
      throw LengthMismatch(fmt::format(
          "trace {} ('{}', {} entries) does not match trace 0 ('{}', {} entries)", i, t.label,
          t.size(), head.label, head.size()));
    }
    if (t.run_count == 0) throw InvalidArgument(fmt::format("trace {} covers no runs", i));
    if (i > 0) {
      const MsdTrace& prev = traces[i - 1];
      if (t.first_run < prev.first_run + prev.run_count) {
        throw OrderViolation(fmt::format(
            "trace {} starts at run {} but the previous trace ends at run {}; pass traces in "
            "ascending run order",
            i, t.first_run, prev.first_run + prev.run_count - 1));
      }
    }
    per_node = per_node && t.has_per_node();
    total_runs += t.run_count;
  }

  MsdTrace out;
  out.label = head.label;
  out.first_run = head.first_run;
  out.run_count = total_runs;
  out.node_count = head.node_count;
  out.linear.assign(head.size(), 0.0);
  if (per_node) out.per_node.assign(head.per_node.size(), 0.0);
  for (const MsdTrace& t : traces) {
    const double w = static_cast<double>(t.run_count);
    for (std::size_t n = 0; n < t.size(); ++n) out.linear[n] += w * t.linear[n];
    for (std::size_t i = 0; i < out.per_node.size(); ++i) out.per_node[i] += w * t.per_node[i];
  }
  const double inv = 1.0 / static_cast<double>(total_runs);
  for (double& v : out.linear) v *= inv;
  for (double& v : out.per_node) v *= inv;
  return out;
}

std::size_t default_window(std::size_t trace_length) {
  const std::size_t iterations = trace_length > 0 ? trace_length - 1 : 0;
  const std::size_t tenth = (iterations + 9) / 10;
  return std::min(trace_length, std::max<std::size_t>(50, tenth));
}

double steady_state_msd(const MsdTrace& trace, std::size_t window) {
  if (window == 0 || window > trace.size()) {
    throw WindowTooLarge(fmt::format("window {} outside 1..{}", window, trace.size()));
  }
  const auto begin = trace.linear.end() - static_cast<std::ptrdiff_t>(window);
  const double sum = std::accumulate(begin, trace.linear.end(), 0.0);
  return to_db(sum / static_cast<double>(window));
}

}  // namespace dsub::metrics
