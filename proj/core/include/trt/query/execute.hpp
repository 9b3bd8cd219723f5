#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "trt/query/plan.hpp"
#include "trt/query/source.hpp"
#include "trt/query/value.hpp"

namespace trt::query {

struct ExecOptions {
  // Turn time bounds of filters directly above a leaf into scan ranges.
  bool pushdown = true;
  // Answer whole-group aggregates over one series from the block index.
  bool aggregate_fast_path = true;
};

struct ScanRecord {
  std::string series;
  std::int64_t start = 0;  // inclusive, series ticks
  std::int64_t end = 0;
};

struct ExecStats {
  std::vector<ScanRecord> scans;
  std::size_t fast_aggregates = 0;
  std::set<std::string> warnings;
};

// Evaluates the tree bottom-up. Leaves match against the mapping named by the
// nearest set_map ancestor, or against the union of all mappings.
//
// Leaf tables have one column per BGP variable: series values for variables
// bound to columns, times for variables bound to a time axis and the node
// text for unbound nodes. Variables bound to different series of one match
// are joined on equal timestamps. Each series is scanned once per leaf.
[[nodiscard]] ResultTable execute(const OpNode& root, DataSource& source, const MappingSet& mappings,
                                  const ExecOptions& options = {}, ExecStats* stats = nullptr);

}  // namespace trt::query
