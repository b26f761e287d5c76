#pragma once

#include <string>
#include <vector>

#include "hbarena/analytics.hpp"

namespace hbarena {

struct ReportCell {
  std::string text;
  bool numeric = false;
};

struct ReportTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<ReportCell>> rows;
};

struct ReportOptionsCore {
  LatencyOptions latency;
};

const std::vector<std::string>& report_names();
bool is_report_name(const std::string& name);

/// Throws std::invalid_argument for an unknown report name.
ReportTable build_report(const std::string& name, std::span<const DetectionResult> results,
                         const ReportOptionsCore& options = {});

std::string to_csv(const ReportTable& t);
/// Combined report: {"<name>": [{"<column>": value, ...}, ...], ...} in the given order.
std::string to_json(const std::vector<ReportTable>& tables);

}  // namespace hbarena
