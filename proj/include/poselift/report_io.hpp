#pragma once

#include <string>

#include "poselift/metrics.hpp"

namespace poselift {

/// Report serialization. CSV column order is fixed:
/// bucket_type,bucket_name,frames,mpjpe_mm,pck150,auc
void write_report_csv(const EvalReport& report, const std::string& path);
void write_report_json(const EvalReport& report, const std::string& path);
std::string report_csv_string(const EvalReport& report);

}  // namespace poselift
