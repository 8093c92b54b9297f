#pragma once

// Point-cloud files.
//
// CSV: a header row naming the columns x1..xd and optionally `weight`,
// followed by one row per atom. JSON: an array of records with the same
// keys. A missing weight column means equal weights 1/N.

#include <iosfwd>
#include <string>

#include "detcurve/measure.hpp"

namespace detcurve {

enum class CloudFormat { csv, json };

PointMeasure read_cloud_csv(std::istream& in);
PointMeasure read_cloud_json(std::istream& in);
void write_cloud_csv(std::ostream& out, const PointMeasure& mu);
void write_cloud_json(std::ostream& out, const PointMeasure& mu);

/// Format chosen from the extension (.json, otherwise CSV).
CloudFormat cloud_format_for(const std::string& path);
PointMeasure load_cloud(const std::string& path);
void save_cloud(const std::string& path, const PointMeasure& mu);

}  // namespace detcurve
