#pragma once

#include "gvm/dynamics.hpp"
#include "gvm/fitting.hpp"
#include "gvm/measures.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace gvm {

// Plot-ready CSV exports. Numbers use the shortest representation that
// round-trips, so a written series reads back bit-identical.
void write_magnetization_csv(std::ostream& os, const Eigen::Ref<const Eigen::VectorXd>& m);
void write_returns_csv(std::ostream& os, const ReturnSeries& r);
void write_acf_csv(std::ostream& os, const AcfCurve& acf);
void write_histogram_csv(std::ostream& os, const Histogram& h);
void write_ecdf_csv(std::ostream& os, const Ecdf& e);
void write_qq_csv(std::ostream& os, const QqPoints& qq);

/// Reads a "t,r" returns file (the `r` column is used).
ReturnSeries read_returns_csv(const std::filesystem::path& path, SeriesSource source = SeriesSource::Simulation);

std::string format_number(double x);

nlohmann::ordered_json to_json(const SimConfig& cfg);
nlohmann::ordered_json to_json(const NetworkStats& stats);
nlohmann::ordered_json to_json(const FitReport& rep);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

} // namespace gvm
