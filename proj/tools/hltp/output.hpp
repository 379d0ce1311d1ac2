#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <hltp/fourier.hpp>

namespace hltp::cli {

// Artifact directory of one job. Every file written through it is listed
// in report.json. path() may be called from several threads.
class OutDir {
 public:
  explicit OutDir(const std::filesystem::path& root);
  std::string path(const std::string& name);
  const std::filesystem::path& root() const { return root_; }
  std::vector<std::string> files() const;

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
  mutable std::mutex mu_;
};

// One row per (k, row, col): k,row,col,re,im.
void write_phasors_csv(const std::string& path, const FourierMatrix& f);
void write_phasor_vector_csv(const std::string& path, const PhasorVector& v);
// Generic numeric table with a header line.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);
void write_json(const std::string& path, const nlohmann::json& j);

nlohmann::json to_json(cdouble z);
nlohmann::json to_json(const VectorXcd& v);
nlohmann::json to_json(const MatrixXcd& M);

nlohmann::json version_info();

}  // namespace hltp::cli
