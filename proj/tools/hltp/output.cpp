#include "output.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include <hltp/errors.hpp>

namespace hltp::cli {

namespace {

FILE* open_or_throw(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error("cannot write " + path);
  return fp;
}

}  // namespace

OutDir::OutDir(const std::filesystem::path& root) : root_(root) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec || !std::filesystem::is_directory(root_)) throw Error("cannot create output directory " + root_.string());
}

std::string OutDir::path(const std::string& name) {
  std::lock_guard lock(mu_);
  files_.push_back(name);
  return (root_ / name).string();
}

std::vector<std::string> OutDir::files() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> f = files_;
  std::sort(f.begin(), f.end());
  return f;
}

void write_phasors_csv(const std::string& path, const FourierMatrix& f) {
  FILE* fp = open_or_throw(path);
  std::fprintf(fp, "k,row,col,re,im\n");
  for (int k = -f.band(); k <= f.band(); ++k) {
    const MatrixXcd& P = f.phasor(k);
    for (int i = 0; i < f.rows(); ++i)
      for (int j = 0; j < f.cols(); ++j)
        std::fprintf(fp, "%d,%d,%d,%.17g,%.17g\n", k, i, j, P(i, j).real(), P(i, j).imag());
  }
  std::fclose(fp);
}

void write_phasor_vector_csv(const std::string& path, const PhasorVector& v) {
  FILE* fp = open_or_throw(path);
  std::fprintf(fp, "k,row,re,im\n");
  for (int k = -v.band; k <= v.band; ++k)
    for (int i = 0; i < v.dim(); ++i) std::fprintf(fp, "%d,%d,%.17g,%.17g\n", k, i, v.at(i, k).real(), v.at(i, k).imag());
  std::fclose(fp);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  FILE* fp = open_or_throw(path);
  for (size_t i = 0; i < header.size(); ++i) std::fprintf(fp, "%s%s", i ? "," : "", header[i].c_str());
  std::fputc('\n', fp);
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) std::fprintf(fp, "%s%.17g", i ? "," : "", r[i]);
    std::fputc('\n', fp);
  }
  std::fclose(fp);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json to_json(cdouble z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json to_json(const VectorXcd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

nlohmann::json to_json(const MatrixXcd& M) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) a.push_back(to_json(VectorXcd(M.row(i).transpose())));
  return a;
}

nlohmann::json version_info() {
  return {{"hltp", HLTP_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

}  // namespace hltp::cli
