#include "modcomb/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace modcomb {

void DataSet::validate() const {
  require(inputs.rows() >= 1, "dataset must contain at least one pair");
  require(inputs.rows() == targets.rows(),
          "inputs and targets must have equal length");
  require(targets.cols() >= 1, "targets must have at least one column");
  if (controls.cols() > 0)
    require(controls.rows() == inputs.rows(),
            "controls must have one row per pair");
  if (externals.cols() > 0)
    require(externals.rows() == inputs.rows(),
            "externals must have one row per pair");
  require(inputs.allFinite() && targets.allFinite(),
          "dataset contains non-finite values");
}

DataSet make_dataset(MatrixXd inputs, MatrixXd targets, MatrixXd controls,
                     MatrixXd externals) {
  DataSet d{std::move(inputs), std::move(targets), std::move(controls),
            std::move(externals)};
  d.validate();
  return d;
}

double mean_row_norm(const MatrixXd& rows) {
  require(rows.rows() >= 1, "empty matrix");
  return rows.rowwise().norm().mean();
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_dataset_csv(const DataSet& data, const std::string& csv_path) {
  std::ofstream out(csv_path);
  require(out.good(), "cannot open " + csv_path + " for writing");
  const Eigen::Index k = data.state_dim();
  for (Eigen::Index j = 0; j < k; ++j) out << "x_" << j << ",";
  for (Eigen::Index j = 0; j < k; ++j)
    out << "y_" << j << (j + 1 < k || data.has_controls() || data.has_externals()
                             ? ","
                             : "");
  for (Eigen::Index j = 0; j < data.controls.cols(); ++j)
    out << "c_" << j
        << (j + 1 < data.controls.cols() || data.has_externals() ? "," : "");
  for (Eigen::Index j = 0; j < data.externals.cols(); ++j)
    out << "e_" << j << (j + 1 < data.externals.cols() ? "," : "");
  out << "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(data.inputs(i, j));
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(data.targets(i, j));
    for (Eigen::Index j = 0; j < data.controls.cols(); ++j)
      row.push_back(data.controls(i, j));
    for (Eigen::Index j = 0; j < data.externals.cols(); ++j)
      row.push_back(data.externals(i, j));
    for (size_t j = 0; j < row.size(); ++j)
      out << fmt_double(row[j]) << (j + 1 < row.size() ? "," : "");
    out << "\n";
  }
}

void save_dataset_manifest(const DataSet& data, const std::string& json_path) {
  nlohmann::ordered_json j;
  j["state_dim"] = data.state_dim();
  j["control_dim"] = data.controls.cols();
  j["external_dim"] = data.externals.cols();
  j["n_pairs"] = data.size();
  std::ofstream out(json_path);
  require(out.good(), "cannot open " + json_path + " for writing");
  out << j.dump(2) << "\n";
}

DataSet load_dataset_csv(const std::string& csv_path) {
  std::ifstream in(csv_path);
  require(in.good(), "cannot open " + csv_path);
  std::string header;
  require(static_cast<bool>(std::getline(in, header)), "empty CSV file");

  Eigen::Index n_x = 0, n_y = 0, n_c = 0, n_e = 0;
  {
    std::stringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("x_", 0) == 0) ++n_x;
      else if (col.rfind("y_", 0) == 0) ++n_y;
      else if (col.rfind("c_", 0) == 0) ++n_c;
      else if (col.rfind("e_", 0) == 0) ++n_e;
      else throw Error("unknown CSV column: " + col);
    }
  }
  require(n_x >= 1 && n_x == n_y, "CSV must contain matching x_/y_ columns");

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    require(static_cast<Eigen::Index>(row.size()) == n_x + n_y + n_c + n_e,
            "CSV row width mismatch");
    rows.push_back(std::move(row));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  MatrixXd xs(n, n_x), ys(n, n_y), cs(n, n_c), es(n, n_e);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index off = 0;
    for (Eigen::Index j = 0; j < n_x; ++j) xs(i, j) = rows[i][off++];
    for (Eigen::Index j = 0; j < n_y; ++j) ys(i, j) = rows[i][off++];
    for (Eigen::Index j = 0; j < n_c; ++j) cs(i, j) = rows[i][off++];
    for (Eigen::Index j = 0; j < n_e; ++j) es(i, j) = rows[i][off++];
  }
  return make_dataset(std::move(xs), std::move(ys), std::move(cs),
                      std::move(es));
}

}  // namespace modcomb
